use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("block side {block} does not tile box side {side}")]
    Tiling { block: usize, side: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("pivot breakdown at row {row} for shift {shift:e}")]
    PivotBreakdown { row: usize, shift: f64 },

    #[error("matrix order {order} exceeds dense cap {cap}")]
    OrderTooLarge { order: usize, cap: usize },

    #[error("bandwidth {bandwidth} is below grid spacing {spacing}")]
    BandwidthTooSmall { bandwidth: f64, spacing: f64 },

    #[error("sample mean is zero")]
    ZeroMean,

    #[error("need at least {needed} realizations, got {actual}")]
    InsufficientSamples { needed: u64, actual: u64 },

    #[error("{dropped} of {total} realizations failed; last failure at realization {realization}: {source}")]
    TooManyFailures {
        dropped: u64,
        total: u64,
        realization: u64,
        source: Box<Error>,
    },

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
