//! Command-line front end for `levy-spectra`: campaign configs, presets,
//! artifact files, reports and the built-in acceptance criteria.

pub mod acceptance;
pub mod artifacts;
pub mod campaign;
pub mod cli;
pub mod commands;
pub mod error;
pub mod presets;

pub use campaign::{Campaign, Format, Overrides};
pub use cli::run;
pub use error::{CliError, CliResult};
