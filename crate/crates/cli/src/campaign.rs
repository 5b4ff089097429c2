//! Campaign configuration: model keys at the top level plus `[window]`,
//! `[run]` and `[output]` tables.
//!
//! ```toml
//! dim = 1
//! variant = "diagonal"
//! rank = 2
//! hopping = 0.0
//! seed = 7
//!
//! [disorder]
//! a = 0.0
//! b = 1.0
//!
//! [window]
//! center = 0.5
//! interval = [-0.5, 0.5]        # base interval I, rescaled by the box volume
//! lengths = [0.25, 0.5, 1, 2]   # |I| values for scans (centred on 0)
//!
//! [run]
//! boxes = [500]                 # half sides L, or `sides = [...]`
//! realizations = 20000
//! blocks = true                 # also run the block statistics
//! epsilon = 0.1                 # block size ℓ = ⌊L^{(1-ε)/2}⌋ unless block_half_side is set
//! energy_range = [-0.5, 1.5]    # IDS grid for `dos`
//! energy_points = 81
//! bandwidth = 0.05
//!
//! [output]
//! dir = "out/example1"
//! format = "both"               # csv | json | both
//! ```

use std::path::{Path, PathBuf};

use levy_spectra::config::{RawModel, DEFAULT_SEED};
use levy_spectra::engine::DEFAULT_BLOCK_EPSILON;
use levy_spectra::{BlockScheme, EnergyWindow, LatticeBox, ModelConfig, ModelSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::presets;

pub const SEED_ENV: &str = "LEVY_SPECTRA_SEED";
pub const DEFAULT_REALIZATIONS: u64 = 10_000;
pub const DEFAULT_OUT_DIR: &str = "levy-out";
pub const DEFAULT_WEGNER_LENGTHS: [f64; 4] = [0.25, 0.5, 1.0, 2.0];
pub const DEFAULT_MINAMI_LENGTHS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
const DEFAULT_ENERGY_POINTS: usize = 81;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }

    fn parse(name: &str) -> CliResult<Self> {
        match name {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "both" => Ok(Format::Both),
            other => Err(CliError::config(
                "output.format",
                format!("unknown format `{other}` (expected csv, json or both)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawWindow {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawRun {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boxes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sides: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realizations: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_half_side: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_range: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_rank: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

/// A campaign file as written, before validation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawCampaign {
    #[serde(flatten)]
    pub model: RawModel,
    #[serde(default)]
    pub window: RawWindow,
    #[serde(default)]
    pub run: RawRun,
    #[serde(default)]
    pub output: RawOutput,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    /// Raw value of `LEVY_SPECTRA_SEED`, used when `seed` is unset.
    pub env_seed: Option<String>,
    pub realizations: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Overrides {
    /// Reads the seed variable from the process environment.
    pub fn with_env(mut self) -> Self {
        self.env_seed = std::env::var(SEED_ENV).ok();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockChoice {
    HalfSide(usize),
    Epsilon(f64),
}

impl BlockChoice {
    pub fn scheme(&self, lattice: &LatticeBox) -> CliResult<BlockScheme> {
        let scheme = match *self {
            BlockChoice::HalfSide(ell) => BlockScheme::new(lattice, ell),
            BlockChoice::Epsilon(eps) => {
                let l = lattice.side() / 2;
                let ell = levy_spectra::engine::nominal_block_half_side(l, eps);
                BlockScheme::new(lattice, ell).or_else(|_| BlockScheme::default_for(lattice, eps))
            }
        };
        scheme.map_err(|e| CliError::config("run.block_half_side", e.to_string()))
    }
}

/// A validated campaign.
#[derive(Debug, Clone)]
pub struct Campaign {
    /// The configuration with command-line overrides folded in.
    pub raw: RawCampaign,
    pub spec: ModelSpec,
    pub boxes: Vec<LatticeBox>,
    pub seed: u64,
    pub center: f64,
    pub interval: (f64, f64),
    pub lengths: Option<Vec<f64>>,
    pub realizations: u64,
    pub workers: usize,
    pub blocks: Option<BlockChoice>,
    pub energy_range: (f64, f64),
    pub energy_points: usize,
    pub bandwidth: Option<f64>,
    pub fit_rank: usize,
    pub out_dir: PathBuf,
    pub format: Format,
}

fn finite(value: f64, field: &str) -> CliResult<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::config(field, format!("{value} is not finite")))
    }
}

fn box_error(field: &str, e: levy_spectra::Error) -> CliError {
    match e {
        levy_spectra::Error::Config { field: f, message } if f == "half_side" || f == "side" => {
            CliError::config(field, message)
        }
        other => CliError::Config(other),
    }
}

impl Campaign {
    pub fn from_toml_str(text: &str, overrides: &Overrides) -> CliResult<Self> {
        let raw: RawCampaign =
            toml::from_str(text).map_err(|e| CliError::config("<file>", e.message()))?;
        Self::from_raw(raw, overrides)
    }

    pub fn from_file(path: &Path, overrides: &Overrides) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml_str(&text, overrides)
    }

    pub fn from_preset(name: &str, overrides: &Overrides) -> CliResult<Self> {
        let text = presets::preset(name).ok_or_else(|| {
            CliError::config(
                "preset",
                format!(
                    "unknown preset `{name}` (known: {})",
                    presets::names().join(", ")
                ),
            )
        })?;
        Self::from_toml_str(text, overrides)
    }

    pub fn from_raw(mut raw: RawCampaign, overrides: &Overrides) -> CliResult<Self> {
        let seed = match (overrides.seed, overrides.env_seed.as_deref()) {
            (Some(s), _) => s,
            (None, Some(text)) => text.trim().parse().map_err(|_| {
                CliError::config(SEED_ENV, format!("`{text}` is not an unsigned integer"))
            })?,
            (None, None) => raw.model.seed.unwrap_or(DEFAULT_SEED),
        };
        raw.model.seed = Some(seed);
        if let Some(r) = overrides.realizations {
            raw.run.realizations = Some(r);
        }
        if let Some(dir) = &overrides.out {
            raw.output.dir = Some(dir.clone());
        }
        if let Some(f) = overrides.format {
            raw.output.format = Some(
                match f {
                    Format::Csv => "csv",
                    Format::Json => "json",
                    Format::Both => "both",
                }
                .to_string(),
            );
        }
        let workers = overrides.workers.or(raw.run.workers).unwrap_or(0);

        let (field, boxes) = Self::resolve_boxes(&raw.model, &raw.run)?;
        if boxes.is_empty() {
            return Err(CliError::config(field, "empty list"));
        }
        let mut spec = None;
        for b in &boxes {
            let model = model_for_box(&raw.model, b);
            let cfg = ModelConfig::from_raw(&model).map_err(|e| box_error(field, e))?;
            spec.get_or_insert(cfg.spec);
        }
        let spec = spec.expect("at least one box");

        let center = finite(raw.window.center.unwrap_or(0.0), "window.center")?;
        let interval = raw.window.interval.unwrap_or((-0.5, 0.5));
        finite(interval.0, "window.interval")?;
        finite(interval.1, "window.interval")?;
        if interval.0 > interval.1 {
            return Err(CliError::config(
                "window.interval",
                format!("[{}, {}] is reversed", interval.0, interval.1),
            ));
        }
        if let Some(lengths) = &raw.window.lengths {
            if lengths.is_empty() {
                return Err(CliError::config("window.lengths", "empty list"));
            }
            for &len in lengths {
                if !(len.is_finite() && len >= 0.0) {
                    return Err(CliError::config(
                        "window.lengths",
                        format!("{len} is not a nonnegative length"),
                    ));
                }
            }
        }

        let realizations = raw.run.realizations.unwrap_or(DEFAULT_REALIZATIONS);
        if realizations == 0 {
            return Err(CliError::config("run.realizations", "must be at least 1"));
        }
        let blocks = match (raw.run.blocks, raw.run.block_half_side, raw.run.epsilon) {
            (Some(false), _, _) => None,
            (_, Some(ell), _) => Some(BlockChoice::HalfSide(ell)),
            (Some(true), None, eps) | (None, None, eps @ Some(_)) => {
                let eps = eps.unwrap_or(DEFAULT_BLOCK_EPSILON);
                if !(eps > 0.0 && eps < 1.0) {
                    return Err(CliError::config(
                        "run.epsilon",
                        format!("{eps} not in (0, 1)"),
                    ));
                }
                Some(BlockChoice::Epsilon(eps))
            }
            (None, None, None) => None,
        };
        if let Some(choice) = blocks {
            for b in &boxes {
                choice.scheme(b)?;
            }
        }

        let energy_range = match raw.run.energy_range {
            Some((lo, hi)) => {
                finite(lo, "run.energy_range")?;
                finite(hi, "run.energy_range")?;
                if lo >= hi {
                    return Err(CliError::config(
                        "run.energy_range",
                        format!("[{lo}, {hi}] is empty"),
                    ));
                }
                (lo, hi)
            }
            None => {
                let (lo, hi) = spec.disorder.support();
                let reach = 2.0 * boxes[0].dim() as f64 * spec.hopping + 0.25;
                (lo - reach, hi + reach)
            }
        };
        let energy_points = raw.run.energy_points.unwrap_or(DEFAULT_ENERGY_POINTS);
        if energy_points < 3 {
            return Err(CliError::config(
                "run.energy_points",
                "need at least 3 points",
            ));
        }
        if let Some(h) = raw.run.bandwidth {
            if !(h.is_finite() && h > 0.0) {
                return Err(CliError::config(
                    "run.bandwidth",
                    format!("{h} is not positive"),
                ));
            }
        }
        let fit_rank = raw.run.fit_rank.unwrap_or(spec.rank);
        if fit_rank == 0 {
            return Err(CliError::config("run.fit_rank", "must be at least 1"));
        }
        let format = match raw.output.format.as_deref() {
            Some(name) => Format::parse(name)?,
            None => Format::default(),
        };
        let out_dir = raw
            .output
            .dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));

        Ok(Campaign {
            bandwidth: raw.run.bandwidth,
            lengths: raw.window.lengths.clone(),
            raw,
            spec,
            boxes,
            seed,
            center,
            interval,
            realizations,
            workers,
            blocks,
            energy_range,
            energy_points,
            fit_rank,
            out_dir,
            format,
        })
    }

    fn resolve_boxes(model: &RawModel, run: &RawRun) -> CliResult<(&'static str, Vec<LatticeBox>)> {
        let dim = model
            .dim
            .ok_or_else(|| CliError::config("dim", "missing"))?;
        let build = |field: &'static str, r: levy_spectra::Result<LatticeBox>| {
            r.map_err(|e| CliError::config(field, e.to_string()))
        };
        match (&run.sides, &run.boxes) {
            (Some(sides), _) => Ok((
                "run.sides",
                sides
                    .iter()
                    .map(|&s| build("run.sides", LatticeBox::with_side(dim, s)))
                    .collect::<CliResult<_>>()?,
            )),
            (None, Some(halves)) => Ok((
                "run.boxes",
                halves
                    .iter()
                    .map(|&l| build("run.boxes", LatticeBox::cube(dim, l)))
                    .collect::<CliResult<_>>()?,
            )),
            (None, None) => match (model.side, model.half_side) {
                (Some(s), _) => Ok(("side", vec![build("side", LatticeBox::with_side(dim, s))?])),
                (None, Some(l)) => Ok((
                    "half_side",
                    vec![build("half_side", LatticeBox::cube(dim, l))?],
                )),
                (None, None) => Err(CliError::config(
                    "run.boxes",
                    "missing (give run.boxes, run.sides, half_side or side)",
                )),
            },
        }
    }

    /// Model keys for one box, as recorded in artifacts.
    pub fn model_for(&self, lattice: &LatticeBox) -> RawModel {
        model_for_box(&self.raw.model, lattice)
    }

    /// Windows used by `simulate`, labelled by `|I|`.
    pub fn windows(&self, lattice: &LatticeBox) -> CliResult<Vec<(String, EnergyWindow)>> {
        let windows = match &self.lengths {
            Some(lengths) => lengths
                .iter()
                .map(|&len| EnergyWindow::centered(self.center, len, lattice))
                .collect::<levy_spectra::Result<Vec<_>>>(),
            None => EnergyWindow::for_box(self.center, self.interval.0, self.interval.1, lattice)
                .map(|w| vec![w]),
        }
        .map_err(|e| CliError::config("window", e.to_string()))?;
        Ok(windows
            .into_iter()
            .map(|w| (length_label(w.length()), w))
            .collect())
    }

    /// Interval lengths for a scan, falling back to `default`.
    pub fn scan_lengths(&self, default: &[f64]) -> Vec<f64> {
        self.lengths.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn energy_grid(&self) -> Vec<f64> {
        let (lo, hi) = self.energy_range;
        let n = self.energy_points;
        (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect()
    }

    /// SHA-256 of the resolved configuration. The worker count is left out
    /// because it never changes results.
    pub fn config_hash(&self) -> String {
        let mut hashed = self.raw.clone();
        hashed.run.workers = None;
        hashed.output.dir = None;
        let bytes = serde_json::to_vec(&hashed).expect("campaign serializes to JSON");
        hex(&Sha256::digest(&bytes))
    }
}

fn model_for_box(model: &RawModel, lattice: &LatticeBox) -> RawModel {
    let mut model = model.clone();
    match lattice.half_side() {
        Some(l) => {
            model.half_side = Some(l);
            model.side = None;
        }
        None => {
            model.side = Some(lattice.side());
            model.half_side = None;
        }
    }
    model
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// File-name form of an interval length: `1`, `0.5`, `0.25`.
pub fn length_label(len: f64) -> String {
    format!("{len}")
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
dim = 1
variant = "diagonal"
rank = 2
hopping = 0.0
seed = 3

[disorder]
a = 0.0
b = 1.0

[window]
center = 0.5
interval = [-0.5, 0.5]

[run]
boxes = [10, 20]
realizations = 100
"#;

    #[test]
    fn parses_boxes_and_window() {
        let c = Campaign::from_toml_str(BASE, &Overrides::default()).unwrap();
        assert_eq!(c.boxes.len(), 2);
        assert_eq!(c.boxes[1].site_count(), 41);
        assert_eq!(c.seed, 3);
        let w = c.windows(&c.boxes[0]).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].0, "1");
        assert_eq!(w[0].1.scale, 21.0);
    }

    #[test]
    fn seed_precedence() {
        let env = Overrides {
            env_seed: Some("11".into()),
            ..Overrides::default()
        };
        assert_eq!(Campaign::from_toml_str(BASE, &env).unwrap().seed, 11);
        let flag = Overrides {
            seed: Some(12),
            ..env
        };
        assert_eq!(Campaign::from_toml_str(BASE, &flag).unwrap().seed, 12);
        let bad = Overrides {
            env_seed: Some("x".into()),
            ..Overrides::default()
        };
        let err = Campaign::from_toml_str(BASE, &bad).unwrap_err();
        assert!(err.to_string().contains(SEED_ENV));
    }

    #[test]
    fn missing_bound_is_a_config_error() {
        let err = Campaign::from_toml_str(&BASE.replace("b = 1.0", ""), &Overrides::default())
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("disorder.b"), "{err}");
    }

    #[test]
    fn box_errors_name_the_run_field() {
        let text = BASE
            .replace("variant = \"diagonal\"\nrank = 2", "variant = \"dimer\"")
            .replace("boxes = [10, 20]", "boxes = [10]");
        let err = Campaign::from_toml_str(&text, &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("run.boxes"), "{err}");
    }

    #[test]
    fn hash_ignores_workers() {
        let a = Campaign::from_toml_str(BASE, &Overrides::default()).unwrap();
        let b = Campaign::from_toml_str(
            BASE,
            &Overrides {
                workers: Some(8),
                ..Overrides::default()
            },
        )
        .unwrap();
        assert_eq!(a.config_hash(), b.config_hash());
        let c = Campaign::from_toml_str(
            BASE,
            &Overrides {
                seed: Some(4),
                ..Overrides::default()
            },
        )
        .unwrap();
        assert_ne!(a.config_hash(), c.config_hash());
    }

    #[test]
    fn every_preset_loads() {
        for name in presets::names() {
            Campaign::from_preset(name, &Overrides::default())
                .unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }
}
