//! On-disk campaign outputs: CSV tables, JSON records and the manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use levy_spectra::config::RawModel;
use levy_spectra::{EmpiricalPmf, EnergyWindow};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::campaign::{hex, Campaign, Format};
use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";
pub const TOOL: &str = "levy-spectra";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    pub poisson_index: Option<f64>,
}

impl Moments {
    pub fn of(pmf: &EmpiricalPmf) -> Self {
        Moments {
            mean: pmf.mean(),
            variance: pmf.variance(),
            std_error: pmf.std_error(),
            poisson_index: levy_spectra::poisson_index(pmf).ok(),
        }
    }
}

/// JSON form of an empirical law of a counting statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmfRecord {
    pub statistic: String,
    pub model: RawModel,
    pub window: EnergyWindow,
    #[serde(rename = "R")]
    pub realizations: u64,
    pub seed: u64,
    pub pmf: BTreeMap<u64, u64>,
    pub moments: Moments,
}

impl PmfRecord {
    pub fn to_pmf(&self) -> EmpiricalPmf {
        EmpiricalPmf::from_counts(self.pmf.iter().map(|(&j, &c)| (j, c)))
    }
}

/// Block statistics of one `(box, window)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub model: RawModel,
    pub window: EnergyWindow,
    #[serde(rename = "R")]
    pub realizations: u64,
    pub seed: u64,
    pub block_half_side: usize,
    pub block_count: usize,
    pub mean_xi: f64,
    pub mean_zeta: f64,
    pub mean_difference: f64,
    pub mean_difference_std_error: f64,
    pub tail_mass: f64,
    pub block_sums: Vec<f64>,
    pub block_sum_std_errors: Vec<f64>,
    pub dropped: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub source: String,
    pub weights: Vec<f64>,
    pub intensity: f64,
    pub poisson_index: Option<f64>,
    pub char_fn_distance: f64,
    pub tail_mass: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanFit {
    pub label: String,
    pub side: usize,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub statistic: String,
    /// `linear` for mean counts, `log-log` for tail probabilities.
    pub fit_kind: String,
    pub model: RawModel,
    pub center: f64,
    #[serde(rename = "R")]
    pub realizations: u64,
    pub seed: u64,
    pub rows: Vec<levy_spectra::ScalingRow>,
    pub fits: Vec<ScanFit>,
}

/// One command's entry in the manifest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub config_sha256: String,
    pub seed: u64,
    #[serde(rename = "R")]
    pub realizations: u64,
    pub model: RawModel,
    pub files: BTreeMap<String, String>,
}

/// Everything needed to reproduce the outputs of a directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub runs: BTreeMap<String, RunEntry>,
}

/// Collects the files of one command and records them in the manifest.
pub struct ArtifactWriter {
    dir: PathBuf,
    format: Format,
    files: BTreeMap<String, String>,
}

impl ArtifactWriter {
    pub fn new(dir: &Path, format: Format) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(ArtifactWriter {
            dir: dir.to_path_buf(),
            format,
            files: BTreeMap::new(),
        })
    }

    pub fn format(&self) -> Format {
        self.format
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.files
            .insert(name.to_string(), hex(&Sha256::digest(bytes)));
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).expect("records serialize to JSON");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes `{stem}.csv` and/or `{stem}.json` as the format asks.
    pub fn write_pmf(&mut self, stem: &str, record: &PmfRecord) -> CliResult<()> {
        if self.format.csv() {
            self.write(&format!("{stem}.csv"), pmf_csv(&record.to_pmf()).as_bytes())?;
        }
        if self.format.json() {
            self.write_json(&format!("{stem}.json"), record)?;
        }
        Ok(())
    }

    pub fn files(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    /// Merges this command's files into `manifest.json`.
    pub fn finish(self, command: &str, campaign: &Campaign) -> CliResult<Vec<String>> {
        let path = self.dir.join(MANIFEST);
        let mut manifest = match std::fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text).unwrap_or_default(),
            Err(_) => Manifest::default(),
        };
        manifest.tool = TOOL.into();
        manifest.version = VERSION.into();
        let names: Vec<String> = self.files.keys().cloned().collect();
        manifest.runs.insert(
            command.to_string(),
            RunEntry {
                config_sha256: campaign.config_hash(),
                seed: campaign.seed,
                realizations: campaign.realizations,
                model: campaign.raw.model.clone(),
                files: self.files,
            },
        );
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(names)
    }
}

pub fn pmf_csv(pmf: &EmpiricalPmf) -> String {
    let mut out = String::from("j,count,probability\n");
    if let Some(max) = pmf.max_value() {
        for j in 0..=max {
            out.push_str(&format!("{j},{},{}\n", pmf.count(j), pmf.prob(j)));
        }
    }
    out
}

/// Reads the `(j, count)` columns of a pmf CSV.
pub fn read_pmf_csv(path: &Path) -> CliResult<EmpiricalPmf> {
    let rows = read_csv(path)?;
    Ok(EmpiricalPmf::from_counts(
        rows.iter().map(|r| (r[0] as u64, r[1] as u64)),
    ))
}

/// Numeric rows of a CSV file with one header line.
pub fn read_csv(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            line.split(',')
                .map(|cell| {
                    cell.trim().parse::<f64>().map_err(|_| CliError::Artifact {
                        path: path.to_path_buf(),
                        message: format!("`{cell}` is not a number"),
                    })
                })
                .collect()
        })
        .collect()
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Artifact {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Artifact file names in `dir` starting with `prefix` and ending with `suffix`.
pub fn list(dir: &Path, prefix: &str, suffix: &str) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .into_iter()
        .flatten()
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter(|n| n.starts_with(prefix) && n.ends_with(suffix))
        .collect();
    names.sort();
    names
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let pmf = EmpiricalPmf::from_samples([0u64, 0, 2, 4]);
        let path = dir.path().join("x.csv");
        std::fs::write(&path, pmf_csv(&pmf)).unwrap();
        assert_eq!(read_pmf_csv(&path).unwrap(), pmf);
        assert!(pmf_csv(&pmf).contains("\n1,0,0\n"));
    }

    #[test]
    fn record_keys_are_counts() {
        let record = PmfRecord {
            statistic: "xi".into(),
            model: RawModel::default(),
            window: EnergyWindow::new(0.0, -0.5, 0.5, 1.0).unwrap(),
            realizations: 3,
            seed: 1,
            pmf: BTreeMap::from([(0, 2), (2, 1)]),
            moments: Moments::of(&EmpiricalPmf::from_samples([0u64, 0, 2])),
        };
        let text = serde_json::to_string(&record).unwrap();
        assert!(text.contains("\"pmf\":{\"0\":2,\"2\":1}"), "{text}");
        assert!(text.contains("\"R\":3"));
        let back: PmfRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back, record);
    }
}
