//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::acceptance;
use crate::campaign::{Campaign, Format, Overrides, DEFAULT_OUT_DIR};
use crate::commands;
use crate::error::{CliError, CliResult};
use crate::presets;

#[derive(Debug, Parser)]
#[command(
    name = "levy-spectra",
    version,
    about = "Local eigenvalue statistics of random operators with finite-rank perturbations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Campaign file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Named campaign; see `levy-spectra presets`.
    #[arg(long, global = true, value_name = "NAME", conflicts_with = "config")]
    pub preset: Option<String>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Campaign seed; overrides LEVY_SPECTRA_SEED and the config.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Number of disorder realizations.
    #[arg(long, global = true, value_name = "N")]
    pub realizations: Option<u64>,
    /// Worker threads; defaults to every available core.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Empirical laws of the local counting statistic, per box and window.
    Simulate,
    /// Integrated density of states and its smoothed derivative.
    Dos,
    /// Mean count against interval length.
    Wegner,
    /// Probability of more than rank-many eigenvalues against interval length.
    Minami,
    /// Fit compound Poisson weights to simulated laws.
    Fit,
    /// Markdown summary of an output directory with pass/fail checks.
    Report,
    /// Run the built-in acceptance criteria.
    Accept {
        /// Comma-separated criterion ids (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
    /// List the named presets.
    Presets,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            env_seed: None,
            realizations: self.realizations,
            workers: self.workers,
            out: self.out.clone(),
            format: self.format,
        }
        .with_env()
    }

    fn campaign(&self) -> CliResult<Campaign> {
        let overrides = self.overrides();
        match (&self.config, &self.preset) {
            (Some(path), _) => Campaign::from_file(path, &overrides),
            (None, Some(name)) => Campaign::from_preset(name, &overrides),
            (None, None) => Err(CliError::config(
                "config",
                "no campaign given; pass --config PATH or --preset NAME",
            )),
        }
    }

    /// Directory for `report`: `--out`, else the campaign's, else the default.
    fn report_dir(&self) -> CliResult<PathBuf> {
        if let Some(dir) = &self.out {
            return Ok(dir.clone());
        }
        if self.config.is_some() || self.preset.is_some() {
            return Ok(self.campaign()?.out_dir);
        }
        Ok(PathBuf::from(DEFAULT_OUT_DIR))
    }
}

fn print_files(files: &[String], dir: &std::path::Path) {
    for f in files {
        println!("{}", dir.join(f).display());
    }
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let common = &cli.common;
    match &cli.command {
        Command::Simulate | Command::Dos | Command::Wegner | Command::Minami | Command::Fit => {
            let campaign = common.campaign()?;
            let files = match cli.command {
                Command::Simulate => commands::simulate(&campaign)?,
                Command::Dos => commands::dos(&campaign)?,
                Command::Wegner => commands::wegner(&campaign)?,
                Command::Minami => commands::minami(&campaign)?,
                _ => commands::fit(&campaign)?,
            };
            print_files(&files, &campaign.out_dir);
            Ok(())
        }
        Command::Report => {
            let dir = common.report_dir()?;
            match commands::report(&dir) {
                Ok(report) => {
                    print!("{}", report.markdown);
                    Ok(())
                }
                Err(e) => {
                    if let Ok(text) = std::fs::read_to_string(dir.join(commands::REPORT)) {
                        print!("{text}");
                    }
                    Err(e)
                }
            }
        }
        Command::Accept { only } => {
            let ids: Vec<String> = if only.is_empty() {
                acceptance::CRITERIA
                    .iter()
                    .map(|(i, _)| i.to_string())
                    .collect()
            } else {
                only.clone()
            };
            let workers = common.workers.unwrap_or(0);
            let mut failed = Vec::new();
            for id in &ids {
                let outcome = acceptance::run(id, workers)?;
                println!("{outcome}");
                if !outcome.passed {
                    failed.push(outcome.id);
                }
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Validation(format!(
                    "criteria {} failed",
                    failed.join(", ")
                )))
            }
        }
        Command::Presets => {
            for name in presets::names() {
                println!("{name}");
            }
            Ok(())
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
