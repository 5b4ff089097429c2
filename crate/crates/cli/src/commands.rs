//! The work behind each subcommand.

use std::fmt::Write as _;
use std::path::Path;

use levy_spectra::levy::FitReport;
use levy_spectra::{
    block_sum_estimator, estimate_dos, EmpiricalPmf, EnergyWindow, McEngine, ModelConfig,
    ScalingTable,
};
use serde::Serialize;

use crate::artifacts::{
    list, read_csv, read_json, read_pmf_csv, ArtifactWriter, BlockRecord, FitRecord, Moments,
    PmfRecord, ScanFit, ScanRecord, MANIFEST,
};
use crate::campaign::{Campaign, DEFAULT_MINAMI_LENGTHS, DEFAULT_WEGNER_LENGTHS};
use crate::error::{CliError, CliResult};

pub const REPORT: &str = "report.md";
/// Largest characteristic-function distance accepted for a fitted law.
pub const FIT_CHAR_FN_TOLERANCE: f64 = 0.02;
/// Smallest `R²` accepted for the linear growth of the mean count.
pub const WEGNER_MIN_R_SQUARED: f64 = 0.99;
/// Accepted range of the log-log slope of `P̂{ξ > m_k}` against `|I|`.
pub const MINAMI_SLOPE_RANGE: (f64, f64) = (1.7, 2.3);
/// Relative tolerance between the measured index and the fitted one.
pub const INDEX_TOLERANCE: f64 = 0.1;

fn pmf_record(
    statistic: &str,
    campaign: &Campaign,
    lattice: &levy_spectra::LatticeBox,
    window: &EnergyWindow,
    pmf: &EmpiricalPmf,
) -> PmfRecord {
    PmfRecord {
        statistic: statistic.into(),
        model: campaign.model_for(lattice),
        window: *window,
        realizations: pmf.realizations(),
        seed: campaign.seed,
        pmf: pmf.as_map(),
        moments: Moments::of(pmf),
    }
}

/// Laws of `ξ_L(I)` per box and window, plus block statistics when asked.
pub fn simulate(campaign: &Campaign) -> CliResult<Vec<String>> {
    let engine = McEngine::new(campaign.workers)?;
    let mut out = ArtifactWriter::new(&campaign.out_dir, campaign.format)?;
    let (spec, r, seed) = (&campaign.spec, campaign.realizations, campaign.seed);
    for lattice in &campaign.boxes {
        let label = lattice.label();
        let windows = campaign.windows(lattice)?;
        let plain: Vec<EnergyWindow> = windows.iter().map(|(_, w)| *w).collect();
        let laws = engine.run_xi_multi(spec, lattice, &plain, r, seed)?;
        for ((len, window), pmf) in windows.iter().zip(&laws) {
            let record = pmf_record("xi", campaign, lattice, window, pmf);
            out.write_pmf(&format!("xi_{label}_{len}"), &record)?;
        }
        let Some(choice) = campaign.blocks else {
            continue;
        };
        let scheme = choice.scheme(lattice)?;
        for (len, window) in &windows {
            let run = engine.run_eta_blocks(spec, lattice, &scheme, window, r, seed)?;
            let record = pmf_record("zeta", campaign, lattice, window, &run.zeta);
            out.write_pmf(&format!("zeta_{label}_{len}"), &record)?;
            let sums = block_sum_estimator(&run.per_block, spec.rank);
            let blocks = BlockRecord {
                model: campaign.model_for(lattice),
                window: *window,
                realizations: run.xi.realizations(),
                seed,
                block_half_side: scheme.block_half_side,
                block_count: scheme.block_count(),
                mean_xi: run.xi.mean(),
                mean_zeta: run.zeta.mean(),
                mean_difference: run.mean_difference(),
                mean_difference_std_error: run.mean_difference_std_error(),
                tail_mass: run.tail_mass(spec.rank as u64),
                block_sums: sums.weights.weights,
                block_sum_std_errors: sums.std_errors,
                dropped: run.dropped,
            };
            let stem = format!("blocks_{label}_{len}");
            if out.format().json() {
                out.write_json(&format!("{stem}.json"), &blocks)?;
            }
            if out.format().csv() {
                out.write(&format!("{stem}.csv"), blocks_csv(&blocks).as_bytes())?;
            }
        }
    }
    out.finish("simulate", campaign)
}

fn blocks_csv(b: &BlockRecord) -> String {
    let mut s = String::from("quantity,value\n");
    let mut row = |k: &str, v: f64| {
        let _ = writeln!(s, "{k},{v}");
    };
    row("block_half_side", b.block_half_side as f64);
    row("block_count", b.block_count as f64);
    row("mean_xi", b.mean_xi);
    row("mean_zeta", b.mean_zeta);
    row("mean_difference", b.mean_difference);
    row("mean_difference_std_error", b.mean_difference_std_error);
    row("tail_mass", b.tail_mass);
    for (j, w) in b.block_sums.iter().enumerate() {
        row(&format!("block_sum_{}", j + 1), *w);
    }
    s
}

#[derive(Serialize)]
struct DosRecord<'a> {
    model: levy_spectra::config::RawModel,
    #[serde(rename = "R")]
    realizations: u64,
    seed: u64,
    bandwidth: f64,
    ids: &'a [levy_spectra::IdsPoint],
    dos: &'a [levy_spectra::DosPoint],
}

/// Integrated density of states on the energy grid and its derivative.
pub fn dos(campaign: &Campaign) -> CliResult<Vec<String>> {
    let engine = McEngine::new(campaign.workers)?;
    let mut out = ArtifactWriter::new(&campaign.out_dir, campaign.format)?;
    let grid = campaign.energy_grid();
    let bandwidth = campaign
        .bandwidth
        .unwrap_or_else(|| 2.0 * (grid[1] - grid[0]));
    for lattice in &campaign.boxes {
        let label = lattice.label();
        let ids = engine.estimate_ids(
            &campaign.spec,
            lattice,
            &grid,
            campaign.realizations,
            campaign.seed,
        )?;
        let dos = estimate_dos(&ids, bandwidth)
            .map_err(|e| CliError::config("run.bandwidth", e.to_string()))?;
        if out.format().csv() {
            let mut text = String::from("energy,value,std_error\n");
            for p in &ids {
                let _ = writeln!(text, "{},{},{}", p.energy, p.value, p.std_error);
            }
            out.write(&format!("ids_{label}.csv"), text.as_bytes())?;
            let mut text = String::from("energy,value\n");
            for p in &dos {
                let _ = writeln!(text, "{},{}", p.energy, p.value);
            }
            out.write(&format!("dos_{label}.csv"), text.as_bytes())?;
        }
        if out.format().json() {
            let record = DosRecord {
                model: campaign.model_for(lattice),
                realizations: campaign.realizations,
                seed: campaign.seed,
                bandwidth,
                ids: &ids,
                dos: &dos,
            };
            out.write_json(&format!("dos_{label}.json"), &record)?;
        }
    }
    out.finish("dos", campaign)
}

fn write_scan(
    campaign: &Campaign,
    table: &ScalingTable,
    log_log: bool,
    out: &mut ArtifactWriter,
) -> CliResult<()> {
    let stat = &table.statistic;
    let name = if log_log { "minami" } else { "wegner" };
    let mut fits = Vec::new();
    for lattice in &campaign.boxes {
        let label = lattice.label();
        let side = lattice.side();
        if out.format().csv() {
            let mut text =
                format!("interval_length,{stat},std_error,ci_low,ci_high,realizations\n");
            for row in table.rows_for_side(side) {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{}",
                    row.interval_length,
                    row.value,
                    row.std_error,
                    row.ci_low,
                    row.ci_high,
                    row.realizations
                );
            }
            out.write(&format!("{name}_{label}.csv"), text.as_bytes())?;
        }
        let fit = if log_log {
            table.loglog_fit(side)
        } else {
            table.linear_fit(side)
        };
        fits.push(ScanFit {
            label,
            side,
            slope: fit.map(|f| f.slope),
            intercept: fit.map(|f| f.intercept),
            r_squared: fit.map(|f| f.r_squared),
        });
    }
    if out.format().json() {
        let record = ScanRecord {
            statistic: stat.clone(),
            fit_kind: if log_log { "log-log" } else { "linear" }.into(),
            model: campaign.raw.model.clone(),
            center: table.center,
            realizations: campaign.realizations,
            seed: table.seed,
            rows: table.rows.clone(),
            fits,
        };
        out.write_json(&format!("{name}.json"), &record)?;
    }
    Ok(())
}

/// Mean of `ξ_L(I)` against `|I|` with a least-squares line per box.
pub fn wegner(campaign: &Campaign) -> CliResult<Vec<String>> {
    let engine = McEngine::new(campaign.workers)?;
    let mut out = ArtifactWriter::new(&campaign.out_dir, campaign.format)?;
    let table = engine.wegner_scan(
        &campaign.spec,
        &campaign.boxes,
        &campaign.scan_lengths(&DEFAULT_WEGNER_LENGTHS),
        campaign.center,
        campaign.realizations,
        campaign.seed,
    )?;
    write_scan(campaign, &table, false, &mut out)?;
    out.finish("wegner", campaign)
}

/// `P̂{ξ_L(I) > m_k}` against `|I|` with a log-log fit per box.
pub fn minami(campaign: &Campaign) -> CliResult<Vec<String>> {
    let engine = McEngine::new(campaign.workers)?;
    let mut out = ArtifactWriter::new(&campaign.out_dir, campaign.format)?;
    let table = engine.minami_scan(
        &campaign.spec,
        &campaign.boxes,
        &campaign.scan_lengths(&DEFAULT_MINAMI_LENGTHS),
        campaign.center,
        campaign.realizations,
        campaign.seed,
    )?;
    write_scan(campaign, &table, true, &mut out)?;
    out.finish("minami", campaign)
}

/// Stems `xi_{L}_{I}` of the simulated laws found in `dir`.
fn xi_stems(dir: &Path) -> Vec<String> {
    let mut stems: Vec<String> = list(dir, "xi_", ".json")
        .into_iter()
        .chain(list(dir, "xi_", ".csv"))
        .map(|n| n.rsplit_once('.').map(|(s, _)| s.to_string()).unwrap_or(n))
        .collect();
    stems.sort();
    stems.dedup();
    stems
}

fn load_pmf(dir: &Path, stem: &str) -> CliResult<EmpiricalPmf> {
    let json = dir.join(format!("{stem}.json"));
    if json.exists() {
        Ok(read_json::<PmfRecord>(&json)?.to_pmf())
    } else {
        read_pmf_csv(&dir.join(format!("{stem}.csv")))
    }
}

/// Fits Lévy weights to each simulated law, simulating first if needed.
pub fn fit(campaign: &Campaign) -> CliResult<Vec<String>> {
    let dir = &campaign.out_dir;
    if xi_stems(dir).is_empty() {
        simulate(campaign)?;
    }
    let mut out = ArtifactWriter::new(dir, campaign.format)?;
    for stem in xi_stems(dir) {
        let pmf = load_pmf(dir, &stem)?;
        let key = &stem["xi_".len()..];
        let blocks = dir.join(format!("blocks_{key}.json"));
        let tail = if blocks.exists() {
            Some(read_json::<BlockRecord>(&blocks)?.tail_mass)
        } else {
            None
        };
        let report = FitReport::from_fit(&pmf, campaign.fit_rank, tail)?;
        let record = FitRecord {
            source: stem.clone(),
            weights: report.weights,
            intensity: report.intensity,
            poisson_index: report.poisson_index,
            char_fn_distance: report.char_fn_distance,
            tail_mass: report.tail_mass,
        };
        out.write_json(&format!("fit_{key}.json"), &record)?;
    }
    out.finish("fit", campaign)
}

/// Outcome of one report check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub subject: String,
    pub description: String,
    pub measured: String,
    pub expected: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub markdown: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

/// Rank `m_k` of a recorded model, when the record is complete enough.
fn recorded_rank(model: &levy_spectra::config::RawModel) -> Option<(usize, bool)> {
    let cfg = ModelConfig::from_raw(model).ok()?;
    let exact = cfg.spec.hopping == 0.0
        || matches!(
            cfg.spec.variant,
            levy_spectra::Variant::MatrixValued { .. } | levy_spectra::Variant::Diagonal { .. }
        );
    Some((cfg.spec.rank, exact))
}

/// Summarizes a campaign directory and checks the measured quantities
/// against their predicted forms.
pub fn build_report(dir: &Path) -> CliResult<Report> {
    let has_any = [
        ("xi_", ""),
        ("fit_", ".json"),
        ("wegner", ""),
        ("minami", ""),
        ("dos_", ""),
        ("blocks_", ""),
    ]
    .iter()
    .any(|(p, s)| !list(dir, p, s).is_empty());
    if !has_any {
        return Err(CliError::NoArtifacts(dir.to_path_buf()));
    }
    let mut checks = Vec::new();
    let mut md = String::from("# Campaign report\n\n");
    if let Ok(manifest) = read_json::<crate::artifacts::Manifest>(&dir.join(MANIFEST)) {
        let _ = writeln!(md, "Produced by {} {}.\n", manifest.tool, manifest.version);
        for (cmd, run) in &manifest.runs {
            let _ = writeln!(
                md,
                "- `{cmd}`: seed {}, R = {}, config sha256 `{}`",
                run.seed, run.realizations, run.config_sha256
            );
        }
        md.push('\n');
    }

    let stems = xi_stems(dir);
    if !stems.is_empty() {
        md.push_str("## Local statistics\n\n| law | R | mean | variance | Poisson index |\n|---|---|---|---|---|\n");
    }
    for stem in &stems {
        let pmf = load_pmf(dir, stem)?;
        let m = Moments::of(&pmf);
        let _ = writeln!(
            md,
            "| {stem} | {} | {:.5} | {:.5} | {} |",
            pmf.realizations(),
            m.mean,
            m.variance,
            m.poisson_index.map_or("-".into(), |v| format!("{v:.4}"))
        );
        let json = dir.join(format!("{stem}.json"));
        if json.exists() {
            let record: PmfRecord = read_json(&json)?;
            if let Some((rank, true)) = recorded_rank(&record.model) {
                let off: u64 = pmf
                    .iter()
                    .filter(|(j, _)| j % rank as u64 != 0)
                    .map(|(_, c)| c)
                    .sum();
                checks.push(Check {
                    subject: stem.clone(),
                    description: format!("every level has multiplicity {rank}"),
                    measured: format!("{off} realizations off multiples of {rank}"),
                    expected: "0".into(),
                    passed: off == 0,
                });
            }
        }
        let key = &stem["xi_".len()..];
        let fit_path = dir.join(format!("fit_{key}.json"));
        if fit_path.exists() {
            let fit: FitRecord = read_json(&fit_path)?;
            checks.push(Check {
                subject: stem.clone(),
                description: "compound Poisson fit matches the empirical characteristic function"
                    .into(),
                measured: format!("{:.4}", fit.char_fn_distance),
                expected: format!("≤ {FIT_CHAR_FN_TOLERANCE}"),
                passed: fit.char_fn_distance <= FIT_CHAR_FN_TOLERANCE,
            });
            let (s1, s2) = fit
                .weights
                .iter()
                .enumerate()
                .fold((0.0, 0.0), |(a, b), (i, w)| {
                    let j = (i + 1) as f64;
                    (a + j * w, b + j * j * w)
                });
            if let (Some(index), true) = (m.poisson_index, s1 > 0.0) {
                let implied = s2 / s1;
                checks.push(Check {
                    subject: stem.clone(),
                    description: "Poisson index equals Σ j²p_j / Σ j p_j of the fit".into(),
                    measured: format!("{index:.4} vs {implied:.4}"),
                    expected: format!("within {:.0}%", INDEX_TOLERANCE * 100.0),
                    passed: (index - implied).abs() <= INDEX_TOLERANCE * implied,
                });
            }
        }
    }

    let fits = list(dir, "fit_", ".json");
    if !fits.is_empty() {
        md.push_str("\n## Fitted Lévy weights\n\n| law | weights | intensity | tail mass |\n|---|---|---|---|\n");
        for name in &fits {
            let fit: FitRecord = read_json(&dir.join(name))?;
            let weights: Vec<String> = fit.weights.iter().map(|w| format!("{w:.4}")).collect();
            let _ = writeln!(
                md,
                "| {} | {} | {:.4} | {} |",
                fit.source,
                weights.join(", "),
                fit.intensity,
                fit.tail_mass.map_or("-".into(), |t| format!("{t:.3e}"))
            );
        }
    }

    let blocks = list(dir, "blocks_", ".json");
    if !blocks.is_empty() {
        md.push_str("\n## Block approximation\n\n| case | ℓ | blocks | mean ξ − mean ζ | tail mass |\n|---|---|---|---|---|\n");
        for name in &blocks {
            let b: BlockRecord = read_json(&dir.join(name))?;
            let _ = writeln!(
                md,
                "| {} | {} | {} | {:.5} ± {:.5} | {:.3e} |",
                name.trim_end_matches(".json"),
                b.block_half_side,
                b.block_count,
                b.mean_difference,
                b.mean_difference_std_error,
                b.tail_mass
            );
        }
    }

    for (name, log_log) in [("wegner", false), ("minami", true)] {
        let json = dir.join(format!("{name}.json"));
        let mut fits: Vec<ScanFit> = Vec::new();
        if json.exists() {
            fits = read_json::<ScanRecord>(&json)?.fits;
        } else {
            for file in list(dir, &format!("{name}_"), ".csv") {
                let rows = read_csv(&dir.join(&file))?;
                let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
                let ys: Vec<f64> = rows.iter().map(|r| r[1]).collect();
                let fit = if log_log {
                    levy_spectra::stats::loglog_fit(&xs, &ys)
                } else {
                    levy_spectra::stats::linear_fit(&xs, &ys)
                };
                fits.push(ScanFit {
                    label: file[name.len() + 1..].trim_end_matches(".csv").to_string(),
                    side: 0,
                    slope: fit.map(|f| f.slope),
                    intercept: fit.map(|f| f.intercept),
                    r_squared: fit.map(|f| f.r_squared),
                });
            }
        }
        if fits.is_empty() {
            continue;
        }
        let title = if log_log {
            "Minami scaling"
        } else {
            "Wegner linearity"
        };
        let _ = writeln!(md, "\n## {title}\n\n| box | slope | R² |\n|---|---|---|");
        for f in &fits {
            let _ = writeln!(
                md,
                "| {} | {} | {} |",
                f.label,
                f.slope.map_or("-".into(), |s| format!("{s:.4}")),
                f.r_squared.map_or("-".into(), |s| format!("{s:.4}"))
            );
            let subject = format!("{name} {}", f.label);
            if log_log {
                let (lo, hi) = MINAMI_SLOPE_RANGE;
                checks.push(Check {
                    subject,
                    description: "P̂{ξ > m_k} grows quadratically in |I|".into(),
                    measured: f
                        .slope
                        .map_or("undefined".into(), |s| format!("slope {s:.3}")),
                    expected: format!("slope in [{lo}, {hi}]"),
                    passed: f.slope.is_some_and(|s| (lo..=hi).contains(&s)),
                });
            } else {
                checks.push(Check {
                    subject,
                    description: "mean count is linear in |I|".into(),
                    measured: f
                        .r_squared
                        .map_or("undefined".into(), |r| format!("R² {r:.4}")),
                    expected: format!("R² ≥ {WEGNER_MIN_R_SQUARED}"),
                    passed: f.r_squared.is_some_and(|r| r >= WEGNER_MIN_R_SQUARED),
                });
            }
        }
    }

    md.push_str("\n## Checks\n\n");
    if checks.is_empty() {
        md.push_str("No checks apply to these artifacts.\n");
    } else {
        md.push_str("| subject | check | measured | expected | status |\n|---|---|---|---|---|\n");
        for c in &checks {
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} | {} |",
                c.subject,
                c.description,
                c.measured,
                c.expected,
                if c.passed { "pass" } else { "FAIL" }
            );
        }
    }
    Ok(Report {
        markdown: md,
        checks,
    })
}

/// Writes `report.md`; fails with a validation error if any check failed.
pub fn report(dir: &Path) -> CliResult<Report> {
    let report = build_report(dir)?;
    let path = dir.join(REPORT);
    std::fs::write(&path, &report.markdown).map_err(|e| CliError::io(&path, e))?;
    match report.failures() {
        0 => Ok(report),
        n => Err(CliError::Validation(format!(
            "{n} of {} report checks failed; see {}",
            report.checks.len(),
            path.display()
        ))),
    }
}
