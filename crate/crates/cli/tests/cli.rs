use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_levy-spectra"));
    cmd.env_remove("LEVY_SPECTRA_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

const SMALL: &str = r#"
dim = 1
variant = "diagonal"
rank = 2
hopping = 0.0
seed = 5

[disorder]
a = 0.0
b = 1.0

[window]
center = 0.5
interval = [-0.5, 0.5]

[run]
boxes = [50]
realizations = 2000
"#;

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("campaign.toml");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn simulate_writes_parity_respecting_pmf_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&out.join("xi_50_1.csv"));
    for line in csv.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let j: u64 = cells[0].parse().unwrap();
        if j % 2 == 1 {
            assert_eq!(cells[1], "0", "odd count in {line}");
        }
    }
    let json: serde_json::Value = serde_json::from_str(&read(&out.join("xi_50_1.json"))).unwrap();
    for key in ["model", "window", "R", "seed", "pmf", "moments"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["R"], 2000);
    let manifest: serde_json::Value =
        serde_json::from_str(&read(&out.join("manifest.json"))).unwrap();
    let run = &manifest["runs"]["simulate"];
    assert_eq!(run["seed"], 5);
    assert_eq!(run["config_sha256"].as_str().unwrap().len(), 64);
    assert!(manifest["version"].is_string());
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let mut outputs = Vec::new();
    for (name, workers) in [("a", "1"), ("b", "3")] {
        let out = dir.path().join(name);
        let o = run(&[
            "simulate",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--workers",
            workers,
        ]);
        assert!(o.status.success());
        outputs.push((
            std::fs::read(out.join("xi_50_1.csv")).unwrap(),
            std::fs::read(out.join("manifest.json")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn missing_disorder_bound_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("b = 1.0", ""));
    let o = run(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("disorder.b"));
}

#[test]
fn report_on_empty_directory_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["report", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no campaign artifacts"));
}

#[test]
fn seed_flag_beats_environment_beats_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let seed_of = |out: &Path| -> u64 {
        let m: serde_json::Value = serde_json::from_str(&read(&out.join("manifest.json"))).unwrap();
        m["runs"]["simulate"]["seed"].as_u64().unwrap()
    };
    let env_out = dir.path().join("env");
    let o = bin()
        .args([
            "simulate",
            "--config",
            &cfg,
            "--realizations",
            "10",
            "--out",
        ])
        .arg(&env_out)
        .env("LEVY_SPECTRA_SEED", "77")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(seed_of(&env_out), 77);
    let flag_out = dir.path().join("flag");
    let o = bin()
        .args([
            "simulate",
            "--config",
            &cfg,
            "--realizations",
            "10",
            "--seed",
            "78",
            "--out",
        ])
        .arg(&flag_out)
        .env("LEVY_SPECTRA_SEED", "77")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(seed_of(&flag_out), 78);
}

#[test]
fn fit_then_report_passes_on_example_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &SMALL.replace("realizations = 2000", "realizations = 20000"),
    );
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    // fit simulates on its own when no laws exist yet
    let o = run(&["fit", "--config", &cfg, "--out", out_s]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fit: serde_json::Value = serde_json::from_str(&read(&out.join("fit_50_1.json"))).unwrap();
    for key in [
        "weights",
        "intensity",
        "poisson_index",
        "char_fn_distance",
        "tail_mass",
    ] {
        assert!(fit.get(key).is_some(), "missing {key}");
    }
    let p1 = fit["weights"][0].as_f64().unwrap();
    let p2 = fit["weights"][1].as_f64().unwrap();
    assert!(p1 < 0.02 && (p2 - 1.0).abs() < 0.05, "{fit}");
    let o = run(&["report", "--out", out_s]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let report = read(&out.join("report.md"));
    assert!(report.contains("multiplicity 2") && !report.contains("FAIL"));
}

#[test]
fn wegner_table_has_slope_near_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = run(&[
        "wegner",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    assert!(!out.join("wegner_50.csv").exists());
    let table: serde_json::Value = serde_json::from_str(&read(&out.join("wegner.json"))).unwrap();
    let slope = table["fits"][0]["slope"].as_f64().unwrap();
    assert!((slope - 2.0).abs() < 0.2, "slope {slope}");
}

#[test]
fn failing_check_gives_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    // Diagonal(2) tail probabilities are far from quadratic at these lengths
    let o = run(&["minami", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let o = run(&["report", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(read(&out.join("report.md")).contains("FAIL"));
}

#[test]
fn block_statistics_and_dos_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL
        .replace(
            "variant = \"diagonal\"\nrank = 2\nhopping = 0.0",
            "variant = \"rank-one-site\"\nhopping = 1.0",
        )
        .replace("b = 1.0", "b = 5.0")
        .replace("center = 0.5", "center = 2.5")
        .replace("boxes = [50]", "boxes = [49]\nblocks = true");
    let cfg = write_config(dir.path(), &text);
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    let o = run(&["simulate", "--config", &cfg, "--out", out_s]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let blocks: serde_json::Value =
        serde_json::from_str(&read(&out.join("blocks_49_1.json"))).unwrap();
    assert_eq!(blocks["block_count"], 9);
    assert!(out.join("zeta_49_1.csv").exists());
    let o = run(&[
        "dos",
        "--config",
        &cfg,
        "--out",
        out_s,
        "--realizations",
        "200",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ids = read(&out.join("ids_49.csv"));
    let last: f64 = ids
        .lines()
        .last()
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((last - 1.0).abs() < 1e-12, "IDS ends at {last}");
}

#[test]
fn presets_are_listed() {
    let o = run(&["presets"]);
    let text = String::from_utf8_lossy(&o.stdout);
    for name in [
        "example1",
        "example2",
        "rank1-poisson",
        "dimer-1d",
        "polymer-2d",
    ] {
        assert!(text.contains(name));
    }
}
