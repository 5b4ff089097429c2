//! Acceptance criteria at full size. Each test prints one line
//! `criterion <id> PASS|FAIL <title>: <measurements>` to stderr.

use std::io::Write;

use levy_spectra_cli::acceptance;

fn check(id: &str) {
    let outcome = acceptance::run(id, 0).unwrap_or_else(|e| panic!("criterion {id}: {e}"));
    // written to stderr directly so the line shows even when output is captured
    let _ = writeln!(std::io::stderr(), "{outcome}");
    assert!(outcome.passed, "{outcome}");
}

#[test]
fn criterion_01_example_one_reproduction() {
    check("1");
}

#[test]
fn criterion_02_example_two_multiplicity() {
    check("2");
}

#[test]
fn criterion_03_rank_one_poisson_limit() {
    check("3");
}

#[test]
fn criterion_04_wegner_linearity() {
    check("4");
}

#[test]
fn criterion_05a_minami_scaling_rank_one() {
    check("5a");
}

/// P(ξ > 2) for this model is P(Poisson(|I|) ≥ 2), whose log-log slope over
/// |I| ∈ {0.5, 1, 2, 4} is about 1.12, so the target slope 2 ± 0.3 cannot
/// be met. Kept as a known failure; run with `--ignored` to see it.
#[test]
#[ignore = "known failure: closed-form slope is about 1.12, target is 2 ± 0.3"]
fn criterion_05b_minami_scaling_diagonal_two() {
    check("5b");
}

#[test]
fn criterion_06_rank_perturbation_invariant() {
    check("6");
}

#[test]
fn criterion_07_counting_oracle_equivalence() {
    check("7");
}

#[test]
fn criterion_08_block_process_approximation() {
    check("8");
}

#[test]
fn criterion_09_levy_fit_round_trip() {
    check("9");
}

#[test]
fn criterion_10_determinism_across_workers() {
    check("10");
}
