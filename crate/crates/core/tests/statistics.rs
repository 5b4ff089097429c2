//! Monte Carlo estimators against closed forms and against each other.

use levy_spectra::levy::sample_pmf;
use levy_spectra::{
    block_sum_estimator, estimate_dos, fit_weights, panjer_pmf, BlockScheme, DisorderLaw,
    EmpiricalPmf, EnergyWindow, LatticeBox, LevyWeights, McEngine, ModelSpec, Variant,
};
use proptest::prelude::*;

fn diagonal_two() -> ModelSpec {
    ModelSpec::new(
        Variant::Diagonal { m: 2 },
        1,
        0.0,
        DisorderLaw::uniform(0.0, 1.0).unwrap(),
    )
    .unwrap()
}

fn rank_one(w: f64) -> ModelSpec {
    ModelSpec::new(
        Variant::RankOneSite,
        1,
        1.0,
        DisorderLaw::uniform(0.0, w).unwrap(),
    )
    .unwrap()
}

#[test]
fn ids_is_monotone_and_equals_m_times_e() {
    let engine = McEngine::new(0).unwrap();
    let lattice = LatticeBox::cube(1, 100).unwrap();
    let grid: Vec<f64> = (0..=20).map(|k| -0.1 + 1.2 * k as f64 / 20.0).collect();
    let ids = engine
        .estimate_ids(&diagonal_two(), &lattice, &grid, 400, 3)
        .unwrap();
    assert!(ids.windows(2).all(|w| w[0].value <= w[1].value));
    for p in &ids {
        let exact = 2.0 * p.energy.clamp(0.0, 1.0);
        assert!(
            (p.value - exact).abs() <= 4.0 * p.std_error + 1e-12,
            "N({}) = {} ± {}, expected {exact}",
            p.energy,
            p.value,
            p.std_error
        );
    }
}

#[test]
fn dos_of_diagonal_two_is_two_inside_the_support() {
    let engine = McEngine::new(0).unwrap();
    let lattice = LatticeBox::cube(1, 200).unwrap();
    let grid: Vec<f64> = (0..=40).map(|k| k as f64 / 40.0).collect();
    let ids = engine
        .estimate_ids(&diagonal_two(), &lattice, &grid, 500, 4)
        .unwrap();
    let dos = estimate_dos(&ids, 0.1).unwrap();
    assert!(!dos.is_empty());
    for p in dos {
        assert!((p.value - 2.0).abs() < 0.1, "ρ({}) = {}", p.energy, p.value);
    }
}

#[test]
fn rank_one_dos_integrates_to_one() {
    let engine = McEngine::new(0).unwrap();
    let lattice = LatticeBox::cube(1, 100).unwrap();
    let n = 161;
    let grid: Vec<f64> = (0..n)
        .map(|k| -3.0 + 11.0 * k as f64 / (n - 1) as f64)
        .collect();
    let ids = engine
        .estimate_ids(&rank_one(5.0), &lattice, &grid, 300, 5)
        .unwrap();
    let dos = estimate_dos(&ids, 0.2).unwrap();
    let step = grid[1] - grid[0];
    let mass: f64 = dos.iter().map(|p| p.value * step).sum();
    assert!((mass - 1.0).abs() < 0.02, "mass {mass}");
}

#[test]
fn blocks_aligned_with_projections_reproduce_xi_without_hopping() {
    let engine = McEngine::new(0).unwrap();
    let lattice = LatticeBox::cube(1, 31).unwrap();
    let window = EnergyWindow::centered(0.5, 8.0, &lattice).unwrap();
    for ell in [0, 1, 3, 31] {
        let scheme = BlockScheme::new(&lattice, ell).unwrap();
        let run = engine
            .run_eta_blocks(&diagonal_two(), &lattice, &scheme, &window, 500, 6)
            .unwrap();
        assert_eq!(run.xi, run.zeta, "ℓ = {ell}");
        assert_eq!(run.mean_difference(), 0.0);
        assert_eq!(run.difference.count(run.difference_offset), 500);
    }
}

#[test]
fn single_block_reproduces_xi() {
    let engine = McEngine::new(0).unwrap();
    let lattice = LatticeBox::cube(1, 40).unwrap();
    let window = EnergyWindow::centered(2.5, 4.0, &lattice).unwrap();
    let scheme = BlockScheme::new(&lattice, 40).unwrap();
    let run = engine
        .run_eta_blocks(&rank_one(5.0), &lattice, &scheme, &window, 500, 7)
        .unwrap();
    assert_eq!(run.per_block.len(), 1);
    assert_eq!(run.xi, run.zeta);
    assert_eq!(run.per_block[0], run.xi);
}

#[test]
fn block_sums_agree_with_fitted_weights_without_hopping() {
    let engine = McEngine::new(0).unwrap();
    let lattice = LatticeBox::cube(1, 200).unwrap();
    let window = EnergyWindow::centered(0.5, 1.0, &lattice).unwrap();
    let scheme = BlockScheme::new(&lattice, 0).unwrap();
    let r = 20_000;
    let run = engine
        .run_eta_blocks(&diagonal_two(), &lattice, &scheme, &window, r, 8)
        .unwrap();
    let sums = block_sum_estimator(&run.per_block, 2);
    let fit = fit_weights(&run.xi, 2).unwrap();
    for j in 1..=2 {
        let a = sums.weights.get(j);
        let b = fit.get(j);
        // the fitted weight of a Poisson count has variance about λ / R
        let se = (sums.std_errors[j - 1].powi(2) + (b.max(1e-3)) / r as f64).sqrt();
        assert!(
            (a - b).abs() <= 3.0 * se,
            "p{j}: blocks {a} vs fit {b} (se {se})"
        );
    }
    assert_eq!(sums.tail_mass, 0.0);
    assert!((sums.weights.get(2) - 1.0).abs() < 0.05);
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let lattice = LatticeBox::cube(1, 52).unwrap();
    let window = EnergyWindow::centered(2.5, 2.0, &lattice).unwrap();
    let scheme = BlockScheme::new(&lattice, 2).unwrap();
    let runs: Vec<_> = [1, 2, 5]
        .iter()
        .map(|&w| {
            McEngine::new(w)
                .unwrap()
                .run_eta_blocks(&rank_one(5.0), &lattice, &scheme, &window, 700, 9)
                .unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn fit_recovers_weights_from_sampled_compound_poisson() {
    let law = LevyWeights::new(vec![0.4, 0.3, 0.0, 0.2]).unwrap();
    let pmf = sample_pmf(&law, 200_000, 10);
    let fit = fit_weights(&pmf, 4).unwrap();
    for j in 1..=4 {
        assert!(
            (fit.get(j) - law.get(j)).abs() < 0.02,
            "p{j} = {}",
            fit.get(j)
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Fitting the exact law (as expected counts at large R) returns the
    /// weights that generated it.
    #[test]
    fn fit_inverts_panjer(weights in prop::collection::vec(0.0f64..0.8, 1..=4)) {
        let law = LevyWeights::new(weights.clone()).unwrap();
        let probs = panjer_pmf(&law, 80);
        let pmf = EmpiricalPmf::from_probabilities(&probs, 1_000_000_000);
        let fit = fit_weights(&pmf, weights.len()).unwrap();
        for (j, w) in weights.iter().enumerate() {
            prop_assert!((fit.get(j + 1) - w).abs() < 1e-3, "p{} = {} vs {}", j + 1, fit.get(j + 1), w);
        }
    }
}
