//! Structural identities of the model family, checked against the dense
//! eigensolver and across variants.

use levy_spectra::{
    count_in, eigenvalues_dense, sample_disorder, DisorderLaw, EnergyWindow, HamiltonianTemplate,
    LatticeBox, McEngine, ModelConfig, ModelSpec, Variant,
};
use proptest::prelude::*;

fn uniform(a: f64, b: f64) -> DisorderLaw {
    DisorderLaw::uniform(a, b).unwrap()
}

#[test]
fn without_hopping_eigenvalues_are_the_draws_with_rank_multiplicity() {
    let cases = [
        (Variant::Diagonal { m: 3 }, 1, 7),
        (Variant::MatrixValued { m: 2 }, 2, 4),
        (Variant::Dimer, 1, 10),
        (Variant::PolymerBlock { k: 2 }, 2, 6),
        (Variant::PolymerBlock { k: 3 }, 1, 9),
        (Variant::RankOneSite, 3, 3),
    ];
    for (variant, dim, side) in cases {
        let spec = ModelSpec::new(variant, dim, 0.0, uniform(-1.0, 2.0)).unwrap();
        let lattice = LatticeBox::with_side(dim, side).unwrap();
        let omega = sample_disorder(&spec, &lattice, 3, 0);
        let h = HamiltonianTemplate::new(&spec, &lattice)
            .unwrap()
            .assemble(&omega)
            .unwrap();
        let mut expected: Vec<f64> = omega
            .values
            .iter()
            .flat_map(|&w| std::iter::repeat_n(w, spec.rank))
            .collect();
        expected.sort_by(f64::total_cmp);
        let got = eigenvalues_dense(&h).unwrap();
        assert_eq!(got.len(), expected.len(), "{variant:?}");
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-12, "{variant:?}: {g} vs {e}");
        }
    }
}

#[test]
fn matrix_valued_spectrum_is_the_scalar_spectrum_repeated() {
    let law = uniform(0.0, 4.0);
    let one = ModelSpec::new(Variant::RankOneSite, 2, 1.0, law.clone()).unwrap();
    let three = ModelSpec::new(Variant::MatrixValued { m: 3 }, 2, 1.0, law).unwrap();
    let lattice = LatticeBox::cube(2, 2).unwrap();
    let omega = sample_disorder(&one, &lattice, 9, 4);
    let h1 = HamiltonianTemplate::new(&one, &lattice)
        .unwrap()
        .assemble(&omega)
        .unwrap();
    let h3 = HamiltonianTemplate::new(&three, &lattice)
        .unwrap()
        .assemble(&omega)
        .unwrap();
    let ev1 = eigenvalues_dense(&h1).unwrap();
    let ev3 = eigenvalues_dense(&h3).unwrap();
    for (k, e) in ev1.iter().enumerate() {
        for r in 0..3 {
            assert!((ev3[3 * k + r] - e).abs() < 1e-10);
        }
    }
}

#[test]
fn diagonal_and_matrix_valued_give_identical_counts() {
    let law = uniform(0.0, 3.0);
    let diag = ModelSpec::new(Variant::Diagonal { m: 2 }, 1, 0.7, law.clone()).unwrap();
    let full = ModelSpec::new(Variant::MatrixValued { m: 2 }, 1, 0.7, law).unwrap();
    let lattice = LatticeBox::cube(1, 40).unwrap();
    let window = EnergyWindow::centered(1.5, 3.0, &lattice).unwrap();
    let engine = McEngine::new(1).unwrap();
    let a = engine
        .xi_samples(&diag, &lattice, &window, 300, 21)
        .unwrap();
    let b = engine
        .xi_samples(&full, &lattice, &window, 300, 21)
        .unwrap();
    assert_eq!(a, b);
}

#[test]
fn rank_three_counts_are_three_times_rank_one_counts() {
    let law = uniform(0.0, 6.0);
    let one = ModelSpec::new(Variant::RankOneSite, 1, 1.0, law.clone()).unwrap();
    let three = ModelSpec::new(Variant::MatrixValued { m: 3 }, 1, 1.0, law).unwrap();
    let lattice = LatticeBox::cube(1, 60).unwrap();
    let window = EnergyWindow::centered(3.0, 4.0, &lattice).unwrap();
    let engine = McEngine::new(2).unwrap();
    let a = engine.xi_samples(&one, &lattice, &window, 400, 8).unwrap();
    let b = engine
        .xi_samples(&three, &lattice, &window, 400, 8)
        .unwrap();
    assert!(a.iter().any(|x| x.unwrap() > 0));
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(3 * x.unwrap(), y.unwrap());
    }
}

#[test]
fn counts_are_additive_over_adjacent_windows() {
    let spec = ModelSpec::new(Variant::PolymerBlock { k: 2 }, 2, 0.5, uniform(0.0, 5.0)).unwrap();
    let lattice = LatticeBox::with_side(2, 12).unwrap();
    let template = HamiltonianTemplate::new(&spec, &lattice).unwrap();
    let beta = lattice.site_count() as f64;
    for r in 0..20 {
        let h = template
            .assemble(&sample_disorder(&spec, &lattice, 2, r))
            .unwrap();
        let left = EnergyWindow::new(2.5, -200.0, 30.0, beta).unwrap();
        let right = EnergyWindow::new(2.5, 30.0, 150.0, beta).unwrap();
        let whole = EnergyWindow::new(2.5, -200.0, 150.0, beta).unwrap();
        assert_eq!(
            count_in(&h, &left).unwrap() + count_in(&h, &right).unwrap(),
            count_in(&h, &whole).unwrap()
        );
    }
}

fn any_variant() -> impl Strategy<Value = (Variant, usize)> {
    prop_oneof![
        (1usize..=2).prop_map(|d| (Variant::RankOneSite, d)),
        (1usize..=3, 1usize..=2).prop_map(|(m, d)| (Variant::MatrixValued { m }, d)),
        (1usize..=3, 1usize..=2).prop_map(|(m, d)| (Variant::Diagonal { m }, d)),
        Just((Variant::Dimer, 1)),
        (2usize..=3, 1usize..=2).prop_map(|(k, d)| (Variant::PolymerBlock { k }, d)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Raising one block variable moves at most `m_k` eigenvalues across
    /// any window edge.
    #[test]
    fn rank_perturbation_bound(
        (variant, dim) in any_variant(),
        blocks in 1usize..=5,
        hopping in 0.0f64..2.0,
        seed in any::<u64>(),
        tau in 1e-3f64..4.0,
        pick in any::<prop::sample::Index>(),
        center in -1.0f64..7.0,
        a in -2.0f64..0.0,
        b in 0.0f64..2.0,
    ) {
        let side = blocks * variant.block_side();
        let spec = ModelSpec::new(variant, dim, hopping, uniform(0.0, 5.0)).unwrap();
        let lattice = LatticeBox::with_side(dim, side).unwrap();
        let template = HamiltonianTemplate::new(&spec, &lattice).unwrap();
        let omega = sample_disorder(&spec, &lattice, seed, 0);
        let mut bumped = omega.values.clone();
        let g = pick.index(bumped.len());
        bumped[g] += tau;
        let h = template.assemble(&omega).unwrap();
        let hp = template.assemble_values(&bumped).unwrap();
        let beta = lattice.site_count() as f64;
        let window = EnergyWindow::new(center, a * beta, b * beta, beta).unwrap();
        let before = count_in(&h, &window).unwrap();
        let after = count_in(&hp, &window).unwrap();
        prop_assert!(before.abs_diff(after) <= spec.rank);
    }

    #[test]
    fn model_config_round_trips_through_toml(
        (variant, dim) in any_variant(),
        blocks in 1usize..=6,
        hopping in 0.0f64..3.0,
        a in -5.0f64..0.0,
        width in 0.1f64..10.0,
        seed in any::<u64>(),
    ) {
        let spec = ModelSpec::new(variant, dim, hopping, uniform(a, a + width)).unwrap();
        let lattice = LatticeBox::with_side(dim, blocks * variant.block_side()).unwrap();
        let cfg = ModelConfig { spec, lattice, seed };
        let back = ModelConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
