//! Single-site disorder laws and counter-based sampling of disorder vectors.
//!
//! Every coupling constant is addressed by `(seed, realization, block)`:
//! the campaign seed keys a ChaCha8 stream, the realization selects the
//! stream id and the block index is the 64-bit word position inside it.
//! Draws therefore never depend on execution order or thread count.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, ModelSpec};

/// Absolutely continuous law of the coupling constants `ω_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DisorderLaw {
    Uniform {
        a: f64,
        b: f64,
    },
    /// Density interpolating linearly between `(x, y)` knots, normalized to
    /// unit mass and zero outside `[x_first, x_last]`.
    PiecewiseLinear {
        knots: Vec<(f64, f64)>,
    },
}

impl DisorderLaw {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidModel(format!(
                "uniform support needs finite a < b, got [{a}, {b}]"
            )));
        }
        Ok(DisorderLaw::Uniform { a, b })
    }

    pub fn piecewise_linear(mut knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidModel("need at least two knots".into()));
        }
        if knots
            .iter()
            .any(|&(x, y)| !x.is_finite() || !y.is_finite() || y < 0.0)
        {
            return Err(Error::InvalidModel(
                "knots must be finite with nonnegative density".into(),
            ));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidModel(
                "knot abscissae must be strictly increasing".into(),
            ));
        }
        let mass: f64 = knots
            .windows(2)
            .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
            .sum();
        if mass <= 0.0 {
            return Err(Error::InvalidModel("density has zero mass".into()));
        }
        for k in &mut knots {
            k.1 /= mass;
        }
        Ok(DisorderLaw::PiecewiseLinear { knots })
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            DisorderLaw::Uniform { a, b } => (*a, *b),
            DisorderLaw::PiecewiseLinear { knots } => (knots[0].0, knots[knots.len() - 1].0),
        }
    }

    /// Density `n(E)`; zero outside the support.
    pub fn density(&self, e: f64) -> f64 {
        match self {
            DisorderLaw::Uniform { a, b } => {
                if (*a..=*b).contains(&e) {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            DisorderLaw::PiecewiseLinear { knots } => {
                let (lo, hi) = self.support();
                if !(lo..=hi).contains(&e) {
                    return 0.0;
                }
                let i = knots
                    .partition_point(|k| k.0 <= e)
                    .clamp(1, knots.len() - 1);
                let (x0, y0) = knots[i - 1];
                let (x1, y1) = knots[i];
                y0 + (y1 - y0) * (e - x0) / (x1 - x0)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            DisorderLaw::Uniform { a, b } => 0.5 * (a + b),
            DisorderLaw::PiecewiseLinear { knots } => knots
                .windows(2)
                .map(|w| {
                    let ((x0, y0), (x1, y1)) = (w[0], w[1]);
                    // ∫ x (y0 + s (x - x0)) dx over [x0, x1]
                    let dx = x1 - x0;
                    let s = (y1 - y0) / dx;
                    y0 * (x1 * x1 - x0 * x0) / 2.0 + s * (dx.powi(3) / 3.0 + x0 * dx * dx / 2.0)
                })
                .sum(),
        }
    }

    /// Inverse distribution function at `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            DisorderLaw::Uniform { a, b } => a + (b - a) * u,
            DisorderLaw::PiecewiseLinear { knots } => {
                let mut rest = u;
                for w in knots.windows(2) {
                    let ((x0, y0), (x1, y1)) = (w[0], w[1]);
                    let dx = x1 - x0;
                    let mass = 0.5 * (y0 + y1) * dx;
                    if rest < mass {
                        let slope = (y1 - y0) / dx;
                        let disc = (y0 * y0 + 2.0 * slope * rest).max(0.0);
                        let denom = y0 + disc.sqrt();
                        let t = if denom > 0.0 { 2.0 * rest / denom } else { 0.0 };
                        return (x0 + t).min(x1);
                    }
                    rest -= mass;
                }
                knots[knots.len() - 1].0
            }
        }
    }
}

/// One disorder draw, a value per projection block.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderSample {
    pub values: Vec<f64>,
    pub seed: u64,
    pub realization: u64,
}

/// Stream of uniforms for one realization of a campaign.
pub(crate) fn realization_stream(seed: u64, realization: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(realization);
    rng
}

fn unit_interval(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform variate in `[0, 1)` at counter `(seed, realization, block)`.
pub fn uniform_at(seed: u64, realization: u64, block: u64) -> f64 {
    let mut rng = realization_stream(seed, realization);
    rng.set_word_pos(2 * block as u128);
    unit_interval(rng.next_u64())
}

/// Draws iid couplings for every projection block of `lattice`.
pub fn sample_disorder(
    spec: &ModelSpec,
    lattice: &LatticeBox,
    seed: u64,
    realization: u64,
) -> DisorderSample {
    let n = spec.block_count(lattice);
    let mut rng = realization_stream(seed, realization);
    let values = (0..n)
        .map(|_| spec.disorder.quantile(unit_interval(rng.next_u64())))
        .collect();
    DisorderSample {
        values,
        seed,
        realization,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Variant;

    fn spec(law: DisorderLaw) -> ModelSpec {
        ModelSpec::new(Variant::RankOneSite, 1, 0.0, law).unwrap()
    }

    #[test]
    fn uniform_draws_stay_in_support() {
        let s = spec(DisorderLaw::uniform(0.0, 1.0).unwrap());
        let b = LatticeBox::cube(2, 10).unwrap();
        let w = sample_disorder(&s, &b, 7, 3);
        assert_eq!(w.values.len(), 441);
        assert!(w.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn draws_are_reproducible() {
        let s = spec(DisorderLaw::uniform(-1.0, 3.0).unwrap());
        let b = LatticeBox::cube(1, 50).unwrap();
        assert_eq!(
            sample_disorder(&s, &b, 11, 5),
            sample_disorder(&s, &b, 11, 5)
        );
        assert_ne!(
            sample_disorder(&s, &b, 11, 5).values,
            sample_disorder(&s, &b, 11, 6).values
        );
    }

    #[test]
    fn sequential_draws_match_random_access() {
        let s = spec(DisorderLaw::uniform(0.0, 1.0).unwrap());
        let b = LatticeBox::cube(1, 20).unwrap();
        let w = sample_disorder(&s, &b, 99, 12);
        for (g, v) in w.values.iter().enumerate() {
            assert_eq!(*v, uniform_at(99, 12, g as u64));
        }
    }

    #[test]
    fn uniform_mean_law_of_large_numbers() {
        let s = spec(DisorderLaw::uniform(0.0, 1.0).unwrap());
        let b = LatticeBox::with_side(1, 50_000).unwrap();
        let total: f64 = (0..2)
            .flat_map(|r| sample_disorder(&s, &b, 2024, r).values)
            .sum();
        let mean = total / 100_000.0;
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
    }

    #[test]
    fn piecewise_linear_is_normalized_and_invertible() {
        let law = DisorderLaw::piecewise_linear(vec![(0.0, 0.0), (1.0, 2.0), (2.0, 0.0)]).unwrap();
        assert!((law.density(1.0) - 1.0).abs() < 1e-12);
        assert_eq!(law.density(-0.5), 0.0);
        assert_eq!(law.density(2.5), 0.0);
        assert!((law.quantile(0.5) - 1.0).abs() < 1e-12);
        // CDF on [0,1] is x²/2
        for u in [0.02, 0.1, 0.3, 0.45] {
            let x = law.quantile(u);
            assert!((x * x / 2.0 - u).abs() < 1e-12);
        }
        assert!((law.mean() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_laws() {
        assert!(DisorderLaw::uniform(1.0, 1.0).is_err());
        assert!(DisorderLaw::piecewise_linear(vec![(0.0, 1.0)]).is_err());
        assert!(DisorderLaw::piecewise_linear(vec![(0.0, 1.0), (0.0, 1.0)]).is_err());
        assert!(DisorderLaw::piecewise_linear(vec![(0.0, -1.0), (1.0, 1.0)]).is_err());
    }
}
