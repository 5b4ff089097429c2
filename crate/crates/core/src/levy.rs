//! Compound-Poisson laws with jumps in `{1, …, m}`.
//!
//! A weight vector `p = (p_1, …, p_m)` defines the integer law with
//! characteristic function `exp(Σ_j (e^{itj} - 1) p_j)`. This module
//! evaluates such laws, samples them, fits weights to empirical pmfs and
//! measures how far an empirical law is from a given compound Poisson one.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmf::EmpiricalPmf;

/// Minimum sample size accepted by [`fit_weights`].
pub const MIN_FIT_REALIZATIONS: u64 = 1000;
const MAX_SWEEPS: usize = 20_000;
const SWEEP_TOLERANCE: f64 = 1e-13;

/// Weights of a Lévy measure on `{1, …, m}`; `weights[j - 1] = p_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyWeights {
    pub weights: Vec<f64>,
}

impl LevyWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Lévy weights must be finite and nonnegative: {weights:?}"
            )));
        }
        Ok(LevyWeights { weights })
    }

    pub fn zeros(m: usize) -> Self {
        LevyWeights {
            weights: vec![0.0; m],
        }
    }

    /// Weight `p_j` for jump size `j ≥ 1`; zero beyond the support cap.
    pub fn get(&self, j: usize) -> f64 {
        if j == 0 {
            return 0.0;
        }
        self.weights.get(j - 1).copied().unwrap_or(0.0)
    }

    pub fn support_cap(&self) -> usize {
        self.weights.len()
    }

    /// Total mass `λ = Σ p_j`.
    pub fn intensity(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ j·p_j`, the mean of the induced law.
    pub fn mean(&self) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, p)| (i + 1) as f64 * p)
            .sum()
    }

    /// `Σ j²·p_j`, the variance of the induced law.
    pub fn variance(&self) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, p)| ((i + 1) * (i + 1)) as f64 * p)
            .sum()
    }

    pub fn characteristic_function(&self, t: f64) -> Complex64 {
        let exponent: Complex64 = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, &p)| (Complex64::from_polar(1.0, t * (i + 1) as f64) - 1.0) * p)
            .sum();
        exponent.exp()
    }
}

/// `P(0..=n_max)` of the compound-Poisson law by Panjer's recursion:
/// `P(0) = e^{-λ}`, `P(n) = n⁻¹ Σ_{j ≤ min(n, m)} j·p_j·P(n - j)`.
pub fn panjer_pmf(w: &LevyWeights, n_max: usize) -> Vec<f64> {
    let mut p = vec![0.0; n_max + 1];
    p[0] = (-w.intensity()).exp();
    for n in 1..=n_max {
        let s: f64 = (1..=n.min(w.support_cap()))
            .map(|j| j as f64 * w.get(j) * p[n - j])
            .sum();
        p[n] = s / n as f64;
    }
    p
}

/// Smallest `n_max` whose Panjer tail mass is below `tail`.
pub fn panjer_support(w: &LevyWeights, tail: f64) -> usize {
    let mut n = (w.mean() + 10.0 * w.variance().sqrt()).ceil() as usize + w.support_cap();
    loop {
        let total: f64 = panjer_pmf(w, n).iter().sum();
        if 1.0 - total < tail {
            return n;
        }
        n *= 2;
    }
}

/// Draws `realizations` iid variates from the law of `w` by inversion.
pub fn sample_pmf(w: &LevyWeights, realizations: u64, seed: u64) -> EmpiricalPmf {
    let probs = panjer_pmf(w, panjer_support(w, 1e-15));
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p;
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pmf = EmpiricalPmf::default();
    for _ in 0..realizations {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let n = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        pmf.record(n as u64);
    }
    pmf
}

fn l2_objective(model: &[f64], target: &[f64]) -> f64 {
    model.iter().zip(target).map(|(a, b)| (a - b).powi(2)).sum()
}

/// Starting point matching the first `min(m, 4)` cumulants, `κ_r = Σ j^r p_j`.
fn moment_start(pmf: &EmpiricalPmf, m: usize) -> Vec<f64> {
    let r = pmf.realizations() as f64;
    let mean = pmf.mean();
    let central = |k: i32| -> f64 {
        pmf.iter()
            .map(|(j, c)| c as f64 * (j as f64 - mean).powi(k))
            .sum::<f64>()
            / r
    };
    let (m2, m3, m4) = (central(2), central(3), central(4));
    let cumulants = [mean, m2, m3, m4 - 3.0 * m2 * m2];
    let k = m.min(4);
    let vander = DMatrix::from_fn(k, k, |row, col| ((col + 1) as f64).powi(row as i32 + 1));
    let rhs = DVector::from_iterator(k, cumulants[..k].iter().copied());
    let mut start = vec![0.0; m];
    match vander.lu().solve(&rhs) {
        Some(sol) if sol.iter().all(|x| x.is_finite()) => {
            for (s, x) in start.iter_mut().zip(sol.iter()) {
                *s = x.clamp(0.0, mean.max(0.0));
            }
        }
        _ => start[0] = mean.max(0.0),
    }
    start
}

/// Nonnegative weights on `{1, …, m}` minimizing the squared distance
/// between the Panjer pmf and `pmf` on `{0, …, max observed + m}`.
///
/// Projected coordinate descent with exact per-coordinate Newton steps,
/// using `∂P(n)/∂p_j = P(n - j) - P(n)`. A point mass at zero yields all
/// zero weights.
pub fn fit_weights(pmf: &EmpiricalPmf, m: usize) -> Result<LevyWeights> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "support cap must be at least 1".into(),
        ));
    }
    if pmf.realizations() < MIN_FIT_REALIZATIONS {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_REALIZATIONS,
            actual: pmf.realizations(),
        });
    }
    if pmf.prob(0) == 1.0 {
        return Ok(LevyWeights::zeros(m));
    }
    let n_cap = pmf.max_value().unwrap_or(0) as usize + m;
    let target: Vec<f64> = (0..=n_cap as u64).map(|j| pmf.prob(j)).collect();

    let mut w = LevyWeights {
        weights: moment_start(pmf, m),
    };
    let mut model = panjer_pmf(&w, n_cap);
    let mut value = l2_objective(&model, &target);

    for _ in 0..MAX_SWEEPS {
        let mut largest_move = 0.0f64;
        for j in 1..=m {
            let at = |v: &[f64], k: isize| if k < 0 { 0.0 } else { v[k as usize] };
            let (mut grad, mut curv, mut gauss) = (0.0, 0.0, 0.0);
            for n in 0..=n_cap {
                let ni = n as isize;
                let ji = j as isize;
                let d1 = at(&model, ni - ji) - model[n];
                let d2 = at(&model, ni - 2 * ji) - 2.0 * at(&model, ni - ji) + model[n];
                let resid = model[n] - target[n];
                grad += resid * d1;
                curv += d1 * d1 + resid * d2;
                gauss += d1 * d1;
            }
            let curvature = if curv > 0.0 { curv } else { gauss };
            if curvature <= 0.0 || grad == 0.0 {
                continue;
            }
            let old = w.weights[j - 1];
            let mut step = -grad / curvature;
            for _ in 0..60 {
                let cand = (old + step).max(0.0);
                w.weights[j - 1] = cand;
                let trial = panjer_pmf(&w, n_cap);
                let trial_value = l2_objective(&trial, &target);
                if trial_value <= value {
                    largest_move = largest_move.max((cand - old).abs());
                    model = trial;
                    value = trial_value;
                    break;
                }
                w.weights[j - 1] = old;
                step *= 0.5;
            }
        }
        if largest_move < SWEEP_TOLERANCE {
            break;
        }
    }
    Ok(w)
}

/// Block-sum estimate of the Lévy weights and the mass above the cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSumEstimate {
    pub weights: LevyWeights,
    /// Binomial standard errors of each weight, blocks treated as independent.
    pub std_errors: Vec<f64>,
    /// `Σ_p P̂{η_p > m}`.
    pub tail_mass: f64,
}

/// `λ̂_j = Σ_p P̂{η_{ℓ,p} = j}` for `j = 1..=m`.
pub fn block_sum_estimator(per_block: &[EmpiricalPmf], m: usize) -> BlockSumEstimate {
    let mut weights = vec![0.0; m];
    let mut var = vec![0.0; m];
    let mut tail_mass = 0.0;
    for pmf in per_block {
        let r = pmf.realizations().max(1) as f64;
        for j in 1..=m {
            let p = pmf.prob(j as u64);
            weights[j - 1] += p;
            var[j - 1] += p * (1.0 - p) / r;
        }
        tail_mass += pmf.tail(m as u64);
    }
    BlockSumEstimate {
        weights: LevyWeights { weights },
        std_errors: var.into_iter().map(f64::sqrt).collect(),
        tail_mass,
    }
}

/// Dispersion `s² / x̄`: 1 for Poisson, `Σ j²p_j / Σ j p_j` for compound Poisson.
pub fn poisson_index(pmf: &EmpiricalPmf) -> Result<f64> {
    if pmf.realizations() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            actual: pmf.realizations(),
        });
    }
    let mean = pmf.mean();
    if mean == 0.0 {
        return Err(Error::ZeroMean);
    }
    Ok(pmf.variance() / mean)
}

/// 64 equispaced points on `[-π, π]`.
pub fn default_t_grid() -> Vec<f64> {
    let n = 64;
    (0..n)
        .map(|k| -PI + 2.0 * PI * k as f64 / (n - 1) as f64)
        .collect()
}

/// Empirical characteristic function `(1/R) Σ e^{it·X_r}`.
pub fn empirical_char_fn(pmf: &EmpiricalPmf, t: f64) -> Complex64 {
    let r = pmf.realizations() as f64;
    pmf.iter()
        .map(|(j, c)| Complex64::from_polar(c as f64 / r, t * j as f64))
        .sum()
}

/// `sup_t |φ̂_emp(t) - exp(Σ_j (e^{itj} - 1) p_j)|` over `t_grid`.
pub fn char_fn_distance(pmf: &EmpiricalPmf, w: &LevyWeights, t_grid: &[f64]) -> f64 {
    t_grid
        .iter()
        .map(|&t| (empirical_char_fn(pmf, t) - w.characteristic_function(t)).norm())
        .fold(0.0, f64::max)
}

/// Summary written for each fitted campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub weights: Vec<f64>,
    pub intensity: f64,
    pub poisson_index: Option<f64>,
    pub char_fn_distance: f64,
    pub tail_mass: Option<f64>,
}

impl FitReport {
    pub fn from_fit(pmf: &EmpiricalPmf, m: usize, tail_mass: Option<f64>) -> Result<Self> {
        let w = fit_weights(pmf, m)?;
        Ok(FitReport {
            intensity: w.intensity(),
            poisson_index: poisson_index(pmf).ok(),
            char_fn_distance: char_fn_distance(pmf, &w, &default_t_grid()),
            tail_mass,
            weights: w.weights,
        })
    }
}
