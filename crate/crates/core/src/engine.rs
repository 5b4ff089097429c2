//! Reproducible Monte Carlo campaigns over disorder realizations.
//!
//! Realization `r` of a campaign with seed `s` always sees the disorder
//! drawn at counter `(s, r, ·)`. Per-realization observations are folded
//! into integer histograms or integer sums, so results are bit-identical
//! for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::band::SymBandMatrix;
use crate::disorder::sample_disorder;
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianTemplate;
use crate::lattice::{LatticeBox, ModelSpec};
use crate::pmf::EmpiricalPmf;
use crate::spectral::{count_in, count_leq, EnergyWindow};
use crate::stats::{linear_fit, loglog_fit, wilson_interval, LinearFit, Z95};

/// Campaigns abort when at least this fraction of realizations fails.
pub const MAX_DROP_RATE: f64 = 1e-4;
/// Default `ε` in the block size `ℓ = ⌊L^{(1-ε)/2}⌋`.
pub const DEFAULT_BLOCK_EPSILON: f64 = 0.1;

#[derive(Debug, Default)]
struct Drops {
    count: u64,
    first: Option<(u64, Error)>,
}

impl Drops {
    fn record(&mut self, realization: u64, err: Error) {
        log::warn!("dropping realization {realization}: {err}");
        self.count += 1;
        if self.first.as_ref().is_none_or(|(r, _)| realization < *r) {
            self.first = Some((realization, err));
        }
    }

    fn merge(mut self, other: Drops) -> Drops {
        self.count += other.count;
        if let Some((r, e)) = other.first {
            if self.first.as_ref().is_none_or(|(s, _)| r < *s) {
                self.first = Some((r, e));
            }
        }
        self
    }

    fn check(self, total: u64) -> Result<u64> {
        match self.first {
            Some((realization, source)) if self.count as f64 >= MAX_DROP_RATE * total as f64 => {
                Err(Error::TooManyFailures {
                    dropped: self.count,
                    total,
                    realization,
                    source: Box::new(source),
                })
            }
            _ => Ok(self.count),
        }
    }
}

/// Histograms of several statistics recorded side by side.
#[derive(Debug, Clone, Default)]
struct Histograms(Vec<EmpiricalPmf>);

impl Histograms {
    fn new(n: usize) -> Self {
        Histograms(vec![EmpiricalPmf::default(); n])
    }

    fn absorb(&mut self, values: &[u32]) {
        for (h, &v) in self.0.iter_mut().zip(values) {
            h.record(v as u64);
        }
    }

    fn merge(mut self, other: Histograms) -> Self {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            a.merge(b);
        }
        self
    }
}

/// Non-overlapping cover of a box by cubes `Λ_ℓ(n_p)` of side `2ℓ + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockScheme {
    pub block_half_side: usize,
    /// Corner of each block in box coordinates `0..side`.
    pub origins: Vec<Vec<usize>>,
}

impl BlockScheme {
    pub fn new(lattice: &LatticeBox, block_half_side: usize) -> Result<Self> {
        let origins = lattice.tiling_origins(2 * block_half_side + 1)?;
        Ok(BlockScheme {
            block_half_side,
            origins,
        })
    }

    /// Block size `ℓ ≈ L^{(1-ε)/2}`, moved to the nearest `ℓ ≥ 1` for which
    /// `2ℓ + 1` divides the box side.
    pub fn default_for(lattice: &LatticeBox, epsilon: f64) -> Result<Self> {
        let side = lattice.side();
        let target = 2 * nominal_block_half_side(side / 2, epsilon) + 1;
        let best = (3..side)
            .step_by(2)
            .filter(|&s| side.is_multiple_of(s))
            .min_by_key(|s| s.abs_diff(target));
        match best {
            Some(s) => Self::new(lattice, (s - 1) / 2),
            None => Err(Error::Tiling {
                block: target,
                side,
            }),
        }
    }

    pub fn block_side(&self) -> usize {
        2 * self.block_half_side + 1
    }

    pub fn block_count(&self) -> usize {
        self.origins.len()
    }

    /// Lattice points `n_p` of the block centres.
    pub fn centers(&self, lattice: &LatticeBox) -> Vec<Vec<i64>> {
        let offset = (lattice.side() / 2) as i64;
        self.origins
            .iter()
            .map(|o| {
                o.iter()
                    .map(|&c| (c + self.block_half_side) as i64 - offset)
                    .collect()
            })
            .collect()
    }

    pub fn block_sites(&self, lattice: &LatticeBox) -> Vec<Vec<usize>> {
        self.origins
            .iter()
            .map(|o| lattice.subcube_sites(o, self.block_side()))
            .collect()
    }
}

/// `⌊L^{(1-ε)/2}⌋`, at least 1.
pub fn nominal_block_half_side(half_side: usize, epsilon: f64) -> usize {
    ((half_side as f64).powf((1.0 - epsilon) / 2.0).floor() as usize).max(1)
}

/// Largest `L' ≤ L` such that blocks of half side `⌊L^{(1-ε)/2}⌋` tile the
/// cube of half side `L'`. Returns `(L', ℓ)`.
pub fn tileable_half_side(half_side: usize, epsilon: f64) -> (usize, usize) {
    let ell = nominal_block_half_side(half_side, epsilon);
    let s = 2 * ell + 1;
    let mut l = half_side;
    while !(2 * l + 1).is_multiple_of(s) {
        l -= 1;
    }
    (l, ell)
}

/// Statistics of one block campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRun {
    pub scheme: BlockScheme,
    /// Law of `η_{ℓ,p}(I)` for each block `p`.
    pub per_block: Vec<EmpiricalPmf>,
    /// Law of `ζ_L(I) = Σ_p η_{ℓ,p}(I)`.
    pub zeta: EmpiricalPmf,
    /// Law of `ξ_L(I)` from the same realizations.
    pub xi: EmpiricalPmf,
    /// Law of `ξ_L(I) - ζ_L(I) + offset`, with `offset` the matrix order.
    pub difference_offset: u64,
    pub difference: EmpiricalPmf,
    pub dropped: u64,
}

impl BlockRun {
    pub fn mean_difference(&self) -> f64 {
        self.difference.mean() - self.difference_offset as f64
    }

    pub fn mean_difference_std_error(&self) -> f64 {
        self.difference.std_error()
    }

    /// `Σ_p P̂{η_{ℓ,p} > m}`.
    pub fn tail_mass(&self, m: u64) -> f64 {
        self.per_block.iter().map(|p| p.tail(m)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdsPoint {
    pub energy: f64,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DosPoint {
    pub energy: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub half_side: Option<usize>,
    pub side: usize,
    pub site_count: usize,
    pub interval_length: f64,
    pub value: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub realizations: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub statistic: String,
    pub center: f64,
    pub seed: u64,
    pub rows: Vec<ScalingRow>,
}

impl ScalingTable {
    pub fn sides(&self) -> Vec<usize> {
        let mut sides: Vec<usize> = self.rows.iter().map(|r| r.side).collect();
        sides.dedup();
        sides
    }

    pub fn rows_for_side(&self, side: usize) -> impl Iterator<Item = &ScalingRow> {
        self.rows.iter().filter(move |r| r.side == side)
    }

    fn xy(&self, side: usize) -> (Vec<f64>, Vec<f64>) {
        self.rows_for_side(side)
            .map(|r| (r.interval_length, r.value))
            .unzip()
    }

    /// Least-squares line of the statistic against `|I|` for one box.
    pub fn linear_fit(&self, side: usize) -> Option<LinearFit> {
        let (x, y) = self.xy(side);
        linear_fit(&x, &y)
    }

    /// Log-log fit against `|I|`, ignoring zero entries.
    pub fn loglog_fit(&self, side: usize) -> Option<LinearFit> {
        let (x, y) = self.xy(side);
        loglog_fit(&x, &y)
    }
}

/// Central difference `(N(E+h) - N(E-h)) / 2h` of an IDS curve.
///
/// `N` is interpolated linearly; energies closer than `h` to either end of
/// the grid are skipped.
pub fn estimate_dos(ids: &[IdsPoint], bandwidth: f64) -> Result<Vec<DosPoint>> {
    let spacing = ids
        .windows(2)
        .map(|w| w[1].energy - w[0].energy)
        .fold(0.0, f64::max);
    if bandwidth.is_nan() || bandwidth <= 0.0 || bandwidth < spacing * (1.0 - 1e-9) {
        return Err(Error::BandwidthTooSmall { bandwidth, spacing });
    }
    let (Some(first), Some(last)) = (ids.first(), ids.last()) else {
        return Ok(Vec::new());
    };
    let interp = |e: f64| -> f64 {
        let i = ids
            .partition_point(|p| p.energy <= e)
            .clamp(1, ids.len() - 1);
        let (a, b) = (ids[i - 1], ids[i]);
        if b.energy == a.energy {
            return b.value;
        }
        a.value + (b.value - a.value) * (e - a.energy) / (b.energy - a.energy)
    };
    let tol = 1e-12 * (1.0 + last.energy.abs().max(first.energy.abs()));
    Ok(ids
        .iter()
        .filter(|p| {
            p.energy - bandwidth >= first.energy - tol && p.energy + bandwidth <= last.energy + tol
        })
        .map(|p| DosPoint {
            energy: p.energy,
            value: (interp(p.energy + bandwidth) - interp(p.energy - bandwidth))
                / (2.0 * bandwidth),
        })
        .collect())
}

/// Worker pool and campaign drivers.
pub struct McEngine {
    pool: rayon::ThreadPool,
}

impl McEngine {
    /// `workers = 0` uses every available core.
    pub fn new(workers: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
        Ok(McEngine { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// Folds per-realization observations with an order-independent merge.
    fn tally<T, A, S, B, M>(
        &self,
        realizations: u64,
        init: impl Fn() -> A + Sync + Send,
        step: S,
        absorb: B,
        merge: M,
    ) -> (A, Drops)
    where
        A: Send,
        S: Fn(u64) -> Result<T> + Sync + Send,
        B: Fn(&mut A, T) + Sync + Send,
        M: Fn(A, A) -> A + Sync + Send,
    {
        self.pool.install(|| {
            (0..realizations)
                .into_par_iter()
                .fold(
                    || (init(), Drops::default()),
                    |(mut acc, mut drops), r| {
                        match step(r) {
                            Ok(obs) => absorb(&mut acc, obs),
                            Err(e) => drops.record(r, e),
                        }
                        (acc, drops)
                    },
                )
                .reduce(
                    || (init(), Drops::default()),
                    |(a, da), (b, db)| (merge(a, b), da.merge(db)),
                )
        })
    }

    fn realization(template: &HamiltonianTemplate, seed: u64, r: u64) -> Result<SymBandMatrix> {
        let omega = sample_disorder(template.spec(), template.lattice(), seed, r);
        template.assemble(&omega)
    }

    fn check_scale(lattice: &LatticeBox, window: &EnergyWindow) -> Result<()> {
        if window.scale != lattice.site_count() as f64 {
            return Err(Error::InvalidArgument(format!(
                "window scale {} differs from box volume {}",
                window.scale,
                lattice.site_count()
            )));
        }
        Ok(())
    }

    /// `ξ_L(I)` for every realization; `None` marks a dropped realization.
    pub fn xi_samples(
        &self,
        spec: &ModelSpec,
        lattice: &LatticeBox,
        window: &EnergyWindow,
        realizations: u64,
        seed: u64,
    ) -> Result<Vec<Option<u32>>> {
        Self::check_scale(lattice, window)?;
        let template = HamiltonianTemplate::new(spec, lattice)?;
        let results: Vec<Result<u32>> = self.pool.install(|| {
            (0..realizations)
                .into_par_iter()
                .map(|r| {
                    let h = Self::realization(&template, seed, r)?;
                    Ok(count_in(&h, window)? as u32)
                })
                .collect()
        });
        let mut drops = Drops::default();
        let out = results
            .into_iter()
            .enumerate()
            .map(|(r, res)| match res {
                Ok(v) => Some(v),
                Err(e) => {
                    drops.record(r as u64, e);
                    None
                }
            })
            .collect();
        drops.check(realizations)?;
        Ok(out)
    }

    /// Laws of `ξ_L` for several windows from the same realizations.
    pub fn run_xi_multi(
        &self,
        spec: &ModelSpec,
        lattice: &LatticeBox,
        windows: &[EnergyWindow],
        realizations: u64,
        seed: u64,
    ) -> Result<Vec<EmpiricalPmf>> {
        for w in windows {
            Self::check_scale(lattice, w)?;
        }
        let template = HamiltonianTemplate::new(spec, lattice)?;
        let (hist, drops) = self.tally(
            realizations,
            || Histograms::new(windows.len()),
            |r| {
                let h = Self::realization(&template, seed, r)?;
                windows
                    .iter()
                    .map(|w| count_in(&h, w).map(|c| c as u32))
                    .collect::<Result<Vec<u32>>>()
            },
            |acc, obs| acc.absorb(&obs),
            Histograms::merge,
        );
        drops.check(realizations)?;
        Ok(hist.0)
    }

    /// Empirical law of `ξ_L(I) = Tr E_Ĩ(H_L)` over `realizations` draws.
    pub fn run_xi(
        &self,
        spec: &ModelSpec,
        lattice: &LatticeBox,
        window: &EnergyWindow,
        realizations: u64,
        seed: u64,
    ) -> Result<EmpiricalPmf> {
        Ok(self
            .run_xi_multi(
                spec,
                lattice,
                std::slice::from_ref(window),
                realizations,
                seed,
            )?
            .remove(0))
    }

    /// Block statistics `η_{ℓ,p}(I)` and `ζ_L(I)` alongside `ξ_L(I)`.
    ///
    /// Each block operator is the principal restriction of the big-box
    /// Hamiltonian; the window keeps the big box scaling `β_L`.
    pub fn run_eta_blocks(
        &self,
        spec: &ModelSpec,
        lattice: &LatticeBox,
        scheme: &BlockScheme,
        window: &EnergyWindow,
        realizations: u64,
        seed: u64,
    ) -> Result<BlockRun> {
        Self::check_scale(lattice, window)?;
        // validates the tiling
        let check = BlockScheme::new(lattice, scheme.block_half_side)?;
        if check.origins != scheme.origins {
            return Err(Error::InvalidArgument(
                "block scheme does not match the box".into(),
            ));
        }
        let template = HamiltonianTemplate::new(spec, lattice)?;
        let block_indices: Vec<Vec<usize>> = scheme
            .block_sites(lattice)
            .iter()
            .map(|sites| template.indices_of_sites(sites))
            .collect();
        let nb = block_indices.len();
        let offset = spec.order(lattice) as u32;
        // per realization: [η_1..η_N, ζ, ξ, ξ - ζ + offset]
        let (hist, drops) = self.tally(
            realizations,
            || Histograms::new(nb + 3),
            |r| {
                let h = Self::realization(&template, seed, r)?;
                let mut obs = Vec::with_capacity(nb + 3);
                for idx in &block_indices {
                    let sub = h.principal_submatrix(idx);
                    obs.push(count_in(&sub, window)? as u32);
                }
                let zeta: u32 = obs.iter().sum();
                let xi = count_in(&h, window)? as u32;
                obs.push(zeta);
                obs.push(xi);
                obs.push(xi + offset - zeta);
                Ok(obs)
            },
            |acc, obs| acc.absorb(&obs),
            Histograms::merge,
        );
        let dropped = drops.check(realizations)?;
        let mut laws = hist.0;
        let difference = laws.pop().unwrap_or_default();
        let xi = laws.pop().unwrap_or_default();
        let zeta = laws.pop().unwrap_or_default();
        Ok(BlockRun {
            scheme: scheme.clone(),
            per_block: laws,
            zeta,
            xi,
            difference_offset: offset as u64,
            difference,
            dropped,
        })
    }

    /// Integrated density of states `N̂(E)` per lattice site.
    pub fn estimate_ids(
        &self,
        spec: &ModelSpec,
        lattice: &LatticeBox,
        energy_grid: &[f64],
        realizations: u64,
        seed: u64,
    ) -> Result<Vec<IdsPoint>> {
        if energy_grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("energy grid must be sorted".into()));
        }
        let template = HamiltonianTemplate::new(spec, lattice)?;
        let g = energy_grid.len();
        // integer sums keep the reduction exact
        let init = || (vec![0u64; g], vec![0u128; g], 0u64);
        let ((sum, sum_sq, n), drops) = self.tally(
            realizations,
            init,
            |r| {
                let h = Self::realization(&template, seed, r)?;
                energy_grid
                    .iter()
                    .map(|&e| count_leq(&h, e).map(|c| c as u64))
                    .collect::<Result<Vec<u64>>>()
            },
            |acc: &mut (Vec<u64>, Vec<u128>, u64), obs| {
                for (k, c) in obs.into_iter().enumerate() {
                    acc.0[k] += c;
                    acc.1[k] += (c as u128) * (c as u128);
                }
                acc.2 += 1;
            },
            |mut a, b| {
                for k in 0..g {
                    a.0[k] += b.0[k];
                    a.1[k] += b.1[k];
                }
                a.2 += b.2;
                a
            },
        );
        drops.check(realizations)?;
        let sites = lattice.site_count() as f64;
        Ok(energy_grid
            .iter()
            .enumerate()
            .map(|(k, &e)| {
                let nf = n as f64;
                let mean = sum[k] as f64 / nf;
                let var = if n > 1 {
                    ((sum_sq[k] as f64) - nf * mean * mean).max(0.0) / (nf - 1.0)
                } else {
                    0.0
                };
                IdsPoint {
                    energy: e,
                    value: mean / sites,
                    std_error: (var / nf).sqrt() / sites,
                }
            })
            .collect())
    }

    /// Mean of `ξ_L(I)` against `|I|` for each box.
    pub fn wegner_scan(
        &self,
        spec: &ModelSpec,
        boxes: &[LatticeBox],
        interval_lengths: &[f64],
        center: f64,
        realizations: u64,
        seed: u64,
    ) -> Result<ScalingTable> {
        self.scan(
            spec,
            boxes,
            interval_lengths,
            center,
            realizations,
            seed,
            "mean_xi",
            |pmf| {
                let mean = pmf.mean();
                let se = pmf.std_error();
                (mean, se, mean - Z95 * se, mean + Z95 * se)
            },
        )
    }

    /// `P̂{ξ_L(I) > m_k}` against `|I|` for each box.
    pub fn minami_scan(
        &self,
        spec: &ModelSpec,
        boxes: &[LatticeBox],
        interval_lengths: &[f64],
        center: f64,
        realizations: u64,
        seed: u64,
    ) -> Result<ScalingTable> {
        let m = spec.rank as u64;
        self.scan(
            spec,
            boxes,
            interval_lengths,
            center,
            realizations,
            seed,
            "prob_xi_above_rank",
            |pmf| {
                let r = pmf.realizations();
                let p = pmf.tail(m);
                let se = if r > 1 {
                    (p * (1.0 - p) * r as f64 / (r - 1) as f64 / r as f64).sqrt()
                } else {
                    0.0
                };
                let hits = (p * r as f64).round() as u64;
                let (lo, hi) = wilson_interval(hits, r, Z95);
                (p, se, lo, hi)
            },
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn scan(
        &self,
        spec: &ModelSpec,
        boxes: &[LatticeBox],
        interval_lengths: &[f64],
        center: f64,
        realizations: u64,
        seed: u64,
        statistic: &str,
        summarize: impl Fn(&EmpiricalPmf) -> (f64, f64, f64, f64),
    ) -> Result<ScalingTable> {
        let mut rows = Vec::new();
        for lattice in boxes {
            let windows = interval_lengths
                .iter()
                .map(|&len| EnergyWindow::centered(center, len, lattice))
                .collect::<Result<Vec<_>>>()?;
            let laws = self.run_xi_multi(spec, lattice, &windows, realizations, seed)?;
            for (&len, pmf) in interval_lengths.iter().zip(&laws) {
                let (value, std_error, ci_low, ci_high) = summarize(pmf);
                rows.push(ScalingRow {
                    half_side: lattice.half_side(),
                    side: lattice.side(),
                    site_count: lattice.site_count(),
                    interval_length: len,
                    value,
                    std_error,
                    ci_low,
                    ci_high,
                    realizations: pmf.realizations(),
                    seed,
                });
            }
        }
        Ok(ScalingTable {
            statistic: statistic.to_string(),
            center,
            seed,
            rows,
        })
    }
}
