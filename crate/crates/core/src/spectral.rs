//! Eigenvalue counting by Sylvester inertia, and a dense oracle.
//!
//! `N(E)`, the number of eigenvalues `≤ E`, is read off the signs of the
//! pivots of an unpivoted banded `LDLᵀ` factorization of `H - E·Id`. The
//! cost is `O(n·b²)` per energy and no eigenvalue is ever computed.

use serde::{Deserialize, Serialize};

use crate::band::SymBandMatrix;
use crate::error::{Error, Result};
use crate::lattice::LatticeBox;

/// Absolute pivot magnitude below which elimination is abandoned.
pub const PIVOT_TOLERANCE: f64 = 1e-300;
/// Energy shifts tried after a breakdown, in units of `1e-12·(1 + |E|)`.
const RETRY_OFFSETS: [f64; 3] = [1.0, -1.0, 2.0];
pub const DEFAULT_DENSE_CAP: usize = 2048;

/// Sylvester inertia of `H - E·Id`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Inertia {
    pub n_neg: usize,
    pub n_zero: usize,
    pub n_pos: usize,
}

impl Inertia {
    pub fn order(&self) -> usize {
        self.n_neg + self.n_zero + self.n_pos
    }
}

/// Rescaled window `(E0 + a/β, E0 + b/β]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyWindow {
    pub center: f64,
    pub a: f64,
    pub b: f64,
    pub scale: f64,
}

impl EnergyWindow {
    /// `a == b` is accepted and gives an empty window.
    pub fn new(center: f64, a: f64, b: f64, scale: f64) -> Result<Self> {
        if !(center.is_finite() && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidArgument(
                "window bounds must be finite".into(),
            ));
        }
        if a > b {
            return Err(Error::InvalidArgument(format!(
                "base interval [{a}, {b}] is reversed"
            )));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "scale must be positive, got {scale}"
            )));
        }
        Ok(EnergyWindow {
            center,
            a,
            b,
            scale,
        })
    }

    /// Window with `β = |Λ|`, the scaling of the local statistic `ξ_L`.
    pub fn for_box(center: f64, a: f64, b: f64, lattice: &LatticeBox) -> Result<Self> {
        Self::new(center, a, b, lattice.site_count() as f64)
    }

    /// `I = [-len/2, len/2]` scaled by `|Λ|`.
    pub fn centered(center: f64, length: f64, lattice: &LatticeBox) -> Result<Self> {
        Self::for_box(center, -0.5 * length, 0.5 * length, lattice)
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn left(&self) -> f64 {
        self.center + self.a / self.scale
    }

    pub fn right(&self) -> f64 {
        self.center + self.b / self.scale
    }

    pub fn shifted(&self, c: f64) -> Self {
        EnergyWindow {
            center: self.center + c,
            ..*self
        }
    }
}

/// Inertia of `H - E·Id` via banded `LDLᵀ` without pivoting.
///
/// A pivot below [`PIVOT_TOLERANCE`] that would be divided by later is a
/// [`Error::PivotBreakdown`]. A vanishing pivot that is never used (last
/// row, or a diagonal matrix) is reported in `n_zero`.
pub fn ldl_inertia(h: &SymBandMatrix, e: f64) -> Result<Inertia> {
    let n = h.order();
    let b = h.bandwidth();
    let mut inertia = Inertia::default();

    let mut classify = |d: f64, row: usize, used_later: bool| -> Result<()> {
        if !d.is_finite() || (used_later && d.abs() < PIVOT_TOLERANCE) {
            return Err(Error::PivotBreakdown { row, shift: e });
        }
        if d < 0.0 {
            inertia.n_neg += 1;
        } else if d > 0.0 {
            inertia.n_pos += 1;
        } else {
            inertia.n_zero += 1;
        }
        Ok(())
    };

    if b == 0 {
        for i in 0..n {
            classify(h.get(i, i) - e, i, false)?;
        }
        return Ok(inertia);
    }

    if b == 1 {
        // Sturm recurrence, rounded exactly as the general loop below
        let mut d = h.row_band(0)[0] - e;
        classify(d, 0, n > 1)?;
        for i in 1..n {
            let row = h.row_band(i);
            d = row[0] - e - row[1] * (row[1] / d);
            classify(d, i, i + 1 < n)?;
        }
        return Ok(inertia);
    }

    let w = b + 1;
    // factor[i * w + k] = L[i][i - k] for k >= 1; slot k = 0 is unused.
    let mut factor = vec![0.0; n * w];
    let mut pivots = vec![0.0; n];
    let mut scaled = vec![0.0; w];
    for i in 0..n {
        let lo = i.saturating_sub(b);
        let band = h.row_band(i);
        // scaled[i - k] = L[i][k] * d[k] for lo <= k < i, indexed by distance
        for j in lo..i {
            let mut s = band[i - j];
            for k in lo..j {
                s -= scaled[i - k] * factor[j * w + (j - k)];
            }
            scaled[i - j] = s;
            factor[i * w + (i - j)] = s / pivots[j];
        }
        let mut d = band[0] - e;
        for k in lo..i {
            d -= scaled[i - k] * factor[i * w + (i - k)];
        }
        pivots[i] = d;
        classify(d, i, i + 1 < n)?;
    }
    Ok(inertia)
}

/// Number of eigenvalues `≤ e`, retrying with tiny shifts on breakdown.
pub fn count_leq(h: &SymBandMatrix, e: f64) -> Result<usize> {
    let first = match ldl_inertia(h, e) {
        Ok(i) => return Ok(i.n_neg + i.n_zero),
        Err(err) => err,
    };
    let delta = 1e-12 * (1.0 + e.abs());
    for off in RETRY_OFFSETS {
        if let Ok(i) = ldl_inertia(h, e + off * delta) {
            log::warn!(
                "pivot breakdown at E = {e:e}; counted at E + {:e}",
                off * delta
            );
            return Ok(i.n_neg + i.n_zero);
        }
    }
    Err(first)
}

/// `Tr E_Ĩ(H)` for the half-open window `Ĩ = (left, right]`.
pub fn count_in(h: &SymBandMatrix, window: &EnergyWindow) -> Result<usize> {
    let (left, right) = (window.left(), window.right());
    if right <= left {
        return Ok(0);
    }
    let upper = count_leq(h, right)?;
    let lower = count_leq(h, left)?;
    Ok(upper.saturating_sub(lower))
}

/// All eigenvalues in ascending order; order capped at [`DEFAULT_DENSE_CAP`].
pub fn eigenvalues_dense(h: &SymBandMatrix) -> Result<Vec<f64>> {
    eigenvalues_dense_capped(h, DEFAULT_DENSE_CAP)
}

pub fn eigenvalues_dense_capped(h: &SymBandMatrix, cap: usize) -> Result<Vec<f64>> {
    if h.order() > cap {
        return Err(Error::OrderTooLarge {
            order: h.order(),
            cap,
        });
    }
    if h.order() == 0 {
        return Ok(Vec::new());
    }
    let mut ev: Vec<f64> = h
        .to_dense()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}
