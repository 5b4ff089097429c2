//! Real symmetric banded matrices in lower-band storage.

use nalgebra::DMatrix;

/// Symmetric matrix of order `n` with `H[i][j] = 0` whenever `|i - j| > b`.
///
/// Only the lower band is stored: row `i` holds `H[i][i-k]` for
/// `k = 0..=b` at `data[i * (b + 1) + k]`. Slots with `k > i` stay zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBandMatrix {
    order: usize,
    bandwidth: usize,
    data: Vec<f64>,
}

impl SymBandMatrix {
    pub fn zeros(order: usize, bandwidth: usize) -> Self {
        let bandwidth = bandwidth.min(order.saturating_sub(1));
        SymBandMatrix {
            order,
            bandwidth,
            data: vec![0.0; order * (bandwidth + 1)],
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), 0);
        m.data.copy_from_slice(diag);
        m
    }

    /// Symmetric tridiagonal matrix from its diagonal and off-diagonal.
    pub fn tridiagonal(diag: &[f64], off: &[f64]) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1));
        let mut m = Self::zeros(diag.len(), 1);
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        for (i, &e) in off.iter().enumerate() {
            m.set(i + 1, i, e);
        }
        m
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        (k <= self.bandwidth).then(|| hi * (self.bandwidth + 1) + k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Sets `H[i][j]` and `H[j][i]`.
    ///
    /// Panics if `(i, j)` lies outside the band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("({i}, {j}) outside bandwidth {}", self.bandwidth));
        self.data[s] = value;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let v = self.get(i, j);
        self.set(i, j, v + value);
    }

    /// Lower band of row `i`: `[H[i][i], H[i][i-1], ..., H[i][i-b]]`.
    #[inline]
    pub(crate) fn row_band(&self, i: usize) -> &[f64] {
        let w = self.bandwidth + 1;
        &self.data[i * w..(i + 1) * w]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.order).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    pub fn shift_diagonal(&mut self, c: f64) {
        for i in 0..self.order {
            self.add(i, i, c);
        }
    }

    /// Max-row-sum norm, an upper bound for the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        (0..self.order)
            .map(|i| {
                let lo = i.saturating_sub(self.bandwidth);
                let hi = (i + self.bandwidth).min(self.order - 1);
                (lo..=hi).map(|j| self.get(i, j).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Principal submatrix on `indices` (in the given order).
    ///
    /// The result's bandwidth is the smallest one holding every nonzero.
    pub fn principal_submatrix(&self, indices: &[usize]) -> SymBandMatrix {
        if let Some(&start) = indices.first() {
            if indices.iter().enumerate().all(|(k, &i)| i == start + k) {
                return self.contiguous_block(start, indices.len());
            }
        }
        let mut local = std::collections::HashMap::with_capacity(indices.len());
        for (li, &gi) in indices.iter().enumerate() {
            local.insert(gi, li);
        }
        let mut entries = Vec::new();
        let mut bandwidth = 0;
        for (li, &gi) in indices.iter().enumerate() {
            let band = self.row_band(gi);
            for (k, &v) in band.iter().enumerate().take(gi.min(self.bandwidth) + 1) {
                if k > 0 && v == 0.0 {
                    continue;
                }
                if let Some(&lj) = local.get(&(gi - k)) {
                    bandwidth = bandwidth.max(li.abs_diff(lj));
                    entries.push((li, lj, v));
                }
            }
        }
        let mut sub = SymBandMatrix::zeros(indices.len(), bandwidth);
        for (i, j, v) in entries {
            sub.set(i, j, v);
        }
        sub
    }

    /// Principal submatrix on rows `start..start + len`.
    pub fn contiguous_block(&self, start: usize, len: usize) -> SymBandMatrix {
        let mut sub = SymBandMatrix::zeros(len, self.bandwidth);
        let w = sub.bandwidth + 1;
        for li in 0..len {
            let keep = li.min(sub.bandwidth) + 1;
            sub.data[li * w..li * w + keep].copy_from_slice(&self.row_band(start + li)[..keep]);
        }
        sub
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.order, self.order, |i, j| self.get(i, j))
    }
}
