use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Histogram of a nonnegative integer statistic over `R` realizations.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EmpiricalPmf {
    counts: Vec<u64>,
    realizations: u64,
}

impl EmpiricalPmf {
    pub fn from_samples<I>(samples: I) -> Self
    where
        I: IntoIterator,
        I::Item: Into<u64>,
    {
        let mut pmf = EmpiricalPmf::default();
        for s in samples {
            pmf.record(s.into());
        }
        pmf
    }

    /// Builds from `(value, count)` pairs.
    pub fn from_counts(pairs: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let mut pmf = EmpiricalPmf::default();
        for (j, c) in pairs {
            pmf.record_many(j, c);
        }
        pmf
    }

    /// Expected counts of an exact pmf at `R` realizations, rounded.
    /// Used to build synthetic inputs with a known law.
    pub fn from_probabilities(probs: &[f64], realizations: u64) -> Self {
        Self::from_counts(
            probs
                .iter()
                .enumerate()
                .map(|(j, p)| (j as u64, (p * realizations as f64).round() as u64)),
        )
    }

    pub fn record(&mut self, value: u64) {
        self.record_many(value, 1);
    }

    pub fn record_many(&mut self, value: u64, count: u64) {
        if count == 0 {
            return;
        }
        let j = value as usize;
        if self.counts.len() <= j {
            self.counts.resize(j + 1, 0);
        }
        self.counts[j] += count;
        self.realizations += count;
    }

    /// Commutative merge of two histograms.
    pub fn merge(&mut self, other: &EmpiricalPmf) {
        for (j, &c) in other.counts.iter().enumerate() {
            self.record_many(j as u64, c);
        }
    }

    pub fn realizations(&self) -> u64 {
        self.realizations
    }

    pub fn count(&self, j: u64) -> u64 {
        self.counts.get(j as usize).copied().unwrap_or(0)
    }

    pub fn prob(&self, j: u64) -> f64 {
        if self.realizations == 0 {
            return 0.0;
        }
        self.count(j) as f64 / self.realizations as f64
    }

    /// `P̂(X > j)`.
    pub fn tail(&self, j: u64) -> f64 {
        if self.realizations == 0 {
            return 0.0;
        }
        let above: u64 = self.counts.iter().skip(j as usize + 1).sum();
        above as f64 / self.realizations as f64
    }

    /// Largest observed value.
    pub fn max_value(&self) -> Option<u64> {
        self.counts.iter().rposition(|&c| c > 0).map(|j| j as u64)
    }

    /// Probabilities `p̂(0..=max_value)`.
    pub fn probabilities(&self) -> Vec<f64> {
        let len = self.max_value().map_or(0, |m| m as usize + 1);
        (0..len as u64).map(|j| self.prob(j)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(j, &c)| (j as u64, c))
    }

    pub fn as_map(&self) -> BTreeMap<u64, u64> {
        self.iter().collect()
    }

    pub fn mean(&self) -> f64 {
        if self.realizations == 0 {
            return 0.0;
        }
        self.iter().map(|(j, c)| j as f64 * c as f64).sum::<f64>() / self.realizations as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.realizations < 2 {
            return 0.0;
        }
        let mean = self.mean();
        let ss: f64 = self
            .iter()
            .map(|(j, c)| c as f64 * (j as f64 - mean).powi(2))
            .sum();
        ss / (self.realizations - 1) as f64
    }

    pub fn std_error(&self) -> f64 {
        if self.realizations == 0 {
            return 0.0;
        }
        (self.variance() / self.realizations as f64).sqrt()
    }

    /// Total-variation distance to an exact pmf on `0..`.
    pub fn total_variation(&self, probs: &[f64]) -> f64 {
        let len = probs.len().max(self.counts.len());
        let mut tv = 0.0;
        for j in 0..len {
            let q = probs.get(j).copied().unwrap_or(0.0);
            tv += (self.prob(j as u64) - q).abs();
        }
        // mass of the reference law beyond `len` is unmatched
        let tail = 1.0 - probs.iter().sum::<f64>();
        0.5 * (tv + tail.max(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_sum_to_realizations() {
        let pmf = EmpiricalPmf::from_samples([0u64, 2, 2, 4, 0, 0]);
        assert_eq!(pmf.realizations(), 6);
        assert_eq!(pmf.count(0), 3);
        assert_eq!(pmf.count(1), 0);
        assert!((pmf.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(pmf.max_value(), Some(4));
        assert!((pmf.tail(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn merge_is_order_independent() {
        let a = EmpiricalPmf::from_samples([1u64, 2, 3]);
        let b = EmpiricalPmf::from_samples([0u64, 7]);
        let mut ab = a.clone();
        ab.merge(&b);
        let mut ba = b.clone();
        ba.merge(&a);
        assert_eq!(ab, ba);
        assert_eq!(ab.realizations(), 5);
    }

    #[test]
    fn moments() {
        let pmf = EmpiricalPmf::from_samples([1u64, 3]);
        assert_eq!(pmf.mean(), 2.0);
        assert_eq!(pmf.variance(), 2.0);
        let constant = EmpiricalPmf::from_samples([4u64; 10]);
        assert_eq!(constant.variance(), 0.0);
    }

    #[test]
    fn total_variation_against_itself_is_zero() {
        let pmf = EmpiricalPmf::from_samples([0u64, 1, 1, 2]);
        assert!(pmf.total_variation(&[0.25, 0.5, 0.25]) < 1e-15);
        assert!((pmf.total_variation(&[1.0]) - 0.75).abs() < 1e-15);
    }
}
