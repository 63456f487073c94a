//! Order statistics and empirical CDFs over Monte-Carlo draws.

use crate::{Error, Result};

/// Sample quantile by linear interpolation between order statistics at
/// position `1 + (n - 1) p` (one-based). `sorted` must be ascending.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let p = p.clamp(0.0, 1.0);
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Right-continuous empirical CDF over a fixed set of draws.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientDraws { needed: 1, got: 0 });
        }
        Ok(EmpiricalCdf {
            sorted: sorted_copy(values),
        })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// `#{x <= t} / n`.
    pub fn cdf(&self, t: f64) -> f64 {
        self.sorted.partition_point(|&x| x <= t) as f64 / self.len() as f64
    }

    /// `#{x < t} / n`.
    pub fn cdf_below(&self, t: f64) -> f64 {
        self.sorted.partition_point(|&x| x < t) as f64 / self.len() as f64
    }

    /// Fraction of draws in the half-open window `[lo, hi)`.
    pub fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        (self.cdf_below(hi) - self.cdf_below(lo)).max(0.0)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        quantile_sorted(&self.sorted, p)
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.len() - 1]
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance.
pub fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (values.len() as f64 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_of_one_to_five() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&v, 0.25), 2.0);
        assert_eq!(quantile_sorted(&v, 0.75), 4.0);
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 5.0);
        assert_eq!(quantile_sorted(&[1.0, 2.0], 0.5), 1.5);
    }

    #[test]
    fn ecdf_conventions() {
        let e = EmpiricalCdf::new(&[0.0, 0.0, 0.02, 0.5]).unwrap();
        assert_eq!(e.cdf(0.0), 0.5);
        assert_eq!(e.cdf_below(0.0), 0.0);
        assert_eq!(e.mass_in(0.0, 0.05), 0.75);
        assert_eq!(e.cdf(1.0), 1.0);
        assert!(EmpiricalCdf::new(&[]).is_err());
    }
}
