//! Small summary statistics shared by the reporting code.

use serde::{Deserialize, Serialize};

/// Mean and population standard deviation of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Returns `None` for an empty slice. A single value has `std == 0`.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Self {
            mean,
            std: var.sqrt(),
        })
    }

    /// Exact, order-independent statistics of non-negative integer counts.
    pub fn of_counts(values: impl IntoIterator<Item = u64>) -> Option<Self> {
        let mut n: u128 = 0;
        let mut sum: u128 = 0;
        let mut sum_sq: u128 = 0;
        for v in values {
            let v = v as u128;
            n += 1;
            sum += v;
            sum_sq += v * v;
        }
        if n == 0 {
            return None;
        }
        let mean = sum as f64 / n as f64;
        // n^2 var = n * sum_sq - sum^2, exact in integers
        let scaled = n * sum_sq - sum * sum;
        let var = scaled as f64 / (n as f64 * n as f64);
        Some(Self {
            mean,
            std: var.sqrt(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton_has_zero_spread() {
        let s = MeanStd::of(&[5.0]).unwrap();
        assert_eq!((s.mean, s.std), (5.0, 0.0));
        let c = MeanStd::of_counts([5]).unwrap();
        assert_eq!((c.mean, c.std), (5.0, 0.0));
    }

    #[test]
    fn population_std_of_two_points() {
        let s = MeanStd::of(&[0.0, 10.0]).unwrap();
        assert_eq!((s.mean, s.std), (5.0, 5.0));
        let c = MeanStd::of_counts([0, 10]).unwrap();
        assert_eq!((c.mean, c.std), (5.0, 5.0));
    }

    #[test]
    fn empty_is_none() {
        assert!(MeanStd::of(&[]).is_none());
        assert!(MeanStd::of_counts(std::iter::empty()).is_none());
    }
}
