//! Compensated (Neumaier) summation.
//!
//! Reciprocal-rate sums over up to ~10^6 states lose several digits with a
//! naive running total; the compensation term keeps the error at O(eps)
//! independent of the number of terms.

use std::iter::Sum;

/// Running sum with a Neumaier compensation term.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub const fn new() -> Self {
        Self {
            sum: 0.0,
            compensation: 0.0,
        }
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Combines two partial sums; used to merge per-chunk totals.
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Sum<f64> for CompensatedSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator of terms.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    terms.into_iter().sum::<CompensatedSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        // naive summation returns 0 here
        let terms = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(terms), 2.0);
        assert_eq!(terms.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn many_small_terms() {
        let n = 10_000_000;
        let s = compensated_sum((0..n).map(|_| 0.1));
        assert!((s - 1_000_000.0).abs() < 1e-8);
    }

    #[test]
    fn merge_matches_single_pass() {
        let xs: Vec<f64> = (1..=1000).map(|k| 1.0 / k as f64).collect();
        let whole = compensated_sum(xs.iter().copied());
        let mut a: CompensatedSum = xs[..400].iter().copied().sum();
        let b: CompensatedSum = xs[400..].iter().copied().sum();
        a.merge(&b);
        assert!((a.value() - whole).abs() <= 1e-15 * whole);
    }
}
