//! Summary statistics and distribution helpers shared by the harness and tests.

use serde::{Deserialize, Serialize};
use libm::{erf, erfc};

/// Neumaier-compensated running sum; order of `add` calls fixes the result.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl McEstimate {
    /// Mean and standard error of `xs`, summed in the given order.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, stderr: f64::NAN, count: 0 };
        }
        let mut s = CompensatedSum::default();
        xs.iter().for_each(|&x| s.add(x));
        let mean = s.value() / n as f64;
        let mut ss = CompensatedSum::default();
        xs.iter().for_each(|&x| ss.add((x - mean) * (x - mean)));
        let var = if n > 1 { ss.value() / (n - 1) as f64 } else { 0.0 };
        Self { mean, stderr: (var / n as f64).sqrt(), count: n }
    }
}

/// Pearson correlation of two equally long samples.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    sxy / (sxx * syy).sqrt()
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn normal_cdf(x: f64) -> f64 {
    if x < 0.0 {
        0.5 * erfc(-x / std::f64::consts::SQRT_2)
    } else {
        0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
    }
}

/// Standard normal quantile, refined by Newton steps on an accurate CDF.
pub fn normal_quantile(p: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    let mut x = Normal::standard().inverse_cdf(p);
    if x.is_finite() {
        for _ in 0..2 {
            let d = normal_pdf(x);
            if d > 0.0 {
                x -= (normal_cdf(x) - p) / d;
            }
        }
    }
    x
}

/// CDF of the χ² law with one degree of freedom.
pub fn chi2_1_cdf(w: f64) -> f64 {
    if w <= 0.0 {
        0.0
    } else {
        erf((0.5 * w).sqrt())
    }
}

pub fn exp1_cdf(w: f64) -> f64 {
    if w <= 0.0 {
        0.0
    } else {
        -(-w).exp_m1()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..10 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 10.0);
    }

    #[test]
    fn estimate_of_constant_has_zero_stderr() {
        let e = McEstimate::from_samples(&[2.0; 10]);
        assert_eq!(e.mean, 2.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for p in [0.01, 0.2, 1.0 / 3.0, 0.5, 0.9] {
            assert!((normal_cdf(normal_quantile(p)) - p).abs() < 1e-12);
        }
        assert!((normal_quantile(1.0 / 3.0) + 0.430_727_299_295_457_6).abs() < 1e-9);
    }

    #[test]
    fn limit_law_cdfs() {
        assert!((chi2_1_cdf(1.0) - 0.682_689_492_137_085_9).abs() < 1e-12);
        assert!((exp1_cdf(1.0) - (1.0 - (-1f64).exp())).abs() < 1e-15);
        assert_eq!(chi2_1_cdf(-1.0), 0.0);
    }
}
