//! Monte Carlo summaries.

use serde::{Deserialize, Serialize};

/// Normal quantile for a two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Standard error of the mean.
    pub sigma: f64,
    pub half_width: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn from_values(values: &[f64]) -> Estimate {
        let n = values.len();
        if n == 0 {
            return Estimate { mean: f64::NAN, sigma: f64::NAN, half_width: f64::NAN, samples: 0 };
        }
        let nf = n as f64;
        let mean = values.iter().sum::<f64>() / nf;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0)
        } else {
            0.0
        };
        let sigma = (var / nf).sqrt();
        Estimate { mean, sigma, half_width: Z95 * sigma, samples: n }
    }

    /// Binomial proportion `hits / n` with the plug-in standard error.
    pub fn proportion(hits: usize, n: usize) -> Estimate {
        if n == 0 {
            return Estimate::from_values(&[]);
        }
        let nf = n as f64;
        let mean = hits as f64 / nf;
        let sigma = (mean * (1.0 - mean) / nf).sqrt();
        Estimate { mean, sigma, half_width: Z95 * sigma, samples: n }
    }

    pub fn from_flags(flags: impl IntoIterator<Item = bool>) -> Estimate {
        let (mut hits, mut n) = (0, 0);
        for f in flags {
            n += 1;
            hits += f as usize;
        }
        Estimate::proportion(hits, n)
    }
}

/// Difference of two independent estimates.
pub fn difference(a: &Estimate, b: &Estimate) -> Estimate {
    let sigma = (a.sigma * a.sigma + b.sigma * b.sigma).sqrt();
    Estimate {
        mean: a.mean - b.mean,
        sigma,
        half_width: Z95 * sigma,
        samples: a.samples.min(b.samples),
    }
}

/// One-sided test that a proportion is at least `bound`: the estimate may
/// fall short by three standard errors computed at the bound itself, which
/// stays meaningful when no hits were seen.
pub fn at_least(estimate: &Estimate, bound: f64) -> bool {
    let b = bound.clamp(0.0, 1.0);
    let sigma = (b * (1.0 - b) / estimate.samples.max(1) as f64).sqrt();
    estimate.mean >= b - 3.0 * sigma
}

/// Sample covariance of paired observations with an influence-function error.
pub fn covariance(a: &[f64], b: &[f64]) -> Estimate {
    let n = a.len().min(b.len());
    if n == 0 {
        return Estimate::from_values(&[]);
    }
    let nf = n as f64;
    let ma = a[..n].iter().sum::<f64>() / nf;
    let mb = b[..n].iter().sum::<f64>() / nf;
    let products: Vec<f64> = a[..n].iter().zip(&b[..n]).map(|(x, y)| (x - ma) * (y - mb)).collect();
    Estimate::from_values(&products)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportion_matches_values() {
        let flags = [true, false, true, true];
        let a = Estimate::from_flags(flags);
        assert_eq!(a.mean, 0.75);
        let b = Estimate::from_values(&[1.0, 0.0, 1.0, 1.0]);
        assert_eq!(b.mean, 0.75);
        assert!(a.sigma > 0.0 && b.sigma > 0.0);
    }

    #[test]
    fn at_least_with_no_hits() {
        let zero = Estimate::proportion(0, 20_000);
        assert!(at_least(&zero, 1e-5));
        assert!(!at_least(&zero, 1e-2));
        assert!(at_least(&Estimate::proportion(5, 10), 0.5));
    }

    #[test]
    fn covariance_of_identical_flags_is_the_variance() {
        let x = [1.0, 0.0, 1.0, 0.0];
        assert_eq!(covariance(&x, &x).mean, 0.25);
        assert_eq!(covariance(&x, &[0.0, 1.0, 0.0, 1.0]).mean, -0.25);
    }
}
