//! Exit-tail bound from pairwise decorrelation:
//! `min_k lambda^k + coef(p, lambda) * d(2t/k)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{num, row};
use crate::spectral::{DecorrelationCurve, EvalMode, TimeDomain};

/// Target precision used to size the default `k` range.
pub const TARGET_PRECISION: f64 = 1e-12;

/// `max(64, ceil(4 ln(1 / precision)))`
pub fn default_k_max() -> usize {
    64usize.max((4.0 * (1.0 / TARGET_PRECISION).ln()).ceil() as usize)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "constant", content = "lambda", rename_all = "kebab-case")]
pub enum BoundConstant {
    /// `lambda = (p+1)/2`, coefficient `16p/(1-p)^2`.
    Published,
    /// `lambda = (p+1)/2`, coefficient `4p(3-p)/(1-p)^2`.
    Proof,
    /// Any `lambda` in `(p, 1)` with `(p-p^2)/(lambda-p)^2 * (2-lambda)/(1-lambda)`.
    Lambda(f64),
}

impl BoundConstant {
    pub fn label(&self) -> &'static str {
        match self {
            BoundConstant::Published => "published-constant",
            BoundConstant::Proof => "proof-constant",
            BoundConstant::Lambda(_) => "general-lambda",
        }
    }

    /// `(lambda, coefficient)` for event mass `p`.
    pub fn terms(&self, p: f64) -> Result<(f64, f64)> {
        check_probability(p)?;
        Ok(match *self {
            BoundConstant::Published => ((p + 1.0) / 2.0, 16.0 * p / ((1.0 - p) * (1.0 - p))),
            BoundConstant::Proof => ((p + 1.0) / 2.0, 4.0 * p * (3.0 - p) / ((1.0 - p) * (1.0 - p))),
            BoundConstant::Lambda(lambda) => {
                if !(lambda > p && lambda < 1.0) {
                    return Err(Error::LambdaRange { lambda, p });
                }
                let c = (p - p * p) / ((lambda - p) * (lambda - p)) * (2.0 - lambda) / (1.0 - lambda);
                (lambda, c)
            }
        })
    }
}

impl std::str::FromStr for BoundConstant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "published" | "published-constant" => Ok(BoundConstant::Published),
            "proof" | "proof-constant" => Ok(BoundConstant::Proof),
            other => other
                .strip_prefix("lambda=")
                .and_then(|v| v.parse().ok())
                .map(BoundConstant::Lambda)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown constant {other}"))),
        }
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::ProbabilityRange(p))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TmainOptions {
    pub k_max: usize,
    pub constant: BoundConstant,
}

impl Default for TmainOptions {
    fn default() -> Self {
        TmainOptions { k_max: default_k_max(), constant: BoundConstant::Published }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub t: f64,
    pub target: Option<f64>,
    pub target_ci: Option<f64>,
    /// Clamped to `[0, 1]`.
    pub bound: f64,
    pub raw_bound: f64,
    pub argmin_k: usize,
    pub slack: Option<f64>,
    pub mode: String,
    pub constant: String,
    pub lambda: f64,
}

impl BoundReport {
    pub fn with_target(mut self, target: f64, ci: Option<f64>) -> Self {
        self.target = Some(target);
        self.target_ci = ci;
        self.slack = Some(self.bound - target);
        self
    }
}

fn mode_label(mode: EvalMode) -> &'static str {
    match mode {
        EvalMode::ExactAtIntegers => "exact-at-integers",
        EvalMode::Envelope => "nonincreasing-envelope",
        EvalMode::Continuous => "continuous",
    }
}

/// `d` at the argument used for splitting `[0, t]` into `k` blocks, or `None`
/// when `k` is not admissible for the curve.
fn block_decorrelation(curve: &DecorrelationCurve, t: f64, k: usize) -> Option<f64> {
    match curve.domain {
        TimeDomain::Discrete => {
            let steps = t as u64;
            let k = k as u64;
            if k > steps {
                return None;
            }
            if curve.mode == EvalMode::ExactAtIntegers && steps % k != 0 {
                return None;
            }
            // whole steps per block; the tail at k * floor(t/k) dominates the tail at t
            curve.eval(2.0 * (steps / k) as f64)
        }
        TimeDomain::Continuous => curve.eval(2.0 * t / k as f64),
    }
}

/// Minimizes the bound over admissible `k` in `1..=k_max`.
pub fn tmain_bound(p: f64, curve: &DecorrelationCurve, t: f64, options: &TmainOptions) -> Result<BoundReport> {
    let (lambda, coef) = options.constant.terms(p)?;
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if curve.domain == TimeDomain::Discrete && t.fract() != 0.0 {
        return Err(Error::InvalidParameter(format!("discrete time must be an integer, got {t}")));
    }
    let mut best: Option<(f64, usize)> = None;
    if t > 0.0 {
        for k in 1..=options.k_max {
            let Some(d) = block_decorrelation(curve, t, k) else { continue };
            let value = lambda.powi(k as i32) + coef * d;
            if best.is_none_or(|(b, _)| value < b) {
                best = Some((value, k));
            }
        }
    }
    let (raw, k) = best.ok_or(Error::NoAdmissibleK { t })?;
    Ok(BoundReport {
        t,
        target: None,
        target_ci: None,
        bound: raw.clamp(0.0, 1.0),
        raw_bound: raw,
        argmin_k: k,
        slack: None,
        mode: mode_label(curve.mode).to_string(),
        constant: options.constant.label().to_string(),
        lambda,
    })
}

/// Batch CSV `t,target,bound,argmin_k,slack`.
pub fn reports_to_csv(reports: &[BoundReport]) -> String {
    let mut out = String::from("t,target,bound,argmin_k,slack\n");
    for r in reports {
        out.push_str(&row(&[
            num(r.t),
            r.target.map(num).unwrap_or_default(),
            num(r.bound),
            r.argmin_k.to_string(),
            r.slack.map(num).unwrap_or_default(),
        ]));
    }
    out
}

/// Decay shapes for which the bound has a closed-form `k` schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "kebab-case")]
pub enum DecayRegime {
    /// `d(x) = min(1, c x^{-alpha})`
    Polynomial { constant: f64, alpha: f64 },
    /// `d(x) = min(1, c exp(-rate x^alpha))`
    StretchedExponential { constant: f64, rate: f64, alpha: f64 },
}

impl DecayRegime {
    fn alpha(&self) -> f64 {
        match *self {
            DecayRegime::Polynomial { alpha, .. } | DecayRegime::StretchedExponential { alpha, .. } => alpha,
        }
    }

    /// `ln d(x)`
    pub fn log_d(&self, x: f64) -> f64 {
        let v = match *self {
            DecayRegime::Polynomial { constant, alpha } => constant.ln() - alpha * x.ln(),
            DecayRegime::StretchedExponential { constant, rate, alpha } => constant.ln() - rate * x.powf(alpha),
        };
        v.min(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPoint {
    pub t: f64,
    pub k: usize,
    pub bound: f64,
    /// Kept separately because the bound underflows long before its logarithm does.
    pub log_bound: f64,
}

/// The bound evaluated on the schedule `k = floor(K ln t)` with
/// `K = alpha / ln(1/lambda)` (polynomial) or `k = floor(t^{alpha/(1+alpha)})`
/// (stretched exponential); `k = 1` for `t <= 1`.
pub fn tmain_asymptotic(p: f64, regime: &DecayRegime, t: f64, constant: BoundConstant) -> Result<AsymptoticPoint> {
    let alpha = regime.alpha();
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let (lambda, coef) = constant.terms(p)?;
    let k = if t <= 1.0 {
        1
    } else {
        let raw = match regime {
            DecayRegime::Polynomial { .. } => (alpha / (1.0 / lambda).ln() * t.ln()).floor(),
            DecayRegime::StretchedExponential { .. } => t.powf(alpha / (1.0 + alpha)).floor(),
        };
        (raw as usize).max(1)
    };
    let a = k as f64 * lambda.ln();
    let b = coef.ln() + if t > 0.0 { regime.log_d(2.0 * t / k as f64) } else { 0.0 };
    let hi = a.max(b);
    let log_bound = hi + ((a - hi).exp() + (b - hi).exp()).ln();
    Ok(AsymptoticPoint { t, k, bound: log_bound.exp(), log_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::DecayForm;
    use approx::assert_abs_diff_eq;

    fn sampled(times: Vec<f64>, values: Vec<f64>, mode: EvalMode) -> DecorrelationCurve {
        DecorrelationCurve::from_samples(0.5, times, values, TimeDomain::Discrete, mode).unwrap()
    }

    #[test]
    fn k_max_default() {
        assert_eq!(default_k_max(), 111);
    }

    #[test]
    fn iid_curve_leaves_geometric_term() {
        let times: Vec<f64> = (0..=10).map(|s| 2.0 * s as f64).collect();
        let mut values = vec![0.0; 11];
        values[0] = 1.0;
        let d = sampled(times, values, EvalMode::Envelope);
        let r = tmain_bound(0.5, &d, 10.0, &TmainOptions::default()).unwrap();
        assert_eq!(r.argmin_k, 10);
        assert_abs_diff_eq!(r.bound, 0.75f64.powi(10), epsilon = 1e-15);
    }

    #[test]
    fn identity_curve_is_vacuous() {
        let d = DecorrelationCurve::analytic(0.5, DecayForm::Polynomial { constant: 1.0, alpha: 0.0 });
        let r = tmain_bound(0.5, &d, 10.0, &TmainOptions::default()).unwrap();
        assert!(r.raw_bound >= 1.0);
        assert_eq!(r.bound, 1.0);
    }

    #[test]
    fn exact_mode_uses_divisors() {
        let times: Vec<f64> = (0..=7).map(|s| 2.0 * s as f64).collect();
        let values: Vec<f64> = (0..=7).map(|s| 0.5f64.powi(2 * s)).collect();
        let d = sampled(times, values, EvalMode::ExactAtIntegers);
        let r = tmain_bound(0.5, &d, 7.0, &TmainOptions::default()).unwrap();
        assert!(r.argmin_k == 1 || r.argmin_k == 7);
        assert!(tmain_bound(0.5, &d, 7.5, &TmainOptions::default()).is_err());
    }

    #[test]
    fn constants() {
        let (l, c) = BoundConstant::Published.terms(0.5).unwrap();
        assert_eq!((l, c), (0.75, 32.0));
        let (_, c) = BoundConstant::Proof.terms(0.5).unwrap();
        assert_eq!(c, 20.0);
        let (_, c) = BoundConstant::Lambda(0.75).terms(0.5).unwrap();
        assert_abs_diff_eq!(c, 20.0, epsilon = 1e-12);
        assert!(BoundConstant::Lambda(0.4).terms(0.5).is_err());
        assert!(BoundConstant::Published.terms(1.0).is_err());
        assert_eq!("lambda=0.8".parse::<BoundConstant>().unwrap(), BoundConstant::Lambda(0.8));
    }

    #[test]
    fn asymptotic_degenerate_schedule() {
        let regime = DecayRegime::Polynomial { constant: 1.0, alpha: 2.0 / 3.0 };
        let a = tmain_asymptotic(0.5, &regime, 0.5, BoundConstant::Published).unwrap();
        assert_eq!(a.k, 1);
        assert!(tmain_asymptotic(0.5, &DecayRegime::Polynomial { constant: 1.0, alpha: 0.0 }, 5.0, BoundConstant::Published).is_err());
    }

    #[test]
    fn csv_header() {
        let csv = reports_to_csv(&[]);
        assert_eq!(csv, "t,target,bound,argmin_k,slack\n");
    }
}
