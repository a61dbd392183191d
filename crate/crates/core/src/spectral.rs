//! Spectra of reversible kernels and generators, heat operators, and
//! decorrelation curves of event indicators.
//!
//! Everything here goes through the symmetrization `D^{1/2} M D^{-1/2}`
//! with `D = diag(pi)`, which is a real symmetric matrix whenever `M`
//! satisfies detailed balance. Its eigendecomposition maps back to the
//! original operator exactly, so functions of `M` (powers, exponentials)
//! are evaluated as `D^{-1/2} V phi(L) V^T D^{1/2}`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::chain::{EventSet, GeneratorChain, MarkovOperator, ReversibleChain};
use crate::error::{Error, Result};

/// Eigendecomposition of a symmetrized reversible operator.
#[derive(Clone, Debug)]
pub struct SymmetricForm {
    sqrt_pi: Vec<f64>,
    values: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl SymmetricForm {
    pub fn new(matrix: &DMatrix<f64>, pi: &[f64]) -> Self {
        let n = matrix.nrows();
        let sqrt_pi: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = sqrt_pi[i] * matrix[(i, j)] / sqrt_pi[j];
            }
        }
        let a = (&a + a.transpose()) * 0.5;
        let eig = SymmetricEigen::new(a);
        SymmetricForm {
            sqrt_pi,
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        }
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.values
    }

    /// `V phi(L) V^T`, the symmetric version of `phi(M)`.
    pub fn symmetric_function(&self, phi: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let scaled = DMatrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |i, k| {
            self.vectors[(i, k)] * phi(self.values[k])
        });
        let s = scaled * self.vectors.transpose();
        (&s + s.transpose()) * 0.5
    }

    /// `phi(M)` in the original coordinates.
    pub fn function_matrix(&self, phi: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let s = self.symmetric_function(phi);
        DMatrix::from_fn(s.nrows(), s.ncols(), |i, j| s[(i, j)] * self.sqrt_pi[j] / self.sqrt_pi[i])
    }

    /// `phi(M) f` without forming the full matrix.
    pub fn apply_function(&self, f: &[f64], phi: impl Fn(f64) -> f64) -> Vec<f64> {
        let g = DVector::from_iterator(f.len(), f.iter().zip(&self.sqrt_pi).map(|(a, s)| a * s));
        let mut coeffs = self.vectors.transpose() * g;
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c *= phi(self.values[k]);
        }
        let h = &self.vectors * coeffs;
        h.iter().zip(&self.sqrt_pi).map(|(a, s)| a / s).collect()
    }

    /// Coefficients of `D^{1/2} f` in the eigenbasis.
    pub fn coefficients(&self, f: &[f64]) -> Vec<f64> {
        let g = DVector::from_iterator(f.len(), f.iter().zip(&self.sqrt_pi).map(|(a, s)| a * s));
        (self.vectors.transpose() * g).iter().copied().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Gaps {
    Kernel { gap: f64, absolute_gap: f64 },
    Generator { gap: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Sorted in decreasing order.
    pub eigenvalues: Vec<f64>,
    pub gaps: Gaps,
}

impl SpectrumReport {
    /// `g` for kernels, `delta` for generators.
    pub fn gap(&self) -> f64 {
        match self.gaps {
            Gaps::Kernel { gap, .. } | Gaps::Generator { gap } => gap,
        }
    }

    /// `g_*` for kernels; for generators the gap itself.
    pub fn absolute_gap(&self) -> f64 {
        match self.gaps {
            Gaps::Kernel { absolute_gap, .. } => absolute_gap,
            Gaps::Generator { gap } => gap,
        }
    }
}

fn sorted_desc(values: &DVector<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Spectrum, gap `g = 1 - l2` and absolute gap `g_* = 1 - max(|l2|, |lN|)`.
///
/// A one-state chain is treated as an iid chain (`l2 = 0`).
pub fn spectrum(chain: &ReversibleChain) -> Result<SpectrumReport> {
    let form = SymmetricForm::new(&chain.kernel().to_dense(), chain.pi());
    let eigenvalues: Vec<f64> = sorted_desc(form.eigenvalues())
        .into_iter()
        .map(|l| l.clamp(-1.0, 1.0))
        .collect();
    let (gap, absolute_gap) = match eigenvalues.len() {
        0 | 1 => (1.0, 1.0),
        n => {
            let l2 = eigenvalues[1];
            let ln = eigenvalues[n - 1];
            (1.0 - l2, 1.0 - l2.abs().max(ln.abs()))
        }
    };
    Ok(SpectrumReport {
        eigenvalues,
        gaps: Gaps::Kernel { gap, absolute_gap },
    })
}

/// Generator spectrum (all eigenvalues `<= 0`) and `delta = -mu_2`.
pub fn generator_spectrum(generator: &GeneratorChain) -> SpectrumReport {
    let eigenvalues: Vec<f64> = sorted_desc(generator.decomposition().eigenvalues())
        .into_iter()
        .map(|m| m.min(0.0))
        .collect();
    let gap = if eigenvalues.len() < 2 { f64::INFINITY } else { -eigenvalues[1] };
    SpectrumReport {
        eigenvalues,
        gaps: Gaps::Generator { gap },
    }
}

/// `exp(tQ)`.
pub fn heat_operator(generator: &GeneratorChain, t: f64) -> Result<DMatrix<f64>> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    Ok(generator.decomposition().function_matrix(|mu| (t * mu).exp()))
}

fn centered(event: &EventSet) -> Vec<f64> {
    let p = event.mass();
    event.indicator().into_iter().map(|f| f - p).collect()
}

/// `P[X_0, X_t in C] - p^2 = (f, T_t f) - (E f)^2`.
pub fn pairwise_correlation<M: MarkovOperator>(chain: &M, event: &EventSet, t: M::Time) -> Result<f64> {
    let g = centered(event);
    let tg = chain.propagate(&g, t)?;
    Ok(chain
        .stationary()
        .iter()
        .zip(g.iter().zip(&tg))
        .map(|(p, (a, b))| p * a * b)
        .sum())
}

/// `Var[T_t f]` for `f = 1_C`.
pub fn variance_decay<M: MarkovOperator>(chain: &M, event: &EventSet, t: M::Time) -> Result<f64> {
    let g = centered(event);
    let tg = chain.propagate(&g, t)?;
    Ok(chain.stationary().iter().zip(&tg).map(|(p, v)| p * v * v).sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    /// Only at sampled grid times.
    ExactAtIntegers,
    /// Value at the largest grid time not exceeding the argument.
    Envelope,
    /// Exact evaluation of an analytic or spectral form.
    Continuous,
}

impl std::str::FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-at-integers" | "exact" => Ok(EvalMode::ExactAtIntegers),
            "nonincreasing-envelope" | "envelope" => Ok(EvalMode::Envelope),
            "continuous" => Ok(EvalMode::Continuous),
            other => Err(Error::InvalidParameter(format!("unknown mode {other}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeDomain {
    Discrete,
    Continuous,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum DecayForm {
    Sampled,
    /// `sum_i w_i exp(-r_i x)`
    Spectral { weights: Vec<f64>, rates: Vec<f64> },
    /// `c x^{-alpha}`
    Polynomial { constant: f64, alpha: f64 },
    /// `c exp(-rate x^alpha)`
    StretchedExponential { constant: f64, rate: f64, alpha: f64 },
}

impl DecayForm {
    /// Capped at 1, which every normalized variance ratio respects.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let v = match self {
            DecayForm::Sampled => return None,
            DecayForm::Spectral { weights, rates } => {
                weights.iter().zip(rates).map(|(w, r)| w * (-r * x).exp()).sum()
            }
            DecayForm::Polynomial { constant, alpha } => {
                if x <= 0.0 {
                    1.0
                } else {
                    constant * x.powf(-alpha)
                }
            }
            DecayForm::StretchedExponential { constant, rate, alpha } => {
                constant * (-rate * x.max(0.0).powf(*alpha)).exp()
            }
        };
        Some(v.clamp(0.0, 1.0))
    }
}

/// Sampled or analytic `d(t)` with `Var[T_s f] <= d(2s) Var[f]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecorrelationCurve {
    pub p: f64,
    pub domain: TimeDomain,
    pub mode: EvalMode,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub form: DecayForm,
}

const MONOTONE_SLACK: f64 = 1e-12;

impl DecorrelationCurve {
    pub fn from_samples(
        p: f64,
        times: Vec<f64>,
        values: Vec<f64>,
        domain: TimeDomain,
        mode: EvalMode,
    ) -> Result<Self> {
        if times.len() != values.len() || times.is_empty() {
            return Err(Error::InvalidParameter("curve needs matching, nonempty times and values".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::UnsortedTimes);
        }
        if mode == EvalMode::Continuous {
            return Err(Error::InvalidParameter("continuous mode needs an analytic form".into()));
        }
        let curve = DecorrelationCurve {
            p,
            domain,
            mode,
            times,
            values,
            form: DecayForm::Sampled,
        };
        if mode == EvalMode::Envelope {
            curve.check_monotone()?;
        }
        Ok(curve)
    }

    pub fn analytic(p: f64, form: DecayForm) -> Self {
        DecorrelationCurve {
            p,
            domain: TimeDomain::Continuous,
            mode: EvalMode::Continuous,
            times: Vec::new(),
            values: Vec::new(),
            form,
        }
    }

    pub fn check_monotone(&self) -> Result<()> {
        for (w, t) in self.values.windows(2).zip(&self.times[1..]) {
            if w[1] > w[0] + MONOTONE_SLACK {
                return Err(Error::NonMonotoneCurve { at: *t });
            }
        }
        Ok(())
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.check_monotone().is_ok()
    }

    /// `d(x)` under the curve's evaluation mode; `None` when the mode has no
    /// value at `x` (an off-grid point in exact mode).
    pub fn eval(&self, x: f64) -> Option<f64> {
        if x < 0.0 {
            return None;
        }
        match self.mode {
            EvalMode::Continuous => self.form.eval(x),
            EvalMode::ExactAtIntegers => {
                let tol = 1e-9 * x.max(1.0);
                let k = self.times.partition_point(|&t| t < x - tol);
                (k < self.times.len() && (self.times[k] - x).abs() <= tol).then(|| self.values[k])
            }
            EvalMode::Envelope => {
                let tol = 1e-9 * x.max(1.0);
                let k = self.times.partition_point(|&t| t <= x + tol);
                (k > 0).then(|| self.values[k - 1])
            }
        }
    }

    /// `t,d` rows with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,d\n");
        for (t, d) in self.times.iter().zip(&self.values) {
            let _ = writeln!(out, "{t:.16e},{d:.16e}");
        }
        out
    }
}

fn event_variance(event: &EventSet) -> Result<f64> {
    let p = event.mass();
    let var = p * (1.0 - p);
    if var <= 0.0 {
        return Err(Error::DegenerateEvent(p));
    }
    Ok(var)
}

/// Exact curve of a discrete chain on the even integers `0, 2, ..., t_max`,
/// `d(2s) = Var[K^s f] / Var[f]`.
pub fn decorrelation_curve(
    chain: &ReversibleChain,
    event: &EventSet,
    t_max: u64,
    mode: EvalMode,
) -> Result<DecorrelationCurve> {
    let var = event_variance(event)?;
    let pi = chain.pi();
    let mut g = centered(event);
    let mut next = vec![0.0; g.len()];
    let mut times = Vec::new();
    let mut values = Vec::new();
    for s in 0..=t_max / 2 {
        if s > 0 {
            chain.kernel().apply_into(&g, &mut next);
            std::mem::swap(&mut g, &mut next);
        }
        let v: f64 = pi.iter().zip(&g).map(|(p, x)| p * x * x).sum();
        times.push(2.0 * s as f64);
        values.push((v / var).clamp(0.0, 1.0));
    }
    DecorrelationCurve::from_samples(event.mass(), times, values, TimeDomain::Discrete, mode)
}

/// Exact curve of a generator sampled at `times`; carries its spectral form
/// so that `Continuous` mode evaluates anywhere.
pub fn generator_decorrelation_curve(
    generator: &GeneratorChain,
    event: &EventSet,
    times: &[f64],
    mode: EvalMode,
) -> Result<DecorrelationCurve> {
    let var = event_variance(event)?;
    let form = generator.decomposition();
    let coeffs = form.coefficients(&centered(event));
    let (weights, rates): (Vec<f64>, Vec<f64>) = coeffs
        .iter()
        .zip(form.eigenvalues().iter())
        .filter(|(c, _)| c.abs() > 1e-15)
        .map(|(c, mu)| (c * c / var, (-mu).max(0.0)))
        .unzip();
    let spectral = DecayForm::Spectral { weights, rates };
    let values: Vec<f64> = times
        .iter()
        .map(|&t| spectral.eval(t).expect("spectral form evaluates"))
        .collect();
    let mut curve = DecorrelationCurve {
        p: event.mass(),
        domain: TimeDomain::Continuous,
        mode,
        times: times.to_vec(),
        values,
        form: spectral,
    };
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::UnsortedTimes);
    }
    if mode == EvalMode::Envelope {
        curve.check_monotone()?;
    }
    if mode == EvalMode::ExactAtIntegers && times.is_empty() {
        curve.mode = EvalMode::Continuous;
    }
    Ok(curve)
}

/// Operator norm of `P_1 P_2` for the single-time events
/// `{X_s in C1}` and `{X_{s+t} in C2}`: the top singular value of the
/// restriction of `exp(tQ)` to rows `C1` and columns `C2` in `L^2(pi)`.
pub fn projection_product_norm(
    generator: &GeneratorChain,
    c1: &EventSet,
    c2: &EventSet,
    t: f64,
) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let rows = c1.states();
    let cols = c2.states();
    if rows.is_empty() || cols.is_empty() {
        return Ok(0.0);
    }
    let s = generator.decomposition().symmetric_function(|mu| (t * mu).exp());
    let sub = DMatrix::from_fn(rows.len(), cols.len(), |a, b| s[(rows[a], cols[b])]);
    let sv = sub.singular_values();
    Ok(sv.iter().copied().fold(0.0, f64::max))
}

/// Right-hand side of the projection-product bound,
/// `sqrt(p1 p2) + exp(-delta t)(1 - sqrt(p1 p2))`.
pub fn projection_product_bound(p1: f64, p2: f64, delta: f64, t: f64) -> f64 {
    let r = (p1 * p2).sqrt();
    r + (-delta * t).exp() * (1.0 - r)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EasyFact {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Checks `E[g1 M g2] <= E g1 E g2 + (1 - delta)(1 - |E g1 E g2|)` with
/// `delta` the absolute spectral gap of `M`.
pub fn easyfact_check(chain: &ReversibleChain, g1: &[f64], g2: &[f64]) -> Result<EasyFact> {
    let pi = chain.pi();
    for g in [g1, g2] {
        if g.len() != pi.len() {
            return Err(Error::Dimension { expected: pi.len(), got: g.len() });
        }
        let norm = pi.iter().zip(g).map(|(p, x)| p * x * x).sum::<f64>().sqrt();
        if norm > 1.0 + 1e-12 {
            return Err(Error::NormPrecondition { norm });
        }
    }
    let delta = spectrum(chain)?.absolute_gap();
    let mg2 = chain.kernel().apply(g2);
    let lhs: f64 = pi.iter().zip(g1.iter().zip(&mg2)).map(|(p, (a, b))| p * a * b).sum();
    let e1: f64 = pi.iter().zip(g1).map(|(p, x)| p * x).sum();
    let e2: f64 = pi.iter().zip(g2).map(|(p, x)| p * x).sum();
    let rhs = e1 * e2 + (1.0 - delta) * (1.0 - (e1 * e2).abs());
    Ok(EasyFact { lhs, rhs, holds: lhs <= rhs + 1e-12 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_state() -> ReversibleChain {
        ReversibleChain::from_rows(&[vec![0.75, 0.25], vec![0.25, 0.75]], None).unwrap()
    }

    #[test]
    fn swap_chain_spectrum() {
        let c = ReversibleChain::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]], None).unwrap();
        let s = spectrum(&c).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.eigenvalues[1], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.gap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.absolute_gap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_spectrum() {
        let c = ReversibleChain::from_rows(
            &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            Some(vec![0.2, 0.3, 0.5]),
        )
        .unwrap();
        let s = spectrum(&c).unwrap();
        assert!(s.eigenvalues.iter().all(|l| (l - 1.0).abs() < 1e-12));
        assert_abs_diff_eq!(s.gap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.absolute_gap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn two_state_spectrum() {
        let s = spectrum(&two_state()).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.gap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.absolute_gap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn heat_operator_spectral_mapping() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = ensemble::random_generator(&mut rng, 6, 0.7);
        let t = 0.37;
        let spec = generator_spectrum(&g);
        let h = heat_operator(&g, t).unwrap();
        for i in 0..6 {
            assert_abs_diff_eq!(h.row(i).sum(), 1.0, epsilon = 1e-9);
        }
        let chain = crate::chain::embed_discrete(&g, t).unwrap();
        let hs = spectrum(&chain).unwrap();
        for (mu, l) in spec.eigenvalues.iter().zip(&hs.eigenvalues) {
            assert_abs_diff_eq!((t * mu).exp(), *l, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(hs.absolute_gap(), 1.0 - (-spec.gap() * t).exp(), epsilon = 1e-9);
        let id = heat_operator(&g, 0.0).unwrap();
        assert_abs_diff_eq!((id - DMatrix::identity(6, 6)).abs().max(), 0.0, epsilon = 1e-12);
        assert!(heat_operator(&g, -0.1).is_err());
    }

    #[test]
    fn correlation_examples() {
        let c = two_state();
        let ev = c.event_from_states(&[1]).unwrap();
        assert_abs_diff_eq!(pairwise_correlation(&c, &ev, 0).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(pairwise_correlation(&c, &ev, 1).unwrap(), 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(variance_decay(&c, &ev, 0).unwrap(), 0.25, epsilon = 1e-15);

        let iid = ReversibleChain::from_rows(&[vec![0.3, 0.7], vec![0.3, 0.7]], None).unwrap();
        let ev = iid.event_from_states(&[0]).unwrap();
        assert_abs_diff_eq!(pairwise_correlation(&iid, &ev, 3).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(variance_decay(&iid, &ev, 1).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn two_state_curve_halves() {
        let c = two_state();
        let ev = c.event_from_states(&[1]).unwrap();
        let d = decorrelation_curve(&c, &ev, 20, EvalMode::Envelope).unwrap();
        for (t, v) in d.times.iter().zip(&d.values) {
            assert_abs_diff_eq!(*v, 2f64.powf(-t), epsilon = 1e-14);
        }
        assert_eq!(d.eval(0.0), Some(1.0));
        assert_eq!(d.eval(3.0), Some(0.25));
        let exact = decorrelation_curve(&c, &ev, 20, EvalMode::ExactAtIntegers).unwrap();
        assert_eq!(exact.eval(3.0), None);
        assert_abs_diff_eq!(exact.eval(4.0).unwrap(), 1.0 / 16.0, epsilon = 1e-14);
        let full = c.event(vec![true, true]).unwrap();
        assert!(matches!(decorrelation_curve(&c, &full, 4, EvalMode::Envelope), Err(Error::DegenerateEvent(_))));
    }

    #[test]
    fn curve_csv_has_full_precision() {
        let c = two_state();
        let ev = c.event_from_states(&[1]).unwrap();
        let d = decorrelation_curve(&c, &ev, 2, EvalMode::Envelope).unwrap();
        let csv = d.to_csv();
        assert!(csv.starts_with("t,d\n"));
        let row: Vec<f64> = csv.lines().nth(2).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(row, vec![2.0, 0.25]);
    }

    #[test]
    fn non_monotone_samples_rejected_in_envelope_mode() {
        let r = DecorrelationCurve::from_samples(
            0.5,
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.2, 0.3],
            TimeDomain::Continuous,
            EvalMode::Envelope,
        );
        assert!(matches!(r, Err(Error::NonMonotoneCurve { .. })));
    }

    #[test]
    fn projection_norm_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = ensemble::random_generator(&mut rng, 5, 1.0);
        let full = EventSet::full(g.pi());
        assert_abs_diff_eq!(projection_product_norm(&g, &full, &full, 0.3).unwrap(), 1.0, epsilon = 1e-9);
        let c1 = g.event_from_states(&[0, 2]).unwrap();
        let c2 = g.event_from_states(&[1, 2, 4]).unwrap();
        let far = projection_product_norm(&g, &c1, &c2, 200.0).unwrap();
        assert_abs_diff_eq!(far, (c1.mass() * c2.mass()).sqrt(), epsilon = 1e-6);
        assert!(projection_product_norm(&g, &c1, &c2, -1.0).is_err());
    }

    #[test]
    fn easyfact_examples() {
        let c = two_state();
        let one = vec![1.0, 1.0];
        let r = easyfact_check(&c, &one, &one).unwrap();
        assert!(r.holds);
        assert_abs_diff_eq!(r.lhs, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.rhs, 1.0, epsilon = 1e-15);
        let h = vec![1.0, -1.0];
        assert!(easyfact_check(&c, &h, &h).unwrap().holds);
        assert!(matches!(easyfact_check(&c, &[2.0, 0.0], &one), Err(Error::NormPrecondition { .. })));
    }
}
