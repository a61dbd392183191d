//! Product bound for events on separated time windows of a reversible
//! generator with spectral gap `delta`, with exact and Monte Carlo joint
//! probabilities to test it against.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::bounds::exit::ContinuousTail;
use crate::chain::{EventSet, GeneratorChain};
use crate::error::{Error, Result};
use crate::replica::run_replicas;
use crate::spectral::{generator_spectrum, heat_operator};
use crate::stats::Estimate;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductBound {
    pub value: f64,
    /// `sqrt(p_i p_{i+1}) + exp(-delta gap_i)(1 - sqrt(p_i p_{i+1}))`
    pub factors: Vec<f64>,
}

fn check_inputs(probs: &[f64], delta: f64, gaps: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidParameter("at least one event is required".into()));
    }
    if gaps.len() + 1 != probs.len() {
        return Err(Error::Dimension { expected: probs.len() - 1, got: gaps.len() });
    }
    if !(delta >= 0.0) {
        return Err(Error::InvalidParameter(format!("gap delta must be nonnegative, got {delta}")));
    }
    if let Some(&p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::ProbabilityRange(p));
    }
    if let Some(&g) = gaps.iter().find(|g| !(**g >= 0.0)) {
        return Err(Error::NegativeGap(g));
    }
    Ok(())
}

/// `sqrt(p_0) sqrt(p_k) prod_i [sqrt(p_i p_{i+1}) + e^{-delta gap_i}(1 - sqrt(p_i p_{i+1}))]`.
pub fn aksz_bound(probs: &[f64], delta: f64, gaps: &[f64]) -> Result<ProductBound> {
    check_inputs(probs, delta, gaps)?;
    let factors: Vec<f64> = probs
        .windows(2)
        .zip(gaps)
        .map(|(w, g)| {
            let r = (w[0] * w[1]).sqrt();
            r + (-delta * g).exp() * (1.0 - r)
        })
        .collect();
    let k = probs.len() - 1;
    let value = (probs[0] * probs[k]).sqrt() * factors.iter().product::<f64>();
    Ok(ProductBound { value, factors })
}

/// Equal-event form `p prod_i (p + e^{-delta t_i}(1 - p))`.
pub fn aksz_equal_bound(p: f64, delta: f64, gaps: &[f64]) -> Result<f64> {
    let probs = vec![p; gaps.len() + 1];
    check_inputs(&probs, delta, gaps)?;
    Ok(p * gaps.iter().map(|g| p + (-delta * g).exp() * (1.0 - p)).product::<f64>())
}

/// `P[X_{s_i} in C_i for all i] = pi D_{C_0} e^{(s_1 - s_0)Q} D_{C_1} ... 1`.
pub fn aksz_joint_exact(generator: &GeneratorChain, events: &[(EventSet, f64)]) -> Result<f64> {
    if events.windows(2).any(|w| w[1].1 <= w[0].1) {
        return Err(Error::UnsortedTimes);
    }
    let n = generator.n();
    let Some((first, rest)) = events.split_first() else {
        return Ok(1.0);
    };
    let mut mu: Vec<f64> = generator.pi().iter().zip(first.0.mask()).map(|(p, &m)| if m { *p } else { 0.0 }).collect();
    let mut last = first.1;
    for (set, s) in rest {
        let h = heat_operator(generator, s - last)?;
        mu = (0..n).map(|j| if set.contains(j) { (0..n).map(|i| mu[i] * h[(i, j)]).sum() } else { 0.0 }).collect();
        last = *s;
    }
    Ok(mu.iter().sum::<f64>().clamp(0.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowKind {
    /// The path stays in the set throughout the window.
    Continual,
    /// The path is in the set at `points` equally spaced times from start to end.
    Sampled { points: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindowEvent {
    pub set: EventSet,
    pub start: f64,
    pub end: f64,
    pub kind: WindowKind,
}

impl WindowEvent {
    fn sample_times(&self) -> Vec<f64> {
        match self.kind {
            WindowKind::Continual => vec![self.start],
            WindowKind::Sampled { points } => {
                if points <= 1 || self.end == self.start {
                    return vec![self.start];
                }
                let h = (self.end - self.start) / (points - 1) as f64;
                (0..points).map(|j| self.start + j as f64 * h).collect()
            }
        }
    }
}

fn validate_windows(generator: &GeneratorChain, windows: &[WindowEvent]) -> Result<()> {
    if windows.is_empty() {
        return Err(Error::InvalidParameter("at least one window is required".into()));
    }
    for w in windows {
        if w.set.len() != generator.n() {
            return Err(Error::Dimension { expected: generator.n(), got: w.set.len() });
        }
        if !(w.end >= w.start) {
            return Err(Error::UnsortedTimes);
        }
        if let WindowKind::Sampled { points: 0 } = w.kind {
            return Err(Error::InvalidParameter("sampled window needs at least one point".into()));
        }
    }
    if windows.windows(2).any(|p| p[1].start < p[0].end) {
        return Err(Error::UnsortedTimes);
    }
    Ok(())
}

/// Row vector `mu` pushed through the window: the restricted semigroup for
/// continual windows, masked heat steps for sampled ones.
fn push_through(generator: &GeneratorChain, w: &WindowEvent, mu: &[f64]) -> Result<Vec<f64>> {
    let n = generator.n();
    let mask = |v: Vec<f64>| -> Vec<f64> { v.into_iter().enumerate().map(|(i, x)| if w.set.contains(i) { x } else { 0.0 }).collect() };
    let left = |v: &[f64], h: &nalgebra::DMatrix<f64>| -> Vec<f64> { (0..n).map(|j| (0..n).map(|i| v[i] * h[(i, j)]).sum()).collect() };
    match w.kind {
        WindowKind::Continual => {
            let states = w.set.states();
            let mut out = vec![0.0; n];
            if states.is_empty() {
                return Ok(out);
            }
            let q = generator.q();
            let pi: Vec<f64> = states.iter().map(|&i| generator.pi()[i]).collect();
            let sub = nalgebra::DMatrix::from_fn(states.len(), states.len(), |a, b| q[(states[a], states[b])]);
            let form = crate::spectral::SymmetricForm::new(&sub, &pi);
            let h = form.function_matrix(|m| ((w.end - w.start) * m).exp());
            for (b, &j) in states.iter().enumerate() {
                out[j] = states.iter().enumerate().map(|(a, &i)| mu[i] * h[(a, b)]).sum();
            }
            Ok(out)
        }
        WindowKind::Sampled { .. } => {
            let times = w.sample_times();
            let mut v = mask(mu.to_vec());
            for pair in times.windows(2) {
                v = mask(left(&v, &heat_operator(generator, pair[1] - pair[0])?));
            }
            Ok(v)
        }
    }
}

/// Exact joint probability of window events, used as an oracle for the
/// Monte Carlo estimate.
pub fn window_joint_exact(generator: &GeneratorChain, windows: &[WindowEvent]) -> Result<f64> {
    validate_windows(generator, windows)?;
    let n = generator.n();
    let mut mu = generator.pi().to_vec();
    let mut clock = windows[0].start;
    for w in windows {
        if w.start > clock {
            let h = heat_operator(generator, w.start - clock)?;
            mu = (0..n).map(|j| (0..n).map(|i| mu[i] * h[(i, j)]).sum()).collect();
        }
        mu = push_through(generator, w, &mu)?;
        clock = w.end;
    }
    Ok(mu.iter().sum::<f64>().clamp(0.0, 1.0))
}

/// Exact `P[A]` for a single window started from stationarity.
pub fn window_marginal(generator: &GeneratorChain, window: &WindowEvent) -> Result<f64> {
    match window.kind {
        WindowKind::Continual => ContinuousTail::new(generator, &window.set).eval(window.end - window.start),
        WindowKind::Sampled { .. } => window_joint_exact(generator, std::slice::from_ref(window)),
    }
}

struct Jumps {
    rates: Vec<f64>,
    targets: Vec<Vec<(usize, f64)>>,
}

impl Jumps {
    fn new(generator: &GeneratorChain) -> Self {
        let q = generator.q();
        let n = generator.n();
        let mut rates = vec![0.0; n];
        let mut targets = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if i != j && q[(i, j)] > 0.0 {
                    rates[i] += q[(i, j)];
                    targets[i].push((j, q[(i, j)]));
                }
            }
        }
        Jumps { rates, targets }
    }

    /// Runs the chain from `x` for `duration`; returns the final state, or
    /// `None` if `stay` is given and the path leaves it.
    fn advance<R: Rng>(&self, mut x: usize, duration: f64, stay: Option<&EventSet>, rng: &mut R) -> Option<usize> {
        let mut left = duration;
        loop {
            let rate = self.rates[x];
            if rate <= 0.0 {
                return Some(x);
            }
            let wait = Exp::new(rate).expect("positive rate").sample(rng);
            if wait >= left {
                return Some(x);
            }
            left -= wait;
            let mut u = rng.random::<f64>() * rate;
            let mut next = self.targets[x].last().expect("positive rate has a target").0;
            for &(j, q) in &self.targets[x] {
                if u < q {
                    next = j;
                    break;
                }
                u -= q;
            }
            x = next;
            if stay.is_some_and(|s| !s.contains(x)) {
                return None;
            }
        }
    }
}

fn sample_stationary<R: Rng>(pi: &[f64], rng: &mut R) -> usize {
    let mut u = rng.random::<f64>();
    for (i, p) in pi.iter().enumerate() {
        if u < *p {
            return i;
        }
        u -= p;
    }
    pi.len() - 1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalMc {
    pub estimate: Estimate,
    pub marginals: Vec<f64>,
    pub gaps: Vec<f64>,
    pub delta: f64,
    pub bound: f64,
    /// `estimate - 3 sigma <= bound`
    pub consistent: bool,
}

/// Monte Carlo joint probability of window events by exact jump-chain
/// simulation, compared with the product bound built from exact marginals.
pub fn aksz_interval_mc(generator: &GeneratorChain, windows: &[WindowEvent], replicas: usize, seed: u64) -> Result<IntervalMc> {
    if replicas == 0 {
        return Err(Error::NoReplicas);
    }
    validate_windows(generator, windows)?;
    let jumps = Jumps::new(generator);
    let pi = generator.pi();
    let hits = run_replicas(seed, replicas, |_, rng| {
        let mut x = sample_stationary(pi, rng);
        let mut clock = windows[0].start;
        for w in windows {
            match jumps.advance(x, w.start - clock, None, rng) {
                Some(y) => x = y,
                None => return false,
            }
            if !w.set.contains(x) {
                return false;
            }
            match w.kind {
                WindowKind::Continual => match jumps.advance(x, w.end - w.start, Some(&w.set), rng) {
                    Some(y) => x = y,
                    None => return false,
                },
                WindowKind::Sampled { .. } => {
                    for pair in w.sample_times().windows(2) {
                        x = jumps.advance(x, pair[1] - pair[0], None, rng).expect("unconstrained run");
                        if !w.set.contains(x) {
                            return false;
                        }
                    }
                    let last = *w.sample_times().last().expect("nonempty");
                    x = jumps.advance(x, w.end - last, None, rng).expect("unconstrained run");
                }
            }
            clock = w.end;
        }
        true
    });
    let estimate = Estimate::from_flags(hits);
    let marginals = windows.iter().map(|w| window_marginal(generator, w)).collect::<Result<Vec<_>>>()?;
    let gaps: Vec<f64> = windows.windows(2).map(|p| p[1].start - p[0].end).collect();
    let delta = generator_spectrum(generator).gap();
    let bound = aksz_bound(&marginals, delta, &gaps)?.value;
    let consistent = estimate.mean - 3.0 * estimate.sigma <= bound;
    Ok(IntervalMc { estimate, marginals, gaps, delta, bound, consistent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bound_limits() {
        let p = 0.3;
        assert_abs_diff_eq!(aksz_bound(&[p, p], 1.0, &[0.0]).unwrap().value, p, epsilon = 1e-15);
        assert_abs_diff_eq!(aksz_bound(&[p, p], 1.0, &[1e9]).unwrap().value, p * p, epsilon = 1e-15);
        let gaps = [0.7; 5];
        let general = aksz_bound(&[p; 6], 2.0, &gaps).unwrap().value;
        let equal = aksz_equal_bound(p, 2.0, &gaps).unwrap();
        assert_abs_diff_eq!(general, equal, epsilon = 1e-15);
        assert_abs_diff_eq!(equal, p * (p + (-1.4f64).exp() * (1.0 - p)).powi(5), epsilon = 1e-15);
        assert!(matches!(aksz_bound(&[p, p], 1.0, &[-1.0]), Err(Error::NegativeGap(_))));
        assert!(aksz_bound(&[p, p], 1.0, &[]).is_err());
    }

    #[test]
    fn joint_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = ensemble::random_generator(&mut rng, 5, 0.5);
        let ev = g.event_from_states(&[1, 3]).unwrap();
        assert_abs_diff_eq!(aksz_joint_exact(&g, &[(ev.clone(), 0.0)]).unwrap(), ev.mass(), epsilon = 1e-15);
        let full = EventSet::full(g.pi());
        let all: Vec<_> = (0..4).map(|i| (full.clone(), i as f64)).collect();
        assert_abs_diff_eq!(aksz_joint_exact(&g, &all).unwrap(), 1.0, epsilon = 1e-12);
        assert!(aksz_joint_exact(&g, &[(ev.clone(), 1.0), (ev, 0.5)]).is_err());
    }

    #[test]
    fn zero_length_windows_reduce_to_single_times() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let g = ensemble::random_generator(&mut rng, 5, 0.5);
        let c1 = g.event_from_states(&[0, 1]).unwrap();
        let c2 = g.event_from_states(&[1, 2, 4]).unwrap();
        let windows = vec![
            WindowEvent { set: c1.clone(), start: 0.0, end: 0.0, kind: WindowKind::Continual },
            WindowEvent { set: c2.clone(), start: 0.4, end: 0.4, kind: WindowKind::Sampled { points: 1 } },
        ];
        let exact = aksz_joint_exact(&g, &[(c1, 0.0), (c2, 0.4)]).unwrap();
        assert_abs_diff_eq!(window_joint_exact(&g, &windows).unwrap(), exact, epsilon = 1e-12);
        let mc = aksz_interval_mc(&g, &windows, 20_000, 1).unwrap();
        assert!((mc.estimate.mean - exact).abs() <= 4.0 * mc.estimate.sigma);
    }

    #[test]
    fn continual_windows_match_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = ensemble::random_generator(&mut rng, 5, 0.6);
        let c = ensemble::random_event(&mut rng, g.pi(), 0.4, 0.8).unwrap();
        let windows: Vec<_> = (0..3)
            .map(|i| WindowEvent { set: c.clone(), start: i as f64, end: i as f64 + 0.3, kind: WindowKind::Continual })
            .collect();
        let exact = window_joint_exact(&g, &windows).unwrap();
        let mc = aksz_interval_mc(&g, &windows, 20_000, 2).unwrap();
        assert!((mc.estimate.mean - exact).abs() <= 4.0 * mc.estimate.sigma);
        assert!(exact <= mc.bound + 1e-12);
        assert!(mc.consistent);
        assert!(matches!(aksz_interval_mc(&g, &windows, 0, 2), Err(Error::NoReplicas)));
    }

    #[test]
    fn sampled_window_matches_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let g = ensemble::random_generator(&mut rng, 4, 0.6);
        let c = ensemble::random_event(&mut rng, g.pi(), 0.4, 0.8).unwrap();
        let windows = vec![
            WindowEvent { set: c.clone(), start: 0.0, end: 0.5, kind: WindowKind::Sampled { points: 3 } },
            WindowEvent { set: c.clone(), start: 1.5, end: 2.0, kind: WindowKind::Sampled { points: 2 } },
        ];
        let exact = window_joint_exact(&g, &windows).unwrap();
        let single = aksz_joint_exact(&g, &[(c.clone(), 0.0), (c.clone(), 0.25), (c.clone(), 0.5), (c.clone(), 1.5), (c, 2.0)]).unwrap();
        assert_abs_diff_eq!(exact, single, epsilon = 1e-12);
        let mc = aksz_interval_mc(&g, &windows, 20_000, 3).unwrap();
        assert!((mc.estimate.mean - exact).abs() <= 4.0 * mc.estimate.sigma);
    }

    #[test]
    fn far_windows_decouple() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g = ensemble::random_generator(&mut rng, 4, 0.8);
        let c = g.event_from_states(&[0, 2]).unwrap();
        let windows = vec![
            WindowEvent { set: c.clone(), start: 0.0, end: 0.2, kind: WindowKind::Continual },
            WindowEvent { set: c.clone(), start: 80.0, end: 80.2, kind: WindowKind::Continual },
        ];
        let m = window_marginal(&g, &windows[0]).unwrap();
        assert_abs_diff_eq!(window_joint_exact(&g, &windows).unwrap(), m * m, epsilon = 1e-9);
    }
}
