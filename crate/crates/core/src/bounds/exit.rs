//! Exact probabilities of never leaving a static event.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chain::{EventSet, GeneratorChain, ReversibleChain};
use crate::error::{Error, Result};
use crate::spectral::SymmetricForm;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExitTail {
    pub probability: f64,
    /// The event had no states, so the tail is identically 0.
    pub empty_event: bool,
}

/// `P[X_s in C for all s in [0, t]]` for a discrete chain run from
/// stationarity: `sum_{i in C} pi_i ((K_CC)^t 1)_i`.
pub fn exit_tail_exact(chain: &ReversibleChain, event: &EventSet, t: u64) -> Result<ExitTail> {
    let series = tail_series(chain, event, &[t], false)?;
    Ok(ExitTail { probability: series.values[0], empty_event: event.is_empty() })
}

/// `P[X_s in C for all s in [0, t]]` for a generator: `pi_C exp(t Q_CC) 1`.
pub fn exit_tail_exact_continuous(generator: &GeneratorChain, event: &EventSet, t: f64) -> Result<ExitTail> {
    if event.len() != generator.n() {
        return Err(Error::Dimension { expected: generator.n(), got: event.len() });
    }
    let probability = ContinuousTail::new(generator, event).eval(t)?;
    Ok(ExitTail { probability, empty_event: event.is_empty() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailSeries {
    pub times: Vec<u64>,
    pub values: Vec<f64>,
    /// Set when the iteration stopped because the tail fell below `1e-300`;
    /// `times` then holds only the points reached.
    pub underflow: bool,
}

pub const UNDERFLOW: f64 = 1e-300;

/// Tail on a sorted grid of integer times by repeated substochastic steps.
pub fn exit_tail_on_grid(chain: &ReversibleChain, event: &EventSet, grid: &[u64]) -> Result<TailSeries> {
    tail_series(chain, event, grid, true)
}

fn tail_series(chain: &ReversibleChain, event: &EventSet, grid: &[u64], stop_on_underflow: bool) -> Result<TailSeries> {
    if event.len() != chain.n() {
        return Err(Error::Dimension { expected: chain.n(), got: event.len() });
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::UnsortedTimes);
    }
    let pi = chain.pi();
    let mask = event.mask();
    let mut u = event.indicator();
    let mut next = vec![0.0; u.len()];
    let mut step = 0u64;
    let mut out = TailSeries { times: Vec::new(), values: Vec::new(), underflow: false };
    for &t in grid {
        while step < t {
            chain.kernel().apply_into(&u, &mut next);
            for (x, &m) in next.iter_mut().zip(mask) {
                if !m {
                    *x = 0.0;
                }
            }
            std::mem::swap(&mut u, &mut next);
            step += 1;
        }
        let value: f64 = pi.iter().zip(&u).zip(mask).filter(|(_, &m)| m).map(|((p, x), _)| p * x).sum();
        if event.is_empty() {
            out.times.push(t);
            out.values.push(0.0);
            continue;
        }
        if stop_on_underflow && value < UNDERFLOW {
            out.underflow = true;
            break;
        }
        out.times.push(t);
        out.values.push(value);
    }
    Ok(out)
}

/// Restricted symmetric eigendecomposition reused across many times.
pub struct ContinuousTail {
    weights: Vec<f64>,
    rates: Vec<f64>,
}

impl ContinuousTail {
    pub fn new(generator: &GeneratorChain, event: &EventSet) -> Self {
        let states = event.states();
        if states.is_empty() {
            return ContinuousTail { weights: Vec::new(), rates: Vec::new() };
        }
        let q = generator.q();
        let pi: Vec<f64> = states.iter().map(|&i| generator.pi()[i]).collect();
        let sub = DMatrix::from_fn(states.len(), states.len(), |a, b| q[(states[a], states[b])]);
        let form = SymmetricForm::new(&sub, &pi);
        // pi_C exp(tQ) 1 = sum_k (sqrt(pi) . v_k)^2 e^{t mu_k}
        let coeffs = form.coefficients(&vec![1.0; states.len()]);
        let weights = coeffs.iter().map(|c| c * c).collect();
        let rates = form.eigenvalues().iter().map(|mu| -mu.min(0.0)).collect();
        ContinuousTail { weights, rates }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        Ok(self
            .weights
            .iter()
            .zip(&self.rates)
            .map(|(w, r)| w * (-r * t).exp())
            .sum::<f64>()
            .clamp(0.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::embed_discrete;
    use crate::ensemble;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_state() -> ReversibleChain {
        ReversibleChain::from_rows(&[vec![0.75, 0.25], vec![0.25, 0.75]], None).unwrap()
    }

    #[test]
    fn full_space_never_exits() {
        let c = two_state();
        let full = EventSet::full(c.pi());
        for t in [0, 1, 7, 100] {
            assert_abs_diff_eq!(exit_tail_exact(&c, &full, t).unwrap().probability, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_state_substochastic_power() {
        let c = two_state();
        let ev = c.event_from_states(&[1]).unwrap();
        assert_abs_diff_eq!(exit_tail_exact(&c, &ev, 2).unwrap().probability, 0.28125, epsilon = 1e-15);
        assert_abs_diff_eq!(exit_tail_exact(&c, &ev, 0).unwrap().probability, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn event_without_internal_moves_exits_at_once() {
        let c = ReversibleChain::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]], None).unwrap();
        let ev = c.event_from_states(&[0]).unwrap();
        assert_eq!(exit_tail_exact(&c, &ev, 4).unwrap().probability, 0.0);
        let series = exit_tail_on_grid(&c, &ev, &[0, 1, 2]).unwrap();
        assert!(series.underflow);
        assert_eq!(series.times, vec![0]);
    }

    #[test]
    fn empty_event_is_flagged() {
        let c = two_state();
        let ev = c.event(vec![false, false]).unwrap();
        let r = exit_tail_exact(&c, &ev, 3).unwrap();
        assert_eq!(r.probability, 0.0);
        assert!(r.empty_event);
    }

    #[test]
    fn continuous_two_state() {
        let g = GeneratorChain::from_rows(&[vec![-1.0, 1.0], vec![1.0, -1.0]], None).unwrap();
        let ev = g.event_from_states(&[0]).unwrap();
        let r = exit_tail_exact_continuous(&g, &ev, 2.0).unwrap();
        assert_abs_diff_eq!(r.probability, 0.5 * (-2.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn continuous_tail_below_skeleton_tail() {
        // never leaving in continuous time implies never leaving at the skeleton times
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = ensemble::random_generator(&mut rng, 7, 0.6);
        let ev = ensemble::random_event(&mut rng, g.pi(), 0.2, 0.8).unwrap();
        let h = 0.25;
        let skeleton = embed_discrete(&g, h).unwrap();
        for k in 0..12u64 {
            let cont = exit_tail_exact_continuous(&g, &ev, k as f64 * h).unwrap().probability;
            let disc = exit_tail_exact(&skeleton, &ev, k).unwrap().probability;
            assert!(cont <= disc + 1e-12);
        }
    }

    #[test]
    fn grid_matches_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = ensemble::random_chain(&mut rng, 8, 0.5);
        let ev = ensemble::random_event(&mut rng, c.pi(), 0.1, 0.9).unwrap();
        let s = exit_tail_on_grid(&c, &ev, &[0, 3, 3, 10]).unwrap();
        for (t, v) in s.times.iter().zip(&s.values) {
            assert_eq!(*v, exit_tail_exact(&c, &ev, *t).unwrap().probability);
        }
        assert!(exit_tail_on_grid(&c, &ev, &[4, 2]).is_err());
    }
}
