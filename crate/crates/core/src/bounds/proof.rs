//! Exact checks of the intermediate inequalities behind the exit-tail bound.
//!
//! With `h_s = K^s 1_C` and `lambda` in `(p, 1)`, the set
//! `A_s = {h_s < lambda}` collects the states from which `C` is unlikely
//! after `s` steps. Its complement is small once `K^s 1_C` has decorrelated.

use serde::{Deserialize, Serialize};

use crate::bounds::exit::exit_tail_exact;
use crate::chain::{EventSet, MarkovOperator, ReversibleChain};
use crate::error::{Error, Result};
use crate::spectral::variance_decay;

fn check_lambda(p: f64, lambda: f64) -> Result<()> {
    if lambda > p && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::LambdaRange { lambda, p })
    }
}

/// `A_s = {i : (K^s 1_C)(i) < lambda}`.
pub fn as_set(chain: &ReversibleChain, event: &EventSet, s: u64, lambda: f64) -> Result<EventSet> {
    check_lambda(event.mass(), lambda)?;
    let h = chain.propagate(&event.indicator(), s)?;
    chain.event(h.iter().map(|&x| x < lambda).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassCheck {
    pub s: u64,
    pub lambda: f64,
    /// `P[A_s^c]`
    pub mass: f64,
    /// `Var[K^s 1_C] / (lambda - p)^2`, i.e. `(p - p^2)/(lambda - p)^2 d(2s)`
    /// with the exact curve.
    pub bound: f64,
    pub holds: bool,
}

pub fn complement_mass_check(chain: &ReversibleChain, event: &EventSet, s: u64, lambda: f64) -> Result<MassCheck> {
    let a = as_set(chain, event, s, lambda)?;
    let mass = a.complement(chain.pi())?.mass();
    let p = event.mass();
    let bound = variance_decay(chain, event, s)? / ((lambda - p) * (lambda - p));
    Ok(MassCheck { s, lambda, mass, bound, holds: mass <= bound })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecursionCheck {
    pub tau: u64,
    pub lambda: f64,
    pub m: u32,
    /// `P[X_0 in A^c n C; X_{j tau} in A n C, 1 <= j <= m]`
    pub entry_path: f64,
    /// `lambda^{max(m-1, 0)} P[A^c]`
    pub entry_bound: f64,
    /// `P[X_{j tau} in A n C, 0 <= j <= m]`
    pub stay_path: f64,
    /// `lambda^m`
    pub stay_bound: f64,
    pub holds: bool,
}

/// Both path probabilities by alternating indicator masks and `K^tau`.
pub fn lambda_recursion_check(
    chain: &ReversibleChain,
    event: &EventSet,
    tau: u64,
    lambda: f64,
    m: u32,
) -> Result<RecursionCheck> {
    if tau == 0 {
        return Err(Error::InvalidParameter("tau must be at least 1".into()));
    }
    let a = as_set(chain, event, tau, lambda)?;
    let inside: Vec<f64> = (0..chain.n())
        .map(|i| if a.contains(i) && event.contains(i) { 1.0 } else { 0.0 })
        .collect();
    // u = (K^tau D_{A n C})^m 1
    let mut u = vec![1.0; chain.n()];
    for _ in 0..m {
        let masked: Vec<f64> = u.iter().zip(&inside).map(|(x, w)| x * w).collect();
        u = chain.propagate(&masked, tau)?;
    }
    let pi = chain.pi();
    let mut entry_path = 0.0;
    let mut stay_path = 0.0;
    let mut a_complement = 0.0;
    for i in 0..chain.n() {
        if !a.contains(i) {
            a_complement += pi[i];
            if event.contains(i) {
                entry_path += pi[i] * u[i];
            }
        } else if event.contains(i) {
            stay_path += pi[i] * u[i];
        }
    }
    let entry_bound = lambda.powi(m.saturating_sub(1) as i32) * a_complement;
    let stay_bound = lambda.powi(m as i32);
    Ok(RecursionCheck {
        tau,
        lambda,
        m,
        entry_path,
        entry_bound,
        stay_path,
        stay_bound,
        holds: entry_path <= entry_bound && stay_path <= stay_bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoTermCheck {
    pub tau: u64,
    pub k: u32,
    pub lambda: f64,
    /// Exact tail at `t = k tau`.
    pub tail: f64,
    /// `lambda^k + (2 - lambda)/(1 - lambda) P[A_tau^c]`
    pub bound: f64,
    pub holds: bool,
}

/// The tail at `k tau` against the two-term bound before the variance step.
pub fn two_term_check(chain: &ReversibleChain, event: &EventSet, tau: u64, lambda: f64, k: u32) -> Result<TwoTermCheck> {
    let a = as_set(chain, event, tau, lambda)?;
    let mass = a.complement(chain.pi())?.mass();
    let tail = exit_tail_exact(chain, event, tau * k as u64)?.probability;
    let bound = lambda.powi(k as i32) + (2.0 - lambda) / (1.0 - lambda) * mass;
    Ok(TwoTermCheck { tau, k, lambda, tail, bound, holds: tail <= bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn initial_set_complement_is_the_event() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = ensemble::random_chain(&mut rng, 9, 0.4);
        let ev = ensemble::random_event(&mut rng, c.pi(), 0.1, 0.8).unwrap();
        let lambda = (ev.mass() + 1.0) / 2.0;
        let a = as_set(&c, &ev, 0, lambda).unwrap();
        assert_eq!(a.complement(c.pi()).unwrap().mask(), ev.mask());
        assert!(as_set(&c, &ev, 0, ev.mass() / 2.0).is_err());
    }

    #[test]
    fn iid_kernel_has_empty_complement() {
        let c = ReversibleChain::from_rows(&[vec![0.3, 0.7], vec![0.3, 0.7]], None).unwrap();
        let ev = c.event_from_states(&[1]).unwrap();
        let a = as_set(&c, &ev, 1, 0.8).unwrap();
        assert_eq!(a.mass(), 1.0);
    }

    #[test]
    fn small_m_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let c = ensemble::random_chain(&mut rng, 6, 0.5);
            let ev = ensemble::random_event(&mut rng, c.pi(), 0.1, 0.8).unwrap();
            let lambda = ev.mass() + (1.0 - ev.mass()) * rng.random_range(0.1..0.9);
            for m in 0..=2 {
                assert!(lambda_recursion_check(&c, &ev, 1, lambda, m).unwrap().holds);
            }
        }
    }

    #[test]
    fn two_term_and_mass_checks_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let c = ensemble::random_chain(&mut rng, 7, 0.5);
            let ev = ensemble::random_event(&mut rng, c.pi(), 0.1, 0.8).unwrap();
            let lambda = (ev.mass() + 1.0) / 2.0;
            for tau in 1..6 {
                assert!(complement_mass_check(&c, &ev, tau, lambda).unwrap().holds);
                assert!(two_term_check(&c, &ev, tau, lambda, 4).unwrap().holds);
            }
        }
    }
}
