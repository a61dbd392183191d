//! Randomized reversible chains and events used by the verification suites.

use nalgebra::DMatrix;
use rand::Rng;

use crate::chain::{ConductanceGraph, EventSet, GeneratorChain, ReversibleChain, Tolerances};

fn random_weights<R: Rng>(rng: &mut R, n: usize, density: f64) -> Vec<Vec<f64>> {
    let mut w = vec![vec![0.0; n]; n];
    // a random spanning path keeps the chain irreducible
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    for pair in order.windows(2) {
        let c = rng.random_range(0.05..1.0);
        w[pair[0]][pair[1]] = c;
        w[pair[1]][pair[0]] = c;
    }
    for i in 0..n {
        for j in i..n {
            if rng.random::<f64>() < density {
                let c = rng.random_range(0.0..1.0);
                w[i][j] += c;
                if i != j {
                    w[j][i] += c;
                }
            }
        }
    }
    w
}

/// Conductance walk on a random connected weighted graph with `n` states.
pub fn random_chain<R: Rng>(rng: &mut R, n: usize, density: f64) -> ReversibleChain {
    let w = random_weights(rng, n, density);
    let mut edges = Vec::new();
    for (i, row) in w.iter().enumerate() {
        for (j, &c) in row.iter().enumerate().skip(i) {
            if c > 0.0 {
                edges.push((i, j, c));
            }
        }
    }
    if n == 1 {
        edges.push((0, 0, 1.0));
    }
    let graph = ConductanceGraph::new(n, edges).expect("random weights are valid");
    ReversibleChain::from_conductances(&graph).expect("random graph is connected")
}

/// Reversible generator `Q_ij = w_ij / pi_i` for random symmetric `w` and
/// random `pi`.
pub fn random_generator<R: Rng>(rng: &mut R, n: usize, density: f64) -> GeneratorChain {
    let w = random_weights(rng, n, density);
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let pi: Vec<f64> = raw.iter().map(|p| p / total).collect();
    let mut q = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut out = 0.0;
        for j in 0..n {
            if i != j {
                q[(i, j)] = w[i][j] / (pi[i] * n as f64);
                out += q[(i, j)];
            }
        }
        q[(i, i)] = -out;
    }
    GeneratorChain::new(q, Some(pi), &Tolerances::default()).expect("construction is reversible")
}

/// Random proper, nonempty event whose mass lies in `[lo, hi]`, if one is
/// found within a bounded number of draws.
pub fn random_event<R: Rng>(rng: &mut R, pi: &[f64], lo: f64, hi: f64) -> Option<EventSet> {
    let n = pi.len();
    for _ in 0..1000 {
        let mask: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
        if mask.iter().all(|&m| m) || mask.iter().all(|&m| !m) {
            continue;
        }
        let ev = EventSet::new(pi, mask).expect("mask length matches");
        if ev.mass() >= lo && ev.mass() <= hi {
            return Some(ev);
        }
    }
    None
}

/// Random function with `||g||_{L^2(pi)} <= 1`.
pub fn random_unit_ball<R: Rng>(rng: &mut R, pi: &[f64]) -> Vec<f64> {
    let g: Vec<f64> = pi.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = pi.iter().zip(&g).map(|(p, x)| p * x * x).sum::<f64>().sqrt();
    let radius: f64 = rng.random::<f64>().sqrt();
    let scale = if norm > 0.0 { radius / norm } else { 0.0 };
    g.into_iter().map(|x| x * scale * (1.0 - 1e-15)).collect()
}
