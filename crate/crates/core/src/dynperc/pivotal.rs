use serde::{Deserialize, Serialize};

use super::lattice::{Lattice, Network};
use super::oracle::{crosses, reach_from};
use crate::error::{Error, Result};
use crate::replica::run_replicas;
use crate::stats::Estimate;

/// Bits not open in `net` whose opening joins a source-side vertex to a
/// target-side vertex.
fn joiners(net: &Network, bits: &[bool]) -> Vec<usize> {
    let from_sources = reach_from(net, bits, net.sources.iter().copied());
    let from_targets = reach_from(net, bits, net.targets());
    let mut out = Vec::new();
    if net.site_bits {
        for v in 0..net.vertices() {
            if bits[v] == net.open {
                continue;
            }
            let near = |side: &[bool], own: bool| {
                own || net.adjacency[v].iter().any(|&(u, _)| side[u as usize])
            };
            if near(&from_sources, net.is_source[v]) && near(&from_targets, net.is_target[v]) {
                out.push(v);
            }
        }
    } else {
        for (bit, &(u, w)) in net.endpoints.iter().enumerate() {
            if bits[bit] == net.open {
                continue;
            }
            let (u, w) = (u as usize, w as usize);
            if (from_sources[u] && from_targets[w]) || (from_sources[w] && from_targets[u]) {
                out.push(bit);
            }
        }
    }
    out
}

fn dual_of(lattice: &Lattice) -> Result<&Network> {
    lattice
        .dual()
        .ok_or_else(|| Error::InvalidParameter("pivotal bits need a crossing geometry".into()))
}

/// Bits whose flip changes whether the primal network crosses. With a
/// crossing present these are open bits closing a dual crossing when flipped;
/// otherwise closed bits opening a primal one.
pub fn pivotal_bits(lattice: &Lattice, bits: &[bool]) -> Result<Vec<usize>> {
    let dual = dual_of(lattice)?;
    if crosses(lattice.primal(), bits) {
        Ok(joiners(dual, bits))
    } else {
        Ok(joiners(lattice.primal(), bits))
    }
}

pub fn count_pivotal(lattice: &Lattice, bits: &[bool]) -> Result<usize> {
    pivotal_bits(lattice, bits).map(|p| p.len())
}

/// Flip each bit and search again.
pub fn brute_force_pivotal(lattice: &Lattice, bits: &[bool]) -> Vec<usize> {
    let net = lattice.primal();
    let base = crosses(net, bits);
    let mut work = bits.to_vec();
    (0..bits.len())
        .filter(|&b| {
            work[b] = !work[b];
            let changed = crosses(net, &work) != base;
            work[b] = !work[b];
            changed
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PivEstimate {
    pub n: usize,
    pub estimate: Estimate,
}

/// Mean pivotal count over independent fair configurations.
pub fn estimate_piv(lattice: &Lattice, replicas: usize, seed: u64) -> Result<PivEstimate> {
    if replicas == 0 {
        return Err(Error::NoReplicas);
    }
    dual_of(lattice)?;
    let counts = run_replicas(seed, replicas, |_, rng| {
        let bits: Vec<bool> = (0..lattice.bits()).map(|_| rand::Rng::random(rng)).collect();
        count_pivotal(lattice, &bits).expect("crossing geometry checked") as f64
    });
    Ok(PivEstimate { n: lattice.spec.n, estimate: Estimate::from_values(&counts) })
}

/// Exact mean pivotal count by enumerating all `2^bits` configurations.
pub fn exhaustive_piv(lattice: &Lattice) -> Result<f64> {
    let m = lattice.bits();
    if m > 24 {
        return Err(Error::InvalidParameter(format!("{m} bits is too many to enumerate")));
    }
    let mut total = 0usize;
    let mut bits = vec![false; m];
    for mask in 0u64..(1 << m) {
        for (i, b) in bits.iter_mut().enumerate() {
            *b = mask >> i & 1 == 1;
        }
        total += count_pivotal(lattice, &bits)?;
    }
    Ok(total as f64 / (1u64 << m) as f64)
}

/// Ratio of two independent pivotal estimates with a delta-method error.
pub fn growth_ratio(large: &PivEstimate, small: &PivEstimate) -> Estimate {
    let (a, b) = (large.estimate, small.estimate);
    let mean = a.mean / b.mean;
    let rel = ((a.sigma / a.mean).powi(2) + (b.sigma / b.mean).powi(2)).sqrt();
    let sigma = mean * rel;
    Estimate { mean, sigma, half_width: crate::stats::Z95 * sigma, samples: a.samples.min(b.samples) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynperc::lattice::{LatticeKind, LatticeSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn all_open_has_no_pivotal_bits() {
        for kind in [LatticeKind::TriSite, LatticeKind::Z2Bond] {
            for n in 2..=6 {
                let lat = Lattice::new(LatticeSpec::crossing(kind, n)).unwrap();
                let bits = vec![true; lat.bits()];
                assert_eq!(count_pivotal(&lat, &bits).unwrap(), 0);
                assert!(brute_force_pivotal(&lat, &bits).is_empty());
            }
        }
    }

    #[test]
    fn single_path_is_entirely_pivotal() {
        let lat = Lattice::new(LatticeSpec::crossing(LatticeKind::TriSite, 5)).unwrap();
        let mut bits = vec![false; 25];
        for x in 0..5 {
            bits[x + 5 * 2] = true;
        }
        let mut p = pivotal_bits(&lat, &bits).unwrap();
        p.sort();
        assert_eq!(p, (10..15).collect::<Vec<_>>());
        let lat = Lattice::new(LatticeSpec::crossing(LatticeKind::Z2Bond, 4)).unwrap();
        let mut bits = vec![false; lat.bits()];
        // horizontal bonds of row 1 are bits 4..8
        for b in 4..8 {
            bits[b] = true;
        }
        assert_eq!(pivotal_bits(&lat, &bits).unwrap(), vec![4, 5, 6, 7]);
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for kind in [LatticeKind::TriSite, LatticeKind::Z2Bond] {
            for n in 2..=8 {
                let lat = Lattice::new(LatticeSpec::crossing(kind, n)).unwrap();
                for _ in 0..80 {
                    let bits: Vec<bool> = (0..lat.bits()).map(|_| rng.random()).collect();
                    let mut fast = pivotal_bits(&lat, &bits).unwrap();
                    fast.sort();
                    assert_eq!(fast, brute_force_pivotal(&lat, &bits));
                }
            }
        }
    }

    #[test]
    fn ball_geometry_is_rejected() {
        let lat = Lattice::new(LatticeSpec::ball(LatticeKind::TriSite, 3)).unwrap();
        assert!(count_pivotal(&lat, &vec![true; lat.bits()]).is_err());
    }

    #[test]
    fn small_exhaustive_value() {
        // 2x2 rhombus: crossing iff a row is open or the anti-diagonal pair (1,0),(0,1) is
        let lat = Lattice::new(LatticeSpec::crossing(LatticeKind::TriSite, 2)).unwrap();
        let exact = exhaustive_piv(&lat).unwrap();
        let mut brute = 0;
        for mask in 0..16u32 {
            let bits: Vec<bool> = (0..4).map(|i| mask >> i & 1 == 1).collect();
            brute += brute_force_pivotal(&lat, &bits).len();
        }
        assert_eq!(exact, brute as f64 / 16.0);
    }
}
