use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::lattice::Lattice;
use super::oracle::Connectivity;
use crate::replica::replica_rng;

/// How often debug builds compare the maintained connectivity with a fresh search.
pub const AUDIT_EVERY: u64 = 10_000;

/// Bits of a lattice evolving in time, with maintained primal connectivity.
#[derive(Clone, Debug)]
pub struct DynLattice<'a> {
    lattice: &'a Lattice,
    bits: Vec<bool>,
    oracle: Connectivity,
    pub time: f64,
    /// Clock rings, including resamples that kept the old value.
    pub rings: u64,
    pub flips: u64,
}

impl<'a> DynLattice<'a> {
    pub fn new(lattice: &'a Lattice, bits: Vec<bool>) -> Self {
        let oracle = Connectivity::new(lattice.primal(), &bits);
        DynLattice { lattice, bits, oracle, time: 0.0, rings: 0, flips: 0 }
    }

    pub fn lattice(&self) -> &'a Lattice {
        self.lattice
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn connected(&self) -> bool {
        self.oracle.connected()
    }

    pub fn oracle(&self) -> &Connectivity {
        &self.oracle
    }

    pub fn open_fraction(&self) -> f64 {
        self.bits.iter().filter(|&&b| b).count() as f64 / self.bits.len() as f64
    }

    /// Resamples `bit` to `value`; returns whether it changed.
    pub fn resample(&mut self, bit: usize, value: bool) -> bool {
        self.rings += 1;
        if self.bits[bit] == value {
            return false;
        }
        self.bits[bit] = value;
        self.flips += 1;
        self.oracle.update(self.lattice.primal(), &self.bits, bit);
        if cfg!(debug_assertions) && self.flips % AUDIT_EVERY == 0 {
            debug_assert!(self.oracle.agrees_with_scratch(self.lattice.primal(), &self.bits));
        }
        true
    }

    pub fn audit(&self) -> bool {
        self.oracle.agrees_with_scratch(self.lattice.primal(), &self.bits)
    }
}

/// Independent fair bits.
pub fn fair_bits<R: Rng>(rng: &mut R, count: usize) -> Vec<bool> {
    (0..count).map(|_| rng.random()).collect()
}

/// A stationary configuration drawn from replica stream 0 of `seed`.
pub fn sample_critical(lattice: &Lattice, seed: u64) -> DynLattice<'_> {
    let mut rng = replica_rng(seed, 0);
    DynLattice::new(lattice, fair_bits(&mut rng, lattice.bits()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ring {
    pub time: f64,
    pub bit: usize,
    pub value: bool,
}

/// Every bit rings at `rate`; the next ring of the whole lattice comes from
/// the aggregate exponential and lands on a uniform bit.
#[derive(Clone, Copy, Debug)]
pub struct AggregateClock {
    pub rate: f64,
    pub bits: usize,
}

impl AggregateClock {
    /// `None` when nothing rings (rate zero).
    pub fn next<R: Rng>(&self, rng: &mut R, now: f64) -> Option<Ring> {
        if self.rate <= 0.0 || self.bits == 0 {
            return None;
        }
        let wait: f64 = Exp1.sample(rng);
        let time = now + wait / (self.rate * self.bits as f64);
        Some(Ring { time, bit: rng.random_range(0..self.bits), value: rng.random() })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Pending(f64, usize);

impl Eq for Pending {}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        // earliest first out of a max-heap
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Unit-rate clocks with one random stream per bit, keyed by the bit's
/// coordinates, so a bit rings at the same times with the same values in
/// every region containing it.
#[derive(Clone, Debug)]
pub struct BitClocks {
    streams: Vec<ChaCha8Rng>,
    heap: BinaryHeap<Pending>,
}

impl BitClocks {
    /// Also returns each bit's initial value, drawn from its own stream.
    pub fn new(lattice: &Lattice, base_seed: u64) -> (Self, Vec<bool>) {
        let mut streams = Vec::with_capacity(lattice.bits());
        let mut heap = BinaryHeap::with_capacity(lattice.bits());
        let mut initial = Vec::with_capacity(lattice.bits());
        for (bit, &key) in lattice.keys.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
            rng.set_stream(key);
            initial.push(rng.random());
            let wait: f64 = Exp1.sample(&mut rng);
            heap.push(Pending(wait, bit));
            streams.push(rng);
        }
        (BitClocks { streams, heap }, initial)
    }

    pub fn next(&mut self) -> Ring {
        let Pending(time, bit) = self.heap.pop().expect("every bit has a pending ring");
        let rng = &mut self.streams[bit];
        let value = rng.random();
        let wait: f64 = Exp1.sample(rng);
        self.heap.push(Pending(time + wait, bit));
        Ring { time, bit, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynperc::lattice::{LatticeKind, LatticeSpec};

    #[test]
    fn sampling_is_deterministic() {
        let lat = Lattice::new(LatticeSpec::crossing(LatticeKind::TriSite, 10)).unwrap();
        assert_eq!(sample_critical(&lat, 3).bits(), sample_critical(&lat, 3).bits());
        assert_ne!(sample_critical(&lat, 3).bits(), sample_critical(&lat, 4).bits());
    }

    #[test]
    fn long_runs_stay_consistent() {
        for spec in [LatticeSpec::crossing(LatticeKind::TriSite, 12), LatticeSpec::crossing(LatticeKind::Z2Bond, 12)] {
            let lat = Lattice::new(spec).unwrap();
            let mut rng = replica_rng(9, 0);
            let mut d = DynLattice::new(&lat, fair_bits(&mut rng, lat.bits()));
            let clock = AggregateClock { rate: 1.0, bits: lat.bits() };
            for i in 0..30_000 {
                let ring = clock.next(&mut rng, d.time).unwrap();
                d.time = ring.time;
                d.resample(ring.bit, ring.value);
                if i % 1000 == 0 {
                    assert!(d.audit());
                }
            }
            assert!(d.audit());
            assert!(d.flips < d.rings);
        }
    }

    #[test]
    fn zero_rate_never_rings() {
        let clock = AggregateClock { rate: 0.0, bits: 10 };
        assert!(clock.next(&mut replica_rng(1, 1), 0.0).is_none());
    }

    #[test]
    fn bit_clocks_agree_across_regions() {
        let small = Lattice::new(LatticeSpec::ball(LatticeKind::TriSite, 2)).unwrap();
        let large = Lattice::new(LatticeSpec::ball(LatticeKind::TriSite, 4)).unwrap();
        let (mut a, ia) = BitClocks::new(&small, 11);
        let (mut b, ib) = BitClocks::new(&large, 11);
        let map: std::collections::HashMap<u64, usize> =
            large.keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        for (i, &k) in small.keys.iter().enumerate() {
            assert_eq!(ia[i], ib[map[&k]]);
        }
        let small_rings: Vec<Ring> = (0..200).map(|_| a.next()).collect();
        let mut large_rings = Vec::new();
        while large_rings.len() < 200 {
            let r = b.next();
            if let Some(i) = small.keys.iter().position(|&k| k == large.keys[r.bit]) {
                large_rings.push(Ring { bit: i, ..r });
            }
        }
        assert_eq!(small_rings, large_rings);
    }
}
