//! Connectivity between the two sides of a [`Network`], from scratch and
//! maintained under single-bit changes.
//!
//! While connected the oracle keeps one open source-to-target path; only
//! closing a bit on it forces a new search. While disconnected it keeps the
//! exact set reachable from the sources; opening a bit next to that set
//! extends it, and closing a bit inside it recomputes it.

use std::collections::VecDeque;

use super::lattice::{Network, NO_GATE};

/// Vertices reachable from `starts` (only the usable ones seed the search).
pub fn reach_from(net: &Network, bits: &[bool], starts: impl IntoIterator<Item = u32>) -> Vec<bool> {
    let mut seen = vec![false; net.vertices()];
    let mut queue = VecDeque::new();
    for s in starts {
        if net.usable(bits, s) && !seen[s as usize] {
            seen[s as usize] = true;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &(v, gate) in &net.adjacency[u as usize] {
            if !seen[v as usize] && net.usable(bits, v) && net.passable(bits, gate) {
                seen[v as usize] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

/// From-scratch search.
pub fn crosses(net: &Network, bits: &[bool]) -> bool {
    let seen = reach_from(net, bits, net.sources.iter().copied());
    seen.iter().zip(&net.is_target).any(|(&s, &t)| s && t)
}

/// Size of the largest open cluster, in vertices.
pub fn largest_cluster(net: &Network, bits: &[bool]) -> usize {
    let mut seen = vec![false; net.vertices()];
    let mut queue = VecDeque::new();
    let mut best = 0;
    for s in 0..net.vertices() as u32 {
        if seen[s as usize] || !net.usable(bits, s) {
            continue;
        }
        seen[s as usize] = true;
        queue.push_back(s);
        let mut size = 0;
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &(v, gate) in &net.adjacency[u as usize] {
                if !seen[v as usize] && net.usable(bits, v) && net.passable(bits, gate) {
                    seen[v as usize] = true;
                    queue.push_back(v);
                }
            }
        }
        best = best.max(size);
    }
    best
}

#[derive(Clone, Debug)]
pub struct Connectivity {
    connected: bool,
    /// Disconnected: exactly the vertices reachable from the sources.
    reached: Vec<bool>,
    /// Connected: bits on the witness path.
    on_path: Vec<bool>,
    path: Vec<u32>,
    parent: Vec<(u32, u32)>,
    queue: VecDeque<u32>,
    searches: u64,
}

impl Connectivity {
    pub fn new(net: &Network, bits: &[bool]) -> Self {
        let mut c = Connectivity {
            connected: false,
            reached: vec![false; net.vertices()],
            on_path: vec![false; bits.len()],
            path: Vec::new(),
            parent: vec![(NO_GATE, NO_GATE); net.vertices()],
            queue: VecDeque::new(),
            searches: 0,
        };
        c.rebuild(net, bits);
        c
    }

    pub fn connected(&self) -> bool {
        self.connected
    }

    /// Full searches performed so far.
    pub fn searches(&self) -> u64 {
        self.searches
    }

    pub fn witness(&self) -> Option<&[u32]> {
        self.connected.then_some(self.path.as_slice())
    }

    pub fn rebuild(&mut self, net: &Network, bits: &[bool]) {
        self.searches += 1;
        for &b in &self.path {
            self.on_path[b as usize] = false;
        }
        self.path.clear();
        self.reached.iter_mut().for_each(|r| *r = false);
        self.queue.clear();
        self.connected = false;
        for &s in &net.sources {
            if net.usable(bits, s) {
                self.reached[s as usize] = true;
                self.parent[s as usize] = (NO_GATE, NO_GATE);
                self.queue.push_back(s);
            }
        }
        while let Some(u) = self.queue.pop_front() {
            if net.is_target[u as usize] {
                self.record_path(net, u);
                self.queue.clear();
                return;
            }
            for &(v, gate) in &net.adjacency[u as usize] {
                if !self.reached[v as usize] && net.usable(bits, v) && net.passable(bits, gate) {
                    self.reached[v as usize] = true;
                    self.parent[v as usize] = (u, gate);
                    self.queue.push_back(v);
                }
            }
        }
    }

    fn record_path(&mut self, net: &Network, end: u32) {
        self.connected = true;
        let mut v = end;
        loop {
            let (prev, gate) = self.parent[v as usize];
            let bit = if net.site_bits { v } else { gate };
            if bit != NO_GATE {
                self.on_path[bit as usize] = true;
                self.path.push(bit);
            }
            if prev == NO_GATE {
                break;
            }
            v = prev;
        }
    }

    /// Call after `bits[bit]` changed value.
    pub fn update(&mut self, net: &Network, bits: &[bool], bit: usize) {
        let opened = bits[bit] == net.open;
        if self.connected {
            if !opened && self.on_path[bit] {
                self.rebuild(net, bits);
            }
            return;
        }
        if net.site_bits {
            let v = bit as u32;
            if opened {
                let touches = net.is_source[bit]
                    || net.adjacency[bit].iter().any(|&(u, _)| self.reached[u as usize]);
                if touches {
                    self.extend(net, bits, v);
                }
            } else if self.reached[bit] {
                self.rebuild(net, bits);
            }
        } else {
            let (u, w) = net.endpoints[bit];
            let (ru, rw) = (self.reached[u as usize], self.reached[w as usize]);
            if opened {
                if ru != rw {
                    self.extend(net, bits, if ru { w } else { u });
                }
            } else if ru && rw {
                self.rebuild(net, bits);
            }
        }
    }

    fn extend(&mut self, net: &Network, bits: &[bool], start: u32) {
        self.reached[start as usize] = true;
        self.queue.clear();
        self.queue.push_back(start);
        while let Some(u) = self.queue.pop_front() {
            if net.is_target[u as usize] {
                self.rebuild(net, bits);
                return;
            }
            for &(v, gate) in &net.adjacency[u as usize] {
                if !self.reached[v as usize] && net.usable(bits, v) && net.passable(bits, gate) {
                    self.reached[v as usize] = true;
                    self.queue.push_back(v);
                }
            }
        }
    }

    /// Compares the maintained state with a from-scratch search.
    pub fn agrees_with_scratch(&self, net: &Network, bits: &[bool]) -> bool {
        if self.connected != crosses(net, bits) {
            return false;
        }
        if self.connected {
            // the witness must still be open
            self.path.iter().all(|&b| if net.site_bits { net.usable(bits, b) } else { net.passable(bits, b) })
        } else {
            self.reached == reach_from(net, bits, net.sources.iter().copied())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynperc::lattice::{Lattice, LatticeKind, LatticeSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn extreme_configurations() {
        for kind in [LatticeKind::TriSite, LatticeKind::Z2Bond] {
            let lat = Lattice::new(LatticeSpec::crossing(kind, 6)).unwrap();
            let n = lat.bits();
            assert!(crosses(lat.primal(), &vec![true; n]));
            assert!(!crosses(lat.primal(), &vec![false; n]));
            assert!(!crosses(lat.dual().unwrap(), &vec![true; n]));
            assert!(crosses(lat.dual().unwrap(), &vec![false; n]));
        }
    }

    #[test]
    fn exactly_one_of_primal_and_dual_crosses() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for kind in [LatticeKind::TriSite, LatticeKind::Z2Bond] {
            for n in [2, 3, 7] {
                let lat = Lattice::new(LatticeSpec::crossing(kind, n)).unwrap();
                for _ in 0..300 {
                    let bits: Vec<bool> = (0..lat.bits()).map(|_| rng.random()).collect();
                    assert_ne!(crosses(lat.primal(), &bits), crosses(lat.dual().unwrap(), &bits));
                }
            }
        }
    }

    #[test]
    fn maintained_state_tracks_random_flips() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for spec in [
            LatticeSpec::crossing(LatticeKind::TriSite, 8),
            LatticeSpec::crossing(LatticeKind::Z2Bond, 8),
            LatticeSpec::ball(LatticeKind::TriSite, 5),
            LatticeSpec::ball(LatticeKind::Z2Bond, 5),
        ] {
            let lat = Lattice::new(spec).unwrap();
            let net = lat.primal();
            let mut bits: Vec<bool> = (0..lat.bits()).map(|_| rng.random()).collect();
            let mut c = Connectivity::new(net, &bits);
            for _ in 0..5000 {
                let b = rng.random_range(0..bits.len());
                bits[b] = !bits[b];
                c.update(net, &bits, b);
                assert!(c.agrees_with_scratch(net, &bits));
            }
        }
    }

    #[test]
    fn largest_cluster_extremes() {
        let lat = Lattice::new(LatticeSpec::crossing(LatticeKind::Z2Bond, 4)).unwrap();
        assert_eq!(largest_cluster(lat.primal(), &vec![true; lat.bits()]), 20);
        assert_eq!(largest_cluster(lat.primal(), &vec![false; lat.bits()]), 1);
        let tri = Lattice::new(LatticeSpec::crossing(LatticeKind::TriSite, 4)).unwrap();
        assert_eq!(largest_cluster(tri.primal(), &vec![false; 16]), 0);
    }
}
