use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeKind {
    /// Bond percolation on the square lattice.
    Z2Bond,
    /// Site percolation on the triangular lattice.
    TriSite,
}

impl std::str::FromStr for LatticeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "z2bond" | "z2-bond" | "Z2Bond" => Ok(LatticeKind::Z2Bond),
            "trisite" | "tri-site" | "TriSite" => Ok(LatticeKind::TriSite),
            other => Err(Error::InvalidParameter(format!("unknown lattice kind {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    /// Left-right crossing of the `(n+1) x n` rectangle (bonds) or the
    /// `n x n` rhombus (sites).
    Crossing,
    /// Connection from the origin to the boundary of the ball of radius `n`.
    Ball,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    pub n: usize,
    pub geometry: Geometry,
}

impl LatticeSpec {
    pub fn crossing(kind: LatticeKind, n: usize) -> Self {
        LatticeSpec { kind, n, geometry: Geometry::Crossing }
    }

    pub fn ball(kind: LatticeKind, radius: usize) -> Self {
        LatticeSpec { kind, n: radius, geometry: Geometry::Ball }
    }

    pub fn build(&self) -> Result<Lattice> {
        Lattice::new(*self)
    }
}

pub(crate) const NO_GATE: u32 = u32::MAX;

/// A percolation problem on a graph: which vertices are reachable from the
/// sources through open bits, and whether a target is among them.
///
/// In a site network vertex `i` is bit `i` and edges are ungated. In a bond
/// network every vertex is usable and each edge is gated by one bit.
#[derive(Clone, Debug)]
pub struct Network {
    pub(crate) adjacency: Vec<Vec<(u32, u32)>>,
    pub(crate) site_bits: bool,
    pub(crate) endpoints: Vec<(u32, u32)>,
    pub(crate) sources: Vec<u32>,
    pub(crate) is_source: Vec<bool>,
    pub(crate) is_target: Vec<bool>,
    /// The bit value that counts as open.
    pub(crate) open: bool,
}

impl Network {
    pub fn vertices(&self) -> usize {
        self.adjacency.len()
    }

    #[inline]
    pub(crate) fn usable(&self, bits: &[bool], v: u32) -> bool {
        !self.site_bits || bits[v as usize] == self.open
    }

    #[inline]
    pub(crate) fn passable(&self, bits: &[bool], gate: u32) -> bool {
        gate == NO_GATE || bits[gate as usize] == self.open
    }

    pub(crate) fn targets(&self) -> Vec<u32> {
        (0..self.vertices() as u32).filter(|&v| self.is_target[v as usize]).collect()
    }
}

struct Builder {
    adjacency: Vec<Vec<(u32, u32)>>,
    endpoints: Vec<(u32, u32)>,
}

impl Builder {
    fn new(vertices: usize) -> Self {
        Builder { adjacency: vec![Vec::new(); vertices], endpoints: Vec::new() }
    }

    fn site_edge(&mut self, u: usize, v: usize) {
        self.adjacency[u].push((v as u32, NO_GATE));
    }

    fn bond(&mut self, u: usize, v: usize) -> usize {
        let bit = self.endpoints.len();
        self.endpoints.push((u as u32, v as u32));
        self.adjacency[u].push((v as u32, bit as u32));
        self.adjacency[v].push((u as u32, bit as u32));
        bit
    }

    fn dual_bond(&mut self, u: usize, v: usize, bit: usize) {
        if self.endpoints.len() <= bit {
            self.endpoints.resize(bit + 1, (0, 0));
        }
        self.endpoints[bit] = (u as u32, v as u32);
        self.adjacency[u].push((v as u32, bit as u32));
        self.adjacency[v].push((u as u32, bit as u32));
    }

    fn finish(self, site_bits: bool, is_source: Vec<bool>, is_target: Vec<bool>, open: bool) -> Network {
        let sources = (0..is_source.len() as u32).filter(|&v| is_source[v as usize]).collect();
        Network { adjacency: self.adjacency, site_bits, endpoints: self.endpoints, sources, is_source, is_target, open }
    }
}

const TRI_STEPS: [(i64, i64); 6] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)];

fn hex_norm(x: i64, y: i64) -> i64 {
    x.abs().max(y.abs()).max((x + y).abs())
}

const KEY_OFFSET: i64 = 1 << 30;

fn site_key(x: i64, y: i64) -> u64 {
    (((x + KEY_OFFSET) as u64) << 32) | (y + KEY_OFFSET) as u64
}

fn bond_key(x: i64, y: i64, vertical: bool) -> u64 {
    (((x + KEY_OFFSET) as u64) << 33) | (((y + KEY_OFFSET) as u64) << 1) | vertical as u64
}

/// A finite region with its primal network and, for crossing geometries, the
/// dual network whose top-bottom crossing is the complementary event.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub spec: LatticeSpec,
    pub(crate) primal: Network,
    pub(crate) dual: Option<Network>,
    /// Coordinate key per bit, the same for a bit in every region containing it.
    pub(crate) keys: Vec<u64>,
    /// Bits adjacent to the origin in ball geometry.
    pub(crate) origin_bits: Vec<usize>,
}

impl Lattice {
    pub fn new(spec: LatticeSpec) -> Result<Self> {
        if spec.n < 2 {
            return Err(Error::InvalidParameter(format!("lattice size must be at least 2, got {}", spec.n)));
        }
        Ok(match (spec.kind, spec.geometry) {
            (LatticeKind::TriSite, Geometry::Crossing) => tri_rhombus(spec),
            (LatticeKind::TriSite, Geometry::Ball) => tri_ball(spec),
            (LatticeKind::Z2Bond, Geometry::Crossing) => z2_rectangle(spec),
            (LatticeKind::Z2Bond, Geometry::Ball) => z2_ball(spec),
        })
    }

    pub fn bits(&self) -> usize {
        self.keys.len()
    }

    pub fn primal(&self) -> &Network {
        &self.primal
    }

    pub fn dual(&self) -> Option<&Network> {
        self.dual.as_ref()
    }

    pub fn origin_bits(&self) -> &[usize] {
        &self.origin_bits
    }
}

fn tri_rhombus(spec: LatticeSpec) -> Lattice {
    let n = spec.n as i64;
    let idx = |x: i64, y: i64| (x + n * y) as usize;
    let mut b = Builder::new((n * n) as usize);
    let mut keys = Vec::with_capacity((n * n) as usize);
    for y in 0..n {
        for x in 0..n {
            keys.push(site_key(x, y));
            for (dx, dy) in TRI_STEPS {
                let (u, v) = (x + dx, y + dy);
                if (0..n).contains(&u) && (0..n).contains(&v) {
                    b.site_edge(idx(x, y), idx(u, v));
                }
            }
        }
    }
    let side = |f: &dyn Fn(i64, i64) -> bool| -> Vec<bool> {
        (0..n * n).map(|i| f(i % n, i / n)).collect()
    };
    let dual_adj = b.adjacency.clone();
    let primal = b.finish(true, side(&|x, _| x == 0), side(&|x, _| x == n - 1), true);
    let dual = Builder { adjacency: dual_adj, endpoints: Vec::new() }
        .finish(true, side(&|_, y| y == 0), side(&|_, y| y == n - 1), false);
    Lattice { spec, primal, dual: Some(dual), keys, origin_bits: Vec::new() }
}

fn tri_ball(spec: LatticeSpec) -> Lattice {
    let r = spec.n as i64;
    let mut index = HashMap::new();
    let mut coords = Vec::new();
    for y in -r..=r {
        for x in -r..=r {
            if hex_norm(x, y) <= r {
                index.insert((x, y), coords.len());
                coords.push((x, y));
            }
        }
    }
    let mut b = Builder::new(coords.len());
    for (i, &(x, y)) in coords.iter().enumerate() {
        for (dx, dy) in TRI_STEPS {
            if let Some(&j) = index.get(&(x + dx, y + dy)) {
                b.site_edge(i, j);
            }
        }
    }
    let origin = index[&(0, 0)];
    let origin_bits = b.adjacency[origin].iter().map(|&(v, _)| v as usize).collect();
    let is_source = (0..coords.len()).map(|i| i == origin).collect();
    let is_target = coords.iter().map(|&(x, y)| hex_norm(x, y) == r).collect();
    let keys = coords.iter().map(|&(x, y)| site_key(x, y)).collect();
    Lattice { spec, primal: b.finish(true, is_source, is_target, true), dual: None, keys, origin_bits }
}

fn z2_rectangle(spec: LatticeSpec) -> Lattice {
    let n = spec.n as i64;
    // vertices (x, y), 0 <= x <= n, 0 <= y < n
    let idx = |x: i64, y: i64| (x + (n + 1) * y) as usize;
    let mut b = Builder::new(((n + 1) * n) as usize);
    let mut keys = Vec::new();
    // dual vertices (i, j), 0 <= i < n, -1 <= j < n
    let didx = |i: i64, j: i64| (i + n * (j + 1)) as usize;
    let mut d = Builder::new((n * (n + 1)) as usize);
    for y in 0..n {
        for x in 0..n {
            let bit = b.bond(idx(x, y), idx(x + 1, y));
            keys.push(bond_key(x, y, false));
            d.dual_bond(didx(x, y - 1), didx(x, y), bit);
        }
    }
    for y in 0..n - 1 {
        for x in 1..n {
            let bit = b.bond(idx(x, y), idx(x, y + 1));
            keys.push(bond_key(x, y, true));
            d.dual_bond(didx(x - 1, y), didx(x, y), bit);
        }
    }
    let vertices = ((n + 1) * n) as usize;
    let is_source = (0..vertices).map(|i| i as i64 % (n + 1) == 0).collect();
    let is_target = (0..vertices).map(|i| i as i64 % (n + 1) == n).collect();
    let primal = b.finish(false, is_source, is_target, true);
    let dvertices = (n * (n + 1)) as usize;
    let d_source = (0..dvertices).map(|i| (i as i64) / n == 0).collect();
    let d_target = (0..dvertices).map(|i| (i as i64) / n == n).collect();
    let dual = d.finish(false, d_source, d_target, false);
    Lattice { spec, primal, dual: Some(dual), keys, origin_bits: Vec::new() }
}

fn z2_ball(spec: LatticeSpec) -> Lattice {
    let r = spec.n as i64;
    let mut index = HashMap::new();
    let mut coords = Vec::new();
    for y in -r..=r {
        for x in -r..=r {
            if x.abs() + y.abs() <= r {
                index.insert((x, y), coords.len());
                coords.push((x, y));
            }
        }
    }
    let mut b = Builder::new(coords.len());
    let mut keys = Vec::new();
    for (i, &(x, y)) in coords.iter().enumerate() {
        if let Some(&j) = index.get(&(x + 1, y)) {
            b.bond(i, j);
            keys.push(bond_key(x, y, false));
        }
        if let Some(&j) = index.get(&(x, y + 1)) {
            b.bond(i, j);
            keys.push(bond_key(x, y, true));
        }
    }
    let origin = index[&(0, 0)];
    let origin_bits = b.adjacency[origin].iter().map(|&(_, g)| g as usize).collect();
    let is_source = (0..coords.len()).map(|i| i == origin).collect();
    let is_target = coords.iter().map(|&(x, y)| x.abs() + y.abs() == r).collect();
    Lattice { spec, primal: b.finish(false, is_source, is_target, true), dual: None, keys, origin_bits }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let t = Lattice::new(LatticeSpec::crossing(LatticeKind::TriSite, 5)).unwrap();
        assert_eq!(t.bits(), 25);
        let z = Lattice::new(LatticeSpec::crossing(LatticeKind::Z2Bond, 5)).unwrap();
        assert_eq!(z.bits(), 25 + 16);
        assert_eq!(z.dual().unwrap().endpoints.len(), z.bits());
        let tb = Lattice::new(LatticeSpec::ball(LatticeKind::TriSite, 2)).unwrap();
        assert_eq!(tb.bits(), 19);
        assert_eq!(tb.origin_bits().len(), 6);
        let zb = Lattice::new(LatticeSpec::ball(LatticeKind::Z2Bond, 2)).unwrap();
        // 13 vertices, 16 bonds
        assert_eq!(zb.primal().vertices(), 13);
        assert_eq!(zb.bits(), 16);
        assert_eq!(zb.origin_bits().len(), 4);
        assert!(Lattice::new(LatticeSpec::crossing(LatticeKind::TriSite, 1)).is_err());
    }

    #[test]
    fn keys_agree_across_radii() {
        for kind in [LatticeKind::TriSite, LatticeKind::Z2Bond] {
            let small = Lattice::new(LatticeSpec::ball(kind, 3)).unwrap();
            let large = Lattice::new(LatticeSpec::ball(kind, 6)).unwrap();
            let keys: std::collections::HashSet<u64> = large.keys.iter().copied().collect();
            assert!(small.keys.iter().all(|k| keys.contains(k)));
            assert_eq!(keys.len(), large.bits());
        }
    }
}
