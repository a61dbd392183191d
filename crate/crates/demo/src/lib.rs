//! Browser bindings: a conductance-walk sweep, the exit tail of a pasted
//! chain against the decorrelation bound, and a live percolation lattice.
//!
//! Series come back as flat `Float64Array`s of fixed-width rows.

use wasm_bindgen::prelude::*;

use exit_tail::bounds::{exit_tail_on_grid, tmain_bound, TmainOptions};
use exit_tail::dynperc::{AggregateClock, Connectivity, Lattice, LatticeKind, LatticeSpec};
use exit_tail::fit::log_grid;
use exit_tail::replica::replica_rng;
use exit_tail::spectral::{decorrelation_curve, EvalMode};
use exit_tail::textio::parse_chain;
use exit_tail::walks::{build_conductance_walk, correlation_vs_survival, ConductanceWalkSpec};

fn js(e: exit_tail::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Rows `[t, correlation, survival]` for the walk with conductances
/// `|x|^beta` on `+-1..=+-n`, on `points` log-spaced times up to `t_max`.
#[wasm_bindgen]
pub fn conductance_sweep(beta: f64, n: usize, t_max: u32, points: usize) -> Result<Vec<f64>, JsError> {
    let spec = ConductanceWalkSpec::new(beta, n);
    let chain = build_conductance_walk(&spec).map_err(js)?;
    let event = spec.positive(&chain).map_err(js)?;
    let grid = log_grid(1, u64::from(t_max.max(2)), points.max(2));
    let points = correlation_vs_survival(&chain, &event, &grid).map_err(js)?;
    Ok(points.iter().flat_map(|p| [p.t as f64, p.corr, p.survival]).collect())
}

/// Rows `[t, exit tail, bound]` for `t = 1..=t_max`; the bound is NaN where
/// no admissible term exists.
#[wasm_bindgen]
pub fn tail_vs_bound(chain_text: &str, event: &str, t_max: u32) -> Result<Vec<f64>, JsError> {
    let chain = parse_chain(chain_text).map_err(js)?;
    let states: Vec<usize> = event
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| JsError::new(&format!("bad state {s:?}"))))
        .collect::<Result<_, _>>()?;
    let event = chain.event_from_states(&states).map_err(js)?;
    let t_max = u64::from(t_max.max(1));
    let curve = decorrelation_curve(&chain, &event, 2 * t_max, EvalMode::Envelope).map_err(js)?;
    let grid: Vec<u64> = (1..=t_max).collect();
    let tail = exit_tail_on_grid(&chain, &event, &grid).map_err(js)?;
    let options = TmainOptions::default();
    let mut rows = Vec::with_capacity(3 * grid.len());
    for &t in &grid {
        let target = tail.times.iter().position(|&s| s == t).map_or(0.0, |i| tail.values[i]);
        let bound = tmain_bound(event.mass(), &curve, t as f64, &options).map_or(f64::NAN, |r| r.bound);
        rows.extend([t as f64, target, bound]);
    }
    Ok(rows)
}

/// Critical site percolation on an `n x n` triangular rhombus, every site
/// resampled at `rate`.
#[wasm_bindgen]
pub struct Percolation {
    lattice: Lattice,
    bits: Vec<bool>,
    oracle: Connectivity,
    clock: AggregateClock,
    rng: rand_chacha::ChaCha8Rng,
    time: f64,
    changes: u32,
}

#[wasm_bindgen]
impl Percolation {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, rate: f64, seed: u32) -> Result<Percolation, JsError> {
        let lattice = LatticeSpec::crossing(LatticeKind::TriSite, n).build().map_err(js)?;
        let mut rng = replica_rng(u64::from(seed), 0);
        let bits: Vec<bool> = (0..lattice.bits()).map(|_| rand::Rng::random(&mut rng)).collect();
        let oracle = Connectivity::new(lattice.primal(), &bits);
        let clock = AggregateClock { rate, bits: lattice.bits() };
        Ok(Percolation { lattice, bits, oracle, clock, rng, time: 0.0, changes: 0 })
    }

    /// Runs the dynamics for `dt`; returns the number of sites that flipped.
    pub fn advance(&mut self, dt: f64) -> u32 {
        let end = self.time + dt.max(0.0);
        let mut flips = 0;
        while let Some(ring) = self.clock.next(&mut self.rng, self.time).filter(|r| r.time <= end) {
            self.time = ring.time;
            if self.bits[ring.bit] != ring.value {
                let before = self.oracle.connected();
                self.bits[ring.bit] = ring.value;
                self.oracle.update(self.lattice.primal(), &self.bits, ring.bit);
                flips += 1;
                self.changes += (before != self.oracle.connected()) as u32;
            }
        }
        self.time = end;
        flips
    }

    pub fn size(&self) -> usize {
        self.lattice.spec.n
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn crossing(&self) -> bool {
        self.oracle.connected()
    }

    /// Times the crossing status has changed.
    pub fn changes(&self) -> u32 {
        self.changes
    }

    /// Site `x + n y` is open iff entry `x + n y` is 1.
    pub fn sites(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| b as u8).collect()
    }

    /// Sites of a left-right open path, empty when there is none.
    pub fn path(&self) -> Vec<u32> {
        self.oracle.witness().map(<[u32]>::to_vec).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_rows_have_three_columns() {
        let rows = conductance_sweep(1.5, 50, 200, 10).unwrap();
        assert_eq!(rows.len() % 3, 0);
        assert!(rows.chunks(3).all(|r| r[1] <= 0.5 * r[2]));
    }

    #[test]
    fn tail_stays_below_bound() {
        let rows = tail_vs_bound("3\n0.5 0.25 0.25\n0.25 0.5 0.25\n0.25 0.25 0.5\n", "0", 20).unwrap();
        assert_eq!(rows.len(), 60);
        assert!(rows.chunks(3).all(|r| r[2].is_nan() || r[1] <= r[2]));
    }

    #[test]
    fn path_is_open_and_present_exactly_when_crossing() {
        let mut p = Percolation::new(12, 1.0, 3).unwrap();
        for _ in 0..50 {
            p.advance(0.05);
            let sites = p.sites();
            assert_eq!(p.crossing(), !p.path().is_empty());
            assert!(p.path().iter().all(|&s| sites[s as usize] == 1));
        }
        assert!(p.time() > 2.4);
    }
}
