//! First time the origin connects to the boundary of a ball, with unit-rate
//! clocks and no rescaling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dynamics::{BitClocks, DynLattice};
use super::lattice::{Lattice, LatticeKind, LatticeSpec};
use crate::error::{Error, Result};
use crate::fit::loglinear_fit;
use crate::replica::{replica_rng, run_replicas};
use crate::report::{num, row};
use crate::stats::{at_least, Estimate};

/// First connection time, `0` if connected at the start and infinity if it
/// has not happened by `horizon`.
pub fn first_connection_time(lattice: &Lattice, base_seed: u64, horizon: f64) -> f64 {
    let (mut clocks, bits) = BitClocks::new(lattice, base_seed);
    let mut d = DynLattice::new(lattice, bits);
    if d.connected() {
        return 0.0;
    }
    loop {
        let ring = clocks.next();
        if ring.time > horizon {
            return f64::INFINITY;
        }
        d.time = ring.time;
        if d.resample(ring.bit, ring.value) && d.connected() {
            return ring.time;
        }
    }
}

/// Base seed of the per-bit streams of replica `r`, shared by every radius.
fn base_seed(master: u64, replica: u64) -> u64 {
    replica_rng(master, replica).random()
}

fn ball(kind: LatticeKind, radius: usize) -> Result<Lattice> {
    Lattice::new(LatticeSpec::ball(kind, radius))
}

/// `(exp(-t/2)/2)^k` with `k` the number of bits next to the origin: all of
/// them closed throughout `[0, t]`.
pub fn fet_lower_bound(lattice: &Lattice, t: f64) -> f64 {
    (0.5 * (-t / 2.0).exp()).powi(lattice.origin_bits().len() as i32)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub window: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FetEstimate {
    pub kind: LatticeKind,
    pub radius: usize,
    pub seed: u64,
    pub replicas: usize,
    pub times: Vec<f64>,
    /// `P[no connection during [0, t]]`
    pub survival: Vec<Estimate>,
    pub lower_bound: Vec<f64>,
    pub fit: Option<ExponentialFit>,
    /// Too few positive points in the fit window.
    pub degenerate: bool,
}

impl FetEstimate {
    /// `R,t,survival,ci`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("R,t,survival,ci\n");
        out.push_str(&self.csv_rows());
        out
    }

    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for (t, s) in self.times.iter().zip(&self.survival) {
            out.push_str(&row(&[self.radius.to_string(), num(*t), num(s.mean), num(s.half_width)]));
        }
        out
    }

    /// Every point consistent with lying at or above the lower bound.
    pub fn above_lower_bound(&self) -> bool {
        self.survival.iter().zip(&self.lower_bound).all(|(s, b)| at_least(s, *b))
    }
}

pub fn simulate_fet(
    kind: LatticeKind,
    radius: usize,
    grid: &[f64],
    fit_window: (f64, f64),
    replicas: usize,
    seed: u64,
) -> Result<FetEstimate> {
    if replicas == 0 {
        return Err(Error::NoReplicas);
    }
    if grid.is_empty() || grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidParameter("grid must be nonempty, finite and nonnegative".into()));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::UnsortedTimes);
    }
    let lattice = ball(kind, radius)?;
    let horizon = *grid.last().expect("nonempty");
    let times = run_replicas(seed, replicas, |r, _| first_connection_time(&lattice, base_seed(seed, r), horizon));
    let survival: Vec<Estimate> =
        grid.iter().map(|&t| Estimate::proportion(times.iter().filter(|&&f| f > t).count(), replicas)).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = grid
        .iter()
        .zip(&survival)
        .filter(|(t, s)| **t >= fit_window.0 && **t <= fit_window.1 && s.mean > 0.0)
        .map(|(t, s)| (*t, s.mean))
        .unzip();
    let fit = loglinear_fit(&xs, &ys)
        .ok()
        .map(|f| ExponentialFit { slope: f.slope, intercept: f.intercept, r2: f.r2, window: fit_window });
    Ok(FetEstimate {
        kind,
        radius,
        seed,
        replicas,
        times: grid.to_vec(),
        lower_bound: grid.iter().map(|&t| fet_lower_bound(&lattice, t)).collect(),
        survival,
        degenerate: fit.is_none(),
        fit,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub kind: LatticeKind,
    pub radii: Vec<usize>,
    pub horizon: f64,
    pub replicas: usize,
    /// Replicas where a larger ball connected strictly earlier.
    pub violations: usize,
    /// Replicas whose first connection time was zero without starting connected, or the reverse.
    pub zero_mismatches: usize,
    /// Per radius, replicas connected at time 0.
    pub initially_connected: Vec<usize>,
    /// Per radius, mean of the first connection time capped at the horizon.
    pub mean_capped_time: Vec<f64>,
}

/// Runs every radius on the same per-bit clocks and checks that the first
/// connection time never decreases with the radius.
pub fn fet_monotone_check(kind: LatticeKind, radii: &[usize], horizon: f64, replicas: usize, seed: u64) -> Result<MonotoneReport> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("radii must be nonempty and increasing".into()));
    }
    if replicas == 0 {
        return Err(Error::NoReplicas);
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    let lattices: Vec<Lattice> = radii.iter().map(|&r| ball(kind, r)).collect::<Result<_>>()?;
    let runs = run_replicas(seed, replicas, |r, _| {
        let base = base_seed(seed, r);
        lattices
            .iter()
            .map(|lat| {
                let (_, bits) = BitClocks::new(lat, base);
                let start = DynLattice::new(lat, bits).connected();
                (start, first_connection_time(lat, base, horizon))
            })
            .collect::<Vec<_>>()
    });
    let violations = runs.iter().filter(|run| run.windows(2).any(|w| w[1].1 < w[0].1)).count();
    let zero_mismatches = runs.iter().filter(|run| run.iter().any(|(start, fet)| *start != (*fet == 0.0))).count();
    let initially_connected = (0..radii.len()).map(|i| runs.iter().filter(|run| run[i].0).count()).collect();
    let mean_capped_time = (0..radii.len())
        .map(|i| runs.iter().map(|run| run[i].1.min(horizon)).sum::<f64>() / replicas as f64)
        .collect();
    Ok(MonotoneReport {
        kind,
        radii: radii.to_vec(),
        horizon,
        replicas,
        violations,
        zero_mismatches,
        initially_connected,
        mean_capped_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynperc::lattice::Geometry;

    #[test]
    fn lower_bound_counts_origin_bits() {
        let tri = ball(LatticeKind::TriSite, 3).unwrap();
        let sq = ball(LatticeKind::Z2Bond, 3).unwrap();
        assert_eq!(fet_lower_bound(&tri, 0.0), 0.5f64.powi(6));
        assert_eq!(fet_lower_bound(&sq, 2.0), (0.5 * (-1.0f64).exp()).powi(4));
    }

    #[test]
    fn survival_is_nonincreasing_and_above_lower_bound() {
        let grid: Vec<f64> = (0..=6).map(|i| i as f64 * 0.5).collect();
        let est = simulate_fet(LatticeKind::TriSite, 4, &grid, (0.5, 3.0), 400, 7).unwrap();
        assert!(est.survival.windows(2).all(|w| w[1].mean <= w[0].mean));
        assert!(est.above_lower_bound());
        assert!(est.to_csv().starts_with("R,t,survival,ci\n4,"));
    }

    #[test]
    fn monotone_in_radius() {
        for kind in [LatticeKind::TriSite, LatticeKind::Z2Bond] {
            let r = fet_monotone_check(kind, &[2, 3, 5], 5.0, 200, 8).unwrap();
            assert_eq!(r.violations, 0);
            assert_eq!(r.zero_mismatches, 0);
            assert!(r.initially_connected.windows(2).all(|w| w[1] <= w[0]));
        }
        assert!(fet_monotone_check(LatticeKind::TriSite, &[3, 2], 1.0, 1, 1).is_err());
    }

    #[test]
    fn crossing_geometry_is_not_a_ball() {
        assert_eq!(ball(LatticeKind::Z2Bond, 3).unwrap().spec.geometry, Geometry::Ball);
    }
}
