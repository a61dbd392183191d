//! Replica experiments on the left-right crossing event. Time is scaled:
//! every bit rings at `rate` (usually one over the mean pivotal count) and
//! resamples to a fresh fair bit.

use serde::{Deserialize, Serialize};

use super::dynamics::{fair_bits, AggregateClock, DynLattice};
use super::lattice::{Geometry, Lattice};
use super::oracle::{crosses, largest_cluster};
use crate::error::{Error, Result};
use crate::fit::{loglog_fit, LinearFit};
use crate::replica::run_replicas;
use crate::report::{num, row};
use crate::stats::{covariance, difference, Estimate};

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("time grid is empty".into()));
    }
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidParameter("grid times must be finite and nonnegative".into()));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::UnsortedTimes);
    }
    Ok(())
}

fn check_common(lattice: &Lattice, rate: f64, replicas: usize) -> Result<()> {
    if lattice.spec.geometry != Geometry::Crossing {
        return Err(Error::InvalidParameter("crossing experiments need a crossing geometry".into()));
    }
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::InvalidParameter(format!("clock rate must be finite and nonnegative, got {rate}")));
    }
    if replicas == 0 {
        return Err(Error::NoReplicas);
    }
    Ok(())
}

/// One ring as written to an audit log.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub replica: u64,
    pub time: f64,
    pub bit: usize,
    pub value: bool,
}

/// `replica,event_time,bit,new_value` lines.
pub fn event_log_csv(records: &[EventRecord]) -> String {
    let mut out = String::from("replica,event_time,bit,new_value\n");
    for r in records {
        out.push_str(&row(&[r.replica.to_string(), num(r.time), r.bit.to_string(), (r.value as u8).to_string()]));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalEstimate {
    pub seed: u64,
    pub replicas: usize,
    pub rate: f64,
    pub times: Vec<f64>,
    /// `P[crossing at every s in [0, t]]`
    pub survival: Vec<Estimate>,
    /// Replicas crossing at time 0.
    pub initially_crossing: usize,
    pub survived: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub events: Option<Vec<EventRecord>>,
}

impl SurvivalEstimate {
    /// Survival to `times[i]` among replicas crossing at time 0.
    pub fn conditional(&self, i: usize) -> Estimate {
        Estimate::proportion(self.survived[i], self.initially_crossing)
    }

    /// `t,survival,ci` with the 95% half-width.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,survival,ci\n");
        for (t, s) in self.times.iter().zip(&self.survival) {
            out.push_str(&row(&[num(*t), num(s.mean), num(s.half_width)]));
        }
        out
    }
}

/// Time at which the crossing first fails, `None` if absent at time 0 and
/// infinity if it holds up to `horizon`. The status can only change at a
/// flip, so checking after every flip is exact.
fn crossing_lifetime(
    lattice: &Lattice,
    rate: f64,
    horizon: f64,
    rng: &mut rand_chacha::ChaCha8Rng,
    log: Option<(&mut Vec<EventRecord>, u64)>,
) -> Option<f64> {
    let mut d = DynLattice::new(lattice, fair_bits(rng, lattice.bits()));
    if !d.connected() {
        return None;
    }
    let clock = AggregateClock { rate, bits: lattice.bits() };
    let mut log = log;
    while let Some(ring) = clock.next(rng, d.time) {
        if ring.time > horizon {
            break;
        }
        d.time = ring.time;
        if let Some((records, replica)) = log.as_mut() {
            records.push(EventRecord { replica: *replica, time: ring.time, bit: ring.bit, value: ring.value });
        }
        if d.resample(ring.bit, ring.value) && !d.connected() {
            return Some(ring.time);
        }
    }
    Some(f64::INFINITY)
}

pub fn simulate_survival(
    lattice: &Lattice,
    rate: f64,
    grid: &[f64],
    replicas: usize,
    seed: u64,
    record_events: bool,
) -> Result<SurvivalEstimate> {
    check_common(lattice, rate, replicas)?;
    check_grid(grid)?;
    let horizon = *grid.last().expect("grid checked nonempty");
    if horizon <= 0.0 {
        return Err(Error::InvalidParameter(format!("largest time must be positive, got {horizon}")));
    }
    let runs = run_replicas(seed, replicas, |r, rng| {
        let mut records = Vec::new();
        let life = crossing_lifetime(lattice, rate, horizon, rng, record_events.then_some((&mut records, r)));
        (life, records)
    });
    let initially_crossing = runs.iter().filter(|(l, _)| l.is_some()).count();
    let survived: Vec<usize> = grid
        .iter()
        .map(|&t| runs.iter().filter(|(l, _)| l.is_some_and(|l| l > t)).count())
        .collect();
    let survival = survived.iter().map(|&s| Estimate::proportion(s, replicas)).collect();
    let events = record_events.then(|| runs.into_iter().flat_map(|(_, r)| r).collect());
    Ok(SurvivalEstimate {
        seed,
        replicas,
        rate,
        times: grid.to_vec(),
        survival,
        initially_crossing,
        survived,
        events,
    })
}

/// `(1/4)^{ceil(2t)}`
pub fn survival_lower_bound(t: f64) -> f64 {
    0.25f64.powi((2.0 * t).ceil() as i32)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxReport {
    pub rate: f64,
    pub horizon: f64,
    /// Crossing-status changes per unit time.
    pub changes_per_time: Estimate,
}

/// Counts status changes in both directions over `[0, horizon]` from a
/// stationary start.
pub fn pivotal_flux_calibration(lattice: &Lattice, rate: f64, horizon: f64, replicas: usize, seed: u64) -> Result<FluxReport> {
    check_common(lattice, rate, replicas)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    let counts = run_replicas(seed, replicas, |_, rng| {
        let mut d = DynLattice::new(lattice, fair_bits(rng, lattice.bits()));
        let clock = AggregateClock { rate, bits: lattice.bits() };
        let mut status = d.connected();
        let mut changes = 0usize;
        while let Some(ring) = clock.next(rng, d.time) {
            if ring.time > horizon {
                break;
            }
            d.time = ring.time;
            if d.resample(ring.bit, ring.value) && d.connected() != status {
                status = !status;
                changes += 1;
            }
        }
        changes as f64 / horizon
    });
    Ok(FluxReport { rate, horizon, changes_per_time: Estimate::from_values(&counts) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecorrelationEstimate {
    pub seed: u64,
    pub replicas: usize,
    pub rate: f64,
    pub times: Vec<f64>,
    /// `P[crossing at 0 and at t] - P[crossing]^2`
    pub corr: Vec<Estimate>,
    pub crossing: Estimate,
}

impl DecorrelationEstimate {
    /// `t,corr,ci`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,corr,ci\n");
        for (t, c) in self.times.iter().zip(&self.corr) {
            out.push_str(&row(&[num(*t), num(c.mean), num(c.half_width)]));
        }
        out
    }

    /// Nonincreasing up to overlapping 95% intervals of consecutive points.
    pub fn nonincreasing_within_ci(&self) -> bool {
        self.corr.windows(2).all(|w| w[1].mean - w[1].half_width <= w[0].mean + w[0].half_width)
    }

    /// Log-log fit over grid points in `[lo, hi]` with positive correlation.
    pub fn slope(&self, lo: f64, hi: f64) -> Result<LinearFit> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .times
            .iter()
            .zip(&self.corr)
            .filter(|(t, c)| **t >= lo && **t <= hi && c.mean > 0.0)
            .map(|(t, c)| (*t, c.mean))
            .unzip();
        loglog_fit(&xs, &ys)
    }

    /// Normalized curve `corr / (p - p^2)` made conservative: each point is
    /// raised by its half-width, capped to `[0, 1]`, and replaced by the
    /// largest later value so it is nonincreasing; `d(0) = 1`.
    pub fn upper_envelope(&self) -> (Vec<f64>, Vec<f64>) {
        let p = self.crossing.mean;
        let var = p - p * p;
        let mut times = vec![0.0];
        let mut values = vec![1.0];
        for (t, c) in self.times.iter().zip(&self.corr) {
            if *t > 0.0 {
                times.push(*t);
                values.push(((c.mean + c.half_width) / var).clamp(0.0, 1.0));
            }
        }
        for i in (0..values.len() - 1).rev() {
            values[i] = values[i].max(values[i + 1]);
        }
        (times, values)
    }
}

/// Crossing status at each grid time; flips between grid points need no
/// connectivity tracking.
pub fn estimate_decorrelation(lattice: &Lattice, rate: f64, grid: &[f64], replicas: usize, seed: u64) -> Result<DecorrelationEstimate> {
    check_common(lattice, rate, replicas)?;
    check_grid(grid)?;
    let net = lattice.primal();
    let runs = run_replicas(seed, replicas, |_, rng| {
        let mut bits = fair_bits(rng, lattice.bits());
        let start = crosses(net, &bits);
        let clock = AggregateClock { rate, bits: lattice.bits() };
        let mut now = 0.0;
        let mut pending = clock.next(rng, now);
        let mut status = Vec::with_capacity(grid.len());
        for &t in grid {
            while let Some(ring) = pending.filter(|r| r.time <= t) {
                bits[ring.bit] = ring.value;
                now = ring.time;
                pending = clock.next(rng, now);
            }
            status.push(crosses(net, &bits));
        }
        (start, status)
    });
    let x0: Vec<f64> = runs.iter().map(|(s, _)| *s as u8 as f64).collect();
    let corr = (0..grid.len())
        .map(|i| {
            let xt: Vec<f64> = runs.iter().map(|(_, s)| s[i] as u8 as f64).collect();
            covariance(&x0, &xt)
        })
        .collect();
    Ok(DecorrelationEstimate {
        seed,
        replicas,
        rate,
        times: grid.to_vec(),
        corr,
        crossing: Estimate::from_values(&x0),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conditioning {
    /// Crossing at every time in `[0, t]`.
    Crossing,
    /// No conditioning; both samples coincide.
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domination {
    pub statistic: String,
    pub conditioned: Estimate,
    pub unconditioned: Estimate,
    /// Survivors minus the replicas that failed the condition.
    pub difference: Estimate,
    /// `difference >= -3 sigma`
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FkgReport {
    pub t: f64,
    pub conditioning: Conditioning,
    pub replicas: usize,
    pub survivors: usize,
    pub statistics: Vec<Domination>,
    /// Fewer than [`FKG_MIN_SURVIVORS`] replicas met the condition.
    pub inconclusive: bool,
    pub holds: bool,
}

pub const FKG_MIN_SURVIVORS: usize = 100;

/// Compares increasing statistics of the time-`t` configuration among
/// replicas meeting the condition with the same statistics over all replicas.
pub fn fkg_domination_test(
    lattice: &Lattice,
    rate: f64,
    t: f64,
    replicas: usize,
    seed: u64,
    conditioning: Conditioning,
) -> Result<FkgReport> {
    check_common(lattice, rate, replicas)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::NegativeTime(t));
    }
    let net = lattice.primal();
    let vertices = net.vertices() as f64;
    let runs = run_replicas(seed, replicas, |_, rng| {
        let mut d = DynLattice::new(lattice, fair_bits(rng, lattice.bits()));
        let mut alive = d.connected();
        let clock = AggregateClock { rate, bits: lattice.bits() };
        while let Some(ring) = clock.next(rng, d.time) {
            if ring.time > t {
                break;
            }
            d.time = ring.time;
            if d.resample(ring.bit, ring.value) && alive && !d.connected() {
                alive = false;
            }
        }
        let kept = match conditioning {
            Conditioning::Crossing => alive,
            Conditioning::Full => true,
        };
        let open = d.open_fraction();
        let cluster = largest_cluster(net, d.bits()) as f64 / vertices;
        (kept, [open, cluster])
    });
    let survivors = runs.iter().filter(|(k, _)| *k).count();
    let names = ["open_fraction", "largest_cluster_fraction"];
    let statistics: Vec<Domination> = names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let all: Vec<f64> = runs.iter().map(|(_, s)| s[i]).collect();
            let kept: Vec<f64> = runs.iter().filter(|(k, _)| *k).map(|(_, s)| s[i]).collect();
            let rest: Vec<f64> = runs.iter().filter(|(k, _)| !*k).map(|(_, s)| s[i]).collect();
            let conditioned = Estimate::from_values(&kept);
            let unconditioned = Estimate::from_values(&all);
            let diff = if rest.is_empty() {
                Estimate { mean: 0.0, sigma: 0.0, half_width: 0.0, samples: replicas }
            } else {
                difference(&conditioned, &Estimate::from_values(&rest))
            };
            Domination {
                statistic: name.to_string(),
                conditioned,
                unconditioned,
                difference: diff,
                holds: diff.mean >= -3.0 * diff.sigma,
            }
        })
        .collect();
    let inconclusive = survivors < FKG_MIN_SURVIVORS;
    let holds = !inconclusive && statistics.iter().all(|s| s.holds);
    Ok(FkgReport { t, conditioning, replicas, survivors, statistics, inconclusive, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynperc::lattice::{LatticeKind, LatticeSpec};

    fn tri(n: usize) -> Lattice {
        Lattice::new(LatticeSpec::crossing(LatticeKind::TriSite, n)).unwrap()
    }

    #[test]
    fn survival_starts_at_crossing_probability() {
        let lat = tri(8);
        let est = simulate_survival(&lat, 0.2, &[0.0, 0.5, 1.0], 2000, 1, false).unwrap();
        let s0 = est.survival[0];
        assert!((s0.mean - 0.5).abs() <= 3.0 * s0.sigma);
        assert_eq!(est.survived[0], est.initially_crossing);
        assert!(est.survived.windows(2).all(|w| w[1] <= w[0]));
        assert!(simulate_survival(&lat, 0.2, &[0.0], 10, 1, false).is_err());
        assert!(simulate_survival(&lat, 0.2, &[1.0, 0.5], 10, 1, false).is_err());
    }

    #[test]
    fn event_log_covers_every_ring() {
        let lat = tri(4);
        let est = simulate_survival(&lat, 1.0, &[0.5], 20, 2, true).unwrap();
        let log = est.events.unwrap();
        assert!(log.windows(2).all(|w| w[0].replica < w[1].replica || w[0].time < w[1].time));
        assert!(event_log_csv(&log).starts_with("replica,event_time,bit,new_value\n"));
    }

    #[test]
    fn flux_vanishes_without_clocks() {
        let lat = tri(6);
        let f = pivotal_flux_calibration(&lat, 0.0, 1.0, 50, 3).unwrap();
        assert_eq!(f.changes_per_time.mean, 0.0);
    }

    #[test]
    fn decorrelation_at_zero_is_the_variance() {
        let lat = tri(8);
        let d = estimate_decorrelation(&lat, 0.3, &[0.0, 1.0, 4.0], 3000, 4).unwrap();
        let c0 = d.corr[0];
        assert!((c0.mean - 0.25).abs() <= 3.0 * c0.sigma.max(1e-3));
        assert!(d.nonincreasing_within_ci());
        let (times, values) = d.upper_envelope();
        assert_eq!(times[0], 0.0);
        assert!(values.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn full_conditioning_keeps_everyone() {
        let lat = tri(6);
        let r = fkg_domination_test(&lat, 0.5, 1.0, 200, 5, Conditioning::Full).unwrap();
        assert_eq!(r.survivors, 200);
        for s in &r.statistics {
            assert_eq!(s.conditioned, s.unconditioned);
        }
        let r = fkg_domination_test(&lat, 0.5, 0.0, 400, 5, Conditioning::Crossing).unwrap();
        assert!(r.statistics[0].conditioned.mean > 0.5);
        let r = fkg_domination_test(&lat, 0.5, 1.0, 50, 5, Conditioning::Crossing).unwrap();
        assert!(r.inconclusive && !r.holds);
    }

    #[test]
    fn lower_bound_steps() {
        assert_eq!(survival_lower_bound(0.0), 1.0);
        assert_eq!(survival_lower_bound(0.5), 0.25);
        assert_eq!(survival_lower_bound(0.6), 0.0625);
    }
}
