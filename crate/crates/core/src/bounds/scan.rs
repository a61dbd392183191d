//! Search over random reversible chains comparing the exponential rate of
//! pairwise decorrelation with the exponential rate of the exit tail.
//!
//! A small `exit_rate / decorrelation_rate` means the chain keeps the event
//! much longer than its decorrelation alone would suggest.

use serde::{Deserialize, Serialize};

use crate::bounds::exit::exit_tail_on_grid;
use crate::chain::{EventSet, ReversibleChain};
use crate::ensemble;
use crate::error::Result;
use crate::fit::loglinear_fit;
use crate::replica::replica_rng;
use crate::spectral::{decorrelation_curve, EvalMode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub instances: usize,
    pub min_states: usize,
    pub max_states: usize,
    pub density: f64,
    /// Largest time used by both fits.
    pub t_max: u64,
    pub p_range: (f64, f64),
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec { instances: 200, min_states: 2, max_states: 10, density: 0.4, t_max: 60, p_range: (0.05, 0.9) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateComparison {
    /// `c` in `d(t) ~ exp(-c t)`; `None` when `d` vanishes on the grid (infinite rate).
    pub decorrelation_rate: Option<f64>,
    /// `c'` in `P[exit after t] ~ exp(-c' t)`.
    pub exit_rate: Option<f64>,
    /// `c'/c`, reported as 0 when the decorrelation rate is infinite.
    pub ratio: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanInstance {
    pub index: usize,
    pub states: usize,
    pub p: f64,
    #[serde(flatten)]
    pub rates: RateComparison,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub seed: u64,
    pub spec: ScanSpec,
    pub instances: Vec<ScanInstance>,
    /// Smallest finite ratio and the instance it came from.
    pub worst_ratio: Option<f64>,
    pub worst_index: Option<usize>,
}

/// Normalized variances below this are rounding noise of an exact zero.
pub const DECORRELATION_FLOOR: f64 = 1e-24;

/// Fits both rates over the upper half of `0..=t_max`.
pub fn compare_rates(chain: &ReversibleChain, event: &EventSet, t_max: u64) -> Result<RateComparison> {
    let mut notes = Vec::new();
    let curve = decorrelation_curve(chain, event, t_max, EvalMode::Envelope)?;
    let lo = t_max as f64 / 2.0;
    let points = |from: f64| -> (Vec<f64>, Vec<f64>) {
        curve
            .times
            .iter()
            .zip(&curve.values)
            .filter(|(t, d)| **t >= from && **t > 0.0 && **d > DECORRELATION_FLOOR)
            .map(|(t, d)| (*t, *d))
            .unzip()
    };
    let (mut dx, mut dy) = points(lo);
    if dx.len() < 2 {
        (dx, dy) = points(0.0);
    }
    let decorrelation_rate = if dx.len() < 2 {
        None
    } else {
        match loglinear_fit(&dx, &dy) {
            Ok(f) => Some(-f.slope),
            Err(e) => {
                notes.push(format!("decorrelation fit: {e}"));
                None
            }
        }
    };
    let grid: Vec<u64> = (0..=t_max).collect();
    let tail = exit_tail_on_grid(chain, event, &grid)?;
    let (ex, ey): (Vec<f64>, Vec<f64>) = tail
        .times
        .iter()
        .zip(&tail.values)
        .filter(|(t, _)| **t as f64 >= lo)
        .map(|(t, v)| (*t as f64, *v))
        .unzip();
    let exit_rate = match loglinear_fit(&ex, &ey) {
        Ok(f) => Some(-f.slope),
        Err(e) => {
            notes.push(format!("exit fit: {e}"));
            None
        }
    };
    let ratio = match (decorrelation_rate, exit_rate) {
        (None, Some(_)) if notes.is_empty() => Some(0.0),
        (Some(c), Some(e)) if c > 0.0 => Some(e / c),
        _ => None,
    };
    let note = (!notes.is_empty()).then(|| notes.join("; "));
    Ok(RateComparison { decorrelation_rate, exit_rate, ratio, note })
}

/// Runs the scan; instance `i` draws from replica stream `i` of `seed`.
pub fn counterexample_scan(spec: &ScanSpec, seed: u64) -> Result<ScanReport> {
    let mut instances = Vec::with_capacity(spec.instances);
    for index in 0..spec.instances {
        let mut rng = replica_rng(seed, index as u64);
        let states = if spec.max_states > spec.min_states {
            rand::Rng::random_range(&mut rng, spec.min_states..=spec.max_states)
        } else {
            spec.min_states
        };
        let chain = ensemble::random_chain(&mut rng, states, spec.density);
        let Some(event) = ensemble::random_event(&mut rng, chain.pi(), spec.p_range.0, spec.p_range.1) else {
            instances.push(ScanInstance {
                index,
                states,
                p: f64::NAN,
                rates: RateComparison {
                    decorrelation_rate: None,
                    exit_rate: None,
                    ratio: None,
                    note: Some("no event with mass in range".into()),
                },
            });
            continue;
        };
        let rates = compare_rates(&chain, &event, spec.t_max)?;
        instances.push(ScanInstance { index, states, p: event.mass(), rates });
    }
    let worst = instances
        .iter()
        .filter_map(|i| i.rates.ratio.filter(|r| r.is_finite() && *r > 0.0).map(|r| (r, i.index)))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    Ok(ScanReport {
        seed,
        spec: spec.clone(),
        instances,
        worst_ratio: worst.map(|w| w.0),
        worst_index: worst.map(|w| w.1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn iid_chain_has_infinite_decorrelation_rate() {
        let c = ReversibleChain::from_rows(&[vec![0.4, 0.6], vec![0.4, 0.6]], None).unwrap();
        let ev = c.event_from_states(&[1]).unwrap();
        let r = compare_rates(&c, &ev, 40).unwrap();
        assert_eq!(r.decorrelation_rate, None);
        assert_abs_diff_eq!(r.exit_rate.unwrap(), -(0.6f64.ln()), epsilon = 1e-10);
        assert_eq!(r.ratio, Some(0.0));
    }

    #[test]
    fn two_state_rates_in_closed_form() {
        let (a, b) = (0.2, 0.15);
        let c = ReversibleChain::from_rows(&[vec![1.0 - a, a], vec![b, 1.0 - b]], None).unwrap();
        let ev = c.event_from_states(&[1]).unwrap();
        let r = compare_rates(&c, &ev, 40).unwrap();
        let rate = -(1.0f64 - a - b).abs().ln();
        let exit = -(1.0f64 - b).ln();
        assert_abs_diff_eq!(r.decorrelation_rate.unwrap(), rate, epsilon = 1e-9);
        assert_abs_diff_eq!(r.exit_rate.unwrap(), exit, epsilon = 1e-9);
        assert_abs_diff_eq!(r.ratio.unwrap(), exit / rate, epsilon = 1e-8);
    }

    #[test]
    fn scan_is_deterministic() {
        let spec = ScanSpec { instances: 6, ..ScanSpec::default() };
        let a = counterexample_scan(&spec, 17).unwrap();
        let b = counterexample_scan(&spec, 17).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.worst_ratio.is_some());
    }
}
