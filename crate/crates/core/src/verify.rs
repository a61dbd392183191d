//! Exact property suite over randomized chains and generators: the exit-tail
//! bound, its intermediate steps, the product bound for separated events,
//! the projection and two-function inequalities, and the heat-kernel bounds.
//!
//! Both sides of every comparison are computed exactly, so the only slack is
//! [`ROUNDING`], a few units in the last place of a probability.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    aksz_bound, aksz_interval_mc, aksz_joint_exact, complement_mass_check, exit_tail_on_grid, lambda_recursion_check,
    tmain_bound, two_term_check, BoundConstant, TmainOptions, WindowEvent, WindowKind,
};
use crate::chain::{EventSet, GeneratorChain, ReversibleChain};
use crate::ensemble;
use crate::error::Result;
use crate::fit::log_grid;
use crate::replica::replica_rng;
use crate::spectral::{
    decorrelation_curve, easyfact_check, generator_spectrum, projection_product_bound, projection_product_norm, EvalMode,
};
use crate::walks::{build_conductance_walk, carne_varopoulos_sweep, srw_hitting_check, ConductanceWalkSpec};
use crate::bounds::aksz::IntervalMc;

/// Absolute allowance for floating-point rounding when both sides are exact.
pub const ROUNDING: f64 = 16.0 * f64::EPSILON;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub seed: u64,
    pub instances: usize,
    pub max_states: usize,
    pub max_generator_states: usize,
    pub p_range: (f64, f64),
    pub horizon: u64,
    pub max_events: usize,
    pub pair_chains: usize,
    pub pairs_per_chain: usize,
    pub mc_instances: usize,
    pub mc_replicas: usize,
    pub heat_kernel_steps: u64,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        SuiteSpec {
            seed: 20_240_601,
            instances: 200,
            max_states: 10,
            max_generator_states: 12,
            p_range: (0.05, 0.9),
            horizon: 50,
            max_events: 6,
            pair_chains: 50,
            pairs_per_chain: 1000,
            mc_instances: 30,
            mc_replicas: 20_000,
            heat_kernel_steps: 50,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Property {
    pub name: String,
    pub checked: usize,
    pub violations: usize,
    /// Comparisons that failed strictly but within [`ROUNDING`].
    pub rounding_ties: usize,
    /// Smallest `rhs - lhs` over all comparisons.
    pub worst_slack: f64,
    /// First few violations, for the error record.
    pub examples: Vec<String>,
}

impl Property {
    fn new(name: &str) -> Self {
        Property { name: name.to_string(), worst_slack: f64::INFINITY, ..Default::default() }
    }

    fn record(&mut self, lhs: f64, rhs: f64, what: impl FnOnce() -> String) {
        self.checked += 1;
        self.worst_slack = self.worst_slack.min(rhs - lhs);
        if lhs <= rhs {
            return;
        }
        if lhs <= rhs + ROUNDING {
            self.rounding_ties += 1;
        } else {
            self.violations += 1;
            if self.examples.len() < 5 {
                self.examples.push(what());
            }
        }
    }

    fn flag(&mut self, holds: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !holds {
            self.violations += 1;
            if self.examples.len() < 5 {
                self.examples.push(what());
            }
        }
    }

    pub fn pass(&self) -> bool {
        self.violations == 0 && self.checked > 0
    }
}

/// Chain and event of instance `index`, redrawn until the event mass fits.
pub fn chain_instance(spec: &SuiteSpec, index: usize) -> (ReversibleChain, EventSet) {
    let mut attempt = 0u64;
    loop {
        let mut rng = replica_rng(spec.seed, (index as u64) << 16 | attempt);
        let n = rng.random_range(2..=spec.max_states);
        let chain = ensemble::random_chain(&mut rng, n, 0.4);
        if let Some(event) = ensemble::random_event(&mut rng, chain.pi(), spec.p_range.0, spec.p_range.1) {
            return (chain, event);
        }
        attempt += 1;
    }
}

fn generator_instance(rng: &mut ChaCha8Rng, max_states: usize) -> GeneratorChain {
    let n = rng.random_range(2..=max_states);
    ensemble::random_generator(rng, n, 0.4)
}

fn proper_event(rng: &mut ChaCha8Rng, pi: &[f64], lo: f64) -> EventSet {
    loop {
        if let Some(e) = ensemble::random_event(rng, pi, lo, 0.95) {
            return e;
        }
    }
}

fn stream(spec: &SuiteSpec, tag: u64, index: usize) -> ChaCha8Rng {
    replica_rng(spec.seed ^ tag, index as u64)
}

/// Exit tail against the bound at every integer time up to the horizon,
/// with both curve modes and both constants.
pub fn tail_bound_property(spec: &SuiteSpec) -> Result<Property> {
    let mut prop = Property::new("exit tail below the decorrelation bound");
    let variants = [
        (EvalMode::Envelope, BoundConstant::Published),
        (EvalMode::ExactAtIntegers, BoundConstant::Published),
        (EvalMode::Envelope, BoundConstant::Proof),
    ];
    let grid: Vec<u64> = (1..=spec.horizon).collect();
    for i in 0..spec.instances {
        let (chain, event) = chain_instance(spec, i);
        let tail = exit_tail_on_grid(&chain, &event, &grid)?;
        for (mode, constant) in variants {
            let curve = decorrelation_curve(&chain, &event, 2 * spec.horizon, mode)?;
            let options = TmainOptions { constant, ..TmainOptions::default() };
            for (&t, &value) in tail.times.iter().zip(&tail.values) {
                let report = tmain_bound(event.mass(), &curve, t as f64, &options)?;
                prop.record(value, report.bound, || format!("instance {i} t={t} {mode:?} {constant:?}"));
            }
        }
    }
    Ok(prop)
}

/// Complement mass, lambda recursion and two-term inequalities, at the
/// midpoint lambda and one random lambda per instance.
pub fn proof_step_property(spec: &SuiteSpec) -> Result<Property> {
    let mut prop = Property::new("intermediate steps of the exit-tail bound");
    for i in 0..spec.instances {
        let (chain, event) = chain_instance(spec, i);
        let p = event.mass();
        let mut rng = stream(spec, 0x2, i);
        let lambdas = [(p + 1.0) / 2.0, p + (1.0 - p) * rng.random_range(0.1..0.9)];
        for lambda in lambdas {
            for s in 1..=25 {
                let m = complement_mass_check(&chain, &event, s, lambda)?;
                prop.record(m.mass, m.bound, || format!("mass instance {i} s={s} lambda={lambda}"));
            }
            for tau in [1, 2, 3, 5, 8] {
                for m in 0..=8 {
                    let r = lambda_recursion_check(&chain, &event, tau, lambda, m)?;
                    prop.record(r.entry_path, r.entry_bound, || format!("entry instance {i} tau={tau} m={m}"));
                    prop.record(r.stay_path, r.stay_bound, || format!("stay instance {i} tau={tau} m={m}"));
                }
                for k in 1..=10 {
                    let r = two_term_check(&chain, &event, tau, lambda, k)?;
                    prop.record(r.tail, r.bound, || format!("two-term instance {i} tau={tau} k={k}"));
                }
            }
        }
    }
    Ok(prop)
}

/// Joint probability of single-time events against the product bound, with
/// 2 to `max_events` events at random separations.
pub fn product_bound_property(spec: &SuiteSpec) -> Result<Property> {
    let mut prop = Property::new("separated events below the product bound");
    for i in 0..spec.instances {
        let mut rng = stream(spec, 0x3, i);
        let generator = generator_instance(&mut rng, spec.max_generator_states);
        let delta = generator_spectrum(&generator).gap();
        let k = rng.random_range(2..=spec.max_events.max(2));
        let mut time = 0.0;
        let mut events = Vec::with_capacity(k);
        for j in 0..k {
            if j > 0 {
                time += rng.random_range(0.01..2.0);
            }
            events.push((proper_event(&mut rng, generator.pi(), spec.p_range.0), time));
        }
        let probs: Vec<f64> = events.iter().map(|(e, _)| e.mass()).collect();
        let gaps: Vec<f64> = events.windows(2).map(|w| w[1].1 - w[0].1).collect();
        let joint = aksz_joint_exact(&generator, &events)?;
        let bound = aksz_bound(&probs, delta, &gaps)?.value;
        prop.record(joint, bound, || format!("instance {i} with {k} events"));
    }
    Ok(prop)
}

/// Monte Carlo runs for events on time windows, continual or sampled.
pub fn window_mc_runs(spec: &SuiteSpec) -> Result<Vec<IntervalMc>> {
    (0..spec.mc_instances)
        .map(|i| {
            let mut rng = stream(spec, 0x33, i);
            let generator = generator_instance(&mut rng, 8);
            let count = rng.random_range(2..=4);
            let mut clock = 0.0;
            let mut windows = Vec::with_capacity(count);
            for j in 0..count {
                if j > 0 {
                    clock += rng.random_range(0.0..1.0);
                }
                let start = clock;
                clock += rng.random_range(0.0..1.0);
                let kind = if rng.random::<bool>() {
                    WindowKind::Continual
                } else {
                    WindowKind::Sampled { points: rng.random_range(1..=5) }
                };
                let set = proper_event(&mut rng, generator.pi(), spec.p_range.0);
                windows.push(WindowEvent { set, start, end: clock, kind });
            }
            aksz_interval_mc(&generator, &windows, spec.mc_replicas, spec.seed.wrapping_add(i as u64))
        })
        .collect()
}

pub fn window_mc_property(runs: &[IntervalMc]) -> Property {
    let mut prop = Property::new("window events consistent with the product bound (3 sigma)");
    for (i, mc) in runs.iter().enumerate() {
        prop.flag(mc.consistent, || format!("instance {i}: estimate {} bound {}", mc.estimate.mean, mc.bound));
    }
    prop
}

/// Projection-product norm and the two-function inequality on random pairs.
pub fn projection_property(spec: &SuiteSpec) -> Result<(Property, Property)> {
    let mut norm = Property::new("projection product norm below its bound");
    let mut fact = Property::new("two-function covariance inequality");
    for c in 0..spec.pair_chains {
        let mut rng = stream(spec, 0x4, c);
        let generator = generator_instance(&mut rng, spec.max_generator_states);
        let delta = generator_spectrum(&generator).gap();
        let n = rng.random_range(2..=spec.max_states);
        let chain = ensemble::random_chain(&mut rng, n, 0.4);
        for j in 0..spec.pairs_per_chain {
            let c1 = proper_event(&mut rng, generator.pi(), spec.p_range.0);
            let c2 = proper_event(&mut rng, generator.pi(), spec.p_range.0);
            let t = rng.random_range(0.0..3.0);
            let value = projection_product_norm(&generator, &c1, &c2, t)?;
            let bound = projection_product_bound(c1.mass(), c2.mass(), delta, t);
            norm.record(value, bound, || format!("chain {c} pair {j} t={t}"));
            let g1 = ensemble::random_unit_ball(&mut rng, chain.pi());
            let g2 = ensemble::random_unit_ball(&mut rng, chain.pi());
            let r = easyfact_check(&chain, &g1, &g2)?;
            fact.flag(r.holds, || format!("chain {c} pair {j}: {} > {}", r.lhs, r.rhs));
        }
    }
    Ok((norm, fact))
}

/// Heat-kernel Gaussian bound on a small conductance walk and random chains,
/// and the staying-positive bound for simple random walk.
pub fn heat_kernel_property(spec: &SuiteSpec) -> Result<(Property, Property)> {
    let mut heat = Property::new("heat kernel below the Gaussian bound");
    let walk = build_conductance_walk(&ConductanceWalkSpec::new(1.5, 100))?;
    let mut add = |sweep: crate::walks::HeatKernelSweep, label: String| {
        heat.checked += sweep.checked;
        heat.violations += sweep.violations;
        heat.worst_slack = heat.worst_slack.min(sweep.worst_margin);
        if sweep.violations > 0 && heat.examples.len() < 5 {
            heat.examples.push(label);
        }
    };
    add(carne_varopoulos_sweep(&walk, spec.heat_kernel_steps), "conductance walk".into());
    for c in 0..spec.pair_chains {
        let mut rng = stream(spec, 0x7, c);
        let n = rng.random_range(2..=spec.max_states);
        let chain = ensemble::random_chain(&mut rng, n, 0.3);
        add(carne_varopoulos_sweep(&chain, spec.heat_kernel_steps), format!("random chain {c}"));
    }
    let mut srw = Property::new("simple random walk stays positive with the stated bound");
    for a in 1..=10 {
        for t in log_grid(4, 4096, 25) {
            let r = srw_hitting_check(a, t)?;
            srw.record(r.exact, r.bound, || format!("a={a} t={t}"));
        }
    }
    Ok((heat, srw))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub spec: SuiteSpec,
    pub properties: Vec<Property>,
    pub window_runs: Vec<IntervalMc>,
    pub pass: bool,
}

/// Every property of the suite.
pub fn run_suite(spec: &SuiteSpec) -> Result<SuiteReport> {
    let window_runs = window_mc_runs(spec)?;
    let (norm, fact) = projection_property(spec)?;
    let (heat, srw) = heat_kernel_property(spec)?;
    let properties = vec![
        tail_bound_property(spec)?,
        proof_step_property(spec)?,
        product_bound_property(spec)?,
        window_mc_property(&window_runs),
        norm,
        fact,
        heat,
        srw,
    ];
    let pass = properties.iter().all(Property::pass);
    Ok(SuiteReport { spec: spec.clone(), properties, window_runs, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteSpec {
        SuiteSpec {
            instances: 6,
            horizon: 12,
            pair_chains: 3,
            pairs_per_chain: 20,
            mc_instances: 2,
            mc_replicas: 500,
            heat_kernel_steps: 8,
            ..SuiteSpec::default()
        }
    }

    #[test]
    fn small_suite_passes_and_repeats() {
        let a = run_suite(&small()).unwrap();
        assert!(a.pass, "{:?}", a.properties);
        assert!(a.properties.iter().all(|p| p.checked > 0));
        let b = run_suite(&small()).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn rounding_ties_are_counted_apart() {
        let mut p = Property::new("x");
        p.record(0.5 + f64::EPSILON, 0.5, String::new);
        p.record(0.6, 0.5, || "big".into());
        p.record(0.1, 0.5, String::new);
        assert_eq!((p.checked, p.rounding_ties, p.violations), (3, 1, 1));
        assert_eq!(p.examples, vec!["big".to_string()]);
        assert!(!p.pass());
    }
}
