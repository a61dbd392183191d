use std::path::Path;

use serde_json::json;

use exit_tail::bounds::{
    aksz_bound, aksz_interval_mc, aksz_joint_exact, counterexample_scan, exit_tail_on_grid, tmain_bound, BoundConstant,
    ScanSpec, TmainOptions, WindowEvent, WindowKind,
};
use exit_tail::bounds::tmain::{default_k_max, reports_to_csv};
use exit_tail::dynperc::{
    estimate_decorrelation, estimate_piv, event_log_csv, exhaustive_piv, fet_monotone_check, fkg_domination_test,
    growth_ratio, simulate_fet, simulate_survival, survival_lower_bound, Conditioning, Lattice, LatticeKind, LatticeSpec,
};
use exit_tail::report::{num, row};
use exit_tail::spectral::{decorrelation_curve, generator_spectrum, spectrum, EvalMode};
use exit_tail::stats::at_least;
use exit_tail::textio::{parse_chain, parse_edge_list};
use exit_tail::verify::{run_suite, SuiteSpec, ROUNDING};
use exit_tail::walks::{
    correlation_vs_survival, even_sites_example, survival_exponent, sweep_csv, build_conductance_walk, Boundary,
    ConductanceWalkSpec, FitTarget,
};
use exit_tail::{EventSet, GeneratorChain, ReversibleChain};

use crate::config::Config;
use crate::error::{CliError, Status};
use crate::run::Run;

pub const DEFAULT_SEED: u64 = 20_240_601;

fn seed(config: &Config, run: &mut Run) -> Result<u64, CliError> {
    let s = config.get("seed", DEFAULT_SEED)?;
    run.seed = Some(s);
    Ok(s)
}

fn read_text(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(Path::new(path)).map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))
}

fn with_origin(path: &str, e: exit_tail::Error) -> CliError {
    match e {
        exit_tail::Error::Parse { line, msg } => CliError::Parse { origin: path.to_string(), line, msg },
        other => CliError::Core(other),
    }
}

/// The chain named by `chain` (matrix file) or `edges` (edge list).
fn load_chain(config: &Config) -> Result<ReversibleChain, CliError> {
    match (config.optional::<String>("chain")?, config.optional::<String>("edges")?) {
        (Some(path), None) => parse_chain(&read_text(&path)?).map_err(|e| with_origin(&path, e)),
        (None, Some(path)) => {
            let graph = parse_edge_list(&read_text(&path)?).map_err(|e| with_origin(&path, e))?;
            Ok(ReversibleChain::from_conductances(&graph)?)
        }
        (Some(_), Some(_)) => Err(CliError::Usage("give either chain or edges, not both".into())),
        (None, None) => Err(CliError::Usage("missing chain: set chain=<matrix file> or edges=<edge list>".into())),
    }
}

fn states(config: &Config, key: &str) -> Result<Option<Vec<usize>>, CliError> {
    config.list::<usize>(key)
}

fn event(config: &Config, chain: &ReversibleChain) -> Result<Option<EventSet>, CliError> {
    states(config, "event")?.map(|s| chain.event_from_states(&s).map_err(CliError::from)).transpose()
}

fn eval_mode(config: &Config) -> Result<EvalMode, CliError> {
    Ok(config.get("mode", "envelope".to_string())?.parse::<EvalMode>()?)
}

fn bound_constant(config: &Config) -> Result<BoundConstant, CliError> {
    Ok(config.get("constant", "published".to_string())?.parse::<BoundConstant>()?)
}

pub fn chain_analyze(config: &Config, run: &mut Run) -> Result<(), CliError> {
    let chain = load_chain(config)?;
    let spec = spectrum(&chain)?;
    run.write_json(
        "spectrum.json",
        &json!({
            "states": chain.n(),
            "stationary": chain.pi(),
            "eigenvalues": spec.eigenvalues,
            "gap": spec.gap(),
            "absolute_gap": spec.absolute_gap(),
        }),
    )?;
    if let Some(event) = event(config, &chain)? {
        let t_max = config.get("t_max", 50u64)?;
        let curve = decorrelation_curve(&chain, &event, 2 * t_max, eval_mode(config)?)?;
        run.write("curve.csv", &curve.to_csv())?;
        let grid: Vec<u64> = (0..=t_max).collect();
        let tail = exit_tail_on_grid(&chain, &event, &grid)?;
        let mut csv = String::from("t,tail\n");
        for (t, v) in tail.times.iter().zip(&tail.values) {
            csv.push_str(&row(&[t.to_string(), num(*v)]));
        }
        run.write("tail.csv", &csv)?;
        run.check("event mass", event.mass() > 0.0 && event.mass() < 1.0, Status::Fail, format!("p = {}", num(event.mass())));
    }
    Ok(())
}

pub fn bound_tmain(config: &Config, run: &mut Run) -> Result<(), CliError> {
    let chain = load_chain(config)?;
    let event = event(config, &chain)?.ok_or_else(|| CliError::Usage("missing required key event".into()))?;
    let grid = config.int_grid("t", "1:50")?;
    let options = TmainOptions { k_max: config.get("k_max", default_k_max())?, constant: bound_constant(config)? };
    let tol = config.get("tol", ROUNDING)?;
    let t_max = *grid.last().expect("nonempty grid");
    let curve = decorrelation_curve(&chain, &event, 2 * t_max, eval_mode(config)?)?;
    let tail = exit_tail_on_grid(&chain, &event, &grid)?;
    let mut reports = Vec::with_capacity(grid.len());
    for &t in &grid {
        let target = match tail.times.iter().position(|&s| s == t) {
            Some(i) => tail.values[i],
            None => 0.0,
        };
        match tmain_bound(event.mass(), &curve, t as f64, &options) {
            Ok(r) => reports.push(r.with_target(target, None)),
            Err(exit_tail::Error::NoAdmissibleK { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    run.write("bound.csv", &reports_to_csv(&reports))?;
    run.write_json("bound.json", &json!({ "p": event.mass(), "options": options, "reports": reports }))?;
    let violations: Vec<f64> =
        reports.iter().filter(|r| r.target.unwrap_or(0.0) > r.bound + tol).map(|r| r.t).collect();
    run.check(
        "exit tail below bound",
        violations.is_empty() && !reports.is_empty(),
        Status::Fail,
        format!("{} times checked, violations at {violations:?}", reports.len()),
    );
    Ok(())
}

fn parse_sets(config: &Config, key: &str, n: usize) -> Result<Vec<Vec<usize>>, CliError> {
    let text: String = config.required(key)?;
    text.split(';')
        .map(|set| {
            set.split(',')
                .map(|s| {
                    let i: usize = s.trim().parse().map_err(|_| CliError::Usage(format!("bad state {s:?} in {key}")))?;
                    if i >= n {
                        return Err(CliError::Usage(format!("state {i} out of range in {key}")));
                    }
                    Ok(i)
                })
                .collect()
        })
        .collect()
}

fn window_kind(text: &str) -> Result<WindowKind, CliError> {
    match text.trim() {
        "continual" => Ok(WindowKind::Continual),
        other => other
            .strip_prefix("sampled:")
            .and_then(|k| k.parse().ok())
            .map(|points| WindowKind::Sampled { points })
            .ok_or_else(|| CliError::Usage(format!("window kind must be continual or sampled:<points>, got {other:?}"))),
    }
}

/// The chain is run in continuous time with generator `K - I`.
pub fn bound_aksz(config: &Config, run: &mut Run) -> Result<(), CliError> {
    let chain = load_chain(config)?;
    let n = chain.n();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| chain.kernel().get(i, j) - if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let generator = GeneratorChain::from_rows(&rows, Some(chain.pi().to_vec()))?;
    let delta = generator_spectrum(&generator).gap();
    let sets = parse_sets(config, "events", n)?;
    let times: Vec<f64> = config.list("times")?.ok_or_else(|| CliError::Usage("missing required key times".into()))?;
    if times.len() != sets.len() {
        return Err(CliError::Usage(format!("{} events but {} times", sets.len(), times.len())));
    }
    let events: Vec<EventSet> = sets.iter().map(|s| generator.event_from_states(s)).collect::<Result<_, _>>()?;
    let tol = config.get("tol", ROUNDING)?;
    let ends: Option<Vec<f64>> = config.list("ends")?;
    if let Some(ends) = ends {
        if ends.len() != times.len() {
            return Err(CliError::Usage("ends must match times".into()));
        }
        let kinds: Vec<String> = config.list("kinds")?.unwrap_or_else(|| vec!["continual".to_string(); times.len()]);
        if kinds.len() != times.len() {
            return Err(CliError::Usage("kinds must match times".into()));
        }
        let windows: Vec<WindowEvent> = events
            .into_iter()
            .zip(times.iter().zip(&ends))
            .zip(&kinds)
            .map(|((set, (&start, &end)), kind)| Ok(WindowEvent { set, start, end, kind: window_kind(kind)? }))
            .collect::<Result<_, CliError>>()?;
        let replicas = config.get("replicas", 20_000usize)?;
        let mc = aksz_interval_mc(&generator, &windows, replicas, seed(config, run)?)?;
        run.write_json("aksz.json", &json!({ "delta": delta, "windows": mc }))?;
        run.check(
            "window estimate within 3 sigma of the bound",
            mc.consistent,
            Status::Fail,
            format!("estimate {} sigma {} bound {}", num(mc.estimate.mean), num(mc.estimate.sigma), num(mc.bound)),
        );
        return Ok(());
    }
    let pairs: Vec<(EventSet, f64)> = events.into_iter().zip(times.iter().copied()).collect();
    let joint = aksz_joint_exact(&generator, &pairs)?;
    let probs: Vec<f64> = pairs.iter().map(|(e, _)| e.mass()).collect();
    let gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    let bound = aksz_bound(&probs, delta, &gaps)?;
    run.write_json(
        "aksz.json",
        &json!({ "delta": delta, "probabilities": probs, "gaps": gaps, "joint": joint, "bound": bound }),
    )?;
    run.check(
        "joint probability below product bound",
        joint <= bound.value + tol,
        Status::Fail,
        format!("joint {} bound {}", num(joint), num(bound.value)),
    );
    Ok(())
}

pub fn verify_suite(config: &Config, run: &mut Run) -> Result<(), CliError> {
    let d = SuiteSpec::default();
    let spec = SuiteSpec {
        seed: seed(config, run)?,
        instances: config.get("instances", d.instances)?,
        max_states: config.get("max_states", d.max_states)?,
        max_generator_states: config.get("max_generator_states", d.max_generator_states)?,
        p_range: (config.get("p_lo", d.p_range.0)?, config.get("p_hi", d.p_range.1)?),
        horizon: config.get("horizon", d.horizon)?,
        max_events: config.get("max_events", d.max_events)?,
        pair_chains: config.get("pair_chains", d.pair_chains)?,
        pairs_per_chain: config.get("pairs_per_chain", d.pairs_per_chain)?,
        mc_instances: config.get("mc_instances", d.mc_instances)?,
        mc_replicas: config.get("replicas", d.mc_replicas)?,
        heat_kernel_steps: config.get("heat_kernel_steps", d.heat_kernel_steps)?,
    };
    if spec.max_states < 2 || spec.max_generator_states < 2 || !(spec.p_range.0 < spec.p_range.1) {
        return Err(CliError::Usage("need max_states >= 2 and p_lo < p_hi".into()));
    }
    let report = run_suite(&spec)?;
    let mut csv = String::from("property,checked,violations,rounding_ties,worst_slack\n");
    for p in &report.properties {
        csv.push_str(&row(&[
            format!("\"{}\"", p.name),
            p.checked.to_string(),
            p.violations.to_string(),
            p.rounding_ties.to_string(),
            num(p.worst_slack),
        ]));
        run.check(&p.name, p.pass(), Status::Fail, format!("{} violations over {} checks", p.violations, p.checked));
    }
    run.write("properties.csv", &csv)?;
    run.write_json("suite.json", &report)?;
    Ok(())
}

fn walk_spec(config: &Config) -> Result<ConductanceWalkSpec, CliError> {
    let boundary = match config.get("boundary", "fold".to_string())?.as_str() {
        "fold" | "fold-into-loop" => Boundary::FoldIntoLoop,
        "truncate" => Boundary::Truncate,
        other => return Err(CliError::Usage(format!("boundary must be fold or truncate, got {other:?}"))),
    };
    Ok(ConductanceWalkSpec { beta: config.get("beta", 1.5)?, n: config.get("n", 2000usize)?, boundary })
}

pub fn example_conductance(config: &Config, run: &mut Run) -> Result<(), CliError> {
    let spec = walk_spec(config)?;
    let grid = config.int_grid("grid", "log:100:100000:40")?;
    let sweep_grid = config.int_grid("sweep_grid", "log:1:100000:60")?;
    let target = FitTarget { exponent: (1.0 - spec.beta) / 2.0, tolerance: config.get("tol", 0.08)? };
    let ratio_from = config.get("ratio_from", 10_000u64)?;
    let ratio_floor = config.get("ratio_floor", 0.45)?;
    let chain = build_conductance_walk(&spec)?;
    let event = spec.positive(&chain)?;
    let (fit, values) = survival_exponent(&chain, &event, &grid, target)?;
    let mut csv = String::from("t,survival\n");
    for (t, v) in grid.iter().zip(&values) {
        csv.push_str(&row(&[t.to_string(), num(*v)]));
    }
    run.write("survival.csv", &csv)?;
    run.write("fit.json", &(fit.to_json() + "\n"))?;
    let points = correlation_vs_survival(&chain, &event, &sweep_grid)?;
    run.write("sweep.csv", &sweep_csv(&spec, &points))?;
    let half = points.iter().filter(|p| !p.half_bound_holds()).count();
    let min_ratio = points.iter().filter(|p| p.t >= ratio_from).map(|p| p.ratio).fold(f64::INFINITY, f64::min);
    run.check(
        "survival exponent",
        fit.pass,
        Status::Fail,
        format!("slope {} target {} tolerance {}", num(fit.slope), num(fit.target), num(fit.tolerance)),
    );
    run.check("correlation at most half the survival", half == 0, Status::Fail, format!("{half} of {} times fail", points.len()));
    if min_ratio.is_finite() {
        run.check(
            "correlation to survival ratio",
            min_ratio >= ratio_floor,
            Status::Fail,
            format!("minimum {} for t >= {ratio_from}", num(min_ratio)),
        );
    }
    Ok(())
}

pub fn example_even_sites(config: &Config, run: &mut Run) -> Result<(), CliError> {
    let spec = walk_spec(config)?;
    let grid = config.int_grid("grid", "log:100:100000:40")?;
    let survival_grid = config.int_grid("survival_grid", "20:200")?;
    let target = FitTarget { exponent: (1.0 - spec.beta) / 2.0, tolerance: config.get("tol", 0.10)? };
    let r2_floor = config.get("r2_min", 0.99)?;
    let report = even_sites_example(&spec, &grid, &survival_grid, target)?;
    let mut csv = String::from("t,excess\n");
    for (t, v) in report.grid.iter().zip(&report.excess) {
        csv.push_str(&row(&[t.to_string(), num(*v)]));
    }
    run.write("excess.csv", &csv)?;
    let mut csv = String::from("t,survival\n");
    for (t, v) in report.survival_grid.iter().zip(&report.survival) {
        csv.push_str(&row(&[t.to_string(), num(*v)]));
    }
    run.write("survival.csv", &csv)?;
    run.write_json(
        "fit.json",
        &json!({
            "event_mass": report.event_mass,
            "excess": report.excess_fit,
            "survival": {
                "slope": report.survival_fit.slope,
                "intercept": report.survival_fit.intercept,
                "r2": report.survival_fit.r2,
                "window": [report.survival_grid.first(), report.survival_grid.last()],
            },
        }),
    )?;
    run.check(
        "excess exponent",
        report.excess_fit.pass,
        Status::Fail,
        format!("slope {} target {}", num(report.excess_fit.slope), num(report.excess_fit.target)),
    );
    run.check(
        "exponential exit",
        report.survival_fit.r2 >= r2_floor,
        Status::Fail,
        format!("log-linear r2 {}", num(report.survival_fit.r2)),
    );
    Ok(())
}

fn lattice_kind(config: &Config) -> Result<LatticeKind, CliError> {
    Ok(config.get("lattice", "trisite".to_string())?.parse::<LatticeKind>()?)
}

fn crossing_lattice(config: &Config) -> Result<Lattice, CliError> {
    Ok(LatticeSpec::crossing(lattice_kind(config)?, config.get("n", 32usize)?).build()?)
}

/// `rate` if given, otherwise one over the estimated pivotal count.
fn rate(config: &Config, run: &mut Run, lattice: &Lattice, seed: u64) -> Result<f64, CliError> {
    if let Some(r) = config.optional::<f64>("rate")? {
        if !(r > 0.0 && r.is_finite()) {
            return Err(CliError::Usage(format!("rate must be positive, got {r}")));
        }
        return Ok(r);
    }
    let piv = estimate_piv(lattice, config.get("piv_replicas", 2000usize)?, seed ^ 0x5049_5600)?;
    run.write_json("rate.json", &json!({ "rate": 1.0 / piv.estimate.mean, "piv": piv }))?;
    Ok(1.0 / piv.estimate.mean)
}

pub fn dynperc_survival(config: &Config, run: &mut Run) -> Result<(), CliError> {
    let lattice = crossing_lattice(config)?;
    let seed = seed(config, run)?;
    let rate = rate(config, run, &lattice, seed)?;
    let grid = config.real_grid("grid", "0,0.5,1,1.5,2,4")?;
    let replicas = config.get("replicas", 2000usize)?;
    let log = config.get("log_events", false)?;
    let est = simulate_survival(&lattice, rate, &grid, replicas, seed, log)?;
    run.write("survival.csv", &est.to_csv())?;
    if let Some(events) = &est.events {
        run.write("events.csv", &event_log_csv(events))?;
    }
    let summary = json!({
        "seed": est.seed, "replicas": est.replicas, "rate": est.rate, "times": est.times,
        "survival": est.survival, "initially_crossing": est.initially_crossing, "survived": est.survived,
    });
    run.write_json("survival.json", &summary)?;
    let below: Vec<f64> = grid
        .iter()
        .zip(&est.survival)
        .filter(|(t, s)| **t > 0.0 && **t <= 2.0 && !at_least(s, survival_lower_bound(**t)))
        .map(|(t, _)| *t)
        .collect();
    run.check("survival above (1/4)^ceil(2t)", below.is_empty(), Status::Fail, format!("below at {below:?}"));
    Ok(())
}

pub fn dynperc_decorr(config: &Config, run: &mut Run) -> Result<(), CliError> {
    let lattice = crossing_lattice(config)?;
    let seed = seed(config, run)?;
    let rate = rate(config, run, &lattice, seed)?;
    let grid = config.real_grid("grid", "0,0.25,0.5,1,1.5,2,3,4,6,8,11,16")?;
    let replicas = config.get("replicas", 2000usize)?;
    let est = estimate_decorrelation(&lattice, rate, &grid, replicas, seed)?;
    run.write("decorr.csv", &est.to_csv())?;
    run.write_json("decorr.json", &est)?;
    let (lo, hi) = (config.get("fit_lo", 1.0)?, config.get("fit_hi", 16.0)?);
    match est.slope(lo, hi) {
        Ok(fit) => {
            run.write_json("fit.json", &json!({ "slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2, "window": [lo, hi] }))?;
            if let (Some(min), Some(max)) = (config.optional::<f64>("slope_min")?, config.optional::<f64>("slope_max")?) {
                run.check("decorrelation slope", fit.slope >= min && fit.slope <= max, Status::Fail, format!("slope {}", num(fit.slope)));
            }
        }
        Err(e) => run.check("decorrelation fit", false, Status::Inconclusive, e.to_string()),
    }
    run.check("nonincreasing within CI", est.nonincreasing_within_ci(), Status::Fail, String::new());
    Ok(())
}

pub fn dynperc_fet(config: &Config, run: &mut Run) -> Result<(), CliError> {
    let kind = lattice_kind(config)?;
    let seed = seed(config, run)?;
    let radii: Vec<usize> = config.list("radii")?.unwrap_or_else(|| vec![8]);
    let grid = config.real_grid("grid", "0:10:0.5")?;
    let window = (config.get("fit_lo", 1.0)?, config.get("fit_hi", 10.0)?);
    let replicas = config.get("replicas", 2000usize)?;
    let r2_floor = config.get("r2_min", 0.95)?;
    let mut csv = String::from("R,t,survival,ci\n");
    let mut fits = Vec::new();
    let mut estimates = Vec::new();
    for (i, &radius) in radii.iter().enumerate() {
        let est = simulate_fet(kind, radius, &grid, window, replicas, seed.wrapping_add(i as u64))?;
        csv.push_str(&est.csv_rows());
        run.check(&format!("R={radius} above lower bound"), est.above_lower_bound(), Status::Fail, String::new());
        match &est.fit {
            Some(f) => run.check(&format!("R={radius} log-linear fit"), f.r2 >= r2_floor, Status::Fail, format!("r2 {}", num(f.r2))),
            None => run.check(&format!("R={radius} log-linear fit"), false, Status::Inconclusive, "too few positive points".into()),
        }
        fits.push(json!({ "R": radius, "fit": est.fit }));
        estimates.push(est);
    }
    run.write("fet.csv", &csv)?;
    run.write_json("fit.json", &fits)?;
    run.write_json("fet.json", &estimates)?;
    if let Some(radii) = config.list::<usize>("monotone_radii")? {
        let report = fet_monotone_check(kind, &radii, config.get("monotone_horizon", 10.0)?, replicas, seed ^ 0x4d4f_4e4f)?;
        run.check(
            "monotone in radius",
            report.violations == 0 && report.zero_mismatches == 0,
            Status::Fail,
            format!("{} violations", report.violations),
        );
        run.write_json("monotone.json", &report)?;
    }
    Ok(())
}

pub fn dynperc_fkg(config: &Config, run: &mut Run) -> Result<(), CliError> {
    let lattice = crossing_lattice(config)?;
    let seed = seed(config, run)?;
    let rate = rate(config, run, &lattice, seed)?;
    let conditioning = match config.get("conditioning", "crossing".to_string())?.as_str() {
        "crossing" => Conditioning::Crossing,
        "full" => Conditioning::Full,
        other => return Err(CliError::Usage(format!("conditioning must be crossing or full, got {other:?}"))),
    };
    let times = config.real_grid("t", "1")?;
    let replicas = config.get("replicas", 2000usize)?;
    let mut reports = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        let r = fkg_domination_test(&lattice, rate, t, replicas, seed.wrapping_add(i as u64), conditioning)?;
        if r.inconclusive {
            run.check(&format!("domination at t={t}"), false, Status::Inconclusive, format!("{} survivors", r.survivors));
        } else {
            run.check(&format!("domination at t={t}"), r.holds, Status::Fail, String::new());
        }
        reports.push(r);
    }
    run.write_json("fkg.json", &reports)?;
    Ok(())
}

pub fn dynperc_piv(config: &Config, run: &mut Run) -> Result<(), CliError> {
    let lattice = crossing_lattice(config)?;
    let seed = seed(config, run)?;
    let replicas = config.get("replicas", 2000usize)?;
    let piv = estimate_piv(&lattice, replicas, seed)?;
    let mut out = json!({ "piv": piv });
    if let Some(small) = config.optional::<usize>("small_n")? {
        let small_lattice = LatticeSpec::crossing(lattice.spec.kind, small).build()?;
        let small_piv = estimate_piv(&small_lattice, replicas, seed.wrapping_add(1))?;
        out["small"] = json!(small_piv);
        out["growth_ratio"] = json!(growth_ratio(&piv, &small_piv));
    }
    if lattice.bits() <= 20 {
        let exact = exhaustive_piv(&lattice)?;
        let e = piv.estimate;
        run.check(
            "estimate matches enumeration",
            (e.mean - exact).abs() <= 3.0 * e.sigma,
            Status::Fail,
            format!("estimate {} exact {}", num(e.mean), num(exact)),
        );
        out["exact"] = json!(exact);
    }
    run.write_json("piv.json", &out)?;
    Ok(())
}

pub fn scan_question33(config: &Config, run: &mut Run) -> Result<(), CliError> {
    let d = ScanSpec::default();
    let spec = ScanSpec {
        instances: config.get("instances", d.instances)?,
        min_states: config.get("min_states", d.min_states)?,
        max_states: config.get("max_states", d.max_states)?,
        density: config.get("density", d.density)?,
        t_max: config.get("t_max", d.t_max)?,
        p_range: (config.get("p_lo", d.p_range.0)?, config.get("p_hi", d.p_range.1)?),
    };
    if spec.min_states < 1 || spec.max_states < spec.min_states {
        return Err(CliError::Usage("need 1 <= min_states <= max_states".into()));
    }
    let report = counterexample_scan(&spec, seed(config, run)?)?;
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    let mut csv = String::from("index,states,p,decorrelation_rate,exit_rate,ratio\n");
    for i in &report.instances {
        csv.push_str(&row(&[
            i.index.to_string(),
            i.states.to_string(),
            num(i.p),
            opt(i.rates.decorrelation_rate),
            opt(i.rates.exit_rate),
            opt(i.rates.ratio),
        ]));
    }
    run.write("scan.csv", &csv)?;
    run.write_json("scan.json", &report)?;
    Ok(())
}
