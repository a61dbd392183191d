//! Example chains: a heavy-tailed conductance walk on `{-N..-1} u {1..N}`
//! whose exit tail from the positive half-line decays polynomially, a
//! retuned version where even positive sites decorrelate slowly but are left
//! exponentially fast, and the heat-kernel and random-walk bounds used to
//! analyse them.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::chain::{ConductanceGraph, EventSet, ReversibleChain};
use crate::error::{Error, Result};
use crate::fit::{loglinear_fit, loglog_fit, LinearFit};
use crate::report::{num, row};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// The outward edge at `+-N` is removed and its conductance added to the
    /// self-loop, so `c(N,N) = c(N,N-1) + N^-beta`.
    #[default]
    FoldIntoLoop,
    /// The outward edge is removed outright: `c(N,N) = c(N,N-1)`.
    Truncate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConductanceWalkSpec {
    pub beta: f64,
    /// States are `+-1..=+-n`.
    pub n: usize,
    #[serde(default)]
    pub boundary: Boundary,
}

impl ConductanceWalkSpec {
    pub fn new(beta: f64, n: usize) -> Self {
        ConductanceWalkSpec { beta, n, boundary: Boundary::FoldIntoLoop }
    }

    fn validate(&self) -> Result<()> {
        if !(self.beta > 1.0 && self.beta < 2.0) {
            return Err(Error::InvalidParameter(format!("beta must lie in (1, 2), got {}", self.beta)));
        }
        if self.n < 4 {
            return Err(Error::InvalidParameter(format!("truncation radius must be at least 4, got {}", self.n)));
        }
        Ok(())
    }

    /// Index of vertex `v` (nonzero, `|v| <= n`).
    pub fn index(&self, v: i64) -> usize {
        let n = self.n as i64;
        debug_assert!(v != 0 && v.abs() <= n);
        if v < 0 {
            (v + n) as usize
        } else {
            (n + v - 1) as usize
        }
    }

    pub fn vertex(&self, index: usize) -> i64 {
        let n = self.n as i64;
        let i = index as i64;
        if i < n {
            i - n
        } else {
            i - n + 1
        }
    }

    /// Non-loop edges `(u, v, c)` by vertex label.
    fn edges(&self) -> Vec<(i64, i64, f64)> {
        let mut out = vec![(-1, 1, 0.5)];
        for k in 1..self.n as i64 {
            let c = (k as f64).powf(-self.beta);
            out.push((k, k + 1, c));
            out.push((-k, -(k + 1), c));
        }
        out
    }

    fn loop_weight(&self, v: i64) -> f64 {
        let k = v.unsigned_abs() as usize;
        if k == 1 {
            return 0.5;
        }
        let inward = ((k - 1) as f64).powf(-self.beta);
        let outward = (k as f64).powf(-self.beta);
        if k < self.n {
            inward + outward
        } else {
            match self.boundary {
                Boundary::FoldIntoLoop => inward + outward,
                Boundary::Truncate => inward,
            }
        }
    }

    fn graph(&self, loops: impl Fn(i64) -> f64) -> Result<ConductanceGraph> {
        let mut edges: Vec<(usize, usize, f64)> = self
            .edges()
            .into_iter()
            .map(|(u, v, c)| (self.index(u), self.index(v), c))
            .collect();
        for i in 0..2 * self.n {
            let w = loops(self.vertex(i));
            if w > 0.0 {
                edges.push((i, i, w));
            }
        }
        ConductanceGraph::new(2 * self.n, edges)
    }

    /// The positive half-line.
    pub fn positive(&self, chain: &ReversibleChain) -> Result<EventSet> {
        chain.event((0..2 * self.n).map(|i| self.vertex(i) > 0).collect())
    }

    /// Even positive sites.
    pub fn even_positive(&self, chain: &ReversibleChain) -> Result<EventSet> {
        chain.event((0..2 * self.n).map(|i| {
            let v = self.vertex(i);
            v > 0 && v % 2 == 0
        }).collect())
    }
}

pub fn build_conductance_walk(spec: &ConductanceWalkSpec) -> Result<ReversibleChain> {
    spec.validate()?;
    ReversibleChain::from_conductances(&spec.graph(|v| spec.loop_weight(v))?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitTarget {
    pub exponent: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub window: (f64, f64),
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub r2: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// The tail fell below `1e-300` and the grid was cut short.
    pub underflow: bool,
}

impl ExponentFit {
    fn from_fit(fit: LinearFit, window: (f64, f64), target: FitTarget, underflow: bool) -> Self {
        ExponentFit {
            window,
            slope: fit.slope,
            intercept: fit.intercept,
            residual: fit.residual,
            r2: fit.r2,
            target: target.exponent,
            tolerance: target.tolerance,
            pass: (fit.slope - target.exponent).abs() <= target.tolerance,
            underflow,
        }
    }

    /// `{slope, target, residual, window, pass}` plus the extra fit fields.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit serializes")
    }
}

/// Exact tail on `grid` and its log-log slope over the whole grid.
pub fn survival_exponent(
    chain: &ReversibleChain,
    event: &EventSet,
    grid: &[u64],
    target: FitTarget,
) -> Result<(ExponentFit, Vec<f64>)> {
    if grid.len() < 2 {
        return Err(Error::FitTooShort(grid.len()));
    }
    let series = crate::bounds::exit_tail_on_grid(chain, event, grid)?;
    let xs: Vec<f64> = series.times.iter().map(|&t| t as f64).collect();
    let fit = loglog_fit(&xs, &series.values)?;
    let window = (xs[0], *xs.last().expect("two points"));
    Ok((ExponentFit::from_fit(fit, window, target, series.underflow), series.values))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPoint {
    pub t: u64,
    /// `P[Y_0, Y_t in C] - P[Y_0 in C]^2`
    pub corr: f64,
    /// `P[Y_s in C for all s <= t]`
    pub survival: f64,
    pub ratio: f64,
}

impl CorrelationPoint {
    /// `corr <= survival / 2`, compared exactly.
    pub fn half_bound_holds(&self) -> bool {
        self.corr <= 0.5 * self.survival
    }
}

/// Correlation and survival on a sorted grid, advancing both iterations together.
pub fn correlation_vs_survival(chain: &ReversibleChain, event: &EventSet, grid: &[u64]) -> Result<Vec<CorrelationPoint>> {
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::UnsortedTimes);
    }
    let pi = chain.pi();
    let mask = event.mask();
    let f = event.indicator();
    let p: f64 = pi.iter().zip(&f).map(|(a, b)| a * b).sum();
    let mut h = f.clone();
    let mut u = f.clone();
    let mut scratch = vec![0.0; f.len()];
    let mut step = 0;
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        while step < t {
            chain.kernel().apply_into(&h, &mut scratch);
            std::mem::swap(&mut h, &mut scratch);
            chain.kernel().apply_into(&u, &mut scratch);
            for (x, &m) in scratch.iter_mut().zip(mask) {
                if !m {
                    *x = 0.0;
                }
            }
            std::mem::swap(&mut u, &mut scratch);
            step += 1;
        }
        let mut joint = 0.0;
        let mut survival = 0.0;
        for i in 0..pi.len() {
            if mask[i] {
                joint += pi[i] * h[i];
                survival += pi[i] * u[i];
            }
        }
        if survival < crate::bounds::exit::UNDERFLOW {
            return Err(Error::InvalidParameter(format!("survival underflows at t = {t}")));
        }
        let corr = joint - p * p;
        out.push(CorrelationPoint { t, corr, survival, ratio: corr / survival });
    }
    Ok(out)
}

/// Sweep CSV `beta,N,t,survival,corr,ratio`.
pub fn sweep_csv(spec: &ConductanceWalkSpec, points: &[CorrelationPoint]) -> String {
    let mut out = String::from("beta,N,t,survival,corr,ratio\n");
    for p in points {
        out.push_str(&row(&[num(spec.beta), spec.n.to_string(), p.t.to_string(), num(p.survival), num(p.corr), num(p.ratio)]));
    }
    out
}

/// Self-loop weights making the next step land on an even label with
/// probability 1/2 from every vertex: `odd - even` neighbour conductance at
/// even vertices, `even - odd` at odd ones.
pub fn parity_loops(labels: &[i64], edges: &[(usize, usize, f64)]) -> Result<Vec<f64>> {
    let n = labels.len();
    let mut odd = vec![0.0; n];
    let mut even = vec![0.0; n];
    for &(u, v, c) in edges {
        if u == v {
            continue;
        }
        for (a, b) in [(u, v), (v, u)] {
            if labels[b] % 2 == 0 {
                even[a] += c;
            } else {
                odd[a] += c;
            }
        }
    }
    (0..n)
        .map(|i| {
            let w = if labels[i] % 2 == 0 { odd[i] - even[i] } else { even[i] - odd[i] };
            // rounding can leave a tiny negative where the balance is exact
            let scale = odd[i].max(even[i]);
            if w < -1e-12 * scale {
                Err(Error::InfeasibleRetuning { vertex: labels[i], weight: w })
            } else {
                Ok(w.max(0.0))
            }
        })
        .collect()
}

/// The conductance walk with self-loops retuned by [`parity_loops`].
pub fn build_even_sites_walk(spec: &ConductanceWalkSpec) -> Result<ReversibleChain> {
    spec.validate()?;
    let labels: Vec<i64> = (0..2 * spec.n).map(|i| spec.vertex(i)).collect();
    let edges: Vec<(usize, usize, f64)> = spec
        .edges()
        .into_iter()
        .map(|(u, v, c)| (spec.index(u), spec.index(v), c))
        .collect();
    let loops = parity_loops(&labels, &edges)?;
    ReversibleChain::from_conductances(&spec.graph(|v| loops[spec.index(v)])?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvenSitesReport {
    pub event_mass: f64,
    pub grid: Vec<u64>,
    /// `P[Y_t in C | Y_0 in C] - 1/4`
    pub excess: Vec<f64>,
    pub excess_fit: ExponentFit,
    pub survival_grid: Vec<u64>,
    pub survival: Vec<f64>,
    /// Log-linear fit of the survival.
    pub survival_fit: LinearFit,
}

/// Builds the retuned walk and measures both decays on the given grids.
pub fn even_sites_example(
    spec: &ConductanceWalkSpec,
    excess_grid: &[u64],
    survival_grid: &[u64],
    target: FitTarget,
) -> Result<EvenSitesReport> {
    let chain = build_even_sites_walk(spec)?;
    let event = spec.even_positive(&chain)?;
    let p = event.mass();
    let points = correlation_vs_survival(&chain, &event, excess_grid)
        .or_else(|_| -> Result<Vec<CorrelationPoint>> {
            // survival underflows long before the excess grid ends; only the joint matters here
            joint_only(&chain, &event, excess_grid)
        })?;
    let excess: Vec<f64> = points.iter().map(|c| (c.corr + p * p) / p - 0.25).collect();
    let xs: Vec<f64> = excess_grid.iter().map(|&t| t as f64).collect();
    let fit = loglog_fit(&xs, &excess)?;
    let window = (xs[0], *xs.last().unwrap_or(&xs[0]));
    let series = crate::bounds::exit_tail_on_grid(&chain, &event, survival_grid)?;
    let sx: Vec<f64> = series.times.iter().map(|&t| t as f64).collect();
    let survival_fit = loglinear_fit(&sx, &series.values)?;
    Ok(EvenSitesReport {
        event_mass: p,
        grid: excess_grid.to_vec(),
        excess,
        excess_fit: ExponentFit::from_fit(fit, window, target, false),
        survival_grid: series.times,
        survival: series.values,
        survival_fit,
    })
}

fn joint_only(chain: &ReversibleChain, event: &EventSet, grid: &[u64]) -> Result<Vec<CorrelationPoint>> {
    let pi = chain.pi();
    let f = event.indicator();
    let p = event.mass();
    let mut h = f.clone();
    let mut scratch = vec![0.0; f.len()];
    let mut step = 0;
    let mut out = Vec::new();
    for &t in grid {
        while step < t {
            chain.kernel().apply_into(&h, &mut scratch);
            std::mem::swap(&mut h, &mut scratch);
            step += 1;
        }
        let joint: f64 = (0..pi.len()).filter(|&i| event.contains(i)).map(|i| pi[i] * h[i]).sum();
        out.push(CorrelationPoint { t, corr: joint - p * p, survival: f64::NAN, ratio: f64::NAN });
    }
    Ok(out)
}

/// Graph distances from `x` over the nonzero pattern of the kernel.
pub fn kernel_distances(chain: &ReversibleChain, x: usize) -> Vec<Option<usize>> {
    let n = chain.n();
    let mut dist = vec![None; n];
    dist[x] = Some(0);
    let mut queue = VecDeque::from([x]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].expect("queued vertices have distances");
        for (v, _) in chain.kernel().row(u) {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatKernelCheck {
    pub bound: f64,
    pub exact: f64,
    pub distance: Option<usize>,
    pub ok: bool,
}

/// Slack allowed for rounding in the heat-kernel comparison.
pub const HEAT_KERNEL_SLACK: f64 = 1e-12;

fn heat_kernel_bound(pi: &[f64], x: usize, y: usize, s: u64, distance: Option<usize>) -> f64 {
    match distance {
        None => 0.0,
        Some(d) => 2.0 * (pi[y] / pi[x]).sqrt() * (-((d * d) as f64) / (2.0 * s as f64)).exp(),
    }
}

fn judge(exact: f64, bound: f64, distance: Option<usize>) -> bool {
    match distance {
        None => exact == 0.0,
        Some(_) => exact <= bound + HEAT_KERNEL_SLACK,
    }
}

/// `K^s(x, y) <= 2 sqrt(pi(y)/pi(x)) exp(-d(x,y)^2 / (2s))`.
pub fn carne_varopoulos(chain: &ReversibleChain, x: usize, y: usize, s: u64) -> Result<HeatKernelCheck> {
    let n = chain.n();
    if x >= n || y >= n {
        return Err(Error::Dimension { expected: n, got: x.max(y) + 1 });
    }
    if s == 0 {
        return Err(Error::InvalidParameter("s must be at least 1".into()));
    }
    let mut e = vec![0.0; n];
    e[y] = 1.0;
    let exact = {
        use crate::chain::MarkovOperator;
        chain.propagate(&e, s)?[x]
    };
    let distance = kernel_distances(chain, x)[y];
    let bound = heat_kernel_bound(chain.pi(), x, y, s, distance);
    Ok(HeatKernelCheck { bound, exact, distance, ok: judge(exact, bound, distance) })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HeatKernelSweep {
    pub checked: usize,
    pub violations: usize,
    /// Smallest `bound - exact` seen.
    pub worst_margin: f64,
}

/// Every pair `(x, y)` and every `1 <= s <= s_max`, one column propagation per target.
pub fn carne_varopoulos_sweep(chain: &ReversibleChain, s_max: u64) -> HeatKernelSweep {
    let n = chain.n();
    let pi = chain.pi();
    let dist: Vec<Vec<Option<usize>>> = (0..n).map(|x| kernel_distances(chain, x)).collect();
    let mut out = HeatKernelSweep { worst_margin: f64::INFINITY, ..Default::default() };
    let mut col = vec![0.0; n];
    let mut next = vec![0.0; n];
    for y in 0..n {
        col.iter_mut().for_each(|v| *v = 0.0);
        col[y] = 1.0;
        for s in 1..=s_max {
            chain.kernel().apply_into(&col, &mut next);
            std::mem::swap(&mut col, &mut next);
            for x in 0..n {
                let bound = heat_kernel_bound(pi, x, y, s, dist[x][y]);
                out.checked += 1;
                if !judge(col[x], bound, dist[x][y]) {
                    out.violations += 1;
                }
                out.worst_margin = out.worst_margin.min(bound - col[x]);
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SrwCheck {
    pub a: u64,
    pub t: u64,
    /// Probability that simple random walk from `a` stays `>= 1` for `t`
    /// steps, on a line truncated at `a + ceil(4 sqrt(t) ln t)` where
    /// reaching the top counts as surviving; an upper estimate of the true value.
    pub exact: f64,
    /// `min(1, 12 a / sqrt(t))`
    pub bound: f64,
    pub ok: bool,
}

pub fn srw_hitting_check(a: u64, t: u64) -> Result<SrwCheck> {
    if a == 0 || t == 0 {
        return Err(Error::InvalidParameter("a and t must be at least 1".into()));
    }
    let tf = t as f64;
    let top = (a + (4.0 * tf.sqrt() * tf.ln()).ceil() as u64).max(a + 1) as usize;
    // u[k] is the mass at site k + 1
    let mut u = vec![0.0; top];
    u[a as usize - 1] = 1.0;
    let mut escaped = 0.0;
    let mut next = vec![0.0; top];
    for _ in 0..t {
        next.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..top {
            let m = u[k];
            if m == 0.0 {
                continue;
            }
            if k > 0 {
                next[k - 1] += 0.5 * m;
            }
            if k + 1 < top {
                next[k + 1] += 0.5 * m;
            } else {
                escaped += 0.5 * m;
            }
        }
        std::mem::swap(&mut u, &mut next);
    }
    let exact = (u.iter().sum::<f64>() + escaped).min(1.0);
    let bound = (12.0 * a as f64 / tf.sqrt()).min(1.0);
    Ok(SrwCheck { a, t, exact, bound, ok: exact <= bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn index_round_trip() {
        let spec = ConductanceWalkSpec::new(1.5, 6);
        for i in 0..12 {
            assert_eq!(spec.index(spec.vertex(i)), i);
        }
        assert_eq!(spec.vertex(0), -6);
        assert_eq!(spec.vertex(6), 1);
    }

    #[test]
    fn walk_masses() {
        let spec = ConductanceWalkSpec::new(1.5, 50);
        let chain = build_conductance_walk(&spec).unwrap();
        let c = spec.positive(&chain).unwrap();
        assert_abs_diff_eq!(c.mass(), 0.5, epsilon = 1e-14);
        for v in 1..=50 {
            assert_abs_diff_eq!(chain.pi()[spec.index(v)], chain.pi()[spec.index(-v)], epsilon = 1e-16);
        }
        // vertex 1: loop 1/2, edge to -1 1/2, edge to 2 1; total 2
        assert_abs_diff_eq!(chain.kernel().get(spec.index(1), spec.index(1)), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(chain.kernel().get(spec.index(1), spec.index(2)), 0.5, epsilon = 1e-15);
        let c23 = 2f64.powf(-1.5);
        assert_abs_diff_eq!(chain.kernel().get(spec.index(2), spec.index(3)), c23 / (2.0 * (1.0 + c23)), epsilon = 1e-15);
        assert!(crate::chain::check_detailed_balance(&chain, 1e-12));
    }

    #[test]
    fn boundary_policies() {
        let fold = ConductanceWalkSpec::new(1.5, 8);
        let cut = ConductanceWalkSpec { boundary: Boundary::Truncate, ..fold };
        let a = build_conductance_walk(&fold).unwrap();
        let b = build_conductance_walk(&cut).unwrap();
        let top = fold.index(8);
        assert_abs_diff_eq!(a.kernel().get(top, top), 1.0 - 0.5 * 7f64.powf(-1.5) / (7f64.powf(-1.5) + 0.5 * 8f64.powf(-1.5)), epsilon = 1e-14);
        assert_abs_diff_eq!(b.kernel().get(top, top), 0.5, epsilon = 1e-15);
        assert!(build_conductance_walk(&ConductanceWalkSpec::new(2.5, 8)).is_err());
        assert!(build_conductance_walk(&ConductanceWalkSpec::new(1.5, 3)).is_err());
    }

    #[test]
    fn static_correlation_point() {
        let spec = ConductanceWalkSpec::new(1.5, 20);
        let chain = build_conductance_walk(&spec).unwrap();
        let c = spec.positive(&chain).unwrap();
        let pts = correlation_vs_survival(&chain, &c, &[0, 1, 5]).unwrap();
        assert_abs_diff_eq!(pts[0].corr, 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(pts[0].survival, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(pts[0].ratio, 0.5, epsilon = 1e-13);
        assert!(pts[1..].iter().all(|p| p.half_bound_holds()));
    }

    fn tails_at(n: usize, grid: &[u64]) -> Vec<f64> {
        let spec = ConductanceWalkSpec::new(1.5, n);
        let chain = build_conductance_walk(&spec).unwrap();
        let c = spec.positive(&chain).unwrap();
        crate::bounds::exit_tail_on_grid(&chain, &c, grid).unwrap().values
    }

    #[test]
    fn truncation_error_shrinks_with_radius() {
        let grid = [10, 100];
        let mut previous = [f64::INFINITY; 2];
        for n in [100, 200, 400] {
            let (a, b) = (tails_at(n, &grid), tails_at(2 * n, &grid));
            for i in 0..2 {
                // a shorter line loses the far-out stationary mass that survives longest
                assert!(a[i] < b[i]);
                let rel = 1.0 - a[i] / b[i];
                assert!(rel < previous[i]);
                previous[i] = rel;
            }
        }
    }

    #[test]
    #[ignore = "fails: the tail of the stationary measure beyond N decays only like N^(1-beta)"]
    fn truncation_within_one_percent_up_to_quarter_radius_squared() {
        let n = 400;
        let grid = [1, 10, 100, 1000, (n as u64 / 4).pow(2)];
        let (a, b) = (tails_at(n, &grid), tails_at(2 * n, &grid));
        for i in 0..grid.len() {
            assert!((a[i] / b[i] - 1.0).abs() <= 0.01, "t = {}: {} vs {}", grid[i], a[i], b[i]);
        }
    }

    #[test]
    fn fit_needs_two_points() {
        let spec = ConductanceWalkSpec::new(1.5, 10);
        let chain = build_conductance_walk(&spec).unwrap();
        let c = spec.positive(&chain).unwrap();
        let target = FitTarget { exponent: -0.25, tolerance: 0.08 };
        assert!(matches!(survival_exponent(&chain, &c, &[10], target), Err(Error::FitTooShort(1))));
    }

    #[test]
    fn even_sites_structure() {
        let spec = ConductanceWalkSpec::new(1.5, 30);
        let chain = build_even_sites_walk(&spec).unwrap();
        let even: Vec<f64> = (0..60).map(|i| if spec.vertex(i) % 2 == 0 { 1.0 } else { 0.0 }).collect();
        let next = chain.kernel().apply(&even);
        for v in next {
            assert_abs_diff_eq!(v, 0.5, epsilon = 1e-14);
        }
        let c = spec.even_positive(&chain).unwrap();
        assert_abs_diff_eq!(c.mass(), 0.25, epsilon = 1e-14);
        let s = crate::bounds::exit_tail_on_grid(&chain, &c, &[0, 1, 2, 10]).unwrap();
        for (t, v) in s.times.iter().zip(&s.values) {
            assert_abs_diff_eq!(*v, 0.25 * 0.5f64.powi(*t as i32), epsilon = 1e-14);
        }
    }

    #[test]
    fn retuning_reproduces_interior_loops() {
        let spec = ConductanceWalkSpec { boundary: Boundary::Truncate, ..ConductanceWalkSpec::new(1.5, 12) };
        let a = build_conductance_walk(&spec).unwrap();
        let b = build_even_sites_walk(&spec).unwrap();
        let diff = (a.kernel().to_dense() - b.kernel().to_dense()).abs().max();
        assert!(diff < 1e-14);
    }

    #[test]
    fn infeasible_retuning_names_vertex() {
        // vertex 0 is even with one even neighbour of weight 2 and one odd of weight 1
        let labels = [0, 2, 1];
        let edges = [(0, 1, 2.0), (0, 2, 1.0)];
        match parity_loops(&labels, &edges) {
            Err(Error::InfeasibleRetuning { vertex, weight }) => {
                assert_eq!(vertex, 0);
                assert_eq!(weight, -1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn carne_varopoulos_trivial_cases() {
        let spec = ConductanceWalkSpec::new(1.5, 10);
        let chain = build_conductance_walk(&spec).unwrap();
        let r = carne_varopoulos(&chain, 3, 3, 4).unwrap();
        assert_eq!(r.bound, 2.0);
        assert!(r.ok);
        let r = carne_varopoulos(&chain, spec.index(1), spec.index(9), 3).unwrap();
        assert_eq!(r.exact, 0.0);
        assert!(r.ok);
        let sweep = carne_varopoulos_sweep(&chain, 20);
        assert_eq!(sweep.violations, 0);
        assert_eq!(sweep.checked, 20 * 20 * 20);
    }

    #[test]
    fn srw_small_cases() {
        let r = srw_hitting_check(1, 1).unwrap();
        assert_eq!(r.exact, 0.5);
        assert!(r.ok);
        let r = srw_hitting_check(1, 2).unwrap();
        assert_eq!(r.exact, 0.5);
        let r = srw_hitting_check(40, 9).unwrap();
        assert_eq!(r.bound, 1.0);
        assert!(r.ok);
    }
}
