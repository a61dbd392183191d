//! Finite reversible Markov chains in discrete and continuous time.
//!
//! A [`ReversibleChain`] is a row-stochastic kernel together with a
//! stationary probability vector satisfying detailed balance. Small chains
//! are stored densely; chains above [`DENSE_LIMIT`] states use sparse rows
//! and are only ever touched through matrix-vector products.
//!
//! A [`GeneratorChain`] is the continuous-time analogue: a rate matrix with
//! zero row sums, reversible with respect to its stationary vector. Its
//! symmetrized eigendecomposition is computed once and cached.

use std::collections::VecDeque;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseRows;
use crate::spectral::{self, SymmetricForm};

/// Largest state count stored as a dense matrix.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Row sums, probability normalization.
    pub structural: f64,
    /// Relative detailed-balance violation.
    pub balance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            structural: 1e-12,
            balance: 1e-10,
        }
    }
}

/// Undirected weighted graph; self-loops are `u == v`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConductanceGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl ConductanceGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut total = 0.0;
        for &(u, v, c) in &edges {
            if u >= n || v >= n {
                return Err(Error::VertexOutOfRange { u, v, n });
            }
            if !c.is_finite() || c < 0.0 {
                return Err(Error::InvalidConductance { u, v, value: c });
            }
            total += c;
        }
        if total <= 0.0 {
            return Err(Error::InvalidParameter("total conductance must be positive".into()));
        }
        Ok(ConductanceGraph { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Total incident conductance per vertex, self-loops counted once.
    pub fn vertex_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.n];
        for &(u, v, c) in &self.edges {
            w[u] += c;
            if u != v {
                w[v] += c;
            }
        }
        w
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Kernel {
    Dense(DMatrix<f64>),
    Sparse(SparseRows),
}

impl Kernel {
    /// Dense below [`DENSE_LIMIT`] states, sparse above.
    pub fn from_triplets(n: usize, triplets: Vec<(usize, usize, f64)>) -> Kernel {
        if n <= DENSE_LIMIT {
            let mut m = DMatrix::zeros(n, n);
            for (i, j, v) in triplets {
                m[(i, j)] += v;
            }
            Kernel::Dense(m)
        } else {
            Kernel::Sparse(SparseRows::from_triplets(n, triplets))
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Kernel> {
        let n = rows.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension { expected: n, got: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(Kernel::Dense(m))
    }

    pub fn n(&self) -> usize {
        match self {
            Kernel::Dense(m) => m.nrows(),
            Kernel::Sparse(s) => s.len(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Kernel::Dense(m) => m[(i, j)],
            Kernel::Sparse(s) => s.get(i, j),
        }
    }

    /// Nonzero entries of row `i`.
    pub fn row(&self, i: usize) -> Vec<(usize, f64)> {
        match self {
            Kernel::Dense(m) => (0..m.ncols())
                .filter_map(|j| {
                    let v = m[(i, j)];
                    (v != 0.0).then_some((j, v))
                })
                .collect(),
            Kernel::Sparse(s) => s.row(i).collect(),
        }
    }

    /// `out = K f`
    pub fn apply_into(&self, f: &[f64], out: &mut [f64]) {
        match self {
            Kernel::Dense(m) => {
                let n = m.nrows();
                out.iter_mut().for_each(|o| *o = 0.0);
                for j in 0..n {
                    let fj = f[j];
                    if fj == 0.0 {
                        continue;
                    }
                    for (o, &kij) in out.iter_mut().zip(m.column(j).iter()) {
                        *o += kij * fj;
                    }
                }
            }
            Kernel::Sparse(s) => s.mul_vec(f, out),
        }
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        self.apply_into(f, &mut out);
        out
    }

    /// `out = mu K`
    pub fn apply_left_into(&self, mu: &[f64], out: &mut [f64]) {
        match self {
            Kernel::Dense(m) => {
                for (j, o) in out.iter_mut().enumerate() {
                    *o = m.column(j).iter().zip(mu).map(|(k, x)| k * x).sum();
                }
            }
            Kernel::Sparse(s) => s.vec_mul(mu, out),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Kernel::Dense(m) => m.clone(),
            Kernel::Sparse(s) => {
                let n = s.len();
                let mut m = DMatrix::zeros(n, n);
                for i in 0..n {
                    for (j, v) in s.row(i) {
                        m[(i, j)] = v;
                    }
                }
                m
            }
        }
    }

    fn validate(&self, tol: &Tolerances) -> Result<()> {
        for i in 0..self.n() {
            let mut sum = 0.0;
            for (j, v) in self.row(i) {
                if v < 0.0 {
                    return Err(Error::NegativeEntry { row: i, col: j, value: v });
                }
                sum += v;
            }
            if (sum - 1.0).abs() > tol.structural {
                return Err(Error::NotStochastic { row: i, sum });
            }
        }
        Ok(())
    }

    fn is_irreducible(&self) -> Result<()> {
        let n = self.n();
        let mut forward = vec![Vec::new(); n];
        let mut backward = vec![Vec::new(); n];
        for i in 0..n {
            for (j, _) in self.row(i) {
                forward[i].push(j);
                backward[j].push(i);
            }
        }
        for adj in [&forward, &backward] {
            if let Some(state) = unreachable_from_zero(adj) {
                return Err(Error::Reducible { state });
            }
        }
        Ok(())
    }
}

fn unreachable_from_zero(adj: &[Vec<usize>]) -> Option<usize> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen.iter().position(|s| !s)
}

fn validate_distribution(pi: &[f64], n: usize, tol: &Tolerances) -> Result<()> {
    if pi.len() != n {
        return Err(Error::Dimension { expected: n, got: pi.len() });
    }
    if let Some(v) = pi.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidStationary(format!("entry {v} is not a nonnegative number")));
    }
    let sum: f64 = pi.iter().sum();
    if (sum - 1.0).abs() > tol.structural {
        return Err(Error::InvalidStationary(format!("sums to {sum}")));
    }
    Ok(())
}

/// Largest relative violation of `pi_i a_ij = pi_j a_ji` over the nonzero
/// pattern of `kernel`, with the offending pair.
fn balance_violation(kernel: &Kernel, pi: &[f64]) -> (f64, usize, usize) {
    let mut worst = (0.0, 0, 0);
    for i in 0..kernel.n() {
        for (j, kij) in kernel.row(i) {
            if i == j {
                continue;
            }
            let a = pi[i] * kij;
            let b = pi[j] * kernel.get(j, i);
            let scale = a.abs().max(b.abs()).max(f64::EPSILON * pi[i].max(pi[j]));
            if scale == 0.0 {
                continue;
            }
            let v = (a - b).abs() / scale;
            if v > worst.0 {
                worst = (v, i, j);
            }
        }
    }
    worst
}

fn solve_null_row(a_transposed: DMatrix<f64>) -> Result<Vec<f64>> {
    // Solve x A = 0, sum x = 1 by replacing the last equation with the normalization.
    let n = a_transposed.nrows();
    let mut system = a_transposed;
    for j in 0..n {
        system[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let lu = system.clone().lu();
    let mut x = lu
        .solve(&rhs)
        .ok_or_else(|| Error::StationarySolve("singular system".into()))?;
    // one step of iterative refinement
    let residual = &rhs - &system * &x;
    if let Some(dx) = lu.solve(&residual) {
        x += dx;
    }
    Ok(x.iter().copied().collect())
}

fn normalized(pi: Vec<f64>) -> Vec<f64> {
    let pi: Vec<f64> = pi.into_iter().map(|v| v.max(0.0)).collect();
    let total: f64 = pi.iter().sum();
    pi.into_iter().map(|v| v / total).collect()
}

fn residual(kernel: &Kernel, pi: &[f64]) -> f64 {
    let mut image = vec![0.0; pi.len()];
    kernel.apply_left_into(pi, &mut image);
    image.iter().zip(pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Unnormalized candidate `pi_j = pi_i K_ij / K_ji` spread along a BFS tree
/// of two-way edges. Exact for reversible kernels; callers verify it.
fn tree_ratios(kernel: &Kernel) -> Option<Vec<f64>> {
    let n = kernel.n();
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    let mut queue = VecDeque::from([0usize]);
    let mut seen = vec![false; n];
    seen[0] = true;
    while let Some(i) = queue.pop_front() {
        for (j, kij) in kernel.row(i) {
            if seen[j] {
                continue;
            }
            let kji = kernel.get(j, i);
            if kji <= 0.0 {
                continue;
            }
            pi[j] = pi[i] * kij / kji;
            seen[j] = true;
            queue.push_back(j);
        }
    }
    seen.iter().all(|&s| s).then_some(pi)
}

fn lazy_power_iteration(kernel: &Kernel) -> Result<Vec<f64>> {
    let n = kernel.n();
    let mut pi = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..1_000_000 {
        kernel.apply_left_into(&pi, &mut next);
        let mut delta: f64 = 0.0;
        for (p, q) in pi.iter_mut().zip(&next) {
            let lazy = 0.5 * (*p + q);
            delta = delta.max((lazy - *p).abs());
            *p = lazy;
        }
        if delta < 1e-16 {
            return Ok(pi);
        }
    }
    Err(Error::StationarySolve("power iteration did not converge".into()))
}

/// Stationary vector of an irreducible stochastic kernel.
///
/// Dense kernels are solved directly. Sparse kernels first try detailed
/// balance along a spanning tree and fall back to power iteration on the
/// lazy kernel `(I + K) / 2`, which converges for periodic chains too.
pub fn stationary_from_kernel(kernel: &Kernel) -> Result<Vec<f64>> {
    kernel.is_irreducible()?;
    let n = kernel.n();
    let pi = match kernel {
        Kernel::Dense(m) => {
            let mut a = m.transpose();
            for i in 0..n {
                a[(i, i)] -= 1.0;
            }
            solve_null_row(a)?
        }
        Kernel::Sparse(_) => match tree_ratios(kernel) {
            Some(pi) if residual(kernel, &normalized(pi.clone())) <= 1e-12 => pi,
            _ => lazy_power_iteration(kernel)?,
        },
    };
    let pi = normalized(pi);
    let residual = residual(kernel, &pi);
    if residual > 1e-12 {
        return Err(Error::StationarySolve(format!("residual {residual:e} above 1e-12")));
    }
    Ok(pi)
}

#[derive(Clone, Debug)]
pub struct ReversibleChain {
    kernel: Kernel,
    pi: Vec<f64>,
}

impl ReversibleChain {
    /// Validates the kernel and detailed balance; `pi` is solved for when absent.
    pub fn new(kernel: Kernel, pi: Option<Vec<f64>>, tol: &Tolerances) -> Result<Self> {
        kernel.validate(tol)?;
        let pi = match pi {
            Some(pi) => pi,
            None => stationary_from_kernel(&kernel)?,
        };
        validate_distribution(&pi, kernel.n(), tol)?;
        let (violation, i, j) = balance_violation(&kernel, &pi);
        if violation > tol.balance {
            return Err(Error::DetailedBalance { i, j, violation, tol: tol.balance });
        }
        Ok(ReversibleChain { kernel, pi })
    }

    pub fn from_rows(rows: &[Vec<f64>], pi: Option<Vec<f64>>) -> Result<Self> {
        Self::new(Kernel::from_rows(rows)?, pi, &Tolerances::default())
    }

    /// Random walk driven by edge conductances: `K(u, v) = c(u, v) / c(u)`
    /// and `pi(u) = c(u) / sum_w c(w)`.
    pub fn from_conductances(graph: &ConductanceGraph) -> Result<Self> {
        let weights = graph.vertex_weights();
        if let Some(vertex) = weights.iter().position(|&w| w <= 0.0) {
            return Err(Error::IsolatedVertex { vertex });
        }
        let total: f64 = weights.iter().sum();
        let mut triplets = Vec::with_capacity(2 * graph.edges().len());
        for &(u, v, c) in graph.edges() {
            if c == 0.0 {
                continue;
            }
            triplets.push((u, v, c / weights[u]));
            if u != v {
                triplets.push((v, u, c / weights[v]));
            }
        }
        let kernel = Kernel::from_triplets(graph.n(), triplets);
        let pi = weights.iter().map(|w| w / total).collect();
        Self::new(kernel, Some(pi), &Tolerances::default())
    }

    pub fn n(&self) -> usize {
        self.kernel.n()
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn event(&self, mask: Vec<bool>) -> Result<EventSet> {
        EventSet::new(&self.pi, mask)
    }

    pub fn event_from_states(&self, states: &[usize]) -> Result<EventSet> {
        EventSet::from_states(&self.pi, states)
    }
}

/// True iff the largest relative violation of detailed balance is at most `tol`.
pub fn check_detailed_balance(chain: &ReversibleChain, tol: f64) -> bool {
    balance_violation(&chain.kernel, &chain.pi).0 <= tol
}

/// Detailed-balance check for a raw kernel and candidate stationary vector.
pub fn kernel_satisfies_balance(kernel: &Kernel, pi: &[f64], tol: f64) -> bool {
    balance_violation(kernel, pi).0 <= tol
}

/// Continuous-time reversible chain with generator `Q`.
#[derive(Clone, Debug)]
pub struct GeneratorChain {
    q: DMatrix<f64>,
    pi: Vec<f64>,
    decomposition: OnceLock<SymmetricForm>,
}

impl GeneratorChain {
    pub fn new(q: DMatrix<f64>, pi: Option<Vec<f64>>, tol: &Tolerances) -> Result<Self> {
        let n = q.nrows();
        if q.ncols() != n {
            return Err(Error::Dimension { expected: n, got: q.ncols() });
        }
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                let v = q[(i, j)];
                if i != j && v < 0.0 {
                    return Err(Error::NegativeEntry { row: i, col: j, value: v });
                }
                sum += v;
            }
            let scale = q[(i, i)].abs().max(1.0);
            if sum.abs() > tol.structural * scale {
                return Err(Error::NotGenerator { row: i, sum });
            }
        }
        let pi = match pi {
            Some(pi) => pi,
            None => {
                let mut jump = q.clone();
                for i in 0..n {
                    jump[(i, i)] = 0.0;
                }
                Kernel::Dense(jump).is_irreducible()?;
                let mut pi = solve_null_row(q.transpose())?;
                pi.iter_mut().for_each(|v| *v = v.max(0.0));
                let total: f64 = pi.iter().sum();
                pi.iter_mut().for_each(|v| *v /= total);
                pi
            }
        };
        validate_distribution(&pi, n, tol)?;
        let (violation, i, j) = balance_violation(&Kernel::Dense(q.clone()), &pi);
        if violation > tol.balance {
            return Err(Error::DetailedBalance { i, j, violation, tol: tol.balance });
        }
        Ok(GeneratorChain { q, pi, decomposition: OnceLock::new() })
    }

    pub fn from_rows(rows: &[Vec<f64>], pi: Option<Vec<f64>>) -> Result<Self> {
        let Kernel::Dense(q) = Kernel::from_rows(rows)? else {
            unreachable!("from_rows is always dense")
        };
        Self::new(q, pi, &Tolerances::default())
    }

    pub fn n(&self) -> usize {
        self.q.nrows()
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn decomposition(&self) -> &SymmetricForm {
        self.decomposition
            .get_or_init(|| SymmetricForm::new(&self.q, &self.pi))
    }

    pub fn event(&self, mask: Vec<bool>) -> Result<EventSet> {
        EventSet::new(&self.pi, mask)
    }

    pub fn event_from_states(&self, states: &[usize]) -> Result<EventSet> {
        EventSet::from_states(&self.pi, states)
    }
}

/// Skeleton chain with kernel `exp(tQ)`.
pub fn embed_discrete(generator: &GeneratorChain, t: f64) -> Result<ReversibleChain> {
    let mut k = spectral::heat_operator(generator, t)?;
    let n = k.nrows();
    for i in 0..n {
        let mut sum = 0.0;
        for j in 0..n {
            let v = k[(i, j)].max(0.0);
            k[(i, j)] = v;
            sum += v;
        }
        for j in 0..n {
            k[(i, j)] /= sum;
        }
    }
    ReversibleChain::new(Kernel::Dense(k), Some(generator.pi.clone()), &Tolerances::default())
}

/// A static event: a subset of states with its stationary mass.
#[derive(Clone, Debug, PartialEq)]
pub struct EventSet {
    mask: Vec<bool>,
    mass: f64,
}

impl EventSet {
    pub fn new(pi: &[f64], mask: Vec<bool>) -> Result<Self> {
        if mask.len() != pi.len() {
            return Err(Error::Dimension { expected: pi.len(), got: mask.len() });
        }
        let mass = mask
            .iter()
            .zip(pi)
            .filter_map(|(&m, &p)| m.then_some(p))
            .sum::<f64>()
            .clamp(0.0, 1.0);
        Ok(EventSet { mask, mass })
    }

    pub fn from_states(pi: &[f64], states: &[usize]) -> Result<Self> {
        let mut mask = vec![false; pi.len()];
        for &s in states {
            if s >= pi.len() {
                return Err(Error::Dimension { expected: pi.len(), got: s + 1 });
            }
            mask[s] = true;
        }
        Self::new(pi, mask)
    }

    pub fn full(pi: &[f64]) -> Self {
        EventSet { mask: vec![true; pi.len()], mass: 1.0 }
    }

    pub fn complement(&self, pi: &[f64]) -> Result<Self> {
        Self::new(pi, self.mask.iter().map(|m| !m).collect())
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn contains(&self, state: usize) -> bool {
        self.mask[state]
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    /// No state belongs to the event.
    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    pub fn states(&self) -> Vec<usize> {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect()
    }

    pub fn indicator(&self) -> Vec<f64> {
        self.mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect()
    }
}

/// `pi(C)`, recomputed from the chain's stationary vector.
pub fn event_mass(pi: &[f64], event: &EventSet) -> Result<f64> {
    Ok(EventSet::new(pi, event.mask.clone())?.mass)
}

/// Markov semigroup `T_t` acting on functions of the state.
pub trait MarkovOperator {
    type Time: Copy + std::fmt::Debug;

    fn stationary(&self) -> &[f64];

    /// `(T_t f)(x) = E[f(X_t) | X_0 = x]`
    fn propagate(&self, f: &[f64], t: Self::Time) -> Result<Vec<f64>>;

    fn double(t: Self::Time) -> Self::Time;
}

impl MarkovOperator for ReversibleChain {
    type Time = u64;

    fn stationary(&self) -> &[f64] {
        &self.pi
    }

    fn propagate(&self, f: &[f64], t: u64) -> Result<Vec<f64>> {
        let mut cur = f.to_vec();
        let mut next = vec![0.0; f.len()];
        for _ in 0..t {
            self.kernel.apply_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    fn double(t: u64) -> u64 {
        2 * t
    }
}

impl MarkovOperator for GeneratorChain {
    type Time = f64;

    fn stationary(&self) -> &[f64] {
        &self.pi
    }

    fn propagate(&self, f: &[f64], t: f64) -> Result<Vec<f64>> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        Ok(self.decomposition().apply_function(f, |mu| (t * mu).exp()))
    }

    fn double(t: f64) -> f64 {
        2.0 * t
    }
}
