use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} has zero total conductance")]
    IsolatedVertex { vertex: usize },

    #[error("invalid conductance {value} on edge ({u}, {v})")]
    InvalidConductance { u: usize, v: usize, value: f64 },

    #[error("edge ({u}, {v}) references a vertex outside 0..{n}")]
    VertexOutOfRange { u: usize, v: usize, n: usize },

    #[error("row {row} sums to {sum}, not 1")]
    NotStochastic { row: usize, sum: f64 },

    #[error("row {row} of the generator sums to {sum}, not 0")]
    NotGenerator { row: usize, sum: f64 },

    #[error("negative transition entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("invalid stationary measure: {0}")]
    InvalidStationary(String),

    #[error("detailed balance violated: relative error {violation:e} at ({i}, {j}) exceeds {tol:e}")]
    DetailedBalance { i: usize, j: usize, violation: f64, tol: f64 },

    #[error("chain is reducible: state {state} cannot reach every other state")]
    Reducible { state: usize },

    #[error("stationary solve failed: {0}")]
    StationarySolve(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("event has zero variance (p = {0})")]
    DegenerateEvent(f64),

    #[error("probability {0} outside the open interval (0, 1)")]
    ProbabilityRange(f64),

    #[error("lambda {lambda} must lie in ({p}, 1)")]
    LambdaRange { lambda: f64, p: f64 },

    #[error("no admissible k for t = {t}")]
    NoAdmissibleK { t: f64 },

    #[error("decorrelation curve is not nonincreasing at t = {at}")]
    NonMonotoneCurve { at: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("function norm {norm} exceeds 1")]
    NormPrecondition { norm: f64 },

    #[error("fit needs at least 2 points, got {0}")]
    FitTooShort(usize),

    #[error("self-loop retuning infeasible at vertex {vertex} (required weight {weight})")]
    InfeasibleRetuning { vertex: i64, weight: f64 },

    #[error("event times must be strictly increasing")]
    UnsortedTimes,

    #[error("negative gap {0}")]
    NegativeGap(f64),

    #[error("replica count must be positive")]
    NoReplicas,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
