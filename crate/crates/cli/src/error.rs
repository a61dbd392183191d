use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{origin}:{line}: {msg}")]
    Parse { origin: String, line: usize, msg: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] exit_tail::Error),

    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
}

/// Process exit statuses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
    Error,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
            Status::Error => 3,
        }
    }

    /// The worse of two outcomes; errors dominate failures, which dominate
    /// inconclusive results.
    pub fn and(self, other: Status) -> Status {
        let rank = |s: Status| match s {
            Status::Pass => 0,
            Status::Inconclusive => 1,
            Status::Fail => 2,
            Status::Error => 3,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

impl CliError {
    /// Machine-readable record written to `error.json` and stderr.
    pub fn record(&self) -> serde_json::Value {
        let line = match self {
            CliError::Parse { line, .. } => Some(*line),
            CliError::Core(exit_tail::Error::Parse { line, .. }) => Some(*line),
            _ => None,
        };
        let kind = match self {
            CliError::Parse { .. } | CliError::Core(exit_tail::Error::Parse { .. }) => "parse",
            CliError::Usage(_) => "usage",
            CliError::Core(_) => "invalid-input",
            CliError::Write { .. } => "io",
        };
        serde_json::json!({
            "status": Status::Error,
            "code": Status::Error.code(),
            "kind": kind,
            "line": line,
            "message": self.to_string(),
        })
    }
}
