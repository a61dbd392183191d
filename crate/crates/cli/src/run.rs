//! Output directory, checks and the run manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::Config;
use crate::error::{CliError, Status};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

pub struct Run {
    pub command: String,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub threads: usize,
    started: Instant,
    outputs: Vec<String>,
    checks: Vec<Check>,
}

impl Run {
    pub fn new(command: &str, out: &Path, threads: usize) -> Result<Self, CliError> {
        std::fs::create_dir_all(out).map_err(|source| CliError::Write { path: out.display().to_string(), source })?;
        Ok(Run {
            command: command.to_string(),
            out: out.to_path_buf(),
            seed: None,
            threads,
            started: Instant::now(),
            outputs: Vec::new(),
            checks: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        let path = self.out.join(name);
        std::fs::write(&path, content).map_err(|source| CliError::Write { path: path.display().to_string(), source })?;
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.to_string());
        }
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.write(name, &text)
    }

    /// `holds` passes, otherwise the check takes `otherwise`.
    pub fn check(&mut self, name: &str, holds: bool, otherwise: Status, detail: String) {
        let status = if holds { Status::Pass } else { otherwise };
        self.checks.push(Check { name: name.to_string(), status, detail });
    }

    pub fn status(&self) -> Status {
        self.checks.iter().fold(Status::Pass, |s, c| s.and(c.status))
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    /// Writes `manifest.json` and, unless the run passed, `error.json`.
    pub fn finish(mut self, config: &Config) -> Result<Status, CliError> {
        let status = self.status();
        if status != Status::Pass {
            let failing: Vec<&Check> = self.checks.iter().filter(|c| c.status != Status::Pass).collect();
            let record = serde_json::json!({
                "status": status,
                "code": status.code(),
                "kind": "check",
                "checks": failing,
            });
            self.write_json("error.json", &record)?;
            eprintln!("{}", serde_json::to_string(&record).expect("serializable"));
        }
        let manifest = serde_json::json!({
            "command": self.command,
            "status": status,
            "exit_code": status.code(),
            "seed": self.seed,
            "config": config.echo(),
            "unused_keys": config.unused(),
            "versions": {
                "exit-tail": exit_tail::VERSION,
                "exit-tail-cli": env!("CARGO_PKG_VERSION"),
            },
            "threads": self.threads,
            "outputs": self.outputs,
            "checks": self.checks,
            "wall_time_seconds": self.started.elapsed().as_secs_f64(),
        });
        self.write_json("manifest.json", &manifest)?;
        Ok(status)
    }
}
