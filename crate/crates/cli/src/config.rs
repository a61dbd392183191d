//! Key-value run configuration.
//!
//! Sources in increasing priority: a config file of `key = value` lines,
//! `EXIT_TAIL_<KEY>` environment variables, `--set key=value` overrides and
//! the dedicated flags. Every key a command reads is echoed in the manifest,
//! together with the default it fell back to.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::CliError;

pub const ENV_PREFIX: &str = "EXIT_TAIL_";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    File,
    Env,
    Override,
    Flag,
    Default,
}

#[derive(Clone, Debug, Serialize)]
pub struct Entry {
    pub value: String,
    pub source: Source,
}

#[derive(Debug, Default)]
pub struct Config {
    entries: BTreeMap<String, Entry>,
    read: RefCell<BTreeMap<String, Entry>>,
}

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

impl Config {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse_file_text(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CliError::Parse {
                origin: origin.to_string(),
                line: i + 1,
                msg: format!("expected `key = value`, got {line:?}"),
            })?;
            let key = normalize(key);
            if key.is_empty() {
                return Err(CliError::Parse { origin: origin.to_string(), line: i + 1, msg: "empty key".into() });
            }
            self.set(&key, value.trim(), Source::File);
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        self.parse_file_text(&text, &path.display().to_string())
    }

    pub fn load_env(&mut self, vars: impl IntoIterator<Item = (String, String)>) {
        for (name, value) in vars {
            if let Some(key) = name.strip_prefix(ENV_PREFIX) {
                self.set(&normalize(key), &value, Source::Env);
            }
        }
    }

    pub fn apply_override(&mut self, pair: &str) -> Result<(), CliError> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("override must be key=value, got {pair:?}")))?;
        self.set(&normalize(key), value.trim(), Source::Override);
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str, source: Source) {
        self.entries.insert(normalize(key), Entry { value: value.to_string(), source });
    }

    fn raw(&self, key: &str) -> Option<Entry> {
        let entry = self.entries.get(key).cloned();
        if let Some(e) = &entry {
            self.read.borrow_mut().insert(key.to_string(), e.clone());
        }
        entry
    }

    fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        value.parse().map_err(|e: T::Err| CliError::Usage(format!("bad value for {key}: {value:?} ({e})")))
    }

    pub fn get<T: FromStr + ToString>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            Some(e) => Self::parse_value(key, &e.value),
            None => {
                self.read.borrow_mut().insert(key.to_string(), Entry { value: default.to_string(), source: Source::Default });
                Ok(default)
            }
        }
    }

    pub fn optional<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key).map(|e| Self::parse_value(key, &e.value)).transpose()
    }

    pub fn required<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.optional(key)?.ok_or_else(|| CliError::Usage(format!("missing required key {key}")))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|e| e.value.split(',').map(|v| Self::parse_value(key, v.trim())).collect())
            .transpose()
    }

    /// Keys that were read, with the values used.
    pub fn echo(&self) -> BTreeMap<String, Entry> {
        self.read.borrow().clone()
    }

    /// Keys that were supplied but never read by the command.
    pub fn unused(&self) -> Vec<String> {
        let read = self.read.borrow();
        self.entries.keys().filter(|k| !read.contains_key(*k)).cloned().collect()
    }
}

/// Integer grid: `lo:hi` (every integer), `log:lo:hi:points`, or a comma list.
pub fn int_grid(key: &str, text: &str) -> Result<Vec<u64>, CliError> {
    let bad = |msg: &str| CliError::Usage(format!("bad grid for {key}: {text:?} ({msg})"));
    let int = |s: &str| s.trim().parse::<u64>().map_err(|_| bad("not an integer"));
    let grid: Vec<u64> = if let Some(rest) = text.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected log:lo:hi:points"));
        }
        let (lo, hi, points) = (int(parts[0])?, int(parts[1])?, int(parts[2])?);
        if lo == 0 || hi < lo || points < 2 {
            return Err(bad("need 1 <= lo <= hi and at least 2 points"));
        }
        exit_tail::fit::log_grid(lo, hi, points as usize)
    } else if let Some((lo, hi)) = text.split_once(':') {
        let (lo, hi) = (int(lo)?, int(hi)?);
        if hi < lo {
            return Err(bad("hi below lo"));
        }
        (lo..=hi).collect()
    } else {
        text.split(',').map(int).collect::<Result<_, _>>()?
    };
    if grid.is_empty() {
        return Err(bad("empty"));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(bad("not sorted"));
    }
    Ok(grid)
}

/// Real grid: `lo:hi:step` or a comma list.
pub fn real_grid(key: &str, text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |msg: &str| CliError::Usage(format!("bad grid for {key}: {text:?} ({msg})"));
    let real = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let parts: Vec<&str> = text.split(':').collect();
    let grid: Vec<f64> = match parts.len() {
        1 => text.split(',').map(real).collect::<Result<_, _>>()?,
        3 => {
            let (lo, hi, step) = (real(parts[0])?, real(parts[1])?, real(parts[2])?);
            if !(step > 0.0) || hi < lo {
                return Err(bad("need lo <= hi and a positive step"));
            }
            let count = ((hi - lo) / step + 1e-9).floor() as usize;
            (0..=count).map(|i| lo + i as f64 * step).collect()
        }
        _ => return Err(bad("expected lo:hi:step or a list")),
    };
    if grid.is_empty() || grid.iter().any(|t| !t.is_finite()) {
        return Err(bad("empty or not finite"));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(bad("not sorted"));
    }
    Ok(grid)
}

impl Config {
    pub fn int_grid(&self, key: &str, default: &str) -> Result<Vec<u64>, CliError> {
        let text: String = self.get(key, default.to_string())?;
        int_grid(key, &text)
    }

    pub fn real_grid(&self, key: &str, default: &str) -> Result<Vec<f64>, CliError> {
        let text: String = self.get(key, default.to_string())?;
        real_grid(key, &text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn later_sources_win_and_reads_are_echoed() {
        let mut c = Config::default();
        c.parse_file_text("beta = 1.2\n# comment\nn=100 # trailing\n", "cfg").unwrap();
        c.load_env([("EXIT_TAIL_BETA".to_string(), "1.4".to_string()), ("OTHER".to_string(), "x".to_string())]);
        c.apply_override("n=200").unwrap();
        assert_eq!(c.get("beta", 1.5).unwrap(), 1.4);
        assert_eq!(c.get("n", 10usize).unwrap(), 200);
        assert_eq!(c.get("points", 40usize).unwrap(), 40);
        let echo = c.echo();
        assert_eq!(echo["beta"].source, Source::Env);
        assert_eq!(echo["n"].source, Source::Override);
        assert_eq!(echo["points"].source, Source::Default);
        assert!(c.unused().is_empty());
    }

    #[test]
    fn file_errors_carry_the_line() {
        let mut c = Config::default();
        match c.parse_file_text("a = 1\n\nnot a pair\n", "cfg") {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn grids() {
        assert_eq!(int_grid("g", "1:4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(int_grid("g", "2,5,9").unwrap(), vec![2, 5, 9]);
        assert_eq!(int_grid("g", "log:1:100:3").unwrap(), vec![1, 10, 100]);
        assert!(int_grid("g", "5,2").is_err());
        assert_eq!(real_grid("g", "0:1:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(real_grid("g", "0:1").is_err());
    }
}
