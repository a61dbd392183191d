//! Plain-text chain files.
//!
//! Matrix format: a line with `N`, then `N` rows of transition
//! probabilities, then an optional row of stationary weights. Edge lists:
//! one `u v c` per line. Blank lines and lines starting with `#` are skipped.

use crate::chain::{ConductanceGraph, ReversibleChain};
use crate::error::{Error, Result};
use crate::report::num;

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn numbers(line: usize, text: &str) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|tok| tok.parse::<f64>().map_err(|_| parse_err(line, format!("not a number: {tok:?}"))))
        .collect()
}

/// Reads the matrix format. Structural errors carry the offending line;
/// a well-formed file describing an invalid chain returns the chain error.
pub fn parse_chain(text: &str) -> Result<ReversibleChain> {
    let mut lines = content_lines(text);
    let (first, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let n: usize = header.parse().map_err(|_| parse_err(first, format!("expected the state count, got {header:?}")))?;
    if n == 0 {
        return Err(parse_err(first, "state count must be positive"));
    }
    let mut rows = Vec::with_capacity(n);
    let mut last = first;
    for _ in 0..n {
        let (line, text) = lines.next().ok_or_else(|| parse_err(last + 1, format!("expected {n} matrix rows, got {}", rows.len())))?;
        let row = numbers(line, text)?;
        if row.len() != n {
            return Err(parse_err(line, format!("expected {n} entries, got {}", row.len())));
        }
        rows.push(row);
        last = line;
    }
    let pi = match lines.next() {
        None => None,
        Some((line, text)) => {
            let w = numbers(line, text)?;
            if w.len() != n {
                return Err(parse_err(line, format!("expected {n} stationary weights, got {}", w.len())));
            }
            Some(w)
        }
    };
    if let Some((line, _)) = lines.next() {
        return Err(parse_err(line, "trailing content"));
    }
    ReversibleChain::from_rows(&rows, pi)
}

/// Writes the matrix format with the stationary row, in full precision.
pub fn chain_to_text(chain: &ReversibleChain) -> String {
    let n = chain.n();
    let mut out = format!("{n}\n");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| num(chain.kernel().get(i, j))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    let pi: Vec<String> = chain.pi().iter().map(|&w| num(w)).collect();
    out.push_str(&pi.join(" "));
    out.push('\n');
    out
}

/// Reads `u v c` lines; the vertex count is one more than the largest index.
pub fn parse_edge_list(text: &str) -> Result<ConductanceGraph> {
    let mut edges = Vec::new();
    let mut n = 0;
    for (line, text) in content_lines(text) {
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(parse_err(line, format!("expected `u v c`, got {} fields", toks.len())));
        }
        let vertex = |tok: &str| tok.parse::<usize>().map_err(|_| parse_err(line, format!("not a vertex index: {tok:?}")));
        let (u, v) = (vertex(toks[0])?, vertex(toks[1])?);
        let c: f64 = toks[2].parse().map_err(|_| parse_err(line, format!("not a conductance: {:?}", toks[2])))?;
        n = n.max(u + 1).max(v + 1);
        edges.push((u, v, c));
    }
    if edges.is_empty() {
        return Err(parse_err(1, "no edges"));
    }
    ConductanceGraph::new(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_of(e: Error) -> usize {
        match e {
            Error::Parse { line, .. } => line,
            other => panic!("expected a parse error, got {other}"),
        }
    }

    #[test]
    fn round_trip() {
        let chain = ReversibleChain::from_rows(&[vec![0.5, 0.5, 0.0], vec![0.25, 0.5, 0.25], vec![0.0, 0.5, 0.5]], None).unwrap();
        let back = parse_chain(&chain_to_text(&chain)).unwrap();
        assert_eq!(back.pi(), chain.pi());
        assert_eq!(chain_to_text(&back), chain_to_text(&chain));
    }

    #[test]
    fn stationary_row_is_optional() {
        let chain = parse_chain("# two states\n2\n0.5 0.5\n0.5 0.5\n").unwrap();
        assert!((chain.pi()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reports_the_offending_line() {
        assert_eq!(line_of(parse_chain("2\n0.5 0.5\n0.5 x\n").unwrap_err()), 3);
        assert_eq!(line_of(parse_chain("2\n0.5 0.5 0\n").unwrap_err()), 2);
        assert_eq!(line_of(parse_chain("two\n").unwrap_err()), 1);
        assert_eq!(line_of(parse_chain("2\n1 0\n").unwrap_err()), 3);
        assert_eq!(line_of(parse_chain("2\n.5 .5\n.5 .5\n.5 .5\n1\n").unwrap_err()), 5);
        assert_eq!(line_of(parse_edge_list("0 1 1\n1 2\n").unwrap_err()), 2);
    }

    #[test]
    fn edge_list_builds_a_walk() {
        let g = parse_edge_list("0 1 1\n1 2 3\n").unwrap();
        let chain = ReversibleChain::from_conductances(&g).unwrap();
        assert_eq!(chain.n(), 3);
        assert!((chain.kernel().get(1, 2) - 0.75).abs() < 1e-15);
    }
}
