//! File formats for kernels and graphs.
//!
//! Kernels load from JSON (`{"n": 2, "entries": [[[re,im],...],...]}`),
//! from real-valued CSV (n rows of n comma-separated floats), or from the
//! inline shorthand `diag(a,b,…)`. Graphs load from JSON
//! (`{"vertices": n, "edges": [[u,v],...]}`, 0-based). Parsers reject
//! non-finite numbers; the loaded kernel is validated before it is
//! returned.

use std::path::Path;

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::experiments::SimpleGraph;
use crate::kernel::HermitianKernel;
use crate::C64;

#[derive(Deserialize)]
struct KernelWire {
    n: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
struct GraphWire {
    vertices: usize,
    edges: Vec<[usize; 2]>,
}

/// Parses the JSON kernel format and validates the result.
pub fn parse_kernel_json(text: &str) -> Result<HermitianKernel> {
    let wire: KernelWire =
        serde_json::from_str(text).map_err(|e| Error::parse(format!("kernel JSON: {e}")))?;
    if wire.entries.len() != wire.n || wire.entries.iter().any(|row| row.len() != wire.n) {
        return Err(Error::parse(format!(
            "kernel JSON: expected {0}×{0} entries",
            wire.n
        )));
    }
    if wire
        .entries
        .iter()
        .flatten()
        .any(|&[re, im]| !re.is_finite() || !im.is_finite())
    {
        return Err(Error::parse("kernel JSON: non-finite entry"));
    }
    let m = DMatrix::from_fn(wire.n, wire.n, |i, j| {
        let [re, im] = wire.entries[i][j];
        C64::new(re, im)
    });
    HermitianKernel::from_matrix(m)
}

/// Parses the real-valued CSV kernel format (one matrix row per line) and
/// validates the result.
pub fn parse_kernel_csv(text: &str) -> Result<HermitianKernel> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for cell in line.split(',') {
            let value: f64 = cell
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("kernel CSV line {}: bad float {cell:?}", lineno + 1)))?;
            if !value.is_finite() {
                return Err(Error::parse(format!(
                    "kernel CSV line {}: non-finite entry",
                    lineno + 1
                )));
            }
            row.push(value);
        }
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::parse("kernel CSV: no rows"));
    }
    if rows.iter().any(|row| row.len() != n) {
        return Err(Error::parse(format!("kernel CSV: expected {n}×{n} entries")));
    }
    let m = DMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0));
    HermitianKernel::from_matrix(m)
}

/// Parses the inline `diag(a,b,…)` shorthand and validates the result.
pub fn parse_kernel_shorthand(text: &str) -> Result<HermitianKernel> {
    let inner = text
        .trim()
        .strip_prefix("diag(")
        .and_then(|rest| rest.strip_suffix(')'))
        .ok_or_else(|| Error::parse(format!("expected diag(a,b,…), got {text:?}")))?;
    let mut diagonal = Vec::new();
    for cell in inner.split(',') {
        let value: f64 = cell
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("diag shorthand: bad float {cell:?}")))?;
        if !value.is_finite() {
            return Err(Error::parse("diag shorthand: non-finite entry"));
        }
        diagonal.push(value);
    }
    HermitianKernel::from_diagonal(&diagonal)
}

/// Loads a kernel from the `diag(…)` shorthand or from a JSON/CSV file,
/// sniffing the format from the leading character.
pub fn load_kernel(source: &str) -> Result<HermitianKernel> {
    if source.trim_start().starts_with("diag(") {
        return parse_kernel_shorthand(source);
    }
    let text = std::fs::read_to_string(Path::new(source))?;
    if text.trim_start().starts_with('{') {
        parse_kernel_json(&text)
    } else {
        parse_kernel_csv(&text)
    }
}

/// Parses the JSON graph format; connectivity and edge validity are
/// checked by the graph constructor.
pub fn parse_graph_json(text: &str) -> Result<SimpleGraph> {
    let wire: GraphWire =
        serde_json::from_str(text).map_err(|e| Error::parse(format!("graph JSON: {e}")))?;
    SimpleGraph::new(wire.vertices, wire.edges.iter().map(|&[u, v]| (u, v)).collect())
}

/// Loads a graph from a JSON file.
pub fn load_graph(path: &str) -> Result<SimpleGraph> {
    let text = std::fs::read_to_string(Path::new(path))?;
    parse_graph_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn json_round() {
        let k = parse_kernel_json(
            r#"{"n": 2, "entries": [[[0.5, 0.0], [0.1, 0.2]], [[0.1, -0.2], [0.5, 0.0]]]}"#,
        )
        .unwrap();
        assert_eq!(k.n(), 2);
        assert_abs_diff_eq!(k.entries()[(0, 1)].im, 0.2, epsilon = 0.0);
    }

    #[test]
    fn json_shape_mismatch_is_a_parse_error() {
        let err = parse_kernel_json(r#"{"n": 2, "entries": [[[0.5, 0.0]]]}"#).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn json_rejects_malformed_text() {
        assert!(matches!(
            parse_kernel_json("not json").unwrap_err(),
            Error::Parse { .. }
        ));
    }

    #[test]
    fn csv_parses_real_matrix() {
        let k = parse_kernel_csv("0.5, 0.1\n0.1, 0.5\n").unwrap();
        assert_eq!(k.n(), 2);
        assert_abs_diff_eq!(k.entries()[(1, 0)].re, 0.1, epsilon = 0.0);
    }

    #[test]
    fn csv_rejects_non_finite_and_ragged() {
        assert!(matches!(
            parse_kernel_csv("0.5, NaN\n0.1, 0.5\n").unwrap_err(),
            Error::Parse { .. }
        ));
        assert!(matches!(
            parse_kernel_csv("0.5\n0.1, 0.5\n").unwrap_err(),
            Error::Parse { .. }
        ));
        assert!(matches!(
            parse_kernel_csv("").unwrap_err(),
            Error::Parse { .. }
        ));
    }

    #[test]
    fn shorthand_builds_diagonal_kernel() {
        let k = parse_kernel_shorthand("diag(0.5, 0.25)").unwrap();
        assert_eq!(k.n(), 2);
        assert_abs_diff_eq!(k.entries()[(0, 0)].re, 0.5, epsilon = 0.0);
        assert_abs_diff_eq!(k.entries()[(1, 1)].re, 0.25, epsilon = 0.0);
        assert!(parse_kernel_shorthand("diag(0.5").is_err());
        assert!(parse_kernel_shorthand("diag(inf)").is_err());
    }

    #[test]
    fn shorthand_with_invalid_eigenvalue_is_a_domain_error() {
        // parses fine, fails kernel validation — not a parse error
        let err = parse_kernel_shorthand("diag(1.5)").unwrap_err();
        assert!(matches!(err, Error::SpectrumOutOfRange { .. }));
    }

    #[test]
    fn load_kernel_dispatches_on_shorthand() {
        let k = load_kernel("diag(0.3)").unwrap();
        assert_eq!(k.n(), 1);
    }

    #[test]
    fn missing_file_is_an_io_error() {
        assert!(matches!(
            load_kernel("/nonexistent/kernel.json").unwrap_err(),
            Error::Io(_)
        ));
    }

    #[test]
    fn graph_json_parses_and_validates() {
        let g = parse_graph_json(r#"{"vertices": 3, "edges": [[0,1],[1,2],[0,2]]}"#).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 3);
        assert!(matches!(
            parse_graph_json(r#"{"vertices": 3}"#).unwrap_err(),
            Error::Parse { .. }
        ));
        // disconnected is a domain error, not a parse error
        assert!(matches!(
            parse_graph_json(r#"{"vertices": 4, "edges": [[0,1],[2,3]]}"#).unwrap_err(),
            Error::Disconnected
        ));
    }
}
