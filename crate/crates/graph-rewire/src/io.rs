//! File formats: whitespace-separated edge lists (`#` comments allowed),
//! CSV feature matrices, and one-integer-per-line label files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{FeatureMatrix, Graph, LabelVector};

/// Read `u v` pairs, one per line. Blank lines and lines starting with `#`
/// are skipped. `num_nodes` is `max endpoint + 1` unless a larger count is
/// given explicitly.
pub fn load_edge_list(path: &Path, num_nodes: Option<usize>) -> Result<Graph> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut edges = Vec::new();
    let mut max_node = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let (u, v) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => {
                let u = a.parse::<usize>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    msg: format!("bad node id {a:?}: {e}"),
                })?;
                let v = b.parse::<usize>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    msg: format!("bad node id {b:?}: {e}"),
                })?;
                (u, v)
            }
            _ => {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected two whitespace-separated node ids, got {trimmed:?}"),
                })
            }
        };
        if u == v {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("self-loop ({u},{v}) rejected"),
            });
        }
        max_node = max_node.max(u).max(v);
        edges.push((u, v));
    }
    let implied = if edges.is_empty() { 0 } else { max_node + 1 };
    let n = match num_nodes {
        Some(n) if n < implied => {
            return Err(Error::validation(format!(
                "edge list references node {max_node} but only {n} nodes declared"
            )))
        }
        Some(n) => n,
        None => implied,
    };
    Graph::from_edges(n, edges)
}

/// Write edges as `u v` lines, `u < v`, lexicographic order.
pub fn save_edge_list(path: &Path, g: &Graph) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Read a headerless CSV of floats, one row per node.
pub fn load_features(path: &Path) -> Result<FeatureMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::validation(format!("cannot open {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: idx + 1,
            msg: e.to_string(),
        })?;
        let row: std::result::Result<Vec<f64>, _> =
            record.iter().map(|f| f.parse::<f64>()).collect();
        let row = row.map_err(|e| Error::Parse {
            line: idx + 1,
            msg: format!("bad float: {e}"),
        })?;
        rows.push(row);
    }
    FeatureMatrix::from_rows(rows)
}

/// Write features as headerless CSV.
pub fn save_features(path: &Path, features: &FeatureMatrix) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::validation(format!("cannot create {}: {e}", path.display())))?;
    for row in features.rows() {
        w.write_record(row.iter().map(|x| x.to_string()))
            .map_err(|e| Error::validation(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Read one integer label per line (`#` comments allowed); arbitrary ids
/// are remapped to contiguous 0-based classes sorted by original value.
pub fn load_labels(path: &Path) -> Result<LabelVector> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut raw = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let v = trimmed.parse::<i64>().map_err(|e| Error::Parse {
            line: idx + 1,
            msg: format!("bad label {trimmed:?}: {e}"),
        })?;
        raw.push(v);
    }
    Ok(LabelVector::from_raw(&raw))
}

/// Write labels one per line in node order.
pub fn save_labels(path: &Path, labels: &LabelVector) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for &l in labels.labels() {
        writeln!(w, "{l}")?;
    }
    w.flush()?;
    Ok(())
}
