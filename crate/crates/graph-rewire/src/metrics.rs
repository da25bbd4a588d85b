//! Alignment and quality metrics: NMI, edge homophily, adjusted homophily,
//! delta alignment counts, and mean edge similarity.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeDelta, FeatureMatrix, Graph};
use crate::rewiring::cosine_similarity;

/// Normalized mutual information between two labelings, natural log,
/// geometric-mean normalization: I(a;b) / sqrt(H(a) H(b)).
///
/// Both labelings single-cluster counts as identical (1); if exactly one
/// has zero entropy the labelings differ and the score is 0.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::validation(format!(
            "labelings cover {} and {} nodes",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::validation("nmi of empty labelings"));
    }
    let n = a.len() as f64;
    let mut joint: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut ca: BTreeMap<usize, f64> = BTreeMap::new();
    let mut cb: BTreeMap<usize, f64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_insert(0.0) += 1.0;
        *ca.entry(x).or_insert(0.0) += 1.0;
        *cb.entry(y).or_insert(0.0) += 1.0;
    }
    let entropy = |c: &BTreeMap<usize, f64>| -> f64 {
        -c.values().map(|&m| m / n * (m / n).ln()).sum::<f64>()
    };
    let (ha, hb) = (entropy(&ca), entropy(&cb));
    if ha == 0.0 && hb == 0.0 {
        return Ok(1.0);
    }
    if ha == 0.0 || hb == 0.0 {
        return Ok(0.0);
    }
    let mut info = 0.0;
    for (&(x, y), &m) in &joint {
        info += m / n * (m * n / (ca[&x] * cb[&y])).ln();
    }
    Ok((info / (ha * hb).sqrt()).clamp(0.0, 1.0))
}

/// Fraction of edges whose endpoints share a label; 0 for an edgeless graph.
pub fn edge_homophily(g: &Graph, labels: &[usize]) -> Result<f64> {
    check_labels(g, labels)?;
    if g.num_edges() == 0 {
        return Ok(0.0);
    }
    let same = g.edges().filter(|&(u, v)| labels[u] == labels[v]).count();
    Ok(same as f64 / g.num_edges() as f64)
}

/// Degree-corrected homophily:
/// (h_edge - sum_c (D_c / 2|E|)^2) / (1 - sum_c (D_c / 2|E|)^2)
/// where D_c is the degree mass of class c. Undefined (None) when the
/// denominator degenerates: a single represented class, or no edges.
pub fn adjusted_homophily(g: &Graph, labels: &[usize]) -> Result<Option<f64>> {
    check_labels(g, labels)?;
    if g.num_edges() == 0 {
        return Ok(None);
    }
    let two_e = (2 * g.num_edges()) as f64;
    let mut class_degree: BTreeMap<usize, f64> = BTreeMap::new();
    for u in 0..g.num_nodes() {
        *class_degree.entry(labels[u]).or_insert(0.0) += g.degree(u) as f64;
    }
    let expected: f64 = class_degree.values().map(|&d| (d / two_e).powi(2)).sum();
    let denom = 1.0 - expected;
    if denom.abs() < 1e-12 {
        return Ok(None);
    }
    let h_edge = edge_homophily(g, labels)?;
    Ok(Some((h_edge - expected) / denom))
}

/// 2x2 counts over one edge set: label agreement x community agreement.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentCounts {
    pub same_label_same_comm: u64,
    pub same_label_diff_comm: u64,
    pub diff_label_same_comm: u64,
    pub diff_label_diff_comm: u64,
}

impl AlignmentCounts {
    fn record(&mut self, same_label: bool, same_comm: bool) {
        match (same_label, same_comm) {
            (true, true) => self.same_label_same_comm += 1,
            (true, false) => self.same_label_diff_comm += 1,
            (false, true) => self.diff_label_same_comm += 1,
            (false, false) => self.diff_label_diff_comm += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.same_label_same_comm
            + self.same_label_diff_comm
            + self.diff_label_same_comm
            + self.diff_label_diff_comm
    }
}

/// Alignment of a delta's edges with labels and communities, added and
/// deleted edges counted separately.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentMatrix {
    pub added: AlignmentCounts,
    pub deleted: AlignmentCounts,
}

pub fn alignment_matrix(
    delta: &EdgeDelta,
    labels: &[usize],
    communities: &[usize],
) -> Result<AlignmentMatrix> {
    if labels.len() != communities.len() {
        return Err(Error::validation(format!(
            "labels cover {} nodes, communities {}",
            labels.len(),
            communities.len()
        )));
    }
    let n = labels.len();
    let mut m = AlignmentMatrix::default();
    for (edges, counts) in [(&delta.added, &mut m.added), (&delta.deleted, &mut m.deleted)] {
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::validation(format!(
                    "delta edge ({u},{v}) out of range for {n} nodes"
                )));
            }
            counts.record(labels[u] == labels[v], communities[u] == communities[v]);
        }
    }
    Ok(m)
}

/// Mean cosine similarity over edges; 0 for an edgeless graph.
pub fn mean_edge_similarity(g: &Graph, x: &FeatureMatrix) -> Result<f64> {
    if x.num_nodes() != g.num_nodes() {
        return Err(Error::validation(format!(
            "feature matrix has {} rows, graph has {} nodes",
            x.num_nodes(),
            g.num_nodes()
        )));
    }
    if g.num_edges() == 0 {
        return Ok(0.0);
    }
    let sum: f64 = g.edges().map(|(u, v)| cosine_similarity(x, u, v)).sum();
    Ok(sum / g.num_edges() as f64)
}

fn check_labels(g: &Graph, labels: &[usize]) -> Result<()> {
    if labels.len() != g.num_nodes() {
        return Err(Error::validation(format!(
            "labeling covers {} nodes, graph has {}",
            labels.len(),
            g.num_nodes()
        )));
    }
    Ok(())
}
