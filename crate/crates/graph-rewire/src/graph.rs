//! Core graph types: simple undirected graphs, node features, labels,
//! partitions, and edge deltas produced by rewiring runs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Simple undirected graph over nodes `0..num_nodes`.
///
/// No self-loops, no duplicate edges. Neighbor lists are kept sorted, so
/// `has_edge` is a binary search and edge iteration is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    num_edges: usize,
}

impl Graph {
    /// Empty graph on `num_nodes` nodes.
    pub fn new(num_nodes: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); num_nodes],
            num_edges: 0,
        }
    }

    /// Build from an edge iterator. Duplicates and reversed pairs collapse;
    /// self-loops and out-of-range endpoints are rejected.
    pub fn from_edges<I>(num_nodes: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::new(num_nodes);
        for (u, v) in edges {
            if u == v {
                return Err(Error::validation(format!("self-loop ({u},{v}) rejected")));
            }
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::validation(format!(
                    "edge ({u},{v}) out of range for {num_nodes} nodes"
                )));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    pub fn num_nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.adj[u].binary_search(&v).is_ok()
    }

    /// Insert an edge; returns false if it was already present.
    /// Callers guarantee `u != v` and both endpoints in range.
    pub(crate) fn add_edge(&mut self, u: usize, v: usize) -> bool {
        debug_assert!(u != v);
        match self.adj[u].binary_search(&v) {
            Ok(_) => false,
            Err(iu) => {
                let iv = self.adj[v].binary_search(&u).unwrap_err();
                self.adj[u].insert(iu, v);
                self.adj[v].insert(iv, u);
                self.num_edges += 1;
                true
            }
        }
    }

    /// Adjacency lists that are already sorted, mirrored, and loop-free;
    /// skips per-edge insertion for bulk generators.
    pub(crate) fn from_adj_unchecked(adj: Vec<Vec<usize>>) -> Self {
        let num_edges = adj.iter().map(|l| l.len()).sum::<usize>() / 2;
        let g = Graph { adj, num_edges };
        debug_assert!(g.validate().is_ok());
        g
    }

    /// Remove an edge; returns false if it was not present.
    pub(crate) fn remove_edge(&mut self, u: usize, v: usize) -> bool {
        match self.adj[u].binary_search(&v) {
            Err(_) => false,
            Ok(iu) => {
                let iv = self.adj[v].binary_search(&u).unwrap();
                self.adj[u].remove(iu);
                self.adj[v].remove(iv);
                self.num_edges -= 1;
                true
            }
        }
    }

    /// Edges as `(u, v)` with `u < v`, lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// Component id per node (0-based, by order of first discovery).
    pub fn connected_components(&self) -> Vec<usize> {
        let n = self.num_nodes();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &v in &self.adj[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        let comp = self.connected_components();
        comp.iter().all(|&c| c == 0)
    }

    /// Full-rescan consistency check: degrees sum to twice the edge count,
    /// lists are sorted and mirror each other, no self-loops.
    pub fn validate(&self) -> Result<()> {
        let mut deg_sum = 0;
        for (u, nbrs) in self.adj.iter().enumerate() {
            deg_sum += nbrs.len();
            for w in nbrs.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::validation(format!("unsorted or duplicate neighbor list at node {u}")));
                }
            }
            for &v in nbrs {
                if v == u {
                    return Err(Error::validation(format!("self-loop at node {u}")));
                }
                if self.adj[v].binary_search(&u).is_err() {
                    return Err(Error::validation(format!("asymmetric edge ({u},{v})")));
                }
            }
        }
        if deg_sum != 2 * self.num_edges {
            return Err(Error::validation(format!(
                "degree sum {deg_sum} != 2 * {} edges",
                self.num_edges
            )));
        }
        Ok(())
    }
}

/// Per-node real feature vectors, row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Vec<f64>,
    num_nodes: usize,
    dim: usize,
}

impl FeatureMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let num_nodes = rows.len();
        let dim = rows.first().map_or(0, |r| r.len());
        let mut values = Vec::with_capacity(num_nodes * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::validation(format!(
                    "feature row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::validation(format!("non-finite feature at row {i}")));
            }
            values.extend(row);
        }
        Ok(FeatureMatrix { values, num_nodes, dim })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.values[u * self.dim..(u + 1) * self.dim]
    }

    /// All rows in node order.
    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.dim.max(1)).take(self.num_nodes)
    }
}

/// Per-node class ids, 0-based and contiguous.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<usize>,
    num_classes: usize,
}

impl LabelVector {
    /// Requires ids already 0-based contiguous.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        let num_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; num_classes];
        for &l in &labels {
            seen[l] = true;
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::validation(
                "class ids must be 0-based and contiguous".to_string(),
            ));
        }
        Ok(LabelVector { labels, num_classes })
    }

    /// Labels over a fixed class universe; classes need not all appear.
    pub fn with_classes(labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if let Some(&l) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::validation(format!(
                "label {l} outside the {num_classes}-class universe"
            )));
        }
        Ok(LabelVector { labels, num_classes })
    }

    /// Remap arbitrary integer ids to contiguous 0-based ids
    /// (sorted by original value, so the result is input-order independent).
    pub fn from_raw(raw: &[i64]) -> Self {
        let mut uniq: Vec<i64> = raw.to_vec();
        uniq.sort_unstable();
        uniq.dedup();
        let index: BTreeMap<i64, usize> = uniq.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        LabelVector {
            labels: raw.iter().map(|v| index[v]).collect(),
            num_classes: uniq.len(),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn label(&self, u: usize) -> usize {
        self.labels[u]
    }
}

/// Node -> community assignment, ids 0-based contiguous.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    num_communities: usize,
}

impl Partition {
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        let num_communities = assignment.iter().copied().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; num_communities];
        for &c in &assignment {
            seen[c] = true;
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::validation(
                "community ids must be 0-based and contiguous".to_string(),
            ));
        }
        Ok(Partition {
            assignment,
            num_communities,
        })
    }

    /// Remap arbitrary ids to contiguous ones by order of first appearance.
    pub fn from_raw(raw: &[usize]) -> Self {
        let mut index: BTreeMap<usize, usize> = BTreeMap::new();
        let mut next = 0;
        let assignment = raw
            .iter()
            .map(|&c| {
                *index.entry(c).or_insert_with(|| {
                    let id = next;
                    next += 1;
                    id
                })
            })
            .collect();
        Partition {
            assignment,
            num_communities: next,
        }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn num_nodes(&self) -> usize {
        self.assignment.len()
    }

    pub fn num_communities(&self) -> usize {
        self.num_communities
    }

    pub fn community(&self, u: usize) -> usize {
        self.assignment[u]
    }

    /// Community sizes indexed by community id.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_communities];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }
}

/// Where an [`EdgeDelta`] came from: method name, parameters, seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Provenance {
    pub method: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub seed: u64,
}

impl Provenance {
    pub fn new(method: impl Into<String>, seed: u64) -> Self {
        Provenance {
            method: method.into(),
            params: BTreeMap::new(),
            seed,
        }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }
}

/// Ordered record of the edges a rewiring run added and deleted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDelta {
    pub added: Vec<(usize, usize)>,
    pub deleted: Vec<(usize, usize)>,
    pub provenance: Provenance,
    /// Shortfalls and skipped candidates (isolation guard, empty pools).
    pub warnings: Vec<String>,
}

impl EdgeDelta {
    pub fn empty(provenance: Provenance) -> Self {
        EdgeDelta {
            added: Vec::new(),
            deleted: Vec::new(),
            provenance,
            warnings: Vec::new(),
        }
    }

    /// Swap added and deleted; applying the result undoes this delta.
    pub fn inverse(&self) -> Self {
        EdgeDelta {
            added: self.deleted.clone(),
            deleted: self.added.clone(),
            provenance: self.provenance.clone(),
            warnings: Vec::new(),
        }
    }

    /// Check the delta is applicable to `g`: added edges absent, deleted
    /// edges present, the two lists disjoint, no self-loops.
    pub fn validate_against(&self, g: &Graph) -> Result<()> {
        let n = g.num_nodes();
        for &(u, v) in self.added.iter().chain(&self.deleted) {
            if u == v {
                return Err(Error::validation(format!("delta contains self-loop ({u},{v})")));
            }
            if u >= n || v >= n {
                return Err(Error::validation(format!("delta edge ({u},{v}) out of range")));
            }
        }
        for &(u, v) in &self.added {
            if g.has_edge(u, v) {
                return Err(Error::validation(format!(
                    "added edge ({u},{v}) already present in the graph"
                )));
            }
        }
        for &(u, v) in &self.deleted {
            if !g.has_edge(u, v) {
                return Err(Error::validation(format!(
                    "deleted edge ({u},{v}) not present in the graph"
                )));
            }
        }
        let added: std::collections::BTreeSet<_> =
            self.added.iter().map(|&(u, v)| ordered(u, v)).collect();
        for &(u, v) in &self.deleted {
            if added.contains(&ordered(u, v)) {
                return Err(Error::validation(format!(
                    "edge ({u},{v}) appears in both added and deleted"
                )));
            }
        }
        Ok(())
    }
}

/// Canonical (min, max) form of an undirected pair.
pub fn ordered(u: usize, v: usize) -> (usize, usize) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Apply a delta, returning a new graph; the original is untouched.
pub fn apply_delta(g: &Graph, d: &EdgeDelta) -> Result<Graph> {
    d.validate_against(g)?;
    let mut out = g.clone();
    for &(u, v) in &d.added {
        out.add_edge(u, v);
    }
    for &(u, v) in &d.deleted {
        out.remove_edge(u, v);
    }
    Ok(out)
}
