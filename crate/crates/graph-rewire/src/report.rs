//! Machine-readable run reports. Every map is ordered, so identical runs
//! serialize to identical bytes apart from the timing fields.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::graph::{FeatureMatrix, Graph, LabelVector, Partition};
use crate::metrics::{
    adjusted_homophily, alignment_matrix, edge_homophily, mean_edge_similarity, nmi,
    AlignmentMatrix,
};
use crate::rewiring::RewireOutcome;
use crate::spectral::SpectralState;

/// Version, the full flag set of the invocation, and the master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceBlock {
    pub version: String,
    pub flags: BTreeMap<String, Value>,
    pub seed: u64,
}

impl ProvenanceBlock {
    pub fn new(seed: u64) -> Self {
        ProvenanceBlock {
            version: env!("CARGO_PKG_VERSION").to_string(),
            flags: BTreeMap::new(),
            seed,
        }
    }

    pub fn with_flag(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.flags.insert(key.to_string(), value.into());
        self
    }
}

/// Rewiring run report: what ran, what changed, what it did to the graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub method: String,
    pub params: BTreeMap<String, Value>,
    pub seed: u64,
    pub metrics: BTreeMap<String, Value>,
    pub delta: DeltaRecord,
    pub timings_ms: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRecord {
    pub added: Vec<(usize, usize)>,
    pub deleted: Vec<(usize, usize)>,
}

/// Compose the rewire report. Optional inputs widen the metrics block:
/// features add the mean-similarity delta, labels add homophily, and
/// labels plus communities add the alignment matrix.
pub fn rewire_report(
    before: &Graph,
    after: &Graph,
    outcome: &RewireOutcome,
    x: Option<&FeatureMatrix>,
    labels: Option<&LabelVector>,
    communities: Option<&Partition>,
) -> Result<Report> {
    let mut metrics: BTreeMap<String, Value> = BTreeMap::new();
    let num = |v: f64| -> Value {
        serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
    };
    metrics.insert("num_nodes".into(), before.num_nodes().into());
    metrics.insert("num_edges_before".into(), before.num_edges().into());
    metrics.insert("num_edges_after".into(), after.num_edges().into());
    if let Some(x) = x {
        metrics.insert(
            "mean_edge_similarity_before".into(),
            num(mean_edge_similarity(before, x)?),
        );
        metrics.insert(
            "mean_edge_similarity_after".into(),
            num(mean_edge_similarity(after, x)?),
        );
    }
    if let Some(y) = labels {
        metrics.insert(
            "edge_homophily_before".into(),
            num(edge_homophily(before, y.labels())?),
        );
        metrics.insert(
            "edge_homophily_after".into(),
            num(edge_homophily(after, y.labels())?),
        );
        if let Some(part) = communities {
            let m = alignment_matrix(&outcome.delta, y.labels(), part.assignment())?;
            metrics.insert(
                "alignment_matrix".into(),
                serde_json::to_value(m).map_err(Error::from)?,
            );
        }
    }
    if !outcome.delta.warnings.is_empty() {
        metrics.insert(
            "warnings".into(),
            Value::Array(
                outcome
                    .delta
                    .warnings
                    .iter()
                    .map(|w| Value::String(w.clone()))
                    .collect(),
            ),
        );
    }
    Ok(Report {
        method: outcome.delta.provenance.method.clone(),
        params: outcome.delta.provenance.params.clone(),
        seed: outcome.delta.provenance.seed,
        metrics,
        delta: DeltaRecord {
            added: outcome.delta.added.clone(),
            deleted: outcome.delta.deleted.clone(),
        },
        timings_ms: outcome.timings_ms.clone(),
    })
}

/// `spectrum` payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub gap: f64,
    pub residual: f64,
    pub connected: bool,
    pub iters: usize,
}

impl From<&SpectralState> for SpectrumReport {
    fn from(s: &SpectralState) -> Self {
        SpectrumReport {
            gap: s.gap,
            residual: s.residual,
            connected: s.connected,
            iters: s.iters,
        }
    }
}

/// `communities` payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunitiesReport {
    pub num_communities: usize,
    pub modularity: f64,
    pub assignment: Vec<usize>,
}

/// `metrics` payload. Fields appear only when their inputs were supplied;
/// adjusted homophily distinguishes "not computed" (absent) from
/// "undefined for this labeling" (null).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct MetricsReport {
    pub num_nodes: usize,
    pub num_edges: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_edges_directed: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nmi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modularity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_homophily: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjusted_homophily: Option<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_edge_similarity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alignment_matrix: Option<AlignmentMatrix>,
}

/// Compose the metrics report from whatever inputs are present.
/// `directed_count` additionally reports the doubled edge count used by
/// datasets that list both directions.
pub fn metrics_report(
    g: &Graph,
    x: Option<&FeatureMatrix>,
    labels: Option<&LabelVector>,
    communities: Option<&Partition>,
    directed_count: bool,
) -> Result<MetricsReport> {
    let mut report = MetricsReport {
        num_nodes: g.num_nodes(),
        num_edges: g.num_edges(),
        num_edges_directed: directed_count.then_some(2 * g.num_edges()),
        ..MetricsReport::default()
    };
    if let Some(x) = x {
        report.mean_edge_similarity = Some(mean_edge_similarity(g, x)?);
    }
    if let Some(y) = labels {
        report.edge_homophily = Some(edge_homophily(g, y.labels())?);
        report.adjusted_homophily = Some(adjusted_homophily(g, y.labels())?);
    }
    if let Some(part) = communities {
        report.modularity = Some(crate::community::modularity(g, part)?);
        if let Some(y) = labels {
            report.nmi = Some(nmi(y.labels(), part.assignment())?);
        }
    }
    Ok(report)
}

/// Pretty-printed JSON with a trailing newline.
pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
