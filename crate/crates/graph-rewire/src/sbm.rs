//! Stochastic block model laboratory: generation with tunable
//! graph-task alignment, closed-form misclassification evaluators, the
//! one-round aggregation classifier, Monte Carlo validation, and grid
//! sweeps.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::community::{louvain, modularity};
use crate::error::{Error, Result};
use crate::graph::{apply_delta, FeatureMatrix, Graph, LabelVector, Partition};
use crate::metrics::{edge_homophily, nmi};
use crate::rewiring::{rewire, Method, OpKind, RewireRequest};
use crate::spectral::{default_max_iter, spectral_gap, DEFAULT_TOL};

pub const DEFAULT_MU0: f64 = 1.0;
pub const DEFAULT_SIGMA0: f64 = 1.0;

/// Two-block (or k-block) planted-partition parameters with alignment
/// probability psi: a node's class label equals its block with
/// probability psi, independently per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    pub n: usize,
    pub blocks: usize,
    pub p: f64,
    pub q: f64,
    pub psi: f64,
    pub mu0: f64,
    pub sigma0: f64,
}

impl SbmParams {
    pub fn two_block(n: usize, p: f64, q: f64, psi: f64) -> Self {
        SbmParams {
            n,
            blocks: 2,
            p,
            q,
            psi,
            mu0: DEFAULT_MU0,
            sigma0: DEFAULT_SIGMA0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks < 2 {
            return Err(Error::validation("need at least 2 blocks"));
        }
        if self.n == 0 || self.n % self.blocks != 0 {
            return Err(Error::validation(format!(
                "block count {} must divide node count {}",
                self.blocks, self.n
            )));
        }
        for (name, v) in [("p", self.p), ("q", self.q)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::validation(format!("{name} must lie strictly in (0,1), got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.psi) {
            return Err(Error::validation(format!("psi must lie in [0,1], got {}", self.psi)));
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return Err(Error::validation("sigma0 must be positive"));
        }
        if !self.mu0.is_finite() {
            return Err(Error::validation("mu0 must be finite"));
        }
        Ok(())
    }
}

/// One generated instance. Planted blocks are the contiguous index
/// ranges [b·n/blocks, (b+1)·n/blocks).
#[derive(Debug, Clone)]
pub struct SbmSample {
    pub graph: Graph,
    pub features: FeatureMatrix,
    pub labels: LabelVector,
    pub planted: Partition,
    pub seed: u64,
}

/// Deterministic stream split: one master seed, many independent streams.
/// SplitMix64 finalizer over master + (index+1)·golden-ratio increment.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sample a graph, labels, and 1-dimensional features.
///
/// Edges are independent Bernoulli draws: probability p inside a block,
/// q across blocks, no self-loops. Labels copy the block id with
/// probability psi, otherwise flip to the other class (a uniformly random
/// other block when blocks > 2). Features follow Normal(-mu0, sigma0^2)
/// for class 0 and Normal(+mu0, sigma0^2) otherwise.
pub fn generate(params: &SbmParams, seed: u64) -> Result<SbmSample> {
    params.validate()?;
    let n = params.n;
    let block_size = n / params.blocks;
    let block = |u: usize| u / block_size;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    // ascending (u, v) generation keeps every adjacency list sorted
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for u in 0..n {
        let bu = block(u);
        for v in u + 1..n {
            let pr = if bu == block(v) { params.p } else { params.q };
            if rng.gen_bool(pr) {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
    }
    let graph = Graph::from_adj_unchecked(adj);

    let mut labels = Vec::with_capacity(n);
    for u in 0..n {
        let b = block(u);
        let l = if rng.gen_bool(params.psi) {
            b
        } else if params.blocks == 2 {
            1 - b
        } else {
            let r = rng.gen_range(0..params.blocks - 1);
            if r >= b {
                r + 1
            } else {
                r
            }
        };
        labels.push(l);
    }

    let mut rows = Vec::with_capacity(n);
    for &l in &labels {
        let mean = if l == 0 { -params.mu0 } else { params.mu0 };
        let dist = Normal::new(mean, params.sigma0).expect("validated sigma0");
        rows.push(vec![dist.sample(&mut rng)]);
    }

    Ok(SbmSample {
        graph,
        features: FeatureMatrix::from_rows(rows)?,
        labels: LabelVector::with_classes(labels, params.blocks)?,
        planted: Partition::new((0..n).map(block).collect())?,
        seed,
    })
}

/// Standard normal CDF via erfc; keeps relative accuracy deep in the
/// tails where the closed forms live.
pub fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Misclassification probability of the sum-aggregation classifier on a
/// perfectly aligned (psi = 1) two-block sample: Phi(-mu1/sigma1) with
/// mu1 = mu0 (1 + E_p - E_q), sigma1^2 = sigma0^2 (1 + E_p + E_q),
/// E_p = p (n/2 - 1), E_q = q n/2.
pub fn theory_error_aligned(n: usize, p: f64, q: f64) -> f64 {
    theory_error_aligned_scaled(n, p, q, DEFAULT_MU0, DEFAULT_SIGMA0)
}

pub fn theory_error_aligned_scaled(n: usize, p: f64, q: f64, mu0: f64, sigma0: f64) -> f64 {
    let half = n as f64 / 2.0;
    let ep = p * (half - 1.0);
    let eq = q * half;
    let mu1 = mu0 * (1.0 + ep - eq);
    let sigma1 = sigma0 * (1.0 + ep + eq).sqrt();
    phi(-mu1 / sigma1)
}

/// Misclassification probability under partial alignment:
/// 1 - psi + (2 psi - 1) Phi(-(n/2)(2 psi - 1)(p - q) / sqrt(V)) with
/// V = (n/2)(p + q + p(1-p) + q(1-q) + 2 (p-q)^2 psi (1-psi)).
///
/// The Phi argument must carry the negative sign: at psi = 1 the value has
/// to collapse to the aligned large-n form Phi(-(n/2)(p-q)/sqrt(V)), and
/// Monte Carlo runs confirm the negative branch (the positive one returns
/// 1 - error).
pub fn theory_error(n: usize, p: f64, q: f64, psi: f64) -> f64 {
    let half = n as f64 / 2.0;
    let spread = 2.0 * psi - 1.0;
    let variance =
        half * (p + q + p * (1.0 - p) + q * (1.0 - q) + 2.0 * (p - q).powi(2) * psi * (1.0 - psi));
    let arg = -half * spread * (p - q) / variance.sqrt();
    1.0 - psi + spread * phi(arg)
}

/// Aggregation operator for the one-round classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationMode {
    Sum,
    Mean,
}

impl AggregationMode {
    pub fn name(self) -> &'static str {
        match self {
            AggregationMode::Sum => "sum",
            AggregationMode::Mean => "mean",
        }
    }
}

/// One aggregation round with a self term, then a sign read-out:
/// x' = x_i + sum of neighbor features (Mean divides by 1 + degree);
/// prediction is class 1 when x' > 0, class 0 otherwise (ties to 0).
pub fn aggregate_classify(g: &Graph, x: &FeatureMatrix, mode: AggregationMode) -> Result<LabelVector> {
    if x.num_nodes() != g.num_nodes() {
        return Err(Error::validation(format!(
            "feature matrix has {} rows, graph has {} nodes",
            x.num_nodes(),
            g.num_nodes()
        )));
    }
    if x.dim() != 1 {
        return Err(Error::validation(format!(
            "aggregation classifier needs 1-dimensional features, got {}",
            x.dim()
        )));
    }
    let preds = (0..g.num_nodes())
        .map(|u| {
            let mut agg = x.row(u)[0];
            for &v in g.neighbors(u) {
                agg += x.row(v)[0];
            }
            if mode == AggregationMode::Mean {
                agg /= (1 + g.degree(u)) as f64;
            }
            usize::from(agg > 0.0)
        })
        .collect();
    LabelVector::with_classes(preds, 2)
}

/// Fraction of positions where the two labelings disagree.
pub fn misclassified_fraction(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(Error::validation(format!(
            "labelings cover {} and {} nodes",
            pred.len(),
            truth.len()
        )));
    }
    let wrong = pred.iter().zip(truth).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / pred.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    /// Sample standard deviation / sqrt(trials); 0 when undefined.
    pub stderr: f64,
    pub trials: usize,
    /// False for a single trial, where the spread is undefined.
    pub stderr_defined: bool,
}

/// Mean misclassified fraction of `aggregate_classify` over independent
/// samples. Trial t uses the stream `derive_seed(seed, t)`, so results
/// are identical under any parallel schedule.
pub fn monte_carlo_error(
    params: &SbmParams,
    mode: AggregationMode,
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    params.validate()?;
    if trials == 0 {
        return Err(Error::validation("trials must be >= 1"));
    }
    let errors: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let sample = generate(params, derive_seed(seed, t as u64))?;
            let pred = aggregate_classify(&sample.graph, &sample.features, mode)?;
            misclassified_fraction(pred.labels(), sample.labels.labels())
        })
        .collect::<Result<_>>()?;
    Ok(summarize(&errors))
}

fn summarize(errors: &[f64]) -> McEstimate {
    let trials = errors.len();
    let mean = errors.iter().sum::<f64>() / trials as f64;
    if trials == 1 {
        return McEstimate {
            estimate: mean,
            stderr: 0.0,
            trials,
            stderr_defined: false,
        };
    }
    let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
    McEstimate {
        estimate: mean,
        stderr: (var / trials as f64).sqrt(),
        trials,
        stderr_defined: true,
    }
}

/// Sparse-regime block recoverability bound:
/// (sqrt(q n / ln n) + sqrt 2)^2 ln(n) / n.
pub fn recoverability_threshold(n: usize, q: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::validation("threshold needs n >= 3"));
    }
    if !(0.0..1.0).contains(&q) {
        return Err(Error::validation(format!("q must lie in [0,1), got {q}")));
    }
    let n = n as f64;
    let ln_n = n.ln();
    Ok(((q * n / ln_n).sqrt() + std::f64::consts::SQRT_2).powi(2) * ln_n / n)
}

/// Cartesian sweep grid. Cells enumerate as nested loops over
/// p, q, psi, method, op, k, in that order; the linear cell index is the
/// per-cell seed-derivation key.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepGrid {
    pub n: usize,
    pub ps: Vec<f64>,
    pub qs: Vec<f64>,
    pub psis: Vec<f64>,
    pub methods: Vec<Method>,
    pub ops: Vec<OpKind>,
    pub ks: Vec<usize>,
}

impl SweepGrid {
    pub fn num_cells(&self) -> usize {
        self.ps.len() * self.qs.len() * self.psis.len() * self.methods.len() * self.ops.len() * self.ks.len()
    }

    fn validate(&self) -> Result<()> {
        if self.num_cells() == 0 {
            return Err(Error::validation("sweep grid has an empty axis"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepOptions {
    pub mode: AggregationMode,
    pub trials: usize,
    pub seed: u64,
    /// Rewire against planted blocks instead of Louvain communities.
    pub planted: bool,
}

/// One sweep cell, averaged over its trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub cell: usize,
    pub p: f64,
    pub q: f64,
    pub psi: f64,
    pub method: String,
    pub op: String,
    pub k: usize,
    pub trials: usize,
    pub error: f64,
    pub error_stderr: f64,
    pub accuracy: f64,
    pub spectral_gap: f64,
    pub edge_homophily: f64,
    pub nmi_louvain: f64,
    pub modularity: f64,
    pub theory_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub grid: SweepGrid,
    pub options: SweepOptions,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn to_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        for row in &self.rows {
            wtr.serialize(row).map_err(|e| Error::validation(e.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Run the grid: per cell, generate trials, optionally rewire with the
/// cell's method, classify, and record accuracy plus structure metrics.
/// Cell c trial t draws its stream from derive_seed(derive_seed(seed, c), t),
/// so a k = 0 cell's error column reproduces `monte_carlo_error` called
/// with that cell's derived master seed.
pub fn sweep(grid: &SweepGrid, options: &SweepOptions) -> Result<SweepReport> {
    grid.validate()?;
    if options.trials == 0 {
        return Err(Error::validation("trials must be >= 1"));
    }
    let mut rows = Vec::with_capacity(grid.num_cells());
    let mut cell = 0usize;
    for &p in &grid.ps {
        for &q in &grid.qs {
            for &psi in &grid.psis {
                for &method in &grid.methods {
                    for &op in &grid.ops {
                        for &k in &grid.ks {
                            rows.push(run_cell(grid.n, p, q, psi, method, op, k, cell, options)?);
                            cell += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(SweepReport {
        grid: grid.clone(),
        options: options.clone(),
        rows,
    })
}

struct TrialOutcome {
    error: f64,
    gap: f64,
    homophily: f64,
    nmi: f64,
    modularity: f64,
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    n: usize,
    p: f64,
    q: f64,
    psi: f64,
    method: Method,
    op: OpKind,
    k: usize,
    cell: usize,
    options: &SweepOptions,
) -> Result<SweepRow> {
    let params = SbmParams::two_block(n, p, q, psi);
    params.validate()?;
    let cell_seed = derive_seed(options.seed, cell as u64);
    let outcomes: Vec<TrialOutcome> = (0..options.trials)
        .into_par_iter()
        .map(|t| {
            let trial_seed = derive_seed(cell_seed, t as u64);
            let sample = generate(&params, trial_seed)?;
            let g = if k == 0 {
                sample.graph
            } else {
                let part = if options.planted {
                    sample.planted.clone()
                } else {
                    louvain(&sample.graph, trial_seed, 1.0)?
                };
                let req = RewireRequest::new(method, op, k, trial_seed);
                let outcome = rewire(&sample.graph, Some(&sample.features), Some(&part), &req)?;
                apply_delta(&sample.graph, &outcome.delta)?
            };
            let pred = aggregate_classify(&g, &sample.features, options.mode)?;
            let error = misclassified_fraction(pred.labels(), sample.labels.labels())?;
            let state = spectral_gap(&g, DEFAULT_TOL, default_max_iter(g.num_nodes()))?;
            let communities = louvain(&g, trial_seed, 1.0)?;
            Ok(TrialOutcome {
                error,
                gap: state.gap,
                homophily: edge_homophily(&g, sample.labels.labels())?,
                nmi: nmi(sample.labels.labels(), communities.assignment())?,
                modularity: modularity(&g, &communities)?,
            })
        })
        .collect::<Result<_>>()?;

    let errors: Vec<f64> = outcomes.iter().map(|o| o.error).collect();
    let mc = summarize(&errors);
    let mean = |f: fn(&TrialOutcome) -> f64| {
        outcomes.iter().map(f).sum::<f64>() / outcomes.len() as f64
    };
    Ok(SweepRow {
        cell,
        p,
        q,
        psi,
        method: method.name().to_string(),
        op: op.name().to_string(),
        k,
        trials: options.trials,
        error: mc.estimate,
        error_stderr: mc.stderr,
        accuracy: 1.0 - mc.estimate,
        spectral_gap: mean(|o| o.gap),
        edge_homophily: mean(|o| o.homophily),
        nmi_louvain: mean(|o| o.nmi),
        modularity: mean(|o| o.modularity),
        theory_error: theory_error(n, p, q, psi),
    })
}

/// Parameter record attached to every JSON artifact the CLI writes.
pub fn provenance_params(params: &SbmParams) -> BTreeMap<String, serde_json::Value> {
    let mut m = BTreeMap::new();
    m.insert("n".into(), params.n.into());
    m.insert("blocks".into(), params.blocks.into());
    m.insert("p".into(), params.p.into());
    m.insert("q".into(), params.q.into());
    m.insert("psi".into(), params.psi.into());
    m.insert("mu0".into(), params.mu0.into());
    m.insert("sigma0".into(), params.sigma0.into());
    m
}
