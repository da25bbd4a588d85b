//! `grw`: batch front end for the rewiring toolkit. Subcommands cover the
//! full workflow: generate a benchmark graph, rewire it, measure the
//! before/after structure, and validate the closed forms against Monte
//! Carlo. Every run writes a report into `--out-dir` carrying a provenance
//! block (version, full flag set, seed); identical invocations produce
//! byte-identical reports apart from the timing fields.
//!
//! Exit codes: 0 success, 1 validation failure, 2 numerical non-convergence.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use serde_json::Value;

use graph_rewire::community::{louvain, modularity};
use graph_rewire::io;
use graph_rewire::report::{
    metrics_report, rewire_report, save_json, CommunitiesReport, ProvenanceBlock, SpectrumReport,
};
use graph_rewire::rewiring::{rewire, Method, OpKind, RewireRequest};
use graph_rewire::sbm::{
    generate, monte_carlo_error, recoverability_threshold, sweep, theory_error,
    theory_error_aligned_scaled, AggregationMode, SbmParams, SweepGrid, SweepOptions,
};
use graph_rewire::spectral::{
    default_max_iter, expected_gap_k_block, expected_gap_two_block, expected_gap_unequal,
    spectral_gap, DEFAULT_TOL,
};
use graph_rewire::{apply_delta, Error, FeatureMatrix, Partition, Result};

#[derive(Parser)]
#[command(name = "grw", version, about = "Graph rewiring and SBM validation workflows")]
struct Cli {
    /// Master seed for all randomness in the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Directory where reports and artifacts are written.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Report format. CSV flattens nested reports to key,value rows;
    /// sweep and bench emit proper tables.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted two-or-more-block benchmark graph with Gaussian
    /// node features and (possibly misaligned) labels.
    GenSbm(GenSbmArgs),
    /// Rewire a graph and report the structural delta.
    Rewire(RewireArgs),
    /// Compute graph/label/feature metrics for a dataset.
    Metrics(MetricsArgs),
    /// Detect communities by modularity maximization.
    Communities(CommunitiesArgs),
    /// Estimate the normalized-Laplacian spectral gap.
    Spectrum(SpectrumArgs),
    /// Evaluate the closed-form predictions for a block model.
    Theory(TheoryArgs),
    /// Check Monte Carlo misclassification against the closed form.
    Verify(VerifyArgs),
    /// Run a parameter sweep over the block-model grid.
    Sweep(SweepArgs),
    /// Time rewiring methods on a supplied graph (median of `--reps` runs).
    Bench(BenchArgs),
}

#[derive(clap::Args)]
struct GenSbmArgs {
    /// Number of nodes (must be divisible by --blocks).
    #[arg(long)]
    n: usize,
    /// Number of equal-size blocks.
    #[arg(long, default_value_t = 2)]
    blocks: usize,
    /// Intra-block edge probability.
    #[arg(long)]
    p: f64,
    /// Inter-block edge probability.
    #[arg(long)]
    q: f64,
    /// Probability that a node keeps its block as its label.
    #[arg(long, default_value_t = 1.0)]
    psi: f64,
    /// Feature mean magnitude per class.
    #[arg(long, default_value_t = 1.0)]
    mu0: f64,
    /// Feature standard deviation.
    #[arg(long, default_value_t = 1.0)]
    sigma0: f64,
    /// File prefix for the edges/features/labels artifacts.
    #[arg(long, default_value = "sbm")]
    prefix: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    HigherComma,
    LowerComma,
    Feast,
    Comfy,
    ProxyMin,
    ProxyMax,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::HigherComma => Method::HigherComMa,
            MethodArg::LowerComma => Method::LowerComMa,
            MethodArg::Feast => Method::FeaSt,
            MethodArg::Comfy => Method::ComFy,
            MethodArg::ProxyMin => Method::ProxyMin,
            MethodArg::ProxyMax => Method::ProxyMax,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OpArg {
    Add,
    Del,
    AddDel,
}

impl From<OpArg> for OpKind {
    fn from(op: OpArg) -> OpKind {
        match op {
            OpArg::Add => OpKind::Add,
            OpArg::Del => OpKind::Del,
            OpArg::AddDel => OpKind::AddDel,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Sum,
    Mean,
}

impl From<ModeArg> for AggregationMode {
    fn from(m: ModeArg) -> AggregationMode {
        match m {
            ModeArg::Sum => AggregationMode::Sum,
            ModeArg::Mean => AggregationMode::Mean,
        }
    }
}

#[derive(clap::Args)]
struct RewireArgs {
    /// Edge-list file (one `u v` pair per line).
    #[arg(long)]
    edges: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long, value_enum)]
    op: OpArg,
    /// Number of edges to add and/or delete.
    #[arg(long)]
    k: usize,
    /// Fraction of nodes scanned as similarity sources (feast only).
    #[arg(long, default_value_t = 1.0)]
    sample_ratio: f64,
    /// Permit deletions that disconnect a node entirely.
    #[arg(long)]
    allow_isolation: bool,
    /// Node feature CSV (required by feast and comfy).
    #[arg(long)]
    features: Option<PathBuf>,
    /// Node label file; enables homophily and alignment reporting.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Community assignment file; computed by Louvain when omitted but needed.
    #[arg(long)]
    communities: Option<PathBuf>,
    /// Where to write the rewired edge list.
    #[arg(long)]
    out_edges: Option<PathBuf>,
    /// Where to write the run report (defaults to rewire.json in --out-dir).
    #[arg(long)]
    out_report: Option<PathBuf>,
}

#[derive(clap::Args)]
struct MetricsArgs {
    #[arg(long)]
    edges: PathBuf,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Community assignment file.
    #[arg(long)]
    communities: Option<PathBuf>,
    /// Compute communities by Louvain when no file is given.
    #[arg(long)]
    louvain: bool,
    /// Also report the doubled (directed) edge count used by datasets
    /// that list both edge directions.
    #[arg(long)]
    directed_count: bool,
}

#[derive(clap::Args)]
struct CommunitiesArgs {
    #[arg(long)]
    edges: PathBuf,
    /// Modularity resolution parameter.
    #[arg(long, default_value_t = 1.0)]
    resolution: f64,
}

#[derive(clap::Args)]
struct SpectrumArgs {
    #[arg(long)]
    edges: PathBuf,
    /// Residual tolerance for the eigensolver.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Iteration cap (defaults to 10x the node count).
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(clap::Args)]
struct TheoryArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    /// Label alignment; enables the misalignment error prediction.
    #[arg(long)]
    psi: Option<f64>,
    /// Block count for the k-block gap extension (k >= 3).
    #[arg(long)]
    blocks: Option<usize>,
    /// First-block size for the unequal two-block gap extension.
    #[arg(long)]
    m: Option<usize>,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    psi: f64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Sum)]
    mode: ModeArg,
    /// Absolute slack added on top of 3 standard errors.
    #[arg(long, default_value_t = 0.01)]
    slack: f64,
}

#[derive(clap::Args)]
struct SweepArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    ps: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    qs: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0])]
    psis: Vec<f64>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Feast])]
    methods: Vec<MethodArg>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [OpArg::Add])]
    ops: Vec<OpArg>,
    /// Rewiring budgets; 0 measures the unrewired baseline.
    #[arg(long, value_delimiter = ',', default_values_t = [0usize])]
    ks: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Sum)]
    mode: ModeArg,
    /// Rewire against planted blocks instead of Louvain communities.
    #[arg(long)]
    planted: bool,
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long)]
    edges: PathBuf,
    /// Comma-separated method list; `comma` and `proxy` abbreviate
    /// higher-comma and proxy-max.
    #[arg(long, value_delimiter = ',', default_values_t = ["comma".to_string(), "feast".to_string(), "comfy".to_string(), "proxy".to_string()])]
    methods: Vec<String>,
    #[arg(long, value_enum, default_value_t = OpArg::Add)]
    op: OpArg,
    #[arg(long, default_value_t = 50)]
    k: usize,
    /// Repetitions per method (median reported; must be >= 5).
    #[arg(long, default_value_t = 5)]
    reps: usize,
    /// Node feature CSV; synthesized from the seed when omitted.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Dimension of synthesized features.
    #[arg(long, default_value_t = 16)]
    dim: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = u8::from(err.use_stderr());
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::NonConvergence { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenSbm(args) => run_gen_sbm(cli, args),
        Command::Rewire(args) => run_rewire(cli, args),
        Command::Metrics(args) => run_metrics(cli, args),
        Command::Communities(args) => run_communities(cli, args),
        Command::Spectrum(args) => run_spectrum(cli, args),
        Command::Theory(args) => run_theory(cli, args),
        Command::Verify(args) => run_verify(cli, args),
        Command::Sweep(args) => run_sweep(cli, args),
        Command::Bench(args) => run_bench(cli, args),
    }
}

/// Provenance for the run: version and seed from the globals, plus the
/// full flag set of the subcommand.
fn provenance(cli: &Cli, subcommand: &str, flags: BTreeMap<String, Value>) -> ProvenanceBlock {
    let mut block = ProvenanceBlock::new(cli.seed)
        .with_flag("subcommand", subcommand)
        .with_flag("format", cli.format.name())
        .with_flag("out_dir", cli.out_dir.to_string_lossy().as_ref());
    block.flags.extend(flags);
    block
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    provenance: &'a ProvenanceBlock,
    report: &'a T,
}

/// Write the report in the requested format and return its path.
/// `explicit` overrides the default `<name>.<ext>` location in --out-dir.
fn emit<T: Serialize>(
    cli: &Cli,
    name: &str,
    explicit: Option<&Path>,
    provenance: &ProvenanceBlock,
    payload: &T,
) -> Result<PathBuf> {
    std::fs::create_dir_all(&cli.out_dir)?;
    let envelope = Envelope { provenance, report: payload };
    let path = match explicit {
        Some(p) => p.to_path_buf(),
        None => cli.out_dir.join(format!("{name}.{}", cli.format.name())),
    };
    match cli.format {
        Format::Json => save_json(&path, &envelope)?,
        Format::Csv => {
            let tree = serde_json::to_value(&envelope)?;
            let mut rows = Vec::new();
            flatten("", &tree, &mut rows);
            let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
            w.write_record(["key", "value"]).map_err(csv_err)?;
            for (k, v) in rows {
                w.write_record([k, v]).map_err(csv_err)?;
            }
            w.flush()?;
        }
    }
    Ok(path)
}

fn csv_err(e: csv::Error) -> Error {
    Error::validation(e.to_string())
}

/// Dotted-key flattening for CSV output; arrays inline as compact JSON.
fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, child, rows);
            }
        }
        Value::Null => rows.push((prefix.to_string(), String::new())),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn path_flag(path: &Path) -> Value {
    Value::String(path.to_string_lossy().into_owned())
}

fn opt_path_flag(path: &Option<PathBuf>) -> Value {
    path.as_deref().map_or(Value::Null, path_flag)
}

fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

#[derive(Serialize)]
struct GenSbmReport {
    num_nodes: usize,
    num_edges: usize,
    blocks: usize,
    edge_homophily: f64,
    files: BTreeMap<String, String>,
}

fn run_gen_sbm(cli: &Cli, args: &GenSbmArgs) -> Result<()> {
    let params = SbmParams {
        n: args.n,
        blocks: args.blocks,
        p: args.p,
        q: args.q,
        psi: args.psi,
        mu0: args.mu0,
        sigma0: args.sigma0,
    };
    let sample = generate(&params, cli.seed)?;
    std::fs::create_dir_all(&cli.out_dir)?;
    let mut files = BTreeMap::new();
    let edges_path = cli.out_dir.join(format!("{}_edges.txt", args.prefix));
    let features_path = cli.out_dir.join(format!("{}_features.csv", args.prefix));
    let labels_path = cli.out_dir.join(format!("{}_labels.txt", args.prefix));
    io::save_edge_list(&edges_path, &sample.graph)?;
    io::save_features(&features_path, &sample.features)?;
    io::save_labels(&labels_path, &sample.labels)?;
    files.insert("edges".into(), edges_path.to_string_lossy().into_owned());
    files.insert("features".into(), features_path.to_string_lossy().into_owned());
    files.insert("labels".into(), labels_path.to_string_lossy().into_owned());

    let payload = GenSbmReport {
        num_nodes: sample.graph.num_nodes(),
        num_edges: sample.graph.num_edges(),
        blocks: args.blocks,
        edge_homophily: graph_rewire::metrics::edge_homophily(
            &sample.graph,
            sample.labels.labels(),
        )?,
        files,
    };
    let flags = BTreeMap::from([
        ("n".to_string(), args.n.into()),
        ("blocks".to_string(), args.blocks.into()),
        ("p".to_string(), num(args.p)),
        ("q".to_string(), num(args.q)),
        ("psi".to_string(), num(args.psi)),
        ("mu0".to_string(), num(args.mu0)),
        ("sigma0".to_string(), num(args.sigma0)),
        ("prefix".to_string(), args.prefix.clone().into()),
    ]);
    let block = provenance(cli, "gen-sbm", flags);
    let path = emit(cli, "gen_sbm", None, &block, &payload)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn load_partition(path: &Path) -> Result<Partition> {
    let labels = io::load_labels(path)?;
    Ok(Partition::from_raw(labels.labels()))
}

fn run_rewire(cli: &Cli, args: &RewireArgs) -> Result<()> {
    let g = io::load_edge_list(&args.edges, None)?;
    let x = args.features.as_deref().map(io::load_features).transpose()?;
    let labels = args.labels.as_deref().map(io::load_labels).transpose()?;
    let method: Method = args.method.into();
    let needs_partition = matches!(
        method,
        Method::HigherComMa | Method::LowerComMa | Method::ComFy
    );
    let mut community_source = "none";
    let part = if let Some(path) = &args.communities {
        community_source = "file";
        Some(load_partition(path)?)
    } else if needs_partition || labels.is_some() {
        community_source = "louvain";
        Some(louvain(&g, cli.seed, 1.0)?)
    } else {
        None
    };

    let mut req = RewireRequest::new(method, args.op.into(), args.k, cli.seed);
    req.sample_ratio = args.sample_ratio;
    req.allow_isolation = args.allow_isolation;
    let outcome = rewire(&g, x.as_ref(), part.as_ref(), &req)?;
    let after = apply_delta(&g, &outcome.delta)?;

    std::fs::create_dir_all(&cli.out_dir)?;
    let out_edges = args
        .out_edges
        .clone()
        .unwrap_or_else(|| cli.out_dir.join("rewired_edges.txt"));
    io::save_edge_list(&out_edges, &after)?;

    let payload = rewire_report(&g, &after, &outcome, x.as_ref(), labels.as_ref(), part.as_ref())?;
    let flags = BTreeMap::from([
        ("edges".to_string(), path_flag(&args.edges)),
        ("method".to_string(), method.name().into()),
        ("op".to_string(), OpKind::from(args.op).name().into()),
        ("k".to_string(), args.k.into()),
        ("sample_ratio".to_string(), num(args.sample_ratio)),
        ("allow_isolation".to_string(), args.allow_isolation.into()),
        ("features".to_string(), opt_path_flag(&args.features)),
        ("labels".to_string(), opt_path_flag(&args.labels)),
        ("communities".to_string(), community_source.into()),
        ("out_edges".to_string(), path_flag(&out_edges)),
    ]);
    let block = provenance(cli, "rewire", flags);
    let path = emit(cli, "rewire", args.out_report.as_deref(), &block, &payload)?;
    println!("wrote {} and {}", out_edges.display(), path.display());
    Ok(())
}

fn run_metrics(cli: &Cli, args: &MetricsArgs) -> Result<()> {
    let g = io::load_edge_list(&args.edges, None)?;
    let x = args.features.as_deref().map(io::load_features).transpose()?;
    let labels = args.labels.as_deref().map(io::load_labels).transpose()?;
    let mut community_source = "none";
    let part = if let Some(path) = &args.communities {
        community_source = "file";
        Some(load_partition(path)?)
    } else if args.louvain {
        community_source = "louvain";
        Some(louvain(&g, cli.seed, 1.0)?)
    } else {
        None
    };
    let payload = metrics_report(
        &g,
        x.as_ref(),
        labels.as_ref(),
        part.as_ref(),
        args.directed_count,
    )?;
    let flags = BTreeMap::from([
        ("edges".to_string(), path_flag(&args.edges)),
        ("features".to_string(), opt_path_flag(&args.features)),
        ("labels".to_string(), opt_path_flag(&args.labels)),
        ("communities".to_string(), community_source.into()),
        ("directed_count".to_string(), args.directed_count.into()),
    ]);
    let block = provenance(cli, "metrics", flags);
    let path = emit(cli, "metrics", None, &block, &payload)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run_communities(cli: &Cli, args: &CommunitiesArgs) -> Result<()> {
    let g = io::load_edge_list(&args.edges, None)?;
    let part = louvain(&g, cli.seed, args.resolution)?;
    let payload = CommunitiesReport {
        num_communities: part.num_communities(),
        modularity: modularity(&g, &part)?,
        assignment: part.assignment().to_vec(),
    };
    let flags = BTreeMap::from([
        ("edges".to_string(), path_flag(&args.edges)),
        ("resolution".to_string(), num(args.resolution)),
    ]);
    let block = provenance(cli, "communities", flags);
    let path = emit(cli, "communities", None, &block, &payload)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run_spectrum(cli: &Cli, args: &SpectrumArgs) -> Result<()> {
    let g = io::load_edge_list(&args.edges, None)?;
    let max_iter = args.max_iter.unwrap_or_else(|| default_max_iter(g.num_nodes()));
    let state = spectral_gap(&g, args.tol, max_iter)?;
    let payload = SpectrumReport::from(&state);
    let flags = BTreeMap::from([
        ("edges".to_string(), path_flag(&args.edges)),
        ("tol".to_string(), num(args.tol)),
        ("max_iter".to_string(), max_iter.into()),
    ]);
    let block = provenance(cli, "spectrum", flags);
    let path = emit(cli, "spectrum", None, &block, &payload)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct TheoryReport {
    expected_gap_two_block: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected_gap_k_block: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected_gap_unequal: Option<f64>,
    theory_error_aligned: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    theory_error: Option<f64>,
    recoverability_threshold: f64,
}

fn run_theory(cli: &Cli, args: &TheoryArgs) -> Result<()> {
    let payload = TheoryReport {
        expected_gap_two_block: expected_gap_two_block(args.n, args.p, args.q)?,
        expected_gap_k_block: args
            .blocks
            .map(|k| expected_gap_k_block(args.n, k, args.p, args.q))
            .transpose()?,
        expected_gap_unequal: args
            .m
            .map(|m| expected_gap_unequal(args.n, m, args.p, args.q))
            .transpose()?,
        theory_error_aligned: theory_error_aligned_scaled(args.n, args.p, args.q, 1.0, 1.0),
        theory_error: args.psi.map(|psi| theory_error(args.n, args.p, args.q, psi)),
        recoverability_threshold: recoverability_threshold(args.n, args.q)?,
    };
    let flags = BTreeMap::from([
        ("n".to_string(), args.n.into()),
        ("p".to_string(), num(args.p)),
        ("q".to_string(), num(args.q)),
        ("psi".to_string(), args.psi.map_or(Value::Null, num)),
        ("blocks".to_string(), args.blocks.map_or(Value::Null, Into::into)),
        ("m".to_string(), args.m.map_or(Value::Null, Into::into)),
    ]);
    let block = provenance(cli, "theory", flags);
    let path = emit(cli, "theory", None, &block, &payload)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport {
    n: usize,
    p: f64,
    q: f64,
    psi: f64,
    trials: usize,
    mode: String,
    mc_error: f64,
    mc_stderr: f64,
    theory_error: f64,
    abs_diff: f64,
    tolerance: f64,
    pass: bool,
}

fn run_verify(cli: &Cli, args: &VerifyArgs) -> Result<()> {
    let params = SbmParams::two_block(args.n, args.p, args.q, args.psi);
    let mode: AggregationMode = args.mode.into();
    let est = monte_carlo_error(&params, mode, args.trials, cli.seed)?;
    let theory = theory_error(args.n, args.p, args.q, args.psi);
    let abs_diff = (est.estimate - theory).abs();
    let tolerance = 3.0 * est.stderr + args.slack;
    let pass = abs_diff <= tolerance;
    let payload = VerifyReport {
        n: args.n,
        p: args.p,
        q: args.q,
        psi: args.psi,
        trials: args.trials,
        mode: mode.name().to_string(),
        mc_error: est.estimate,
        mc_stderr: est.stderr,
        theory_error: theory,
        abs_diff,
        tolerance,
        pass,
    };
    let flags = BTreeMap::from([
        ("n".to_string(), args.n.into()),
        ("p".to_string(), num(args.p)),
        ("q".to_string(), num(args.q)),
        ("psi".to_string(), num(args.psi)),
        ("trials".to_string(), args.trials.into()),
        ("mode".to_string(), mode.name().into()),
        ("slack".to_string(), num(args.slack)),
    ]);
    let block = provenance(cli, "verify", flags);
    let path = emit(cli, "verify", None, &block, &payload)?;
    println!(
        "{}: |mc - theory| = {:.6}, tolerance {:.6} (mc {:.6} +- {:.6}, theory {:.6})",
        if pass { "PASS" } else { "FAIL" },
        abs_diff,
        tolerance,
        est.estimate,
        est.stderr,
        theory,
    );
    println!("wrote {}", path.display());
    if pass {
        Ok(())
    } else {
        Err(Error::validation(format!(
            "Monte Carlo estimate {:.6} deviates from closed form {:.6} by {:.6} (> {:.6})",
            est.estimate, theory, abs_diff, tolerance
        )))
    }
}

fn run_sweep(cli: &Cli, args: &SweepArgs) -> Result<()> {
    let grid = SweepGrid {
        n: args.n,
        ps: args.ps.clone(),
        qs: args.qs.clone(),
        psis: args.psis.clone(),
        methods: args.methods.iter().map(|&m| m.into()).collect(),
        ops: args.ops.iter().map(|&op| op.into()).collect(),
        ks: args.ks.clone(),
    };
    let options = SweepOptions {
        mode: args.mode.into(),
        trials: args.trials,
        seed: cli.seed,
        planted: args.planted,
    };
    let report = sweep(&grid, &options)?;
    let flags = BTreeMap::from([
        ("n".to_string(), args.n.into()),
        ("ps".to_string(), serde_json::to_value(&args.ps)?),
        ("qs".to_string(), serde_json::to_value(&args.qs)?),
        ("psis".to_string(), serde_json::to_value(&args.psis)?),
        (
            "methods".to_string(),
            serde_json::to_value(grid.methods.iter().map(|m| m.name()).collect::<Vec<_>>())?,
        ),
        (
            "ops".to_string(),
            serde_json::to_value(grid.ops.iter().map(|op| op.name()).collect::<Vec<_>>())?,
        ),
        ("ks".to_string(), serde_json::to_value(&args.ks)?),
        ("trials".to_string(), args.trials.into()),
        ("mode".to_string(), options.mode.name().into()),
        ("planted".to_string(), args.planted.into()),
    ]);
    let block = provenance(cli, "sweep", flags);
    let path = match cli.format {
        Format::Json => emit(cli, "sweep", None, &block, &report)?,
        Format::Csv => {
            std::fs::create_dir_all(&cli.out_dir)?;
            let path = cli.out_dir.join("sweep.csv");
            let file = std::fs::File::create(&path)?;
            report.to_csv(file)?;
            save_json(&cli.out_dir.join("sweep.provenance.json"), &block)?;
            path
        }
    };
    println!("wrote {} ({} cells)", path.display(), report.rows.len());
    Ok(())
}

#[derive(Serialize)]
struct BenchRow {
    method: String,
    op: String,
    k: usize,
    reps: usize,
    median_ms: f64,
    runs_ms: Vec<f64>,
}

#[derive(Serialize)]
struct BenchReport {
    rows: Vec<BenchRow>,
}

fn parse_bench_method(name: &str) -> Result<Method> {
    match name {
        "comma" | "higher-comma" => Ok(Method::HigherComMa),
        "lower-comma" => Ok(Method::LowerComMa),
        "feast" => Ok(Method::FeaSt),
        "comfy" => Ok(Method::ComFy),
        "proxy" | "proxy-max" => Ok(Method::ProxyMax),
        "proxy-min" => Ok(Method::ProxyMin),
        other => Err(Error::validation(format!("unknown bench method `{other}`"))),
    }
}

fn synth_features(num_nodes: usize, dim: usize, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let rows = (0..num_nodes)
        .map(|_| (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    FeatureMatrix::from_rows(rows).expect("synthesized features are rectangular")
}

fn run_bench(cli: &Cli, args: &BenchArgs) -> Result<()> {
    if args.reps < 5 {
        return Err(Error::validation("bench needs at least 5 repetitions"));
    }
    let g = io::load_edge_list(&args.edges, None)?;
    let x = match &args.features {
        Some(path) => io::load_features(path)?,
        None => synth_features(g.num_nodes(), args.dim, cli.seed),
    };
    let part = louvain(&g, cli.seed, 1.0)?;
    let op: OpKind = args.op.into();

    let mut rows = Vec::new();
    for name in &args.methods {
        let method = parse_bench_method(name)?;
        let mut runs_ms = Vec::with_capacity(args.reps);
        for _ in 0..args.reps {
            let req = RewireRequest::new(method, op, args.k, cli.seed);
            let start = Instant::now();
            rewire(&g, Some(&x), Some(&part), &req)?;
            runs_ms.push(start.elapsed().as_secs_f64() * 1e3);
        }
        let mut sorted = runs_ms.clone();
        sorted.sort_by(f64::total_cmp);
        rows.push(BenchRow {
            method: method.name().to_string(),
            op: op.name().to_string(),
            k: args.k,
            reps: args.reps,
            median_ms: sorted[sorted.len() / 2],
            runs_ms,
        });
    }
    rows.sort_by(|a, b| a.median_ms.total_cmp(&b.median_ms));
    let payload = BenchReport { rows };

    let flags = BTreeMap::from([
        ("edges".to_string(), path_flag(&args.edges)),
        ("methods".to_string(), serde_json::to_value(&args.methods)?),
        ("op".to_string(), op.name().into()),
        ("k".to_string(), args.k.into()),
        ("reps".to_string(), args.reps.into()),
        ("features".to_string(), opt_path_flag(&args.features)),
        ("dim".to_string(), args.dim.into()),
    ]);
    let block = provenance(cli, "bench", flags);
    let path = match cli.format {
        Format::Json => emit(cli, "bench", None, &block, &payload)?,
        Format::Csv => {
            std::fs::create_dir_all(&cli.out_dir)?;
            let path = cli.out_dir.join("bench.csv");
            let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
            w.write_record(["method", "op", "k", "reps", "median_ms"]).map_err(csv_err)?;
            for row in &payload.rows {
                w.write_record([
                    row.method.clone(),
                    row.op.clone(),
                    row.k.to_string(),
                    row.reps.to_string(),
                    format!("{:.3}", row.median_ms),
                ])
                .map_err(csv_err)?;
            }
            w.flush()?;
            save_json(&cli.out_dir.join("bench.provenance.json"), &block)?;
            path
        }
    };
    for row in &payload.rows {
        println!("{:>14}  {:>8.3} ms (median of {})", row.method, row.median_ms, row.reps);
    }
    println!("wrote {}", path.display());
    Ok(())
}
