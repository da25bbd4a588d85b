//! The six rewiring families: community-based random rewiring (ComMa),
//! global feature-similarity rewiring (FeaSt), community-budgeted
//! similarity rewiring (ComFy), and greedy spectral proxy rewiring
//! (ProxyMin / ProxyMax), plus the dispatching `rewire` entry point.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ordered, EdgeDelta, FeatureMatrix, Graph, Partition, Provenance};
use crate::spectral::{
    self, proxy_gap_after_add, proxy_gap_after_del, refresh_eigenpair,
    FULL_RESOLVE_PERIOD, REFRESH_WARM_ITERS,
};

/// Node count above which FeaSt switches to node-sampled candidates.
pub const AUTO_SAMPLE_THRESHOLD: usize = 20_000;

/// Sample ratio used when auto-sampling activates.
pub const AUTO_SAMPLE_RATIO: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    HigherComMa,
    LowerComMa,
    FeaSt,
    ComFy,
    ProxyMin,
    ProxyMax,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::HigherComMa => "higher_comma",
            Method::LowerComMa => "lower_comma",
            Method::FeaSt => "feast",
            Method::ComFy => "comfy",
            Method::ProxyMin => "proxy_min",
            Method::ProxyMax => "proxy_max",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    Add,
    Del,
    AddDel,
}

impl OpKind {
    pub fn name(self) -> &'static str {
        match self {
            OpKind::Add => "add",
            OpKind::Del => "del",
            OpKind::AddDel => "add_del",
        }
    }
}

/// Single-phase operation used by the method implementations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Del,
}

/// Community direction for ComMa.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Higher,
    Lower,
}

/// One rewiring run: method, operation, edge budget, seed, and candidate
/// subsampling ratio (1 = exact).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RewireRequest {
    pub method: Method,
    pub op: OpKind,
    pub k: usize,
    pub seed: u64,
    pub sample_ratio: f64,
    /// Disables the isolation guard so deletions may strand nodes.
    pub allow_isolation: bool,
}

impl RewireRequest {
    pub fn new(method: Method, op: OpKind, k: usize, seed: u64) -> Self {
        RewireRequest {
            method,
            op,
            k,
            seed,
            sample_ratio: 1.0,
            allow_isolation: false,
        }
    }
}

/// Delta plus per-phase wall-clock timings.
#[derive(Debug, Clone)]
pub struct RewireOutcome {
    pub delta: EdgeDelta,
    pub timings_ms: std::collections::BTreeMap<String, f64>,
}

/// Resolve the candidate-sampling ratio: an explicit request wins,
/// otherwise sampling auto-activates above the node threshold.
pub fn effective_sample_ratio(num_nodes: usize, requested: f64) -> f64 {
    if requested < 1.0 {
        requested
    } else if num_nodes > AUTO_SAMPLE_THRESHOLD {
        AUTO_SAMPLE_RATIO
    } else {
        1.0
    }
}

/// Cosine of the feature rows of u and v; 0 when either row has norm 0.
pub fn cosine_similarity(x: &FeatureMatrix, u: usize, v: usize) -> f64 {
    let (a, b) = (x.row(u), x.row(v));
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for i in 0..a.len() {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na.sqrt() * nb.sqrt())
    }
}

/// Dispatch a request to its method, recording provenance and per-phase
/// timings. AddDel runs an Add phase of size k, then a Del phase of size k
/// on the intermediate graph; the merged delta is relative to the input.
pub fn rewire(
    g: &Graph,
    x: Option<&FeatureMatrix>,
    part: Option<&Partition>,
    req: &RewireRequest,
) -> Result<RewireOutcome> {
    let features = || {
        x.ok_or_else(|| {
            Error::validation(format!("method {} requires a feature matrix", req.method.name()))
        })
    };
    let partition = || {
        part.ok_or_else(|| {
            Error::validation(format!("method {} requires a partition", req.method.name()))
        })
    };
    match req.method {
        Method::FeaSt => {
            features()?;
        }
        Method::ComFy => {
            features()?;
            partition()?;
        }
        Method::HigherComMa | Method::LowerComMa => {
            partition()?;
        }
        Method::ProxyMin | Method::ProxyMax => {}
    }

    let mut timings = std::collections::BTreeMap::new();
    let run_phase = |g: &Graph, op: Op| -> Result<EdgeDelta> {
        match req.method {
            Method::HigherComMa => {
                comma_guarded(g, partition()?, Direction::Higher, op, req)
            }
            Method::LowerComMa => comma_guarded(g, partition()?, Direction::Lower, op, req),
            Method::FeaSt => feast_op(g, features()?, op, req.k, req.sample_ratio, req.seed, req.allow_isolation),
            Method::ComFy => comfy_op(g, features()?, partition()?, op, req.k, req.allow_isolation),
            Method::ProxyMin => proxy_rewire_op(g, Objective::Min, op, req.k, req.allow_isolation),
            Method::ProxyMax => proxy_rewire_op(g, Objective::Max, op, req.k, req.allow_isolation),
        }
    };

    let total = Instant::now();
    let mut delta = match req.op {
        OpKind::Add => {
            let t = Instant::now();
            let d = run_phase(g, Op::Add)?;
            timings.insert("add_ms".to_string(), ms(t));
            d
        }
        OpKind::Del => {
            let t = Instant::now();
            let d = run_phase(g, Op::Del)?;
            timings.insert("del_ms".to_string(), ms(t));
            d
        }
        OpKind::AddDel => {
            let t = Instant::now();
            let add = run_phase(g, Op::Add)?;
            timings.insert("add_ms".to_string(), ms(t));
            let mid = crate::graph::apply_delta(g, &add)?;
            let t = Instant::now();
            let del = run_phase(&mid, Op::Del)?;
            timings.insert("del_ms".to_string(), ms(t));
            merge_phases(add, del)
        }
    };
    timings.insert("total_ms".to_string(), ms(total));

    let phase_params = std::mem::take(&mut delta.provenance.params);
    delta.provenance = Provenance::new(req.method.name(), req.seed)
        .with_param("op", req.op.name())
        .with_param("k", req.k as u64)
        .with_param("sample_ratio", req.sample_ratio)
        .with_param("allow_isolation", req.allow_isolation);
    delta.provenance.params.extend(phase_params);
    Ok(RewireOutcome {
        delta,
        timings_ms: timings,
    })
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Net delta of an Add phase followed by a Del phase: an edge added and
/// then deleted cancels out.
fn merge_phases(add: EdgeDelta, del: EdgeDelta) -> EdgeDelta {
    let added_set: BTreeSet<(usize, usize)> =
        add.added.iter().map(|&(u, v)| ordered(u, v)).collect();
    let deleted_set: BTreeSet<(usize, usize)> =
        del.deleted.iter().map(|&(u, v)| ordered(u, v)).collect();
    let mut warnings = add.warnings;
    warnings.extend(del.warnings);
    let mut provenance = add.provenance;
    let add_params = std::mem::take(&mut provenance.params);
    provenance.params = add_params
        .iter()
        .map(|(k, v)| (format!("add_{k}"), v.clone()))
        .chain(
            del.provenance
                .params
                .iter()
                .map(|(k, v)| (format!("del_{k}"), v.clone())),
        )
        .collect();
    EdgeDelta {
        added: add
            .added
            .into_iter()
            .filter(|&(u, v)| !deleted_set.contains(&ordered(u, v)))
            .collect(),
        deleted: del
            .deleted
            .into_iter()
            .filter(|&(u, v)| !added_set.contains(&ordered(u, v)))
            .collect(),
        provenance,
        warnings,
    }
}

// --- ComMa -----------------------------------------------------------------

fn comma_guarded(
    g: &Graph,
    part: &Partition,
    direction: Direction,
    op: Op,
    req: &RewireRequest,
) -> Result<EdgeDelta> {
    comma_impl(g, part, direction, op, req.k, req.seed, req.allow_isolation)
}

/// Uniform random draws without replacement from the community-filtered
/// candidate space: Higher adds intra / deletes inter, Lower the opposite.
pub fn comma(
    g: &Graph,
    part: &Partition,
    direction: Direction,
    op: Op,
    k: usize,
    seed: u64,
) -> Result<EdgeDelta> {
    comma_impl(g, part, direction, op, k, seed, false)
}

fn comma_impl(
    g: &Graph,
    part: &Partition,
    direction: Direction,
    op: Op,
    k: usize,
    seed: u64,
    allow_isolation: bool,
) -> Result<EdgeDelta> {
    check_partition(g, part)?;
    let n = g.num_nodes();
    // Higher strengthens community structure: add intra, delete inter.
    let want_intra = matches!(
        (direction, op),
        (Direction::Higher, Op::Add) | (Direction::Lower, Op::Del)
    );
    let method = match direction {
        Direction::Higher => "higher_comma",
        Direction::Lower => "lower_comma",
    };
    let mut delta = EdgeDelta::empty(Provenance::new(method, seed));
    if k == 0 {
        return Ok(delta);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    match op {
        Op::Del => {
            let mut cands: Vec<(usize, usize)> = g
                .edges()
                .filter(|&(u, v)| (part.community(u) == part.community(v)) == want_intra)
                .collect();
            if cands.is_empty() {
                delta.warnings.push("no candidate edges to delete".to_string());
                return Ok(delta);
            }
            cands.shuffle(&mut rng);
            let mut deg: Vec<usize> = (0..n).map(|u| g.degree(u)).collect();
            let mut skipped = 0usize;
            for &(u, v) in &cands {
                if delta.deleted.len() == k {
                    break;
                }
                if !allow_isolation && (deg[u] <= 1 || deg[v] <= 1) {
                    skipped += 1;
                    continue;
                }
                deg[u] -= 1;
                deg[v] -= 1;
                delta.deleted.push((u, v));
            }
            if skipped > 0 {
                delta
                    .warnings
                    .push(format!("isolation guard skipped {skipped} candidate deletions"));
            }
            if delta.deleted.len() < k {
                delta.warnings.push(format!(
                    "requested {k} deletions, only {} candidates available",
                    delta.deleted.len()
                ));
            }
        }
        Op::Add => {
            // exact candidate count from partition statistics
            let sizes = part.sizes();
            let intra_pairs: usize = sizes.iter().map(|&s| s * (s - 1) / 2).sum();
            let total_pairs = n * (n - 1) / 2;
            let intra_edges = g
                .edges()
                .filter(|&(u, v)| part.community(u) == part.community(v))
                .count();
            let candidates = if want_intra {
                intra_pairs - intra_edges
            } else {
                (total_pairs - intra_pairs) - (g.num_edges() - intra_edges)
            };
            let take = k.min(candidates);
            if take < k {
                delta.warnings.push(format!(
                    "requested {k} additions, only {candidates} candidates available"
                ));
            }
            if take == 0 {
                if candidates == 0 {
                    delta.warnings.push("no candidate pairs to add".to_string());
                }
                return Ok(delta);
            }
            let pair_space = if want_intra {
                intra_pairs
            } else {
                total_pairs - intra_pairs
            };
            // rejection sampling over uniform node pairs stays cheap while
            // acceptance is high and the pool is much larger than the draw
            let dense_enough = candidates * 16 >= total_pairs && take * 2 <= candidates;
            if dense_enough {
                let mut chosen: BTreeSet<(usize, usize)> = BTreeSet::new();
                let budget = 64 * (take + 16) * (total_pairs / pair_space.max(1)).max(1);
                let mut attempts = 0usize;
                while chosen.len() < take && attempts < budget {
                    attempts += 1;
                    let u = rng.gen_range(0..n);
                    let v = rng.gen_range(0..n);
                    if u == v {
                        continue;
                    }
                    let (u, v) = ordered(u, v);
                    if (part.community(u) == part.community(v)) != want_intra {
                        continue;
                    }
                    if g.has_edge(u, v) || chosen.contains(&(u, v)) {
                        continue;
                    }
                    chosen.insert((u, v));
                    delta.added.push((u, v));
                }
                if chosen.len() == take {
                    return Ok(delta);
                }
                // fall through to enumeration on budget exhaustion
                delta.added.clear();
            }
            let mut cands: Vec<(usize, usize)> = Vec::with_capacity(candidates);
            for u in 0..n {
                let mut nbrs = g.neighbors(u).iter().peekable();
                for v in u + 1..n {
                    while nbrs.peek().is_some_and(|&&w| w < v) {
                        nbrs.next();
                    }
                    if nbrs.peek() == Some(&&v) {
                        continue;
                    }
                    if (part.community(u) == part.community(v)) == want_intra {
                        cands.push((u, v));
                    }
                }
            }
            debug_assert_eq!(cands.len(), candidates);
            cands.shuffle(&mut rng);
            delta.added.extend(cands.into_iter().take(take));
        }
    }
    Ok(delta)
}

// --- FeaSt -------------------------------------------------------------------

/// Global similarity rewiring: Add takes the k most similar non-edges,
/// Del the k least similar edges. The published rank formulas are strictly
/// monotone transforms of the similarity, so ordering by similarity itself
/// selects identically; ties break lexicographically by (u, v).
pub fn feast(
    g: &Graph,
    x: &FeatureMatrix,
    op: Op,
    k: usize,
    sample_ratio: f64,
    seed: u64,
) -> Result<EdgeDelta> {
    feast_op(g, x, op, k, sample_ratio, seed, false)
}

fn feast_op(
    g: &Graph,
    x: &FeatureMatrix,
    op: Op,
    k: usize,
    sample_ratio: f64,
    seed: u64,
    allow_isolation: bool,
) -> Result<EdgeDelta> {
    check_features(g, x)?;
    if !(sample_ratio > 0.0 && sample_ratio <= 1.0) {
        return Err(Error::validation("sample_ratio must lie in (0, 1]"));
    }
    let n = g.num_nodes();
    let ratio = effective_sample_ratio(n, sample_ratio);
    let mut delta = EdgeDelta::empty(Provenance::new("feast", seed));
    if k == 0 {
        return Ok(delta);
    }

    let in_sample: Option<Vec<bool>> = if ratio < 1.0 {
        let size = ((ratio * n as f64).ceil() as usize).clamp(1, n);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let idx = rand::seq::index::sample(&mut rng, n, size);
        let mut mask = vec![false; n];
        for i in idx {
            mask[i] = true;
        }
        delta
            .provenance
            .params
            .insert("sampled_nodes".into(), (size as u64).into());
        Some(mask)
    } else {
        None
    };
    let keep = |u: usize, v: usize| in_sample.as_ref().map_or(true, |m| m[u] && m[v]);

    match op {
        Op::Add => {
            let mut scored: Vec<(f64, usize, usize)> = (0..n)
                .into_par_iter()
                .flat_map_iter(|u| {
                    let mut out = Vec::new();
                    if keep(u, u) {
                        let mut nbrs = g.neighbors(u).iter().peekable();
                        for v in u + 1..n {
                            while nbrs.peek().is_some_and(|&&w| w < v) {
                                nbrs.next();
                            }
                            if nbrs.peek() == Some(&&v) {
                                continue;
                            }
                            if keep(u, v) {
                                out.push((cosine_similarity(x, u, v), u, v));
                            }
                        }
                    }
                    out
                })
                .collect();
            scored.par_sort_unstable_by(|a, b| {
                b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
            });
            if scored.len() < k {
                delta.warnings.push(format!(
                    "requested {k} additions, only {} candidates available",
                    scored.len()
                ));
            }
            delta
                .added
                .extend(scored.into_iter().take(k).map(|(_, u, v)| (u, v)));
        }
        Op::Del => {
            let mut scored: Vec<(f64, usize, usize)> = g
                .edges()
                .filter(|&(u, v)| keep(u, v))
                .map(|(u, v)| (cosine_similarity(x, u, v), u, v))
                .collect();
            scored.par_sort_unstable_by(|a, b| {
                a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
            });
            take_deletions(g, scored.iter().map(|&(_, u, v)| (u, v)), k, allow_isolation, &mut delta);
        }
    }
    Ok(delta)
}

/// Walk candidates in rank order, honoring the isolation guard against the
/// degrees left by already-accepted deletions.
fn take_deletions(
    g: &Graph,
    ranked: impl Iterator<Item = (usize, usize)>,
    k: usize,
    allow_isolation: bool,
    delta: &mut EdgeDelta,
) {
    let mut deg: Vec<usize> = (0..g.num_nodes()).map(|u| g.degree(u)).collect();
    let mut skipped = 0usize;
    for (u, v) in ranked {
        if delta.deleted.len() == k {
            break;
        }
        if !allow_isolation && (deg[u] <= 1 || deg[v] <= 1) {
            skipped += 1;
            continue;
        }
        deg[u] -= 1;
        deg[v] -= 1;
        delta.deleted.push((u, v));
    }
    if skipped > 0 {
        delta
            .warnings
            .push(format!("isolation guard skipped {skipped} candidate deletions"));
    }
    if delta.deleted.len() < k {
        delta.warnings.push(format!(
            "requested {k} deletions, only {} accepted",
            delta.deleted.len()
        ));
    }
}

// --- ComFy -------------------------------------------------------------------

/// FeaSt under per-community-pair budgets proportional to pair area
/// |C_i|·|C_j| (diagonal included). Unfilled budgets are forfeited; the
/// realized count is recorded in the provenance.
pub fn comfy(
    g: &Graph,
    x: &FeatureMatrix,
    part: &Partition,
    op: Op,
    k: usize,
) -> Result<EdgeDelta> {
    comfy_op(g, x, part, op, k, false)
}

fn comfy_op(
    g: &Graph,
    x: &FeatureMatrix,
    part: &Partition,
    op: Op,
    k: usize,
    allow_isolation: bool,
) -> Result<EdgeDelta> {
    check_features(g, x)?;
    check_partition(g, part)?;
    let mut delta = EdgeDelta::empty(Provenance::new("comfy", 0));
    if k == 0 {
        return Ok(delta);
    }
    let sizes = part.sizes();
    let nc = part.num_communities();
    let mut total_area = 0.0f64;
    for i in 0..nc {
        for j in i..nc {
            total_area += (sizes[i] * sizes[j]) as f64;
        }
    }

    // nodes per community, ascending, for candidate enumeration
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); nc];
    for u in 0..part.num_nodes() {
        members[part.community(u)].push(u);
    }

    let mut deg: Vec<usize> = (0..g.num_nodes()).map(|u| g.degree(u)).collect();
    let mut skipped = 0usize;
    let mut budget_total = 0usize;
    for i in 0..nc {
        for j in i..nc {
            let area = (sizes[i] * sizes[j]) as f64;
            let budget = (k as f64 * area / total_area).round() as usize;
            budget_total += budget;
            if budget == 0 {
                continue;
            }
            let mut scored: Vec<(f64, usize, usize)> = Vec::new();
            for &u in &members[i] {
                for &v in &members[j] {
                    if v <= u && i == j {
                        continue;
                    }
                    let (a, b) = ordered(u, v);
                    let bridging = g.has_edge(a, b);
                    match op {
                        Op::Add if !bridging => scored.push((cosine_similarity(x, a, b), a, b)),
                        Op::Del if bridging => scored.push((cosine_similarity(x, a, b), a, b)),
                        _ => {}
                    }
                }
            }
            match op {
                Op::Add => {
                    scored.sort_unstable_by(|a, b| {
                        b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
                    });
                    delta
                        .added
                        .extend(scored.into_iter().take(budget).map(|(_, u, v)| (u, v)));
                }
                Op::Del => {
                    scored.sort_unstable_by(|a, b| {
                        a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
                    });
                    let mut taken = 0usize;
                    for (_, u, v) in scored {
                        if taken == budget {
                            break;
                        }
                        if !allow_isolation && (deg[u] <= 1 || deg[v] <= 1) {
                            skipped += 1;
                            continue;
                        }
                        deg[u] -= 1;
                        deg[v] -= 1;
                        delta.deleted.push((u, v));
                        taken += 1;
                    }
                }
            }
        }
    }
    if skipped > 0 {
        delta
            .warnings
            .push(format!("isolation guard skipped {skipped} candidate deletions"));
    }
    let realized = delta.added.len() + delta.deleted.len();
    delta
        .provenance
        .params
        .insert("budget_total".into(), (budget_total as u64).into());
    delta
        .provenance
        .params
        .insert("realized_k".into(), (realized as u64).into());
    if realized < k {
        delta
            .warnings
            .push(format!("budgets realized {realized} of {k} requested modifications"));
    }
    Ok(delta)
}

// --- proxy rewiring ----------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Min,
    Max,
}

/// Greedy spectral rewiring: each of the k steps scores every candidate
/// with the first-order proxy, applies the arg-min (Min) or arg-max (Max),
/// then refreshes the eigenpair (warm iterations, periodic full re-solve).
pub fn proxy_rewire(g: &Graph, objective: Objective, op: Op, k: usize) -> Result<EdgeDelta> {
    proxy_rewire_op(g, objective, op, k, false)
}

fn proxy_rewire_op(
    g: &Graph,
    objective: Objective,
    op: Op,
    k: usize,
    allow_isolation: bool,
) -> Result<EdgeDelta> {
    if k == 0 {
        return Err(Error::validation("proxy rewiring requires k >= 1"));
    }
    let method = match objective {
        Objective::Min => "proxy_min",
        Objective::Max => "proxy_max",
    };
    let mut delta = EdgeDelta::empty(Provenance::new(method, 0));
    let mut work = g.clone();
    let (mut state, converged) = spectral::solve(
        g,
        spectral::DEFAULT_TOL,
        spectral::default_max_iter(g.num_nodes()),
        None,
    )?;
    if !converged {
        delta.warnings.push(format!(
            "initial eigensolve stopped at residual {:.3e}; using best estimate",
            state.residual
        ));
    }

    for step in 1..=k {
        let best = match op {
            Op::Add => best_addition(&work, &state, objective),
            Op::Del => best_deletion(&work, &state, objective, allow_isolation),
        };
        let Some((u, v)) = best else {
            delta.warnings.push(format!(
                "stopped after {} of {k} steps: no remaining candidates",
                step - 1
            ));
            break;
        };
        match op {
            Op::Add => {
                work.add_edge(u, v);
                delta.added.push((u, v));
            }
            Op::Del => {
                work.remove_edge(u, v);
                delta.deleted.push((u, v));
            }
        }
        if step % FULL_RESOLVE_PERIOD == 0 {
            match spectral::solve(&work, spectral::DEFAULT_TOL, spectral::default_max_iter(work.num_nodes()), Some(&state.fiedler)) {
                Ok((s, converged)) => {
                    if !converged {
                        delta.warnings.push(format!(
                            "full re-solve at step {step} stopped at residual {:.3e}; using best estimate",
                            s.residual
                        ));
                    }
                    state = s;
                }
                Err(_) => unreachable!("solve preconditions hold for a tracked graph"),
            }
        } else {
            state = refresh_eigenpair(&work, &state, REFRESH_WARM_ITERS);
        }
    }
    Ok(delta)
}

/// Best non-edge under the add proxy. Candidates are scanned per node with
/// a merged walk over the sorted neighbor list; the per-node bests reduce
/// deterministically by (score, u, v).
fn best_addition(g: &Graph, state: &crate::spectral::SpectralState, objective: Objective) -> Option<(usize, usize)> {
    let n = g.num_nodes();
    (0..n)
        .into_par_iter()
        .filter_map(|u| {
            let mut best: Option<(f64, usize, usize)> = None;
            let mut nbrs = g.neighbors(u).iter().peekable();
            for v in u + 1..n {
                while nbrs.peek().is_some_and(|&&w| w < v) {
                    nbrs.next();
                }
                if nbrs.peek() == Some(&&v) {
                    continue;
                }
                let score = proxy_gap_after_add(state, u, v);
                if better(objective, score, u, v, &best) {
                    best = Some((score, u, v));
                }
            }
            best
        })
        .reduce_with(|a, b| {
            if better(objective, a.0, a.1, a.2, &Some(b)) {
                a
            } else {
                b
            }
        })
        .map(|(_, u, v)| (u, v))
}

fn best_deletion(
    g: &Graph,
    state: &crate::spectral::SpectralState,
    objective: Objective,
    allow_isolation: bool,
) -> Option<(usize, usize)> {
    g.edges()
        .filter(|&(u, v)| allow_isolation || (g.degree(u) > 1 && g.degree(v) > 1))
        .map(|(u, v)| (proxy_gap_after_del(state, u, v), u, v))
        .fold(None, |best, (s, u, v)| {
            if better(objective, s, u, v, &best) {
                Some((s, u, v))
            } else {
                best
            }
        })
        .map(|(_, u, v)| (u, v))
}

/// Strict improvement over the incumbent: better score, or an equal score
/// with a lexicographically smaller pair.
fn better(
    objective: Objective,
    score: f64,
    u: usize,
    v: usize,
    incumbent: &Option<(f64, usize, usize)>,
) -> bool {
    let Some((bs, bu, bv)) = *incumbent else {
        return true;
    };
    let ord = match objective {
        Objective::Min => bs.total_cmp(&score),
        Objective::Max => score.total_cmp(&bs),
    };
    match ord {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Equal => (u, v) < (bu, bv),
        std::cmp::Ordering::Less => false,
    }
}

// --- shared validation ---------------------------------------------------------

fn check_partition(g: &Graph, part: &Partition) -> Result<()> {
    if part.num_nodes() != g.num_nodes() {
        return Err(Error::validation(format!(
            "partition covers {} nodes, graph has {}",
            part.num_nodes(),
            g.num_nodes()
        )));
    }
    Ok(())
}

fn check_features(g: &Graph, x: &FeatureMatrix) -> Result<()> {
    if x.num_nodes() != g.num_nodes() {
        return Err(Error::validation(format!(
            "feature matrix has {} rows, graph has {} nodes",
            x.num_nodes(),
            g.num_nodes()
        )));
    }
    Ok(())
}
