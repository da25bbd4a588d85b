//! Community detection: Louvain with seeded tie-breaking, and modularity.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, Partition};

/// Newman modularity of a partition: sum over communities of
/// e_c / |E| - (d_c / 2|E|)^2, with e_c the intra-community edge count and
/// d_c the community degree sum. An edgeless graph scores 0.
pub fn modularity(g: &Graph, part: &Partition) -> Result<f64> {
    if part.num_nodes() != g.num_nodes() {
        return Err(Error::validation(format!(
            "partition covers {} nodes, graph has {}",
            part.num_nodes(),
            g.num_nodes()
        )));
    }
    Ok(resolution_modularity(g, part.assignment(), 1.0))
}

/// Modularity with the resolution knob applied to the null-model term.
fn resolution_modularity(g: &Graph, assignment: &[usize], resolution: f64) -> f64 {
    let m = g.num_edges() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let nc = assignment.iter().copied().max().map_or(0, |c| c + 1);
    let mut intra = vec![0.0f64; nc];
    let mut degree = vec![0.0f64; nc];
    for u in 0..g.num_nodes() {
        degree[assignment[u]] += g.degree(u) as f64;
    }
    for (u, v) in g.edges() {
        if assignment[u] == assignment[v] {
            intra[assignment[u]] += 1.0;
        }
    }
    (0..nc)
        .map(|c| intra[c] / m - resolution * (degree[c] / (2.0 * m)).powi(2))
        .sum()
}

/// Weighted multigraph for the aggregation levels. Entries follow the
/// adjacency-matrix convention: a self-loop of weight w contributes w to
/// A_uu and w to the node strength, so collapsing communities preserves
/// strengths and the total weight exactly.
struct LevelGraph {
    /// per node: (neighbor, weight), including the self entry when nonzero
    adj: Vec<Vec<(usize, f64)>>,
    /// strength k_u = sum of incident weights
    strength: Vec<f64>,
    /// m2 = sum over all (u, v) of A_uv = total strength
    m2: f64,
}

impl LevelGraph {
    fn from_graph(g: &Graph) -> Self {
        let n = g.num_nodes();
        let adj: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|u| g.neighbors(u).iter().map(|&v| (v, 1.0)).collect())
            .collect();
        let strength: Vec<f64> = (0..n).map(|u| g.degree(u) as f64).collect();
        let m2 = strength.iter().sum();
        LevelGraph { adj, strength, m2 }
    }

    fn num_nodes(&self) -> usize {
        self.adj.len()
    }

    /// Collapse communities into super-nodes. `assignment` must be
    /// 0-based contiguous.
    fn aggregate(&self, assignment: &[usize], num_comms: usize) -> LevelGraph {
        let mut maps: Vec<std::collections::BTreeMap<usize, f64>> =
            vec![std::collections::BTreeMap::new(); num_comms];
        for u in 0..self.num_nodes() {
            let cu = assignment[u];
            for &(v, w) in &self.adj[u] {
                let cv = assignment[v];
                // A'_cd = sum_{u in c, v in d} A_uv: iterating every
                // directed entry counts intra pairs twice, matching the
                // matrix convention for the merged self-loop
                *maps[cu].entry(cv).or_insert(0.0) += w;
            }
        }
        let adj: Vec<Vec<(usize, f64)>> = maps
            .into_iter()
            .map(|m| m.into_iter().collect())
            .collect();
        let strength: Vec<f64> = adj
            .iter()
            .map(|nbrs| nbrs.iter().map(|&(_, w)| w).sum())
            .collect();
        let m2 = strength.iter().sum();
        LevelGraph { adj, strength, m2 }
    }

    fn modularity(&self, assignment: &[usize], resolution: f64) -> f64 {
        if self.m2 == 0.0 {
            return 0.0;
        }
        let nc = assignment.iter().copied().max().map_or(0, |c| c + 1);
        let mut intra = vec![0.0f64; nc];
        let mut total = vec![0.0f64; nc];
        for u in 0..self.num_nodes() {
            total[assignment[u]] += self.strength[u];
            for &(v, w) in &self.adj[u] {
                if assignment[v] == assignment[u] {
                    intra[assignment[u]] += w;
                }
            }
        }
        (0..nc)
            .map(|c| (intra[c] - resolution * total[c] * total[c] / self.m2) / self.m2)
            .sum()
    }
}

/// Louvain community detection. The seed fixes the node visit order of
/// every sweep; moves require strictly positive modularity gain, with ties
/// between target communities broken toward the lowest community id.
/// Aggregation repeats until a level stops merging. Isolated nodes stay
/// in singleton communities.
pub fn louvain(g: &Graph, seed: u64, resolution: f64) -> Result<Partition> {
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::validation("resolution must be positive"));
    }
    let n = g.num_nodes();
    if n == 0 {
        return Err(Error::validation("graph has no nodes"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    // node -> community of the original graph, refined level by level
    let mut membership: Vec<usize> = (0..n).collect();
    let mut level = LevelGraph::from_graph(g);
    let mut level_q = level.modularity(&membership, resolution);

    loop {
        let (assignment, num_comms) = move_nodes(&level, resolution, &mut rng);
        let q = level.modularity(&assignment, resolution);
        assert!(
            q >= level_q - 1e-9,
            "modularity decreased across a level: {level_q} -> {q}"
        );
        level_q = q;
        if num_comms == level.num_nodes() {
            break;
        }
        for slot in membership.iter_mut() {
            *slot = assignment[*slot];
        }
        level = level.aggregate(&assignment, num_comms);
    }
    Ok(Partition::from_raw(&membership))
}

/// One local-moving phase: sweeps in seeded order until a full sweep makes
/// no move. Returns a contiguous assignment and its community count.
fn move_nodes(
    level: &LevelGraph,
    resolution: f64,
    rng: &mut ChaCha20Rng,
) -> (Vec<usize>, usize) {
    let n = level.num_nodes();
    let mut comm: Vec<usize> = (0..n).collect();
    let mut total: Vec<f64> = level.strength.clone();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    if level.m2 > 0.0 {
        let mut links: Vec<f64> = vec![0.0; n]; // scratch: weight from u to each community
        let mut touched: Vec<usize> = Vec::new();
        loop {
            let mut moved = false;
            for &u in &order {
                let cu = comm[u];
                let ku = level.strength[u];
                // weights from u into neighboring communities, self excluded
                for &(v, w) in &level.adj[u] {
                    if v == u {
                        continue;
                    }
                    let cv = comm[v];
                    if links[cv] == 0.0 {
                        touched.push(cv);
                    }
                    links[cv] += w;
                }
                total[cu] -= ku;
                let base = links[cu] - resolution * total[cu] * ku / level.m2;
                let mut best_comm = cu;
                let mut best_gain = 0.0;
                // ascending scan with strict improvement: equal gains keep
                // the lowest community id, zero gains never move
                touched.sort_unstable();
                for &c in &touched {
                    if c == cu {
                        continue;
                    }
                    let gain = (links[c] - resolution * total[c] * ku / level.m2) - base;
                    if gain > best_gain + 1e-12 {
                        best_gain = gain;
                        best_comm = c;
                    }
                }
                total[best_comm] += ku;
                if best_comm != cu {
                    comm[u] = best_comm;
                    moved = true;
                }
                for &c in &touched {
                    links[c] = 0.0;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
        }
    }

    // compact ids, ordered by first appearance over node ids
    let mut remap = vec![usize::MAX; n];
    let mut next = 0;
    for c in comm.iter_mut() {
        if remap[*c] == usize::MAX {
            remap[*c] = next;
            next += 1;
        }
        *c = remap[*c];
    }
    (comm, next)
}
