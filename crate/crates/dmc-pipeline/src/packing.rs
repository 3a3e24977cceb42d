use std::cmp::Ordering;

use dmc_graph::{EdgeId, VertexId, Weight, WeightedMultigraph};
use dmc_oracle::UnionFind;
use serde::{Deserialize, Serialize};

use crate::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PackingParams {
    /// Iterations are `⌈k·c′·ln m′⌉`, capped at `max_trees`.
    pub k: f64,
    pub max_trees: usize,
}

impl Default for PackingParams {
    fn default() -> Self {
        PackingParams { k: 1.0, max_trees: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreePack {
    /// Distinct spanning trees as lists of vertex pairs, in the order first
    /// produced.
    pub trees: Vec<Vec<(VertexId, VertexId)>>,
    /// Edge ids of `h` per tree; completion edges taken from outside `h`
    /// have no id here.
    pub tree_edge_ids: Vec<Vec<EdgeId>>,
    pub iterations: usize,
    pub c_prime: Weight,
    pub k: f64,
}

/// Greedy packing: each iteration takes a minimum spanning tree under the
/// cost `load(e)/mult(e)` (ties by edge id) and adds one to the load of its
/// edges. Duplicate trees are dropped.
pub fn pack_trees(h: &WeightedMultigraph, c_prime: Weight, params: &PackingParams) -> Result<TreePack, PipelineError> {
    pack_trees_with(h, c_prime, params, None)
}

/// As `pack_trees`; when `h` is disconnected, trees are completed to spanning
/// trees with edges of `fallback`, taken in id order.
pub fn pack_trees_with(
    h: &WeightedMultigraph,
    c_prime: Weight,
    params: &PackingParams,
    fallback: Option<&WeightedMultigraph>,
) -> Result<TreePack, PipelineError> {
    let n = h.vertex_count();
    if fallback.is_none() && !h.is_connected() {
        return Err(PipelineError::Disconnected);
    }
    if c_prime == 0 {
        return Err(PipelineError::Params("c′ must be at least 1".into()));
    }
    let m_prime: f64 = h.edges().iter().map(|e| e.w as f64).sum();
    let target = (params.k * c_prime as f64 * m_prime.max(1.0).ln()).ceil();
    let iterations = if target.is_finite() && target >= 1.0 {
        (target as usize).min(params.max_trees.max(1))
    } else {
        1
    };
    let edges = h.edges();
    let mut load = vec![0u64; edges.len()];
    let mut order: Vec<usize> = (0..edges.len()).collect();
    let mut trees = Vec::new();
    let mut ids = Vec::new();
    for _ in 0..iterations {
        order.sort_by(|&a, &b| cost_cmp(load[a], edges[a].w, load[b], edges[b].w).then(edges[a].id.cmp(&edges[b].id)));
        let mut uf = UnionFind::new(n);
        let mut pairs = Vec::with_capacity(n.saturating_sub(1));
        let mut picked = Vec::with_capacity(n.saturating_sub(1));
        for &i in &order {
            let e = &edges[i];
            if uf.union(e.u, e.v) {
                load[i] += 1;
                pairs.push((e.u.min(e.v), e.u.max(e.v)));
                picked.push(e.id);
                if pairs.len() + 1 == n {
                    break;
                }
            }
        }
        if pairs.len() + 1 < n {
            if let Some(f) = fallback {
                for e in f.edges() {
                    if uf.union(e.u, e.v) {
                        pairs.push((e.u.min(e.v), e.u.max(e.v)));
                    }
                }
            }
            if pairs.len() + 1 < n {
                return Err(PipelineError::Disconnected);
            }
        }
        pairs.sort_unstable();
        picked.sort_unstable();
        if !trees.contains(&pairs) {
            trees.push(pairs);
            ids.push(picked);
        }
    }
    Ok(TreePack { trees, tree_edge_ids: ids, iterations, c_prime, k: params.k })
}

/// Compares `la/ca` with `lb/cb`.
fn cost_cmp(la: u64, ca: Weight, lb: u64, cb: Weight) -> Ordering {
    (la as u128 * cb as u128).cmp(&(lb as u128 * ca as u128))
}

/// Number of tree edges crossing the cut given by `mask`.
pub fn tree_crossings(tree: &[(VertexId, VertexId)], mask: &[bool]) -> usize {
    tree.iter().filter(|&&(u, v)| mask[u] != mask[v]).count()
}
