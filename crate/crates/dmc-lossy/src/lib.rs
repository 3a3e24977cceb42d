//! Lossy uniformly weighted cut sparsifier: every cluster of an expander
//! decomposition sequence is replaced by a contracted explicit expander, and
//! the sparsifier of the next level is routed back onto boundary vertices.

mod expander;

pub use expander::{
    certify, contracted_expander, degree_mapped_expander, expander_graph, explicit_expander, ExplicitExpander,
    ALPHA0, EXACT_CERT_LIMIT,
};

use dmc_decomp::CertMethod;
use dmc_graph::{cut_weight_mask, GraphBuilder, GraphError, VertexId, Weight, WeightedMultigraph};
use dmc_oracle::{for_each_cut, OracleError};
use dmc_sequence::{build_sequence, ExpanderSequence, SequenceError, SequenceParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LossyError {
    #[error("Δ = {delta} is below max(27β/φ, 3) = {required}")]
    DeltaTooSmall { delta: u64, required: u64 },
    #[error("an expander needs at least one vertex")]
    EmptyExpander,
    #[error("demand d({vertex}) = {demand} is below 1")]
    DemandBelowOne { vertex: VertexId, demand: f64 },
    #[error("λ̃ must be positive")]
    ZeroLambda,
    #[error("level {level}: cluster {cluster} cannot host its routed edges")]
    RoutingCapacity { level: usize, cluster: usize },
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// `max(⌈27β/φ⌉, 3)`.
pub fn min_delta(phi: f64, beta: f64) -> u64 {
    ((27.0 * beta / phi - 1e-9).ceil() as u64).max(3)
}

/// Cut-ratio bound from tracked constants. On one level a set loses at most
/// `1/α₀` going from `G` to `H` and `10(L+1)·9/φ` going back, and the levels
/// compose multiplicatively.
pub fn gamma_bound(depth: usize, alpha0: f64, phi: f64) -> f64 {
    let per_level = (1.0 / alpha0).max(90.0 * (depth + 1) as f64 / phi);
    per_level.powi(depth.max(1) as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossyParams {
    pub sequence: SequenceParams,
    /// Certify every cluster expander (exactly when small, spectrally above).
    pub certify_clusters: bool,
    /// Enumerate all cuts for `γ` up to this many vertices; above it only
    /// singletons and pullbacks are probed.
    pub gamma_exact_limit: usize,
}

impl Default for LossyParams {
    fn default() -> Self {
        LossyParams { sequence: SequenceParams::default(), certify_clusters: true, gamma_exact_limit: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSandwich {
    pub level: usize,
    /// Allowed upper factor `10(L−i)` (at least 1 on the top level).
    pub factor: f64,
    /// `min_v W·deg_H(v)/deg_G(v)` and `max_v` of the same, over vertices of
    /// positive degree.
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossySparsifier {
    /// `H⁰`, loops kept; edge weights are multiplicities.
    pub h: WeightedMultigraph,
    /// `Hⁱ` for every level, `H⁰` first.
    pub levels: Vec<WeightedMultigraph>,
    /// `W = λ̃/Δ`.
    pub lambda_tilde: Weight,
    pub delta: u64,
    pub depth: usize,
    /// Largest observed `max(W|∂_H S|/w(∂_G S), w(∂_G S)/(W|∂_H S|))`.
    pub gamma_measured: f64,
    /// All cuts enumerated, rather than singletons and pullbacks only.
    pub gamma_exhaustive: bool,
    /// Smallest certified conductance over the cluster expanders, if certified.
    pub alpha0: Option<f64>,
    pub alpha0_method: Option<CertMethod>,
    pub sandwich: Vec<LevelSandwich>,
    /// `deg_{Gⁱ}(v) ≤ W·deg_{Hⁱⱼ}(v) ≤ 9·deg_{Gⁱ}(v)` for every cluster expander.
    pub cluster_sandwich_holds: bool,
}

impl LossySparsifier {
    pub fn weight(&self) -> f64 {
        self.lambda_tilde as f64 / self.delta as f64
    }

    /// `W·|∂_H S|` for a side mask.
    pub fn scaled_cut(&self, mask: &[bool]) -> f64 {
        cut_weight_mask(&self.h, mask) as f64 * self.weight()
    }
}

/// `Hⁱ₀`: one edge per unit of every non-loop edge of `h_next`, with endpoints
/// chosen inside the two clusters. Vertex `v` of cluster `j` takes at most
/// `⌈deg_{H^{i+1}}(u_j)·w(E_{Gⁱ}(v, Uⁱ∖Uⁱⱼ))/deg_{G^{i+1}}(u_j)⌉` edges, filled
/// greedily by descending boundary weight.
pub fn route_boundary_edges(
    seq: &ExpanderSequence,
    level: usize,
    h_next: &WeightedMultigraph,
) -> Result<WeightedMultigraph, LossyError> {
    let lvl = &seq.levels[level];
    let g = &lvl.graph;
    let g_next = &seq.levels[level + 1].graph;
    let n = g.vertex_count();
    let cluster_of = &lvl.contraction_map;
    let mut boundary = vec![0 as Weight; n];
    for e in g.edges() {
        if cluster_of[e.u] != cluster_of[e.v] {
            boundary[e.u] += e.w;
            boundary[e.v] += e.w;
        }
    }
    // Per cluster: (vertex, remaining capacity) in fill order.
    let mut slots: Vec<Vec<(VertexId, u64)>> = Vec::with_capacity(lvl.clusters.len());
    for (j, cluster) in lvl.clusters.iter().enumerate() {
        let dh = h_next.degree(j) as u128;
        let dg = g_next.degree(j) as u128;
        let mut vs: Vec<(VertexId, u64)> = cluster
            .iter()
            .filter(|&&v| boundary[v] > 0)
            .map(|&v| (v, if dg == 0 { 0 } else { (dh * boundary[v] as u128).div_ceil(dg) as u64 }))
            .collect();
        vs.sort_by(|a, b| boundary[b.0].cmp(&boundary[a.0]).then(a.0.cmp(&b.0)));
        slots.push(vs);
    }
    let mut cursor = vec![0usize; slots.len()];
    let mut take = |j: usize, want: u64| -> Result<Vec<(VertexId, u64)>, LossyError> {
        let mut out = Vec::new();
        let mut left = want;
        while left > 0 {
            let c = cursor[j];
            let slot = slots[j].get_mut(c).ok_or(LossyError::RoutingCapacity { level, cluster: j })?;
            let k = slot.1.min(left);
            if k > 0 {
                out.push((slot.0, k));
                slot.1 -= k;
                left -= k;
            }
            if slot.1 == 0 {
                cursor[j] += 1;
            }
        }
        Ok(out)
    };
    let mut counts: std::collections::BTreeMap<(VertexId, VertexId), Weight> = std::collections::BTreeMap::new();
    for e in h_next.edges() {
        let xs = take(e.u, e.w)?;
        let ys = take(e.v, e.w)?;
        // Pair the two unit lists in order.
        let (mut i, mut j) = (0usize, 0usize);
        let (mut xr, mut yr) = (xs[0].1, ys[0].1);
        loop {
            let k = xr.min(yr);
            let (a, b) = (xs[i].0, ys[j].0);
            *counts.entry((a.min(b), a.max(b))).or_insert(0) += k;
            xr -= k;
            yr -= k;
            if xr == 0 {
                i += 1;
                if i == xs.len() {
                    break;
                }
                xr = xs[i].1;
            }
            if yr == 0 {
                j += 1;
                yr = ys[j].1;
            }
        }
    }
    let mut b = GraphBuilder::new(n);
    for ((u, v), c) in counts {
        b.add_edge(u, v, c)?;
    }
    Ok(b.build()?)
}

fn union(a: &WeightedMultigraph, b: &WeightedMultigraph) -> Result<WeightedMultigraph, GraphError> {
    let mut out = GraphBuilder::new(a.vertex_count());
    for g in [a, b] {
        for (v, &l) in g.self_loops().iter().enumerate() {
            if l > 0 {
                out.add_self_loop(v, l)?;
            }
        }
        for e in g.edges() {
            out.add_edge(e.u, e.v, e.w)?;
        }
    }
    out.build()
}

pub fn build_lossy(
    g: &WeightedMultigraph,
    lambda_tilde: Weight,
    delta: u64,
    params: &LossyParams,
) -> Result<LossySparsifier, LossyError> {
    let seq = build_sequence(g, &params.sequence)?;
    build_lossy_on(g, &seq, lambda_tilde, delta, params)
}

/// As `build_lossy`, reusing a sequence already built for `g`.
pub fn build_lossy_on(
    g: &WeightedMultigraph,
    seq: &ExpanderSequence,
    lambda_tilde: Weight,
    delta: u64,
    params: &LossyParams,
) -> Result<LossySparsifier, LossyError> {
    if lambda_tilde == 0 {
        return Err(LossyError::ZeroLambda);
    }
    let required = min_delta(seq.params.phi, seq.params.beta);
    if delta < required {
        return Err(LossyError::DeltaTooSmall { delta, required });
    }
    let top = seq.depth();
    let mut levels: Vec<WeightedMultigraph> = vec![GraphBuilder::new(seq.levels[top].graph.vertex_count()).build()?];
    let mut alpha: Option<f64> = None;
    let mut method: Option<CertMethod> = None;
    let mut cluster_ok = true;
    let lt = lambda_tilde as u128;
    let dl = delta as u128;
    for i in (0..top).rev() {
        let lvl = &seq.levels[i];
        let gi = &lvl.graph;
        let h0 = route_boundary_edges(seq, i, levels.last().unwrap())?;
        let mut b = GraphBuilder::new(gi.vertex_count());
        for cluster in &lvl.clusters {
            // |U_v| = max(1, ⌊deg·Δ/λ̃⌋).
            let sizes: Vec<u64> =
                cluster.iter().map(|&v| ((gi.degree(v) as u128 * dl / lt) as u64).max(1)).collect();
            let hj = contracted_expander(&sizes);
            for (local, &v) in cluster.iter().enumerate() {
                let dg = gi.degree(v) as u128 * dl;
                let dh = hj.degree(local) as u128 * lt;
                cluster_ok &= dg <= dh && dh <= 9 * dg;
            }
            if params.certify_clusters && cluster.len() > 1 {
                let (a, m) = certify(&hj);
                if alpha.map_or(true, |x| a < x) {
                    alpha = Some(a);
                    method = Some(m);
                }
            }
            for (local, &l) in hj.self_loops().iter().enumerate() {
                if l > 0 {
                    b.add_self_loop(cluster[local], l)?;
                }
            }
            for e in hj.edges() {
                b.add_edge(cluster[e.u], cluster[e.v], e.w)?;
            }
        }
        let hi = union(&h0, &b.build()?)?;
        levels.push(hi);
    }
    levels.reverse();
    let sandwich = (0..=top)
        .map(|i| {
            let gi = &seq.levels[i].graph;
            let hi = &levels[i];
            let factor = (10 * (top - i)).max(1) as f64;
            let mut min_ratio = f64::INFINITY;
            let mut max_ratio: f64 = 0.0;
            let mut holds = true;
            for v in 0..gi.vertex_count() {
                let dg = gi.degree(v) as u128 * dl;
                let dh = hi.degree(v) as u128 * lt;
                holds &= dg <= dh && dh <= (10 * (top - i).max(1)) as u128 * dg;
                if dg > 0 {
                    let r = dh as f64 / dg as f64;
                    min_ratio = min_ratio.min(r);
                    max_ratio = max_ratio.max(r);
                }
            }
            LevelSandwich { level: i, factor, min_ratio, max_ratio, holds }
        })
        .collect();
    let h = levels[0].clone();
    let mut out = LossySparsifier {
        h,
        levels,
        lambda_tilde,
        delta,
        depth: top,
        gamma_measured: 1.0,
        gamma_exhaustive: false,
        alpha0: alpha,
        alpha0_method: method,
        sandwich,
        cluster_sandwich_holds: cluster_ok,
    };
    measure_gamma(g, seq, &mut out, params.gamma_exact_limit)?;
    Ok(out)
}

fn ratio(gcut: Weight, hcut: Weight, lt: u128, delta: u128) -> f64 {
    // W·h / g with W = λ̃/Δ.
    let num = hcut as u128 * lt;
    let den = gcut as u128 * delta;
    if num == 0 || den == 0 {
        return f64::INFINITY;
    }
    let r = num as f64 / den as f64;
    r.max(1.0 / r)
}

fn measure_gamma(
    g: &WeightedMultigraph,
    seq: &ExpanderSequence,
    out: &mut LossySparsifier,
    exact_limit: usize,
) -> Result<(), LossyError> {
    let n = g.vertex_count();
    let lt = out.lambda_tilde as u128;
    let dl = out.delta as u128;
    let mut gamma: f64 = 1.0;
    if n < 2 {
        out.gamma_measured = 1.0;
        out.gamma_exhaustive = true;
        return Ok(());
    }
    if n <= exact_limit {
        let h = &out.h;
        for_each_cut(g, |mask, cut, _| {
            gamma = gamma.max(ratio(cut, cut_weight_mask(h, mask), lt, dl));
        })?;
        out.gamma_exhaustive = true;
    } else {
        for v in 0..n {
            gamma = gamma.max(ratio(g.boundary_degree(v), out.h.boundary_degree(v), lt, dl));
        }
        let mut probe = |mask: &[bool]| {
            let gc = cut_weight_mask(g, mask);
            let hc = cut_weight_mask(&out.h, mask);
            gamma = gamma.max(ratio(gc, hc, lt, dl));
        };
        for i in 1..seq.depth() {
            for members in seq.pullbacks(i) {
                if members.len() < n {
                    let m: Vec<bool> = (0..n).map(|x| members.binary_search(&x).is_ok()).collect();
                    probe(&m);
                }
            }
        }
    }
    out.gamma_measured = gamma;
    Ok(())
}
