//! Expander decomposition sequences `G⁰, …, G^L` built by repeated
//! decompose-and-contract, pullbacks of contracted vertices, and the canonical
//! difference sets `Dⁱⱼ` of a vertex set.

use std::collections::HashSet;

use dmc_decomp::{decompose, ClusterCertificate, DecompError, DecompositionParams};
use dmc_graph::{contract_partition, EdgeId, GraphError, VertexId, Weight, WeightedMultigraph};
use serde::{Deserialize, Serialize};

pub const DEFAULT_LEVEL_CAP: usize = 32;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SequenceError {
    #[error("level cap {cap} reached with {vertices} vertices left")]
    LevelCap { cap: usize, vertices: usize, partial: Box<ExpanderSequence> },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph has no vertices")]
    Empty,
    #[error("level {level} out of range (depth {depth})")]
    BadLevel { level: usize, depth: usize },
    #[error("vertex {vertex} out of range at level {level}")]
    BadVertex { level: usize, vertex: VertexId },
    #[error("set must be a nonempty proper subset of the vertices")]
    ImproperSet,
    #[error("boundary-linkedness fails at level {level}, cluster {cluster}: inner boundary {inner} < β·{outer}")]
    BoundaryLinkViolated { level: usize, cluster: usize, inner: Weight, outer: Weight },
    #[error(transparent)]
    Decomp(#[from] DecompError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceParams {
    pub decomposition: DecompositionParams,
    pub level_cap: usize,
}

impl Default for SequenceParams {
    fn default() -> Self {
        SequenceParams { decomposition: DecompositionParams::default(), level_cap: DEFAULT_LEVEL_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub graph: WeightedMultigraph,
    pub clusters: Vec<Vec<VertexId>>,
    pub certificates: Vec<ClusterCertificate>,
    /// Vertex of this level to its cluster index, which is its vertex in the
    /// next level.
    pub contraction_map: Vec<usize>,
    pub intercluster_weight: Weight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpanderSequence {
    /// Levels `0..=L`; the last has a single vertex unless built partially.
    pub levels: Vec<Level>,
    pub params: DecompositionParams,
    /// Original vertex to its vertex at each level.
    pub labels: Vec<Vec<VertexId>>,
}

impl ExpanderSequence {
    /// `L`, the index of the top level.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, i: usize) -> &Level {
        &self.levels[i]
    }

    pub fn total_weights(&self) -> Vec<Weight> {
        self.levels.iter().map(|l| l.graph.total_edge_weight()).collect()
    }

    /// Original vertices contracted into `v` at level `i`.
    pub fn pullback(&self, level: usize, vertex: VertexId) -> Result<Vec<VertexId>, SequenceError> {
        let lvl = self.levels.get(level).ok_or(SequenceError::BadLevel { level, depth: self.depth() })?;
        if vertex >= lvl.graph.vertex_count() {
            return Err(SequenceError::BadVertex { level, vertex });
        }
        Ok((0..self.labels[level].len()).filter(|&x| self.labels[level][x] == vertex).collect())
    }

    /// All pullbacks of level `i`, indexed by level-`i` vertex.
    pub fn pullbacks(&self, level: usize) -> Vec<Vec<VertexId>> {
        let mut out = vec![Vec::new(); self.levels[level].graph.vertex_count()];
        for (x, &v) in self.labels[level].iter().enumerate() {
            out[v].push(x);
        }
        out
    }

    /// `c_D = Σ_{i=0}^{L} (1+1/β)^{i+1}`: at level `i`,
    /// `Σⱼ w(∂_{Gⁱ}Dⁱⱼ) ≤ (1+1/β)·w(∂_{Gⁱ}Sⁱ) ≤ (1+1/β)^{i+1}·w(∂_G S)`, so the
    /// difference sets of any level, and all levels together, weigh at most
    /// `c_D · w(∂_G S)`.
    pub fn d_constant(&self) -> f64 {
        let g = 1.0 + 1.0 / self.params.beta;
        (1..=self.levels.len() as i32).map(|k| g.powi(k)).sum()
    }
}

/// Decompose, contract, repeat until one vertex remains.
pub fn build_sequence(g: &WeightedMultigraph, params: &SequenceParams) -> Result<ExpanderSequence, SequenceError> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(SequenceError::Empty);
    }
    if !g.is_connected() {
        return Err(SequenceError::Disconnected);
    }
    params.decomposition.validate()?;
    let mut levels = Vec::new();
    let mut labels = vec![(0..n).collect::<Vec<_>>()];
    let mut current = g.clone();
    while current.vertex_count() > 1 {
        if levels.len() == params.level_cap {
            let vertices = current.vertex_count();
            let top = Level {
                contraction_map: (0..vertices).collect(),
                clusters: (0..vertices).map(|v| vec![v]).collect(),
                certificates: Vec::new(),
                intercluster_weight: current.total_edge_weight(),
                graph: current,
            };
            levels.push(top);
            let partial = ExpanderSequence { levels, params: params.decomposition, labels };
            return Err(SequenceError::LevelCap { cap: params.level_cap, vertices, partial: Box::new(partial) });
        }
        let d = decompose(&current, &params.decomposition)?;
        let c = contract_partition(&current, &d.clusters)?;
        let next_labels = labels.last().unwrap().iter().map(|&v| c.vertex_map[v]).collect();
        labels.push(next_labels);
        let next = c.graph.clone();
        levels.push(Level {
            graph: current,
            clusters: d.clusters,
            certificates: d.certificates,
            contraction_map: c.vertex_map,
            intercluster_weight: d.intercluster_weight,
        });
        current = next;
    }
    levels.push(Level {
        graph: current,
        clusters: vec![vec![0]],
        certificates: Vec::new(),
        contraction_map: vec![0],
        intercluster_weight: 0,
    });
    Ok(ExpanderSequence { levels, params: params.decomposition, labels })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTrace {
    /// Whether `uⱼ` joined `S^{i+1}`.
    pub included: bool,
    /// `vol_{Gⁱ[Uⱼ]}(Sⁱ∩Uⱼ) + (β/φ)·w(E(Sⁱ∩Uⱼ, Uⁱ∖Uⱼ))`.
    pub inside_weight: f64,
    /// The same quantity for `Uⱼ∖Sⁱ`.
    pub outside_weight: f64,
    /// Level-`i` vertices of `Dⁱⱼ`, ascending.
    pub difference: Vec<VertexId>,
}

impl ClusterTrace {
    /// `+1` when `Dⁱⱼ ⊆ Sⁱ`, `−1` when `Dⁱⱼ = Uⱼ∖Sⁱ`.
    pub fn sign(&self) -> i64 {
        if self.included {
            -1
        } else {
            1
        }
    }

    pub fn is_tie(&self) -> bool {
        self.inside_weight == self.outside_weight
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalSequence {
    /// `Sⁱ` as a mask over level-`i` vertices, for `i = 0..=L`.
    pub sets: Vec<Vec<bool>>,
    /// Per level, per cluster.
    pub traces: Vec<Vec<ClusterTrace>>,
}

impl CanonicalSequence {
    /// All `(level, cluster, vertex, sign)` with the vertex in `Dⁱⱼ`.
    pub fn difference_vertices(&self) -> Vec<(usize, usize, VertexId, i64)> {
        let mut out = Vec::new();
        for (i, level) in self.traces.iter().enumerate() {
            for (j, t) in level.iter().enumerate() {
                for &v in &t.difference {
                    out.push((i, j, v, t.sign()));
                }
            }
        }
        out
    }
}

/// Canonical decomposition sequence of `s`: at each level, `uⱼ` joins
/// `S^{i+1}` when the weighted volume of `Sⁱ∩Uⱼ` is at least that of
/// `Uⱼ∖Sⁱ` (ties included). At the top level `S^{L+1}` is empty, so
/// `D^L = S^L` and `1_S = Σ ±1_{pullback(Dⁱⱼ)}` holds exactly.
pub fn canonical_sequence(seq: &ExpanderSequence, s: &[VertexId]) -> Result<CanonicalSequence, SequenceError> {
    let g0 = &seq.levels[0].graph;
    let n = g0.vertex_count();
    let mask = g0.mask(s)?;
    let count = mask.iter().filter(|&&x| x).count();
    if count == 0 || count == n {
        return Err(SequenceError::ImproperSet);
    }
    let ratio = seq.params.beta / seq.params.phi;
    let top = seq.depth();
    let mut sets = vec![mask];
    let mut traces = Vec::new();
    for i in 0..=top {
        let lvl = &seq.levels[i];
        let g = &lvl.graph;
        let cur = sets[i].clone();
        let mut level_traces = Vec::with_capacity(lvl.clusters.len());
        if i == top {
            for c in &lvl.clusters {
                let d: Vec<VertexId> = c.iter().copied().filter(|&v| cur[v]).collect();
                level_traces.push(ClusterTrace { included: false, inside_weight: 0.0, outside_weight: 0.0, difference: d });
            }
            traces.push(level_traces);
            break;
        }
        let label = &lvl.contraction_map;
        // per vertex: degree inside its cluster and weight leaving it
        let mut inner = vec![0 as Weight; g.vertex_count()];
        let mut outer = vec![0 as Weight; g.vertex_count()];
        for v in 0..g.vertex_count() {
            inner[v] = g.self_loop(v);
        }
        for e in g.edges() {
            if label[e.u] == label[e.v] {
                inner[e.u] += e.w;
                inner[e.v] += e.w;
            } else {
                outer[e.u] += e.w;
                outer[e.v] += e.w;
            }
        }
        let mut next = vec![false; lvl.clusters.len()];
        for (j, c) in lvl.clusters.iter().enumerate() {
            let (mut a_in, mut a_out, mut b_in, mut b_out) = (0u64, 0u64, 0u64, 0u64);
            for &v in c {
                if cur[v] {
                    a_in += inner[v];
                    a_out += outer[v];
                } else {
                    b_in += inner[v];
                    b_out += outer[v];
                }
            }
            let inside_weight = a_in as f64 + ratio * a_out as f64;
            let outside_weight = b_in as f64 + ratio * b_out as f64;
            let included = inside_weight >= outside_weight;
            next[j] = included;
            let difference = c.iter().copied().filter(|&v| cur[v] != included).collect();
            level_traces.push(ClusterTrace { included, inside_weight, outside_weight, difference });
        }
        traces.push(level_traces);
        sets.push(next);
    }
    Ok(CanonicalSequence { sets, traces })
}

fn difference_mask(g: &WeightedMultigraph, d: &[VertexId]) -> Vec<bool> {
    let mut m = vec![false; g.vertex_count()];
    for &v in d {
        m[v] = true;
    }
    m
}

/// Every edge of `∂_G S` lies in some `∂_{Gⁱ} Dⁱⱼ`, compared by edge id.
pub fn check_d_lower_bound(seq: &ExpanderSequence, cs: &CanonicalSequence) -> bool {
    let mut covered: HashSet<EdgeId> = HashSet::new();
    for (i, level) in cs.traces.iter().enumerate() {
        let g = &seq.levels[i].graph;
        for t in level {
            if t.difference.is_empty() {
                continue;
            }
            let m = difference_mask(g, &t.difference);
            for &v in &t.difference {
                for e in g.incident(v) {
                    if !m[e.other(v)] {
                        covered.insert(e.id);
                    }
                }
            }
        }
    }
    let g0 = &seq.levels[0].graph;
    let s = &cs.sets[0];
    g0.edges().iter().filter(|e| s[e.u] != s[e.v]).all(|e| covered.contains(&e.id))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DUpperBound {
    /// `Σᵢ Σⱼ w(∂_{Gⁱ} Dⁱⱼ)`.
    pub lhs: Weight,
    /// `Σᵢ (1/β)(1+1/β)^i · w(∂_G S)`.
    pub rhs: f64,
    /// Same bound with `(1+1/β)` in place of the leading `1/β`, which also
    /// accounts for edges leaving each cluster.
    pub rhs_strict: f64,
    pub cut_weight: Weight,
}

impl DUpperBound {
    pub fn holds(&self) -> bool {
        self.lhs as f64 <= self.rhs * (1.0 + 1e-12)
    }
}

/// Evaluate both sides of the difference-set upper bound after checking
/// `w(∂_{Gⁱ[Uⱼ]} D) ≥ β·w(E(D, Uⁱ∖Uⱼ))` for every nonempty difference set.
pub fn check_d_upper_bound(seq: &ExpanderSequence, cs: &CanonicalSequence, beta: f64) -> Result<DUpperBound, SequenceError> {
    let mut lhs = 0;
    for (i, level) in cs.traces.iter().enumerate() {
        let lvl = &seq.levels[i];
        let g = &lvl.graph;
        for (j, t) in level.iter().enumerate() {
            if t.difference.is_empty() {
                continue;
            }
            let m = difference_mask(g, &t.difference);
            let (mut inner, mut outer) = (0, 0);
            for &v in &t.difference {
                for e in g.incident(v) {
                    let x = e.other(v);
                    if m[x] {
                        continue;
                    }
                    if lvl.contraction_map[x] == j {
                        inner += e.w;
                    } else {
                        outer += e.w;
                    }
                }
            }
            if (inner as f64) < beta * outer as f64 * (1.0 - 1e-12) {
                return Err(SequenceError::BoundaryLinkViolated { level: i, cluster: j, inner, outer });
            }
            lhs += inner + outer;
        }
    }
    let g0 = &seq.levels[0].graph;
    let s = &cs.sets[0];
    let cut: Weight = g0.edges().iter().filter(|e| s[e.u] != s[e.v]).map(|e| e.w).sum();
    let growth = 1.0 + 1.0 / beta;
    let levels = cs.traces.len() as i32;
    let factor: f64 = (0..levels).map(|i| growth.powi(i) / beta).sum();
    let strict: f64 = (0..levels).map(|i| growth.powi(i + 1)).sum();
    Ok(DUpperBound { lhs, rhs: factor * cut as f64, rhs_strict: strict * cut as f64, cut_weight: cut })
}

/// `Σⱼ vol_{Gⁱ}(Dⁱⱼ)` for each level.
pub fn difference_volumes(seq: &ExpanderSequence, cs: &CanonicalSequence) -> Vec<Weight> {
    cs.traces
        .iter()
        .enumerate()
        .map(|(i, level)| {
            let g = &seq.levels[i].graph;
            level.iter().flat_map(|t| t.difference.iter()).map(|&v| g.degree(v)).sum()
        })
        .collect()
}

/// `Σⱼ vol_{Gⁱ}(Dⁱⱼ) ≤ τλ/φ` at every level.
pub fn is_tau_unbalanced(seq: &ExpanderSequence, cs: &CanonicalSequence, tau: f64, phi: f64, lambda: Weight) -> bool {
    let bound = tau * lambda as f64 / phi;
    difference_volumes(seq, cs).iter().all(|&v| v as f64 <= bound * (1.0 + 1e-12))
}

/// Lower bound on `w(∂_G S)` for any set that is not τ-unbalanced, `τλ/c_D`:
/// a level with `Σⱼ vol(Dⁱⱼ) > τλ/φ` has `Σⱼ w(∂Dⁱⱼ) > τλ` since each
/// difference set expands by φ inside its cluster.
pub fn balanced_cut_floor(seq: &ExpanderSequence, tau: f64, lambda: Weight) -> f64 {
    tau * lambda as f64 / seq.d_constant()
}
