use serde::{Deserialize, Serialize};

use crate::{EdgeId, GraphBuilder, GraphError, VertexId, Weight, WeightedMultigraph};

/// A vertex subset together with its boundary weight.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    /// Sorted, duplicate-free.
    pub side: Vec<VertexId>,
    pub weight: Weight,
}

impl Cut {
    pub fn new(g: &WeightedMultigraph, side: &[VertexId]) -> Result<Cut, GraphError> {
        let mut side = side.to_vec();
        side.sort_unstable();
        side.dedup();
        let weight = cut_weight(g, &side)?;
        Ok(Cut { side, weight })
    }

    pub fn from_mask(g: &WeightedMultigraph, mask: &[bool]) -> Result<Cut, GraphError> {
        let side: Vec<VertexId> = (0..mask.len()).filter(|&v| mask[v]).collect();
        Cut::new(g, &side)
    }

    pub fn complement(&self, g: &WeightedMultigraph) -> Cut {
        let mut inside = vec![false; g.vertex_count()];
        for &v in &self.side {
            inside[v] = true;
        }
        let side = (0..g.vertex_count()).filter(|&v| !inside[v]).collect();
        Cut { side, weight: self.weight }
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &v in &self.side {
            m[v] = true;
        }
        m
    }

    /// The side containing vertex 0, so equal cuts compare equal.
    pub fn normalized(&self, g: &WeightedMultigraph) -> Cut {
        if self.side.first() == Some(&0) {
            self.clone()
        } else {
            self.complement(g)
        }
    }
}

fn proper_mask(g: &WeightedMultigraph, s: &[VertexId]) -> Result<Vec<bool>, GraphError> {
    let m = g.mask(s)?;
    let k = m.iter().filter(|&&b| b).count();
    if k == 0 || k == g.vertex_count() {
        return Err(GraphError::InvalidCut);
    }
    Ok(m)
}

/// `w(∂S)`. Self-loops never cross a cut.
pub fn cut_weight(g: &WeightedMultigraph, s: &[VertexId]) -> Result<Weight, GraphError> {
    let m = proper_mask(g, s)?;
    Ok(cut_weight_mask(g, &m))
}

/// Boundary weight of the `true` side of a mask; no properness check.
pub fn cut_weight_mask(g: &WeightedMultigraph, mask: &[bool]) -> Weight {
    g.edges().iter().filter(|e| mask[e.u] != mask[e.v]).map(|e| e.w).sum()
}

/// Ids of the edges crossing the mask.
pub fn cut_edges_mask(g: &WeightedMultigraph, mask: &[bool]) -> Vec<EdgeId> {
    g.edges().iter().filter(|e| mask[e.u] != mask[e.v]).map(|e| e.id).collect()
}

/// `xᵀ L y` summed edge by edge.
pub fn laplacian_quadratic(g: &WeightedMultigraph, x: &[i64], y: &[i64]) -> Result<i128, GraphError> {
    let n = g.vertex_count();
    for len in [x.len(), y.len()] {
        if len != n {
            return Err(GraphError::DimensionMismatch { expected: n, got: len });
        }
    }
    let mut acc: i128 = 0;
    for e in g.edges() {
        let dx = (x[e.u] - x[e.v]) as i128;
        let dy = (y[e.u] - y[e.v]) as i128;
        acc += e.w as i128 * dx * dy;
    }
    Ok(acc)
}

/// Result of contracting a partition.
#[derive(Clone, Debug)]
pub struct Contraction {
    pub graph: WeightedMultigraph,
    /// Original vertex to cluster index.
    pub vertex_map: Vec<VertexId>,
    /// Ids of inter-cluster edges, ascending. Every other edge disappears.
    pub surviving: Vec<EdgeId>,
}

/// Contract each part to one vertex (part `i` becomes vertex `i`). Intra-part
/// edges and self-loops are dropped; the rest keep id and weight.
pub fn contract_partition(g: &WeightedMultigraph, partition: &[Vec<VertexId>]) -> Result<Contraction, GraphError> {
    let n = g.vertex_count();
    let mut map = vec![usize::MAX; n];
    for (i, part) in partition.iter().enumerate() {
        if part.is_empty() {
            return Err(GraphError::NotAPartition(format!("part {i} is empty")));
        }
        for &v in part {
            if v >= n {
                return Err(GraphError::VertexOutOfRange { vertex: v, n });
            }
            if map[v] != usize::MAX {
                return Err(GraphError::NotAPartition(format!("vertex {v} appears twice")));
            }
            map[v] = i;
        }
    }
    if let Some(v) = map.iter().position(|&c| c == usize::MAX) {
        return Err(GraphError::NotAPartition(format!("vertex {v} is uncovered")));
    }
    contract_map(g, &map, partition.len())
}

/// Same as [`contract_partition`] with the partition given as a vertex map.
pub fn contract_map(g: &WeightedMultigraph, map: &[VertexId], parts: usize) -> Result<Contraction, GraphError> {
    if map.len() != g.vertex_count() {
        return Err(GraphError::DimensionMismatch { expected: g.vertex_count(), got: map.len() });
    }
    let mut b = GraphBuilder::new(parts);
    let mut surviving = Vec::new();
    for e in g.edges() {
        let (a, c) = (map[e.u], map[e.v]);
        if a >= parts || c >= parts {
            return Err(GraphError::NotAPartition(format!("cluster index out of range at edge {}", e.id)));
        }
        if a != c {
            b.add_edge_with_id(e.id, a, c, e.w)?;
            surviving.push(e.id);
        }
    }
    Ok(Contraction { graph: b.build()?, vertex_map: map.to_vec(), surviving })
}

/// Replace every edge by `⌈w/cap⌉` parallel pieces of near-equal weight.
/// Pieces get fresh dense ids; the second vector maps piece id to source id.
pub fn split_heavy_edges(g: &WeightedMultigraph, cap: Weight) -> Result<(WeightedMultigraph, Vec<EdgeId>), GraphError> {
    if cap == 0 {
        return Err(GraphError::InvalidCap);
    }
    let mut b = GraphBuilder::new(g.vertex_count());
    let mut origin = Vec::new();
    for (v, &l) in g.self_loops().iter().enumerate() {
        b.add_self_loop(v, l)?;
    }
    for e in g.edges() {
        let q = e.w.div_ceil(cap);
        let base = e.w / q;
        let extra = e.w % q;
        for k in 0..q {
            let w = base + u64::from(k < extra);
            b.add_edge(e.u, e.v, w)?;
            origin.push(e.id);
        }
    }
    Ok((b.build()?, origin))
}

/// Every weight becomes `min(w, cap)`; ids unchanged.
pub fn clamp_weights_to(g: &WeightedMultigraph, cap: Weight) -> Result<WeightedMultigraph, GraphError> {
    if cap == 0 {
        return Err(GraphError::InvalidCap);
    }
    let mut b = GraphBuilder::new(g.vertex_count());
    for (v, &l) in g.self_loops().iter().enumerate() {
        b.add_self_loop(v, l)?;
    }
    for e in g.edges() {
        b.add_edge_with_id(e.id, e.u, e.v, e.w.min(cap))?;
    }
    b.build()
}
