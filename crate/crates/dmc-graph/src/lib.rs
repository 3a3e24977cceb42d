//! Weighted undirected multigraphs shared by every stage of the mincut
//! pipeline: stable edge ids, per-vertex self-loop weight, contraction, and
//! exact cut evaluation.

mod dimacs;
mod graph;
mod ops;

pub use dimacs::{parse_dimacs, write_dimacs};
pub use graph::{Edge, GraphBuilder, WeightedMultigraph};
pub use ops::{
    clamp_weights_to, contract_map, contract_partition, cut_edges_mask, cut_weight, cut_weight_mask,
    laplacian_quadratic, split_heavy_edges, Contraction, Cut,
};

/// Fixed-point weight in integer units. Inputs with fractional weights are
/// scaled at load time.
pub type Weight = u64;
pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("a cut side must be a nonempty proper subset")]
    InvalidCut,
    #[error("expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("not a partition: {0}")]
    NotAPartition(String),
    #[error("cap must be positive")]
    InvalidCap,
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: VertexId, n: usize },
    #[error("vertex {0} listed twice")]
    DuplicateVertex(VertexId),
    #[error("edge id {0} used twice")]
    DuplicateEdgeId(EdgeId),
    #[error("edge {0} is a loop; loops are stored per vertex")]
    LoopEdge(EdgeId),
    #[error("edge weights must be positive")]
    ZeroWeight,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
