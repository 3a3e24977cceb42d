//! Boundary-linked expander decomposition: iterated cut-or-prune with
//! trimming, followed by a certification pass over the final clusters.

mod cut_or_prune;
mod decompose;
mod spectral;
mod trim;

pub use cut_or_prune::{cut_or_prune, cut_or_prune_with_limit, CutOrPruneOutcome, OutcomeKind};
pub use decompose::{certify_cluster, decompose, Branch, Decomposition, IterationRecord, SplitEvent};
pub use spectral::{spectral_sweep, Sweep, SweepCut, POWER_ITERATIONS};
pub use trim::{trim, trim_unchecked, TrimResult};

use dmc_graph::{GraphError, VertexId, Weight, WeightedMultigraph};
use dmc_oracle::{conductance_weighted, OracleError, BRUTE_FORCE_LIMIT};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DecompError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("cluster must be nonempty")]
    EmptyCluster,
    #[error("graph has zero volume")]
    ZeroVolume,
    #[error("neither branch could be certified; best split found has sides of {} and {} vertices", .side_a.len(), .side_b.len())]
    CertificationFailure { side_a: Vec<VertexId>, side_b: Vec<VertexId> },
    #[error("trim precondition does not hold: {0}")]
    TrimPrecondition(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionParams {
    pub phi: f64,
    pub beta: f64,
    pub approx_alpha: f64,
    pub max_iterations: usize,
    /// Clusters up to this size are certified by brute force; larger ones by
    /// the spectral sweep. Capped at the oracle's brute-force limit.
    pub exact_limit: usize,
}

impl Default for DecompositionParams {
    fn default() -> Self {
        DecompositionParams { phi: 0.05, beta: 0.125, approx_alpha: 1.0, max_iterations: 10_000, exact_limit: BRUTE_FORCE_LIMIT }
    }
}

impl DecompositionParams {
    pub fn validate(&self) -> Result<(), DecompError> {
        let bad = |m: &str| Err(DecompError::InvalidParams(m.to_string()));
        if !(self.phi > 0.0 && self.phi <= 1.0) {
            return bad("phi must lie in (0, 1]");
        }
        if !(self.beta >= self.phi) {
            return bad("beta must be at least phi");
        }
        if !(self.approx_alpha >= 1.0) {
            return bad("alpha must be at least 1");
        }
        if self.exact_limit > BRUTE_FORCE_LIMIT {
            return bad("exact_limit exceeds the brute-force limit");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertMethod {
    Exact,
    SpectralSurrogate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterCertificate {
    /// Vacuous certificates (single vertices, edgeless clusters) report 1.
    pub phi_lower_bound: f64,
    pub method: CertMethod,
}

/// `⌈x⌉`, forgiving float noise just above an integer.
pub(crate) fn ceil_weight(x: f64) -> Weight {
    let c = (x - 1e-9 * x.max(1.0)).ceil();
    if c <= 0.0 {
        0
    } else {
        c as Weight
    }
}

/// Per-vertex weight of edges from `v ∈ A` to `V∖A` (zero outside `A`).
pub fn boundary_weights(g: &WeightedMultigraph, in_a: &[bool]) -> Vec<Weight> {
    let mut b = vec![0; g.vertex_count()];
    for e in g.edges() {
        if in_a[e.u] != in_a[e.v] {
            let x = if in_a[e.u] { e.u } else { e.v };
            b[x] += e.w;
        }
    }
    b
}

/// `G{A}^r`: the induced graph `G[A]` plus, for each edge leaving `A` at
/// `v`, a self-loop at `v` of weight `r·w(e)`, rounded up. Local vertex `i`
/// is `cluster[i]`.
pub fn self_loop_augment(g: &WeightedMultigraph, cluster: &[VertexId], r_factor: f64) -> Result<WeightedMultigraph, DecompError> {
    if cluster.is_empty() {
        return Err(DecompError::EmptyCluster);
    }
    if !(r_factor >= 0.0) || !r_factor.is_finite() {
        return Err(DecompError::InvalidParams("r_factor must be a finite nonnegative number".into()));
    }
    let (sub, _) = g.induced(cluster)?;
    let mask = g.mask(cluster)?;
    let bnd = boundary_weights(g, &mask);
    let extra: Vec<Weight> = cluster.iter().map(|&v| ceil_weight(r_factor * bnd[v] as f64)).collect();
    Ok(sub.with_added_self_loops(&extra)?)
}

/// Conductance of `G[A]` with fractional loops `extra` added, plus the
/// lighter side of a minimizing cut (local ids). Brute force up to `limit`
/// vertices, otherwise the spectral sweep value.
pub(crate) fn certify_local(sub: &WeightedMultigraph, extra: &[f64], limit: usize) -> Result<(f64, Vec<VertexId>, CertMethod), DecompError> {
    let n = sub.vertex_count();
    if n <= 1 {
        return Ok((1.0, Vec::new(), CertMethod::Exact));
    }
    if n <= limit {
        let pi: Vec<f64> = (0..n).map(|v| sub.degree(v) as f64 + extra[v]).collect();
        let c = conductance_weighted(sub, &pi)?;
        Ok((c.value.min(1.0), c.witness, CertMethod::Exact))
    } else {
        let sw = spectral_sweep(sub, extra);
        match sw.best {
            Some(b) => Ok((b.ratio.min(1.0), b.side, CertMethod::SpectralSurrogate)),
            None => Ok((1.0, Vec::new(), CertMethod::SpectralSurrogate)),
        }
    }
}

pub(crate) const TOLERANCE: f64 = 1e-9;

pub(crate) fn meets(value: f64, phi: f64) -> bool {
    value >= phi * (1.0 - TOLERANCE)
}
