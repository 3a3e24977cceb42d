//! Deterministic global minimum cut: a skeleton graph from the unbalanced and
//! lossy sparsifiers, a greedy tree packing of the skeleton, and an exact
//! 2-respecting-cut search on every tree.

mod packing;
mod respect;
mod skeleton;

pub use packing::{pack_trees, pack_trees_with, tree_crossings, PackingParams, TreePack};
pub use respect::{brute_force_two_respecting, min_two_respecting_cut, TwoRespectAnswer};
pub use skeleton::{
    build_skeleton, build_skeleton_on, check_skeleton_properties, verify_skeleton_conditions, EstimatorSummary,
    ParameterLedger, PropertyReport, SkeletonCheck, SkeletonResult, DEFAULT_D_HAT_CAP,
};

use std::time::Instant;

use dmc_graph::{clamp_weights_to, GraphError, WeightedMultigraph};
use dmc_lossy::LossyError;
use dmc_oracle::{approx_mincut, stoer_wagner, MincutResult, OracleError};
use dmc_sequence::{build_sequence, SequenceError, SequenceParams};
use dmc_unbalanced::{precision_from_env, UnbalancedError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("graph needs at least 2 vertices, has {0}")]
    TooSmall(usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("not a spanning tree: {0}")]
    NotSpanningTree(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Lossy(#[from] LossyError),
    #[error(transparent)]
    Unbalanced(#[from] UnbalancedError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub eps: f64,
    pub sequence: SequenceParams,
    /// `c` in `τ = β^{−cL}γ²/ε`.
    pub tau_c: f64,
    /// `Δ`; `max(⌈27β/φ⌉, 3)` when unset.
    pub delta: Option<u64>,
    /// Reported stand-in for `f(n)`.
    pub f_config: f64,
    pub precision_bits: u32,
    pub d_hat_cap: u64,
    pub certify_clusters: bool,
    pub gamma_exact_limit: usize,
    pub packing: PackingParams,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            eps: 0.01,
            sequence: SequenceParams::default(),
            tau_c: 1.0,
            delta: None,
            f_config: 64.0,
            precision_bits: precision_from_env(),
            d_hat_cap: DEFAULT_D_HAT_CAP,
            certify_clusters: true,
            gamma_exact_limit: 16,
            packing: PackingParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub millis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonStats {
    pub m_prime: u128,
    pub distinct_edges: usize,
    pub weight: f64,
    pub lambda_over_w: f64,
    pub params: ParameterLedger,
    pub estimator: EstimatorSummary,
    pub rounding_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MincutRun {
    pub result: MincutResult,
    /// `None` for inputs answered without a skeleton (disconnected graphs).
    pub skeleton: Option<SkeletonStats>,
    pub tree_count: usize,
    pub packing_iterations: usize,
    /// Tree whose 2-respecting search produced the answer.
    pub best_tree: Option<usize>,
    /// Wall-clock per stage; the only non-reproducible field.
    pub timings: Vec<StageTiming>,
}

impl MincutRun {
    /// The run with timings cleared, for byte comparisons.
    pub fn without_timings(&self) -> MincutRun {
        MincutRun { timings: Vec::new(), ..self.clone() }
    }
}

fn timed<T>(timings: &mut Vec<StageTiming>, stage: &str, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    timings.push(StageTiming { stage: stage.to_string(), millis: t.elapsed().as_secs_f64() * 1e3 });
    out
}

/// Every stage end to end: skeleton, packing, and the minimum over all trees
/// of the exact 2-respecting cut in `g`.
pub fn deterministic_mincut(g: &WeightedMultigraph, params: &PipelineParams) -> Result<MincutRun, PipelineError> {
    let n = g.vertex_count();
    if n < 2 {
        return Err(PipelineError::TooSmall(n));
    }
    let mut timings = Vec::new();
    if !g.is_connected() {
        let result = stoer_wagner(g)?;
        return Ok(MincutRun { result, skeleton: None, tree_count: 0, packing_iterations: 0, best_tree: None, timings });
    }
    let lambda_tilde = timed(&mut timings, "approx_mincut", || approx_mincut(g))?.value;
    let g1 = clamp_weights_to(g, lambda_tilde)?;
    let seq = timed(&mut timings, "sequence", || build_sequence(&g1, &params.sequence))?;
    let sk = timed(&mut timings, "skeleton", || build_skeleton_on(&g1, &seq, lambda_tilde, params))?;
    // c′ enters only the iteration count; the skeleton's minimum degree bounds
    // it from above and is cheap.
    let c_prime = sk.h.degrees().into_iter().min().unwrap_or(1).max(1);
    let pack = timed(&mut timings, "pack", || pack_trees_with(&sk.h, c_prime, &params.packing, Some(g)))?;
    let answers = timed(&mut timings, "two_respect", || {
        pack.trees.par_iter().map(|t| min_two_respecting_cut(g, t)).collect::<Result<Vec<_>, _>>()
    })?;
    let (best_tree, best) = answers
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.value.cmp(&b.1.value).then(a.0.cmp(&b.0)))
        .expect("at least one tree");
    let result = MincutResult { value: best.value, witness: best.witness.clone() };
    let skeleton = SkeletonStats {
        m_prime: sk.h.edges().iter().map(|e| e.w as u128).sum(),
        distinct_edges: sk.h.edge_count(),
        weight: sk.weight(),
        lambda_over_w: sk.lambda_over_w(),
        params: sk.params.clone(),
        estimator: sk.estimator.clone(),
        rounding_slack: sk.rounding_slack,
    };
    Ok(MincutRun {
        result,
        skeleton: Some(skeleton),
        tree_count: pack.trees.len(),
        packing_iterations: pack.iterations,
        best_tree: Some(best_tree),
        timings,
    })
}

/// `true` when some tree crosses the cut `side` at most twice.
pub fn some_tree_two_respects(pack: &TreePack, side: &[bool]) -> bool {
    pack.trees.iter().any(|t| tree_crossings(t, side) <= 2)
}
