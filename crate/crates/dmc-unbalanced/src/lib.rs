//! Deterministic skeleton for unbalanced cuts: edges are grouped into the
//! classes `E_{ū,v̄,∘}` of an expander decomposition sequence and sampled with
//! probability `w(e)/W̄` by the method of conditional probabilities, driven by
//! Chernoff-moment pessimistic estimators in exact big-float arithmetic.

mod classes;
mod estimator;
pub mod real;

pub use classes::{build_edge_classes, ClassKey, ClassSign, EdgeClass, EdgeClassIndex};
pub use estimator::{
    derandomized_sample, precision_from_env, EstimatorState, PhiTrace, SampleParams, SkeletonWeight,
    UnbalancedSkeleton, DEFAULT_PRECISION_BITS, PRECISION_ENV,
};

use dmc_graph::{EdgeId, GraphError, Weight};
use real::Arith;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UnbalancedError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("edge {edge} has weight {weight} > W̄ = {w_bar}")]
    HeavyEdge { edge: EdgeId, weight: Weight, w_bar: f64 },
    #[error("initial estimator Φ(∅) = {phi} exceeds 1/2; W̄ is above the admissible bound")]
    InitialBound { phi: f64 },
    #[error("rounding budget {budget} exceeds 1/2 at {bits} bits")]
    PrecisionBudget { budget: f64, bits: u32 },
    #[error("class index covers {indexed} edges, graph has {edges}")]
    IndexMismatch { edges: usize, indexed: usize },
    #[error("edge position {0} already decided")]
    AlreadyDecided(usize),
    #[error("edge position {0} out of range")]
    UnknownEdge(usize),
    #[error("edge position {0} left undecided")]
    Undecided(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// `W ≤ εφλ / (108·τ·ln(16(L+1)²m))` with `λ = λ̃/3`.
pub fn max_skeleton_weight(eps: f64, phi: f64, tau: f64, depth: usize, m: usize, lambda_tilde: f64) -> f64 {
    let l1 = (depth + 1) as f64;
    eps * phi * (lambda_tilde / 3.0) / (108.0 * tau * (16.0 * l1 * l1 * m as f64).ln())
}

/// The same bound with `ε²` in place of `ε`, which is what the Chernoff
/// exponent `δ²μ/3` actually yields.
pub fn max_skeleton_weight_squared(eps: f64, phi: f64, tau: f64, depth: usize, m: usize, lambda_tilde: f64) -> f64 {
    eps * max_skeleton_weight(eps, phi, tau, depth, m, lambda_tilde)
}

/// Smallest `D̂` for which the tail bounds force `Φ(∅) ≤ 1/2` over the in-scope
/// classes of `index`: every class term is at most `2·exp(-δ²μ/(2+δ))` and
/// `δμ = εD̂/6`, so `D̂ ≥ 6(2+δ)·ln(4K)/(δε)` suffices. Valid for any `δ > 0`.
pub fn min_d_hat(index: &EdgeClassIndex, eps: f64, lambda_tilde: Weight) -> f64 {
    let k = index.in_scope_count().max(1) as f64;
    let ln4k = (4.0 * k).ln();
    index
        .classes
        .iter()
        .filter(|c| c.in_scope)
        .map(|c| {
            let delta = eps * lambda_tilde as f64 / (6.0 * c.weight as f64);
            6.0 * (2.0 + delta) * ln4k / (delta * eps)
        })
        .fold(1.0, f64::max)
}

/// `e^{-t(1+δ)μ}·E[e^{tX}]` with `t = ln(1+δ)` for independent Bernoulli
/// variables with the given means.
pub fn chernoff_upper_middle(ps: &[f64], delta: f64, bits: u32) -> f64 {
    let mut a = Arith::new(bits);
    let d = a.from_f64(delta);
    let one = a.one();
    let mut mu = a.zero();
    let mut prod = a.one();
    for &p in ps {
        let pr = a.from_f64(p);
        mu = a.add(&mu, &pr);
        let pd = a.mul(&pr, &d);
        let f = a.add(&one, &pd);
        prod = a.mul(&prod, &f);
    }
    let opd = a.add(&one, &d);
    let t = a.ln(&opd);
    let mean = a.mul(&opd, &mu);
    let arg = a.mul(&t, &mean);
    let e = a.exp(&arg);
    a.div(&prod, &e).to_f64()
}

/// `e^{t(1-δ)μ}·E[e^{-tX}]` with `t = ln(1/(1-δ))`; `None` when `δ ≥ 1`, where
/// the lower tail is empty.
pub fn chernoff_lower_middle(ps: &[f64], delta: f64, bits: u32) -> Option<f64> {
    if delta >= 1.0 {
        return None;
    }
    let mut a = Arith::new(bits);
    let d = a.from_f64(delta);
    let one = a.one();
    let mut mu = a.zero();
    let mut prod = a.one();
    for &p in ps {
        let pr = a.from_f64(p);
        mu = a.add(&mu, &pr);
        let pd = a.mul(&pr, &d);
        let f = a.sub(&one, &pd);
        prod = a.mul(&prod, &f);
    }
    let omd = a.sub(&one, &d);
    let inv = a.div(&one, &omd);
    let t = a.ln(&inv);
    let mean = a.mul(&omd, &mu);
    let arg = a.mul(&t, &mean);
    let e = a.exp(&arg);
    Some(a.mul(&e, &prod).to_f64())
}
