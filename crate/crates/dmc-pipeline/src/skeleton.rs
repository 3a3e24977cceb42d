use dmc_graph::{clamp_weights_to, cut_weight_mask, GraphBuilder, Weight, WeightedMultigraph};
use dmc_lossy::{build_lossy_on, min_delta, LossyParams};
use dmc_oracle::{approx_mincut, for_each_cut, stoer_wagner, BRUTE_FORCE_LIMIT};
use dmc_sequence::{build_sequence, ExpanderSequence};
use dmc_unbalanced::{
    build_edge_classes, derandomized_sample, max_skeleton_weight_squared, min_d_hat, SampleParams, SkeletonWeight,
};
use serde::{Deserialize, Serialize};

use crate::{PipelineError, PipelineParams};

/// Every parameter of the construction as it was actually used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterLedger {
    pub eps: f64,
    /// Error handed to the unbalanced sparsifier,
    /// `ε′ = ½(φ/((L+1)τ))²ε`.
    pub eps_prime: f64,
    pub phi: f64,
    pub beta: f64,
    pub tau_c: f64,
    /// `τ = β^{−cL}γ²/ε`.
    pub tau: f64,
    pub gamma: f64,
    pub gamma_exhaustive: bool,
    pub depth: usize,
    pub delta: u64,
    pub lambda_tilde: Weight,
    /// `D̃ = Δ·⌈2γ/ε⌉`, so `W̃ = λ̃/D̃ ≤ (ε/2γ)·(λ̃/Δ)`.
    pub d_tilde: u64,
    /// `D̂ = λ̃/Ŵ`, a multiple of `D̃`.
    pub d_hat: u64,
    /// Smallest `D̂` the tail bounds ask for before rounding and capping.
    pub d_hat_required: f64,
    /// `D̂` was capped below `d_hat_required`.
    pub d_hat_clamped: bool,
    pub f_config: f64,
}

impl ParameterLedger {
    pub fn w_hat(&self) -> f64 {
        self.lambda_tilde as f64 / self.d_hat as f64
    }

    pub fn w_tilde(&self) -> f64 {
        self.lambda_tilde as f64 / self.d_tilde as f64
    }

    /// `W̃/Ŵ = D̂/D̃`.
    pub fn multiplier(&self) -> u64 {
        self.d_hat / self.d_tilde
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub initial_phi: f64,
    pub final_phi: f64,
    pub monotone: bool,
    pub max_increase: f64,
    pub error_budget: f64,
    pub in_scope_classes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonResult {
    /// Unweighted multigraph stored as multiplicities: `Ĥ + (D̂/D̃)·H̃`.
    pub h: WeightedMultigraph,
    pub h_hat: WeightedMultigraph,
    pub h_tilde: WeightedMultigraph,
    pub params: ParameterLedger,
    pub estimator: EstimatorSummary,
    /// `Ŵ` times the number of edges with a fractional remainder: no
    /// rounding outcome moves any cut of `Ĥ` further than this from `G`.
    pub rounding_slack: f64,
}

impl SkeletonResult {
    /// `W = Ŵ = λ̃/D̂`.
    pub fn weight(&self) -> f64 {
        self.params.w_hat()
    }

    pub fn scaled_cut(&self, mask: &[bool]) -> f64 {
        cut_weight_mask(&self.h, mask) as f64 * self.weight()
    }

    /// `λ̃/W = D̂`, the desk-scale stand-in for `f(n)`.
    pub fn lambda_over_w(&self) -> f64 {
        self.params.d_hat as f64
    }
}

/// Largest `D̂` the pipeline will use; larger values are clamped.
pub const DEFAULT_D_HAT_CAP: u64 = 1 << 40;

/// Clamp weights to `λ̃`, build the sequence once, then both sparsifiers, and
/// combine them into one multigraph with the single weight `Ŵ`.
pub fn build_skeleton(g: &WeightedMultigraph, params: &PipelineParams) -> Result<SkeletonResult, PipelineError> {
    let eps = params.eps;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(PipelineError::Params(format!("ε = {eps} is outside (0, 1]")));
    }
    let n = g.vertex_count();
    if n < 2 {
        return Err(PipelineError::TooSmall(n));
    }
    if !g.is_connected() {
        return Err(PipelineError::Disconnected);
    }
    let lambda_tilde = approx_mincut(g)?.value;
    let g1 = clamp_weights_to(g, lambda_tilde)?;
    let seq = build_sequence(&g1, &params.sequence)?;
    build_skeleton_on(&g1, &seq, lambda_tilde, params)
}

/// As `build_skeleton` on a graph already clamped to `λ̃`, with its sequence.
pub fn build_skeleton_on(
    g: &WeightedMultigraph,
    seq: &ExpanderSequence,
    lambda_tilde: Weight,
    params: &PipelineParams,
) -> Result<SkeletonResult, PipelineError> {
    let eps = params.eps;
    let phi = seq.params.phi;
    let beta = seq.params.beta;
    let depth = seq.depth();
    let delta = params.delta.unwrap_or_else(|| min_delta(phi, beta));

    let lossy_params = LossyParams {
        sequence: params.sequence,
        certify_clusters: params.certify_clusters,
        gamma_exact_limit: params.gamma_exact_limit,
    };
    let lossy = build_lossy_on(g, seq, lambda_tilde, delta, &lossy_params)?;
    let gamma = lossy.gamma_measured;

    let tau = beta.powf(-params.tau_c * depth as f64) * gamma * gamma / eps;
    let l1 = (depth + 1) as f64;
    let eps_prime = 0.5 * (phi / (l1 * tau)).powi(2) * eps;
    if !(eps_prime > 0.0) {
        return Err(PipelineError::Params(format!("ε′ = ½(φ/((L+1)τ))²ε underflows to {eps_prime}")));
    }

    let index = build_edge_classes(g, seq).with_degree_cap(tau * lambda_tilde as f64 / phi);
    let d_tilde = delta
        .checked_mul((2.0 * gamma / eps).ceil() as u64)
        .ok_or_else(|| PipelineError::Params("D̃ = Δ·⌈2γ/ε⌉ overflows".into()))?;
    let w_formula = max_skeleton_weight_squared(eps_prime, phi, tau, depth, g.edge_count().max(1), lambda_tilde as f64);
    let by_formula = if w_formula > 0.0 { lambda_tilde as f64 / w_formula } else { f64::INFINITY };
    let d_hat_required = by_formula.max(min_d_hat(&index, eps_prime, lambda_tilde)).max(1.0);
    let cap = (params.d_hat_cap / d_tilde).max(1) * d_tilde;
    let (d_hat, clamped) = if d_hat_required >= cap as f64 {
        (cap, true)
    } else {
        let k = (d_hat_required / d_tilde as f64).ceil().max(1.0) as u64;
        (k * d_tilde, false)
    };

    let mut sp = SampleParams::new(eps_prime, SkeletonWeight { lambda_tilde, d_hat });
    sp.precision_bits = params.precision_bits;
    sp.allow_bundles = true;
    sp.require_initial_bound = !clamped;
    let sample = derandomized_sample(g, &index, &sp)?;

    let lt = lambda_tilde as u128;
    let fractional = g.edges().iter().filter(|e| (e.w as u128 * d_hat as u128) % lt != 0).count();
    let rounding_slack = fractional as f64 * lambda_tilde as f64 / d_hat as f64;

    let multiplier = d_hat / d_tilde;
    let h = combine(&sample.h_hat, &lossy.h, multiplier)?;
    let trace = &sample.trace;
    Ok(SkeletonResult {
        h,
        h_hat: sample.h_hat.clone(),
        h_tilde: lossy.h.clone(),
        params: ParameterLedger {
            eps,
            eps_prime,
            phi,
            beta,
            tau_c: params.tau_c,
            tau,
            gamma,
            gamma_exhaustive: lossy.gamma_exhaustive,
            depth,
            delta,
            lambda_tilde,
            d_tilde,
            d_hat,
            d_hat_required,
            d_hat_clamped: clamped,
            f_config: params.f_config,
        },
        estimator: EstimatorSummary {
            initial_phi: trace.initial,
            final_phi: trace.final_phi,
            monotone: trace.is_monotone(),
            max_increase: trace.max_increase,
            error_budget: trace.error_budget,
            in_scope_classes: index.in_scope_count(),
        },
        rounding_slack,
    })
}

fn combine(h_hat: &WeightedMultigraph, h_tilde: &WeightedMultigraph, k: u64) -> Result<WeightedMultigraph, PipelineError> {
    let overflow = || PipelineError::Params("skeleton multiplicity overflows u64".into());
    let mut b = GraphBuilder::new(h_hat.vertex_count());
    for e in h_hat.edges() {
        b.add_edge(e.u, e.v, e.w)?;
    }
    for (v, &l) in h_tilde.self_loops().iter().enumerate() {
        if l > 0 {
            b.add_self_loop(v, l.checked_mul(k).ok_or_else(overflow)?)?;
        }
    }
    for e in h_tilde.edges() {
        b.add_edge(e.u, e.v, e.w.checked_mul(k).ok_or_else(overflow)?)?;
    }
    Ok(b.build()?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonCheck {
    /// `|E(H)|` counted with multiplicity.
    pub m_prime: u128,
    /// Mincut of `H`, by Stoer-Wagner.
    pub c_prime: Weight,
    /// `|∂_H S*|/c′` for the oracle mincut `S*` of `G`.
    pub approx_ratio: f64,
    pub within_seven_sixths: bool,
}

/// The conditions the tree packing relies on: `m′`, `c′` and how close the
/// mincut of `G` is to a mincut of `H`.
pub fn verify_skeleton_conditions(sk: &SkeletonResult, g: &WeightedMultigraph) -> Result<SkeletonCheck, PipelineError> {
    let m_prime: u128 = sk.h.edges().iter().map(|e| e.w as u128).sum();
    let c_prime = stoer_wagner(&sk.h)?.value;
    let star = stoer_wagner(g)?;
    let mask = star.witness.mask(g.vertex_count());
    let hs = cut_weight_mask(&sk.h, &mask);
    let approx_ratio = if c_prime == 0 { f64::INFINITY } else { hs as f64 / c_prime as f64 };
    let within = approx_ratio <= 7.0 / 6.0;
    let check = SkeletonCheck { m_prime, c_prime, approx_ratio, within_seven_sixths: within };
    if !within {
        return Err(PipelineError::Verification(format!("mincut of G is a {approx_ratio}-approximate mincut of H, above 7/6")));
    }
    Ok(check)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub lambda: Weight,
    pub cuts_checked: usize,
    pub mincuts_checked: usize,
    /// Cuts with `W·|∂_H S| < (1−ε)λ`.
    pub lower_violations: usize,
    /// Mincuts with `W·|∂_H S*| > (1+ε)λ`.
    pub upper_violations: usize,
    /// `min_S W·|∂_H S|/λ` and `max_{S*} W·|∂_H S*|/λ`.
    pub min_ratio: f64,
    pub max_mincut_ratio: f64,
}

impl PropertyReport {
    pub fn holds(&self) -> bool {
        self.lower_violations == 0 && self.upper_violations == 0
    }
}

/// Both skeleton properties over every cut of `G`, for graphs small enough
/// to enumerate.
pub fn check_skeleton_properties(sk: &SkeletonResult, g: &WeightedMultigraph) -> Result<PropertyReport, PipelineError> {
    let n = g.vertex_count();
    if n > BRUTE_FORCE_LIMIT {
        return Err(PipelineError::Params(format!("{n} vertices is too many to enumerate")));
    }
    let lambda = stoer_wagner(g)?.value;
    let eps = sk.params.eps;
    let lt = sk.params.lambda_tilde as f64;
    let d_hat = sk.params.d_hat as f64;
    let mut r = PropertyReport {
        lambda,
        cuts_checked: 0,
        mincuts_checked: 0,
        lower_violations: 0,
        upper_violations: 0,
        min_ratio: f64::INFINITY,
        max_mincut_ratio: 0.0,
    };
    let h = &sk.h;
    for_each_cut(g, |mask, w, _| {
        // W·h/λ = λ̃·h/(D̂·λ).
        let hc = cut_weight_mask(h, mask) as f64;
        let ratio = lt * hc / (d_hat * lambda as f64);
        r.cuts_checked += 1;
        r.min_ratio = r.min_ratio.min(ratio);
        if ratio < 1.0 - eps {
            r.lower_violations += 1;
        }
        if w == lambda {
            r.mincuts_checked += 1;
            r.max_mincut_ratio = r.max_mincut_ratio.max(ratio);
            if ratio > 1.0 + eps {
                r.upper_violations += 1;
            }
        }
    })?;
    Ok(r)
}
