use dmc_graph::{VertexId, WeightedMultigraph};
use dmc_oracle::{for_each_cut, BRUTE_FORCE_LIMIT};
use serde::{Deserialize, Serialize};

use crate::{certify_local, meets, spectral_sweep, CertMethod, ClusterCertificate, DecompError};

/// Upper bound on peeling rounds before giving up on the prune branch.
const MAX_PEEL: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeKind {
    Cut,
    Prune,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutOrPruneOutcome {
    pub kind: OutcomeKind,
    pub side_a: Vec<VertexId>,
    pub side_b: Vec<VertexId>,
    /// For `Prune`, the certified lower bound on `Φ(G[A])`.
    pub certificate: Option<ClusterCertificate>,
}

pub fn cut_or_prune(g: &WeightedMultigraph, phi: f64, approx_alpha: f64) -> Result<CutOrPruneOutcome, DecompError> {
    cut_or_prune_with_limit(g, phi, approx_alpha, BRUTE_FORCE_LIMIT)
}

/// Either a balanced cut `(A, B)` with `w(A,B) ≤ αφ·vol(B)`, or a prune
/// `(A, B)` with `vol(A) ≥ vol(V)/2`, `Φ(G[A]) ≥ φ` and `w(A,B) ≤ φ·vol(B)`.
///
/// Balanced cuts are searched for first (exhaustively, or among sweep
/// prefixes). Failing that, sparse sets are peeled off into `B` until the rest
/// certifies as a φ-expander.
pub fn cut_or_prune_with_limit(
    g: &WeightedMultigraph,
    phi: f64,
    approx_alpha: f64,
    exact_limit: usize,
) -> Result<CutOrPruneOutcome, DecompError> {
    if !(phi > 0.0 && phi <= 1.0) || !(approx_alpha >= 1.0) {
        return Err(DecompError::InvalidParams("need 0 < phi ≤ 1 and alpha ≥ 1".into()));
    }
    let n = g.vertex_count();
    if n == 1 {
        return Ok(CutOrPruneOutcome {
            kind: OutcomeKind::Prune,
            side_a: vec![0],
            side_b: Vec::new(),
            certificate: Some(ClusterCertificate { phi_lower_bound: 1.0, method: CertMethod::Exact }),
        });
    }
    let total = g.total_volume();
    if n == 0 || total == 0 {
        return Err(DecompError::ZeroVolume);
    }
    let limit = exact_limit.min(BRUTE_FORCE_LIMIT);
    let zero = vec![0.0; n];

    let (value, _, method) = certify_local(g, &zero, limit)?;
    if meets(value, phi) {
        return Ok(CutOrPruneOutcome {
            kind: OutcomeKind::Prune,
            side_a: (0..n).collect(),
            side_b: Vec::new(),
            certificate: Some(ClusterCertificate { phi_lower_bound: value, method }),
        });
    }

    if let Some((a, b)) = balanced_cut(g, phi * approx_alpha, limit)? {
        return Ok(CutOrPruneOutcome { kind: OutcomeKind::Cut, side_a: a, side_b: b, certificate: None });
    }

    let mut in_a = vec![true; n];
    let mut vol_b = 0u64;
    for _ in 0..MAX_PEEL {
        let a: Vec<VertexId> = (0..n).filter(|&v| in_a[v]).collect();
        let (sub, _) = g.induced(&a)?;
        let (value, witness, method) = certify_local(&sub, &vec![0.0; a.len()], limit)?;
        if meets(value, phi) || witness.is_empty() {
            let b: Vec<VertexId> = (0..n).filter(|&v| !in_a[v]).collect();
            return Ok(CutOrPruneOutcome {
                kind: OutcomeKind::Prune,
                side_a: a,
                side_b: b,
                certificate: Some(ClusterCertificate { phi_lower_bound: value, method }),
            });
        }
        for &l in &witness {
            in_a[a[l]] = false;
            vol_b += g.degree(a[l]);
        }
        if 3 * vol_b >= total {
            let a: Vec<VertexId> = (0..n).filter(|&v| in_a[v]).collect();
            let b: Vec<VertexId> = (0..n).filter(|&v| !in_a[v]).collect();
            if 3 * (total - vol_b) >= total {
                return Ok(CutOrPruneOutcome { kind: OutcomeKind::Cut, side_a: a, side_b: b, certificate: None });
            }
            return Err(DecompError::CertificationFailure { side_a: a, side_b: b });
        }
    }
    let a: Vec<VertexId> = (0..n).filter(|&v| in_a[v]).collect();
    let b: Vec<VertexId> = (0..n).filter(|&v| !in_a[v]).collect();
    Err(DecompError::CertificationFailure { side_a: a, side_b: b })
}

/// A cut with both sides of volume at least `vol(V)/3` and
/// `w(∂S) ≤ bound · min vol`, returned as `(heavier, lighter)`.
fn balanced_cut(g: &WeightedMultigraph, bound: f64, limit: usize) -> Result<Option<(Vec<VertexId>, Vec<VertexId>)>, DecompError> {
    let n = g.vertex_count();
    let total = g.total_volume();
    let best_mask = if n <= limit {
        let mut best: Option<(u64, u64, Vec<bool>)> = None;
        for_each_cut(g, |mask, w, vol| {
            if 3 * vol < total || 3 * (total - vol) < total {
                return;
            }
            let small = vol.min(total - vol);
            let better = best.as_ref().map_or(true, |(bw, bs, _)| (w as u128) * (*bs as u128) < (*bw as u128) * (small as u128));
            if better {
                let light: Vec<bool> = if 2 * vol <= total { mask.to_vec() } else { mask.iter().map(|x| !x).collect() };
                best = Some((w, small, light));
            }
        })?;
        best.filter(|(w, s, _)| *w as f64 <= bound * *s as f64).map(|b| b.2)
    } else {
        let sw = spectral_sweep(g, &vec![0.0; n]);
        sw.best_balanced.filter(|c| c.ratio <= bound).map(|c| {
            let mut m = vec![false; n];
            for v in c.side {
                m[v] = true;
            }
            m
        })
    };
    Ok(best_mask.map(|light| {
        let a = (0..n).filter(|&v| !light[v]).collect();
        let b = (0..n).filter(|&v| light[v]).collect();
        (a, b)
    }))
}
