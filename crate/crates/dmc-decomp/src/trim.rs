use std::collections::VecDeque;

use dmc_graph::{VertexId, Weight, WeightedMultigraph};
use dmc_oracle::BRUTE_FORCE_LIMIT;
use serde::{Deserialize, Serialize};

use crate::{boundary_weights, certify_local, meets, ClusterCertificate, DecompError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimResult {
    pub pruned: Vec<VertexId>,
    pub remaining: Vec<VertexId>,
    /// `w(E(A, V∖A))`.
    pub boundary_before: Weight,
    /// `w(E(A', V∖A'))`.
    pub boundary_after: Weight,
    pub pruned_volume: Weight,
    /// Conductance bound for `G{A'}^{1/(8φ)}`.
    pub certificate: ClusterCertificate,
    pub flow_rounds: usize,
    /// Witness sets removed after the flow phase to reach certification.
    pub fallback_steps: usize,
}

impl TrimResult {
    /// `vol(P) ≤ (4/φ)·w(E(A, V∖A))`.
    pub fn volume_bound_holds(&self, phi: f64) -> bool {
        self.pruned_volume as f64 <= 4.0 / phi * self.boundary_before as f64 * (1.0 + 1e-12)
    }

    /// `w(E(A', V∖A')) ≤ 2·w(E(A, V∖A))`.
    pub fn boundary_bound_holds(&self) -> bool {
        self.boundary_after <= 2 * self.boundary_before
    }

    pub fn expander_holds(&self, phi: f64) -> bool {
        meets(self.certificate.phi_lower_bound, phi)
    }
}

/// Prune `cluster` so that the remainder `A'` makes `G{A'}^{1/(8φ)}` a
/// φ-expander. Requires `w(E(A, V∖A)) ≤ (φ/16)·vol(A)` and that `G{A}` is an
/// 8φ-expander.
pub fn trim(g: &WeightedMultigraph, cluster: &[VertexId], phi: f64) -> Result<TrimResult, DecompError> {
    if cluster.is_empty() {
        return Err(DecompError::EmptyCluster);
    }
    if !(phi > 0.0 && phi <= 1.0) {
        return Err(DecompError::InvalidParams("phi must lie in (0, 1]".into()));
    }
    let mask = g.mask(cluster)?;
    let bnd = boundary_weights(g, &mask);
    let boundary: Weight = bnd.iter().sum();
    let vol = g.volume(cluster);
    if boundary as f64 > phi / 16.0 * vol as f64 {
        return Err(DecompError::TrimPrecondition(format!("boundary weight {boundary} exceeds (φ/16)·vol(A) = {}", phi / 16.0 * vol as f64)));
    }
    let (sub, _) = g.induced(cluster)?;
    let extra: Vec<f64> = cluster.iter().map(|&v| bnd[v] as f64).collect();
    let (value, _, _) = certify_local(&sub, &extra, BRUTE_FORCE_LIMIT)?;
    if !meets(value, 8.0 * phi) {
        return Err(DecompError::TrimPrecondition(format!("G{{A}} has conductance {value}, below 8φ = {}", 8.0 * phi)));
    }
    trim_core(g, cluster, phi, BRUTE_FORCE_LIMIT)
}

/// [`trim`] without the precondition checks; the postconditions are still
/// measured and reported.
pub fn trim_unchecked(g: &WeightedMultigraph, cluster: &[VertexId], phi: f64) -> Result<TrimResult, DecompError> {
    if cluster.is_empty() {
        return Err(DecompError::EmptyCluster);
    }
    trim_core(g, cluster, phi, BRUTE_FORCE_LIMIT)
}

pub(crate) fn trim_core(g: &WeightedMultigraph, cluster: &[VertexId], phi: f64, limit: usize) -> Result<TrimResult, DecompError> {
    let n = g.vertex_count();
    let mut in_a = g.mask(cluster)?;
    let boundary_before: Weight = boundary_weights(g, &in_a).iter().sum();

    let mut flow_rounds = 0;
    while flow_rounds < cluster.len() {
        flow_rounds += 1;
        match unit_flow(g, &in_a, phi) {
            None => break,
            Some(cut) => {
                for v in cut {
                    in_a[v] = false;
                }
            }
        }
        if in_a.iter().filter(|&&x| x).count() <= 1 {
            break;
        }
    }

    let r = 1.0 / (8.0 * phi);
    let mut fallback_steps = 0;
    let certificate = loop {
        let a: Vec<VertexId> = (0..n).filter(|&v| in_a[v]).collect();
        let bnd = boundary_weights(g, &in_a);
        let (sub, _) = g.induced(&a)?;
        let extra: Vec<f64> = a.iter().map(|&v| r * bnd[v] as f64).collect();
        let (value, witness, method) = certify_local(&sub, &extra, limit)?;
        if meets(value, phi) || witness.is_empty() || a.len() <= 1 {
            break ClusterCertificate { phi_lower_bound: value, method };
        }
        for l in witness {
            in_a[a[l]] = false;
        }
        fallback_steps += 1;
    };

    let cluster_mask = g.mask(cluster)?;
    let pruned: Vec<VertexId> = (0..n).filter(|&v| cluster_mask[v] && !in_a[v]).collect();
    let remaining: Vec<VertexId> = (0..n).filter(|&v| in_a[v]).collect();
    Ok(TrimResult {
        pruned_volume: g.volume(&pruned),
        boundary_after: boundary_weights(g, &in_a).iter().sum(),
        pruned,
        remaining,
        boundary_before,
        certificate,
        flow_rounds,
        fallback_steps,
    })
}

/// Bounded-height push-relabel. Each `v ∈ A` starts with `(2/φ)·w(E(v, V∖A))`
/// mass and absorbs up to `deg(v)`; edges inside `A` carry `(2/φ)·w(e)`.
/// Returns `None` when all mass is absorbed, otherwise the sparsest level cut
/// among the vertices left high.
fn unit_flow(g: &WeightedMultigraph, in_a: &[bool], phi: f64) -> Option<Vec<VertexId>> {
    let n = g.vertex_count();
    let bnd = boundary_weights(g, in_a);
    let scale = 2.0 / phi;
    let total_source: f64 = bnd.iter().map(|&b| b as f64 * scale).sum();
    if total_source == 0.0 {
        return None;
    }
    let members: Vec<VertexId> = (0..n).filter(|&v| in_a[v]).collect();
    let vol_a: f64 = members.iter().map(|&v| g.degree(v) as f64).sum();
    let height_cap = ((vol_a.max(2.0).ln() / phi).ceil() as usize).clamp(2, 2 * members.len() + 2);
    let eps = 1e-9 * total_source.max(1.0);

    // arcs inside A: (neighbor, edge index, sign) where flow on an arc is sign·flow[e]
    let edges = g.edges();
    let mut arcs: Vec<Vec<(VertexId, usize, f64)>> = vec![Vec::new(); n];
    for (i, e) in edges.iter().enumerate() {
        if in_a[e.u] && in_a[e.v] {
            arcs[e.u].push((e.v, i, 1.0));
            arcs[e.v].push((e.u, i, -1.0));
        }
    }
    let mut flow = vec![0.0f64; edges.len()];
    let mut mass: Vec<f64> = (0..n).map(|v| bnd[v] as f64 * scale).collect();
    let sink: Vec<f64> = (0..n).map(|v| g.degree(v) as f64).collect();
    let mut height = vec![0usize; n];
    let mut cursor = vec![0usize; n];
    let mut queue: VecDeque<VertexId> = members.iter().copied().filter(|&v| mass[v] - sink[v] > eps).collect();
    let mut queued = vec![false; n];
    for &v in &queue {
        queued[v] = true;
    }
    let mut work = 0usize;
    let work_cap = 64 * (edges.len() + n + 1) * height_cap;

    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        while mass[v] - sink[v] > eps && height[v] < height_cap && work < work_cap {
            work += 1;
            if cursor[v] == arcs[v].len() {
                height[v] += 1;
                cursor[v] = 0;
                continue;
            }
            let (u, i, sign) = arcs[v][cursor[v]];
            let residual = scale * edges[i].w as f64 - sign * flow[i];
            if height[v] == height[u] + 1 && residual > eps {
                let delta = (mass[v] - sink[v]).min(residual);
                flow[i] += sign * delta;
                mass[v] -= delta;
                mass[u] += delta;
                if !queued[u] && mass[u] - sink[u] > eps && height[u] < height_cap {
                    queued[u] = true;
                    queue.push_back(u);
                }
            } else {
                cursor[v] += 1;
            }
        }
    }

    let stuck: Vec<VertexId> = members.iter().copied().filter(|&v| mass[v] - sink[v] > eps).collect();
    if stuck.is_empty() {
        return None;
    }
    let top = members.iter().map(|&v| height[v]).max().unwrap_or(0);
    let mut best: Option<(f64, Vec<VertexId>)> = None;
    for j in 1..=top {
        let level: Vec<VertexId> = members.iter().copied().filter(|&v| height[v] >= j).collect();
        if level.is_empty() || level.len() == members.len() {
            continue;
        }
        let mut lm = vec![false; n];
        for &v in &level {
            lm[v] = true;
        }
        let cut: Weight = level.iter().flat_map(|&v| g.incident(v).map(move |e| (v, e))).filter(|(v, e)| in_a[e.other(*v)] && !lm[e.other(*v)]).map(|(_, e)| e.w).sum();
        let ratio = cut as f64 / g.volume(&level).max(1) as f64;
        if best.as_ref().map_or(true, |b| ratio <= b.0) {
            best = Some((ratio, level));
        }
    }
    match best {
        Some((_, level)) => Some(level),
        None if stuck.len() < members.len() => Some(stuck),
        None => None,
    }
}
