use dmc_graph::{VertexId, Weight, WeightedMultigraph};
use serde::{Deserialize, Serialize};

use crate::cut_or_prune::{cut_or_prune_with_limit, CutOrPruneOutcome};
use crate::trim::trim_core;
use crate::{boundary_weights, ceil_weight, certify_local, meets, CertMethod, ClusterCertificate, DecompError, DecompositionParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Cut,
    Prune,
    /// Cut-or-prune could not certify either branch; the cluster was split
    /// along the unbalanced peel it found.
    Relaxed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitEvent {
    pub iteration: usize,
    pub branch: Branch,
    /// `vol(U)` of the cluster graph, self-loops included.
    pub volume: Weight,
    pub volume_b: Weight,
    /// Weight moved to the deleted set.
    pub cut_weight: Weight,
    /// Self-loop volume added before rounding up.
    pub loop_volume_exact: f64,
    pub trimmed_volume: Weight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub active_clusters: usize,
    pub max_active_volume: Weight,
    pub cut_weight_added: Weight,
    pub self_loop_volume_added: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub clusters: Vec<Vec<VertexId>>,
    pub intercluster_weight: Weight,
    pub certificates: Vec<ClusterCertificate>,
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
    pub events: Vec<SplitEvent>,
    /// Extra splits made by the final certification pass.
    pub refinement_splits: usize,
    /// `intercluster_weight / (α·max(1, ln n)·φ·vol(V))`.
    pub c_report: f64,
    pub budget_exceeded: bool,
}

impl Decomposition {
    /// Cluster index of every vertex.
    pub fn labels(&self, n: usize) -> Vec<usize> {
        let mut l = vec![usize::MAX; n];
        for (i, c) in self.clusters.iter().enumerate() {
            for &v in c {
                l[v] = i;
            }
        }
        l
    }
}

/// A cluster graph `H`: `G[vertices]` plus accumulated self-loops.
#[derive(Clone)]
struct Cluster {
    vertices: Vec<VertexId>,
    loops: Vec<Weight>,
}

impl Cluster {
    fn graph(&self, g: &WeightedMultigraph) -> Result<WeightedMultigraph, DecompError> {
        let (h, _) = g.induced(&self.vertices)?;
        Ok(h.with_added_self_loops(&self.loops)?)
    }

    /// `H{side}^r` for a local side; also returns the unrounded loop volume added.
    fn child(&self, h: &WeightedMultigraph, side: &[VertexId], r: f64) -> (Cluster, f64) {
        let mut mask = vec![false; h.vertex_count()];
        for &l in side {
            mask[l] = true;
        }
        let bnd = boundary_weights(h, &mask);
        let mut exact = 0.0;
        let mut c = Cluster { vertices: Vec::with_capacity(side.len()), loops: Vec::with_capacity(side.len()) };
        for &l in side {
            exact += r * bnd[l] as f64;
            c.vertices.push(self.vertices[l]);
            c.loops.push(self.loops[l] + ceil_weight(r * bnd[l] as f64));
        }
        (c, exact)
    }
}

fn local_cut(h: &WeightedMultigraph, side: &[VertexId]) -> Weight {
    let mut mask = vec![false; h.vertex_count()];
    for &l in side {
        mask[l] = true;
    }
    boundary_weights(h, &mask).iter().sum()
}

/// Iterated cut-or-prune over active clusters. Cut-branch children receive
/// self-loops of factor `1/(α²φ·ln n)`, prune-branch children `1/(8φ)`. The
/// final clusters are then certified against the boundary-linked condition at
/// `(φ, β)` and split along any violating set.
pub fn decompose(g: &WeightedMultigraph, params: &DecompositionParams) -> Result<Decomposition, DecompError> {
    params.validate()?;
    let n = g.vertex_count();
    let (phi, alpha) = (params.phi, params.approx_alpha);
    let log_n = (n as f64).ln().max(1.0);
    let r_cut = 1.0 / (alpha * alpha * phi * log_n);
    let r_prune = 1.0 / (8.0 * phi);

    let mut active = Vec::new();
    let mut inactive = Vec::new();
    for comp in g.components() {
        let c = Cluster { loops: vec![0; comp.len()], vertices: comp };
        if c.vertices.len() == 1 || g.volume(&c.vertices) == 0 {
            inactive.push(c);
        } else {
            active.push(c);
        }
    }

    let mut trace = Vec::new();
    let mut events = Vec::new();
    let mut iteration = 0;
    let mut budget_exceeded = false;
    while !active.is_empty() {
        if iteration == params.max_iterations {
            budget_exceeded = true;
            inactive.append(&mut active);
            break;
        }
        iteration += 1;
        let mut rec = IterationRecord { iteration, active_clusters: active.len(), max_active_volume: 0, cut_weight_added: 0, self_loop_volume_added: 0.0 };
        let mut next = Vec::new();
        for c in std::mem::take(&mut active) {
            let h = c.graph(g)?;
            let vol_u = h.total_volume();
            rec.max_active_volume = rec.max_active_volume.max(vol_u);
            if h.vertex_count() == 1 || vol_u == 0 {
                inactive.push(c);
                continue;
            }
            let (outcome, relaxed) = match cut_or_prune_with_limit(&h, phi, alpha, params.exact_limit) {
                Ok(o) => (o, false),
                Err(DecompError::CertificationFailure { side_a, side_b }) => {
                    (CutOrPruneOutcome { kind: crate::OutcomeKind::Cut, side_a, side_b, certificate: None }, true)
                }
                Err(e) => return Err(e),
            };
            let vol_b = h.volume(&outcome.side_b);
            if outcome.side_b.is_empty() {
                inactive.push(c);
                continue;
            }
            let cut_w = local_cut(&h, &outcome.side_b);
            if relaxed || vol_b as f64 >= vol_u as f64 / (32.0 * alpha) {
                let (ca, la) = c.child(&h, &outcome.side_a, r_cut);
                let (cb, lb) = c.child(&h, &outcome.side_b, r_cut);
                next.push(ca);
                next.push(cb);
                rec.cut_weight_added += cut_w;
                rec.self_loop_volume_added += la + lb;
                events.push(SplitEvent {
                    iteration,
                    branch: if relaxed { Branch::Relaxed } else { Branch::Cut },
                    volume: vol_u,
                    volume_b: vol_b,
                    cut_weight: cut_w,
                    loop_volume_exact: la + lb,
                    trimmed_volume: 0,
                });
            } else {
                // trim works on the cluster graph with A as the cluster
                let t = trim_core(&h, &outcome.side_a, phi, params.exact_limit)?;
                let mut rest: Vec<VertexId> = outcome.side_b.iter().chain(&t.pruned).copied().collect();
                rest.sort_unstable();
                let removed = local_cut(&h, &t.remaining);
                let (ci, li) = c.child(&h, &t.remaining, r_prune);
                let (cr, lr) = c.child(&h, &rest, r_prune);
                inactive.push(ci);
                next.push(cr);
                rec.cut_weight_added += removed;
                rec.self_loop_volume_added += li + lr;
                events.push(SplitEvent {
                    iteration,
                    branch: Branch::Prune,
                    volume: vol_u,
                    volume_b: vol_b,
                    cut_weight: removed,
                    loop_volume_exact: li + lr,
                    trimmed_volume: t.pruned_volume,
                });
            }
        }
        trace.push(rec);
        active = next;
    }

    let mut clusters = Vec::new();
    let mut certificates = Vec::new();
    let mut refinement_splits = 0;
    let mut found: Vec<Vec<VertexId>> = inactive.into_iter().map(|c| c.vertices).collect();
    found.sort_by_key(|c| c[0]);
    for c in found {
        let (parts, splits) = certify_cluster(g, &c, params)?;
        refinement_splits += splits;
        for (p, cert) in parts {
            clusters.push(p);
            certificates.push(cert);
        }
    }
    let mut order: Vec<usize> = (0..clusters.len()).collect();
    order.sort_by_key(|&i| clusters[i][0]);
    let clusters: Vec<Vec<VertexId>> = order.iter().map(|&i| clusters[i].clone()).collect();
    let certificates: Vec<ClusterCertificate> = order.iter().map(|&i| certificates[i]).collect();

    let mut labels = vec![0usize; n];
    for (i, c) in clusters.iter().enumerate() {
        for &v in c {
            labels[v] = i;
        }
    }
    let intercluster_weight: Weight = g.edges().iter().filter(|e| labels[e.u] != labels[e.v]).map(|e| e.w).sum();
    let vol = g.total_volume();
    let c_report = if vol == 0 { 0.0 } else { intercluster_weight as f64 / (alpha * log_n * phi * vol as f64) };
    Ok(Decomposition {
        clusters,
        intercluster_weight,
        certificates,
        iterations: iteration,
        trace,
        events,
        refinement_splits,
        c_report,
        budget_exceeded,
    })
}

/// Certify `min_S w(∂_{G[C]}S) / min{vol_{G[C]}(S) + (β/φ)·w(E(S, V∖C)), (same for C∖S)} ≥ φ`,
/// splitting along violating sets until every piece passes. Returns the
/// pieces (sorted) and the number of splits.
pub fn certify_cluster(
    g: &WeightedMultigraph,
    cluster: &[VertexId],
    params: &DecompositionParams,
) -> Result<(Vec<(Vec<VertexId>, ClusterCertificate)>, usize), DecompError> {
    if cluster.is_empty() {
        return Err(DecompError::EmptyCluster);
    }
    let ratio = params.beta / params.phi;
    let mut stack = vec![cluster.to_vec()];
    let mut out = Vec::new();
    let mut splits = 0;
    while let Some(mut c) = stack.pop() {
        c.sort_unstable();
        if c.len() == 1 {
            out.push((c, ClusterCertificate { phi_lower_bound: 1.0, method: CertMethod::Exact }));
            continue;
        }
        let mask = g.mask(&c)?;
        let bnd = boundary_weights(g, &mask);
        let (sub, _) = g.induced(&c)?;
        let extra: Vec<f64> = c.iter().map(|&v| ratio * bnd[v] as f64).collect();
        let (value, witness, method) = certify_local(&sub, &extra, params.exact_limit)?;
        if meets(value, params.phi) || witness.is_empty() {
            out.push((c, ClusterCertificate { phi_lower_bound: value, method }));
        } else {
            let mut inside = vec![false; c.len()];
            for &l in &witness {
                inside[l] = true;
            }
            let s: Vec<VertexId> = (0..c.len()).filter(|&l| inside[l]).map(|l| c[l]).collect();
            let rest: Vec<VertexId> = (0..c.len()).filter(|&l| !inside[l]).map(|l| c[l]).collect();
            splits += 1;
            stack.push(rest);
            stack.push(s);
        }
    }
    out.sort_by_key(|(c, _)| c[0]);
    Ok((out, splits))
}
