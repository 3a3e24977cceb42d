//! Deterministic spectral sweep for clusters above the brute-force limit.

use dmc_graph::{VertexId, Weight, WeightedMultigraph};

pub const POWER_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCut {
    /// Lighter side of the prefix cut.
    pub side: Vec<VertexId>,
    pub cut: Weight,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    /// Rayleigh-quotient estimate of the second normalized-Laplacian eigenvalue.
    pub lambda2: f64,
    pub best: Option<SweepCut>,
    /// Best prefix with both sides holding at least a third of the volume.
    pub best_balanced: Option<SweepCut>,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Power iteration on the lazy walk `½(I + D^{-1/2} A D^{-1/2})` with the
/// stationary direction projected out, followed by a sweep over the
/// embedding. `extra[v]` is added to both the diagonal of `A` and to `d(v)`,
/// which models fractional self-loops exactly.
pub fn spectral_sweep(g: &WeightedMultigraph, extra: &[f64]) -> Sweep {
    let n = g.vertex_count();
    let pi: Vec<f64> = (0..n).map(|v| g.degree(v) as f64 + extra[v]).collect();
    let diag: Vec<f64> = (0..n).map(|v| g.self_loop(v) as f64 + extra[v]).collect();
    let total: f64 = pi.iter().sum();
    let s: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();

    let project = |x: &mut Vec<f64>| {
        let ss: f64 = pi.iter().sum();
        if ss > 0.0 {
            let dot: f64 = x.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>() / ss;
            for (xi, si) in x.iter_mut().zip(&s) {
                *xi -= dot * si;
            }
        }
        let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 0.0 {
            for xi in x.iter_mut() {
                *xi /= norm;
            }
        }
    };
    let apply = |x: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; n];
        for v in 0..n {
            if pi[v] > 0.0 {
                y[v] = diag[v] * x[v] / pi[v];
            }
        }
        for e in g.edges() {
            let c = e.w as f64 / (s[e.u] * s[e.v]);
            y[e.u] += c * x[e.v];
            y[e.v] += c * x[e.u];
        }
        for v in 0..n {
            y[v] = 0.5 * (x[v] + y[v]);
        }
        y
    };

    let mut x: Vec<f64> = (0..n)
        .map(|v| if pi[v] > 0.0 { (splitmix(v as u64) >> 11) as f64 / (1u64 << 53) as f64 - 0.5 } else { 0.0 })
        .collect();
    project(&mut x);
    for _ in 0..POWER_ITERATIONS {
        x = apply(&x);
        project(&mut x);
    }
    let mx = apply(&x);
    let mu: f64 = x.iter().zip(&mx).map(|(a, b)| a * b).sum();
    let lambda2 = (2.0 * (1.0 - mu)).max(0.0);

    let key: Vec<f64> = (0..n).map(|v| if pi[v] > 0.0 { x[v] / s[v] } else { f64::NEG_INFINITY }).collect();
    let mut order: Vec<VertexId> = (0..n).collect();
    order.sort_by(|&a, &b| key[b].total_cmp(&key[a]).then(a.cmp(&b)));

    let mut in_prefix = vec![false; n];
    let mut cut: i128 = 0;
    let mut vol = 0.0;
    let mut best: Option<(f64, usize, Weight, bool)> = None;
    let mut best_bal: Option<(f64, usize, Weight, bool)> = None;
    for (k, &v) in order.iter().enumerate().take(n.saturating_sub(1)) {
        for e in g.incident(v) {
            if in_prefix[e.other(v)] {
                cut -= e.w as i128;
            } else {
                cut += e.w as i128;
            }
        }
        in_prefix[v] = true;
        vol += pi[v];
        let small = vol.min(total - vol);
        if small <= 1e-12 * total {
            continue;
        }
        let ratio = cut as f64 / small;
        let cand = (ratio, k + 1, cut as Weight, vol * 2.0 <= total);
        if best.map_or(true, |b| ratio < b.0) {
            best = Some(cand);
        }
        if 3.0 * vol >= total && 3.0 * (total - vol) >= total && best_bal.map_or(true, |b| ratio < b.0) {
            best_bal = Some(cand);
        }
    }
    let materialize = |c: (f64, usize, Weight, bool)| {
        let mut side: Vec<VertexId> = if c.3 { order[..c.1].to_vec() } else { order[c.1..].to_vec() };
        side.sort_unstable();
        SweepCut { side, cut: c.2, ratio: c.0 }
    };
    Sweep { lambda2, best: best.map(materialize), best_balanced: best_bal.map(materialize) }
}
