use dmc_decomp::{spectral_sweep, CertMethod};
use dmc_graph::{GraphBuilder, Weight, WeightedMultigraph};
use dmc_oracle::conductance_exact;
use serde::{Deserialize, Serialize};

use crate::LossyError;

/// Exact conductance is computed up to this many vertices.
pub const EXACT_CERT_LIMIT: usize = 16;

/// Expansion the family is expected to meet. Exact certificates up to 16
/// vertices and Cheeger estimates up to 10^4 vertices stay above it.
pub const ALPHA0: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitExpander {
    pub graph: WeightedMultigraph,
    /// Certified (exact) or estimated (spectral, Cheeger) conductance; `None`
    /// when certification was skipped.
    pub alpha0: Option<f64>,
    pub method: Option<CertMethod>,
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Number of hashed permutations on top of the cycle.
const PERMUTATIONS: u64 = 3;

/// The cycle `x ~ x+1` on `Z_n` plus `x ~ π_k(x)` for three fixed
/// permutations drawn by a Fisher-Yates shuffle from a hash of `(n, k)`.
/// Every vertex has degree at most 8, with a loop counting once; `n = 1` is a
/// single vertex with a loop of weight 4.
pub fn expander_graph(n: usize) -> WeightedMultigraph {
    assert!(n >= 1);
    let mut b = GraphBuilder::new(n);
    if n == 1 {
        b.add_self_loop(0, 1 + PERMUTATIONS).unwrap();
        return b.build().unwrap();
    }
    let mut counts: std::collections::BTreeMap<(usize, usize), Weight> = std::collections::BTreeMap::new();
    let mut add = |b: &mut GraphBuilder, x: usize, y: usize| {
        if x == y {
            b.add_self_loop(x, 1).unwrap();
        } else {
            *counts.entry((x.min(y), x.max(y))).or_insert(0) += 1;
        }
    };
    for x in 0..n {
        add(&mut b, x, (x + 1) % n);
    }
    for k in 0..PERMUTATIONS {
        let mut state = (n as u64).wrapping_mul(0x2545_f491_4f6c_dd1d) ^ (k + 1);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = (splitmix(&mut state) % (i as u64 + 1)) as usize;
            perm.swap(i, j);
        }
        for x in 0..n {
            add(&mut b, x, perm[x]);
        }
    }
    for ((u, v), c) in counts {
        b.add_edge(u, v, c).unwrap();
    }
    b.build().unwrap()
}

/// Conductance certificate: exact up to `EXACT_CERT_LIMIT` vertices, Cheeger's
/// `λ₂/2` from the spectral estimate above.
pub fn certify(g: &WeightedMultigraph) -> (f64, CertMethod) {
    let n = g.vertex_count();
    if n <= 1 {
        return (1.0, CertMethod::Exact);
    }
    if n <= EXACT_CERT_LIMIT {
        let c = conductance_exact(g).expect("small connected graph");
        return (c.value.min(1.0), CertMethod::Exact);
    }
    let s = spectral_sweep(g, &vec![0.0; n]);
    ((s.lambda2 / 2.0).min(1.0), CertMethod::SpectralSurrogate)
}

pub fn explicit_expander(n: usize) -> Result<ExplicitExpander, LossyError> {
    if n == 0 {
        return Err(LossyError::EmptyExpander);
    }
    let graph = expander_graph(n);
    let (a, m) = certify(&graph);
    Ok(ExplicitExpander { graph, alpha0: Some(a), method: Some(m) })
}

/// Contract `expander_graph(Σ sizes)` over consecutive blocks of the given
/// sizes. An intra-block edge becomes a loop of twice its weight, so the
/// degree of `v` is the volume of its block.
pub fn contracted_expander(sizes: &[u64]) -> WeightedMultigraph {
    let total: u64 = sizes.iter().sum();
    let big = expander_graph(total as usize);
    let mut owner = Vec::with_capacity(total as usize);
    for (v, &s) in sizes.iter().enumerate() {
        owner.extend(std::iter::repeat(v).take(s as usize));
    }
    let k = sizes.len();
    let mut b = GraphBuilder::new(k);
    for (x, &l) in big.self_loops().iter().enumerate() {
        if l > 0 {
            b.add_self_loop(owner[x], l).unwrap();
        }
    }
    let mut counts: std::collections::BTreeMap<(usize, usize), Weight> = std::collections::BTreeMap::new();
    for e in big.edges() {
        let (a, c) = (owner[e.u], owner[e.v]);
        if a == c {
            b.add_self_loop(a, 2 * e.w).unwrap();
        } else {
            *counts.entry((a.min(c), a.max(c))).or_insert(0) += e.w;
        }
    }
    for ((u, v), c) in counts {
        b.add_edge(u, v, c).unwrap();
    }
    b.build().unwrap()
}

/// Expander on `demands.len()` vertices with `d(v) ≤ deg(v) ≤ 8·d(v)`: block
/// sizes are `⌊d(v)⌋ ≥ d(v)/2` and family degrees lie in `[4, 8]`.
pub fn degree_mapped_expander(demands: &[f64]) -> Result<ExplicitExpander, LossyError> {
    if demands.is_empty() {
        return Err(LossyError::EmptyExpander);
    }
    let mut sizes = Vec::with_capacity(demands.len());
    for (v, &d) in demands.iter().enumerate() {
        if !(d >= 1.0) || !d.is_finite() {
            return Err(LossyError::DemandBelowOne { vertex: v, demand: d });
        }
        sizes.push(d.floor() as u64);
    }
    let graph = contracted_expander(&sizes);
    let (a, m) = certify(&graph);
    Ok(ExplicitExpander { graph, alpha0: Some(a), method: Some(m) })
}
