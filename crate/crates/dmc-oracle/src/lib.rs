//! Baselines every pipeline stage is checked against: exact Stoer-Wagner
//! mincut, a Matula-style 3-approximation, brute-force cut enumeration and
//! exact conductance.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use dmc_graph::{Cut, GraphError, VertexId, Weight, WeightedMultigraph};
use serde::{Deserialize, Serialize};

/// Largest vertex count the brute-force routines accept.
pub const BRUTE_FORCE_LIMIT: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("graph needs at least {need} vertices, has {have}")]
    TooSmall { need: usize, have: usize },
    #[error("brute force refused: {n} vertices exceeds the limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("total volume is zero")]
    ZeroVolume,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MincutResult {
    pub value: Weight,
    pub witness: Cut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproxMincut {
    pub value: Weight,
}

/// Exact global mincut. A disconnected graph yields 0 with one component as
/// the witness.
pub fn stoer_wagner(g: &WeightedMultigraph) -> Result<MincutResult, OracleError> {
    let n = g.vertex_count();
    if n < 2 {
        return Err(OracleError::TooSmall { need: 2, have: n });
    }
    let comps = g.components();
    if comps.len() > 1 {
        let witness = Cut::new(g, &comps[0])?;
        return Ok(MincutResult { value: 0, witness });
    }

    let mut w = vec![vec![0u64; n]; n];
    for e in g.edges() {
        w[e.u][e.v] += e.w;
        w[e.v][e.u] += e.w;
    }
    let mut groups: Vec<Vec<VertexId>> = (0..n).map(|v| vec![v]).collect();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut best = u64::MAX;
    let mut best_side = Vec::new();

    while alive.len() > 1 {
        let k = alive.len();
        let mut attach = vec![0u64; k];
        let mut added = vec![false; k];
        let mut prev = 0;
        let mut last = 0;
        for step in 0..k {
            let mut pick = usize::MAX;
            for i in 0..k {
                if !added[i] && (pick == usize::MAX || attach[i] > attach[pick]) {
                    pick = i;
                }
            }
            added[pick] = true;
            if step == k - 1 {
                last = pick;
                if attach[pick] < best {
                    best = attach[pick];
                    best_side = groups[alive[pick]].clone();
                }
            } else {
                prev = pick;
                let p = alive[pick];
                for i in 0..k {
                    if !added[i] {
                        attach[i] += w[p][alive[i]];
                    }
                }
            }
        }
        let (s, t) = (alive[prev], alive[last]);
        let moved = std::mem::take(&mut groups[t]);
        groups[s].extend(moved);
        for &x in &alive {
            w[s][x] += w[t][x];
            w[x][s] = w[s][x];
        }
        w[s][s] = 0;
        alive.remove(last);
    }
    let witness = Cut::new(g, &best_side)?;
    debug_assert_eq!(witness.weight, best);
    Ok(MincutResult { value: best, witness })
}

/// Deterministic value in `[λ, 3λ]`: repeatedly record the minimum degree δ
/// and contract every edge whose maximum-adjacency label is at least δ/3.
/// Contracting such edges keeps every cut lighter than δ/3 intact.
pub fn approx_mincut(g: &WeightedMultigraph) -> Result<ApproxMincut, OracleError> {
    let n = g.vertex_count();
    if n < 2 {
        return Err(OracleError::TooSmall { need: 2, have: n });
    }
    if !g.is_connected() {
        return Ok(ApproxMincut { value: 0 });
    }
    let mut edges: Vec<(usize, usize, u64)> = g.edges().iter().map(|e| (e.u.min(e.v), e.u.max(e.v), e.w)).collect();
    let mut k = n;
    let mut best = u64::MAX;
    loop {
        merge_parallel(&mut edges);
        let mut deg = vec![0u64; k];
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); k];
        for (i, &(u, v, w)) in edges.iter().enumerate() {
            deg[u] += w;
            deg[v] += w;
            adj[u].push((v, i));
            adj[v].push((u, i));
        }
        let delta = *deg.iter().min().unwrap();
        best = best.min(delta);
        if k <= 2 {
            break;
        }

        let mut label = vec![0u64; edges.len()];
        let mut attach = vec![0u64; k];
        let mut done = vec![false; k];
        let mut heap = BinaryHeap::new();
        heap.push((0u64, Reverse(0usize)));
        while let Some((r, Reverse(x))) = heap.pop() {
            if done[x] || r != attach[x] {
                continue;
            }
            done[x] = true;
            for &(y, i) in &adj[x] {
                if !done[y] {
                    attach[y] += edges[i].2;
                    label[i] = attach[y];
                    heap.push((attach[y], Reverse(y)));
                }
            }
        }

        let mut uf = UnionFind::new(k);
        for (i, &(u, v, _)) in edges.iter().enumerate() {
            if 3 * label[i] >= delta {
                uf.union(u, v);
            }
        }
        let (map, parts) = uf.dense_labels();
        debug_assert!(parts < k);
        edges = edges
            .iter()
            .filter_map(|&(u, v, w)| {
                let (a, b) = (map[u], map[v]);
                (a != b).then(|| (a.min(b), a.max(b), w))
            })
            .collect();
        k = parts;
        if k == 1 {
            break;
        }
    }
    Ok(ApproxMincut { value: best })
}

fn merge_parallel(edges: &mut Vec<(usize, usize, u64)>) {
    edges.sort_unstable_by_key(|&(u, v, _)| (u, v));
    let mut out: Vec<(usize, usize, u64)> = Vec::with_capacity(edges.len());
    for &(u, v, w) in edges.iter() {
        match out.last_mut() {
            Some(last) if last.0 == u && last.1 == v => last.2 += w,
            _ => out.push((u, v, w)),
        }
    }
    *edges = out;
}

pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Joins the sets; the smaller root index wins. Returns false if already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.parent[hi] = lo;
        true
    }

    /// Labels `0..parts` numbered by first appearance.
    pub fn dense_labels(&mut self) -> (Vec<usize>, usize) {
        let n = self.parent.len();
        let mut id = vec![usize::MAX; n];
        let mut map = vec![0; n];
        let mut parts = 0;
        for x in 0..n {
            let r = self.find(x);
            if id[r] == usize::MAX {
                id[r] = parts;
                parts += 1;
            }
            map[x] = id[r];
        }
        (map, parts)
    }
}

fn guard(n: usize) -> Result<(), OracleError> {
    if n > BRUTE_FORCE_LIMIT {
        Err(OracleError::TooLarge { n, limit: BRUTE_FORCE_LIMIT })
    } else {
        Ok(())
    }
}

/// Visit every cut once as `(mask, w(∂S), vol(S))`. The last vertex is never
/// inside `S`, so a cut and its complement are not both visited. Subsets are
/// walked in Gray-code order with O(deg) updates.
pub fn for_each_cut(g: &WeightedMultigraph, mut f: impl FnMut(&[bool], Weight, Weight)) -> Result<(), OracleError> {
    let n = g.vertex_count();
    guard(n)?;
    if n < 2 {
        return Ok(());
    }
    let deg = g.degrees();
    let mut mask = vec![false; n];
    let mut cut: i128 = 0;
    let mut vol: u64 = 0;
    let total = 1u64 << (n - 1);
    for i in 1..total {
        let v = i.trailing_zeros() as usize;
        let entering = !mask[v];
        for e in g.incident(v) {
            let x = e.other(v);
            let w = e.w as i128;
            if mask[x] == mask[v] {
                cut += w;
            } else {
                cut -= w;
            }
        }
        mask[v] = entering;
        if entering {
            vol += deg[v];
        } else {
            vol -= deg[v];
        }
        f(&mask, cut as Weight, vol);
    }
    Ok(())
}

/// All `2^{n-1} - 1` cuts, materialized.
pub fn enumerate_all_cuts(g: &WeightedMultigraph) -> Result<Vec<Cut>, OracleError> {
    let mut out = Vec::new();
    for_each_cut(g, |mask, w, _| {
        let side = (0..mask.len()).filter(|&v| mask[v]).collect();
        out.push(Cut { side, weight: w });
    })?;
    Ok(out)
}

/// Brute-force minimum over all cuts.
pub fn brute_force_mincut(g: &WeightedMultigraph) -> Result<MincutResult, OracleError> {
    let n = g.vertex_count();
    if n < 2 {
        return Err(OracleError::TooSmall { need: 2, have: n });
    }
    let mut best = (u64::MAX, Vec::new());
    for_each_cut(g, |mask, w, _| {
        if w < best.0 {
            best = (w, mask.to_vec());
        }
    })?;
    Ok(MincutResult { value: best.0, witness: Cut::from_mask(g, &best.1)? })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conductance {
    /// `num / den`, or infinity when no cut has positive smaller-side volume.
    pub value: f64,
    pub num: Weight,
    pub den: Weight,
    /// Smaller-volume side of a minimizing cut; empty when `value` is infinite.
    pub witness: Vec<VertexId>,
}

impl Conductance {
    /// Exact test `num/den ≥ phi`, done in floating point on integers below 2^53.
    pub fn at_least(&self, phi: f64) -> bool {
        self.den == 0 || self.num as f64 >= phi * self.den as f64
    }
}

/// Exact `Φ(G) = min_S w(∂S) / min{vol S, vol V∖S}`, with self-loops counted
/// in the volumes. Sets whose smaller side has zero volume are skipped.
pub fn conductance_exact(g: &WeightedMultigraph) -> Result<Conductance, OracleError> {
    let n = g.vertex_count();
    guard(n)?;
    let total = g.total_volume();
    if total == 0 {
        return Err(OracleError::ZeroVolume);
    }
    let mut best: Option<(u64, u64, Vec<bool>)> = None;
    for_each_cut(g, |mask, w, vol| {
        let small = vol.min(total - vol);
        if small == 0 {
            return;
        }
        let better = match &best {
            None => true,
            Some((bn, bd, _)) => (w as u128) * (*bd as u128) < (*bn as u128) * (small as u128),
        };
        if better {
            let side = if vol * 2 <= total { mask.to_vec() } else { mask.iter().map(|b| !b).collect() };
            best = Some((w, small, side));
        }
    })?;
    Ok(match best {
        None => Conductance { value: f64::INFINITY, num: 0, den: 0, witness: Vec::new() },
        Some((num, den, side)) => Conductance {
            value: num as f64 / den as f64,
            num,
            den,
            witness: (0..n).filter(|&v| side[v]).collect(),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedConductance {
    /// Infinity when no cut has two sides of positive weight.
    pub value: f64,
    /// Lighter side of a minimizing cut; empty when `value` is infinite.
    pub witness: Vec<VertexId>,
}

/// `min_S w(∂S) / min{π(S), π(V∖S)}` for arbitrary nonnegative vertex
/// weights `π`. With `π = deg` this is ordinary conductance; with
/// `π(v) = deg_{G[A]}(v) + r·w(E(v, V∖A))` it is the conductance of `G{A}^r`
/// without rounding the loop weights.
pub fn conductance_weighted(g: &WeightedMultigraph, pi: &[f64]) -> Result<WeightedConductance, OracleError> {
    let n = g.vertex_count();
    guard(n)?;
    if pi.len() != n {
        return Err(GraphError::DimensionMismatch { expected: n, got: pi.len() }.into());
    }
    let total: f64 = pi.iter().sum();
    let mut best = (f64::INFINITY, Vec::new());
    if n < 2 {
        return Ok(WeightedConductance { value: best.0, witness: best.1 });
    }
    let mut mask = vec![false; n];
    let mut cut: i128 = 0;
    let mut vol = 0f64;
    for i in 1..(1u64 << (n - 1)) {
        let v = i.trailing_zeros() as usize;
        for e in g.incident(v) {
            let w = e.w as i128;
            if mask[e.other(v)] == mask[v] {
                cut += w;
            } else {
                cut -= w;
            }
        }
        mask[v] = !mask[v];
        // recompute instead of accumulating to avoid float drift
        if i & 1023 == 0 {
            vol = (0..n).filter(|&x| mask[x]).map(|x| pi[x]).sum();
        } else if mask[v] {
            vol += pi[v];
        } else {
            vol -= pi[v];
        }
        let small = vol.min(total - vol);
        if small <= 1e-12 * total {
            continue;
        }
        let r = cut as f64 / small;
        if r < best.0 {
            let lighter = vol * 2.0 <= total;
            best = (r, (0..n).filter(|&x| mask[x] == lighter).collect());
        }
    }
    Ok(WeightedConductance { value: best.0, witness: best.1 })
}
