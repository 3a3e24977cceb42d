use dmc_graph::{cut_weight_mask, Cut, VertexId, Weight, WeightedMultigraph};
use dmc_oracle::UnionFind;
use serde::{Deserialize, Serialize};

use crate::PipelineError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoRespectAnswer {
    pub value: Weight,
    pub witness: Cut,
    /// Indices into the tree's edge list; one or two entries.
    pub tree_edges_cut: Vec<usize>,
}

/// Rooted view of a spanning tree: DFS preorder, subtree intervals and the
/// index of the tree edge above each vertex.
struct Rooted {
    order: Vec<VertexId>,
    pos: Vec<usize>,
    size: Vec<usize>,
    parent_edge: Vec<usize>,
    parent: Vec<usize>,
}

fn root_tree(n: usize, tree: &[(VertexId, VertexId)]) -> Result<Rooted, PipelineError> {
    if tree.len() + 1 != n {
        return Err(PipelineError::NotSpanningTree(format!("{} edges on {n} vertices", tree.len())));
    }
    let mut uf = UnionFind::new(n);
    let mut adj = vec![Vec::new(); n];
    for (i, &(u, v)) in tree.iter().enumerate() {
        if u >= n || v >= n {
            return Err(PipelineError::NotSpanningTree(format!("edge ({u}, {v}) leaves the vertex set")));
        }
        if !uf.union(u, v) {
            return Err(PipelineError::NotSpanningTree(format!("edge ({u}, {v}) closes a cycle")));
        }
        adj[u].push((v, i));
        adj[v].push((u, i));
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    let mut order = Vec::with_capacity(n);
    let mut parent = vec![usize::MAX; n];
    let mut parent_edge = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        order.push(x);
        for &(y, i) in adj[x].iter().rev() {
            if !seen[y] {
                seen[y] = true;
                parent[y] = x;
                parent_edge[y] = i;
                stack.push(y);
            }
        }
    }
    let mut pos = vec![0; n];
    for (p, &x) in order.iter().enumerate() {
        pos[x] = p;
    }
    let mut size = vec![1usize; n];
    for &x in order.iter().rev().take(n - 1) {
        size[parent[x]] += size[x];
    }
    Ok(Rooted { order, pos, size, parent_edge, parent })
}

/// Exact minimum over every cut of `g` that crosses one or two edges of the
/// spanning tree. With `W(u,v)` the weight between the subtrees of `u` and
/// `v`, a single edge above `v` cuts `δ(v↓)`, an incomparable pair cuts
/// `δ(u↓)+δ(v↓)−2W(u,v)`, and a nested pair `v↓ ⊂ u↓` cuts
/// `δ(u↓)+δ(v↓)−2(δ(v↓)−W(v,u)+W(v,v))`.
pub fn min_two_respecting_cut(g: &WeightedMultigraph, tree: &[(VertexId, VertexId)]) -> Result<TwoRespectAnswer, PipelineError> {
    let n = g.vertex_count();
    if n < 2 {
        return Err(PipelineError::TooSmall(n));
    }
    let t = root_tree(n, tree)?;
    // Dense matrix indexed by preorder position.
    let mut w = vec![0u64; n * n];
    for e in g.edges() {
        let (a, b) = (t.pos[e.u], t.pos[e.v]);
        w[a * n + b] += e.w;
        w[b * n + a] += e.w;
    }
    // Rows, then columns, accumulate from children into parents in reverse
    // preorder; afterwards w[a][b] = W(order[a], order[b]).
    for p in (1..n).rev() {
        let q = t.pos[t.parent[t.order[p]]];
        let (lo, hi) = w.split_at_mut(p * n);
        let dst = &mut lo[q * n..q * n + n];
        for (d, s) in dst.iter_mut().zip(&hi[..n]) {
            *d += *s;
        }
    }
    let parent_pos: Vec<usize> = (0..n).map(|p| if p == 0 { 0 } else { t.pos[t.parent[t.order[p]]] }).collect();
    for row in w.chunks_mut(n) {
        for p in (1..n).rev() {
            let s = row[p];
            row[parent_pos[p]] += s;
        }
    }
    let vol: Vec<u64> = {
        let mut v = vec![0u64; n];
        for p in (0..n).rev() {
            v[p] += g.boundary_degree(t.order[p]);
            if p > 0 {
                let s = v[p];
                v[parent_pos[p]] += s;
            }
        }
        v
    };
    let delta: Vec<u64> = (0..n).map(|p| vol[p] - w[p * n + p]).collect();
    // (value, a, b) with b == usize::MAX for single edges; first minimum in
    // scan order wins.
    let mut best = (u64::MAX, 0usize, usize::MAX);
    for a in 1..n {
        if delta[a] < best.0 {
            best = (delta[a], a, usize::MAX);
        }
    }
    for a in 1..n {
        let end_a = a + t.size[t.order[a]];
        for b in a + 1..n {
            let v = if b < end_a {
                // b inside a's subtree.
                let inner = w[b * n + a] - w[b * n + b];
                let outer = delta[b] - inner;
                delta[a] + delta[b] - 2 * outer
            } else {
                delta[a] + delta[b] - 2 * w[a * n + b]
            };
            if v < best.0 {
                best = (v, a, b);
            }
        }
    }
    let (value, a, b) = best;
    let mut mask = vec![false; n];
    let sub = |p: usize| p..p + t.size[t.order[p]];
    for p in sub(a) {
        mask[t.order[p]] = true;
    }
    let mut cut_edges = vec![t.parent_edge[t.order[a]]];
    if b != usize::MAX {
        let nested = b < a + t.size[t.order[a]];
        for p in sub(b) {
            mask[t.order[p]] = !nested;
        }
        cut_edges.push(t.parent_edge[t.order[b]]);
    }
    cut_edges.sort_unstable();
    let witness = Cut::from_mask(g, &mask)?;
    debug_assert_eq!(witness.weight, value);
    Ok(TwoRespectAnswer { value, witness, tree_edges_cut: cut_edges })
}

/// Reference answer: remove every single tree edge and every pair, and
/// evaluate the resulting cuts directly.
pub fn brute_force_two_respecting(
    g: &WeightedMultigraph,
    tree: &[(VertexId, VertexId)],
) -> Result<TwoRespectAnswer, PipelineError> {
    let n = g.vertex_count();
    if n < 2 {
        return Err(PipelineError::TooSmall(n));
    }
    root_tree(n, tree)?;
    let side_of = |removed: &[usize]| -> Vec<usize> {
        let mut uf = UnionFind::new(n);
        for (i, &(u, v)) in tree.iter().enumerate() {
            if !removed.contains(&i) {
                uf.union(u, v);
            }
        }
        (0..n).map(|x| uf.find(x)).collect()
    };
    let mut best: Option<TwoRespectAnswer> = None;
    let mut consider = |mask: Vec<bool>, edges: Vec<usize>| {
        let value = cut_weight_mask(g, &mask);
        if best.as_ref().map_or(true, |b| value < b.value) {
            best = Some(TwoRespectAnswer { value, witness: Cut::from_mask(g, &mask).unwrap(), tree_edges_cut: edges });
        }
    };
    for i in 0..tree.len() {
        let comp = side_of(&[i]);
        let mask = (0..n).map(|x| comp[x] == comp[tree[i].0]).collect();
        consider(mask, vec![i]);
    }
    for i in 0..tree.len() {
        for j in i + 1..tree.len() {
            let comp = side_of(&[i, j]);
            // The middle component touches both removed edges.
            let ends_i = [comp[tree[i].0], comp[tree[i].1]];
            let ends_j = [comp[tree[j].0], comp[tree[j].1]];
            let mid = ends_i.iter().copied().find(|c| ends_j.contains(c)).unwrap();
            let mask = (0..n).map(|x| comp[x] == mid).collect();
            consider(mask, vec![i, j]);
        }
    }
    Ok(best.expect("a spanning tree on two or more vertices has an edge"))
}
