use std::collections::HashMap;

use dmc_graph::{EdgeId, VertexId, Weight, WeightedMultigraph};
use dmc_sequence::ExpanderSequence;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassSign {
    Plus,
    Minus,
}

impl ClassSign {
    pub fn value(self) -> i64 {
        match self {
            ClassSign::Plus => 1,
            ClassSign::Minus => -1,
        }
    }
}

/// `(i, k, u, v, ∘)` with `u ∈ Uⁱ`, `v ∈ U^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassKey {
    pub level_u: usize,
    pub level_v: usize,
    pub u: VertexId,
    pub v: VertexId,
    pub sign: ClassSign,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeClass {
    pub key: ClassKey,
    /// Positions into `g.edges()`, ascending.
    pub edges: Vec<usize>,
    pub weight: Weight,
    /// Both endpoint degrees are within the cap given to `with_degree_cap`.
    pub in_scope: bool,
    /// `deg_{Gⁱ}(u)` and `deg_{G^k}(v)`.
    pub degree_u: Weight,
    pub degree_v: Weight,
}

/// The sets `E_{ū,v̄,∘}`: edges `e` whose Laplacian pairs the pullbacks of `u`
/// and `v` to `±w(e)`. Level `L` is skipped since its single pullback is `V`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeClassIndex {
    pub classes: Vec<EdgeClass>,
    /// Edge position to the classes containing it.
    pub membership: Vec<Vec<usize>>,
    pub edge_ids: Vec<EdgeId>,
    /// `L + 1`.
    pub level_count: usize,
}

impl EdgeClassIndex {
    /// Marks classes whose endpoint degrees are at most `cap` as in scope
    /// (the `τλ̃/φ` condition); the rest are ignored by the estimator.
    pub fn with_degree_cap(mut self, cap: f64) -> Self {
        for c in &mut self.classes {
            c.in_scope = c.degree_u as f64 <= cap && c.degree_v as f64 <= cap;
        }
        self
    }

    pub fn in_scope_count(&self) -> usize {
        self.classes.iter().filter(|c| c.in_scope).count()
    }

    pub fn max_membership(&self) -> usize {
        self.membership.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn find(&self, key: &ClassKey) -> Option<&EdgeClass> {
        self.classes.iter().find(|c| &c.key == key)
    }
}

pub fn build_edge_classes(g: &WeightedMultigraph, seq: &ExpanderSequence) -> EdgeClassIndex {
    let top = seq.depth();
    let mut lookup: HashMap<ClassKey, usize> = HashMap::new();
    let mut classes: Vec<EdgeClass> = Vec::new();
    let mut membership = vec![Vec::new(); g.edge_count()];
    for (pos, e) in g.edges().iter().enumerate() {
        for i in 0..top {
            let (ai, bi) = (seq.labels[i][e.u], seq.labels[i][e.v]);
            if ai == bi {
                continue;
            }
            for k in 0..top {
                let (ak, bk) = (seq.labels[k][e.u], seq.labels[k][e.v]);
                if ak == bk {
                    continue;
                }
                // 1_ū(a)-1_ū(b) is +1 for u = ai and -1 for u = bi; likewise for v.
                let picks = [
                    (ai, ak, ClassSign::Plus),
                    (ai, bk, ClassSign::Minus),
                    (bi, ak, ClassSign::Minus),
                    (bi, bk, ClassSign::Plus),
                ];
                for (u, v, sign) in picks {
                    let key = ClassKey { level_u: i, level_v: k, u, v, sign };
                    let id = *lookup.entry(key).or_insert_with(|| {
                        classes.push(EdgeClass {
                            key,
                            edges: Vec::new(),
                            weight: 0,
                            in_scope: true,
                            degree_u: seq.levels[i].graph.degree(u),
                            degree_v: seq.levels[k].graph.degree(v),
                        });
                        classes.len() - 1
                    });
                    classes[id].edges.push(pos);
                    classes[id].weight += e.w;
                    membership[pos].push(id);
                }
            }
        }
    }
    EdgeClassIndex {
        classes,
        membership,
        edge_ids: g.edges().iter().map(|e| e.id).collect(),
        level_count: top + 1,
    }
}
