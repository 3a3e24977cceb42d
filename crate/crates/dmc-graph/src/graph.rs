use serde::{Deserialize, Serialize};

use crate::{EdgeId, GraphError, VertexId, Weight};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub u: VertexId,
    pub v: VertexId,
    pub w: Weight,
}

impl Edge {
    /// The endpoint opposite to `x`. Panics if `x` is not an endpoint.
    pub fn other(&self, x: VertexId) -> VertexId {
        if self.u == x {
            self.v
        } else {
            assert_eq!(self.v, x, "vertex {x} is not an endpoint of edge {}", self.id);
            self.u
        }
    }
}

/// Undirected multigraph with positive integer weights.
///
/// Edges keep the id they were created with; after contraction or induction the
/// surviving ids form a sparse subset of the original range. Parallel edges are
/// kept as separate records. Self-loops live in a per-vertex scalar and count
/// toward the degree exactly once, never toward a cut.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphDump", into = "GraphDump")]
pub struct WeightedMultigraph {
    n: usize,
    edges: Vec<Edge>,
    self_loops: Vec<Weight>,
    adj: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct GraphDump {
    vertices: usize,
    edges: Vec<Edge>,
    self_loops: Vec<Weight>,
}

impl TryFrom<GraphDump> for WeightedMultigraph {
    type Error = GraphError;
    fn try_from(d: GraphDump) -> Result<Self, GraphError> {
        let mut b = GraphBuilder::new(d.vertices);
        if d.self_loops.len() != d.vertices {
            return Err(GraphError::DimensionMismatch { expected: d.vertices, got: d.self_loops.len() });
        }
        for (v, &l) in d.self_loops.iter().enumerate() {
            b.add_self_loop(v, l)?;
        }
        for e in d.edges {
            b.add_edge_with_id(e.id, e.u, e.v, e.w)?;
        }
        b.build()
    }
}

impl From<WeightedMultigraph> for GraphDump {
    fn from(g: WeightedMultigraph) -> Self {
        GraphDump { vertices: g.n, edges: g.edges, self_loops: g.self_loops }
    }
}

impl WeightedMultigraph {
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in ascending id order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn self_loop(&self, v: VertexId) -> Weight {
        self.self_loops[v]
    }

    pub fn self_loops(&self) -> &[Weight] {
        &self.self_loops
    }

    /// Non-loop edges incident to `v`.
    pub fn incident(&self, v: VertexId) -> impl Iterator<Item = &Edge> + '_ {
        self.adj[v].iter().map(move |&i| &self.edges[i])
    }

    pub fn edge_by_id(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.binary_search_by_key(&id, |e| e.id).ok().map(|i| &self.edges[i])
    }

    pub fn contains_edge(&self, id: EdgeId) -> bool {
        self.edge_by_id(id).is_some()
    }

    /// Weight of all non-loop edges at `v`.
    pub fn boundary_degree(&self, v: VertexId) -> Weight {
        self.incident(v).map(|e| e.w).sum()
    }

    /// Incident edge weight plus self-loop weight.
    pub fn degree(&self, v: VertexId) -> Weight {
        self.boundary_degree(v) + self.self_loops[v]
    }

    pub fn degrees(&self) -> Vec<Weight> {
        let mut d = self.self_loops.clone();
        for e in &self.edges {
            d[e.u] += e.w;
            d[e.v] += e.w;
        }
        d
    }

    pub fn volume(&self, s: &[VertexId]) -> Weight {
        s.iter().map(|&v| self.degree(v)).sum()
    }

    pub fn total_volume(&self) -> Weight {
        self.degrees().iter().sum()
    }

    pub fn total_edge_weight(&self) -> Weight {
        self.edges.iter().map(|e| e.w).sum()
    }

    pub fn total_self_loop_weight(&self) -> Weight {
        self.self_loops.iter().sum()
    }

    pub fn max_edge_weight(&self) -> Weight {
        self.edges.iter().map(|e| e.w).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> Weight {
        self.degrees().into_iter().min().unwrap_or(0)
    }

    /// Copy with every self-loop removed. Cuts are unaffected.
    pub fn without_self_loops(&self) -> WeightedMultigraph {
        let mut g = self.clone();
        g.self_loops.iter_mut().for_each(|l| *l = 0);
        g
    }

    /// Copy with extra self-loop weight added per vertex.
    pub fn with_added_self_loops(&self, extra: &[Weight]) -> Result<WeightedMultigraph, GraphError> {
        if extra.len() != self.n {
            return Err(GraphError::DimensionMismatch { expected: self.n, got: extra.len() });
        }
        let mut g = self.clone();
        for (l, x) in g.self_loops.iter_mut().zip(extra) {
            *l += x;
        }
        Ok(g)
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<VertexId>> {
        let mut comp = vec![usize::MAX; self.n];
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            let c = out.len();
            let mut members = vec![s];
            comp[s] = c;
            stack.push(s);
            while let Some(x) = stack.pop() {
                for e in self.incident(x) {
                    let y = e.other(x);
                    if comp[y] == usize::MAX {
                        comp[y] = c;
                        members.push(y);
                        stack.push(y);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().len() == 1
    }

    /// Graph induced on `vertices` (in the given order), keeping edge ids and
    /// self-loops. Returns the graph and the local-to-original vertex map.
    pub fn induced(&self, vertices: &[VertexId]) -> Result<(WeightedMultigraph, Vec<VertexId>), GraphError> {
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            if v >= self.n {
                return Err(GraphError::VertexOutOfRange { vertex: v, n: self.n });
            }
            if local[v] != usize::MAX {
                return Err(GraphError::DuplicateVertex(v));
            }
            local[v] = i;
        }
        let mut b = GraphBuilder::new(vertices.len());
        for (i, &v) in vertices.iter().enumerate() {
            b.add_self_loop(i, self.self_loops[v])?;
        }
        for e in &self.edges {
            let (a, c) = (local[e.u], local[e.v]);
            if a != usize::MAX && c != usize::MAX {
                b.add_edge_with_id(e.id, a, c, e.w)?;
            }
        }
        Ok((b.build()?, vertices.to_vec()))
    }

    /// `true` at positions in `s`. Errors on out-of-range vertices.
    pub fn mask(&self, s: &[VertexId]) -> Result<Vec<bool>, GraphError> {
        let mut m = vec![false; self.n];
        for &v in s {
            if v >= self.n {
                return Err(GraphError::VertexOutOfRange { vertex: v, n: self.n });
            }
            m[v] = true;
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<WeightedMultigraph, GraphError> {
        serde_json::from_str(s).map_err(|e| GraphError::Parse { line: 0, msg: e.to_string() })
    }
}

/// Incremental construction. Edge ids are assigned densely unless given.
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    n: usize,
    edges: Vec<Edge>,
    self_loops: Vec<Weight>,
    next_id: EdgeId,
}

impl GraphBuilder {
    pub fn new(n: usize) -> Self {
        GraphBuilder { n, edges: Vec::new(), self_loops: vec![0; n], next_id: 0 }
    }

    fn check(&self, v: VertexId) -> Result<(), GraphError> {
        if v >= self.n {
            Err(GraphError::VertexOutOfRange { vertex: v, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Adds an edge with the next free id and returns it. `u == v` adds to the
    /// self-loop scalar and returns `None`.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId, w: Weight) -> Result<Option<EdgeId>, GraphError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            self.self_loops[u] += w;
            return Ok(None);
        }
        if w == 0 {
            return Err(GraphError::ZeroWeight);
        }
        let id = self.next_id;
        self.edges.push(Edge { id, u, v, w });
        self.next_id += 1;
        Ok(Some(id))
    }

    pub fn add_edge_with_id(&mut self, id: EdgeId, u: VertexId, v: VertexId, w: Weight) -> Result<(), GraphError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(GraphError::LoopEdge(id));
        }
        if w == 0 {
            return Err(GraphError::ZeroWeight);
        }
        self.edges.push(Edge { id, u, v, w });
        self.next_id = self.next_id.max(id + 1);
        Ok(())
    }

    pub fn add_self_loop(&mut self, v: VertexId, w: Weight) -> Result<(), GraphError> {
        self.check(v)?;
        self.self_loops[v] += w;
        Ok(())
    }

    pub fn build(mut self) -> Result<WeightedMultigraph, GraphError> {
        self.edges.sort_by_key(|e| e.id);
        for pair in self.edges.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(GraphError::DuplicateEdgeId(pair[0].id));
            }
        }
        let mut adj = vec![Vec::new(); self.n];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.u].push(i);
            adj[e.v].push(i);
        }
        Ok(WeightedMultigraph { n: self.n, edges: self.edges, self_loops: self.self_loops, adj })
    }
}

impl WeightedMultigraph {
    /// Convenience constructor from `(u, v, w)` triples with dense ids.
    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId, Weight)]) -> Result<WeightedMultigraph, GraphError> {
        let mut b = GraphBuilder::new(n);
        for &(u, v, w) in edges {
            b.add_edge(u, v, w)?;
        }
        b.build()
    }
}
