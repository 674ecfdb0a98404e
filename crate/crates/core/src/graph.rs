//! Labelled dual graphs.
//!
//! Vertices are irreducible components of a fibre (with their geometric
//! genus), edges are nodes carrying a monomial [`Label`]. Loops are allowed.
//! The combinatorial routines at the bottom of this file work on bare
//! endpoint lists so that weighted graphs can share them.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alignment;
use crate::labels::{Label, LabelError, ParameterSet};
use crate::json::Exponent;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error("edge `{edge}` refers to unknown vertex `{vertex}`")]
    UnknownVertex { edge: String, vertex: String },
    #[error("edge `{edge}` has an endpoint index out of range")]
    EndpointOutOfRange { edge: String },
    #[error("edge `{edge}` is labelled over a different parameter set")]
    ForeignLabel { edge: String },
    #[error("{what} needs at most {limit} edges, graph has {edges}")]
    TooManyEdges {
        what: &'static str,
        edges: usize,
        limit: usize,
    },
    #[error("malformed graph JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub id: String,
    pub genus: u64,
}

impl Vertex {
    pub fn new(id: impl Into<String>, genus: u64) -> Self {
        Vertex {
            id: id.into(),
            genus,
        }
    }
}

/// A node of the fibre. `ends` are vertex indices with `ends.0 <= ends.1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub id: String,
    pub ends: (usize, usize),
    pub label: Label,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.ends.0 == self.ends.1
    }
}

/// Problems reported by [`LabelledGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Disconnected { components: usize },
    UnitLabel { edge: String },
    DuplicateVertexId(String),
    DuplicateEdgeId(String),
    NoVertices,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Disconnected { components } => {
                write!(f, "disconnected: {components} connected components")
            }
            Violation::UnitLabel { edge } => write!(f, "unit label on edge `{edge}`"),
            Violation::DuplicateVertexId(id) => write!(f, "duplicate vertex id `{id}`"),
            Violation::DuplicateEdgeId(id) => write!(f, "duplicate edge id `{id}`"),
            Violation::NoVertices => f.write_str("disconnected: graph has no vertices"),
        }
    }
}

impl Violation {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::Disconnected { .. } | Violation::NoVertices => "disconnected",
            Violation::UnitLabel { .. } => "unit label",
            Violation::DuplicateVertexId(_) => "duplicate vertex id",
            Violation::DuplicateEdgeId(_) => "duplicate edge id",
        }
    }
}

/// Coarse shape of a dual graph, ordered from most to least special.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GraphClass {
    Tree,
    Treelike,
    AlignedNotTreelike,
    NotAligned,
}

impl GraphClass {
    pub fn is_aligned(self) -> bool {
        self != GraphClass::NotAligned
    }
}

impl fmt::Display for GraphClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelledGraph {
    params: ParameterSet,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

impl LabelledGraph {
    /// Checks structural well-formedness only (endpoint ranges, label
    /// parameter sets). Semantic problems are left to [`Self::validate`].
    pub fn new(
        params: ParameterSet,
        vertices: Vec<Vertex>,
        mut edges: Vec<Edge>,
    ) -> Result<Self, GraphError> {
        for e in &mut edges {
            if e.ends.0 >= vertices.len() || e.ends.1 >= vertices.len() {
                return Err(GraphError::EndpointOutOfRange { edge: e.id.clone() });
            }
            if e.label.params() != &params {
                return Err(GraphError::ForeignLabel { edge: e.id.clone() });
            }
            if e.ends.0 > e.ends.1 {
                e.ends = (e.ends.1, e.ends.0);
            }
        }
        Ok(LabelledGraph {
            params,
            vertices,
            edges,
        })
    }

    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn ends(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| e.ends).collect()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.vertices.is_empty() {
            out.push(Violation::NoVertices);
        } else {
            let components = count_components(self.num_vertices(), &self.ends());
            if components > 1 {
                out.push(Violation::Disconnected { components });
            }
        }
        for e in &self.edges {
            if e.label.is_unit() {
                out.push(Violation::UnitLabel { edge: e.id.clone() });
            }
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if self.vertices[..i].iter().any(|w| w.id == v.id) {
                out.push(Violation::DuplicateVertexId(v.id.clone()));
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            if self.edges[..i].iter().any(|f| f.id == e.id) {
                out.push(Violation::DuplicateEdgeId(e.id.clone()));
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// The dual graph at a generization where exactly the parameters in
    /// `keep` remain non-invertible.
    ///
    /// Labels are projected to `keep`; edges whose label becomes a unit are
    /// contracted. A merged vertex takes the smallest id of its class and
    /// the genus `sum of genera + first Betti number of the contracted piece`,
    /// so that the arithmetic genus is preserved.
    pub fn specialize(&self, keep: &ParameterSet) -> Result<LabelledGraph, GraphError> {
        if !keep.is_subset_of(&self.params) {
            let missing = keep
                .names()
                .iter()
                .find(|n| self.params.index_of(n).is_none())
                .cloned()
                .unwrap_or_default();
            return Err(LabelError::UnknownParameter(missing).into());
        }
        let projected: Vec<Label> = self
            .edges
            .iter()
            .map(|e| e.label.project(keep))
            .collect::<Result<_, _>>()?;

        let n = self.num_vertices();
        let mut uf = UnionFind::new(n);
        for (e, l) in self.edges.iter().zip(&projected) {
            if l.is_unit() {
                uf.union(e.ends.0, e.ends.1);
            }
        }

        // representative of each class: the member with the smallest id
        let mut rep_of_root: BTreeMap<usize, usize> = BTreeMap::new();
        for v in 0..n {
            let root = uf.find(v);
            let rep = rep_of_root.entry(root).or_insert(v);
            if self.vertices[v].id < self.vertices[*rep].id {
                *rep = v;
            }
        }
        let mut reps: Vec<usize> = rep_of_root.values().copied().collect();
        reps.sort_unstable();
        let new_index: BTreeMap<usize, usize> = reps
            .iter()
            .enumerate()
            .map(|(i, &r)| (uf.find(r), i))
            .collect();

        let mut genus = vec![0u64; reps.len()];
        let mut class_vertices = vec![0u64; reps.len()];
        let mut class_edges = vec![0u64; reps.len()];
        for v in 0..n {
            let c = new_index[&uf.find(v)];
            genus[c] += self.vertices[v].genus;
            class_vertices[c] += 1;
        }
        for (e, l) in self.edges.iter().zip(&projected) {
            if l.is_unit() {
                class_edges[new_index[&uf.find(e.ends.0)]] += 1;
            }
        }
        let vertices = reps
            .iter()
            .enumerate()
            .map(|(c, &r)| {
                let betti = class_edges[c] + 1 - class_vertices[c];
                Vertex::new(self.vertices[r].id.clone(), genus[c] + betti)
            })
            .collect();

        let edges = self
            .edges
            .iter()
            .zip(projected)
            .filter(|(_, l)| !l.is_unit())
            .map(|(e, label)| Edge {
                id: e.id.clone(),
                ends: (
                    new_index[&uf.find(e.ends.0)],
                    new_index[&uf.find(e.ends.1)],
                ),
                label,
            })
            .collect();
        LabelledGraph::new(keep.clone(), vertices, edges)
    }

    /// Edge-index blocks: loops and bridges are singletons.
    pub fn biconnected_blocks(&self) -> Vec<Vec<usize>> {
        biconnected_blocks(self.num_vertices(), &self.ends())
    }

    /// All circuits as edge-index sequences, each once up to rotation and
    /// reflection. Refuses graphs with more than `max_edges` edges.
    pub fn enumerate_circuits(&self, max_edges: usize) -> Result<Vec<Vec<usize>>, GraphError> {
        if self.num_edges() > max_edges {
            return Err(GraphError::TooManyEdges {
                what: "circuit enumeration",
                edges: self.num_edges(),
                limit: max_edges,
            });
        }
        Ok(enumerate_circuits(self.num_vertices(), &self.ends()))
    }

    pub fn classify(&self) -> GraphClass {
        let blocks = self.biconnected_blocks();
        let has_loop = self.edges.iter().any(Edge::is_loop);
        let all_bridges = blocks.iter().all(|b| b.len() == 1);
        if all_bridges && !has_loop {
            GraphClass::Tree
        } else if all_bridges {
            GraphClass::Treelike
        } else if alignment::is_aligned(self).aligned {
            GraphClass::AlignedNotTreelike
        } else {
            GraphClass::NotAligned
        }
    }

    /// First Betti number; assumes the graph is connected.
    pub fn betti1(&self) -> u64 {
        (self.num_edges() + 1).saturating_sub(self.num_vertices()) as u64
    }

    /// Dimension of the jacobian of the fibre: `b_1 + sum of genera`.
    pub fn jacobian_dimension(&self) -> u64 {
        self.betti1() + self.vertices.iter().map(|v| v.genus).sum::<u64>()
    }

    pub fn from_json_str(s: &str) -> Result<Self, GraphError> {
        let doc: GraphDoc = serde_json::from_str(s)?;
        doc.into_graph()
    }

    pub fn to_doc(&self) -> GraphDoc {
        let mut vertices: Vec<VertexDoc> = self
            .vertices
            .iter()
            .map(|v| VertexDoc {
                id: v.id.clone(),
                genus: v.genus,
            })
            .collect();
        vertices.sort_by(|a, b| a.id.cmp(&b.id));
        let mut edges: Vec<EdgeDoc> = self
            .edges
            .iter()
            .map(|e| {
                let mut ends = [
                    self.vertices[e.ends.0].id.clone(),
                    self.vertices[e.ends.1].id.clone(),
                ];
                ends.sort();
                EdgeDoc {
                    id: e.id.clone(),
                    ends,
                    label: e
                        .label
                        .to_map()
                        .into_iter()
                        .map(|(k, v)| (k, Exponent(v)))
                        .collect(),
                }
            })
            .collect();
        edges.sort_by(|a, b| a.id.cmp(&b.id));
        GraphDoc {
            parameters: self.params.names().to_vec(),
            vertices,
            edges,
        }
    }

    /// Canonical JSON text: vertices, edges and endpoints sorted by id.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("graph documents always serialize")
    }
}

/// Serialized form of a [`LabelledGraph`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    #[serde(default)]
    pub parameters: Vec<String>,
    pub vertices: Vec<VertexDoc>,
    #[serde(default)]
    pub edges: Vec<EdgeDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDoc {
    pub id: String,
    #[serde(default)]
    pub genus: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub id: String,
    pub ends: [String; 2],
    #[serde(default)]
    pub label: BTreeMap<String, Exponent>,
}

impl GraphDoc {
    pub fn into_graph(self) -> Result<LabelledGraph, GraphError> {
        let params = ParameterSet::new(self.parameters)?;
        let vertices: Vec<Vertex> = self
            .vertices
            .into_iter()
            .map(|v| Vertex::new(v.id, v.genus))
            .collect();
        let lookup = |edge: &str, id: &str| {
            vertices
                .iter()
                .position(|v| v.id == id)
                .ok_or_else(|| GraphError::UnknownVertex {
                    edge: edge.to_string(),
                    vertex: id.to_string(),
                })
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in self.edges {
            let ends = (lookup(&e.id, &e.ends[0])?, lookup(&e.id, &e.ends[1])?);
            let label = Label::from_map(
                params.clone(),
                e.label.iter().map(|(k, v)| (k.as_str(), v.0.clone())),
            )?;
            edges.push(Edge {
                id: e.id,
                ends,
                label,
            });
        }
        LabelledGraph::new(params, vertices, edges)
    }
}

/// Edge id, endpoint ids and label entries, resolved in [`GraphBuilder::build`].
type PendingEdge = (String, String, String, Vec<(String, BigUint)>);

/// Convenience constructor for graphs written out in code.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    params: Vec<String>,
    vertices: Vec<Vertex>,
    edges: Vec<PendingEdge>,
}

impl GraphBuilder {
    pub fn new<I, S>(params: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        GraphBuilder {
            params: params.into_iter().map(Into::into).collect(),
            vertices: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn vertex(self, id: &str) -> Self {
        self.vertex_with_genus(id, 0)
    }

    pub fn vertex_with_genus(mut self, id: &str, genus: u64) -> Self {
        self.vertices.push(Vertex::new(id, genus));
        self
    }

    pub fn edge(mut self, id: &str, u: &str, v: &str, label: &[(&str, u64)]) -> Self {
        self.edges.push((
            id.to_string(),
            u.to_string(),
            v.to_string(),
            label
                .iter()
                .map(|(n, e)| (n.to_string(), BigUint::from(*e)))
                .collect(),
        ));
        self
    }

    pub fn build(self) -> Result<LabelledGraph, GraphError> {
        GraphDoc {
            parameters: self.params,
            vertices: self
                .vertices
                .into_iter()
                .map(|v| VertexDoc {
                    id: v.id,
                    genus: v.genus,
                })
                .collect(),
            edges: self
                .edges
                .into_iter()
                .map(|(id, u, v, label)| EdgeDoc {
                    id,
                    ends: [u, v],
                    label: label.into_iter().map(|(k, e)| (k, Exponent(e))).collect(),
                })
                .collect(),
        }
        .into_graph()
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

pub(crate) fn count_components(n: usize, ends: &[(usize, usize)]) -> usize {
    let mut uf = UnionFind::new(n);
    let merges = ends.iter().filter(|&&(a, b)| uf.union(a, b)).count();
    n - merges
}

/// Adjacency lists `(edge, neighbour)` without loops.
fn adjacency(n: usize, ends: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); n];
    for (e, &(a, b)) in ends.iter().enumerate() {
        if a != b {
            adj[a].push((e, b));
            adj[b].push((e, a));
        }
    }
    adj
}

/// Partition of the edge indices into biconnected blocks (Hopcroft-Tarjan
/// with an edge stack). Blocks are sorted internally and by first edge.
pub fn biconnected_blocks(n: usize, ends: &[(usize, usize)]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let adj = adjacency(n, ends);
    let mut disc = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut time = 0;
    let mut edge_stack: Vec<usize> = Vec::new();
    let mut blocks: Vec<Vec<usize>> = ends
        .iter()
        .enumerate()
        .filter(|(_, (a, b))| a == b)
        .map(|(e, _)| vec![e])
        .collect();

    // frames: (vertex, edge to parent, next adjacency position)
    let mut frames: Vec<(usize, usize, usize)> = Vec::new();
    for root in 0..n {
        if disc[root] != UNSEEN {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        frames.push((root, UNSEEN, 0));
        while let Some(top) = frames.last_mut() {
            let (u, parent_edge) = (top.0, top.1);
            if let Some(&(e, w)) = adj[u].get(top.2) {
                top.2 += 1;
                if e == parent_edge {
                    continue;
                }
                if disc[w] == UNSEEN {
                    edge_stack.push(e);
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    frames.push((w, e, 0));
                } else if disc[w] < disc[u] {
                    edge_stack.push(e);
                    low[u] = low[u].min(disc[w]);
                }
            } else {
                frames.pop();
                if let Some(&(p, _, _)) = frames.last() {
                    low[p] = low[p].min(low[u]);
                    if low[u] >= disc[p] {
                        let mut block = Vec::new();
                        while let Some(f) = edge_stack.pop() {
                            block.push(f);
                            if f == parent_edge {
                                break;
                            }
                        }
                        blocks.push(block);
                    }
                }
            }
        }
    }
    for b in &mut blocks {
        b.sort_unstable();
    }
    blocks.sort();
    blocks
}

/// Simple circuits of a multigraph. Loops are length-1 circuits; every other
/// circuit is reported once, starting at its smallest vertex, oriented so
/// that its first edge index is below its last.
pub fn enumerate_circuits(n: usize, ends: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let adj = adjacency(n, ends);
    let mut out: Vec<Vec<usize>> = ends
        .iter()
        .enumerate()
        .filter(|(_, (a, b))| a == b)
        .map(|(e, _)| vec![e])
        .collect();

    fn extend(
        s: usize,
        v: usize,
        adj: &[Vec<(usize, usize)>],
        on_path: &mut [bool],
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        for &(e, w) in &adj[v] {
            if path.contains(&e) {
                continue;
            }
            if w == s {
                if path[0] < e {
                    let mut c = path.clone();
                    c.push(e);
                    out.push(c);
                }
            } else if w > s && !on_path[w] {
                on_path[w] = true;
                path.push(e);
                extend(s, w, adj, on_path, path, out);
                path.pop();
                on_path[w] = false;
            }
        }
    }

    let mut on_path = vec![false; n];
    let mut path = Vec::new();
    for s in 0..n {
        for &(e, w) in &adj[s] {
            if w > s {
                on_path[w] = true;
                path.push(e);
                extend(s, w, &adj, &mut on_path, &mut path, &mut out);
                path.pop();
                on_path[w] = false;
            }
        }
    }
    out
}
