//! Néron-model combinatorics over a trait.
//!
//! Pulling a labelled graph back along a trait turns each label into a
//! positive integer thickness. From the weighted graph we compute
//!
//! * the critical group of the subdivided graph (a node of thickness `l`
//!   resolves into a chain of `l - 1` exceptional components), which is the
//!   component group of the classical Néron model over the trait;
//! * the component group of `Pic^[0] / closure(unit section)`, presented on
//!   the original components by the congruence-twist lattice `D`;
//! * the least `n` such that multidegrees with all partial degrees in
//!   `[-n, n]` meet every class of that component group.

use std::collections::{BTreeMap, HashSet};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{count_components, GraphError, LabelledGraph, UnionFind};
use crate::json::Exponent;
use crate::labels::ParameterSet;
use crate::lattice::{self, IntMatrix, InvariantFactors, LatticeError, Quotient};
use crate::Limits;

#[derive(Debug, Error)]
pub enum NmodelError {
    #[error("invalid weights: {0}")]
    Weights(String),
    #[error("edge `{0}` has thickness zero")]
    ZeroThickness(String),
    #[error("edge `{0}` does not have unit thickness")]
    NotUnitThickness(String),
    #[error("edge `{edge}` refers to unknown vertex `{vertex}`")]
    UnknownVertex { edge: String, vertex: String },
    #[error("weighted graph is disconnected")]
    Disconnected,
    #[error("{what} needs at most {limit} edges, graph has {edges}")]
    TooManyEdges {
        what: &'static str,
        edges: usize,
        limit: usize,
    },
    #[error("subdivision would have {vertices} vertices, above the limit {limit}")]
    SubdivisionTooLarge { vertices: BigUint, limit: usize },
    #[error("component group has order {order}, above the limit {limit}")]
    GroupTooLarge { order: BigUint, limit: u64 },
    #[error("sup-norm search scanned {limit} vectors without covering every class")]
    ScanLimit { limit: u64 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("malformed weighted graph JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Order of vanishing of each parameter along a trait.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraitWeights(BTreeMap<String, BigUint>);

impl TraitWeights {
    /// Every parameter pulls back to a uniformiser.
    pub fn uniform(params: &ParameterSet) -> Self {
        TraitWeights(
            params
                .names()
                .iter()
                .map(|n| (n.clone(), BigUint::one()))
                .collect(),
        )
    }

    pub fn from_pairs<I, S>(pairs: I) -> Result<Self, NmodelError>
    where
        I: IntoIterator<Item = (S, BigUint)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (name, w) in pairs {
            let name = name.into();
            if w.is_zero() {
                return Err(NmodelError::Weights(format!("weight of `{name}` must be positive")));
            }
            if map.insert(name.clone(), w).is_some() {
                return Err(NmodelError::Weights(format!("`{name}` given twice")));
            }
        }
        Ok(TraitWeights(map))
    }

    /// Parses `x=1,y=2`.
    pub fn parse(text: &str) -> Result<Self, NmodelError> {
        let mut pairs = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| NmodelError::Weights(format!("expected name=value, got `{item}`")))?;
            let value: BigUint = value
                .trim()
                .parse()
                .map_err(|_| NmodelError::Weights(format!("`{value}` is not a positive integer")))?;
            pairs.push((name.trim().to_string(), value));
        }
        TraitWeights::from_pairs(pairs)
    }

    /// Fills parameters missing from the map with weight 1; rejects names
    /// outside `params`.
    pub fn complete(&self, params: &ParameterSet) -> Result<TraitWeights, NmodelError> {
        if let Some(extra) = self.0.keys().find(|k| params.index_of(k).is_none()) {
            return Err(NmodelError::Weights(format!("unknown parameter `{extra}`")));
        }
        let mut full = TraitWeights::uniform(params);
        for (k, v) in &self.0 {
            full.0.insert(k.clone(), v.clone());
        }
        Ok(full)
    }

    pub fn get(&self, name: &str) -> Option<&BigUint> {
        self.0.get(name)
    }

    pub fn as_map(&self) -> &BTreeMap<String, BigUint> {
        &self.0
    }

    /// Weight vector in parameter order; the domain must equal `params`.
    fn vector(&self, params: &ParameterSet) -> Result<Vec<BigUint>, NmodelError> {
        if self.0.len() != params.len() {
            let missing = params.names().iter().find(|n| !self.0.contains_key(*n));
            return Err(NmodelError::Weights(match missing {
                Some(n) => format!("no weight for `{n}`"),
                None => "weights name parameters outside the graph".to_string(),
            }));
        }
        params
            .names()
            .iter()
            .map(|n| {
                self.0
                    .get(n)
                    .cloned()
                    .ok_or_else(|| NmodelError::Weights(format!("no weight for `{n}`")))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightedVertex {
    pub id: String,
    pub genus: u64,
    /// Introduced by subdivision.
    pub exceptional: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightedEdge {
    pub id: String,
    pub ends: (usize, usize),
    pub thickness: BigUint,
}

impl WeightedEdge {
    pub fn is_loop(&self) -> bool {
        self.ends.0 == self.ends.1
    }
}

/// Dual graph of the central fibre over a trait, with node thicknesses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightedGraph {
    vertices: Vec<WeightedVertex>,
    edges: Vec<WeightedEdge>,
}

impl WeightedGraph {
    pub fn new(
        vertices: Vec<WeightedVertex>,
        mut edges: Vec<WeightedEdge>,
    ) -> Result<Self, NmodelError> {
        for e in &mut edges {
            if e.ends.0 >= vertices.len() || e.ends.1 >= vertices.len() {
                return Err(NmodelError::UnknownVertex {
                    edge: e.id.clone(),
                    vertex: format!("#{}", e.ends.0.max(e.ends.1)),
                });
            }
            if e.thickness.is_zero() {
                return Err(NmodelError::ZeroThickness(e.id.clone()));
            }
            if e.ends.0 > e.ends.1 {
                e.ends = (e.ends.1, e.ends.0);
            }
        }
        Ok(WeightedGraph { vertices, edges })
    }

    /// Original vertices `0..n` and edges `(u, v, thickness)` named `v{i}`, `e{k}`.
    pub fn from_thicknesses(n: usize, edges: &[(usize, usize, u64)]) -> Result<Self, NmodelError> {
        let vertices = (0..n)
            .map(|i| WeightedVertex {
                id: format!("v{i}"),
                genus: 0,
                exceptional: false,
            })
            .collect();
        let edges = edges
            .iter()
            .enumerate()
            .map(|(k, &(a, b, t))| WeightedEdge {
                id: format!("e{k}"),
                ends: (a, b),
                thickness: BigUint::from(t),
            })
            .collect();
        WeightedGraph::new(vertices, edges)
    }

    pub fn vertices(&self) -> &[WeightedVertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[WeightedEdge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn ends(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| e.ends).collect()
    }

    pub fn is_connected(&self) -> bool {
        !self.vertices.is_empty() && count_components(self.num_vertices(), &self.ends()) == 1
    }

    pub fn max_thickness(&self) -> BigUint {
        self.edges
            .iter()
            .map(|e| e.thickness.clone())
            .max()
            .unwrap_or_default()
    }

    pub fn from_json_str(s: &str) -> Result<Self, NmodelError> {
        let doc: WeightedGraphDoc = serde_json::from_str(s)?;
        doc.into_graph()
    }

    pub fn to_doc(&self) -> WeightedGraphDoc {
        let mut vertices: Vec<WeightedVertexDoc> = self
            .vertices
            .iter()
            .map(|v| WeightedVertexDoc {
                id: v.id.clone(),
                genus: v.genus,
                exceptional: v.exceptional,
            })
            .collect();
        vertices.sort_by(|a, b| a.id.cmp(&b.id));
        let mut edges: Vec<WeightedEdgeDoc> = self
            .edges
            .iter()
            .map(|e| {
                let mut ends = [
                    self.vertices[e.ends.0].id.clone(),
                    self.vertices[e.ends.1].id.clone(),
                ];
                ends.sort();
                WeightedEdgeDoc {
                    id: e.id.clone(),
                    ends,
                    thickness: Exponent(e.thickness.clone()),
                }
            })
            .collect();
        edges.sort_by(|a, b| a.id.cmp(&b.id));
        WeightedGraphDoc { vertices, edges }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("weighted graphs always serialize")
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedGraphDoc {
    pub vertices: Vec<WeightedVertexDoc>,
    #[serde(default)]
    pub edges: Vec<WeightedEdgeDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedVertexDoc {
    pub id: String,
    #[serde(default)]
    pub genus: u64,
    #[serde(default, skip_serializing_if = "is_false")]
    pub exceptional: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedEdgeDoc {
    pub id: String,
    pub ends: [String; 2],
    pub thickness: Exponent,
}

impl WeightedGraphDoc {
    pub fn into_graph(self) -> Result<WeightedGraph, NmodelError> {
        let vertices: Vec<WeightedVertex> = self
            .vertices
            .into_iter()
            .map(|v| WeightedVertex {
                id: v.id,
                genus: v.genus,
                exceptional: v.exceptional,
            })
            .collect();
        let lookup = |edge: &str, id: &str| {
            vertices
                .iter()
                .position(|v| v.id == id)
                .ok_or_else(|| NmodelError::UnknownVertex {
                    edge: edge.to_string(),
                    vertex: id.to_string(),
                })
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in self.edges {
            let ends = (lookup(&e.id, &e.ends[0])?, lookup(&e.id, &e.ends[1])?);
            edges.push(WeightedEdge {
                id: e.id,
                ends,
                thickness: e.thickness.0,
            });
        }
        WeightedGraph::new(vertices, edges)
    }
}

/// Thickness of each node along the trait: `<label exponents, weights>`.
pub fn pull_back(g: &LabelledGraph, w: &TraitWeights) -> Result<WeightedGraph, NmodelError> {
    let weights = w.vector(g.params())?;
    let vertices = g
        .vertices()
        .iter()
        .map(|v| WeightedVertex {
            id: v.id.clone(),
            genus: v.genus,
            exceptional: false,
        })
        .collect();
    let edges = g
        .edges()
        .iter()
        .map(|e| WeightedEdge {
            id: e.id.clone(),
            ends: e.ends,
            thickness: e
                .label
                .exponents()
                .iter()
                .zip(&weights)
                .map(|(a, b)| a * b)
                .sum(),
        })
        .collect();
    WeightedGraph::new(vertices, edges)
}

/// Largest thickness after pulling back; zero for a graph without edges.
pub fn max_thickness(g: &LabelledGraph, w: &TraitWeights) -> Result<BigUint, NmodelError> {
    Ok(pull_back(g, w)?.max_thickness())
}

/// Replaces each edge of thickness `l` by a chain of `l` unit edges through
/// `l - 1` new exceptional vertices `"{edge}/1" .. "{edge}/{l-1}"`; the
/// chain edges are `"{edge}/1" .. "{edge}/{l}"`. Unit edges keep their id.
pub fn subdivide(wg: &WeightedGraph, max_vertices: usize) -> Result<WeightedGraph, NmodelError> {
    let extra: BigUint = wg
        .edges
        .iter()
        .map(|e| &e.thickness - BigUint::one())
        .sum();
    let total = extra + BigUint::from(wg.num_vertices());
    if total > BigUint::from(max_vertices) {
        return Err(NmodelError::SubdivisionTooLarge {
            vertices: total,
            limit: max_vertices,
        });
    }
    let mut vertices = wg.vertices.clone();
    let mut edges = Vec::new();
    for e in &wg.edges {
        let l = e.thickness.to_usize().expect("bounded by max_vertices");
        if l == 1 {
            edges.push(WeightedEdge {
                thickness: BigUint::one(),
                ..e.clone()
            });
            continue;
        }
        let mut prev = e.ends.0;
        for k in 1..l {
            vertices.push(WeightedVertex {
                id: format!("{}/{k}", e.id),
                genus: 0,
                exceptional: true,
            });
            let next = vertices.len() - 1;
            edges.push(WeightedEdge {
                id: format!("{}/{k}", e.id),
                ends: (prev, next),
                thickness: BigUint::one(),
            });
            prev = next;
        }
        edges.push(WeightedEdge {
            id: format!("{}/{l}", e.id),
            ends: (prev, e.ends.1),
            thickness: BigUint::one(),
        });
    }
    WeightedGraph::new(vertices, edges)
}

/// Graph Laplacian of a graph with unit thicknesses; loops contribute nothing.
pub fn laplacian(wg: &WeightedGraph) -> Result<IntMatrix, NmodelError> {
    let n = wg.num_vertices();
    let mut l = IntMatrix::zeros(n, n);
    for e in &wg.edges {
        if !e.thickness.is_one() {
            return Err(NmodelError::NotUnitThickness(e.id.clone()));
        }
        let (a, b) = e.ends;
        if a == b {
            continue;
        }
        l[(a, a)] += 1;
        l[(b, b)] += 1;
        l[(a, b)] -= 1;
        l[(b, a)] -= 1;
    }
    Ok(l)
}

/// Critical group (graph jacobian) of the subdivision of `wg`: degree-zero
/// divisors modulo the Laplacian image, computed as the cokernel of the
/// reduced Laplacian.
pub fn critical_group(wg: &WeightedGraph, limits: &Limits) -> Result<InvariantFactors, NmodelError> {
    if !wg.is_connected() {
        return Err(NmodelError::Disconnected);
    }
    let sub = subdivide(wg, limits.subdivided_vertices)?;
    let l = laplacian(&sub)?;
    let n = l.rows();
    let mut reduced = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        reduced.push(l.row(i)[..n - 1].to_vec());
    }
    let reduced = IntMatrix::from_rows(n - 1, &reduced)?;
    let group = InvariantFactors::from_diagonal(&lattice::smith_diagonal(&reduced), 0);
    debug_assert!(group.is_finite(), "connected graphs have finite critical group");
    Ok(group)
}

/// Weighted spanning-tree count: sum over spanning trees `T` of the product
/// of thicknesses of the edges outside `T` (loops included).
pub fn kirchhoff_order(wg: &WeightedGraph, max_edges: usize) -> Result<BigUint, NmodelError> {
    if wg.num_edges() > max_edges {
        return Err(NmodelError::TooManyEdges {
            what: "spanning-tree enumeration",
            edges: wg.num_edges(),
            limit: max_edges,
        });
    }
    if !wg.is_connected() {
        return Err(NmodelError::Disconnected);
    }
    let n = wg.num_vertices();
    let m = wg.num_edges();
    let mut total = BigUint::zero();
    for mask in 0u32..1 << m {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let mut uf = UnionFind::new(n);
        let tree = (0..m)
            .filter(|&e| mask >> e & 1 == 1)
            .all(|e| uf.union(wg.edges[e].ends.0, wg.edges[e].ends.1));
        if tree {
            total += (0..m)
                .filter(|&e| mask >> e & 1 == 0)
                .map(|e| &wg.edges[e].thickness)
                .product::<BigUint>();
        }
    }
    Ok(total)
}

/// Generators (rows) of the congruence-twist lattice `D` in `Z^V`.
///
/// For integer `n` on vertices with `thickness(e) | n_u - n_v` on every
/// non-loop edge, the twist has multidegree
/// `d_u = sum over edges e = uv of (n_v - n_u) / thickness(e)`.
/// The admissible `(n, k)` with `n_u - n_v = thickness(e) k_e` form the
/// integer kernel of one linear system; `d` is linear in `k`.
pub fn twist_lattice(wg: &WeightedGraph) -> IntMatrix {
    let n = wg.num_vertices();
    let edges: Vec<&WeightedEdge> = wg.edges.iter().filter(|e| !e.is_loop()).collect();
    let m = edges.len();
    let mut system = IntMatrix::zeros(m, n + m);
    for (k, e) in edges.iter().enumerate() {
        system[(k, e.ends.0)] += 1;
        system[(k, e.ends.1)] -= 1;
        system[(k, n + k)] = -BigInt::from(e.thickness.clone());
    }
    let kernel = lattice::kernel_basis(&system);
    let mut gens = IntMatrix::zeros(kernel.rows(), n);
    for r in 0..kernel.rows() {
        for (k, e) in edges.iter().enumerate() {
            let twist = &kernel[(r, n + k)];
            gens[(r, e.ends.0)] -= twist;
            gens[(r, e.ends.1)] += twist;
        }
    }
    gens
}

fn twist_quotient(wg: &WeightedGraph) -> Result<Quotient, NmodelError> {
    if !wg.is_connected() {
        return Err(NmodelError::Disconnected);
    }
    let ambient = lattice::degree_zero_basis(wg.num_vertices());
    Ok(Quotient::new(&ambient, &twist_lattice(wg))?)
}

/// Component group `Z^V_0 / D` of `Pic^[0] / closure(unit section)` on the
/// vertices of `wg`.
pub fn quotient_component_group(wg: &WeightedGraph) -> Result<InvariantFactors, NmodelError> {
    Ok(twist_quotient(wg)?.invariants())
}

/// Which components the partial degrees are bounded on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DegreeScope {
    /// Components of the fibre over the trait; group `Z^V_0 / D`.
    #[default]
    Original,
    /// All components of the subdivided (regular) model; group is the
    /// critical group of the subdivision.
    Subdivided,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeBound {
    pub bound: u64,
    pub group: InvariantFactors,
    pub scope: DegreeScope,
}

/// The least `n` such that every class of the component group contains a
/// degree-zero multidegree with all entries in `[-n, n]`.
pub fn degree_bound(
    wg: &WeightedGraph,
    scope: DegreeScope,
    limits: &Limits,
) -> Result<DegreeBound, NmodelError> {
    let quotient = match scope {
        DegreeScope::Original => twist_quotient(wg)?,
        DegreeScope::Subdivided => {
            if !wg.is_connected() {
                return Err(NmodelError::Disconnected);
            }
            let sub = subdivide(wg, limits.subdivided_vertices)?;
            let l = laplacian(&sub)?;
            Quotient::new(&lattice::degree_zero_basis(sub.num_vertices()), &l)?
        }
    };
    let group = quotient.invariants();
    let order = group.order().ok_or(LatticeError::Infinite {
        free_rank: group.free_rank,
    })?;
    if order > BigUint::from(limits.coset_order) {
        return Err(NmodelError::GroupTooLarge {
            order,
            limit: limits.coset_order,
        });
    }
    let order = order.to_usize().expect("bounded by the coset limit");
    let dim = quotient.ambient_basis().cols();
    let bound = covering_radius(&quotient, dim, order, limits.degree_scan)?;
    Ok(DegreeBound {
        bound,
        group,
        scope,
    })
}

/// Scans sup-norm shells of `Z^dim_0` until `order` classes have been seen.
fn covering_radius(q: &Quotient, dim: usize, order: usize, budget: u64) -> Result<u64, NmodelError> {
    let mut seen: HashSet<Vec<BigInt>> = HashSet::new();
    let mut scanned = 0u64;
    if dim == 0 {
        return Ok(0);
    }
    for radius in 0i64.. {
        let mut found_all = false;
        let mut x = vec![-radius; dim - 1];
        loop {
            let last: i64 = -x.iter().sum::<i64>();
            let norm = x.iter().map(|v| v.abs()).max().unwrap_or(0).max(last.abs());
            if norm == radius {
                scanned += 1;
                if scanned > budget {
                    return Err(NmodelError::ScanLimit { limit: budget });
                }
                let mut v: Vec<BigInt> = x.iter().map(|&a| BigInt::from(a)).collect();
                v.push(BigInt::from(last));
                let key = q.class_of(&v).expect("degree-zero vectors lie in the ambient lattice");
                seen.insert(key);
                if seen.len() == order {
                    found_all = true;
                    break;
                }
            }
            // odometer over [-radius, radius]^(dim-1)
            let mut i = x.len();
            let mut done = true;
            while i > 0 {
                i -= 1;
                if x[i] < radius {
                    x[i] += 1;
                    done = false;
                    break;
                }
                x[i] = -radius;
            }
            if done {
                break;
            }
        }
        if found_all {
            return Ok(radius as u64);
        }
    }
    unreachable!("the radius loop only exits by returning")
}
