//! The alignment criterion for existence of a Néron model.
//!
//! A labelled graph is aligned when any two edges lying on a common circuit
//! carry parallel labels. Two distinct non-loop edges lie on a common circuit
//! exactly when they share a biconnected block, so the check reduces to
//! comparing every label of a block against one representative.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{GraphError, LabelledGraph};

#[derive(Debug, Error)]
pub enum AlignmentError {
    #[error("stratum enumeration supports at most {limit} parameters, graph has {params}")]
    TooManyParameters { params: usize, limit: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A circuit (as an ordered list of edge ids) through two edges with
/// non-parallel labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub circuit: Vec<String>,
    pub pair: (String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlignmentVerdict {
    pub aligned: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl AlignmentVerdict {
    fn aligned() -> Self {
        AlignmentVerdict {
            aligned: true,
            witness: None,
        }
    }

    fn violated(g: &LabelledGraph, circuit: &[usize], pair: (usize, usize)) -> Self {
        let id = |e: usize| g.edges()[e].id.clone();
        AlignmentVerdict {
            aligned: false,
            witness: Some(Witness {
                circuit: circuit.iter().map(|&e| id(e)).collect(),
                pair: (id(pair.0), id(pair.1)),
            }),
        }
    }
}

pub fn is_aligned(g: &LabelledGraph) -> AlignmentVerdict {
    let edges = g.edges();
    for block in g.biconnected_blocks() {
        let Some((&rep, rest)) = block.split_first() else {
            continue;
        };
        for &other in rest {
            let parallel = edges[rep]
                .label
                .parallel(&edges[other].label)
                .expect("labels of one graph share a parameter set");
            if !parallel {
                let circuit = circuit_through(g.num_vertices(), &g.ends(), &block, rep, other);
                return AlignmentVerdict::violated(g, &circuit, (rep, other));
            }
        }
    }
    AlignmentVerdict::aligned()
}

/// Checks every pair of edges on every circuit. Test oracle for [`is_aligned`].
pub fn is_aligned_bruteforce(
    g: &LabelledGraph,
    max_edges: usize,
) -> Result<AlignmentVerdict, GraphError> {
    let edges = g.edges();
    for circuit in g.enumerate_circuits(max_edges)? {
        for (i, &a) in circuit.iter().enumerate() {
            for &b in &circuit[i + 1..] {
                let parallel = edges[a]
                    .label
                    .parallel(&edges[b].label)
                    .expect("labels of one graph share a parameter set");
                if !parallel {
                    return Ok(AlignmentVerdict::violated(g, &circuit, (a, b)));
                }
            }
        }
    }
    Ok(AlignmentVerdict::aligned())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StratumReport {
    /// Parameters that stay non-invertible on this stratum.
    pub keep: Vec<String>,
    pub aligned: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NeronReport {
    pub exists: bool,
    pub strata: Vec<StratumReport>,
}

impl NeronReport {
    pub fn failing(&self) -> impl Iterator<Item = &StratumReport> {
        self.strata.iter().filter(|s| !s.aligned)
    }
}

/// Alignment of every specialization `specialize(g, K)`, `K` ranging over
/// all subsets of the parameters (ordered by bitmask).
pub fn neron_model_exists(
    g: &LabelledGraph,
    max_params: usize,
) -> Result<NeronReport, AlignmentError> {
    let k = g.params().len();
    if k > max_params || k >= 64 {
        return Err(AlignmentError::TooManyParameters {
            params: k,
            limit: max_params.min(63),
        });
    }
    let strata = (0..1u64 << k)
        .into_par_iter()
        .map(|mask| {
            let keep = g.params().restrict_mask(mask);
            let fibre = g.specialize(&keep)?;
            let verdict = is_aligned(&fibre);
            Ok(StratumReport {
                keep: keep.names().to_vec(),
                aligned: verdict.aligned,
                witness: verdict.witness,
            })
        })
        .collect::<Result<Vec<_>, GraphError>>()?;
    Ok(NeronReport {
        exists: strata.iter().all(|s| s.aligned),
        strata,
    })
}

/// A circuit through edges `e` and `f` of a common biconnected block.
///
/// Both edges are subdivided by new vertices `x` and `y`; two internally
/// vertex-disjoint `x`-`y` paths (unit vertex capacities, two augmenting
/// paths) close up into the circuit.
fn circuit_through(
    n: usize,
    ends: &[(usize, usize)],
    block: &[usize],
    e: usize,
    f: usize,
) -> Vec<usize> {
    #[derive(Clone, Copy, PartialEq)]
    enum Via {
        Edge(usize),
        HalfE,
        HalfF,
    }
    let (x, y) = (n, n + 1);
    let mut local: Vec<(usize, usize, Via)> = block
        .iter()
        .filter(|&&g| g != e && g != f)
        .map(|&g| (ends[g].0, ends[g].1, Via::Edge(g)))
        .collect();
    local.push((x, ends[e].0, Via::HalfE));
    local.push((x, ends[e].1, Via::HalfE));
    local.push((y, ends[f].0, Via::HalfF));
    local.push((y, ends[f].1, Via::HalfF));

    let mut net = FlowNet::new(2 * (n + 2));
    let (vin, vout) = (|v: usize| 2 * v, |v: usize| 2 * v + 1);
    for v in 0..n + 2 {
        let cap = if v == x || v == y { 2 } else { 1 };
        net.add_arc(vin(v), vout(v), cap, None);
    }
    for (i, &(a, b, _)) in local.iter().enumerate() {
        net.add_arc(vout(a), vin(b), 1, Some((i, false)));
        net.add_arc(vout(b), vin(a), 1, Some((i, true)));
    }
    let flow = net.max_flow(vout(x), vin(y), 2);
    assert_eq!(flow, 2, "edges of one block lie on a common circuit");

    // used[i] = direction of flow across local edge i, cancelling 2-cycles
    let mut used: Vec<Option<bool>> = vec![None; local.len()];
    for arcs in &net.arcs {
        for arc in arcs {
            if let Some((i, rev)) = arc.edge {
                if arc.cap == 0 {
                    used[i] = match used[i] {
                        None => Some(rev),
                        Some(_) => None,
                    };
                }
            }
        }
    }
    let mut paths: Vec<Vec<usize>> = Vec::new();
    let mut taken = vec![false; local.len()];
    for _ in 0..2 {
        let mut path = Vec::new();
        let mut at = x;
        while at != y {
            let i = (0..local.len())
                .find(|&i| {
                    !taken[i]
                        && match used[i] {
                            Some(false) => local[i].0 == at,
                            Some(true) => local[i].1 == at,
                            None => false,
                        }
                })
                .expect("flow decomposes into paths");
            taken[i] = true;
            path.push(i);
            at = if used[i] == Some(false) {
                local[i].1
            } else {
                local[i].0
            };
        }
        paths.push(path);
    }

    let inner = |p: &[usize]| -> Vec<usize> {
        p[1..p.len() - 1]
            .iter()
            .map(|&i| match local[i].2 {
                Via::Edge(g) => g,
                _ => unreachable!("halves only touch x and y"),
            })
            .collect()
    };
    let mut circuit = inner(&paths[0]);
    circuit.push(f);
    circuit.extend(inner(&paths[1]).into_iter().rev());
    circuit.push(e);
    circuit
}

struct Arc {
    to: usize,
    cap: u32,
    rev: usize,
    /// Local edge index and direction for arcs that model a graph edge.
    edge: Option<(usize, bool)>,
}

struct FlowNet {
    arcs: Vec<Vec<Arc>>,
}

impl FlowNet {
    fn new(nodes: usize) -> Self {
        FlowNet {
            arcs: (0..nodes).map(|_| Vec::new()).collect(),
        }
    }

    fn add_arc(&mut self, from: usize, to: usize, cap: u32, edge: Option<(usize, bool)>) {
        let (rf, rt) = (self.arcs[to].len(), self.arcs[from].len());
        self.arcs[from].push(Arc {
            to,
            cap,
            rev: rf,
            edge,
        });
        self.arcs[to].push(Arc {
            to: from,
            cap: 0,
            rev: rt,
            edge: None,
        });
    }

    /// Breadth-first augmenting paths, stopping once `want` units flow.
    fn max_flow(&mut self, s: usize, t: usize, want: u32) -> u32 {
        let mut total = 0;
        while total < want {
            let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.arcs.len()];
            let mut queue = std::collections::VecDeque::from([s]);
            let mut seen = vec![false; self.arcs.len()];
            seen[s] = true;
            while let Some(u) = queue.pop_front() {
                for (k, a) in self.arcs[u].iter().enumerate() {
                    if a.cap > 0 && !seen[a.to] {
                        seen[a.to] = true;
                        prev[a.to] = Some((u, k));
                        queue.push_back(a.to);
                    }
                }
            }
            if !seen[t] {
                break;
            }
            let mut v = t;
            while let Some((u, k)) = prev[v] {
                self.arcs[u][k].cap -= 1;
                let rev = self.arcs[u][k].rev;
                self.arcs[v][rev].cap += 1;
                v = u;
            }
            total += 1;
        }
        total
    }
}
