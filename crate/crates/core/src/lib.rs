//! Combinatorics of Néron models of jacobians of nodal curves.
//!
//! * [`labels`]: monomial edge labels and their parallelism.
//! * [`graph`]: labelled dual graphs, specialization, blocks and circuits.
//! * [`alignment`]: the alignment criterion for existence of a Néron model.
//! * [`lattice`]: Smith and Hermite normal forms and lattice quotients.
//! * [`nmodel`]: pull-back to a trait, component groups and degree bounds.
//! * [`torsion`]: uniform bounds on torsion orders.
//! * [`cli`]: the `aligned-graphs` command line.

pub mod alignment;
pub mod cli;
pub mod graph;
mod json;
pub mod labels;
pub mod lattice;
pub mod nmodel;
pub mod torsion;

pub use alignment::{is_aligned, is_aligned_bruteforce, neron_model_exists, AlignmentVerdict};
pub use graph::{GraphBuilder, GraphClass, LabelledGraph};
pub use json::Exponent;
pub use labels::{Label, ParameterSet};
pub use lattice::{IntMatrix, InvariantFactors};
pub use nmodel::{TraitWeights, WeightedGraph};

/// Size guards for the exponential or expensive routines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Limits {
    /// Edges allowed in brute-force circuit enumeration.
    pub circuit_edges: usize,
    /// Parameters allowed when enumerating all strata.
    pub strata_params: usize,
    /// Largest component group order handled by `degree_bound`.
    pub coset_order: u64,
    /// Largest quotient for which coset representatives are listed.
    pub coset_enumeration: u64,
    /// Edges allowed in spanning-tree enumeration.
    pub kirchhoff_edges: usize,
    /// Vertices allowed in a subdivided graph.
    pub subdivided_vertices: usize,
    /// Vectors scanned by the sup-norm search before giving up.
    pub degree_scan: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            circuit_edges: 12,
            strata_params: 16,
            coset_order: 100_000,
            coset_enumeration: 1_000_000,
            kirchhoff_edges: 10,
            subdivided_vertices: 1_000,
            degree_scan: 50_000_000,
        }
    }
}

impl Limits {
    pub fn unlimited() -> Self {
        Limits {
            circuit_edges: usize::MAX,
            strata_params: 63,
            coset_order: u64::MAX,
            coset_enumeration: u64::MAX,
            kirchhoff_edges: 31,
            subdivided_vertices: usize::MAX,
            degree_scan: u64::MAX,
        }
    }
}
