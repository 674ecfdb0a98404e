//! Python bindings: labelled and weighted graphs, component groups, degree
//! and torsion bounds, and integer normal forms.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use aligned_graphs::cli::{report_json, ReportFlags};
use aligned_graphs::lattice::{self, IntMatrix};
use aligned_graphs::nmodel::{self, DegreeScope};
use aligned_graphs::torsion::{self, BoundQuery};
use aligned_graphs::{alignment, InvariantFactors, LabelledGraph, Limits, TraitWeights, WeightedGraph};

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn limits(unsafe_limits: bool) -> Limits {
    if unsafe_limits {
        Limits::unlimited()
    } else {
        Limits::default()
    }
}

fn parse_scope(scope: &str) -> PyResult<DegreeScope> {
    match scope {
        "original" => Ok(DegreeScope::Original),
        "subdivided" => Ok(DegreeScope::Subdivided),
        other => Err(value_error(format!("scope must be `original` or `subdivided`, got `{other}`"))),
    }
}

/// A finitely generated abelian group `Z^r x Z/d_1 x ... x Z/d_k`.
#[pyclass(name = "Group", frozen, module = "aligned_graphs_py")]
struct PyGroup(InvariantFactors);

#[pymethods]
impl PyGroup {
    /// Invariant factors `d_1 | d_2 | ...`, all greater than one.
    #[getter]
    fn factors(&self) -> Vec<BigUint> {
        self.0.factors.clone()
    }

    #[getter]
    fn free_rank(&self) -> usize {
        self.0.free_rank
    }

    /// Group order, or `None` for an infinite group.
    #[getter]
    fn order(&self) -> Option<BigUint> {
        self.0.order()
    }

    fn is_trivial(&self) -> bool {
        self.0.is_trivial()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Group('{}')", self.0)
    }

    fn __eq__(&self, other: PyRef<'_, PyGroup>) -> bool {
        self.0 == other.0
    }
}

/// A labelled dual graph.
#[pyclass(name = "Graph", frozen, module = "aligned_graphs_py")]
struct PyGraph(LabelledGraph);

#[pymethods]
impl PyGraph {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        LabelledGraph::from_json_str(text).map(PyGraph).map_err(value_error)
    }

    /// Canonical JSON (sorted ids and keys).
    fn to_json(&self) -> String {
        self.0.to_json_string()
    }

    #[getter]
    fn parameters(&self) -> Vec<String> {
        self.0.params().names().to_vec()
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.0.num_vertices()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.0.num_edges()
    }

    fn betti1(&self) -> u64 {
        self.0.betti1()
    }

    fn jacobian_dimension(&self) -> u64 {
        self.0.jacobian_dimension()
    }

    /// Problems that make the graph unusable; empty when valid.
    fn validate(&self) -> Vec<String> {
        self.0.validate().iter().map(ToString::to_string).collect()
    }

    /// One of `Tree`, `Treelike`, `AlignedNotTreelike`, `NotAligned`.
    fn classify(&self) -> String {
        self.0.classify().to_string()
    }

    fn is_aligned(&self) -> bool {
        alignment::is_aligned(&self.0).aligned
    }

    /// `(circuit, (e, f))` with `e`, `f` non-parallel edges on `circuit`, or
    /// `None` when the graph is aligned.
    fn alignment_witness(&self) -> Option<(Vec<String>, (String, String))> {
        alignment::is_aligned(&self.0).witness.map(|w| (w.circuit, w.pair))
    }

    #[pyo3(signature = (unsafe_limits = false))]
    fn neron_model_exists(&self, unsafe_limits: bool) -> PyResult<bool> {
        alignment::neron_model_exists(&self.0, limits(unsafe_limits).strata_params)
            .map(|r| r.exists)
            .map_err(value_error)
    }

    /// Parameter sets `K` whose stratum graph is not aligned.
    #[pyo3(signature = (unsafe_limits = false))]
    fn failing_strata(&self, unsafe_limits: bool) -> PyResult<Vec<Vec<String>>> {
        let report = alignment::neron_model_exists(&self.0, limits(unsafe_limits).strata_params).map_err(value_error)?;
        Ok(report.failing().map(|s| s.keep.clone()).collect())
    }

    /// The graph over the stratum where only `keep` stay non-invertible.
    fn specialize(&self, keep: Vec<String>) -> PyResult<PyGraph> {
        let keep = self.0.params().restrict(&keep).map_err(value_error)?;
        self.0.specialize(&keep).map(PyGraph).map_err(value_error)
    }

    /// Pull back along a trait; parameters missing from `weights` get 1.
    #[pyo3(signature = (weights = None))]
    fn pull_back(&self, weights: Option<BTreeMap<String, BigUint>>) -> PyResult<PyWeightedGraph> {
        let w = TraitWeights::from_pairs(weights.unwrap_or_default())
            .and_then(|w| w.complete(self.0.params()))
            .map_err(value_error)?;
        nmodel::pull_back(&self.0, &w).map(PyWeightedGraph).map_err(value_error)
    }

    /// The full pipeline report as JSON text, as printed by `aligned-graphs report`.
    #[pyo3(signature = (weights = None, scope = "original", unsafe_limits = false))]
    fn report(&self, weights: Option<String>, scope: &str, unsafe_limits: bool) -> PyResult<String> {
        let flags = ReportFlags {
            weights,
            scope: parse_scope(scope)?,
            ..ReportFlags::default()
        };
        Ok(report_json(&self.0, &flags, &limits(unsafe_limits)))
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph({} vertices, {} edges, {})",
            self.0.num_vertices(),
            self.0.num_edges(),
            self.0.classify()
        )
    }
}

/// A graph with positive edge thicknesses (a fibre over a trait).
#[pyclass(name = "WeightedGraph", frozen, module = "aligned_graphs_py")]
struct PyWeightedGraph(WeightedGraph);

#[pymethods]
impl PyWeightedGraph {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        WeightedGraph::from_json_str(text).map(PyWeightedGraph).map_err(value_error)
    }

    /// Vertices `v0..v{n-1}`; edges `(u, v, thickness)` named `e0, e1, ...`.
    #[staticmethod]
    fn from_thicknesses(n: usize, edges: Vec<(usize, usize, u64)>) -> PyResult<Self> {
        WeightedGraph::from_thicknesses(n, &edges).map(PyWeightedGraph).map_err(value_error)
    }

    fn to_json(&self) -> String {
        self.0.to_json_string()
    }

    fn thicknesses(&self) -> Vec<(String, BigUint)> {
        self.0.edges().iter().map(|e| (e.id.clone(), e.thickness.clone())).collect()
    }

    #[pyo3(signature = (unsafe_limits = false))]
    fn critical_group(&self, unsafe_limits: bool) -> PyResult<PyGroup> {
        nmodel::critical_group(&self.0, &limits(unsafe_limits)).map(PyGroup).map_err(value_error)
    }

    fn quotient_component_group(&self) -> PyResult<PyGroup> {
        nmodel::quotient_component_group(&self.0).map(PyGroup).map_err(value_error)
    }

    /// Weighted spanning-tree count, the order of the critical group.
    #[pyo3(signature = (unsafe_limits = false))]
    fn kirchhoff_order(&self, unsafe_limits: bool) -> PyResult<BigUint> {
        nmodel::kirchhoff_order(&self.0, limits(unsafe_limits).kirchhoff_edges).map_err(value_error)
    }

    #[pyo3(signature = (scope = "original", unsafe_limits = false))]
    fn degree_bound(&self, scope: &str, unsafe_limits: bool) -> PyResult<u64> {
        nmodel::degree_bound(&self.0, parse_scope(scope)?, &limits(unsafe_limits))
            .map(|b| b.bound)
            .map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!(
            "WeightedGraph({} vertices, {} edges)",
            self.0.num_vertices(),
            self.0.num_edges()
        )
    }
}

/// `floor((sqrt(q) + 1)^(2g))` for a prime power `q`.
#[pyfunction]
fn bound_b(g: u64, q: u64) -> PyResult<BigUint> {
    torsion::bound_b(g, q).map_err(value_error)
}

/// Bound on the order of torsion values at points of degree at most `d`
/// with good reduction away from `n`.
#[pyfunction]
#[pyo3(signature = (g, n = 1, d = 1))]
fn torsion_order_bound(g: u64, n: u64, d: u32) -> PyResult<BigUint> {
    let query = BoundQuery::new(g, n, d).map_err(value_error)?;
    torsion::torsion_order_bound(&query).map(|t| t.bound).map_err(value_error)
}

type Rows = Vec<Vec<BigInt>>;

fn matrix(rows: Rows) -> PyResult<IntMatrix> {
    let cols = rows.first().map_or(0, Vec::len);
    IntMatrix::from_rows(cols, &rows).map_err(value_error)
}

/// `(U, D, V)` with `U * M * V = D` in Smith normal form.
#[pyfunction]
fn smith_normal_form(rows: Rows) -> PyResult<(Rows, Rows, Rows)> {
    let s = lattice::smith_normal_form(&matrix(rows)?);
    Ok((s.u.row_vecs(), s.d.row_vecs(), s.v.row_vecs()))
}

/// `(H, U)` with `H = U * M` in row Hermite normal form.
#[pyfunction]
fn hermite_normal_form(rows: Rows) -> PyResult<(Rows, Rows)> {
    let (h, u) = lattice::hermite_normal_form(&matrix(rows)?);
    Ok((h.row_vecs(), u.row_vecs()))
}

#[pymodule]
fn aligned_graphs_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyWeightedGraph>()?;
    m.add_class::<PyGroup>()?;
    m.add_function(wrap_pyfunction!(bound_b, m)?)?;
    m.add_function(wrap_pyfunction!(torsion_order_bound, m)?)?;
    m.add_function(wrap_pyfunction!(smith_normal_form, m)?)?;
    m.add_function(wrap_pyfunction!(hermite_normal_form, m)?)?;
    Ok(())
}
