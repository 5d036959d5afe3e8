//! Python bindings.
//!
//! Graphs and step kernels cross the boundary as real classes; structured
//! reports (screening, certificates, verification, counterexamples) cross
//! as JSON strings with the same schemas the command-line tool prints, so
//! the Python side needs no mirrored type definitions.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use domcert::certify::{
    certify as certify_graph, verify_certificate, CertInvolution, Certificate, CertMode,
    CertifyOptions, CertifyOutcome, VerifyOptions,
};
use domcert::constructions::{self, BipartitionSide, CoxeterSpec};
use domcert::falsify::{explore_ball_domination, falsify as falsify_pair, FalsifyTask};
use domcert::graph::is_isomorphic;
use domcert::graphon::{
    self, density_step, domination_margin as margin_fn, ratio_string, StepGraphon,
};
use domcert::involution::find_cut_involutions;
use domcert::screening::screen as screen_graph;
use domcert::{DomcertError, Graph};

/// Bad inputs become `ValueError`; caps, budgets, and internal failures
/// become `RuntimeError`.
fn err(e: DomcertError) -> PyErr {
    use DomcertError::*;
    match &e {
        BadGraph(_) | BadGraphon(_) | BadParams(_) | HostMismatch(_) | BadCertificate(_)
        | BadSignatureIndex { .. } | HashMismatch { .. } | Json(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_json_value<T: serde::Serialize>(value: &T) -> PyResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Finite simple graph with a fixed vertex order and lexicographic edge
/// indexing.
#[pyclass(frozen, skip_from_py_object, name = "Graph", module = "domcert_py")]
#[derive(Clone)]
pub struct PyGraph {
    inner: Arc<Graph>,
}

impl PyGraph {
    fn wrap(g: Graph) -> Self {
        PyGraph { inner: Arc::new(g) }
    }
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(PyGraph::wrap(Graph::new(n, &edges).map_err(err)?))
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(PyGraph::wrap(Graph::from_json(s).map_err(err)?))
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().to_vec()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn degree(&self, v: usize) -> PyResult<usize> {
        if v >= self.inner.n() {
            return Err(PyValueError::new_err(format!(
                "vertex {v} out of range for a graph on {} vertices",
                self.inner.n()
            )));
        }
        Ok(self.inner.degree(v))
    }

    /// Canonical content hash; certificates are bound to it.
    fn sha256(&self) -> String {
        self.inner.sha256_hex()
    }

    fn is_isomorphic(&self, other: &PyGraph) -> bool {
        is_isomorphic(&self.inner, &other.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(n={}, edges={:?})",
            self.inner.n(),
            self.inner.edges()
        )
    }
}

/// Symmetric step kernel on `[0, 1]`: block values plus block measures.
#[pyclass(frozen, skip_from_py_object, name = "StepGraphon", module = "domcert_py")]
#[derive(Clone)]
pub struct PyStepGraphon {
    inner: StepGraphon,
}

impl PyStepGraphon {
    fn wrap(w: StepGraphon) -> Self {
        PyStepGraphon { inner: w }
    }
}

#[pymethods]
impl PyStepGraphon {
    #[new]
    #[pyo3(signature = (values, measures, signed = false))]
    fn new(values: Vec<Vec<f64>>, measures: Vec<f64>, signed: bool) -> PyResult<Self> {
        Ok(Self::wrap(
            StepGraphon::new(values, measures, signed).map_err(err)?,
        ))
    }

    /// Uniform n-block identity kernel (value 1 on the diagonal blocks).
    #[staticmethod]
    fn identity_blocks(n: usize) -> PyResult<Self> {
        Ok(Self::wrap(StepGraphon::identity_blocks(n).map_err(err)?))
    }

    /// Complete-bipartite split kernel with part measures `eps, 1 - eps`.
    #[staticmethod]
    fn two_block(eps: f64) -> PyResult<Self> {
        Ok(Self::wrap(StepGraphon::two_block(eps).map_err(err)?))
    }

    /// 0/1 kernel of a graph on uniform blocks.
    #[staticmethod]
    fn from_graph(g: &PyGraph) -> PyResult<Self> {
        Ok(Self::wrap(StepGraphon::from_graph(&g.inner).map_err(err)?))
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Self::wrap(StepGraphon::from_json(s).map_err(err)?))
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn values(&self) -> Vec<Vec<f64>> {
        self.inner.values().to_vec()
    }

    #[getter]
    fn measures(&self) -> Vec<f64> {
        self.inner.measures().to_vec()
    }

    #[getter]
    fn signed(&self) -> bool {
        self.inner.signed()
    }

    fn __repr__(&self) -> String {
        format!("StepGraphon(k={}, signed={})", self.inner.k(), self.inner.signed())
    }
}

#[pyfunction]
fn path(n: usize) -> PyResult<PyGraph> {
    Ok(PyGraph::wrap(constructions::path(n).map_err(err)?))
}

#[pyfunction]
fn even_cycle(len: usize) -> PyResult<PyGraph> {
    Ok(PyGraph::wrap(constructions::even_cycle(len).map_err(err)?))
}

#[pyfunction]
fn star(d: usize) -> PyResult<PyGraph> {
    Ok(PyGraph::wrap(constructions::star(d).map_err(err)?))
}

#[pyfunction]
fn complete_bipartite(s: usize, t: usize) -> PyResult<PyGraph> {
    Ok(PyGraph::wrap(
        constructions::complete_bipartite(s, t).map_err(err)?,
    ))
}

#[pyfunction]
fn hypercube(d: usize) -> PyResult<PyGraph> {
    Ok(PyGraph::wrap(constructions::hypercube(d).map_err(err)?))
}

/// Ball of radius `k` around a vertex of the `d`-cube.
#[pyfunction]
fn hypercube_ball(d: usize, k: usize) -> PyResult<PyGraph> {
    Ok(PyGraph::wrap(
        constructions::hypercube_ball(d, k).map_err(err)?,
    ))
}

/// Hexagon with a hub joined to alternating vertices.
#[pyfunction]
fn c6_plus() -> PyGraph {
    PyGraph::wrap(constructions::c6_plus())
}

#[pyfunction]
fn octahedron() -> PyGraph {
    PyGraph::wrap(constructions::octahedron())
}

#[pyfunction]
fn perfect_tree(d: usize, depth: usize) -> PyResult<PyGraph> {
    Ok(PyGraph::wrap(
        constructions::perfect_tree(d, depth).map_err(err)?,
    ))
}

#[pyfunction]
fn bipartite_kneser(t: usize, r: usize) -> PyResult<PyGraph> {
    Ok(PyGraph::wrap(
        constructions::bipartite_kneser(t, r).map_err(err)?,
    ))
}

/// Every edge replaced by a length-2 path.
#[pyfunction]
fn one_subdivision(g: &PyGraph) -> PyResult<PyGraph> {
    Ok(PyGraph::wrap(
        constructions::one_subdivision(&g.inner).map_err(err)?,
    ))
}

/// Every edge replaced by `K_{2,t}` across its endpoints.
#[pyfunction]
fn k2t_replacement(g: &PyGraph, t: usize) -> PyResult<PyGraph> {
    Ok(PyGraph::wrap(
        constructions::k2t_replacement(&g.inner, t).map_err(err)?,
    ))
}

/// Tensor product with `K_{m,m}`.
#[pyfunction]
fn tensor_kmm(g: &PyGraph, m: usize) -> PyResult<PyGraph> {
    Ok(PyGraph::wrap(
        constructions::tensor_kmm(&g.inner, m).map_err(err)?,
    ))
}

/// A pendant vertex attached to every vertex of one bipartition side
/// (`side` is `"a"` or `"b"`).
#[pyfunction]
#[pyo3(signature = (g, side = "a"))]
fn h_a_plus(g: &PyGraph, side: &str) -> PyResult<PyGraph> {
    let side = match side {
        "a" | "A" => BipartitionSide::A,
        "b" | "B" => BipartitionSide::B,
        other => {
            return Err(PyValueError::new_err(format!(
                "side must be \"a\" or \"b\", got {other:?}"
            )))
        }
    };
    Ok(PyGraph::wrap(
        constructions::h_a_plus(&g.inner, side).map_err(err)?,
    ))
}

fn parse_spec(spec_json: &str) -> PyResult<CoxeterSpec> {
    serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Coset graph of a symmetric-group reflection family, from a JSON spec
/// `{"n": ..., "parts": [[...], ...], "center": ...}`.
#[pyfunction]
fn reflection_graph(spec_json: &str) -> PyResult<PyGraph> {
    Ok(PyGraph::wrap(
        constructions::reflection_graph(&parse_spec(spec_json)?).map_err(err)?,
    ))
}

/// Star-replacement coset graph. Returns `(graph, hints_json)` where the
/// hints carry the layer partition and seeds the construction implies.
#[pyfunction]
fn star_replacement_graph(spec_json: &str) -> PyResult<(PyGraph, String)> {
    let (g, hints) =
        constructions::star_replacement_graph(&parse_spec(spec_json)?).map_err(err)?;
    Ok((PyGraph::wrap(g), to_json_value(&hints)?))
}

/// Structural pre-checks; returns the report as JSON (`pass` plus one
/// reason code per failed check).
#[pyfunction]
fn screen(g: &PyGraph) -> PyResult<String> {
    to_json_value(&screen_graph(&g.inner))
}

/// All cut involutions of the graph, as JSON.
#[pyfunction]
fn cut_involutions(g: &PyGraph) -> PyResult<String> {
    let invs = find_cut_involutions(&g.inner).map_err(err)?;
    let rows: Vec<CertInvolution> = invs.iter().map(CertInvolution::from).collect();
    to_json_value(&rows)
}

/// Searches for a domination certificate and returns it as JSON; raises
/// `RuntimeError` with the reason when none is found.
#[pyfunction]
#[pyo3(signature = (g, strong = false, allow_screen_fail = false))]
fn certify(g: &PyGraph, strong: bool, allow_screen_fail: bool) -> PyResult<String> {
    let opts = CertifyOptions {
        mode: if strong { CertMode::Strong } else { CertMode::Dominating },
        allow_screen_fail,
        ..CertifyOptions::default()
    };
    match certify_graph(&g.inner, &opts).map_err(err)? {
        CertifyOutcome::Found(cert) => Ok(cert.to_json()),
        CertifyOutcome::NotFound { reason } => Err(PyRuntimeError::new_err(format!(
            "no certificate found: {reason}"
        ))),
    }
}

/// Re-checks a certificate against a graph; returns the verification
/// report as JSON (`pass`, `sound`, one clause per checked condition).
#[pyfunction]
#[pyo3(signature = (g, certificate_json, allow_asserted = false, trials = 10_000, seed = 7))]
fn verify(
    g: &PyGraph,
    certificate_json: &str,
    allow_asserted: bool,
    trials: usize,
    seed: u64,
) -> PyResult<String> {
    let cert = Certificate::from_json(certificate_json).map_err(err)?;
    let opts = VerifyOptions {
        allow_asserted,
        multiperc_trials: trials,
        rng_seed: seed,
    };
    to_json_value(&verify_certificate(&g.inner, &cert, &opts).map_err(err)?)
}

/// Searches for an exactly confirmed domination violation of `h` over
/// `hprime`; returns the counterexample as JSON, or `None`.
#[pyfunction]
#[pyo3(signature = (h, hprime, blocks = 4, signed = false, restarts = 16, iters = 60, seed = 0))]
fn falsify(
    h: &PyGraph,
    hprime: &PyGraph,
    blocks: usize,
    signed: bool,
    restarts: usize,
    iters: usize,
    seed: u64,
) -> PyResult<Option<String>> {
    let task = FalsifyTask {
        h: (*h.inner).clone(),
        hprime: (*hprime.inner).clone(),
        blocks,
        signed,
        restarts,
        iters,
        seed,
    };
    match falsify_pair(&task).map_err(err)? {
        Some(cx) => Ok(Some(to_json_value(&cx)?)),
        None => Ok(None),
    }
}

/// Budgeted violation search for hypercube ball pairs (radius `l` over
/// radius `k` in the `n`-cube); returns the probe report as JSON.
#[pyfunction]
#[pyo3(signature = (n, k, l, blocks = 4, signed = false, restarts = 16, iters = 60, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn explore_ball(
    n: usize,
    k: usize,
    l: usize,
    blocks: usize,
    signed: bool,
    restarts: usize,
    iters: usize,
    seed: u64,
) -> PyResult<String> {
    let template = FalsifyTask {
        blocks,
        signed,
        restarts,
        iters,
        seed,
        ..FalsifyTask::new(
            constructions::path(2).map_err(err)?,
            constructions::path(2).map_err(err)?,
        )
    };
    to_json_value(&explore_ball_domination(n, k, l, &template).map_err(err)?)
}

/// Homomorphism density of `pattern` in the kernel, as
/// `(value, exact_or_none)`; the exact channel is a `p/q` string when the
/// kernel is rational and small enough.
#[pyfunction]
fn density(pattern: &PyGraph, w: &PyStepGraphon) -> PyResult<(f64, Option<String>)> {
    let d = density_step(&pattern.inner, &w.inner).map_err(err)?;
    Ok((d.value, d.exact.as_ref().map(ratio_string)))
}

/// Homomorphism density of `pattern` in a target graph's 0/1 kernel.
#[pyfunction]
fn density_in_graph(pattern: &PyGraph, target: &PyGraph) -> PyResult<(f64, Option<String>)> {
    let w = StepGraphon::from_graph(&target.inner).map_err(err)?;
    let d = density_step(&pattern.inner, &w).map_err(err)?;
    Ok((d.value, d.exact.as_ref().map(ratio_string)))
}

/// Exact homomorphism count `hom(pattern, target)` as a decimal string.
#[pyfunction]
fn hom_count(pattern: &PyGraph, target: &PyGraph) -> PyResult<String> {
    Ok(graphon::hom_count(&pattern.inner, &target.inner)
        .map_err(err)?
        .to_string())
}

/// Normalized domination margin `t_h^{1/e(h)} - t_hprime^{1/e(hprime)}`
/// at the kernel; negative means `hprime` beats `h` there.
#[pyfunction]
fn domination_margin(h: &PyGraph, hprime: &PyGraph, w: &PyStepGraphon) -> PyResult<f64> {
    margin_fn(&h.inner, &hprime.inner, &w.inner).map_err(err)
}

/// Runs the command-line interface in-process on the arguments after the
/// program name; returns `(exit_code, stdout, stderr)`.
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String, String) {
    let argv = std::iter::once("domcert".to_string()).chain(args);
    let result = domcert::cli::run(argv);
    (result.exit_code, result.stdout, result.stderr)
}

#[pymodule]
fn domcert_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyStepGraphon>()?;
    m.add_function(wrap_pyfunction!(path, m)?)?;
    m.add_function(wrap_pyfunction!(even_cycle, m)?)?;
    m.add_function(wrap_pyfunction!(star, m)?)?;
    m.add_function(wrap_pyfunction!(complete_bipartite, m)?)?;
    m.add_function(wrap_pyfunction!(hypercube, m)?)?;
    m.add_function(wrap_pyfunction!(hypercube_ball, m)?)?;
    m.add_function(wrap_pyfunction!(c6_plus, m)?)?;
    m.add_function(wrap_pyfunction!(octahedron, m)?)?;
    m.add_function(wrap_pyfunction!(perfect_tree, m)?)?;
    m.add_function(wrap_pyfunction!(bipartite_kneser, m)?)?;
    m.add_function(wrap_pyfunction!(one_subdivision, m)?)?;
    m.add_function(wrap_pyfunction!(k2t_replacement, m)?)?;
    m.add_function(wrap_pyfunction!(tensor_kmm, m)?)?;
    m.add_function(wrap_pyfunction!(h_a_plus, m)?)?;
    m.add_function(wrap_pyfunction!(reflection_graph, m)?)?;
    m.add_function(wrap_pyfunction!(star_replacement_graph, m)?)?;
    m.add_function(wrap_pyfunction!(screen, m)?)?;
    m.add_function(wrap_pyfunction!(cut_involutions, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(falsify, m)?)?;
    m.add_function(wrap_pyfunction!(explore_ball, m)?)?;
    m.add_function(wrap_pyfunction!(density, m)?)?;
    m.add_function(wrap_pyfunction!(density_in_graph, m)?)?;
    m.add_function(wrap_pyfunction!(hom_count, m)?)?;
    m.add_function(wrap_pyfunction!(domination_margin, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
