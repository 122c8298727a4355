//! Python bindings. Specs (families, adversaries, detectors, solver and
//! experiment configs) are passed as dicts or JSON strings with the same
//! shape as the CLI; structured results come back as dicts.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use semirandom_core::adversary::{apply_alt_adversary, apply_null_adversary, AdversarySpec};
use semirandom_core::detectors::{compute_statistic, resolve_threshold, run_detector, DetectorSpec, ThresholdSource};
use semirandom_core::lab::{self, ExperimentConfig};
use semirandom_core::random::{sample_null, sample_planted, stream_rng, ModelParams, PlantedInstance};
use semirandom_core::spectral;
use semirandom_core::{make_family, FamilySpec, Graph, LabError};

fn err(e: LabError) -> PyErr {
    match e {
        LabError::Input(_) | LabError::Config(_) | LabError::Unsupported(_) => PyValueError::new_err(e.to_string()),
        LabError::Io(_) => PyIOError::new_err(e.to_string()),
        LabError::Resource(_) | LabError::Execution(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Accepts a JSON string or any object `json.dumps` can serialise.
fn from_py<T: serde::de::DeserializeOwned>(py: Python<'_>, obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = match obj.extract::<String>() {
        Ok(s) => s,
        Err(_) => py.import("json")?.call_method1("dumps", (obj,))?.extract()?,
    };
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn to_py(py: Python<'_>, value: &impl serde::Serialize) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

#[pyclass(name = "Graph", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGraph {
    inner: Graph,
}

#[pymethods]
impl PyGraph {
    /// `edges` are 0-based vertex pairs.
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(PyGraph { inner: Graph::new(n, edges).map_err(err)? })
    }

    #[staticmethod]
    fn family(py: Python<'_>, spec: &Bound<'_, PyAny>) -> PyResult<Self> {
        let spec: FamilySpec = from_py(py, spec)?;
        Ok(PyGraph { inner: make_family(&spec).map_err(err)? })
    }

    #[staticmethod]
    fn read_edge_list(path: PathBuf) -> PyResult<Self> {
        let f = std::fs::File::open(path)?;
        Ok(PyGraph { inner: Graph::read_edge_list(std::io::BufReader::new(f)).map_err(err)? })
    }

    fn write_edge_list(&self, path: PathBuf) -> PyResult<()> {
        let f = std::fs::File::create(path)?;
        self.inner.write_edge_list(std::io::BufWriter::new(f)).map_err(err)
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

    fn degrees(&self) -> Vec<usize> {
        self.inner.degrees()
    }

    fn max_degree(&self) -> usize {
        self.inner.max_degree()
    }

    fn has_edge(&self, a: usize, b: usize) -> bool {
        self.inner.has_edge(a, b)
    }

    fn is_subgraph_of(&self, other: &PyGraph) -> bool {
        self.inner.is_subgraph_of(&other.inner)
    }

    fn adjacency(&self) -> Vec<Vec<f64>> {
        let a = self.inner.adjacency();
        (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect()).collect()
    }

    fn nuclear_norm(&self) -> PyResult<f64> {
        spectral::nuclear_norm(self.inner.adjacency().as_ref()).map_err(err)
    }

    fn spectral_norm(&self) -> PyResult<f64> {
        spectral::spectral_norm(self.inner.adjacency().as_ref()).map_err(err)
    }

    fn max_subgraph_density(&self) -> PyResult<f64> {
        Ok(semirandom_core::density::max_subgraph_density(&self.inner).map_err(err)?.value())
    }

    fn __len__(&self) -> usize {
        self.inner.edge_count()
    }

    fn __eq__(&self, other: &PyGraph) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, edges={})", self.inner.n(), self.inner.edge_count())
    }
}

/// Parameters of `G_Gamma(n, p, q)` with `Gamma` given by a family spec.
#[pyclass(name = "Model", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyModel {
    inner: ModelParams,
}

#[pymethods]
impl PyModel {
    #[new]
    fn new(py: Python<'_>, n: usize, p: f64, q: f64, family: &Bound<'_, PyAny>) -> PyResult<Self> {
        let family: FamilySpec = from_py(py, family)?;
        Ok(PyModel { inner: ModelParams::from_family(n, p, q, family).map_err(err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.p
    }

    #[getter]
    fn q(&self) -> f64 {
        self.inner.q
    }

    #[getter]
    fn gamma(&self) -> PyGraph {
        PyGraph { inner: self.inner.gamma.clone() }
    }

    /// Planted draw, or a null draw when `null` is true.
    #[pyo3(signature = (seed, null = false))]
    fn sample(&self, seed: u64, null: bool) -> PyResult<PyInstance> {
        let mut rng = stream_rng(seed, 0, 0);
        let mut inst = if null { sample_null(&self.inner, &mut rng) } else { sample_planted(&self.inner, &mut rng) }
            .map_err(err)?;
        inst.seed = Some(seed);
        Ok(PyInstance { inner: inst })
    }

    fn __repr__(&self) -> String {
        format!("Model(n={}, p={}, q={}, family={})", self.inner.n, self.inner.p, self.inner.q, self.inner.family_label())
    }
}

#[pyclass(name = "Instance", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyInstance {
    inner: PlantedInstance,
}

#[pymethods]
impl PyInstance {
    #[staticmethod]
    fn read(stem: PathBuf) -> PyResult<Self> {
        Ok(PyInstance { inner: PlantedInstance::read_files(&stem).map_err(err)? })
    }

    /// Writes `<stem>.edges` and `<stem>.json`.
    fn write(&self, stem: PathBuf) -> PyResult<()> {
        self.inner.write_files(&stem).map_err(err)
    }

    #[getter]
    fn graph(&self) -> PyGraph {
        PyGraph { inner: self.inner.graph.clone() }
    }

    #[getter]
    fn planted_copy(&self) -> Vec<(usize, usize)> {
        self.inner.planted_copy.clone()
    }

    #[getter]
    fn model(&self) -> PyModel {
        PyModel { inner: self.inner.params.clone() }
    }

    fn is_null(&self) -> bool {
        self.inner.is_null()
    }

    /// Applies an adversary; `side` is `"null"` or `"alt"`.
    #[pyo3(signature = (adversary, side, seed = 0))]
    fn attack(&self, py: Python<'_>, adversary: &Bound<'_, PyAny>, side: &str, seed: u64) -> PyResult<PyInstance> {
        let spec: AdversarySpec = from_py(py, adversary)?;
        let mut rng = stream_rng(seed, lab::domain::NULL_ADVERSARY, 0);
        let graph = match side {
            "null" => apply_null_adversary(&spec, &self.inner.graph, &mut rng),
            "alt" => apply_alt_adversary(&spec, &self.inner, &mut rng),
            _ => return Err(PyValueError::new_err("side must be 'null' or 'alt'")),
        }
        .map_err(err)?;
        Ok(PyInstance { inner: PlantedInstance { graph, ..self.inner.clone() } })
    }
}

/// Value of a detector's statistic on `graph`, as a dict with diagnostics.
#[pyfunction]
fn statistic(py: Python<'_>, detector: &Bound<'_, PyAny>, graph: &PyGraph, model: &PyModel) -> PyResult<Py<PyAny>> {
    let spec: DetectorSpec = from_py(py, detector)?;
    spec.validate(&model.inner).map_err(err)?;
    let s = py.detach(|| compute_statistic(&spec, &graph.inner, &model.inner)).map_err(err)?;
    to_py(py, &s)
}

/// Full decision. A calibrated threshold needs `tau`, or is calibrated here
/// with `calibration_trials` vanilla null draws.
#[pyfunction]
#[pyo3(signature = (detector, graph, model, tau = None, calibration_trials = 200, seed = 0))]
fn detect(
    py: Python<'_>,
    detector: &Bound<'_, PyAny>,
    graph: &PyGraph,
    model: &PyModel,
    tau: Option<f64>,
    calibration_trials: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let spec: DetectorSpec = from_py(py, detector)?;
    spec.validate(&model.inner).map_err(err)?;
    let decision = py
        .detach(|| {
            let tau = match (tau, &spec.threshold) {
                (Some(t), _) => t,
                (None, ThresholdSource::Calibrated { alpha }) => {
                    lab::calibrate_threshold(&spec, &model.inner, *alpha, calibration_trials, seed)?.tau
                }
                (None, _) => resolve_threshold(&spec, &model.inner)?,
            };
            run_detector(&spec, &graph.inner, &model.inner, tau)
        })
        .map_err(err)?;
    to_py(py, &decision)
}

#[pyfunction]
#[pyo3(signature = (detector, model, alpha = 0.05, trials = 200, seed = 0))]
fn calibrate(
    py: Python<'_>,
    detector: &Bound<'_, PyAny>,
    model: &PyModel,
    alpha: f64,
    trials: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let spec: DetectorSpec = from_py(py, detector)?;
    let c = py.detach(|| lab::calibrate_threshold(&spec, &model.inner, alpha, trials, seed)).map_err(err)?;
    to_py(py, &c)
}

#[pyfunction]
#[pyo3(signature = (detector, model, null_adversary, alt_adversary, tau, trials, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn estimate_risk(
    py: Python<'_>,
    detector: &Bound<'_, PyAny>,
    model: &PyModel,
    null_adversary: &Bound<'_, PyAny>,
    alt_adversary: &Bound<'_, PyAny>,
    tau: f64,
    trials: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let spec: DetectorSpec = from_py(py, detector)?;
    let null: AdversarySpec = from_py(py, null_adversary)?;
    let alt: AdversarySpec = from_py(py, alt_adversary)?;
    let r = py.detach(|| lab::estimate_risk(&spec, &model.inner, &null, &alt, tau, trials, seed)).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
fn run_experiment(py: Python<'_>, config: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
    let cfg: ExperimentConfig = from_py(py, config)?;
    let summary = py.detach(|| lab::run_experiment(&cfg)).map_err(err)?;
    to_py(py, &summary)
}

#[pyfunction]
fn regime_report(py: Python<'_>, family: &Bound<'_, PyAny>, n: usize, p: f64, q: f64) -> PyResult<Py<PyAny>> {
    let family: FamilySpec = from_py(py, family)?;
    let gamma = make_family(&family).map_err(err)?;
    to_py(py, &lab::regime_report(&gamma, n, p, q).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (family, n, q, trials, seed = 0))]
fn uniformity_audit(
    py: Python<'_>,
    family: &Bound<'_, PyAny>,
    n: usize,
    q: f64,
    trials: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let family: FamilySpec = from_py(py, family)?;
    let a = py.detach(|| lab::uniformity_audit(&family, n, q, trials, seed)).map_err(err)?;
    to_py(py, &a)
}

#[pyfunction]
#[pyo3(signature = (family, n, q, trials, seed = 0))]
fn containment_probability(
    py: Python<'_>,
    family: &Bound<'_, PyAny>,
    n: usize,
    q: f64,
    trials: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let family: FamilySpec = from_py(py, family)?;
    let gamma = make_family(&family).map_err(err)?;
    let e = py.detach(|| lab::estimate_containment_probability(&gamma, n, q, trials, seed)).map_err(err)?;
    to_py(py, &e)
}

#[pymodule]
fn semirandom(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(statistic, m)?)?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_risk, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(regime_report, m)?)?;
    m.add_function(wrap_pyfunction!(uniformity_audit, m)?)?;
    m.add_function(wrap_pyfunction!(containment_probability, m)?)?;
    Ok(())
}
