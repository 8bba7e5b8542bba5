//! Python bindings for `qpartial_core`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use qpartial_core::asymptotic::{self, Optimum};
use qpartial_core::record::{self, Engine, RunRecord};
use qpartial_core::statevector::{FullState, TargetPlacement};
use qpartial_core::surephase::{minimal_schedule as minimal_phase_schedule, PhaseSolution};
use qpartial_core::{Error, ReducedState, SearchGeometry, Step3Ordering};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::TooLarge { .. } | Error::Exhausted { .. } => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(py_err)
}

/// Block-structured database: `N` items in `K` blocks, `t` target blocks
/// with `tau` targets each.
#[pyclass(name = "Geometry", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyGeometry(SearchGeometry);

#[pymethods]
impl PyGeometry {
    #[new]
    #[pyo3(signature = (N, K, t=1, tau=1))]
    #[allow(non_snake_case)]
    fn new(N: u64, K: u64, t: u64, tau: u64) -> PyResult<Self> {
        SearchGeometry::new(N, K, t, tau).map(Self).map_err(py_err)
    }

    /// Parses `key = value` lines with keys N, K, t, tau.
    #[staticmethod]
    fn from_config(text: &str) -> PyResult<Self> {
        qpartial_core::config::parse_geometry_config(text).map(Self).map_err(py_err)
    }

    #[getter(N)]
    fn n(&self) -> u64 {
        self.0.n()
    }

    #[getter(K)]
    fn k(&self) -> u64 {
        self.0.k()
    }

    #[getter]
    fn b(&self) -> u64 {
        self.0.b()
    }

    #[getter]
    fn t(&self) -> u64 {
        self.0.t()
    }

    #[getter]
    fn tau(&self) -> u64 {
        self.0.tau()
    }

    #[getter]
    fn z(&self) -> u64 {
        self.0.z()
    }

    #[getter]
    fn k_tilde(&self) -> f64 {
        self.0.k_tilde()
    }

    /// `(theta1, theta2, gamma)`.
    #[getter]
    fn angles(&self) -> (f64, f64, f64) {
        let a = self.0.angles();
        (a.theta1, a.theta2, a.gamma)
    }

    fn __repr__(&self) -> String {
        format!("Geometry(N={}, K={}, t={}, tau={})", self.0.n(), self.0.k(), self.0.t(), self.0.tau())
    }
}

#[pyclass(name = "Optimum", frozen, get_all)]
struct PyOptimum {
    k_tilde: f64,
    eta_tilde: f64,
    alpha_tilde: f64,
    omega: f64,
    scale: f64,
    j1: f64,
    j2: f64,
    total: f64,
    full: f64,
    saved_coefficient: f64,
}

impl From<Optimum> for PyOptimum {
    fn from(o: Optimum) -> Self {
        Self {
            k_tilde: o.k_tilde,
            eta_tilde: o.eta_tilde,
            alpha_tilde: o.alpha_tilde,
            omega: o.omega,
            scale: o.scale,
            j1: o.j1_real,
            j2: o.j2_real,
            total: o.total_real,
            full: o.full_search_real,
            saved_coefficient: o.saved_coefficient(),
        }
    }
}

#[pymethods]
impl PyOptimum {
    fn __repr__(&self) -> String {
        format!(
            "Optimum(k_tilde={}, eta_tilde={:.12}, alpha_tilde={:.12})",
            self.k_tilde, self.eta_tilde, self.alpha_tilde
        )
    }
}

#[pyclass(name = "PhaseSolution", frozen, get_all)]
struct PyPhaseSolution {
    theta: f64,
    phi: f64,
    j1: u64,
    j2: u64,
    residual: f64,
    total_queries: u64,
}

impl From<PhaseSolution> for PyPhaseSolution {
    fn from(s: PhaseSolution) -> Self {
        Self {
            theta: s.theta,
            phi: s.phi,
            j1: s.j1,
            j2: s.j2,
            residual: s.residual,
            total_queries: s.total_queries(),
        }
    }
}

#[pymethods]
impl PyPhaseSolution {
    fn __repr__(&self) -> String {
        format!(
            "PhaseSolution(j1={}, j2={}, theta={:.12}, phi={:.12})",
            self.j1, self.j2, self.theta, self.phi
        )
    }
}

/// Outcome of a simulated run.
#[pyclass(name = "RunRecord", frozen)]
struct PyRunRecord(RunRecord);

#[pymethods]
impl PyRunRecord {
    #[getter]
    fn mode(&self) -> &'static str {
        self.0.mode.as_str()
    }

    #[getter]
    fn j1(&self) -> u64 {
        self.0.schedule.j1
    }

    #[getter]
    fn j2(&self) -> u64 {
        self.0.schedule.j2
    }

    #[getter]
    fn marginals(&self) -> Vec<f64> {
        self.0.marginals.clone()
    }

    #[getter]
    fn total_queries(&self) -> u64 {
        self.0.total_queries
    }

    #[getter]
    fn full_queries(&self) -> f64 {
        self.0.full_queries
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.0.residual
    }

    #[getter]
    fn target_mass(&self) -> f64 {
        self.0.target_mass
    }

    #[getter]
    fn sampled_block(&self) -> Option<usize> {
        self.0.sampled_block
    }

    fn csv_row(&self) -> String {
        self.0.csv_row()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "RunRecord(mode={}, j1={}, j2={}, target_mass={})",
            self.mode(),
            self.j1(),
            self.j2(),
            self.0.target_mass
        )
    }
}

#[pyfunction]
fn optimum_closed_form(k_tilde: f64) -> PyResult<PyOptimum> {
    asymptotic::optimum_closed_form(k_tilde).map(Into::into).map_err(py_err)
}

#[pyfunction]
fn optimum_numeric(k_tilde: f64) -> PyResult<PyOptimum> {
    asymptotic::optimum_numeric(k_tilde).map(Into::into).map_err(py_err)
}

/// Closed-form optimum scaled to the geometry's block size.
#[pyfunction]
fn optimum_for_geometry(g: &PyGeometry) -> PyResult<PyOptimum> {
    asymptotic::optimum_for_geometry(&g.0).map(Into::into).map_err(py_err)
}

#[pyfunction]
fn full_search_queries(g: &PyGeometry) -> f64 {
    asymptotic::full_search_queries(&g.0)
}

/// Rounded `(j1, j2)` for the geometry.
#[pyfunction]
fn integer_schedule(g: &PyGeometry) -> PyResult<(u64, u64)> {
    let s = asymptotic::integer_schedule(&g.0).map_err(py_err)?;
    Ok((s.j1, s.j2))
}

#[pyfunction]
#[pyo3(signature = (g, j1, j2, ordering="reflection-then-oracle", engine="auto", seed=None))]
fn simulate(g: &PyGeometry, j1: u64, j2: u64, ordering: &str, engine: &str, seed: Option<u64>) -> PyResult<PyRunRecord> {
    let ordering: Step3Ordering = parse(ordering)?;
    let engine: Engine = parse(engine)?;
    record::simulate(&g.0, j1, j2, ordering, engine, seed)
        .map(PyRunRecord)
        .map_err(py_err)
}

#[pyfunction]
fn minimal_schedule(g: &PyGeometry) -> PyResult<PyPhaseSolution> {
    minimal_phase_schedule(&g.0).map(Into::into).map_err(py_err)
}

/// Minimal sure-success schedule, verified by simulation.
#[pyfunction]
fn surephase(g: &PyGeometry) -> PyResult<(PyRunRecord, PyPhaseSolution)> {
    let (record, sol) = record::run_surephase(&g.0).map_err(py_err)?;
    Ok((PyRunRecord(record), sol.into()))
}

/// `(a_M, a_NTT, a_u)` after `j1` global and `j2` local iterations.
#[pyfunction]
fn class_amplitudes(g: &PyGeometry, j1: u64, j2: u64) -> Vec<Complex64> {
    ReducedState::initial(&g.0)
        .evolve_global(&g.0, j1)
        .evolve_local(&g.0, j2 as f64)
        .components()
        .to_vec()
}

/// Dense amplitudes after steps 1-3 with canonical target placement.
#[pyfunction]
#[pyo3(signature = (g, j1, j2, ordering="reflection-then-oracle"))]
fn statevector(g: &PyGeometry, j1: u64, j2: u64, ordering: &str) -> PyResult<Vec<Complex64>> {
    let ordering: Step3Ordering = parse(ordering)?;
    let state = FullState::uniform(TargetPlacement::canonical(&g.0))
        .map_err(py_err)?
        .apply_global_iterations(j1)
        .apply_local_iterations(j2)
        .apply_step3(ordering);
    Ok(state.amplitudes().to_vec())
}

#[pymodule]
fn qpartial(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", qpartial_core::VERSION)?;
    m.add_class::<PyGeometry>()?;
    m.add_class::<PyOptimum>()?;
    m.add_class::<PyPhaseSolution>()?;
    m.add_class::<PyRunRecord>()?;
    m.add_function(wrap_pyfunction!(optimum_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(optimum_numeric, m)?)?;
    m.add_function(wrap_pyfunction!(optimum_for_geometry, m)?)?;
    m.add_function(wrap_pyfunction!(full_search_queries, m)?)?;
    m.add_function(wrap_pyfunction!(integer_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(minimal_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(surephase, m)?)?;
    m.add_function(wrap_pyfunction!(class_amplitudes, m)?)?;
    m.add_function(wrap_pyfunction!(statevector, m)?)?;
    Ok(())
}
