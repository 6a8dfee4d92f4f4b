use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use helmholtz_lab::experiment::{self, ExperimentConfig, PRESETS};
use helmholtz_lab::mesh::DomainId;
use helmholtz_lab::methods::{solve_fem, ProblemSpec, SolverOptions};
use helmholtz_lab::spaces::h1_space;

fn runtime(e: helmholtz_lab::Error) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// Run a sweep from config text and return the CSV.
#[pyfunction]
fn run_config(text: &str) -> PyResult<String> {
    let config = ExperimentConfig::parse(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(config.run().map_err(runtime)?.to_csv())
}

/// Names of the built-in presets.
#[pyfunction]
fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.name).collect()
}

/// Table of presets with the example each reproduces.
#[pyfunction]
fn list_presets() -> String {
    experiment::list_presets()
}

/// Bessel function of the first kind.
#[pyfunction]
fn bessel_j(order: f64, x: f64) -> PyResult<f64> {
    helmholtz_lab::numerics::bessel_j(order, x).map_err(runtime)
}

/// Text dump of a built-in mesh.
#[pyfunction]
#[pyo3(signature = (domain, h, sigma=None, layers=0))]
fn mesh_dump(domain: &str, h: f64, sigma: Option<f64>, layers: usize) -> PyResult<String> {
    let domain: DomainId = domain
        .parse()
        .map_err(|e: helmholtz_lab::Error| PyValueError::new_err(e.to_string()))?;
    experiment::mesh_dump(domain, h, sigma.map(|s| (s, layers))).map_err(runtime)
}

/// h-FEM for the 1D model problem; returns the error metrics.
#[pyfunction]
fn solve_1d<'py>(py: Python<'py>, k: f64, p: usize, n_elements: usize) -> PyResult<Bound<'py, PyDict>> {
    let problem = ProblemSpec::model_1d(k);
    let mesh = helmholtz_lab::mesh::uniform_interval_mesh(n_elements).map_err(runtime)?;
    let space = h1_space(mesh, p).map_err(runtime)?;
    let run = solve_fem(&problem, &space, &SolverOptions::default()).map_err(runtime)?;
    let r = run.report;
    let d = PyDict::new(py);
    d.set_item("dofs", r.dofs)?;
    d.set_item("n_lambda", r.n_lambda)?;
    d.set_item("err_h1semi_rel", r.h1_semi_rel)?;
    d.set_item("err_l2_rel", r.l2_rel)?;
    d.set_item("err_1k_rel", r.norm_1k_rel)?;
    d.set_item("solve_residual", r.solve_residual)?;
    Ok(d)
}

#[pymodule]
fn helmholtz_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CSV_HEADER", experiment::CSV_HEADER)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add_function(wrap_pyfunction!(list_presets, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j, m)?)?;
    m.add_function(wrap_pyfunction!(mesh_dump, m)?)?;
    m.add_function(wrap_pyfunction!(solve_1d, m)?)?;
    Ok(())
}
