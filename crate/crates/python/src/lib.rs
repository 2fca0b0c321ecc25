//! Python module `plateau_py`. Curves are lists of coordinate lists in
//! Euclidean space; spaces and scenes are JSON files. Structured results come
//! back as JSON strings.

use std::path::PathBuf;
use std::sync::Arc;

use plateau::curve::{total_curvature, CurveDesc, PolygonalCurve};
use plateau::funnel::{fary_milnor as fary_milnor_check, FaryMilnorOptions};
use plateau::scene::{self, machine_json, Overrides, Scene};
use plateau::solve::{solve_plateau, SolverConfig};
use plateau::space::SpaceDesc;
use plateau::TargetSpace;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: plateau::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: plateau::Error) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn build(coords: Vec<Vec<f64>>, space: Option<PathBuf>) -> PyResult<(Arc<TargetSpace>, PolygonalCurve)> {
    let space = match space {
        Some(p) => SpaceDesc::load(&p).and_then(|d| d.build()),
        None => TargetSpace::euclidean(coords.first().map_or(0, |c| c.len())),
    }
    .map_err(value_err)?;
    let desc = CurveDesc { points: None, coords: Some(coords), closed: true };
    let curve = desc.build(&space).map_err(value_err)?;
    Ok((Arc::new(space), curve))
}

/// Total curvature of the closed polygon through `coords`, in radians.
#[pyfunction]
#[pyo3(signature = (coords, space=None))]
fn total_curvature_of(coords: Vec<Vec<f64>>, space: Option<PathBuf>) -> PyResult<f64> {
    let (space, curve) = build(coords, space)?;
    Ok(total_curvature(&space, &curve).map_err(value_err)?.kappa)
}

/// Solve the Plateau problem and return the solver summary as JSON.
#[pyfunction]
#[pyo3(signature = (coords, rings=16, seed=0, space=None))]
fn solve(py: Python<'_>, coords: Vec<Vec<f64>>, rings: usize, seed: u64, space: Option<PathBuf>) -> PyResult<String> {
    let (space, curve) = build(coords, space)?;
    let cfg = SolverConfig { rings, seed, ..SolverConfig::default() };
    let summary = py.allow_threads(|| solve_plateau(space, &curve, &cfg).and_then(|r| r.summary())).map_err(runtime_err)?;
    machine_json(&summary).map_err(runtime_err)
}

/// Fary-Milnor verdict: one of `embedded`, `rigid_cone_candidate`,
/// `above_threshold`, `inconclusive`.
#[pyfunction]
#[pyo3(signature = (coords, skip_funnel=false, space=None))]
fn fary_milnor(py: Python<'_>, coords: Vec<Vec<f64>>, skip_funnel: bool, space: Option<PathBuf>) -> PyResult<String> {
    let (space, curve) = build(coords, space)?;
    let opts = FaryMilnorOptions { skip_funnel, ..FaryMilnorOptions::default() };
    let rep = py
        .allow_threads(|| fary_milnor_check(space, &curve, &SolverConfig::default(), &opts))
        .map_err(runtime_err)?;
    Ok(rep.verdict.as_str().to_string())
}

/// Run a scene file; returns the report as JSON. Artifacts are written to
/// `out` when given.
#[pyfunction]
#[pyo3(signature = (path, seed=None, rings=None, skip_funnel=false, out=None))]
fn run_scene(
    py: Python<'_>,
    path: PathBuf,
    seed: Option<u64>,
    rings: Option<usize>,
    skip_funnel: bool,
    out: Option<PathBuf>,
) -> PyResult<String> {
    let overrides = Overrides { seed, rings, tol: None, skip_funnel };
    let loaded = Scene::load(&path, &overrides).map_err(value_err)?;
    let outcome = py.allow_threads(|| scene::run_scene(&loaded)).map_err(runtime_err)?;
    if let Some(dir) = out {
        outcome.write(&dir).map_err(runtime_err)?;
    }
    machine_json(&outcome.report).map_err(runtime_err)
}

#[pymodule]
pub fn plateau_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(total_curvature_of, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(fary_milnor, m)?)?;
    m.add_function(wrap_pyfunction!(run_scene, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
