//! Python bindings. Matrices cross the boundary as lists of rows of Python
//! `complex` (or `float`) values.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use krein_lsq::error::KreinError as CoreError;
use krein_lsq::harness::{generate_instance, run_suite_with, GeneratorSpec, ProblemFile, Regime, SuiteOptions};
use krein_lsq::jtrace::{solve_trace_min, trace_j as core_trace_j};
use krein_lsq::krein::{random_signature_operator, KreinSpace, SignatureOperator};
use krein_lsq::linalg::{identity, Mat};
use krein_lsq::lsq::{solve_imms as core_imms, solve_ims as core_ims, WeightedProblem};
use krein_lsq::schur::schur_complement as core_schur;
use krein_lsq::subspace::Subspace;

create_exception!(krein_lsq_py, KreinError, PyException, "Raised with `(kind, message)` when a core operation fails.");

type Rows = Vec<Vec<Complex64>>;

fn err(e: CoreError) -> PyErr {
    KreinError::new_err((e.kind().to_string(), e.to_string()))
}

fn mat(name: &str, rows: &Rows) -> PyResult<Mat> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if let Some(i) = rows.iter().position(|row| row.len() != c) {
        return Err(err(CoreError::MalformedInput(format!("field {name}: row {i} has {} entries, expected {c}", rows[i].len()))));
    }
    Ok(Mat::from_fn(r, c, |i, j| rows[i][j]))
}

fn rows(m: &Mat) -> Rows {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn space(j: &Rows, tol: Option<f64>) -> PyResult<KreinSpace> {
    let j = mat("J", j)?;
    match tol {
        Some(t) => KreinSpace::with_tol(j, t),
        None => KreinSpace::new(j),
    }
    .map_err(err)
}

fn problem(j: &Rows, w: &Rows, b: &Rows, c: Option<&Rows>, tol: Option<f64>) -> PyResult<WeightedProblem> {
    let sp = space(j, tol)?;
    let c = match c {
        Some(c) => mat("C", c)?,
        None => identity(sp.dim()),
    };
    WeightedProblem::new(mat("W", w)?, mat("B", b)?, c, sp).map_err(err)
}

fn signature(sp: &KreinSpace, alt_seed: Option<u64>) -> SignatureOperator {
    alt_seed.map_or_else(|| sp.reference_signature(), |s| random_signature_operator(sp, s))
}

/// Schur complement `W_{/[S]}` and compression `W_{[S]}`; `S` is a column frame.
#[pyfunction]
#[pyo3(signature = (j, w, s, tol=None))]
fn schur_complement<'py>(py: Python<'py>, j: Rows, w: Rows, s: Rows, tol: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
    let sp = space(&j, tol)?;
    let res = core_schur(&mat("W", &w)?, &Subspace::from_frame(mat("S", &s)?), &sp).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("schur", rows(&res.schur))?;
    out.set_item("compression", rows(&res.compression))?;
    Ok(out)
}

/// Indefinite minimum solution of `BX = C` with weight `W` (`C` defaults to `I`).
#[pyfunction]
#[pyo3(signature = (j, w, b, c=None, tol=None))]
fn solve_ims<'py>(py: Python<'py>, j: Rows, w: Rows, b: Rows, c: Option<Rows>, tol: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
    let p = problem(&j, &w, &b, c.as_ref(), tol)?;
    let sol = core_ims(&p).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("x0", rows(&sol.x0))?;
    out.set_item("min_value", rows(&sol.min_value))?;
    out.set_item("schur_value", sol.schur_value.as_ref().map(rows))?;
    out.set_item("normal_residual", sol.normal_residual)?;
    Ok(out)
}

/// Indefinite min-max solution `Z = Z1 + Z2`.
#[pyfunction]
#[pyo3(signature = (j, w, b, c=None, tol=None))]
fn solve_imms<'py>(py: Python<'py>, j: Rows, w: Rows, b: Rows, c: Option<Rows>, tol: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
    let p = problem(&j, &w, &b, c.as_ref(), tol)?;
    let sol = core_imms(&p).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("z", rows(&sol.z))?;
    out.set_item("z1", rows(&sol.z1))?;
    out.set_item("z2", rows(&sol.z2))?;
    out.set_item("minmax_value", rows(&sol.minmax_value))?;
    Ok(out)
}

/// `tr_J(T)` for the reference signature, or a seeded alternate one.
#[pyfunction]
#[pyo3(signature = (j, t, alt_seed=None))]
fn trace_j(j: Rows, t: Rows, alt_seed: Option<u64>) -> PyResult<Complex64> {
    let sp = space(&j, None)?;
    let rep = core_trace_j(&mat("T", &t)?, &signature(&sp, alt_seed), &sp).map_err(err)?;
    Ok(rep.value)
}

/// Minimizer and value of `tr_J(F(X))`.
#[pyfunction]
#[pyo3(signature = (j, w, b, c=None, alt_seed=None, tol=None))]
fn trace_min(j: Rows, w: Rows, b: Rows, c: Option<Rows>, alt_seed: Option<u64>, tol: Option<f64>) -> PyResult<(Rows, f64)> {
    let p = problem(&j, &w, &b, c.as_ref(), tol)?;
    let sol = solve_trace_min(&p, &signature(&p.space, alt_seed)).map_err(err)?;
    Ok((rows(&sol.x0), sol.value))
}

/// Runs a verification suite and returns the report as JSON text.
#[pyfunction]
#[pyo3(signature = (suite, dim, instances=1, seed=0, max_dim=None, samples=1000))]
fn verify(py: Python<'_>, suite: &str, dim: usize, instances: usize, seed: u64, max_dim: Option<usize>, samples: usize) -> PyResult<String> {
    let spec = GeneratorSpec::new(dim, seed, Regime::Complementable);
    let opts = SuiteOptions { samples, regimes: Vec::new(), dims: max_dim.map(|m| (dim..=m).collect()).unwrap_or_default() };
    let rep = py.detach(|| run_suite_with(suite, &spec, instances, &opts)).map_err(err)?;
    Ok(serde_json::to_string(&rep).expect("reports serialize"))
}

/// Generates a problem file (JSON text) of the given regime.
#[pyfunction]
#[pyo3(signature = (regime, dim, seed=0))]
fn generate(regime: &str, dim: usize, seed: u64) -> PyResult<String> {
    let regime: Regime = regime.parse().map_err(err)?;
    let inst = generate_instance(&GeneratorSpec::new(dim, seed, regime)).map_err(err)?;
    Ok(serde_json::to_string(&ProblemFile::from_instance(&inst)).expect("problem files serialize"))
}

#[pymodule]
fn krein_lsq_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("KreinError", m.py().get_type::<KreinError>())?;
    m.add_function(wrap_pyfunction!(schur_complement, m)?)?;
    m.add_function(wrap_pyfunction!(solve_ims, m)?)?;
    m.add_function(wrap_pyfunction!(solve_imms, m)?)?;
    m.add_function(wrap_pyfunction!(trace_j, m)?)?;
    m.add_function(wrap_pyfunction!(trace_min, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    Ok(())
}
