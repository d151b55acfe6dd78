//! Python module `bubqkd`.
//!
//! Parameter sets and Monte-Carlo reports are classes; sweeps and analytic
//! reports come back as plain dicts and lists.

use bubqkd::collective::{self, CollectiveParams as CoreCollective};
use bubqkd::intercept::{self, closed_form, FgUvTable, InterceptParams as CoreIntercept, SymmetricBranch};
use bubqkd::montecarlo::{self, FrequencyReport as CoreReport};
use bubqkd::protocol::{self, MeasurementAxis, Outcome};
use bubqkd::qmath::{ComplexMatrix, HermitianOperator, StateVector};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any().unbind(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any().unbind(),
            (None, Some(u)) => u.into_pyobject(py)?.into_any().unbind(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any().unbind(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(a) => {
            let items = a.iter().map(|x| json_to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any().unbind()
        }
        Value::Object(m) => {
            let d = PyDict::new(py);
            for (k, x) in m {
                d.set_item(k, json_to_py(py, x)?)?;
            }
            d.into_any().unbind()
        }
    })
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    json_to_py(py, &serde_json::to_value(value).map_err(value_err)?)
}

fn axis_from(s: &str) -> PyResult<MeasurementAxis> {
    match s {
        "x" | "X" => Ok(MeasurementAxis::X),
        "y" | "Y" => Ok(MeasurementAxis::Y),
        "z" | "Z" => Ok(MeasurementAxis::Z),
        _ => Err(PyValueError::new_err(format!("axis must be 'x', 'y' or 'z', got {s:?}"))),
    }
}

fn outcome_from(v: i64) -> PyResult<Outcome> {
    Outcome::from_value(v).map_err(value_err)
}

fn table_dict(py: Python<'_>, t: &FgUvTable) -> PyResult<Py<PyAny>> {
    to_py(py, t)
}

fn state_from(amps: Vec<Complex64>) -> PyResult<StateVector> {
    StateVector::new(&amps).map_err(value_err)
}

fn operator_from(rows: Vec<Vec<Complex64>>) -> PyResult<HermitianOperator> {
    let refs: Vec<&[Complex64]> = rows.iter().map(Vec::as_slice).collect();
    let m = ComplexMatrix::from_rows(&refs).map_err(value_err)?;
    HermitianOperator::new(m).map_err(value_err)
}

/// Intercept-resend attack angles; `gamma` never affects a probability.
#[pyclass(frozen, module = "bubqkd")]
pub struct InterceptParams {
    inner: CoreIntercept,
}

#[pymethods]
impl InterceptParams {
    #[new]
    #[pyo3(signature = (alpha, beta, gamma = 0.0))]
    fn new(alpha: f64, beta: f64, gamma: f64) -> PyResult<Self> {
        Ok(Self { inner: CoreIntercept::new(alpha, beta, gamma).map_err(value_err)? })
    }

    #[staticmethod]
    fn breidbart() -> Self {
        Self { inner: CoreIntercept::breidbart() }
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    /// `{"f": [..4], "g": [..], "u": [..], "v": [..]}` from the amplitudes.
    fn fg_uv(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        table_dict(py, &intercept::fg_uv_table(&self.inner))
    }

    fn attack_amplitude(&self, r_index: usize, axis: &str, bob: i64, eve: i64) -> PyResult<Complex64> {
        intercept::attack_amplitude(r_index, axis_from(axis)?, outcome_from(bob)?, outcome_from(eve)?, &self.inner)
            .map_err(value_err)
    }

    fn q_ratios(&self) -> [f64; 4] {
        intercept::q_ratio_4(&self.inner)
    }

    /// P1, P2, q weights and Q ratios; `None` when a weight vanishes.
    fn report(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        match intercept::ir_report(&self.inner) {
            Some(r) => to_py(py, &r),
            None => Ok(py.None()),
        }
    }

    fn __repr__(&self) -> String {
        format!("InterceptParams(alpha={}, beta={}, gamma={})", self.inner.alpha, self.inner.beta, self.inner.gamma)
    }
}

/// Collective-attack angles with the fidelity they imply.
#[pyclass(frozen, module = "bubqkd")]
pub struct CollectiveParams {
    inner: CoreCollective,
}

#[pymethods]
impl CollectiveParams {
    /// Raises `ValueError` where the fidelity is undefined.
    #[new]
    fn new(a: f64, b: f64) -> PyResult<Self> {
        match CoreCollective::from_angles(a, b).map_err(value_err)? {
            Some(inner) => Ok(Self { inner }),
            None => Err(PyValueError::new_err(format!("fidelity is undefined at (a, b) = ({a}, {b})"))),
        }
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn fidelity(&self) -> f64 {
        self.inner.fidelity
    }

    fn k_value(&self, axis: &str, bob: i64, r_index: usize) -> PyResult<f64> {
        collective::k_value(axis_from(axis)?, outcome_from(bob)?, r_index, &self.inner).map_err(value_err)
    }

    fn probe_state(&self, axis: &str, bob: i64, r_index: usize) -> PyResult<Vec<Complex64>> {
        let s = collective::probe_state(axis_from(axis)?, outcome_from(bob)?, r_index, &self.inner).map_err(value_err)?;
        Ok(s.vector.amps().to_vec())
    }

    /// `{"a", "b", "fidelity", "p_ab", "p_e"}`.
    fn report(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &collective::report(&self.inner).map_err(value_err)?)
    }

    fn __repr__(&self) -> String {
        format!("CollectiveParams(a={}, b={}, fidelity={})", self.inner.a, self.inner.b, self.inner.fidelity)
    }
}

/// Monte-Carlo tallies against their analytic expectations.
#[pyclass(frozen, module = "bubqkd")]
pub struct FrequencyReport {
    inner: CoreReport,
}

#[pymethods]
impl FrequencyReport {
    #[getter]
    fn scenario(&self) -> &'static str {
        self.inner.scenario.label()
    }

    #[getter]
    fn trials(&self) -> u64 {
        self.inner.trials
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn max_sigma_deviation(&self) -> f64 {
        self.inner.max_sigma_deviation
    }

    #[getter]
    fn table1_violations(&self) -> u64 {
        self.inner.table1_violations
    }

    #[getter]
    fn cells(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.cells)
    }

    #[getter]
    fn checks(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.checks)
    }

    fn check(&self, py: Python<'_>, name: &str) -> PyResult<Py<PyAny>> {
        match self.inner.check(name) {
            Some(c) => to_py(py, c),
            None => Ok(py.None()),
        }
    }

    fn all_checks_pass(&self) -> bool {
        self.inner.all_checks_pass()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "FrequencyReport(scenario={:?}, trials={}, seed={}, max_sigma_deviation={:.3})",
            self.inner.scenario.label(),
            self.inner.trials,
            self.inner.seed,
            self.inner.max_sigma_deviation
        )
    }
}

#[pyfunction]
fn initial_state() -> Vec<Complex64> {
    protocol::initial_state().amps().to_vec()
}

/// The four detection states r1..r4 as amplitude lists.
#[pyfunction]
fn r_basis() -> Vec<Vec<Complex64>> {
    protocol::r_basis().vectors().iter().map(|v| v.amps().to_vec()).collect()
}

/// Rows r1..r4 of `[sigma_x, sigma_z]` outcomes.
#[pyfunction]
fn table1() -> PyResult<Vec<[i8; 2]>> {
    let t = protocol::table1().map_err(value_err)?;
    Ok(t.entries.iter().map(|row| row.map(Outcome::value)).collect())
}

/// ABL probability of `projectors[which]` between `pre` and `post`.
#[pyfunction]
fn abl_probability(pre: Vec<Complex64>, post: Vec<Complex64>, projectors: Vec<Vec<Vec<Complex64>>>, which: usize) -> PyResult<Option<f64>> {
    let ops = projectors.into_iter().map(operator_from).collect::<PyResult<Vec<_>>>()?;
    protocol::abl_probability(&state_from(pre)?, &state_from(post)?, &ops, which).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (alpha, branch = "plus"))]
fn symmetric_beta(alpha: f64, branch: &str) -> PyResult<f64> {
    let b = match branch {
        "plus" => SymmetricBranch::Plus,
        "minus" => SymmetricBranch::Minus,
        _ => return Err(PyValueError::new_err("branch must be 'plus' or 'minus'")),
    };
    Ok(intercept::symmetric_beta(alpha, b))
}

#[pyfunction]
fn p1(alpha: f64) -> Option<f64> {
    intercept::p1(alpha)
}

/// `(P2, q1, q2)` on the symmetric branch.
#[pyfunction]
fn p2(alpha: f64) -> Option<(f64, f64, f64)> {
    intercept::p2(alpha)
}

#[pyfunction]
fn p2_tilde(alpha: f64) -> Option<f64> {
    intercept::p2_tilde(alpha)
}

/// f/g/u/v from the trigonometric closed forms.
#[pyfunction]
fn closed_form_fg_uv(py: Python<'_>, alpha: f64, beta: f64) -> PyResult<Py<PyAny>> {
    table_dict(py, &closed_form::fg_uv(alpha, beta))
}

#[pyfunction]
fn fidelity_from_ab(a: f64, b: f64) -> Option<f64> {
    collective::fidelity_from_ab(a, b)
}

#[pyfunction]
fn p_eve(py: Python<'_>, a: f64, b: f64) -> PyResult<Py<PyAny>> {
    match collective::p_eve(a, b).map_err(value_err)? {
        Some(r) => to_py(py, &r),
        None => Ok(py.None()),
    }
}

#[pyfunction]
#[pyo3(signature = (points = 720))]
fn sweep_ir(py: Python<'_>, points: usize) -> PyResult<Py<PyAny>> {
    let s = py.detach(|| intercept::sweep_ir(points)).map_err(value_err)?;
    to_py(py, &s)
}

/// `{"grid": …, "slice": …, "invalid_cells": …}`; invalid values are `None`.
#[pyfunction]
#[pyo3(signature = (n_max = 200, m_max = 200))]
fn sweep_collective(py: Python<'_>, n_max: usize, m_max: usize) -> PyResult<Py<PyAny>> {
    let s = py.detach(|| collective::sweep_collective(n_max, m_max)).map_err(value_err)?;
    to_py(py, &s)
}

#[pyfunction]
fn simulate_honest(py: Python<'_>, trials: u64, seed: u64) -> PyResult<FrequencyReport> {
    let inner = py.detach(|| montecarlo::simulate_honest(trials, seed)).map_err(value_err)?;
    Ok(FrequencyReport { inner })
}

#[pyfunction]
fn simulate_ir(py: Python<'_>, params: &InterceptParams, trials: u64, seed: u64) -> PyResult<FrequencyReport> {
    let p = params.inner;
    let inner = py.detach(|| montecarlo::simulate_ir(&p, trials, seed)).map_err(value_err)?;
    Ok(FrequencyReport { inner })
}

#[pyfunction]
fn simulate_collective(py: Python<'_>, params: &CollectiveParams, trials: u64, seed: u64) -> PyResult<FrequencyReport> {
    let p = params.inner;
    let inner = py.detach(|| montecarlo::simulate_collective(&p, trials, seed)).map_err(value_err)?;
    Ok(FrequencyReport { inner })
}

#[pymodule(name = "bubqkd")]
fn bubqkd_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<InterceptParams>()?;
    m.add_class::<CollectiveParams>()?;
    m.add_class::<FrequencyReport>()?;
    m.add_function(wrap_pyfunction!(initial_state, m)?)?;
    m.add_function(wrap_pyfunction!(r_basis, m)?)?;
    m.add_function(wrap_pyfunction!(table1, m)?)?;
    m.add_function(wrap_pyfunction!(abl_probability, m)?)?;
    m.add_function(wrap_pyfunction!(symmetric_beta, m)?)?;
    m.add_function(wrap_pyfunction!(p1, m)?)?;
    m.add_function(wrap_pyfunction!(p2, m)?)?;
    m.add_function(wrap_pyfunction!(p2_tilde, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_fg_uv, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity_from_ab, m)?)?;
    m.add_function(wrap_pyfunction!(p_eve, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_ir, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_collective, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_honest, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_ir, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_collective, m)?)?;
    Ok(())
}
