//! Python bindings for `restricted-orbits`.
//!
//! Reports are returned as plain dictionaries; option and threshold
//! overrides are accepted as dictionaries with the same keys as the JSON
//! configuration files.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::de::DeserializeOwned;
use serde::Serialize;

use restricted_orbits as ro;
use restricted_orbits::loops::Loop;

fn to_py_err(e: ro::Error) -> PyErr {
    match e {
        ro::Error::NonPositiveMass { .. }
        | ro::Error::InvalidParameter(_)
        | ro::Error::SymmetryViolation(_)
        | ro::Error::Format(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_dict<T: DeserializeOwned + Default>(py: Python<'_>, value: Option<&Bound<'_, PyDict>>) -> PyResult<T> {
    let Some(d) = value else {
        return Ok(T::default());
    };
    let text: String = py.import("json")?.call_method1("dumps", (d,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Positive masses of the three primaries.
#[pyclass(name = "Masses", frozen)]
#[derive(Clone, Copy)]
struct PyMasses(ro::Masses);

#[pymethods]
impl PyMasses {
    #[new]
    fn new(m1: f64, m2: f64, m3: f64) -> PyResult<Self> {
        ro::Masses::new(m1, m2, m3).map(Self).map_err(to_py_err)
    }

    #[getter]
    fn values(&self) -> [f64; 3] {
        self.0.as_array()
    }

    #[getter]
    fn total(&self) -> f64 {
        self.0.total()
    }

    fn __repr__(&self) -> String {
        let [a, b, c] = self.0.as_array();
        format!("Masses({a}, {b}, {c})")
    }
}

/// Primaries on their Lagrange orbits of period `T`.
#[pyclass(name = "Primaries", frozen)]
#[derive(Clone, Copy)]
struct PyPrimaries(ro::Primaries);

#[pymethods]
impl PyPrimaries {
    #[new]
    #[pyo3(signature = (masses, T = 1.0))]
    #[allow(non_snake_case)]
    fn new(masses: &PyMasses, T: f64) -> PyResult<Self> {
        ro::Primaries::new(masses.0, T).map(Self).map_err(to_py_err)
    }

    #[getter]
    fn masses(&self) -> PyMasses {
        PyMasses(self.0.masses)
    }

    #[getter]
    fn period(&self) -> f64 {
        self.0.config.period()
    }

    #[getter]
    fn side(&self) -> f64 {
        self.0.config.side()
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.0.config.omega()
    }

    #[getter]
    fn radii(&self) -> [f64; 3] {
        self.0.config.radii()
    }

    #[getter]
    fn phases(&self) -> [f64; 3] {
        self.0.config.phases()
    }

    /// Position of primary `i` (0-based) at time `t`.
    fn position(&self, i: usize, t: f64) -> PyResult<(f64, f64)> {
        if i > 2 {
            return Err(PyValueError::new_err("primary index must be 0, 1 or 2"));
        }
        let p = self.0.config.position(i, t);
        Ok((p.x, p.y))
    }

    /// Threshold `d1` and the constant `C` as a dictionary.
    fn bounds<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &ro::collision_lower_bound_d1(&self.0.masses, self.0.config.period()))
    }
}

/// Loop with odd harmonics `1, 3, ..., 2K-1`.
#[pyclass(name = "FourierLoop", frozen)]
#[derive(Clone)]
struct PyFourierLoop(ro::FourierLoop);

#[pymethods]
impl PyFourierLoop {
    #[staticmethod]
    #[allow(non_snake_case)]
    fn zero(T: f64, K: usize) -> Self {
        Self(ro::FourierLoop::zero(T, K))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        ro::FourierLoop::from_json(text).map(Self).map_err(to_py_err)
    }

    /// Coefficients laid out as `[cx, cy, sx, sy]` per harmonic.
    #[staticmethod]
    #[allow(non_snake_case)]
    fn from_vector(T: f64, v: Vec<f64>) -> PyResult<Self> {
        ro::FourierLoop::from_vector(T, &v).map(Self).map_err(to_py_err)
    }

    /// Projection of the elliptic test loop onto `K` harmonics.
    #[staticmethod]
    #[pyo3(signature = (primaries, a, b, theta, K = 16))]
    #[allow(non_snake_case)]
    fn elliptic(primaries: &PyPrimaries, a: f64, b: f64, theta: f64, K: usize) -> PyResult<Self> {
        let lp = ro::EllipticLoop::new(ro::EllipticLoopParams { a, b, theta }, &primaries.0.config).map_err(to_py_err)?;
        ro::project_to_fourier(&lp, K, 8 * K).map(Self).map_err(to_py_err)
    }

    /// Projection of the circular test loop onto `K` harmonics.
    #[staticmethod]
    #[pyo3(signature = (primaries, a, theta, K = 16))]
    #[allow(non_snake_case)]
    fn circular(primaries: &PyPrimaries, a: f64, theta: f64, K: usize) -> PyResult<Self> {
        let lp = ro::CircularLoop::new(ro::CircularLoopParams { a, theta }, &primaries.0.config).map_err(to_py_err)?;
        ro::project_to_fourier(&lp, K, 8 * K).map(Self).map_err(to_py_err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn to_vector(&self) -> Vec<f64> {
        self.0.to_vector()
    }

    #[getter]
    #[allow(non_snake_case)]
    fn K(&self) -> usize {
        self.0.harmonics()
    }

    #[getter]
    fn period(&self) -> f64 {
        self.0.period()
    }

    fn position(&self, t: f64) -> (f64, f64) {
        let p = self.0.position(t);
        (p.x, p.y)
    }

    fn velocity(&self, t: f64) -> (f64, f64) {
        let v = self.0.velocity(t);
        (v.x, v.y)
    }

    /// Winding number of `q - q1` about the origin.
    fn degree(&self, primaries: &PyPrimaries) -> PyResult<i64> {
        let cfg = primaries.0.config;
        ro::winding::relative_degree(&self.0, |t| cfg.position(0, t), 1024)
            .map(|w| w.degree)
            .map_err(to_py_err)
    }

    /// Smallest distance to each primary over one period.
    #[pyo3(signature = (primaries, points = 1024))]
    fn min_separations(&self, primaries: &PyPrimaries, points: usize) -> [f64; 3] {
        ro::min_separation(&self.0, &primaries.0, points)
    }

    fn __repr__(&self) -> String {
        format!("FourierLoop(T={}, K={})", self.0.period(), self.0.harmonics())
    }
}

#[pyclass(name = "MinimizeResult", frozen)]
struct PyMinimizeResult(ro::MinimizeResult);

#[pymethods]
impl PyMinimizeResult {
    #[getter]
    fn orbit(&self) -> PyFourierLoop {
        PyFourierLoop(self.0.orbit.clone())
    }

    #[getter]
    fn action(&self) -> f64 {
        self.0.action
    }

    #[getter]
    fn initial_action(&self) -> f64 {
        self.0.initial_action
    }

    #[getter]
    fn grad_norm(&self) -> f64 {
        self.0.grad_norm
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.0.iterations
    }

    #[getter]
    fn converged(&self) -> bool {
        self.0.converged
    }

    #[getter]
    fn status<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &self.0.status)
    }

    #[getter]
    fn min_separations(&self) -> [f64; 3] {
        self.0.min_separations
    }

    /// `(K, action)` per harmonic level visited.
    #[getter]
    fn refinement(&self) -> Vec<(usize, f64)> {
        self.0.refinement.clone()
    }

    /// Certification report of the minimizer against `expected_degree`.
    #[pyo3(signature = (primaries, expected_degree, thresholds = None))]
    fn certify<'py>(
        &self,
        py: Python<'py>,
        primaries: &PyPrimaries,
        expected_degree: i64,
        thresholds: Option<&Bound<'py, PyDict>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let th: ro::Thresholds = from_dict(py, thresholds)?;
        let report = ro::certify_minimizer(&self.0, &primaries.0, expected_degree, &th).map_err(to_py_err)?;
        to_dict(py, &report)
    }
}

/// Action by direct quadrature, returned as `{kinetic, potential, total}`.
#[pyfunction]
#[pyo3(signature = (lp, primaries, quadrature = None))]
fn action<'py>(
    py: Python<'py>,
    lp: &PyFourierLoop,
    primaries: &PyPrimaries,
    quadrature: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyAny>> {
    let qs: ro::QuadratureSettings = from_dict(py, quadrature)?;
    let b = ro::action_direct(&lp.0, &primaries.0, &qs).map_err(to_py_err)?;
    to_dict(py, &b)
}

/// Action of the elliptic test loop.
#[pyfunction]
fn action_elliptic(primaries: &PyPrimaries, a: f64, b: f64, theta: f64) -> PyResult<f64> {
    let p = ro::EllipticLoopParams { a, b, theta };
    ro::action_d2(&p, &primaries.0, &Default::default()).map_err(to_py_err)
}

/// Action of the circular test loop.
#[pyfunction]
fn action_circular(primaries: &PyPrimaries, a: f64, theta: f64) -> PyResult<f64> {
    let p = ro::CircularLoopParams { a, theta };
    ro::action_d3(&p, &primaries.0, &Default::default()).map_err(to_py_err)
}

/// Minimizes the action from `init`; `refine` doubles `K` until the action settles.
#[pyfunction]
#[pyo3(signature = (init, primaries, options = None, refine = false))]
fn minimize(
    py: Python<'_>,
    init: &PyFourierLoop,
    primaries: &PyPrimaries,
    options: Option<&Bound<'_, PyDict>>,
    refine: bool,
) -> PyResult<PyMinimizeResult> {
    let opts: ro::MinimizeOptions = from_dict(py, options)?;
    let (init, field) = (init.0.clone(), primaries.0);
    let result = py.allow_threads(|| {
        if refine {
            ro::minimize_with_refinement(&init, &field, &opts)
        } else {
            ro::minimize_action(&init, &field, &opts)
        }
    });
    result.map(PyMinimizeResult).map_err(to_py_err)
}

/// Runs every certification check on a loop.
#[pyfunction]
#[pyo3(signature = (lp, primaries, expected_degree = None, thresholds = None))]
fn verify<'py>(
    py: Python<'py>,
    lp: &PyFourierLoop,
    primaries: &PyPrimaries,
    expected_degree: Option<i64>,
    thresholds: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyAny>> {
    let th: ro::Thresholds = from_dict(py, thresholds)?;
    let report = ro::verify_loop(&lp.0, &primaries.0, expected_degree, &th).map_err(to_py_err)?;
    to_dict(py, &report)
}

/// Recomputed reference table rows as dictionaries.
#[pyfunction]
fn table<'py>(py: Python<'py>, number: u8) -> PyResult<Vec<Bound<'py, PyAny>>> {
    if !(1..=4).contains(&number) {
        return Err(PyValueError::new_err("table number must be 1, 2, 3 or 4"));
    }
    let qs = ro::QuadratureSettings::default();
    let rows: Vec<_> = py.allow_threads(|| {
        ro::tables::table_rows(number)
            .map(|r| ro::tables::evaluate_row(r, &qs))
            .collect()
    });
    rows.iter()
        .map(|e| {
            let d = to_dict(py, &e.row)?;
            d.set_item("d1", e.d1)?;
            d.set_item("d", e.d)?;
            d.set_item("certified", e.certified())?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn restricted_orbits_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMasses>()?;
    m.add_class::<PyPrimaries>()?;
    m.add_class::<PyFourierLoop>()?;
    m.add_class::<PyMinimizeResult>()?;
    m.add_function(wrap_pyfunction!(action, m)?)?;
    m.add_function(wrap_pyfunction!(action_elliptic, m)?)?;
    m.add_function(wrap_pyfunction!(action_circular, m)?)?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(table, m)?)?;
    Ok(())
}
