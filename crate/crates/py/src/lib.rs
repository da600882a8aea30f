//! Python bindings. Points cross the boundary as `(x, y)` tuples.

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use aniso_eq::analytic;
use aniso_eq::numerics::{self, QuadratureLevel};
use aniso_eq::solver;
use aniso_eq::verify::{self, CheckSettings};
use aniso_eq::{Error, Membership, PlanePoint};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        Error::NumericalFailure { .. } | Error::Json(_) => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn pt(p: (f64, f64)) -> PlanePoint {
    PlanePoint::new(p.0, p.1)
}

fn tup(z: PlanePoint) -> (f64, f64) {
    (z.re, z.im)
}

#[pyclass(frozen, from_py_object, name = "KernelParams", module = "aniso_eq")]
#[derive(Clone, Copy)]
struct PyKernel(aniso_eq::KernelParams);

#[pymethods]
impl PyKernel {
    #[new]
    fn new(alpha: f64) -> PyResult<Self> {
        aniso_eq::KernelParams::new(alpha).map(PyKernel).map_err(to_py)
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha()
    }

    fn in_theorem_range(&self) -> bool {
        self.0.in_theorem_range()
    }

    fn value(&self, z: (f64, f64)) -> PyResult<f64> {
        self.0.value(pt(z)).map_err(to_py)
    }

    fn gradient(&self, z: (f64, f64)) -> PyResult<(f64, f64)> {
        self.0.gradient(pt(z)).map(tup).map_err(to_py)
    }

    fn fourier_density(&self, xi: (f64, f64)) -> PyResult<f64> {
        self.0.fourier_density(pt(xi)).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("KernelParams(alpha={})", self.0.alpha())
    }
}

#[pyclass(frozen, from_py_object, name = "Ellipse", module = "aniso_eq")]
#[derive(Clone, Copy)]
struct PyEllipse(aniso_eq::Ellipse);

#[pymethods]
impl PyEllipse {
    #[new]
    fn new(a: f64, b: f64) -> PyResult<Self> {
        aniso_eq::Ellipse::new(a, b).map(PyEllipse).map_err(to_py)
    }

    #[getter]
    fn a(&self) -> f64 {
        self.0.a()
    }

    #[getter]
    fn b(&self) -> f64 {
        self.0.b()
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.0.lambda()
    }

    fn area(&self) -> f64 {
        self.0.area()
    }

    /// `"interior"`, `"boundary"` or `"exterior"`.
    fn contains(&self, z: (f64, f64)) -> PyResult<&'static str> {
        Ok(match self.0.contains(pt(z)).map_err(to_py)? {
            Membership::Interior => "interior",
            Membership::Boundary => "boundary",
            Membership::Exterior => "exterior",
        })
    }

    /// `(point, tangent, normal)` at parameter `t`.
    fn boundary_point(&self, t: f64) -> ((f64, f64), (f64, f64), (f64, f64)) {
        let bp = self.0.boundary_point(t);
        (tup(bp.point), tup(bp.tangent), tup(bp.normal))
    }

    fn __repr__(&self) -> String {
        format!("Ellipse(a={}, b={})", self.0.a(), self.0.b())
    }
}

#[pyclass(frozen, from_py_object, name = "ParticleConfig", module = "aniso_eq")]
#[derive(Clone)]
struct PyConfig(solver::ParticleConfig);

#[pymethods]
impl PyConfig {
    #[new]
    fn new(points: Vec<(f64, f64)>) -> PyResult<Self> {
        solver::ParticleConfig::new(points.into_iter().map(pt).collect())
            .map(PyConfig)
            .map_err(to_py)
    }

    #[staticmethod]
    fn uniform_square(n: usize, half_width: f64, seed: u64) -> PyResult<Self> {
        solver::ParticleConfig::uniform_square(n, half_width, seed).map(PyConfig).map_err(to_py)
    }

    #[staticmethod]
    fn uniform_ellipse(e: &PyEllipse, n: usize, seed: u64) -> PyResult<Self> {
        aniso_eq::geometry::sample_ellipse_uniform(&e.0, n, seed).map(PyConfig).map_err(to_py)
    }

    fn points(&self) -> Vec<(f64, f64)> {
        self.0.points().iter().map(|&z| tup(z)).collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(frozen, name = "SolveResult", module = "aniso_eq")]
struct PySolveResult(solver::SolveResult);

#[pymethods]
impl PySolveResult {
    #[getter]
    fn final_config(&self) -> PyConfig {
        PyConfig(self.0.final_config.clone())
    }

    #[getter]
    fn energy_trace(&self) -> Vec<f64> {
        self.0.energy_trace.clone()
    }

    #[getter]
    fn grad_norm_trace(&self) -> Vec<f64> {
        self.0.grad_norm_trace.clone()
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
    fn diagnostic(&self) -> Option<String> {
        self.0.diagnostic.clone()
    }
}

#[pyfunction]
fn candidate_axes(p: &PyKernel) -> PyResult<PyEllipse> {
    analytic::candidate_axes(&p.0).map(PyEllipse).map_err(to_py)
}

/// `(coef_z, coef_zbar)` of the interior gradient of `P`.
#[pyfunction]
fn grad_p_coefficients(p: &PyKernel, e: &PyEllipse) -> (f64, f64) {
    let c = analytic::grad_p_coefficients(&p.0, &e.0);
    (c.coef_z, c.coef_zbar)
}

#[pyfunction]
fn cauchy_transform_chi(e: &PyEllipse, z: (f64, f64)) -> PyResult<(f64, f64)> {
    analytic::cauchy_transform_chi(&e.0, pt(z)).map(tup).map_err(to_py)
}

#[pyfunction]
fn h_function(e: &PyEllipse, z: (f64, f64)) -> PyResult<(f64, f64)> {
    analytic::h_function(&e.0, pt(z)).map(tup).map_err(to_py)
}

#[pyfunction]
fn boundary_laplacian_limit(p: &PyKernel, e: &PyEllipse, t: f64) -> f64 {
    analytic::boundary_laplacian_limit(&p.0, &e.0, &e.0.boundary_point(t))
}

/// `P(z)` for the normalised indicator of `e`, by quadrature.
#[pyfunction]
#[pyo3(signature = (p, e, z, target = 1e-11))]
fn potential(py: Python<'_>, p: &PyKernel, e: &PyEllipse, z: (f64, f64), target: f64) -> PyResult<f64> {
    let (p, e) = (p.0, e.0);
    py.detach(|| numerics::potential_on_ellipse_measure(&p, &e, pt(z), &QuadratureLevel::with_target(target)))
        .map_err(to_py)
}

#[pyfunction]
fn c0(p: &PyKernel) -> PyResult<f64> {
    numerics::c0_of(&p.0, &QuadratureLevel::default()).map_err(to_py)
}

#[pyfunction]
fn discrete_energy(py: Python<'_>, p: &PyKernel, c: &PyConfig) -> PyResult<f64> {
    let p = p.0;
    py.detach(|| solver::discrete_energy(&p, &c.0)).map_err(to_py)
}

#[pyfunction]
fn discrete_gradient(py: Python<'_>, p: &PyKernel, c: &PyConfig) -> PyResult<Vec<(f64, f64)>> {
    let p = p.0;
    py.detach(|| solver::discrete_gradient(&p, &c.0))
        .map(|g| g.into_iter().map(tup).collect())
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (p, start, max_iters = 20_000, grad_tol = 1e-6, initial_step = 0.1, backtrack_factor = 0.5, armijo_c = 1e-4, min_sep_guard = 1e-9))]
#[allow(clippy::too_many_arguments)]
fn minimize(
    py: Python<'_>,
    p: &PyKernel,
    start: &PyConfig,
    max_iters: usize,
    grad_tol: f64,
    initial_step: f64,
    backtrack_factor: f64,
    armijo_c: f64,
    min_sep_guard: f64,
) -> PyResult<PySolveResult> {
    let sp = solver::SolveParams {
        max_iters,
        grad_tol,
        initial_step,
        backtrack_factor,
        armijo_c,
        seed: 0,
        min_sep_guard,
    };
    let p = p.0;
    py.detach(|| solver::minimize(&p, &start.0, &sp))
        .map(PySolveResult)
        .map_err(to_py)
}

/// Sample statistics as a JSON string.
#[pyfunction]
fn empirical_stats(c: &PyConfig) -> PyResult<String> {
    let s = solver::empirical_stats(&c.0).map_err(to_py)?;
    serde_json::to_string(&s).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pyfunction]
fn y_marginal_vs_semicircle(c: &PyConfig, radius: f64) -> PyResult<f64> {
    solver::y_marginal_vs_semicircle(&c.0, radius).map_err(to_py)
}

/// Runs a named verification check with default settings; returns the report as JSON.
#[pyfunction]
fn run_check(py: Python<'_>, name: &str, p: &PyKernel) -> PyResult<String> {
    let p = p.0;
    let r = py.detach(|| verify::run_check(name, &p, &CheckSettings::default())).map_err(to_py)?;
    serde_json::to_string(&r).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
#[pyo3(name = "aniso_eq")]
fn aniso_eq_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyKernel>()?;
    m.add_class::<PyEllipse>()?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PySolveResult>()?;
    m.add_function(wrap_pyfunction!(candidate_axes, m)?)?;
    m.add_function(wrap_pyfunction!(grad_p_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(cauchy_transform_chi, m)?)?;
    m.add_function(wrap_pyfunction!(h_function, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_laplacian_limit, m)?)?;
    m.add_function(wrap_pyfunction!(potential, m)?)?;
    m.add_function(wrap_pyfunction!(c0, m)?)?;
    m.add_function(wrap_pyfunction!(discrete_energy, m)?)?;
    m.add_function(wrap_pyfunction!(discrete_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_stats, m)?)?;
    m.add_function(wrap_pyfunction!(y_marginal_vs_semicircle, m)?)?;
    m.add_function(wrap_pyfunction!(run_check, m)?)?;
    m.add("CHECK_NAMES", verify::CHECK_NAMES.to_vec())?;
    Ok(())
}
