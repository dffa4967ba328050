//! Python module `weyl_lab`: coefficients, boxes, moments and the exact
//! oracles of `weyl-core`. Moment-curve systems are selected by `d`.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use weyl_core::counting;
use weyl_core::measures::{self, GraphSurface, SurfaceFamily};
use weyl_core::moments::{self, DecouplingStatement, QuadratureSpec};
use weyl_core::recipes::{realize, SequenceRecipe};
use weyl_core::{Complex64, Error, Limits, PhaseSystem};

create_exception!(weyl_lab, ResourceError, PyRuntimeError);

fn py_err(e: Error) -> PyErr {
    if e.is_resource() {
        ResourceError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for weyl_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn curve(d: usize) -> PhaseSystem {
    PhaseSystem::MomentCurve { d }
}

fn quad(text: &str, seed: u64) -> PyResult<QuadratureSpec> {
    QuadratureSpec::parse(text, seed).py()
}

/// Finite coefficient sequence on an interval or a set of lattice points.
#[pyclass(frozen, skip_from_py_object, name = "Coefficients")]
#[derive(Clone)]
struct PyCoefficients(weyl_core::Coefficients);

#[pymethods]
impl PyCoefficients {
    /// Coefficients `values` on `[lo, lo + len - 1]`.
    #[new]
    fn new(lo: i64, values: Vec<Complex64>) -> PyResult<Self> {
        weyl_core::Coefficients::interval(lo, values).py().map(Self)
    }

    #[staticmethod]
    fn constant(lo: i64, hi: i64) -> PyResult<Self> {
        weyl_core::Coefficients::constant(lo, hi).py().map(Self)
    }

    #[staticmethod]
    fn spike(n: i64) -> Self {
        Self(weyl_core::Coefficients::spike(n))
    }

    /// Realizes a recipe (`const`, `rademacher:<seed>`, `unimodular:<seed>`, JSON) on `[lo, hi]`.
    #[staticmethod]
    fn from_recipe(recipe: &str, lo: i64, hi: i64) -> PyResult<Self> {
        let r = SequenceRecipe::parse(recipe).py()?;
        realize(&r, &weyl_core::Support::Interval { lo, hi }).py().map(Self)
    }

    fn values(&self) -> Vec<Complex64> {
        self.0.values().to_vec()
    }

    fn norm(&self, p: f64) -> f64 {
        self.0.norm(p)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Coefficients(len={}, l2={})", self.0.len(), self.0.l2())
    }
}

/// Axis-parallel box in the torus.
#[pyclass(frozen, skip_from_py_object, name = "TorusBox")]
#[derive(Clone)]
struct PyTorusBox(weyl_core::TorusBox);

#[pymethods]
impl PyTorusBox {
    #[new]
    fn new(anchor: Vec<f64>, sides: Vec<f64>) -> PyResult<Self> {
        weyl_core::TorusBox::new(anchor, sides).py().map(Self)
    }

    #[staticmethod]
    fn full(d: usize) -> Self {
        Self(weyl_core::TorusBox::full(d))
    }

    /// `full`, `dyadic:<j>`, `cube:<side>` or `a1,..;s1,..`.
    #[staticmethod]
    fn parse(text: &str, d: usize) -> PyResult<Self> {
        weyl_core::TorusBox::parse(text, d).py().map(Self)
    }

    #[getter]
    fn anchor(&self) -> Vec<f64> {
        self.0.anchor().to_vec()
    }

    #[getter]
    fn sides(&self) -> Vec<f64> {
        self.0.sides().to_vec()
    }

    fn volume(&self) -> f64 {
        self.0.volume()
    }
}

#[pyclass(frozen, name = "MomentResult", get_all)]
struct PyMomentResult {
    value: f64,
    abs_error: f64,
    method: String,
    p: f64,
    d: usize,
    n_terms: usize,
    region: String,
    seed: Option<u64>,
    evaluations: u64,
}

#[pymethods]
impl PyMomentResult {
    fn __repr__(&self) -> String {
        format!("MomentResult(value={}, abs_error={}, method={})", self.value, self.abs_error, self.method)
    }
}

impl From<weyl_core::MomentResult> for PyMomentResult {
    fn from(m: weyl_core::MomentResult) -> Self {
        Self {
            value: m.value,
            abs_error: m.abs_error,
            method: m.method.to_string(),
            p: m.p,
            d: m.d,
            n_terms: m.n_terms,
            region: m.region,
            seed: m.seed,
            evaluations: m.evaluations,
        }
    }
}

/// `S(x) = Σ a_n e(n x_1 + … + n^d x_d)`.
#[pyfunction]
fn eval_sum(a: &PyCoefficients, d: usize, x: Vec<f64>) -> PyResult<Complex64> {
    if x.len() != d {
        return Err(PyValueError::new_err(format!("x needs {d} coordinates")));
    }
    let table = a.0.frequencies(&curve(d)).py()?;
    Ok(weyl_core::expsum::eval_table(&table, a.0.values(), &x))
}

/// `∫_box |S|^p`; `quad` is `grid`, `grid:<counts>` or `mc:<samples>`.
#[pyfunction]
#[pyo3(signature = (a, d, bx, p, quad="grid", seed=1))]
fn box_moment(py: Python<'_>, a: &PyCoefficients, d: usize, bx: &PyTorusBox, p: f64, quad: &str, seed: u64) -> PyResult<PyMomentResult> {
    let q = self::quad(quad, seed)?;
    let (a, bx) = (a.0.clone(), bx.0.clone());
    py.detach(move || moments::box_moment(&a, &curve(d), &bx, p, &q, &Limits::default())).py().map(Into::into)
}

#[pyfunction]
fn even_moment_count(py: Python<'_>, a: &PyCoefficients, d: usize, l: u32) -> PyResult<f64> {
    let a = a.0.clone();
    py.detach(move || counting::even_moment_count(&a, &curve(d), l, &Limits::default())).py()
}

#[pyfunction]
fn box_moment_exact(py: Python<'_>, a: &PyCoefficients, d: usize, bx: &PyTorusBox, l: u32) -> PyResult<f64> {
    let (a, bx) = (a.0.clone(), bx.0.clone());
    py.detach(move || counting::box_moment_exact(&a, &curve(d), &bx, l, &Limits::default())).py()
}

#[pyfunction]
fn vinogradov_count(d: usize, l: u32, n: i64) -> PyResult<u128> {
    counting::vinogradov_count(d, l, n, &Limits::default()).py()
}

/// Moment against the surface measure of `surface` (`square`, `circle:<r>`, …).
#[pyfunction]
#[pyo3(signature = (a, surface, p, quad="grid", seed=1))]
fn surface_moment(py: Python<'_>, a: &PyCoefficients, surface: &str, p: f64, quad: &str, seed: u64) -> PyResult<PyMomentResult> {
    let s = GraphSurface::new(SurfaceFamily::parse(surface).py()?).py()?;
    let q = self::quad(quad, seed)?;
    let a = a.0.clone();
    py.detach(move || moments::surface_moment(&a, &curve(s.d), &s, p, &q, &Limits::default())).py().map(Into::into)
}

/// `(σ̂(ξ), error estimate)`.
#[pyfunction]
fn surface_fourier(surface: &str, xi: Vec<i64>) -> PyResult<(Complex64, f64)> {
    let s = GraphSurface::new(SurfaceFamily::parse(surface).py()?).py()?;
    measures::surface_fourier_estimate(&s, &xi).py()
}

#[pyfunction]
#[pyo3(signature = (a, d, beta, l=1))]
fn kernel_moment(a: &PyCoefficients, d: usize, beta: f64, l: u32) -> PyResult<f64> {
    let k = measures::DecayKernel::new(beta).py()?;
    moments::kernel_moment(&a.0, &curve(d), &k, l, &Limits::default()).py()
}

/// `(ratio, ratio standard error)` of a decoupling statement (`a10`, `a11`, `a32`, `d32`, `c7`).
#[pyfunction]
#[pyo3(signature = (statement, n, a, samples=65536, seed=1))]
fn decoupling_ratio(py: Python<'_>, statement: &str, n: u64, a: &PyCoefficients, samples: usize, seed: u64) -> PyResult<(f64, f64)> {
    let stmt = DecouplingStatement::parse(statement).py()?;
    let a = a.0.clone();
    let r = py.detach(move || moments::decoupling_ratio(stmt, n, &a, samples, seed, &Limits::default())).py()?;
    Ok((r.ratio, r.ratio_stderr))
}

/// `(d(d-1), ρ_d, d(d+1))`.
#[pyfunction]
fn critical_exponents(d: u64) -> PyResult<(u64, u64, u64)> {
    let c = weyl_core::exponents::critical_exponents(d).py()?;
    Ok((c.surface, c.decay, c.vinogradov))
}

#[pyfunction]
fn circle_lattice(n: i64) -> PyResult<Vec<(i64, i64)>> {
    Ok(counting::circle_lattice(n).py()?.points)
}

#[pyfunction]
fn arc_max_count(n: i64, gamma: f64) -> PyResult<usize> {
    counting::arc_max_count(n, gamma).py()
}

#[pyfunction]
fn l4_kernel_sup(py: Python<'_>, n: i64, beta: f64) -> PyResult<f64> {
    py.detach(move || counting::l4_kernel_sup(n, beta, &Limits::default())).py().map(|s| s.sup)
}

/// `(slope, slope standard error)` of `log₂ y` against `log₂ x`.
#[pyfunction]
fn fit_log_log(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<(f64, f64)> {
    let f = weyl_core::fit::FitResult::log_log(&xs, &ys).py()?;
    Ok((f.slope, f.slope_stderr))
}

/// Runs an acceptance suite and returns its JSON report.
#[pyfunction]
#[pyo3(signature = (suite, beta=None))]
fn verify(py: Python<'_>, suite: &str, beta: Option<f64>) -> PyResult<String> {
    let suite = weyl_core::verify::Suite::parse(suite).py()?;
    let opts = weyl_core::verify::VerifyOptions { beta, limits: Limits::default() };
    let report = py.detach(move || weyl_core::verify::run_suite(suite, &opts)).py()?;
    serde_json::to_string(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn weyl_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ResourceError", m.py().get_type::<ResourceError>())?;
    m.add_class::<PyCoefficients>()?;
    m.add_class::<PyTorusBox>()?;
    m.add_class::<PyMomentResult>()?;
    m.add_function(wrap_pyfunction!(eval_sum, m)?)?;
    m.add_function(wrap_pyfunction!(box_moment, m)?)?;
    m.add_function(wrap_pyfunction!(even_moment_count, m)?)?;
    m.add_function(wrap_pyfunction!(box_moment_exact, m)?)?;
    m.add_function(wrap_pyfunction!(vinogradov_count, m)?)?;
    m.add_function(wrap_pyfunction!(surface_moment, m)?)?;
    m.add_function(wrap_pyfunction!(surface_fourier, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_moment, m)?)?;
    m.add_function(wrap_pyfunction!(decoupling_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(critical_exponents, m)?)?;
    m.add_function(wrap_pyfunction!(circle_lattice, m)?)?;
    m.add_function(wrap_pyfunction!(arc_max_count, m)?)?;
    m.add_function(wrap_pyfunction!(l4_kernel_sup, m)?)?;
    m.add_function(wrap_pyfunction!(fit_log_log, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
