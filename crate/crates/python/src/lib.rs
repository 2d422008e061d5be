//! Python bindings. Fields cross the boundary as lists of floats; reports,
//! certificates and specs cross as dicts through JSON.

use metric_lab::ahlfors::{default_window, select_centers};
use metric_lab::verify::{FunctionalParams, SharpnessConfig};
use metric_lab::{
    self as ml, AngularPattern, CenterSelection, CheckContext, FieldDistribution, FunctionalCase, NormSpec,
    PointwiseParams, ScalarField, Theorem, WeightMode,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

create_exception!(metric_lab_py, MetricLabError, PyException);

fn err(e: ml::Error) -> PyErr {
    match e {
        ml::Error::InvalidArgument(_) => PyValueError::new_err(e.to_string()),
        _ => MetricLabError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: DeserializeOwned>(obj: &Bound<'_, PyAny>, what: &str) -> PyResult<T> {
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(format!("{what}: {e}")))
}

#[pyclass(name = "Space", module = "metric_lab_py", frozen)]
struct PySpace {
    inner: ml::Space,
}

impl PySpace {
    fn field(&self, values: Vec<f64>) -> PyResult<ScalarField> {
        ScalarField::new(&self.inner, values).map_err(err)
    }
}

#[pymethods]
impl PySpace {
    /// Regular grid on `[0,1]^dim`; `weights` is "cell-volume" or "uniform-total-1".
    #[staticmethod]
    #[pyo3(signature = (dim, n_per_side, weights = "cell-volume"))]
    fn grid(dim: usize, n_per_side: usize, weights: &str) -> PyResult<PySpace> {
        let mode = match weights {
            "cell-volume" => WeightMode::CellVolume,
            "uniform-total-1" => WeightMode::UniformTotal1,
            other => return Err(PyValueError::new_err(format!("unknown weight mode {other:?}"))),
        };
        Ok(PySpace { inner: ml::Space::grid(dim, n_per_side, mode).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (level, dim = 1))]
    fn cantor(level: usize, dim: usize) -> PyResult<PySpace> {
        Ok(PySpace { inner: ml::Space::cantor(level, dim).map_err(err)? })
    }

    /// Builds a space from a document dict `{points, weights, adjacency, metric}`.
    #[staticmethod]
    fn from_document(doc: &Bound<'_, PyAny>) -> PyResult<PySpace> {
        let doc: ml::SpaceDocument = from_py(doc, "space document")?;
        Ok(PySpace { inner: doc.into_space().map_err(err)? })
    }

    fn to_document<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.to_document())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Space(points={}, dim={:?})", self.inner.len(), self.inner.dim())
    }

    #[getter]
    fn dim(&self) -> Option<usize> {
        self.inner.dim()
    }

    #[getter]
    fn min_spacing(&self) -> f64 {
        self.inner.min_spacing()
    }

    #[getter]
    fn diameter(&self) -> f64 {
        self.inner.diameter()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    fn coords(&self, i: usize) -> PyResult<Option<Vec<f64>>> {
        self.check_index(i)?;
        Ok(self.inner.coords(i).map(<[f64]>::to_vec))
    }

    fn dist(&self, i: usize, j: usize) -> PyResult<f64> {
        self.check_index(i)?;
        self.check_index(j)?;
        Ok(self.inner.dist(i, j))
    }

    /// Members and mass of the open ball `B(center, radius)`.
    fn ball(&self, center: usize, radius: f64) -> PyResult<(Vec<usize>, f64)> {
        let b = self.inner.ball(center, radius).map_err(err)?;
        Ok((b.members, b.mass))
    }

    /// Fits the Ahlfors certificate; the window defaults to `[3h, diam/4]`.
    #[pyo3(signature = (r_min = None, r_max = None, all_centers = false))]
    fn certify(&self, r_min: Option<f64>, r_max: Option<f64>, all_centers: bool) -> PyResult<PyCertificate> {
        let (lo, hi) = default_window(&self.inner);
        let (lo, hi) = (r_min.unwrap_or(lo), r_max.unwrap_or(hi));
        let sel = if all_centers { CenterSelection::All } else { CenterSelection::Interior };
        let cert = ml::certify_ahlfors(&self.inner, lo, hi, &select_centers(&self.inner, sel, hi)).map_err(err)?;
        Ok(PyCertificate { inner: cert })
    }
}

impl PySpace {
    fn check_index(&self, i: usize) -> PyResult<()> {
        if i < self.inner.len() {
            Ok(())
        } else {
            Err(PyValueError::new_err(format!("point {i} out of range")))
        }
    }
}

#[pyclass(name = "Certificate", module = "metric_lab_py", frozen)]
struct PyCertificate {
    inner: ml::AhlforsCertificate,
}

#[pymethods]
impl PyCertificate {
    #[getter]
    fn nu_hat(&self) -> f64 {
        self.inner.nu_hat
    }

    #[getter]
    fn c1_hat(&self) -> f64 {
        self.inner.c1_hat
    }

    #[getter]
    fn c2_hat(&self) -> f64 {
        self.inner.c2_hat
    }

    /// `(holds, value)` of the constant condition `2^(1-ν̂)·ĉ₂/ĉ₁ < 1`.
    fn condition(&self) -> (bool, f64) {
        let c = ml::theorem1_condition(&self.inner);
        (c.holds, c.value)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Certificate(nu_hat={:.4}, c1_hat={:.4}, c2_hat={:.4})",
            self.inner.nu_hat, self.inner.c1_hat, self.inner.c2_hat
        )
    }
}

#[pyclass(name = "Kernel", module = "metric_lab_py", frozen)]
struct PyKernel {
    inner: ml::RoughKernelMatrix,
}

#[pymethods]
impl PyKernel {
    /// `pattern` is "sign-first-coordinate" or "random-pm1" (which needs `seed`).
    #[new]
    #[pyo3(signature = (space, nu, pattern = "sign-first-coordinate", seed = None, project = true))]
    fn new(space: &PySpace, nu: f64, pattern: &str, seed: Option<u64>, project: bool) -> PyResult<PyKernel> {
        let pattern = match (pattern, seed) {
            ("sign-first-coordinate", _) => AngularPattern::SignFirstCoordinate,
            ("random-pm1", Some(seed)) => AngularPattern::RandomPm1 { seed },
            ("random-pm1", None) => return Err(PyValueError::new_err("random-pm1 needs a seed")),
            (other, _) => return Err(PyValueError::new_err(format!("unknown pattern {other:?}"))),
        };
        let inner = ml::build_rough_kernel(&space.inner, nu, pattern, project).map_err(err)?;
        Ok(PyKernel { inner })
    }

    fn get(&self, x: usize, y: usize) -> PyResult<f64> {
        if x >= self.inner.len() || y >= self.inner.len() {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(self.inner.get(x, y))
    }

    /// Recomputed null and size certificates.
    fn audit<'py>(&self, py: Python<'py>, space: &PySpace) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &ml::verify_kernel(&space.inner, &self.inner).map_err(err)?)
    }
}

/// Random field from a distribution dict such as `{"kind": "bumps", "count": 3}`.
#[pyfunction]
#[pyo3(signature = (space, seed, distribution = None))]
fn sample_field(space: &PySpace, seed: u64, distribution: Option<&Bound<'_, PyAny>>) -> PyResult<Vec<f64>> {
    let dist: FieldDistribution = match distribution {
        Some(d) => from_py(d, "distribution")?,
        None => FieldDistribution::default(),
    };
    Ok(dist.sample(&space.inner, seed).map_err(err)?.into_values())
}

#[pyfunction]
fn maximal_function(space: &PySpace, f: Vec<f64>) -> PyResult<Vec<f64>> {
    let f = space.field(f)?;
    Ok(ml::maximal_function(&space.inner, &f).map_err(err)?.into_values())
}

#[pyfunction]
fn riesz_potential(space: &PySpace, f: Vec<f64>, s: f64) -> PyResult<Vec<f64>> {
    let f = space.field(f)?;
    Ok(ml::riesz_potential(&space.inner, &f, s).map_err(err)?.into_values())
}

#[pyfunction]
fn maximal_singular(space: &PySpace, kernel: &PyKernel, f: Vec<f64>) -> PyResult<Vec<f64>> {
    let f = space.field(f)?;
    Ok(ml::maximal_singular(&space.inner, &kernel.inner, &f).map_err(err)?.into_values())
}

#[pyfunction]
fn upper_gradient(space: &PySpace, f: Vec<f64>) -> PyResult<Vec<f64>> {
    let f = space.field(f)?;
    Ok(ml::graph_upper_gradient(&space.inner, &f).map_err(err)?.g.into_values())
}

/// Norm from a spec dict such as `{"kind": "lorentz", "r": 2, "m": "inf"}`.
#[pyfunction]
fn norm(space: &PySpace, f: Vec<f64>, spec: &Bound<'_, PyAny>) -> PyResult<f64> {
    let spec: NormSpec = from_py(spec, "norm spec")?;
    let f = space.field(f)?;
    spec.norm(&space.inner, &f).map_err(err)
}

fn context<'a>(space: &'a PySpace, cert: &'a PyCertificate, tolerance_scale: f64, seed: Option<u64>) -> CheckContext<'a> {
    let mut ctx = CheckContext::new(&space.inner, &cert.inner);
    ctx.tolerance_scale = tolerance_scale;
    ctx.seed = seed;
    ctx
}

fn theorem(name: &str) -> PyResult<Theorem> {
    match name {
        "thm1" => Ok(Theorem::Thm1),
        "thm2" => Ok(Theorem::Thm2),
        "thm3" => Ok(Theorem::Thm3),
        other => Err(PyValueError::new_err(format!("unknown theorem {other:?}"))),
    }
}

/// Report dict of thm1/thm2/thm3 on one field; `g` defaults to the graph upper gradient.
#[pyfunction]
#[pyo3(signature = (space, certificate, which, f, params = None, kernel = None, g = None, tolerance_scale = 1.0, seed = None))]
#[allow(clippy::too_many_arguments)]
fn check_pointwise<'py>(
    py: Python<'py>,
    space: &PySpace,
    certificate: &PyCertificate,
    which: &str,
    f: Vec<f64>,
    params: Option<&Bound<'py, PyAny>>,
    kernel: Option<&PyKernel>,
    g: Option<Vec<f64>>,
    tolerance_scale: f64,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let which = theorem(which)?;
    let params: PointwiseParams = match params {
        Some(p) => from_py(p, "params")?,
        None => PointwiseParams::default(),
    };
    let f = space.field(f)?;
    let g = match (which, g) {
        (Theorem::Thm2, _) => None,
        (_, Some(g)) => Some(space.field(g)?),
        (_, None) => Some(ml::graph_upper_gradient(&space.inner, &f).map_err(err)?.g),
    };
    let ctx = context(space, certificate, tolerance_scale, seed);
    let report = py
        .detach(|| ml::check_pointwise_theorem(&ctx, kernel.map(|k| &k.inner), &f, g.as_ref(), which, &params))
        .map_err(err)?;
    to_py(py, &report)
}

/// Report dict of a norm-level inequality; `case` is a dict such as `{"kind": "sobolev-like"}`.
#[pyfunction]
#[pyo3(signature = (space, certificate, kernel, f, case, p, q, g = None, tolerance_scale = 1.0))]
#[allow(clippy::too_many_arguments)]
fn check_functional<'py>(
    py: Python<'py>,
    space: &PySpace,
    certificate: &PyCertificate,
    kernel: &PyKernel,
    f: Vec<f64>,
    case: &Bound<'py, PyAny>,
    p: f64,
    q: f64,
    g: Option<Vec<f64>>,
    tolerance_scale: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let case: FunctionalCase = from_py(case, "case")?;
    let f = space.field(f)?;
    let g = match g {
        Some(g) => space.field(g)?,
        None => ml::graph_upper_gradient(&space.inner, &f).map_err(err)?.g,
    };
    let ctx = context(space, certificate, tolerance_scale, None);
    let report = py
        .detach(|| ml::check_functional(&ctx, &kernel.inner, &f, &g, &case, &FunctionalParams { p, q }))
        .map_err(err)?;
    to_py(py, &report)
}

/// Largest `norm(Mf)/norm(f)` over seeded random fields, as a report dict.
#[pyfunction]
#[pyo3(signature = (space, spec, trials, seed, distribution = None))]
fn maximal_boundedness<'py>(
    py: Python<'py>,
    space: &PySpace,
    spec: &Bound<'py, PyAny>,
    trials: usize,
    seed: u64,
    distribution: Option<&Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyAny>> {
    let spec: NormSpec = from_py(spec, "norm spec")?;
    let dist: FieldDistribution = match distribution {
        Some(d) => from_py(d, "distribution")?,
        None => FieldDistribution::default(),
    };
    let report = py
        .detach(|| ml::maximal_boundedness(&space.inner, &spec, trials, seed, &dist))
        .map_err(err)?;
    to_py(py, &report)
}

/// Hill climb on the constant of one theorem; `target` is
/// `{"which": "thm2", "params": {...}}`.
#[pyfunction]
#[pyo3(signature = (space, certificate, target, iterations, seed, kernel = None))]
fn sharpness_search<'py>(
    py: Python<'py>,
    space: &PySpace,
    certificate: &PyCertificate,
    target: &Bound<'py, PyAny>,
    iterations: usize,
    seed: u64,
    kernel: Option<&PyKernel>,
) -> PyResult<Bound<'py, PyAny>> {
    let target: SharpnessConfig = from_py(target, "target")?;
    let ctx = context(space, certificate, 1.0, Some(seed));
    let result = py
        .detach(|| ml::sharpness_search(&ctx, kernel.map(|k| &k.inner), &target, iterations, seed))
        .map_err(err)?;
    to_py(py, &result)
}

#[pymodule]
fn metric_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MetricLabError", m.py().get_type::<MetricLabError>())?;
    m.add_class::<PySpace>()?;
    m.add_class::<PyCertificate>()?;
    m.add_class::<PyKernel>()?;
    m.add_function(wrap_pyfunction!(sample_field, m)?)?;
    m.add_function(wrap_pyfunction!(maximal_function, m)?)?;
    m.add_function(wrap_pyfunction!(riesz_potential, m)?)?;
    m.add_function(wrap_pyfunction!(maximal_singular, m)?)?;
    m.add_function(wrap_pyfunction!(upper_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(norm, m)?)?;
    m.add_function(wrap_pyfunction!(check_pointwise, m)?)?;
    m.add_function(wrap_pyfunction!(check_functional, m)?)?;
    m.add_function(wrap_pyfunction!(maximal_boundedness, m)?)?;
    m.add_function(wrap_pyfunction!(sharpness_search, m)?)?;
    Ok(())
}
