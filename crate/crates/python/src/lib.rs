//! Python bindings. Vectors cross the boundary as `list[float]` and matrices
//! as row-major `list[list[float]]`.

use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use semiriem::costs::{CosineRidge, Quadratic, SquaredDistance};
use semiriem::diagnostics;
use semiriem::hypersurfaces::{EuclideanSphere, Hyperplane, MinkowskiSpace, PseudoHyperbolic, PseudoSphere};
use semiriem::indefinite::{self, Frame, ScalarProduct, VectorClass};
use semiriem::lie::{self, PartitionedSkew};
use semiriem::linalg::{self, Matrix, Vector};
use semiriem::manifold::{self as mf, CostFunction, FrameStrategy, Manifold};
use semiriem::optim::{self, Method, OptimizerConfig, Reference, Termination};

create_exception!(semiriem, SemiriemError, PyException);

fn err(e: semiriem::Error) -> PyErr {
    SemiriemError::new_err(e.to_string())
}

fn vector(xs: Vec<f64>) -> Vector {
    Vector::from_vec(xs)
}

fn list(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("matrix rows have unequal lengths"));
    }
    Ok(Matrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Row-major matrix.
type Rows = Vec<Vec<f64>>;

/// `(basis, signs)` of an orthonormal frame.
type FrameRows = (Rows, Vec<f64>);

fn frame_rows(f: &Frame) -> FrameRows {
    (f.basis.iter().map(list).collect(), f.eps.clone())
}

fn frame_from(basis: Vec<Vec<f64>>, eps: Vec<f64>) -> PyResult<Frame> {
    if basis.len() != eps.len() {
        return Err(PyValueError::new_err("basis and signs differ in length"));
    }
    Ok(Frame { basis: basis.into_iter().map(vector).collect(), eps })
}

/// An embedded semi-Riemannian manifold.
#[pyclass(name = "Manifold", module = "semiriem", frozen)]
struct PyManifold {
    inner: Arc<dyn Manifold>,
}

#[pymethods]
impl PyManifold {
    #[staticmethod]
    fn minkowski(p: usize, q: usize) -> Self {
        Self { inner: Arc::new(MinkowskiSpace::new(p, q)) }
    }

    #[staticmethod]
    fn hyperplane(p: usize, q: usize, normal: Vec<f64>, offset: f64) -> PyResult<Self> {
        Ok(Self { inner: Arc::new(Hyperplane::new(p, q, vector(normal), offset).map_err(err)?) })
    }

    /// The Euclidean unit sphere in `R^{p,q}`.
    #[staticmethod]
    fn sphere(p: usize, q: usize) -> PyResult<Self> {
        Ok(Self { inner: Arc::new(EuclideanSphere::new(p, q).map_err(err)?) })
    }

    #[staticmethod]
    fn pseudosphere(p: usize, q: usize) -> PyResult<Self> {
        Ok(Self { inner: Arc::new(PseudoSphere::new(p, q).map_err(err)?) })
    }

    #[staticmethod]
    fn pseudohyperbolic(p: usize, q: usize) -> PyResult<Self> {
        Ok(Self { inner: Arc::new(PseudoHyperbolic::new(p, q).map_err(err)?) })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name()
    }

    #[getter]
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    #[getter]
    fn intrinsic_dim(&self) -> usize {
        self.inner.intrinsic_dim()
    }

    fn random_point(&self, seed: u64) -> Vec<f64> {
        list(&self.inner.random_point(&mut ChaCha8Rng::seed_from_u64(seed)))
    }

    fn random_tangent(&self, x: Vec<f64>, seed: u64) -> PyResult<Vec<f64>> {
        let v = self.inner.random_tangent(&vector(x), &mut ChaCha8Rng::seed_from_u64(seed)).map_err(err)?;
        Ok(list(&v))
    }

    fn constraint_residual(&self, x: Vec<f64>) -> f64 {
        self.inner.constraint_residual(&vector(x))
    }

    fn tangent_residual(&self, x: Vec<f64>, v: Vec<f64>) -> f64 {
        self.inner.tangent_residual(&vector(x), &vector(v))
    }

    fn tangent_project(&self, x: Vec<f64>, v: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(list(&self.inner.tangent_project(&vector(x), &vector(v)).map_err(err)?))
    }

    fn metric(&self, x: Vec<f64>, u: Vec<f64>, v: Vec<f64>) -> f64 {
        self.inner.metric(&vector(x), &vector(u), &vector(v))
    }

    /// Signature `(neg, pos)` of the metric on the tangent space at `x`.
    fn signature_at(&self, x: Vec<f64>) -> PyResult<(usize, usize)> {
        let s = self.inner.signature_at(&vector(x)).map_err(err)?;
        Ok((s.neg, s.pos))
    }

    #[pyo3(signature = (x, v, t = 1.0))]
    fn retract(&self, x: Vec<f64>, v: Vec<f64>, t: f64) -> PyResult<Vec<f64>> {
        Ok(list(&self.inner.retract(&vector(x), &vector(v), t).map_err(err)?))
    }

    fn transport(&self, x: Vec<f64>, along: Vec<f64>, t: f64, payload: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(list(&self.inner.transport(&vector(x), &vector(along), t, &vector(payload)).map_err(err)?))
    }

    /// The closed-form geodesic `γ(t)` with `γ(0) = x`, `γ'(0) = v`, or `None`.
    fn geodesic(&self, x: Vec<f64>, v: Vec<f64>, t: f64) -> PyResult<Option<Vec<f64>>> {
        match self.inner.geodesic(&vector(x), &vector(v), t) {
            Some(r) => Ok(Some(list(&r.map_err(err)?))),
            None => Ok(None),
        }
    }

    /// An orthonormal tangent frame at `x` as `(basis, signs)`; random when `seed` is given.
    #[pyo3(signature = (x, seed = None))]
    fn frame(&self, x: Vec<f64>, seed: Option<u64>) -> PyResult<FrameRows> {
        let strategy = seed.map_or(FrameStrategy::Standard, FrameStrategy::RandomPerPoint);
        Ok(frame_rows(&mf::tangent_frame(self.inner.as_ref(), &vector(x), strategy, 0).map_err(err)?))
    }

    fn __repr__(&self) -> String {
        format!("Manifold({})", self.inner.name())
    }
}

/// A smooth objective on the ambient space.
#[pyclass(name = "Cost", module = "semiriem", frozen)]
struct PyCost {
    inner: Arc<dyn CostFunction>,
    label: String,
}

#[pymethods]
impl PyCost {
    /// `x^T A x + b^T x`.
    #[staticmethod]
    #[pyo3(signature = (a, b = None))]
    fn quadratic(a: Vec<Vec<f64>>, b: Option<Vec<f64>>) -> PyResult<Self> {
        Ok(Self { inner: Arc::new(Quadratic::new(matrix(a)?, b.map(vector))), label: "quadratic".into() })
    }

    /// `-x^T A x`.
    #[staticmethod]
    fn neg_rayleigh(a: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self { inner: Arc::new(Quadratic::neg_rayleigh(matrix(a)?)), label: "neg-rayleigh".into() })
    }

    /// `||x - target||^2`.
    #[staticmethod]
    fn squared_distance(target: Vec<f64>) -> Self {
        Self { inner: Arc::new(SquaredDistance::new(vector(target))), label: "squared-distance".into() }
    }

    /// `½ x^T A x + b^T x + Σ c cos(w^T x)` over `(c, w)` pairs.
    #[staticmethod]
    fn cosine_ridge(a: Vec<Vec<f64>>, b: Vec<f64>, ridges: Vec<(f64, Vec<f64>)>) -> PyResult<Self> {
        let ridges = ridges.into_iter().map(|(c, w)| (c, vector(w))).collect();
        Ok(Self { inner: Arc::new(CosineRidge::new(matrix(a)?, vector(b), ridges)), label: "cosine-ridge".into() })
    }

    fn value(&self, x: Vec<f64>) -> f64 {
        self.inner.value(&vector(x))
    }

    fn euclidean_gradient(&self, x: Vec<f64>) -> Vec<f64> {
        list(&self.inner.euclidean_gradient(&vector(x)))
    }

    fn __repr__(&self) -> String {
        format!("Cost({})", self.label)
    }
}

/// Outcome of [`optimize`].
#[pyclass(name = "OptimResult", module = "semiriem", frozen, get_all)]
struct PyOptimResult {
    x: Vec<f64>,
    f: f64,
    stationarity: f64,
    iterations: usize,
    /// `converged`, `max-iterations` or `stagnated`.
    termination: String,
    values: Vec<f64>,
    stationarities: Vec<f64>,
    err_sq: Option<Vec<f64>>,
}

#[pymethods]
impl PyOptimResult {
    #[getter]
    fn converged(&self) -> bool {
        self.termination == "converged"
    }

    fn __repr__(&self) -> String {
        format!("OptimResult({}, iterations={}, f={:e})", self.termination, self.iterations, self.f)
    }
}

fn method(name: &str) -> PyResult<Method> {
    match name {
        "sd" => Ok(Method::SteepestDescent),
        "cg" => Ok(Method::ConjugateGradient),
        "newton" => Ok(Method::Newton),
        "tr" => Ok(Method::TrustRegion),
        other => Err(PyValueError::new_err(format!("unknown method {other:?}; expected sd, cg, newton or tr"))),
    }
}

fn frames(name: &str, seed: u64) -> PyResult<FrameStrategy> {
    match name {
        "standard" => Ok(FrameStrategy::Standard),
        "per-point" => Ok(FrameStrategy::RandomPerPoint(seed)),
        "per-run" => Ok(FrameStrategy::RandomPerRun(seed)),
        other => Err(PyValueError::new_err(format!("unknown frames {other:?}; expected standard, per-point or per-run"))),
    }
}

/// Minimize `cost` on `manifold` from `x0`.
#[pyfunction]
#[pyo3(signature = (manifold, cost, x0, method = "sd", frames = "standard", frame_seed = 0, max_iters = 10_000, grad_tol = 1e-8, reference = None, antipodal = false))]
#[allow(clippy::too_many_arguments)]
fn optimize(
    py: Python<'_>,
    manifold: &PyManifold,
    cost: &PyCost,
    x0: Vec<f64>,
    method: &str,
    frames: &str,
    frame_seed: u64,
    max_iters: usize,
    grad_tol: f64,
    reference: Option<Vec<f64>>,
    antipodal: bool,
) -> PyResult<PyOptimResult> {
    let m = self::method(method)?;
    let reference = reference.map(|r| Reference { point: vector(r), antipodal });
    let cfg = OptimizerConfig {
        frame_strategy: self::frames(frames, frame_seed)?,
        max_iters,
        grad_tol,
        reference,
        ..Default::default()
    };
    let (mani, f) = (manifold.inner.clone(), cost.inner.clone());
    let x0 = vector(x0);
    let res = py.detach(move || optim::run(m, mani.as_ref(), f.as_ref(), &x0, &cfg)).map_err(err)?;
    let records = &res.trace.records;
    let err_sq = records.iter().map(|r| r.err_sq).collect::<Option<Vec<_>>>();
    Ok(PyOptimResult {
        x: list(&res.x),
        f: res.f,
        stationarity: res.stationarity,
        iterations: res.iterations,
        termination: match res.termination {
            Termination::Converged => "converged",
            Termination::MaxIterations => "max-iterations",
            Termination::Stagnated => "stagnated",
        }
        .into(),
        values: records.iter().map(|r| r.f).collect(),
        stationarities: records.iter().map(|r| r.stationarity).collect(),
        err_sq,
    })
}

/// `<u, v>` in `R^{p,q}`.
#[pyfunction]
fn minkowski_dot(p: usize, u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    if u.len() != v.len() || p > u.len() {
        return Err(PyValueError::new_err("vectors must share a length of at least p"));
    }
    Ok(linalg::minkowski_dot(p, &vector(u), &vector(v)))
}

/// `zero`, `degenerate`, `null`, `timelike` or `spacelike` in `R^{p,q}`.
#[pyfunction]
#[pyo3(signature = (v, p, q, tol = indefinite::DEFAULT_NULL_TOL))]
fn classify(v: Vec<f64>, p: usize, q: usize, tol: f64) -> PyResult<&'static str> {
    let class = indefinite::classify(&vector(v), &ScalarProduct::minkowski(p, q), tol).map_err(err)?;
    Ok(match class {
        VectorClass::Zero => "zero",
        VectorClass::Degenerate => "degenerate",
        VectorClass::Null => "null",
        VectorClass::Timelike => "timelike",
        VectorClass::Spacelike => "spacelike",
    })
}

/// Indefinite Gram-Schmidt in `R^{p,q}`; returns `(basis, signs)`.
#[pyfunction]
#[pyo3(signature = (vectors, p, q, tol = indefinite::DEFAULT_NULL_TOL))]
fn gram_schmidt(vectors: Vec<Vec<f64>>, p: usize, q: usize, tol: f64) -> PyResult<FrameRows> {
    let vs: Vec<Vector> = vectors.into_iter().map(vector).collect();
    Ok(frame_rows(&indefinite::indef_gram_schmidt(&vs, &ScalarProduct::minkowski(p, q), tol).map_err(err)?))
}

/// A random orthonormal basis of `R^{p,q}`; returns `(basis, signs)`.
#[pyfunction]
fn find_on_basis(p: usize, q: usize, seed: u64) -> PyResult<FrameRows> {
    Ok(frame_rows(&indefinite::find_on_basis(&ScalarProduct::minkowski(p, q), seed).map_err(err)?))
}

/// `[x]^+ = Σ <x, e_i> e_i` over the frame `(basis, signs)` in `R^{p,q}`.
#[pyfunction]
fn plus_map(x: Vec<f64>, basis: Vec<Vec<f64>>, signs: Vec<f64>, p: usize, q: usize) -> PyResult<Vec<f64>> {
    let frame = frame_from(basis, signs)?;
    Ok(list(&indefinite::plus_map(&vector(x), &frame, &ScalarProduct::minkowski(p, q))))
}

/// `<x, [y]^+>` over the frame `(basis, signs)` in `R^{p,q}`.
#[pyfunction]
fn induced_inner(x: Vec<f64>, y: Vec<f64>, basis: Vec<Vec<f64>>, signs: Vec<f64>, p: usize, q: usize) -> PyResult<f64> {
    let frame = frame_from(basis, signs)?;
    Ok(indefinite::induced_inner(&vector(x), &vector(y), &frame, &ScalarProduct::minkowski(p, q)))
}

/// `U` and `(neg, pos)` with `U^T H U = I_{neg,pos}`.
#[pyfunction]
#[pyo3(signature = (h, tol = 1e-12))]
fn congruence_factor(h: Vec<Vec<f64>>, tol: f64) -> PyResult<(Rows, (usize, usize))> {
    let (u, sig) = indefinite::congruence_factor(&matrix(h)?, tol).map_err(err)?;
    Ok((rows(&u), (sig.neg, sig.pos)))
}

#[pyfunction]
fn expm(a: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    Ok(rows(&linalg::expm(&matrix(a)?).map_err(err)?))
}

/// The curve `A exp(B(t))` on `O(p,q)` for the partitioned skew `Δ`.
#[pyfunction]
fn opq_curve(a: Vec<Vec<f64>>, delta: Vec<Vec<f64>>, p: usize, t: f64) -> PyResult<Vec<Vec<f64>>> {
    let delta = PartitionedSkew::from_matrix(&matrix(delta)?, p).map_err(err)?;
    Ok(rows(&lie::opq_geodesic(&matrix(a)?, &delta, t).map_err(err)?))
}

/// Maximal relative finite-difference gradient error at `x` over the standard frame.
#[pyfunction]
fn fd_gradient_check(manifold: &PyManifold, cost: &PyCost, x: Vec<f64>) -> PyResult<f64> {
    let m = manifold.inner.as_ref();
    let x = vector(x);
    let frame = mf::tangent_frame(m, &x, FrameStrategy::Standard, 0).map_err(err)?;
    diagnostics::fd_gradient_check(m, cost.inner.as_ref(), &x, &frame.basis, None).map_err(err)
}

/// The closest point of `S^{p,q}` to `xi`.
#[pyfunction]
fn pseudosphere_distance_reference(p: usize, q: usize, xi: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(list(&diagnostics::pseudosphere_distance_reference(p, q, &vector(xi)).map_err(err)?))
}

/// Top eigenpair of a symmetric matrix as a dict.
#[pyfunction]
fn rayleigh_reference<'py>(py: Python<'py>, a: Vec<Vec<f64>>) -> PyResult<Bound<'py, PyDict>> {
    let r = diagnostics::rayleigh_reference(&matrix(a)?).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("vector", list(&r.vector))?;
    d.set_item("value", r.value)?;
    d.set_item("gap", r.gap)?;
    d.set_item("repeated", r.repeated)?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "semiriem")]
fn semiriem_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SemiriemError", m.py().get_type::<SemiriemError>())?;
    m.add_class::<PyManifold>()?;
    m.add_class::<PyCost>()?;
    m.add_class::<PyOptimResult>()?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(minkowski_dot, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(gram_schmidt, m)?)?;
    m.add_function(wrap_pyfunction!(find_on_basis, m)?)?;
    m.add_function(wrap_pyfunction!(plus_map, m)?)?;
    m.add_function(wrap_pyfunction!(induced_inner, m)?)?;
    m.add_function(wrap_pyfunction!(congruence_factor, m)?)?;
    m.add_function(wrap_pyfunction!(expm, m)?)?;
    m.add_function(wrap_pyfunction!(opq_curve, m)?)?;
    m.add_function(wrap_pyfunction!(fd_gradient_check, m)?)?;
    m.add_function(wrap_pyfunction!(pseudosphere_distance_reference, m)?)?;
    m.add_function(wrap_pyfunction!(rayleigh_reference, m)?)?;
    Ok(())
}
