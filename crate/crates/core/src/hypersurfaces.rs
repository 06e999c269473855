//! Hypersurfaces of Minkowski space `R^{p,q}` with closed-form geometry.
//!
//! All of them are level sets `φ(x) = c` whose semi-normal space is spanned by
//! a single vector `N(x)`, so the tangent projection is
//! `P_x(v) = v - (<v,N>/<N,N>) N` and the Hessian correction is
//! `-(<Df_amb, N>/<N,N>) P_x(D_v N)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::indefinite::{Frame, ScalarProduct, Signature, DEFAULT_NULL_TOL};
use crate::linalg::{self, Vector};
use crate::manifold::{Manifold, TANGENCY_TOL};

/// Tolerance on `|x^T I_{p,q} x|` below which a sphere point is degenerate.
pub const SPHERE_DEGENERACY_TOL: f64 = 1e-12;
/// Relative perturbation size used to leave the sphere's degenerate locus.
pub const DEFAULT_PERTURBATION_SCALE: f64 = 1e-8;
/// Redraws allowed when leaving the degenerate locus.
pub const PERTURBATION_RETRIES: usize = 16;

/// Causal character of a geodesic direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeodesicCase {
    Spacelike,
    Timelike,
    Null,
}

/// Splits on the sign of `<X,X>`, with the null band `|<X,X>| <= tol ||X||^2`.
pub fn geodesic_case(g: &ScalarProduct, xdir: &Vector) -> GeodesicCase {
    let s = g.dot_unchecked(xdir, xdir);
    if s.abs() <= DEFAULT_NULL_TOL * xdir.norm_squared() {
        GeodesicCase::Null
    } else if s > 0.0 {
        GeodesicCase::Spacelike
    } else {
        GeodesicCase::Timelike
    }
}

/// The anti-isometry `σ_{p,q}: R^{p,q} -> R^{q,p}`, `(x, y) -> (y, x)`.
pub fn anti_isometry(p: usize, x: &Vector) -> Vector {
    let n = x.len();
    Vector::from_fn(n, |i, _| if i < n - p { x[p + i] } else { x[i - (n - p)] })
}

fn project_along(g: &ScalarProduct, v: &Vector, normal: &Vector) -> Vector {
    let nn = g.dot_unchecked(normal, normal);
    v - normal * (g.dot_unchecked(v, normal) / nn)
}

fn minkowski_checked(p: usize, q: usize, min_dim: usize) -> Result<ScalarProduct> {
    if p + q < min_dim {
        return Err(Error::InvalidConfig(format!("dimension p+q = {} below {min_dim}", p + q)));
    }
    Ok(ScalarProduct::minkowski(p, q))
}

fn check_dim(g: &ScalarProduct, v: &Vector) -> Result<()> {
    if v.len() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: v.len() });
    }
    Ok(())
}

fn scaled(value: f64, scale: f64) -> f64 {
    value.abs() / scale.max(1.0)
}

fn uniform(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0))
}

// ---------------------------------------------------------------------------
// Minkowski space

/// `R^{p,q}` itself: flat, with straight-line geodesics.
#[derive(Debug, Clone)]
pub struct MinkowskiSpace {
    p: usize,
    q: usize,
    g: ScalarProduct,
}

impl MinkowskiSpace {
    pub fn new(p: usize, q: usize) -> Self {
        Self { p, q, g: ScalarProduct::minkowski(p, q) }
    }
}

impl Manifold for MinkowskiSpace {
    fn name(&self) -> String {
        format!("R^{{{},{}}}", self.p, self.q)
    }
    fn ambient(&self) -> &ScalarProduct {
        &self.g
    }
    fn intrinsic_dim(&self) -> usize {
        self.p + self.q
    }
    fn signature_at(&self, _x: &Vector) -> Result<Signature> {
        Ok(Signature::new(self.p, self.q))
    }
    fn constraint_residual(&self, _x: &Vector) -> f64 {
        0.0
    }
    fn tangent_residual(&self, _x: &Vector, _v: &Vector) -> f64 {
        0.0
    }
    fn tangent_project(&self, _x: &Vector, v: &Vector) -> Result<Vector> {
        check_dim(&self.g, v)?;
        Ok(v.clone())
    }
    fn standard_frame(&self, _x: &Vector) -> Option<Frame> {
        Some(Frame::standard(Signature::new(self.p, self.q)))
    }
    fn retract(&self, x: &Vector, v: &Vector, t: f64) -> Result<Vector> {
        Ok(x + v * t)
    }
    fn transport(&self, _x: &Vector, _along: &Vector, _t: f64, payload: &Vector) -> Result<Vector> {
        Ok(payload.clone())
    }
    fn hessian_correction(&self, x: &Vector, _egrad: &Vector, _v: &Vector) -> Result<Vector> {
        Ok(Vector::zeros(x.len()))
    }
    fn geodesic(&self, x: &Vector, v: &Vector, t: f64) -> Option<Result<Vector>> {
        Some(Ok(x + v * t))
    }
    fn random_point(&self, rng: &mut ChaCha8Rng) -> Vector {
        uniform(rng, self.p + self.q)
    }
}

// ---------------------------------------------------------------------------
// Hyperplane

/// The affine hyperplane `n^T x = offset` in `R^{p,q}`.
#[derive(Debug, Clone)]
pub struct Hyperplane {
    p: usize,
    q: usize,
    normal: Vector,
    offset: f64,
    g: ScalarProduct,
    // semi-normal direction I_{p,q} n
    semi_normal: Vector,
}

impl Hyperplane {
    pub fn new(p: usize, q: usize, normal: Vector, offset: f64) -> Result<Self> {
        let g = minkowski_checked(p, q, 2)?;
        check_dim(&g, &normal)?;
        let nn = g.dot_unchecked(&normal, &normal);
        if nn.abs() <= DEFAULT_NULL_TOL * normal.norm_squared() {
            return Err(Error::DegenerateHyperplane(nn));
        }
        let semi_normal = g.apply(&normal);
        Ok(Self { p, q, normal, offset, g, semi_normal })
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    /// `v - (n^T v / n^T I n) I n`.
    pub fn project(&self, v: &Vector) -> Vector {
        project_along(&self.g, v, &self.semi_normal)
    }
}

impl Manifold for Hyperplane {
    fn name(&self) -> String {
        format!("hyperplane in R^{{{},{}}}", self.p, self.q)
    }
    fn ambient(&self) -> &ScalarProduct {
        &self.g
    }
    fn intrinsic_dim(&self) -> usize {
        self.p + self.q - 1
    }
    fn signature_at(&self, _x: &Vector) -> Result<Signature> {
        if self.g.dot_unchecked(&self.normal, &self.normal) < 0.0 {
            Ok(Signature::new(self.p - 1, self.q))
        } else {
            Ok(Signature::new(self.p, self.q - 1))
        }
    }
    fn constraint_residual(&self, x: &Vector) -> f64 {
        scaled(self.normal.dot(x) - self.offset, self.normal.norm() * x.norm())
    }
    fn tangent_residual(&self, _x: &Vector, v: &Vector) -> f64 {
        scaled(self.normal.dot(v), self.normal.norm() * v.norm())
    }
    fn tangent_project(&self, _x: &Vector, v: &Vector) -> Result<Vector> {
        check_dim(&self.g, v)?;
        Ok(self.project(v))
    }
    fn retract(&self, x: &Vector, v: &Vector, t: f64) -> Result<Vector> {
        Ok(x + v * t)
    }
    fn transport(&self, _x: &Vector, _along: &Vector, _t: f64, payload: &Vector) -> Result<Vector> {
        Ok(payload.clone())
    }
    fn hessian_correction(&self, x: &Vector, _egrad: &Vector, _v: &Vector) -> Result<Vector> {
        Ok(Vector::zeros(x.len()))
    }
    fn geodesic(&self, x: &Vector, v: &Vector, t: f64) -> Option<Result<Vector>> {
        Some(Ok(x + v * t))
    }
    fn random_point(&self, rng: &mut ChaCha8Rng) -> Vector {
        let v = uniform(rng, self.p + self.q);
        let shift = (self.normal.dot(&v) - self.offset) / self.normal.norm_squared();
        v - &self.normal * shift
    }
}

// ---------------------------------------------------------------------------
// Euclidean sphere

/// The unit sphere `Σ x_i^2 = 1` carrying the metric induced from `R^{p,q}`.
///
/// Degenerate where `x^T I_{p,q} x = 0`. Retraction and transport are the
/// Riemannian great-circle ones.
#[derive(Debug, Clone)]
pub struct EuclideanSphere {
    p: usize,
    q: usize,
    g: ScalarProduct,
    perturbation_scale: f64,
}

impl EuclideanSphere {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        let g = minkowski_checked(p, q, 2)?;
        Ok(Self { p, q, g, perturbation_scale: DEFAULT_PERTURBATION_SCALE })
    }

    pub fn with_perturbation_scale(mut self, sigma: f64) -> Self {
        self.perturbation_scale = sigma;
        self
    }

    /// `v - (v^T x / x^T I x) I x`.
    pub fn project(&self, x: &Vector, v: &Vector) -> Result<Vector> {
        check_dim(&self.g, x)?;
        check_dim(&self.g, v)?;
        let xix = self.g.dot_unchecked(x, x);
        if xix.abs() <= SPHERE_DEGENERACY_TOL {
            return Err(Error::DegeneratePoint);
        }
        Ok(v - self.g.apply(x) * (v.dot(x) / xix))
    }
}

/// Free-function form of [`EuclideanSphere::project`].
pub fn sphere_project(p: usize, x: &Vector, v: &Vector) -> Result<Vector> {
    let q = x.len().saturating_sub(p);
    EuclideanSphere::new(p, q)?.project(x, v)
}

impl Manifold for EuclideanSphere {
    fn name(&self) -> String {
        format!("S^{} in R^{{{},{}}}", self.p + self.q - 1, self.p, self.q)
    }
    fn ambient(&self) -> &ScalarProduct {
        &self.g
    }
    fn intrinsic_dim(&self) -> usize {
        self.p + self.q - 1
    }
    fn signature_at(&self, x: &Vector) -> Result<Signature> {
        let xix = self.g.dot_unchecked(x, x);
        if xix.abs() <= SPHERE_DEGENERACY_TOL {
            Err(Error::DegeneratePoint)
        } else if xix < 0.0 {
            Ok(Signature::new(self.p - 1, self.q))
        } else {
            Ok(Signature::new(self.p, self.q - 1))
        }
    }
    fn constraint_residual(&self, x: &Vector) -> f64 {
        (x.norm_squared() - 1.0).abs()
    }
    fn tangent_residual(&self, x: &Vector, v: &Vector) -> f64 {
        scaled(x.dot(v), v.norm())
    }
    fn tangent_project(&self, x: &Vector, v: &Vector) -> Result<Vector> {
        self.project(x, v)
    }
    fn retract(&self, x: &Vector, v: &Vector, t: f64) -> Result<Vector> {
        let norm = v.norm();
        let theta = t * norm;
        if norm == 0.0 || theta == 0.0 {
            return Ok(x.clone());
        }
        let y = x * theta.cos() + v * (theta.sin() / norm);
        Ok(&y / y.norm())
    }
    fn transport(&self, x: &Vector, along: &Vector, t: f64, payload: &Vector) -> Result<Vector> {
        let norm = along.norm();
        if norm == 0.0 || t == 0.0 {
            return Ok(payload.clone());
        }
        let theta = t * norm;
        let u = along / norm;
        let w = payload + (&u * (theta.cos() - 1.0) - x * theta.sin()) * u.dot(payload);
        let y = self.retract(x, along, t)?;
        if self.degenerate_at(&y) {
            return Ok(w);
        }
        self.project(&y, &w)
    }
    fn degenerate_at(&self, x: &Vector) -> bool {
        self.p > 0 && self.q > 0 && self.g.dot_unchecked(x, x).abs() <= SPHERE_DEGENERACY_TOL
    }
    fn hessian_correction(&self, x: &Vector, egrad: &Vector, v: &Vector) -> Result<Vector> {
        let xix = self.g.dot_unchecked(x, x);
        let scale = self.g.dot_unchecked(egrad, x) / xix;
        Ok(self.project(x, &self.g.apply(v))? * (-scale))
    }
    fn perturb(&self, x: &Vector, seed: u64) -> Result<Vector> {
        if !self.degenerate_at(x) {
            return Ok(x.clone());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size = self.perturbation_scale * x.norm();
        for _ in 0..PERTURBATION_RETRIES {
            let d = uniform(&mut rng, x.len());
            let dn = d.norm();
            if dn == 0.0 {
                continue;
            }
            let y = x + d * (size / dn);
            let y = &y / y.norm();
            if !self.degenerate_at(&y) {
                return Ok(y);
            }
        }
        Err(Error::PerturbationFailed)
    }
    fn random_point(&self, rng: &mut ChaCha8Rng) -> Vector {
        loop {
            let v = uniform(rng, self.p + self.q);
            let n = v.norm();
            if n > 1e-3 {
                let x = v / n;
                if !self.degenerate_at(&x) {
                    return x;
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Pseudo-sphere and pseudo-hyperbolic space

/// Shared geometry of `x^T I x = kappa` with `kappa = ±1`.
///
/// The acceleration of the embedded geodesic is `-kappa <X,X> γ`, so the
/// causal case is decided by the sign of `kappa <X,X>`.
fn quadric_geodesic(g: &ScalarProduct, kappa: f64, x: &Vector, xdir: &Vector, t: f64) -> Vector {
    let s = g.dot_unchecked(xdir, xdir);
    let norm = s.abs().sqrt();
    let theta = t * norm;
    match geodesic_case(g, xdir) {
        GeodesicCase::Null => x + xdir * t,
        _ if kappa * s > 0.0 => x * theta.cos() + xdir * (theta.sin() / norm),
        _ => x * theta.cosh() + xdir * (theta.sinh() / norm),
    }
}

/// `∫_0^t γ(τ) dτ` for [`quadric_geodesic`].
fn quadric_geodesic_integral(g: &ScalarProduct, kappa: f64, x: &Vector, xdir: &Vector, t: f64) -> Vector {
    let s = g.dot_unchecked(xdir, xdir);
    let norm = s.abs().sqrt();
    let theta = t * norm;
    match geodesic_case(g, xdir) {
        GeodesicCase::Null => x * t + xdir * (0.5 * t * t),
        _ if kappa * s > 0.0 => x * (theta.sin() / norm) + xdir * ((1.0 - theta.cos()) / (norm * norm)),
        _ => x * (theta.sinh() / norm) + xdir * ((theta.cosh() - 1.0) / (norm * norm)),
    }
}

/// `Δ(t) = Δ - kappa <Δ,X> ∫_0^t γ`.
fn quadric_transport(g: &ScalarProduct, kappa: f64, x: &Vector, xdir: &Vector, delta: &Vector, t: f64) -> Vector {
    let pairing = g.dot_unchecked(delta, xdir);
    delta - quadric_geodesic_integral(g, kappa, x, xdir, t) * (kappa * pairing)
}

fn check_tangent(g: &ScalarProduct, x: &Vector, v: &Vector) -> Result<()> {
    check_dim(g, v)?;
    let r = scaled(g.dot_unchecked(x, v), x.norm() * v.norm());
    if r > TANGENCY_TOL {
        return Err(Error::NotTangent(r));
    }
    Ok(())
}

fn renormalize(g: &ScalarProduct, kappa: f64, y: Vector) -> Result<Vector> {
    let s = g.dot_unchecked(&y, &y) * kappa;
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::ConstraintViolation(s));
    }
    Ok(y / s.sqrt())
}

/// Random `(u, w)` with `-|u|^2 + |w|^2 = kappa`.
fn quadric_random_point(p: usize, q: usize, kappa: f64, rng: &mut ChaCha8Rng) -> Vector {
    // the block that carries the sign of kappa is rescaled
    let (fixed, free) = if kappa > 0.0 { (p, q) } else { (q, p) };
    let a = uniform(rng, fixed);
    let mut b = uniform(rng, free);
    while b.norm() < 1e-3 {
        b = uniform(rng, free);
    }
    let b = &b * ((1.0 + a.norm_squared()).sqrt() / b.norm());
    let (neg, pos) = if kappa > 0.0 { (a, b) } else { (b, a) };
    Vector::from_iterator(p + q, neg.iter().chain(pos.iter()).copied())
}

/// The pseudo-sphere `S^{p,q} = { x : x^T I_{p,q} x = 1 }`.
#[derive(Debug, Clone)]
pub struct PseudoSphere {
    p: usize,
    q: usize,
    g: ScalarProduct,
}

impl PseudoSphere {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidConfig("pseudo-sphere needs q >= 1".into()));
        }
        Ok(Self { p, q, g: minkowski_checked(p, q, 2)? })
    }

    pub fn signature(&self) -> Signature {
        Signature::new(self.p, self.q)
    }

    /// The closed-form embedded geodesic through `x` with velocity `xdir`.
    pub fn geodesic_closed_form(&self, x: &Vector, xdir: &Vector, t: f64) -> Result<Vector> {
        check_tangent(&self.g, x, xdir)?;
        Ok(quadric_geodesic(&self.g, 1.0, x, xdir, t))
    }

    /// Parallel transport of `delta` along the geodesic with velocity `xdir`.
    pub fn transport_closed_form(&self, x: &Vector, xdir: &Vector, delta: &Vector, t: f64) -> Result<Vector> {
        check_tangent(&self.g, x, xdir)?;
        check_tangent(&self.g, x, delta)?;
        Ok(quadric_transport(&self.g, 1.0, x, xdir, delta, t))
    }
}

pub fn pseudosphere_geodesic(m: &PseudoSphere, x: &Vector, xdir: &Vector, t: f64) -> Result<Vector> {
    m.geodesic_closed_form(x, xdir, t)
}

pub fn pseudosphere_transport(m: &PseudoSphere, x: &Vector, xdir: &Vector, delta: &Vector, t: f64) -> Result<Vector> {
    m.transport_closed_form(x, xdir, delta, t)
}

impl Manifold for PseudoSphere {
    fn name(&self) -> String {
        format!("S^{{{},{}}}", self.p, self.q)
    }
    fn ambient(&self) -> &ScalarProduct {
        &self.g
    }
    fn intrinsic_dim(&self) -> usize {
        self.p + self.q - 1
    }
    fn signature_at(&self, _x: &Vector) -> Result<Signature> {
        Ok(Signature::new(self.p, self.q - 1))
    }
    fn constraint_residual(&self, x: &Vector) -> f64 {
        scaled(self.g.dot_unchecked(x, x) - 1.0, x.norm_squared())
    }
    fn tangent_residual(&self, x: &Vector, v: &Vector) -> f64 {
        scaled(self.g.dot_unchecked(x, v), x.norm() * v.norm())
    }
    fn tangent_project(&self, x: &Vector, v: &Vector) -> Result<Vector> {
        check_dim(&self.g, v)?;
        Ok(v - x * linalg::minkowski_dot(self.p, v, x))
    }
    fn retract(&self, x: &Vector, v: &Vector, t: f64) -> Result<Vector> {
        renormalize(&self.g, 1.0, quadric_geodesic(&self.g, 1.0, x, v, t))
    }
    fn transport(&self, x: &Vector, along: &Vector, t: f64, payload: &Vector) -> Result<Vector> {
        let moved = quadric_transport(&self.g, 1.0, x, along, payload, t);
        let y = self.retract(x, along, t)?;
        self.tangent_project(&y, &moved)
    }
    fn hessian_correction(&self, x: &Vector, egrad: &Vector, v: &Vector) -> Result<Vector> {
        Ok(self.tangent_project(x, v)? * (-egrad.dot(x)))
    }
    fn geodesic(&self, x: &Vector, v: &Vector, t: f64) -> Option<Result<Vector>> {
        Some(self.geodesic_closed_form(x, v, t))
    }
    fn random_point(&self, rng: &mut ChaCha8Rng) -> Vector {
        quadric_random_point(self.p, self.q, 1.0, rng)
    }
}

/// The pseudo-hyperbolic space `H^{p,q} = { x : x^T I_{p,q} x = -1 }`.
#[derive(Debug, Clone)]
pub struct PseudoHyperbolic {
    p: usize,
    q: usize,
    g: ScalarProduct,
}

impl PseudoHyperbolic {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidConfig("pseudo-hyperbolic space needs p >= 1".into()));
        }
        Ok(Self { p, q, g: minkowski_checked(p, q, 2)? })
    }

    /// The geodesic through `x` with velocity `xdir`: cosh/sinh when `xdir` is
    /// spacelike, cos/sin when timelike, a straight line when null.
    pub fn geodesic_closed_form(&self, x: &Vector, xdir: &Vector, t: f64) -> Result<Vector> {
        check_tangent(&self.g, x, xdir)?;
        Ok(quadric_geodesic(&self.g, -1.0, x, xdir, t))
    }

    pub fn transport_closed_form(&self, x: &Vector, xdir: &Vector, delta: &Vector, t: f64) -> Result<Vector> {
        check_tangent(&self.g, x, xdir)?;
        check_tangent(&self.g, x, delta)?;
        Ok(quadric_transport(&self.g, -1.0, x, xdir, delta, t))
    }

    /// The image of this space under `σ_{p,q}`.
    pub fn mirror(&self) -> PseudoSphere {
        PseudoSphere { p: self.q, q: self.p, g: ScalarProduct::minkowski(self.q, self.p) }
    }

    /// The geodesic computed as `σ_{q,p} ∘ γ_{S^{q,p}} ∘ σ_{p,q}`.
    pub fn geodesic_via_anti_isometry(&self, x: &Vector, xdir: &Vector, t: f64) -> Result<Vector> {
        let s = self.mirror();
        let y = s.geodesic_closed_form(&anti_isometry(self.p, x), &anti_isometry(self.p, xdir), t)?;
        Ok(anti_isometry(self.q, &y))
    }

    pub fn transport_via_anti_isometry(&self, x: &Vector, xdir: &Vector, delta: &Vector, t: f64) -> Result<Vector> {
        let s = self.mirror();
        let d = s.transport_closed_form(
            &anti_isometry(self.p, x),
            &anti_isometry(self.p, xdir),
            &anti_isometry(self.p, delta),
            t,
        )?;
        Ok(anti_isometry(self.q, &d))
    }
}

pub fn hyperbolic_geodesic(m: &PseudoHyperbolic, x: &Vector, xdir: &Vector, t: f64) -> Result<Vector> {
    m.geodesic_closed_form(x, xdir, t)
}

pub fn hyperbolic_transport(m: &PseudoHyperbolic, x: &Vector, xdir: &Vector, delta: &Vector, t: f64) -> Result<Vector> {
    m.transport_closed_form(x, xdir, delta, t)
}

impl Manifold for PseudoHyperbolic {
    fn name(&self) -> String {
        format!("H^{{{},{}}}", self.p, self.q)
    }
    fn ambient(&self) -> &ScalarProduct {
        &self.g
    }
    fn intrinsic_dim(&self) -> usize {
        self.p + self.q - 1
    }
    fn signature_at(&self, _x: &Vector) -> Result<Signature> {
        Ok(Signature::new(self.p - 1, self.q))
    }
    fn constraint_residual(&self, x: &Vector) -> f64 {
        scaled(self.g.dot_unchecked(x, x) + 1.0, x.norm_squared())
    }
    fn tangent_residual(&self, x: &Vector, v: &Vector) -> f64 {
        scaled(self.g.dot_unchecked(x, v), x.norm() * v.norm())
    }
    fn tangent_project(&self, x: &Vector, v: &Vector) -> Result<Vector> {
        check_dim(&self.g, v)?;
        Ok(v + x * linalg::minkowski_dot(self.p, v, x))
    }
    fn retract(&self, x: &Vector, v: &Vector, t: f64) -> Result<Vector> {
        renormalize(&self.g, -1.0, quadric_geodesic(&self.g, -1.0, x, v, t))
    }
    fn transport(&self, x: &Vector, along: &Vector, t: f64, payload: &Vector) -> Result<Vector> {
        let moved = quadric_transport(&self.g, -1.0, x, along, payload, t);
        let y = self.retract(x, along, t)?;
        self.tangent_project(&y, &moved)
    }
    fn hessian_correction(&self, x: &Vector, egrad: &Vector, v: &Vector) -> Result<Vector> {
        Ok(self.tangent_project(x, v)? * egrad.dot(x))
    }
    fn geodesic(&self, x: &Vector, v: &Vector, t: f64) -> Option<Result<Vector>> {
        Some(self.geodesic_closed_form(x, v, t))
    }
    fn random_point(&self, rng: &mut ChaCha8Rng) -> Vector {
        quadric_random_point(self.p, self.q, -1.0, rng)
    }
}

/// Pick a random tangent vector at `x` of the requested causal character.
pub fn random_tangent_of_case(
    m: &dyn Manifold,
    x: &Vector,
    case: GeodesicCase,
    rng: &mut ChaCha8Rng,
) -> Result<Vector> {
    let g = m.ambient();
    let frame = crate::manifold::tangent_frame(m, x, crate::manifold::FrameStrategy::RandomPerPoint(rng.random()), 0)?;
    let pick = |want: f64, rng: &mut ChaCha8Rng| -> Option<Vector> {
        let idx: Vec<usize> = (0..frame.len()).filter(|&i| frame.eps[i] == want).collect();
        if idx.is_empty() {
            return None;
        }
        let mut v = Vector::zeros(x.len());
        for &i in &idx {
            v.axpy(rng.random_range(-1.0..=1.0), &frame.basis[i], 1.0);
        }
        Some(v)
    };
    let out = match case {
        GeodesicCase::Spacelike => pick(1.0, rng),
        GeodesicCase::Timelike => pick(-1.0, rng),
        GeodesicCase::Null => match (pick(-1.0, rng), pick(1.0, rng)) {
            (Some(a), Some(b)) => {
                let (na, nb) = (g.dot_unchecked(&a, &a).abs().sqrt(), g.dot_unchecked(&b, &b).sqrt());
                Some(a / na + b / nb)
            }
            _ => None,
        },
    };
    out.ok_or_else(|| Error::InvalidConfig(format!("tangent space has no {case:?} vectors")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{self, FrameStrategy};

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn sphere_projection_examples() {
        let m = EuclideanSphere::new(1, 2).unwrap();
        let x = v(&[1.0, 0.0, 0.0]);
        let w = v(&[0.4, -1.0, 2.0]);
        let out = m.project(&x, &w).unwrap();
        assert_eq!(out, v(&[0.0, -1.0, 2.0]));
        assert_eq!(out.dot(&x), 0.0);
        let tangent = v(&[0.0, 3.0, 1.0]);
        assert_eq!(m.project(&x, &tangent).unwrap(), tangent);

        let riem = EuclideanSphere::new(0, 3).unwrap();
        let y = v(&[0.6, 0.8, 0.0]);
        let out = riem.project(&y, &w).unwrap();
        let classical = &w - &y * w.dot(&y);
        assert!((out - classical).amax() < 1e-15);
    }

    #[test]
    fn sphere_degeneracy() {
        let m = EuclideanSphere::new(2, 2).unwrap();
        let x = v(&[0.5, 0.5, 0.5, 0.5]);
        assert!(m.degenerate_at(&x));
        assert_eq!(m.project(&x, &x).unwrap_err(), Error::DegeneratePoint);
        let y = m.perturb(&x, 11).unwrap();
        assert!(!m.degenerate_at(&y));
        assert!((&y - &x).norm() <= 2e-8);
        assert_eq!(y, m.perturb(&x, 11).unwrap());
        let z = v(&[0.6, 0.0, 0.8, 0.0]);
        assert_eq!(m.perturb(&z, 3).unwrap(), z);
        let riem = EuclideanSphere::new(0, 4).unwrap();
        assert!(!riem.degenerate_at(&x));
    }

    #[test]
    fn always_nondegenerate_families() {
        let s = PseudoSphere::new(2, 3).unwrap();
        let h = PseudoHyperbolic::new(2, 3).unwrap();
        let mut r = rng(1);
        for _ in 0..20 {
            assert!(!s.degenerate_at(&s.random_point(&mut r)));
            assert!(!h.degenerate_at(&h.random_point(&mut r)));
        }
    }

    #[test]
    fn pseudosphere_timelike_geodesic() {
        let m = PseudoSphere::new(1, 1).unwrap();
        let x = v(&[0.0, 1.0]);
        let xdir = v(&[1.0, 0.0]);
        for k in 0..=40 {
            let t = -2.0 + 0.1 * k as f64;
            let y = m.geodesic_closed_form(&x, &xdir, t).unwrap();
            assert!((&y - v(&[t.sinh(), t.cosh()])).amax() < 1e-12 * t.cosh());
            assert!(m.constraint_residual(&y) <= 1e-12);
        }
    }

    #[test]
    fn geodesic_at_zero_is_base_point() {
        let m = PseudoSphere::new(2, 2).unwrap();
        let mut r = rng(2);
        let x = m.random_point(&mut r);
        for case in [GeodesicCase::Spacelike, GeodesicCase::Timelike, GeodesicCase::Null] {
            let d = random_tangent_of_case(&m, &x, case, &mut r).unwrap();
            assert_eq!(geodesic_case(m.ambient(), &d), case);
            assert_eq!(m.geodesic_closed_form(&x, &d, 0.0).unwrap(), x);
            assert_eq!(m.transport_closed_form(&x, &d, &d, 0.0).unwrap(), d);
        }
    }

    #[test]
    fn null_geodesic_is_a_line_on_the_quadric() {
        let m = PseudoSphere::new(1, 2).unwrap();
        let x = v(&[0.0, 0.0, 1.0]);
        let d = v(&[1.0, 1.0, 0.0]);
        for t in [-3.0, 0.5, 4.0] {
            let y = m.geodesic_closed_form(&x, &d, t).unwrap();
            assert_eq!(y, &x + &d * t);
            assert!(m.constraint_residual(&y) < 1e-15);
        }
    }

    #[test]
    fn transport_of_velocity_is_velocity() {
        let m = PseudoSphere::new(2, 3).unwrap();
        let mut r = rng(3);
        let x = m.random_point(&mut r);
        for case in [GeodesicCase::Spacelike, GeodesicCase::Timelike, GeodesicCase::Null] {
            let d = random_tangent_of_case(&m, &x, case, &mut r).unwrap();
            for t in [0.1, 0.5, 1.0] {
                let h = 1e-5;
                let vel = (m.geodesic_closed_form(&x, &d, t + h).unwrap() - m.geodesic_closed_form(&x, &d, t - h).unwrap())
                    / (2.0 * h);
                let moved = m.transport_closed_form(&x, &d, &d, t).unwrap();
                assert!((&moved - &vel).amax() <= 1e-8 * (1.0 + vel.amax()), "{case:?} t={t}");
            }
        }
    }

    #[test]
    fn transport_preserves_products_in_every_case() {
        let m = PseudoSphere::new(2, 3).unwrap();
        let g = m.ambient().clone();
        let mut r = rng(4);
        for _ in 0..10 {
            let x = m.random_point(&mut r);
            for case in [GeodesicCase::Spacelike, GeodesicCase::Timelike, GeodesicCase::Null] {
                let d = random_tangent_of_case(&m, &x, case, &mut r).unwrap();
                let a = m.random_tangent(&x, &mut r).unwrap();
                let b = m.random_tangent(&x, &mut r).unwrap();
                for t in [0.1, 0.5, 1.0] {
                    let y = m.geodesic_closed_form(&x, &d, t).unwrap();
                    let at = m.transport_closed_form(&x, &d, &a, t).unwrap();
                    let bt = m.transport_closed_form(&x, &d, &b, t).unwrap();
                    let scale = 1.0 + at.norm() * bt.norm();
                    assert!((g.dot(&at, &bt).unwrap() - g.dot(&a, &b).unwrap()).abs() <= 1e-10 * scale);
                    assert!(m.tangent_residual(&y, &at) <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn hyperbolic_direct_and_mirrored_agree() {
        let m = PseudoHyperbolic::new(2, 2).unwrap();
        let mut r = rng(5);
        for _ in 0..10 {
            let x = m.random_point(&mut r);
            for case in [GeodesicCase::Spacelike, GeodesicCase::Timelike, GeodesicCase::Null] {
                let d = random_tangent_of_case(&m, &x, case, &mut r).unwrap();
                let a = m.random_tangent(&x, &mut r).unwrap();
                for t in [-0.7, 0.3, 1.2] {
                    let g1 = m.geodesic_closed_form(&x, &d, t).unwrap();
                    let g2 = m.geodesic_via_anti_isometry(&x, &d, t).unwrap();
                    assert!((&g1 - &g2).amax() <= 1e-12 * (1.0 + g1.amax()));
                    let a1 = m.transport_closed_form(&x, &d, &a, t).unwrap();
                    let a2 = m.transport_via_anti_isometry(&x, &d, &a, t).unwrap();
                    assert!((&a1 - &a2).amax() <= 1e-12 * (1.0 + a1.amax()));
                }
            }
        }
    }

    #[test]
    fn hyperbolic_spacelike_geodesic_is_hyperbolic() {
        let m = PseudoHyperbolic::new(1, 1).unwrap();
        let x = v(&[1.0, 0.0]);
        let d = v(&[0.0, 1.0]);
        assert_eq!(geodesic_case(m.ambient(), &d), GeodesicCase::Spacelike);
        for t in [-1.5, 0.2, 2.0] {
            let y = m.geodesic_closed_form(&x, &d, t).unwrap();
            assert!((&y - v(&[t.cosh(), t.sinh()])).amax() < 1e-14 * t.cosh());
            assert!((-y[0] * y[0] + y[1] * y[1] + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn anti_isometry_flips_the_product() {
        let mut r = rng(6);
        let (p, q) = (2, 3);
        let u = uniform(&mut r, 5);
        let w = uniform(&mut r, 5);
        let a = linalg::minkowski_dot(p, &u, &w);
        let b = linalg::minkowski_dot(q, &anti_isometry(p, &u), &anti_isometry(p, &w));
        assert!((a + b).abs() <= 1e-15);
        assert_eq!(anti_isometry(q, &anti_isometry(p, &u)), u);
    }

    #[test]
    fn hyperplane_examples() {
        let n = v(&[1.0, 0.0, 0.0]);
        let m = Hyperplane::new(1, 2, n.clone(), 0.0).unwrap();
        let w = v(&[0.3, 2.0, -1.0]);
        let out = m.project(&w);
        assert_eq!(out, v(&[0.0, 2.0, -1.0]));
        assert_eq!(n.dot(&out), 0.0);
        let inplane = v(&[0.0, 1.0, 5.0]);
        assert_eq!(m.project(&inplane), inplane);
        assert_eq!(m.signature_at(&inplane).unwrap(), Signature::new(0, 2));
        assert!(matches!(
            Hyperplane::new(1, 2, v(&[1.0, 1.0, 0.0]), 0.0),
            Err(Error::DegenerateHyperplane(_))
        ));
    }

    #[test]
    fn projections_are_idempotent_and_self_adjoint() {
        let mut r = rng(7);
        let ms: Vec<Box<dyn Manifold>> = vec![
            Box::new(MinkowskiSpace::new(2, 3)),
            Box::new(EuclideanSphere::new(2, 3).unwrap()),
            Box::new(PseudoSphere::new(2, 3).unwrap()),
            Box::new(PseudoHyperbolic::new(2, 3).unwrap()),
            Box::new(Hyperplane::new(2, 3, v(&[0.3, -1.0, 0.2, 0.5, 1.0]), 0.4).unwrap()),
        ];
        for m in &ms {
            let g = m.ambient();
            let x = m.random_point(&mut r);
            assert!(m.constraint_residual(&x) <= 1e-12, "{}", m.name());
            let a = uniform(&mut r, 5);
            let b = uniform(&mut r, 5);
            let pa = m.tangent_project(&x, &a).unwrap();
            let pb = m.tangent_project(&x, &b).unwrap();
            assert!((m.tangent_project(&x, &pa).unwrap() - &pa).amax() <= 1e-12 * (1.0 + pa.amax()));
            assert!(m.tangent_residual(&x, &pa) <= 1e-12);
            let lhs = g.dot(&pa, &b).unwrap();
            let rhs = g.dot(&a, &pb).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()), "{}", m.name());
            let f = manifold::tangent_frame(m.as_ref(), &x, FrameStrategy::Standard, 0).unwrap();
            assert!(f.orthonormality_residual(g) <= 1e-10);
            assert_eq!(f.signature(), m.signature_at(&x).unwrap(), "{}", m.name());
        }
    }

    #[test]
    fn retraction_is_first_order() {
        let mut r = rng(8);
        let ms: Vec<Box<dyn Manifold>> = vec![
            Box::new(EuclideanSphere::new(1, 3).unwrap()),
            Box::new(PseudoSphere::new(1, 3).unwrap()),
            Box::new(PseudoHyperbolic::new(1, 3).unwrap()),
        ];
        for m in &ms {
            let x = m.random_point(&mut r);
            let d = m.random_tangent(&x, &mut r).unwrap();
            assert!((m.retract(&x, &d, 0.0).unwrap() - &x).amax() <= 1e-15);
            for h in [1e-3, 1e-4, 1e-5] {
                let fd = (m.retract(&x, &d, h).unwrap() - &x) / h;
                assert!((fd - &d).norm() <= 10.0 * h * (1.0 + d.norm_squared()), "{}", m.name());
            }
        }
    }

    #[test]
    fn non_tangent_direction_is_rejected() {
        let m = PseudoSphere::new(1, 1).unwrap();
        let x = v(&[0.0, 1.0]);
        assert!(matches!(m.geodesic_closed_form(&x, &v(&[0.0, 1.0]), 1.0), Err(Error::NotTangent(_))));
    }
}
