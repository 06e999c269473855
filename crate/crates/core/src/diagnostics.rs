//! Independent numerical oracles: finite differences, quadrature, reference
//! solutions, and residual checks for geodesics and parallel transports.

use crate::error::{Error, Result};
use crate::indefinite::ScalarProduct;
use crate::lie::{self, GroupTag};
use crate::linalg::{self, Matrix, Vector};
use crate::manifold::{self, CostFunction, Manifold};

/// Relative tolerance for gradient checks.
pub const FD_GRADIENT_TOL: f64 = 1e-5;
/// Tolerance for the Hessian symmetry check.
pub const HESSIAN_SYMMETRY_TOL: f64 = 1e-8;
/// Step for second differences of curves.
pub const CURVE_FD_STEP: f64 = 1e-4;
/// Absolute target of [`adaptive_simpson`].
pub const SIMPSON_TOL: f64 = 1e-10;
pub const SIMPSON_MAX_DEPTH: usize = 30;
/// Samples per branch of the KKT scan.
pub const KKT_SAMPLES: usize = 1000;
// denominators in relative errors never drop below this
const REL_FLOOR: f64 = 1e-3;

/// `1e-6 (1 + ||x||)`.
pub fn gradient_step(x: &Vector) -> f64 {
    1e-6 * (1.0 + x.norm())
}

/// `1e-3 (1 + ||x||)`, paired with a fourth-order stencil.
pub fn hessian_step(x: &Vector) -> f64 {
    1e-3 * (1.0 + x.norm())
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(REL_FLOOR)
}

/// Max relative error of `∇f` against central differences of `f` along the
/// canonical basis of the ambient space.
pub fn fd_euclidean_gradient_check(f: &dyn CostFunction, x: &Vector) -> f64 {
    let h = gradient_step(x);
    let g = f.euclidean_gradient(x);
    (0..x.len())
        .map(|i| {
            let mut e = Vector::zeros(x.len());
            e[i] = h;
            let fd = (f.value(&(x + &e)) - f.value(&(x - &e))) / (2.0 * h);
            rel_err(g[i], fd)
        })
        .fold(0.0, f64::max)
}

/// Max over `basis` of the relative error between `<Df, e_i>` and
/// `(f(R(x, h e_i)) - f(R(x, -h e_i))) / 2h`.
pub fn fd_gradient_check(
    m: &dyn Manifold,
    f: &dyn CostFunction,
    x: &Vector,
    basis: &[Vector],
    h: Option<f64>,
) -> Result<f64> {
    let h = h.unwrap_or_else(|| gradient_step(x));
    let df = manifold::semi_gradient(m, f, x)?;
    let mut worst: f64 = 0.0;
    for e in basis {
        let a = m.metric(x, &df, e);
        let b = (f.value(&m.retract(x, e, h)?) - f.value(&m.retract(x, e, -h)?)) / (2.0 * h);
        worst = worst.max(rel_err(a, b));
    }
    Ok(worst)
}

/// Second derivative of `f` along the retraction curve, corrected for the
/// curve's acceleration: `(f∘c)''(0) - <Df, c''(0)>`, which equals
/// `<D²f(v), v>` for any smooth curve with `c(0) = x`, `c'(0) = v`.
fn fd_quadratic_form(m: &dyn Manifold, f: &dyn CostFunction, x: &Vector, df: &Vector, v: &Vector, h: f64) -> Result<f64> {
    // (-c(2h) + 16 c(h) - 30 c(0) + 16 c(-h) - c(-2h)) / 12h^2
    let weights = [(2.0, -1.0), (1.0, 16.0), (-1.0, 16.0), (-2.0, -1.0)];
    let mut second = -30.0 * f.value(x);
    let mut accel = x * -30.0;
    for (s, w) in weights {
        let y = m.retract(x, v, s * h)?;
        second += w * f.value(&y);
        accel += y * w;
    }
    let scale = 12.0 * h * h;
    Ok(second / scale - m.metric(x, df, &(accel / scale)))
}

/// Max relative error of `<D²f(u), u>` against second differences, over the
/// basis vectors and their pairwise sums.
pub fn fd_hessian_check(
    m: &dyn Manifold,
    f: &dyn CostFunction,
    x: &Vector,
    basis: &[Vector],
    h: Option<f64>,
) -> Result<f64> {
    let h = h.unwrap_or_else(|| hessian_step(x));
    let df = manifold::semi_gradient(m, f, x)?;
    let mut dirs: Vec<Vector> = basis.to_vec();
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            dirs.push(&basis[i] + &basis[j]);
        }
    }
    let mut worst: f64 = 0.0;
    for u in &dirs {
        let a = m.metric(x, u, &manifold::semi_hessian_apply(m, f, x, u)?);
        let b = fd_quadratic_form(m, f, x, &df, u, h)?;
        worst = worst.max(rel_err(a, b));
    }
    Ok(worst)
}

/// `max_ij |a_ij - a_ji| / max(1, |a_ij|, |a_ji|)` with `a_ij = <e_i, D²f(e_j)>`.
///
/// Scaled because frames near the degenerate locus have large vectors.
pub fn hessian_symmetry(m: &dyn Manifold, f: &dyn CostFunction, x: &Vector, basis: &[Vector]) -> Result<f64> {
    let cols = basis
        .iter()
        .map(|e| manifold::semi_hessian_apply(m, f, x, e))
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for i in 0..basis.len() {
        for j in 0..basis.len() {
            let a = m.metric(x, &basis[i], &cols[j]);
            let b = m.metric(x, &cols[i], &basis[j]);
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
        }
    }
    Ok(worst)
}

/// Components of a geodesic-definition check, each maximized over samples.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeodesicResidual {
    /// Constraint residual of `γ(t)`.
    pub constraint: f64,
    /// Tangency residual of the central-difference `γ̇(t)`.
    pub velocity: f64,
    /// Size of the tangential part of the central-difference `γ̈(t)`.
    pub acceleration: f64,
}

impl GeodesicResidual {
    pub fn max(&self) -> f64 {
        self.constraint.max(self.velocity).max(self.acceleration)
    }

    fn absorb(&mut self, other: GeodesicResidual) {
        self.constraint = self.constraint.max(other.constraint);
        self.velocity = self.velocity.max(other.velocity);
        self.acceleration = self.acceleration.max(other.acceleration);
    }
}

/// Checks that `curve` is an embedded geodesic of `m` at the sample times.
pub fn curve_geodesic_residual(
    m: &dyn Manifold,
    curve: &dyn Fn(f64) -> Result<Vector>,
    t_samples: &[f64],
    h: f64,
) -> Result<GeodesicResidual> {
    let mut out = GeodesicResidual::default();
    for &t in t_samples {
        let x = curve(t)?;
        let plus = curve(t + h)?;
        let minus = curve(t - h)?;
        let vel = (&plus - &minus) / (2.0 * h);
        let acc = (&plus - &x * 2.0 + &minus) / (h * h);
        let tangential = m.tangent_project(&x, &acc)?;
        out.absorb(GeodesicResidual {
            constraint: m.constraint_residual(&x),
            velocity: m.tangent_residual(&x, &vel),
            acceleration: tangential.amax(),
        });
    }
    Ok(out)
}

/// [`curve_geodesic_residual`] for the manifold's own geodesic from `(x, v)`.
pub fn geodesic_residual(
    m: &dyn Manifold,
    x: &Vector,
    v: &Vector,
    t_samples: &[f64],
) -> Result<GeodesicResidual> {
    m.geodesic(x, v, 0.0).ok_or(Error::InvalidConfig(format!("{} has no closed-form geodesic", m.name())))??;
    let curve = |t: f64| m.geodesic(x, v, t).expect("geodesic availability checked");
    curve_geodesic_residual(m, &curve, t_samples, CURVE_FD_STEP)
}

/// Distance of a left-translated velocity `X = γ^{-1} γ̇` from the Lie algebra.
pub fn lie_algebra_residual(tag: GroupTag, x: &Matrix) -> f64 {
    match tag {
        GroupTag::IndefOrthogonal { p, q } => {
            let i = linalg::minkowski_matrix(p, q);
            linalg::max_abs(&(x.transpose() * &i + &i * x)) * 0.5
        }
        GroupTag::Orthogonal { .. } => linalg::max_abs(&(x + x.transpose())) * 0.5,
        GroupTag::SpecialLinear2 => x.trace().abs(),
    }
}

/// Geodesic-definition check for a curve in a matrix group: group constraint,
/// `γ^{-1}γ̇` in the Lie algebra, and `γ^{-1}γ̈` in the semi-normal space at
/// the identity.
pub fn lie_geodesic_residual(
    tag: GroupTag,
    curve: &dyn Fn(f64) -> Result<Matrix>,
    t_samples: &[f64],
    h: f64,
) -> Result<GeodesicResidual> {
    let mut out = GeodesicResidual::default();
    for &t in t_samples {
        let a = curve(t)?;
        let plus = curve(t + h)?;
        let minus = curve(t - h)?;
        let inv = a.clone().try_inverse().ok_or(Error::NearSingular { min: 0.0, max: 0.0 })?;
        let vel = &inv * (&plus - &minus) / (2.0 * h);
        let acc = &inv * (&plus - &a * 2.0 + &minus) / (h * h);
        out.absorb(GeodesicResidual {
            constraint: lie::group_residual(tag, &a),
            velocity: lie_algebra_residual(tag, &vel),
            acceleration: lie::semi_normal_residual(tag, &acc),
        });
    }
    Ok(out)
}

/// Central-difference `<γ̇(t), γ̇(t)>` under the left-invariant metric.
pub fn lie_fd_speed_sq(tag: GroupTag, curve: &dyn Fn(f64) -> Result<Matrix>, t: f64, h: f64) -> Result<f64> {
    let a = curve(t)?;
    let vel = (curve(t + h)? - curve(t - h)?) / (2.0 * h);
    lie::left_invariant_metric(tag, &a, &vel, &vel)
}

/// Max over samples of `|<Δ(t), Ξ(t)> - <Δ, Ξ>|` and of the tangency residual
/// of `Δ(t)` and `Ξ(t)`, for transports along `curve`.
pub fn curve_transport_invariance(
    m: &dyn Manifold,
    curve: &dyn Fn(f64) -> Result<Vector>,
    transport: &dyn Fn(f64, &Vector) -> Result<Vector>,
    delta: &Vector,
    xi: &Vector,
    t_samples: &[f64],
) -> Result<f64> {
    let g: &ScalarProduct = m.ambient();
    let base = g.dot_unchecked(delta, xi);
    let mut worst: f64 = 0.0;
    for &t in t_samples {
        let x = curve(t)?;
        let d = transport(t, delta)?;
        let e = transport(t, xi)?;
        worst = worst
            .max((g.dot_unchecked(&d, &e) - base).abs())
            .max(m.tangent_residual(&x, &d))
            .max(m.tangent_residual(&x, &e));
    }
    Ok(worst)
}

/// [`curve_transport_invariance`] for the manifold's geodesic and transport.
pub fn transport_invariance(
    m: &dyn Manifold,
    x: &Vector,
    along: &Vector,
    delta: &Vector,
    xi: &Vector,
    t_samples: &[f64],
) -> Result<f64> {
    let curve = |t: f64| match m.geodesic(x, along, t) {
        Some(r) => r,
        None => m.retract(x, along, t),
    };
    let transport = |t: f64, v: &Vector| m.transport(x, along, t, v);
    curve_transport_invariance(m, &curve, &transport, delta, xi, t_samples)
}

fn simpson(fa: &Matrix, fm: &Matrix, fb: &Matrix, a: f64, b: f64) -> Matrix {
    (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> Matrix,
    a: f64,
    b: f64,
    fa: &Matrix,
    fm: &Matrix,
    fb: &Matrix,
    whole: &Matrix,
    tol: f64,
    depth: usize,
) -> Matrix {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, &flm, fm, a, m);
    let right = simpson(fm, &frm, fb, m, b);
    let both = &left + &right;
    let diff = &both - whole;
    if depth == 0 || linalg::max_abs(&diff) <= 15.0 * tol {
        return both + diff / 15.0;
    }
    simpson_step(f, a, m, fa, &flm, fm, &left, tol * 0.5, depth - 1)
        + simpson_step(f, m, b, fm, &frm, fb, &right, tol * 0.5, depth - 1)
}

/// Entrywise adaptive Simpson quadrature of a matrix-valued integrand.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> Matrix, a: f64, b: f64, tol: f64, max_depth: usize) -> Matrix {
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(&fa, &fm, &fb, a, b);
    simpson_step(f, a, b, &fa, &fm, &fb, &whole, tol, max_depth)
}

/// Scalar [`adaptive_simpson`].
pub fn adaptive_simpson_scalar(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_depth: usize) -> f64 {
    let g = |t: f64| Matrix::from_element(1, 1, f(t));
    adaptive_simpson(&g, a, b, tol, max_depth)[(0, 0)]
}

/// Top eigenpair of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RayleighReference {
    /// Unit eigenvector with its first nonzero component positive.
    pub vector: Vector,
    pub value: f64,
    /// Gap to the next eigenvalue.
    pub gap: f64,
    /// The top eigenvalue is repeated, so `vector` is one of many.
    pub repeated: bool,
}

pub fn rayleigh_reference(a: &Matrix) -> Result<RayleighReference> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n.max(1), got: a.ncols() });
    }
    let asym = linalg::asymmetry(a);
    if asym > 1e-12 * (1.0 + linalg::max_abs(a)) {
        return Err(Error::NotSymmetric(asym));
    }
    let (vals, vecs) = linalg::sym_eigen(a);
    let value = vals[n - 1];
    let gap = if n > 1 { value - vals[n - 2] } else { f64::INFINITY };
    let mut vector: Vector = vecs.column(n - 1).into_owned();
    vector /= vector.norm();
    if let Some(lead) = vector.iter().find(|c| c.abs() > 1e-14).copied() {
        if lead < 0.0 {
            vector = -vector;
        }
    }
    let repeated = gap <= 1e-10 * value.abs().max(1.0);
    Ok(RayleighReference { vector, value, gap, repeated })
}

/// `min ||x - ξ||² subject to x^T I_{p,q} x = 1`.
///
/// Stationary points are `x_i = ξ_i / (1 - λ ε_i)`. The constraint is scanned
/// on every interval between the poles `λ = ε_i`, sign changes are bisected,
/// and the feasible candidate with the least objective is returned.
pub fn pseudosphere_distance_reference(p: usize, q: usize, xi: &Vector) -> Result<Vector> {
    let n = p + q;
    if xi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: xi.len() });
    }
    let eps = linalg::minkowski_signs(p, q);
    let point = |lambda: f64| Vector::from_fn(n, |i, _| xi[i] / (1.0 - lambda * eps[i]));
    let phi = |lambda: f64| {
        let x = point(lambda);
        linalg::minkowski_dot(p, &x, &x) - 1.0
    };
    let mut poles: Vec<f64> = (0..n).filter(|&i| xi[i] != 0.0).map(|i| eps[i]).collect();
    poles.sort_by(|a, b| a.total_cmp(b));
    poles.dedup();
    // each branch is a map from (0, 1) onto an open interval between poles
    let mut branches: Vec<Box<dyn Fn(f64) -> f64>> = Vec::new();
    match (poles.first().copied(), poles.last().copied()) {
        (None, _) | (_, None) => return Err(Error::NoFeasibleRoot),
        (Some(lo), Some(hi)) => {
            branches.push(Box::new(move |u: f64| lo - (u / (1.0 - u)).powi(2)));
            for w in poles.windows(2) {
                let (a, b) = (w[0], w[1]);
                branches.push(Box::new(move |u: f64| {
                    let s = 0.5 * (1.0 - (std::f64::consts::PI * u).cos());
                    a + (b - a) * s
                }));
            }
            branches.push(Box::new(move |u: f64| hi + ((1.0 - u) / u).powi(2)));
        }
    }
    let mut best: Option<(f64, Vector)> = None;
    for map in &branches {
        let samples: Vec<(f64, f64)> = (0..KKT_SAMPLES)
            .map(|i| {
                let l = map((i as f64 + 0.5) / KKT_SAMPLES as f64);
                (l, phi(l))
            })
            .filter(|(l, v)| l.is_finite() && v.is_finite())
            .collect();
        for w in samples.windows(2) {
            let ((mut a, mut fa), (mut b, _)) = (w[0], w[1]);
            if fa.signum() == w[1].1.signum() && fa != 0.0 && w[1].1 != 0.0 {
                continue;
            }
            if a > b {
                std::mem::swap(&mut a, &mut b);
                fa = phi(a);
            }
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                let fm = phi(mid);
                if fm == 0.0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if fm.signum() == fa.signum() {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            let root = if phi(a).abs() <= phi(b).abs() { a } else { b };
            let x = point(root);
            let value = (&x - xi).norm_squared();
            if best.as_ref().is_none_or(|(v, _)| value < *v) {
                best = Some((value, x));
            }
        }
    }
    best.map(|(_, x)| x).ok_or(Error::NoFeasibleRoot)
}

/// KKT residuals `(|x^T I x - 1|, ||(x - ξ) - λ I x||)` with the multiplier
/// `λ` fitted by least squares.
pub fn pseudosphere_kkt_residual(p: usize, x: &Vector, xi: &Vector) -> (f64, f64) {
    let ix = linalg::flip_negative(p, x);
    let r = x - xi;
    let lambda = r.dot(&ix) / ix.norm_squared();
    ((linalg::minkowski_dot(p, x, x) - 1.0).abs(), (r - ix * lambda).amax())
}

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LinearFit { slope, intercept: my - slope * mx, r_squared })
}
