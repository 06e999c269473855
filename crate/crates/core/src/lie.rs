//! Matrix Lie groups with the left-invariant metric
//! `<U,V>_A = tr((A^{-1}U)^T I_{p,q} (A^{-1}V))` inherited from `GL(n)`.
//!
//! Covers the indefinite orthogonal group `O(p,q)`, the orthogonal group
//! `O(n)` under an indefinite metric, and `SL(2)` under signature `(1,1)`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Group-constraint tolerance for points fed to or produced by the geodesics.
pub const GROUP_TOL: f64 = 1e-9;

/// Which group a matrix belongs to, with the metric signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupTag {
    /// `A^T I_{p,q} A = I_{p,q}`.
    IndefOrthogonal { p: usize, q: usize },
    /// `A^T A = I` with metric signature `(p, q)`.
    Orthogonal { p: usize, q: usize },
    /// `det A = 1`, `2x2`, metric signature `(1, 1)`.
    SpecialLinear2,
}

impl GroupTag {
    pub fn dim(&self) -> usize {
        match *self {
            GroupTag::IndefOrthogonal { p, q } | GroupTag::Orthogonal { p, q } => p + q,
            GroupTag::SpecialLinear2 => 2,
        }
    }

    pub fn metric_signs(&self) -> (usize, usize) {
        match *self {
            GroupTag::IndefOrthogonal { p, q } | GroupTag::Orthogonal { p, q } => (p, q),
            GroupTag::SpecialLinear2 => (1, 1),
        }
    }

    fn metric_matrix(&self) -> Matrix {
        let (p, q) = self.metric_signs();
        linalg::minkowski_matrix(p, q)
    }
}

/// Violation of the group constraint at `a`.
pub fn group_residual(tag: GroupTag, a: &Matrix) -> f64 {
    let n = tag.dim();
    if a.nrows() != n || a.ncols() != n {
        return f64::INFINITY;
    }
    match tag {
        GroupTag::IndefOrthogonal { p, q } => {
            let i = linalg::minkowski_matrix(p, q);
            linalg::max_abs(&(a.transpose() * &i * a - i))
        }
        GroupTag::Orthogonal { .. } => linalg::max_abs(&(a.transpose() * a - Matrix::identity(n, n))),
        GroupTag::SpecialLinear2 => (a.determinant() - 1.0).abs(),
    }
}

fn check_point(tag: GroupTag, a: &Matrix) -> Result<()> {
    let n = tag.dim();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.nrows() });
    }
    let r = group_residual(tag, a);
    if r > GROUP_TOL {
        return Err(Error::NotOnManifold(r));
    }
    Ok(())
}

/// `tr((A^{-1}U)^T I (A^{-1}V))`.
pub fn left_invariant_metric(tag: GroupTag, a: &Matrix, u: &Matrix, v: &Matrix) -> Result<f64> {
    let inv = a.clone().try_inverse().ok_or(Error::NearSingular { min: 0.0, max: 0.0 })?;
    let lu = &inv * u;
    let lv = &inv * v;
    Ok((lu.transpose() * tag.metric_matrix() * lv).trace())
}

/// `exp(M)` by scaling and squaring.
pub fn matrix_exp(m: &Matrix) -> Result<Matrix> {
    linalg::expm(m)
}

/// A skew-symmetric `Δ = [[Δ1, -Δ2^T], [Δ2, Δ3]]` with `Δ1` `p×p`, `Δ3` `q×q`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedSkew {
    pub d1: Matrix,
    pub d2: Matrix,
    pub d3: Matrix,
}

impl PartitionedSkew {
    pub fn new(d1: Matrix, d2: Matrix, d3: Matrix) -> Result<Self> {
        let (p, q) = (d1.nrows(), d3.nrows());
        if d1.ncols() != p {
            return Err(Error::DimensionMismatch { expected: p, got: d1.ncols() });
        }
        if d3.ncols() != q {
            return Err(Error::DimensionMismatch { expected: q, got: d3.ncols() });
        }
        if d2.nrows() != q || d2.ncols() != p {
            return Err(Error::DimensionMismatch { expected: q * p, got: d2.nrows() * d2.ncols() });
        }
        for b in [&d1, &d3] {
            let asym = linalg::max_abs(&(b + b.transpose()));
            if asym > 1e-12 * (1.0 + linalg::max_abs(b)) {
                return Err(Error::NotSymmetric(asym));
            }
        }
        Ok(Self { d1, d2, d3 })
    }

    /// Split an `n×n` skew-symmetric matrix after its first `p` rows.
    pub fn from_matrix(delta: &Matrix, p: usize) -> Result<Self> {
        let n = delta.nrows();
        if delta.ncols() != n || p > n {
            return Err(Error::DimensionMismatch { expected: n, got: delta.ncols() });
        }
        let q = n - p;
        let asym = linalg::max_abs(&(delta + delta.transpose()));
        if asym > 1e-12 * (1.0 + linalg::max_abs(delta)) {
            return Err(Error::NotSymmetric(asym));
        }
        Self::new(
            delta.view((0, 0), (p, p)).into_owned(),
            delta.view((p, 0), (q, p)).into_owned(),
            delta.view((p, p), (q, q)).into_owned(),
        )
    }

    /// Entries uniform on `[-scale, scale]` before skew-symmetrization.
    pub fn random(p: usize, q: usize, scale: f64, rng: &mut ChaCha8Rng) -> Self {
        let mut draw = |r: usize, c: usize| Matrix::from_fn(r, c, |_, _| rng.random_range(-scale..=scale));
        let a = draw(p, p);
        let d2 = draw(q, p);
        let c = draw(q, q);
        Self { d1: (&a - a.transpose()) * 0.5, d2, d3: (&c - c.transpose()) * 0.5 }
    }

    pub fn p(&self) -> usize {
        self.d1.nrows()
    }

    pub fn q(&self) -> usize {
        self.d3.nrows()
    }

    pub fn matrix(&self) -> Matrix {
        let (p, q) = (self.p(), self.q());
        let mut m = Matrix::zeros(p + q, p + q);
        m.view_mut((0, 0), (p, p)).copy_from(&self.d1);
        m.view_mut((0, p), (p, q)).copy_from(&(-self.d2.transpose()));
        m.view_mut((p, 0), (q, p)).copy_from(&self.d2);
        m.view_mut((p, p), (q, q)).copy_from(&self.d3);
        m
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.d1.norm_squared() + 2.0 * self.d2.norm_squared() + self.d3.norm_squared()
    }

    /// The tangent direction `I_{p,q} Δ` at the identity of `O(p,q)`.
    pub fn opq_velocity(&self) -> Matrix {
        linalg::minkowski_matrix(self.p(), self.q()) * self.matrix()
    }
}

fn existence_tol(delta: &PartitionedSkew) -> f64 {
    1e-8 * (1.0 + delta.frobenius_sq())
}

/// `∫_0^t exp(-Δ1 τ) Δ2^T exp(Δ3 τ) dτ`.
///
/// The `(1,2)` block of `exp(t [[Δ1, Δ2^T], [0, Δ3]])` is
/// `∫_0^t exp(Δ1 (t-s)) Δ2^T exp(Δ3 s) ds`; left-multiplying by `exp(-Δ1 t)`
/// gives the integral.
pub fn opq_block_integral(delta: &PartitionedSkew, t: f64) -> Result<Matrix> {
    let (p, q) = (delta.p(), delta.q());
    let mut m = Matrix::zeros(p + q, p + q);
    m.view_mut((0, 0), (p, p)).copy_from(&(&delta.d1 * t));
    m.view_mut((0, p), (p, q)).copy_from(&(delta.d2.transpose() * t));
    m.view_mut((p, p), (q, q)).copy_from(&(&delta.d3 * t));
    let e = linalg::expm(&m)?;
    let f = e.view((0, p), (p, q)).into_owned();
    Ok(linalg::expm(&(&delta.d1 * (-t)))? * f)
}

/// `B(t) = [[-Δ1 t, J(t)], [J(t)^T, Δ3 t]]` with `J` from [`opq_block_integral`].
pub fn opq_exponent(delta: &PartitionedSkew, t: f64) -> Result<Matrix> {
    let (p, q) = (delta.p(), delta.q());
    let j = opq_block_integral(delta, t)?;
    let mut b = Matrix::zeros(p + q, p + q);
    b.view_mut((0, 0), (p, p)).copy_from(&(&delta.d1 * (-t)));
    b.view_mut((0, p), (p, q)).copy_from(&j);
    b.view_mut((p, 0), (q, p)).copy_from(&j.transpose());
    b.view_mut((p, p), (q, q)).copy_from(&(&delta.d3 * t));
    Ok(b)
}

/// The curve `A exp(B(t))` through `A ∈ O(p,q)` with initial velocity `A I_{p,q} Δ`.
pub fn opq_geodesic(a: &Matrix, delta: &PartitionedSkew, t: f64) -> Result<Matrix> {
    let tag = GroupTag::IndefOrthogonal { p: delta.p(), q: delta.q() };
    check_point(tag, a)?;
    let g = a * linalg::expm(&opq_exponent(delta, t)?)?;
    let r = group_residual(tag, &g);
    if r > GROUP_TOL {
        return Err(Error::ConstraintViolation(r));
    }
    Ok(g)
}

/// `A exp(t I_{p,q} Δ)`.
pub fn opq_exponential_curve(a: &Matrix, delta: &PartitionedSkew, t: f64) -> Result<Matrix> {
    let tag = GroupTag::IndefOrthogonal { p: delta.p(), q: delta.q() };
    check_point(tag, a)?;
    Ok(a * linalg::expm(&(delta.opq_velocity() * t))?)
}

/// `||Δ3 Δ2 - Δ2 Δ1||_max`, which vanishes exactly when the exponential curve
/// is an embedded geodesic of `O(p,q)`.
pub fn opq_commutation_residual(delta: &PartitionedSkew) -> f64 {
    linalg::max_abs(&(&delta.d3 * &delta.d2 - &delta.d2 * &delta.d1))
}

pub fn opq_geodesic_exists(delta: &PartitionedSkew) -> bool {
    opq_commutation_residual(delta) <= existence_tol(delta)
}

/// Closed-form speed² and energy rate `-tr(Δ1²) + tr(Δ3²)`; the energy is
/// `E(t) = rate · t`.
pub fn opq_speed_energy(delta: &PartitionedSkew) -> (f64, f64) {
    let s = -(&delta.d1 * &delta.d1).trace() + (&delta.d3 * &delta.d3).trace();
    (s, s)
}

/// `<I Δ, I Δ>` under the left-invariant metric, which is `tr(Δ1²) - tr(Δ3²)`.
pub fn opq_metric_speed_sq(delta: &PartitionedSkew) -> f64 {
    (&delta.d1 * &delta.d1).trace() - (&delta.d3 * &delta.d3).trace()
}

/// `||Δ2 Δ1 + Δ3 Δ2||_max`, the existence residual on `O(n)`.
pub fn on_existence_residual(delta: &PartitionedSkew) -> f64 {
    linalg::max_abs(&(&delta.d2 * &delta.d1 + &delta.d3 * &delta.d2))
}

/// The geodesic `A exp(Δ t)` on `O(n)` with metric signature `(p, q)`.
pub fn on_geodesic(a: &Matrix, delta: &PartitionedSkew, t: f64) -> Result<Matrix> {
    let tag = GroupTag::Orthogonal { p: delta.p(), q: delta.q() };
    check_point(tag, a)?;
    let r = on_existence_residual(delta);
    if r > existence_tol(delta) {
        return Err(Error::GeodesicNonexistent(r));
    }
    let g = a * linalg::expm(&(delta.matrix() * t))?;
    let res = group_residual(tag, &g);
    if res > GROUP_TOL {
        return Err(Error::ConstraintViolation(res));
    }
    Ok(g)
}

/// A traceless `[[a, b], [c, -a]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sl2Element {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Sl2Element {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn matrix(&self) -> Matrix {
        Matrix::from_row_slice(2, 2, &[self.a, self.b, self.c, -self.a])
    }

    /// `a² + bc`, which must vanish for a geodesic to exist.
    pub fn existence_residual(&self) -> f64 {
        self.a * self.a + self.b * self.c
    }

    /// `2a² + b² + c² = tr(U^T U)`.
    pub fn speed_sq(&self) -> f64 {
        2.0 * self.a * self.a + self.b * self.b + self.c * self.c
    }

    /// `tr(U^T I_{1,1} U) = c² - b²`.
    pub fn metric_speed_sq(&self) -> f64 {
        self.c * self.c - self.b * self.b
    }
}

/// The geodesic `A exp(U t)` on `SL(2)`.
pub fn sl2_geodesic(a: &Matrix, u: &Sl2Element, t: f64) -> Result<Matrix> {
    check_point(GroupTag::SpecialLinear2, a)?;
    let r = u.existence_residual().abs();
    let scale = 1.0 + u.a * u.a + u.b * u.b + u.c * u.c;
    if r > 1e-8 * scale {
        return Err(Error::GeodesicNonexistent(r));
    }
    let g = a * linalg::expm(&(u.matrix() * t))?;
    let res = group_residual(GroupTag::SpecialLinear2, &g);
    if res > 1e-10 * (1.0 + linalg::max_abs(&g).powi(2)) {
        return Err(Error::ConstraintViolation(res));
    }
    Ok(g)
}

/// A basis of the Lie algebra at the identity.
pub fn lie_algebra_basis(tag: GroupTag) -> Vec<Matrix> {
    let n = tag.dim();
    let unit = |i: usize, j: usize| {
        let mut m = Matrix::zeros(n, n);
        m[(i, j)] = 1.0;
        m
    };
    let mut out = Vec::new();
    match tag {
        GroupTag::IndefOrthogonal { p, q } => {
            let ipq = linalg::minkowski_matrix(p, q);
            for i in 0..n {
                for j in (i + 1)..n {
                    out.push(&ipq * (unit(i, j) - unit(j, i)));
                }
            }
        }
        GroupTag::Orthogonal { .. } => {
            for i in 0..n {
                for j in (i + 1)..n {
                    out.push(unit(i, j) - unit(j, i));
                }
            }
        }
        GroupTag::SpecialLinear2 => {
            out.push(unit(0, 0) - unit(1, 1));
            out.push(unit(0, 1));
            out.push(unit(1, 0));
        }
    }
    out
}

/// Basis of the degenerate fibre `T_I G ∩ (T_I G)^⊥` at the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyDescriptor {
    pub tag: GroupTag,
    pub basis: Vec<Matrix>,
}

impl DegeneracyDescriptor {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `max |tr(Z^T I V)|` over fibre elements `Z` and algebra basis elements `V`.
    pub fn orthogonality_residual(&self) -> f64 {
        let i = self.tag.metric_matrix();
        let alg = lie_algebra_basis(self.tag);
        let mut worst = 0.0_f64;
        for z in &self.basis {
            for v in &alg {
                worst = worst.max((z.transpose() * &i * v).trace().abs());
            }
        }
        worst
    }
}

pub fn degenerate_fibre_basis(tag: GroupTag) -> DegeneracyDescriptor {
    let n = tag.dim();
    let mut basis = Vec::new();
    match tag {
        GroupTag::IndefOrthogonal { p, q } | GroupTag::Orthogonal { p, q } => {
            let sign = if matches!(tag, GroupTag::IndefOrthogonal { .. }) { 1.0 } else { -1.0 };
            for r in 0..q {
                for c in 0..p {
                    let mut z = Matrix::zeros(n, n);
                    z[(p + r, c)] = 1.0;
                    z[(c, p + r)] = sign;
                    basis.push(z);
                }
            }
        }
        GroupTag::SpecialLinear2 => basis.push(linalg::minkowski_matrix(1, 1)),
    }
    DegeneracyDescriptor { tag, basis }
}

/// Distance of a left-translated acceleration `X = γ^{-1} γ̈` from the
/// semi-normal space at the identity.
pub fn semi_normal_residual(tag: GroupTag, x: &Matrix) -> f64 {
    match tag {
        GroupTag::IndefOrthogonal { .. } => linalg::asymmetry(x) * 0.5,
        GroupTag::Orthogonal { p, q } => linalg::asymmetry(&(linalg::minkowski_matrix(p, q) * x)) * 0.5,
        GroupTag::SpecialLinear2 => {
            let i = linalg::minkowski_matrix(1, 1);
            let along = (x * &i).trace() * 0.5;
            linalg::max_abs(&(x - i * along))
        }
    }
}

/// A point of `O(p,q)` built as `exp(I_{p,q} Δ)` for a random `Δ`.
pub fn random_opq_point(p: usize, q: usize, scale: f64, rng: &mut ChaCha8Rng) -> Result<Matrix> {
    linalg::expm(&PartitionedSkew::random(p, q, scale, rng).opq_velocity())
}

/// `Δ` with `Δ3 Δ2 = Δ2 Δ1`: diagonal blocks built from one shared skew
/// matrix on a common `min(p,q)` block, `Δ2` an embedding of the identity.
pub fn random_commuting_skew(p: usize, q: usize, scale: f64, rng: &mut ChaCha8Rng) -> PartitionedSkew {
    let k = p.min(q);
    let base = PartitionedSkew::random(k, 0, scale, rng).d1;
    let mut d1 = Matrix::zeros(p, p);
    let mut d3 = Matrix::zeros(q, q);
    d1.view_mut((0, 0), (k, k)).copy_from(&base);
    d3.view_mut((0, 0), (k, k)).copy_from(&base);
    let mut d2 = Matrix::zeros(q, p);
    let lambda = rng.random_range(-scale..=scale);
    for i in 0..k {
        d2[(i, i)] = lambda;
    }
    // extra blocks act on directions Δ2 does not touch
    if p > k {
        let extra = PartitionedSkew::random(p - k, 0, scale, rng).d1;
        d1.view_mut((k, k), (p - k, p - k)).copy_from(&extra);
    }
    if q > k {
        let extra = PartitionedSkew::random(q - k, 0, scale, rng).d1;
        d3.view_mut((k, k), (q - k, q - k)).copy_from(&extra);
    }
    PartitionedSkew { d1, d2, d3 }
}
