//! Linear algebra over a non-degenerate indefinite scalar product.
//!
//! A [`ScalarProduct`] is either the diagonal Minkowski form `I_{p,q}` (with the
//! `p` negative directions first) or a dense symmetric matrix `G`. On top of it
//! live orthonormal [`Frame`]s, built with a pivoted Gram-Schmidt process, and
//! the sign-flip map `[X]^+ = Σ <X,e_i> e_i` that turns the indefinite gradient
//! into a descent direction.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// Default relative tolerance for "null" (self-orthogonal) candidates.
pub const DEFAULT_NULL_TOL: f64 = 1e-10;

/// Number of random draws [`find_on_basis`] tries before giving up.
pub const FIND_BASIS_ATTEMPTS: usize = 8;

/// Counts of negative (`neg`, ν) and positive (`pos`, π) directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    pub neg: usize,
    pub pos: usize,
}

impl Signature {
    pub fn new(neg: usize, pos: usize) -> Self {
        Self { neg, pos }
    }

    pub fn dim(&self) -> usize {
        self.neg + self.pos
    }

    /// The sign vector ε with the negative entries first.
    pub fn signs(&self) -> Vector {
        linalg::minkowski_signs(self.neg, self.pos)
    }

    pub fn is_riemannian(&self) -> bool {
        self.neg == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Form {
    Diagonal(Signature),
    General { g: Matrix, signature: Signature },
}

/// A non-degenerate symmetric bilinear form on `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarProduct {
    form: Form,
}

impl ScalarProduct {
    /// The Minkowski product `u^T I_{p,q} v`.
    pub fn minkowski(p: usize, q: usize) -> Self {
        Self { form: Form::Diagonal(Signature::new(p, q)) }
    }

    pub fn euclidean(n: usize) -> Self {
        Self::minkowski(0, n)
    }

    /// A dense symmetric form. Symmetry, non-degeneracy and the inertia are
    /// checked here; the signature is read off the eigenvalues.
    pub fn general(g: Matrix) -> Result<Self> {
        let n = g.nrows();
        if g.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: g.ncols() });
        }
        let scale = linalg::max_abs(&g).max(f64::MIN_POSITIVE);
        let asym = linalg::asymmetry(&g);
        if asym > 1e-12 * scale {
            return Err(Error::NotSymmetric(asym));
        }
        let (vals, _) = linalg::sym_eigen(&g);
        let max = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let min = vals.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
        if n > 0 && !(min > 1e-12 * max) {
            return Err(Error::NearSingular { min, max });
        }
        let neg = vals.iter().filter(|v| **v < 0.0).count();
        Ok(Self { form: Form::General { g, signature: Signature::new(neg, n - neg) } })
    }

    /// A dense form whose inertia must equal `declared`.
    pub fn general_with_signature(g: Matrix, declared: Signature) -> Result<Self> {
        let sp = Self::general(g)?;
        let sig = sp.signature();
        if sig != declared {
            return Err(Error::SignatureMismatch {
                declared_neg: declared.neg,
                declared_pos: declared.pos,
                neg: sig.neg,
                pos: sig.pos,
            });
        }
        Ok(sp)
    }

    pub fn dim(&self) -> usize {
        self.signature().dim()
    }

    pub fn signature(&self) -> Signature {
        match &self.form {
            Form::Diagonal(s) => *s,
            Form::General { signature, .. } => *signature,
        }
    }

    /// The Gram matrix `G` of the form.
    pub fn matrix(&self) -> Matrix {
        match &self.form {
            Form::Diagonal(s) => linalg::minkowski_matrix(s.neg, s.pos),
            Form::General { g, .. } => g.clone(),
        }
    }

    /// `G v`.
    pub fn apply(&self, v: &Vector) -> Vector {
        match &self.form {
            Form::Diagonal(s) => linalg::flip_negative(s.neg, v),
            Form::General { g, .. } => g * v,
        }
    }

    /// `u^T G v`, checking dimensions.
    pub fn dot(&self, u: &Vector, v: &Vector) -> Result<f64> {
        let n = self.dim();
        for w in [u, v] {
            if w.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: w.len() });
            }
        }
        Ok(self.dot_unchecked(u, v))
    }

    /// `G^{-1} v`, the index-raising map that turns a Euclidean gradient into a
    /// gradient for this form.
    pub fn raise(&self, v: &Vector) -> Vector {
        match &self.form {
            Form::Diagonal(s) => linalg::flip_negative(s.neg, v),
            Form::General { g, .. } => g.clone().lu().solve(v).expect("form checked non-degenerate"),
        }
    }

    pub(crate) fn dot_unchecked(&self, u: &Vector, v: &Vector) -> f64 {
        match &self.form {
            Form::Diagonal(s) => linalg::minkowski_dot(s.neg, u, v),
            Form::General { g, .. } => u.dot(&(g * v)),
        }
    }
}

/// `u^T G v`.
pub fn scalar_product(u: &Vector, v: &Vector, g: &ScalarProduct) -> Result<f64> {
    g.dot(u, v)
}

/// Causal character of a vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VectorClass {
    Zero,
    Degenerate,
    Null,
    Timelike,
    Spacelike,
}

pub fn classify(v: &Vector, g: &ScalarProduct, tol: f64) -> Result<VectorClass> {
    if v.len() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: v.len() });
    }
    if v.amax() <= tol {
        return Ok(VectorClass::Zero);
    }
    let norm = v.norm();
    if g.apply(v).norm() <= tol * norm {
        return Ok(VectorClass::Degenerate);
    }
    let s = g.dot_unchecked(v, v);
    Ok(if s.abs() <= tol * norm * norm {
        VectorClass::Null
    } else if s < 0.0 {
        VectorClass::Timelike
    } else {
        VectorClass::Spacelike
    })
}

/// An ordered orthonormal family `<e_i, e_j> = δ_ij ε_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub basis: Vec<Vector>,
    pub eps: Vec<f64>,
}

impl Frame {
    /// The canonical basis of `R^{p,q}`.
    pub fn standard(sig: Signature) -> Self {
        let n = sig.dim();
        let basis = (0..n).map(|i| Vector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 })).collect();
        let eps = sig.signs().iter().copied().collect();
        Self { basis, eps }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn signature(&self) -> Signature {
        let neg = self.eps.iter().filter(|e| **e < 0.0).count();
        Signature::new(neg, self.eps.len() - neg)
    }

    /// `max_ij |<e_i,e_j> - δ_ij ε_i|`.
    pub fn orthonormality_residual(&self, g: &ScalarProduct) -> f64 {
        let mut worst = 0.0_f64;
        for (i, ei) in self.basis.iter().enumerate() {
            for (j, ej) in self.basis.iter().enumerate() {
                let target = if i == j { self.eps[i] } else { 0.0 };
                worst = worst.max((g.dot_unchecked(ei, ej) - target).abs());
            }
        }
        worst
    }

    /// Coefficients `<X, e_i>`.
    pub fn pairings(&self, x: &Vector, g: &ScalarProduct) -> Vector {
        Vector::from_iterator(self.len(), self.basis.iter().map(|e| g.dot_unchecked(x, e)))
    }

    /// `Σ c_i e_i`.
    pub fn combine(&self, coeffs: &Vector) -> Vector {
        let dim = self.basis.first().map_or(0, |e| e.len());
        let mut out = Vector::zeros(dim);
        for (c, e) in coeffs.iter().zip(&self.basis) {
            out.axpy(*c, e, 1.0);
        }
        out
    }
}

/// Pivoted Gram-Schmidt over `g`, keeping `target` vectors out of `candidates`.
///
/// At every step each remaining candidate is orthogonalized against the
/// accepted vectors and the one with the largest `|<w,w>|` is taken. A
/// candidate with `|<w,w>| <= tol ||w||^2` is null and never accepted.
pub(crate) fn pivoted_gram_schmidt(
    candidates: &[Vector],
    g: &ScalarProduct,
    target: usize,
    tol: f64,
) -> Result<Frame> {
    let mut remaining: Vec<Vector> = candidates.to_vec();
    let mut basis: Vec<Vector> = Vec::with_capacity(target);
    let mut eps: Vec<f64> = Vec::with_capacity(target);

    for step in 0..target {
        let mut best: Option<(usize, f64, Vector)> = None;
        for (idx, cand) in remaining.iter().enumerate() {
            let w = orthogonalize(cand, &basis, &eps, g);
            let s = g.dot_unchecked(&w, &w);
            let n2 = w.norm_squared();
            if n2 == 0.0 || s.abs() <= tol * n2 {
                continue;
            }
            if best.as_ref().is_none_or(|(_, b, _)| s.abs() > *b) {
                best = Some((idx, s.abs(), w));
            }
        }
        let (idx, _, w) = best.ok_or(Error::DegeneratePivot { step })?;
        remaining.swap_remove(idx);
        // one more pass against the accepted set for stability
        let w = orthogonalize(&w, &basis, &eps, g);
        let s = g.dot_unchecked(&w, &w);
        if s.abs() <= tol * w.norm_squared() {
            return Err(Error::DegeneratePivot { step });
        }
        eps.push(s.signum());
        basis.push(w / s.abs().sqrt());
    }
    Ok(Frame { basis, eps })
}

fn orthogonalize(v: &Vector, basis: &[Vector], eps: &[f64], g: &ScalarProduct) -> Vector {
    let mut w = v.clone();
    for (e, s) in basis.iter().zip(eps) {
        let c = g.dot_unchecked(&w, e) * s;
        w.axpy(-c, e, 1.0);
    }
    w
}

/// Orthonormalize `vectors` (which must be linearly independent and span a
/// non-degenerate subspace) with respect to `g`.
pub fn indef_gram_schmidt(vectors: &[Vector], g: &ScalarProduct, tol: f64) -> Result<Frame> {
    for v in vectors {
        if v.len() != g.dim() {
            return Err(Error::DimensionMismatch { expected: g.dim(), got: v.len() });
        }
    }
    pivoted_gram_schmidt(vectors, g, vectors.len(), tol)
}

/// `n` vectors with entries uniform on `[-1, 1]`.
pub fn random_vectors(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Vec<Vector> {
    (0..count).map(|_| Vector::from_fn(dim, |_, _| rng.random_range(-1.0..=1.0))).collect()
}

/// An orthonormal basis of the whole space from a seeded random draw.
pub fn find_on_basis(g: &ScalarProduct, seed: u64) -> Result<Frame> {
    let n = g.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..FIND_BASIS_ATTEMPTS {
        let draws = random_vectors(&mut rng, n, n);
        match indef_gram_schmidt(&draws, g, DEFAULT_NULL_TOL) {
            Ok(frame) => return Ok(frame),
            Err(Error::DegeneratePivot { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::FrameRetriesExhausted { attempts: FIND_BASIS_ATTEMPTS })
}

/// `[X]^+ = Σ <X, e_i> e_i`.
pub fn plus_map(x: &Vector, frame: &Frame, g: &ScalarProduct) -> Vector {
    frame.combine(&frame.pairings(x, g))
}

/// The frame-induced inner product `<X, [Y]^+> = Σ <X,e_i><Y,e_i>`.
pub fn induced_inner(x: &Vector, y: &Vector, frame: &Frame, g: &ScalarProduct) -> f64 {
    frame.pairings(x, g).dot(&frame.pairings(y, g))
}

/// Factor a symmetric non-degenerate `H` as `U^T H U = I_{p,q}`.
///
/// Uses `H = Q Λ Q^T` and `U = Q |Λ|^{-1/2}`, columns ordered so that the
/// negative eigenvalues come first.
pub fn congruence_factor(h: &Matrix, tol: f64) -> Result<(Matrix, Signature)> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: h.ncols() });
    }
    let scale = linalg::max_abs(h).max(f64::MIN_POSITIVE);
    let asym = linalg::asymmetry(h);
    if asym > 1e-12 * scale {
        return Err(Error::NotSymmetric(asym));
    }
    let (vals, vecs) = linalg::sym_eigen(h);
    let max = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let min = vals.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if n > 0 && !(min > tol * max) {
        return Err(Error::NearSingular { min, max });
    }
    let mut cols: Vec<usize> = (0..n).collect();
    // negative block first, each block ordered by the dominant coordinate
    cols.sort_by_key(|&i| (vals[i] > 0.0, dominant(&vecs, i)));
    let neg = cols.iter().filter(|&&i| vals[i] < 0.0).count();
    let mut u = DMatrix::zeros(n, n);
    for (dst, &src) in cols.iter().enumerate() {
        let col = vecs.column(src) / vals[src].abs().sqrt();
        u.set_column(dst, &col);
    }
    Ok((u, Signature::new(neg, n - neg)))
}

fn dominant(m: &Matrix, col: usize) -> usize {
    let c = m.column(col);
    (0..c.len()).fold(0, |best, i| if c[i].abs() > c[best].abs() + 1e-12 { i } else { best })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    fn gram(frame: &Frame, g: &Matrix) -> Matrix {
        // dense oracle, independent of ScalarProduct::dot
        let b = Matrix::from_columns(&frame.basis);
        b.transpose() * g * b
    }

    #[test]
    fn scalar_product_examples() {
        let g = ScalarProduct::minkowski(1, 1);
        assert_eq!(g.dot(&v(&[1.0, 1.0]), &v(&[1.0, 1.0])).unwrap(), 0.0);
        assert_eq!(g.dot(&v(&[0.0, 0.0]), &v(&[0.0, 0.0])).unwrap(), 0.0);
        let u = v(&[2.0, 3.0]);
        let w = v(&[1.0, -1.0]);
        assert_eq!(g.dot(&u, &w).unwrap(), -5.0);
        let dense = (u.transpose() * g.matrix() * &w)[(0, 0)];
        assert_eq!(dense, -5.0);
    }

    #[test]
    fn scalar_product_dimension_mismatch() {
        let g = ScalarProduct::minkowski(1, 1);
        assert!(matches!(
            g.dot(&v(&[1.0]), &v(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn classify_examples() {
        let g = ScalarProduct::minkowski(1, 1);
        assert_eq!(classify(&v(&[1.0, 1.0]), &g, 1e-10).unwrap(), VectorClass::Null);
        assert_eq!(classify(&v(&[1.0, 0.0]), &g, 1e-10).unwrap(), VectorClass::Timelike);
        assert_eq!(classify(&v(&[0.0, 1.0]), &g, 1e-10).unwrap(), VectorClass::Spacelike);
        assert_eq!(classify(&v(&[0.0, 0.0]), &g, 1e-10).unwrap(), VectorClass::Zero);
    }

    #[test]
    fn general_form_checks() {
        let g = ScalarProduct::general(Matrix::from_row_slice(2, 2, &[-2.0, 0.0, 0.0, 3.0])).unwrap();
        assert_eq!(g.signature(), Signature::new(1, 1));
        assert!(matches!(
            ScalarProduct::general(Matrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0])),
            Err(Error::NotSymmetric(_))
        ));
        assert!(matches!(
            ScalarProduct::general(Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0])),
            Err(Error::NearSingular { .. })
        ));
        assert!(matches!(
            ScalarProduct::general_with_signature(Matrix::identity(2, 2), Signature::new(1, 1)),
            Err(Error::SignatureMismatch { .. })
        ));
    }

    #[test]
    fn gram_schmidt_standard_basis_is_fixed() {
        let g = ScalarProduct::minkowski(1, 1);
        let f = indef_gram_schmidt(&[v(&[1.0, 0.0]), v(&[0.0, 1.0])], &g, DEFAULT_NULL_TOL).unwrap();
        assert_eq!(f.basis, vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]);
        assert_eq!(f.eps, vec![-1.0, 1.0]);
    }

    #[test]
    fn gram_schmidt_pivots_past_null_vector() {
        let g = ScalarProduct::minkowski(1, 1);
        let f = indef_gram_schmidt(&[v(&[1.0, 1.0]), v(&[1.0, 0.0])], &g, DEFAULT_NULL_TOL).unwrap();
        assert_eq!(f.basis[0], v(&[1.0, 0.0]));
        assert_eq!(f.signature(), Signature::new(1, 1));
        let gm = gram(&f, &g.matrix());
        assert!((gm - Matrix::from_diagonal(&v(&f.eps))).amax() < 1e-14);
    }

    #[test]
    fn gram_schmidt_rejects_all_null_working_set() {
        let g = ScalarProduct::minkowski(1, 1);
        let err = indef_gram_schmidt(&[v(&[1.0, 1.0]), v(&[2.0, 2.0])], &g, DEFAULT_NULL_TOL).unwrap_err();
        assert_eq!(err, Error::DegeneratePivot { step: 0 });
        // e3 is taken first, then (1,1,0) is null and orthogonal to it
        let g3 = ScalarProduct::minkowski(1, 2);
        let err = indef_gram_schmidt(&[v(&[1.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0])], &g3, DEFAULT_NULL_TOL).unwrap_err();
        assert_eq!(err, Error::DegeneratePivot { step: 1 });
    }

    #[test]
    fn find_on_basis_inertia_and_determinism() {
        for (p, q) in [(0, 4), (1, 3), (2, 2), (3, 1), (4, 0), (3, 7)] {
            let g = ScalarProduct::minkowski(p, q);
            let f = find_on_basis(&g, 42).unwrap();
            assert_eq!(f.signature(), Signature::new(p, q));
            assert!(f.orthonormality_residual(&g) < 1e-10);
            assert_eq!(f, find_on_basis(&g, 42).unwrap());
        }
    }

    #[test]
    fn find_on_basis_general_form() {
        let gm = Matrix::from_row_slice(2, 2, &[-2.0, 0.0, 0.0, 3.0]);
        let g = ScalarProduct::general(gm.clone()).unwrap();
        let f = find_on_basis(&g, 7).unwrap();
        let gram = gram(&f, &gm);
        let mut eps = f.eps.clone();
        eps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(eps, vec![-1.0, 1.0]);
        assert!((gram - Matrix::from_diagonal(&v(&f.eps))).amax() < 1e-12);
    }

    #[test]
    fn plus_map_on_standard_frame_recovers_euclidean_gradient() {
        let g = ScalarProduct::minkowski(1, 1);
        let f = Frame::standard(g.signature());
        let (a, b) = (0.7, -1.3);
        let df = v(&[-a, b]);
        assert_eq!(plus_map(&df, &f, &g), v(&[a, b]));
        assert_eq!(plus_map(&Vector::zeros(2), &f, &g), Vector::zeros(2));
    }

    #[test]
    fn induced_inner_on_frame_vectors() {
        let g = ScalarProduct::minkowski(2, 3);
        let f = find_on_basis(&g, 3).unwrap();
        assert!((induced_inner(&f.basis[0], &f.basis[0], &f, &g) - 1.0).abs() < 1e-12);
        assert!(induced_inner(&f.basis[0], &f.basis[1], &f, &g).abs() < 1e-12);
    }

    #[test]
    fn congruence_identity_and_diagonal() {
        let ipq = linalg::minkowski_matrix(2, 3);
        let (u, sig) = congruence_factor(&ipq, 1e-12).unwrap();
        assert_eq!(sig, Signature::new(2, 3));
        assert!((&u - Matrix::identity(5, 5)).amax() < 1e-14);

        let h = Matrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, -9.0]);
        let (u, sig) = congruence_factor(&h, 1e-12).unwrap();
        assert_eq!(sig, Signature::new(1, 1));
        let expected = Matrix::from_row_slice(2, 2, &[0.0, 0.5, 1.0 / 3.0, 0.0]);
        assert!((&u - expected).amax() < 1e-14);
        let res = u.transpose() * h * &u - linalg::minkowski_matrix(1, 1);
        assert!(res.norm() <= 1e-12);
    }

    #[test]
    fn congruence_rejects_near_singular() {
        let h = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-14]);
        assert!(matches!(congruence_factor(&h, 1e-10), Err(Error::NearSingular { .. })));
    }

    #[test]
    fn congruence_spd_gives_descent_direction() {
        let a = Matrix::from_fn(4, 4, |i, j| ((i + 2 * j) as f64).cos());
        let h = &a * a.transpose() + Matrix::identity(4, 4);
        let (u, sig) = congruence_factor(&h, 1e-12).unwrap();
        assert_eq!(sig, Signature::new(0, 4));
        let grad = v(&[0.3, -1.0, 2.0, 0.1]);
        let pairing = grad.dot(&(&u * u.transpose() * &grad));
        assert!(pairing >= 0.0);
    }
}
