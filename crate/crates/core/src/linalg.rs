//! Dense linear-algebra helpers shared by the geometry and optimizer modules.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// `diag(-1,...,-1, 1,...,1)` as a vector of signs, `p` negative entries first.
pub fn minkowski_signs(p: usize, q: usize) -> Vector {
    Vector::from_fn(p + q, |i, _| if i < p { -1.0 } else { 1.0 })
}

/// `I_{p,q}` as a dense matrix.
pub fn minkowski_matrix(p: usize, q: usize) -> Matrix {
    Matrix::from_diagonal(&minkowski_signs(p, q))
}

/// `u^T I_{p,q} v`.
pub fn minkowski_dot(p: usize, u: &Vector, v: &Vector) -> f64 {
    u.iter()
        .zip(v.iter())
        .enumerate()
        .map(|(i, (a, b))| if i < p { -a * b } else { a * b })
        .sum()
}

/// `I_{p,q} v`.
pub fn flip_negative(p: usize, v: &Vector) -> Vector {
    let mut out = v.clone();
    for i in 0..p.min(v.len()) {
        out[i] = -out[i];
    }
    out
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn asymmetry(m: &Matrix) -> f64 {
    max_abs(&(m - m.transpose()))
}

fn one_norm(m: &Matrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Symmetric eigendecomposition with eigenvalues ascending.
///
/// Each eigenvector is sign-normalized so that its largest-magnitude entry is
/// positive, which makes the output deterministic up to repeated eigenvalues.
pub fn sym_eigen(h: &Matrix) -> (Vector, Matrix) {
    let n = h.nrows();
    let eig = nalgebra::SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| dominant_index(&eig.eigenvectors, a).cmp(&dominant_index(&eig.eigenvectors, b)))
    });
    let vals = Vector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        let k = dominant_index(&eig.eigenvectors, src);
        if col[k] < 0.0 {
            col = -col;
        }
        vecs.set_column(dst, &col);
    }
    (vals, vecs)
}

fn dominant_index(vecs: &Matrix, col: usize) -> usize {
    let c = vecs.column(col);
    let mut best = 0;
    for i in 0..c.len() {
        // strict comparison keeps the first index on ties
        if c[i].abs() > c[best].abs() + 1e-12 {
            best = i;
        }
    }
    best
}

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Backward-error bounds for each Padé degree in the 1-norm.
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152e0;

/// Matrix exponential by scaling and squaring with a diagonal Padé approximant.
pub fn expm(a: &Matrix) -> Result<Matrix> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
    }
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(Error::ExpOverflow(norm));
    }
    let id = Matrix::identity(n, n);

    for &(m, theta) in THETA.iter() {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            return pade_low(a, coeffs, &id).and_then(|r| finite_or_overflow(r, norm));
        }
    }

    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    if s > 1000 {
        return Err(Error::ExpOverflow(norm));
    }
    let scaled = a * 2f64.powi(-s);
    let mut r = pade13(&scaled, &id)?;
    for _ in 0..s {
        r = &r * &r;
    }
    finite_or_overflow(r, norm)
}

fn finite_or_overflow(r: Matrix, norm: f64) -> Result<Matrix> {
    if r.iter().all(|x| x.is_finite()) {
        Ok(r)
    } else {
        Err(Error::ExpOverflow(norm))
    }
}

fn pade_low(a: &Matrix, b: &[f64], id: &Matrix) -> Result<Matrix> {
    let a2 = a * a;
    let mut pow = id.clone();
    let mut u = id * b[1];
    let mut v = id * b[0];
    for k in (2..b.len()).step_by(2) {
        pow = &pow * &a2;
        v += &pow * b[k];
        if k + 1 < b.len() {
            u += &pow * b[k + 1];
        }
    }
    let u = a * u;
    solve_pade(&u, &v)
}

fn pade13(a: &Matrix, id: &Matrix) -> Result<Matrix> {
    let b = &PADE13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let u = a * (&a6 * inner_u + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + id * b[1]);
    let inner_v = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v = &a6 * inner_v + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + id * b[0];
    solve_pade(&u, &v)
}

fn solve_pade(u: &Matrix, v: &Matrix) -> Result<Matrix> {
    let p = v + u;
    let q = v - u;
    q.lu().solve(&p).ok_or(Error::NearSingular { min: 0.0, max: 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taylor(a: &Matrix, terms: usize) -> Matrix {
        let n = a.nrows();
        let mut sum = Matrix::identity(n, n);
        let mut term = Matrix::identity(n, n);
        for k in 1..terms {
            term = &term * a / k as f64;
            sum += &term;
        }
        sum
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = expm(&Matrix::zeros(3, 3)).unwrap();
        assert!((e - Matrix::identity(3, 3)).norm() < 1e-15);
    }

    #[test]
    fn exp_of_diagonal() {
        let a = Matrix::from_diagonal(&Vector::from_vec(vec![0.5, -2.0, 3.0]));
        let e = expm(&a).unwrap();
        for (i, x) in [0.5f64, -2.0, 3.0].iter().enumerate() {
            assert!((e[(i, i)] - x.exp()).abs() < 1e-13 * x.exp());
        }
    }

    #[test]
    fn exp_matches_taylor_for_every_pade_degree() {
        for scale in [1e-3, 0.1, 0.5, 1.5, 4.0, 9.0] {
            let a = Matrix::from_fn(4, 4, |i, j| ((i * 7 + j * 3) as f64).sin() * scale / 4.0);
            let e = expm(&a).unwrap();
            let t = taylor(&a, 80);
            assert!((&e - &t).norm() <= 1e-12 * t.norm(), "scale {scale}");
        }
    }

    #[test]
    fn exp_overflow_is_reported() {
        let a = Matrix::from_element(2, 2, 1e300);
        assert!(matches!(expm(&a), Err(Error::ExpOverflow(_))));
    }

    #[test]
    fn sym_eigen_sorted_and_reconstructs() {
        let h = Matrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, -3.0, 0.5, 0.0, 0.5, 1.0]);
        let (vals, vecs) = sym_eigen(&h);
        assert!(vals[0] <= vals[1] && vals[1] <= vals[2]);
        let rec = &vecs * Matrix::from_diagonal(&vals) * vecs.transpose();
        assert!((rec - h).norm() < 1e-12);
    }
}
