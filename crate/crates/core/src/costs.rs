//! Cost functions used by the experiments and the test suites.

use crate::linalg::{Matrix, Vector};
use crate::manifold::CostFunction;

/// `f(x) = x^T A x + b^T x + c`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    a: Matrix,
    // A + A^T, the Hessian
    sym2: Matrix,
    b: Vector,
    c: f64,
}

impl Quadratic {
    pub fn new(a: Matrix, b: Option<Vector>) -> Self {
        let n = a.nrows();
        let sym2 = &a + a.transpose();
        Self { a, sym2, b: b.unwrap_or_else(|| Vector::zeros(n)), c: 0.0 }
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    /// `f(x) = -x^T A x`, whose minimizers on the unit sphere are the top
    /// eigenvectors of `A`.
    pub fn neg_rayleigh(a: Matrix) -> Self {
        Self::new(-a, None)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }
}

impl CostFunction for Quadratic {
    fn value(&self, x: &Vector) -> f64 {
        x.dot(&(&self.a * x)) + self.b.dot(x) + self.c
    }
    fn euclidean_gradient(&self, x: &Vector) -> Vector {
        &self.sym2 * x + &self.b
    }
    fn euclidean_hessian(&self, _x: &Vector, v: &Vector) -> Option<Vector> {
        Some(&self.sym2 * v)
    }
    fn has_hessian(&self) -> bool {
        true
    }
}

/// `f(x) = ||x - ξ||^2`.
#[derive(Debug, Clone)]
pub struct SquaredDistance {
    target: Vector,
}

impl SquaredDistance {
    pub fn new(target: Vector) -> Self {
        Self { target }
    }

    pub fn target(&self) -> &Vector {
        &self.target
    }
}

impl CostFunction for SquaredDistance {
    fn value(&self, x: &Vector) -> f64 {
        (x - &self.target).norm_squared()
    }
    fn euclidean_gradient(&self, x: &Vector) -> Vector {
        (x - &self.target) * 2.0
    }
    fn euclidean_hessian(&self, _x: &Vector, v: &Vector) -> Option<Vector> {
        Some(v * 2.0)
    }
    fn has_hessian(&self) -> bool {
        true
    }
}

/// `f(x) = ½ x^T A x + b^T x + Σ_k c_k cos(w_k^T x)` with symmetric `A`: a
/// smooth non-polynomial test function.
#[derive(Debug, Clone)]
pub struct CosineRidge {
    a: Matrix,
    b: Vector,
    ridges: Vec<(f64, Vector)>,
}

impl CosineRidge {
    pub fn new(a: Matrix, b: Vector, ridges: Vec<(f64, Vector)>) -> Self {
        let a = (&a + a.transpose()) * 0.5;
        Self { a, b, ridges }
    }
}

impl CostFunction for CosineRidge {
    fn value(&self, x: &Vector) -> f64 {
        let ridge: f64 = self.ridges.iter().map(|(c, w)| c * w.dot(x).cos()).sum();
        0.5 * x.dot(&(&self.a * x)) + self.b.dot(x) + ridge
    }
    fn euclidean_gradient(&self, x: &Vector) -> Vector {
        let mut g = &self.a * x + &self.b;
        for (c, w) in &self.ridges {
            g.axpy(-c * w.dot(x).sin(), w, 1.0);
        }
        g
    }
    fn euclidean_hessian(&self, x: &Vector, v: &Vector) -> Option<Vector> {
        let mut h = &self.a * v;
        for (c, w) in &self.ridges {
            h.axpy(-c * w.dot(x).cos() * w.dot(v), w, 1.0);
        }
        Some(h)
    }
    fn has_hessian(&self) -> bool {
        true
    }
}
