//! Backtracking Armijo line search along a retraction curve.

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::manifold::{CostFunction, Manifold};

use super::config::LineSearchConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchOutcome {
    pub t: f64,
    pub x: Vector,
    pub f: f64,
    pub backtracks: usize,
}

/// Largest `t = t0 shrink^j` with `f(R(x, t η)) <= f(x) - c t slope`, where
/// `slope = -<Df, η>` must be positive.
pub fn armijo_linesearch(
    m: &dyn Manifold,
    f: &dyn CostFunction,
    x: &Vector,
    df: &Vector,
    eta: &Vector,
    cfg: &LineSearchConfig,
) -> Result<LineSearchOutcome> {
    let slope = -m.metric(x, df, eta);
    let fx = f.value(x);
    armijo_along(f, fx, slope, cfg, |t| m.retract(x, eta, t))
}

pub(crate) fn armijo_along(
    f: &dyn CostFunction,
    fx: f64,
    slope: f64,
    cfg: &LineSearchConfig,
    step: impl Fn(f64) -> Result<Vector>,
) -> Result<LineSearchOutcome> {
    cfg.validate()?;
    if !(slope > 0.0) {
        return Err(Error::NotDescent(slope));
    }
    let mut t = cfg.t0;
    for j in 0..=cfg.max_backtracks {
        // a failed retraction (e.g. overflow) counts as insufficient decrease
        if let Ok(y) = step(t) {
            let fy = f.value(&y);
            if fy.is_finite() && fy <= fx - cfg.c * t * slope {
                return Ok(LineSearchOutcome { t, x: y, f: fy, backtracks: j });
            }
        }
        t *= cfg.shrink;
    }
    Err(Error::LineSearchFailed(cfg.max_backtracks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::Quadratic;
    use crate::hypersurfaces::MinkowskiSpace;
    use crate::linalg::Matrix;

    struct Linear;

    impl CostFunction for Linear {
        fn value(&self, x: &Vector) -> f64 {
            x[0]
        }
        fn euclidean_gradient(&self, _x: &Vector) -> Vector {
            Vector::from_row_slice(&[1.0])
        }
    }

    #[test]
    fn exact_decrease_accepts_first_step() {
        let m = MinkowskiSpace::new(0, 1);
        let x = Vector::from_row_slice(&[0.0]);
        let df = Vector::from_row_slice(&[1.0]);
        let eta = Vector::from_row_slice(&[-1.0]);
        let cfg = LineSearchConfig { c: 0.5, ..Default::default() };
        let out = armijo_linesearch(&m, &Linear, &x, &df, &eta, &cfg).unwrap();
        assert_eq!(out.t, 1.0);
        assert_eq!(out.backtracks, 0);
    }

    #[test]
    fn zero_direction_is_rejected() {
        let m = MinkowskiSpace::new(0, 1);
        let x = Vector::from_row_slice(&[0.0]);
        let df = Vector::from_row_slice(&[1.0]);
        let eta = Vector::zeros(1);
        let err = armijo_linesearch(&m, &Linear, &x, &df, &eta, &LineSearchConfig::default()).unwrap_err();
        assert_eq!(err, Error::NotDescent(0.0));
    }

    #[test]
    fn one_dimensional_quadratic_decreases() {
        // f(t) = (t - 1)^2 = t^2 - 2t + 1
        let m = MinkowskiSpace::new(0, 1);
        let f = Quadratic::new(Matrix::identity(1, 1), Some(Vector::from_row_slice(&[-2.0]))).with_constant(1.0);
        let x = Vector::from_row_slice(&[0.0]);
        let df = f.euclidean_gradient(&x);
        for scale in [0.5, 1.0, 3.0, 10.0] {
            let eta = Vector::from_row_slice(&[scale]);
            let out = armijo_linesearch(&m, &f, &x, &df, &eta, &LineSearchConfig::default()).unwrap();
            assert!(out.f < f.value(&x));
        }
    }
}
