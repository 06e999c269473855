use crate::error::{Error, Result};
use crate::indefinite::Frame;
use crate::linalg::{self, Vector};
use crate::manifold::{self, CostFunction, Manifold};

/// Necessary optimality conditions at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimality {
    /// `sqrt(<Df, [Df]^+>) <= tol`.
    pub first_order: bool,
    /// First order, and the frame-coordinate Hessian has no eigenvalue below `-tol`.
    pub second_order: bool,
    pub stationarity: f64,
    pub min_hessian_eigenvalue: f64,
}

/// Check `Df(x) = 0` and `D²f(x) ⪰ 0`. The eigenvalue sign pattern of the
/// frame-coordinate Hessian does not depend on the frame.
pub fn optimality_check(
    m: &dyn Manifold,
    f: &dyn CostFunction,
    x: &Vector,
    frame: &Frame,
    tol: f64,
) -> Result<Optimality> {
    if !f.has_hessian() {
        return Err(Error::MissingHessian);
    }
    let stationarity = manifold::stationarity_measure(m, f, x, frame)?;
    let h = manifold::frame_hessian(m, f, x, frame)?;
    let (vals, _) = linalg::sym_eigen(&h);
    let min_hessian_eigenvalue = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let first_order = stationarity <= tol;
    Ok(Optimality {
        first_order,
        second_order: first_order && min_hessian_eigenvalue >= -tol,
        stationarity,
        min_hessian_eigenvalue,
    })
}

/// First-order check only; needs no Hessian.
pub fn first_order_check(m: &dyn Manifold, f: &dyn CostFunction, x: &Vector, frame: &Frame, tol: f64) -> Result<bool> {
    Ok(manifold::stationarity_measure(m, f, x, frame)? <= tol)
}
