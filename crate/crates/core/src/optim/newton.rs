use crate::error::{Error, Result};
use crate::indefinite::Frame;
use crate::linalg::{self, Vector};
use crate::manifold::{self, flip_descent, CostFunction, Manifold};

use super::{Extra, HessianRegularization, NewtonConfig, OptimResult, OptimizerConfig, Run, Termination};

/// Solve `[D²f(x)](η) = -Df(x)` in the coordinates of `frame`.
///
/// With `η = Σ c_j e_j` the system reads `M c = -b` for
/// `M_ij = <e_i, D²f(e_j)>` and `b_i = <e_i, Df>`. It is solved through the
/// eigendecomposition of `M`, which also exposes near-singularity.
pub fn newton_direction(
    m: &dyn Manifold,
    f: &dyn CostFunction,
    x: &Vector,
    df: &Vector,
    frame: &Frame,
    cfg: &NewtonConfig,
) -> Result<Vector> {
    let h = manifold::frame_hessian(m, f, x, frame)?;
    let b = frame.pairings(df, m.ambient());
    let (vals, vecs) = linalg::sym_eigen(&h);
    let max = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let min = vals.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    let singular = !(min > cfg.singular_tol * max);
    let vals = match cfg.regularization {
        HessianRegularization::Off if singular => return Err(Error::SingularNewtonSystem { min, max }),
        HessianRegularization::Off => vals,
        HessianRegularization::Floor(floor) => vals.map(|l| if l < 0.0 { l.min(-floor) } else { l.max(floor) }),
    };
    let coeffs = vecs.transpose() * &b;
    let scaled = Vector::from_fn(coeffs.len(), |i, _| -coeffs[i] / vals[i]);
    Ok(frame.combine(&(&vecs * scaled)))
}

/// Newton's method with Armijo damping.
///
/// A singular system or a non-descent Newton direction is an error unless
/// `cfg.newton.fallback_to_gradient` is set, in which case that iteration uses
/// `-[Df]^+`.
pub fn newton(m: &dyn Manifold, f: &dyn CostFunction, x0: &Vector, cfg: &OptimizerConfig) -> Result<OptimResult> {
    if !f.has_hessian() {
        return Err(Error::MissingHessian);
    }
    let mut run = Run::new(m, f, cfg)?;
    let x = run.admit(x0.clone(), 0)?;
    let mut e = run.evaluate(x)?;
    let mut extra = Extra::default();
    let mut k = 0;
    loop {
        run.record(k, &e, extra);
        if run.converged(&e) {
            return Ok(run.finish(e, k, Termination::Converged));
        }
        if k >= cfg.max_iters {
            return Ok(run.finish(e, k, Termination::MaxIterations));
        }
        let eta = match newton_direction(m, f, &e.x, &e.df, &e.frame, &cfg.newton) {
            Ok(eta) => {
                let slope = -m.metric(&e.x, &e.df, &eta);
                if slope > 0.0 {
                    eta
                } else if cfg.newton.fallback_to_gradient {
                    flip_descent(&e.df, &e.frame, m.ambient())
                } else {
                    return Err(Error::NotDescent(slope));
                }
            }
            Err(Error::SingularNewtonSystem { .. }) if cfg.newton.fallback_to_gradient => {
                flip_descent(&e.df, &e.frame, m.ambient())
            }
            Err(err) => return Err(err),
        };
        let Some(ls) = run.advance(&e, &eta)? else {
            return Ok(run.finish(e, k, Termination::Stagnated));
        };
        k += 1;
        let x = run.admit(ls.x, k)?;
        e = run.evaluate(x)?;
        extra = Extra { step: Some(ls.t), ..Default::default() };
    }
}
