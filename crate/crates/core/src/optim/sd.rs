use crate::error::Result;
use crate::linalg::Vector;
use crate::manifold::{flip_descent, CostFunction, Manifold};

use super::{Extra, OptimResult, OptimizerConfig, Run, Termination};

/// Steepest descent along `η_k = -[Df(x_k)]^+` with Armijo steps.
pub fn steepest_descent(
    m: &dyn Manifold,
    f: &dyn CostFunction,
    x0: &Vector,
    cfg: &OptimizerConfig,
) -> Result<OptimResult> {
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
        let eta = flip_descent(&e.df, &e.frame, m.ambient());
        let Some(ls) = run.advance(&e, &eta)? else {
            return Ok(run.finish(e, k, Termination::Stagnated));
        };
        k += 1;
        let x = run.admit(ls.x, k)?;
        e = run.evaluate(x)?;
        extra = Extra { step: Some(ls.t), ..Default::default() };
    }
}
