use crate::error::Result;
use crate::indefinite;
use crate::linalg::Vector;
use crate::manifold::{flip_descent, CostFunction, Manifold};

use super::{Extra, OptimResult, OptimizerConfig, Run, Termination};

/// Polak-Ribière conjugate gradient with the flipped gradient as the
/// preconditioned residual.
///
/// `β_k = max(0, <Df_{k+1} - P Df_k, [Df_{k+1}]^+> / <Df_k, [Df_k]^+>)`,
/// capped at `cfg.beta_cap`, where `P` transports along the accepted step. The
/// method restarts from `-[Df]^+` when the new direction is not a descent
/// direction and every `cg_restart_every` iterations.
pub fn conjugate_gradient(
    m: &dyn Manifold,
    f: &dyn CostFunction,
    x0: &Vector,
    cfg: &OptimizerConfig,
) -> Result<OptimResult> {
    let g = m.ambient();
    let restart_every = cfg.cg_restart_every.unwrap_or(m.intrinsic_dim().max(1));
    let mut run = Run::new(m, f, cfg)?;
    let x = run.admit(x0.clone(), 0)?;
    let mut e = run.evaluate(x)?;
    let mut eta = flip_descent(&e.df, &e.frame, g);
    let mut extra = Extra::default();
    let mut k = 0;
    let mut since_restart = 0;
    loop {
        run.record(k, &e, extra);
        if run.converged(&e) {
            return Ok(run.finish(e, k, Termination::Converged));
        }
        if k >= cfg.max_iters {
            return Ok(run.finish(e, k, Termination::MaxIterations));
        }
        let Some(ls) = run.advance(&e, &eta)? else {
            return Ok(run.finish(e, k, Termination::Stagnated));
        };
        let moved_eta = run.transport(&e.x, &eta, ls.t, &eta)?;
        let moved_df = run.transport(&e.x, &eta, ls.t, &e.df)?;
        k += 1;
        since_restart += 1;
        let perturbed_before = run.perturbation_count();
        let x = run.admit(ls.x, k)?;
        let next = run.evaluate(x)?;

        let plus_next = indefinite::plus_map(&next.df, &next.frame, g);
        let denom = indefinite::induced_inner(&e.df, &e.df, &e.frame, g);
        let numer = m.metric(&next.x, &(&next.df - &moved_df), &plus_next);
        let mut beta = (numer / denom).max(0.0).min(cfg.beta_cap);
        if !beta.is_finite() {
            beta = 0.0;
        }
        let xi = -plus_next;
        let mut candidate = &xi + &moved_eta * beta;
        let restart = since_restart >= restart_every
            || m.metric(&next.x, &next.df, &candidate) >= 0.0
            || run.perturbation_count() != perturbed_before;
        if restart {
            candidate = xi;
            beta = 0.0;
            since_restart = 0;
        }
        eta = candidate;
        extra = Extra { step: Some(ls.t), beta: Some(beta), ..Default::default() };
        e = next;
    }
}
