use crate::error::{Error, Result};
use crate::indefinite::{self, Frame, ScalarProduct};
use crate::linalg::{Matrix, Vector};
use crate::manifold::{self, CostFunction, Manifold};

use super::{Extra, OptimResult, OptimizerConfig, Run, Termination, TrustRegionConfig};

/// `f + <Df, η> + ½ <η, D²f(η)>`.
pub fn semi_model(g: &ScalarProduct, f0: f64, df: &Vector, eta: &Vector, hess_eta: &Vector) -> f64 {
    f0 + g.dot_unchecked(df, eta) + 0.5 * g.dot_unchecked(eta, hess_eta)
}

/// The same model written with the frame-induced inner product
/// `g(X, Y) = <X, [Y]^+>`: gradient `[Df]^+` and Hessian operator `[D²f(·)]^+`.
pub fn riemannian_model(
    g: &ScalarProduct,
    frame: &Frame,
    f0: f64,
    df: &Vector,
    eta: &Vector,
    hess_eta: &Vector,
) -> f64 {
    let grad = indefinite::plus_map(df, frame, g);
    let hess = indefinite::plus_map(hess_eta, frame, g);
    f0 + indefinite::induced_inner(&grad, eta, frame, g) + 0.5 * indefinite::induced_inner(&hess, eta, frame, g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedCgOutcome {
    /// Frame coordinates of the step; `||c||_2` is the induced norm of the step.
    pub coords: Vector,
    pub hit_boundary: bool,
    pub negative_curvature: bool,
    pub iterations: usize,
}

fn to_boundary(c: &Vector, d: &Vector, radius: f64) -> f64 {
    let cd = c.dot(d);
    let dd = d.dot(d);
    let cc = c.dot(c);
    (-cd + (cd * cd + dd * (radius * radius - cc)).max(0.0).sqrt()) / dd
}

/// Steihaug-Toint truncated CG for `min b^T c + ½ c^T H c` over `||c|| <= radius`.
pub fn truncated_cg(
    h: &Matrix,
    b: &Vector,
    radius: f64,
    kappa: f64,
    theta: f64,
    max_inner: usize,
) -> TruncatedCgOutcome {
    let n = b.len();
    let mut c = Vector::zeros(n);
    let mut r = b.clone();
    let r0 = r.norm();
    let done = |c, hit_boundary, negative_curvature, iterations| TruncatedCgOutcome {
        coords: c,
        hit_boundary,
        negative_curvature,
        iterations,
    };
    if r0 == 0.0 {
        return done(c, false, false, 0);
    }
    let stop = r0 * r0.powf(theta).min(kappa);
    let mut d = -&r;
    let mut rr = r.dot(&r);
    for j in 0..max_inner {
        let hd = h * &d;
        let dhd = d.dot(&hd);
        if dhd <= 0.0 {
            let tau = to_boundary(&c, &d, radius);
            return done(&c + &d * tau, true, true, j + 1);
        }
        let alpha = rr / dhd;
        let next = &c + &d * alpha;
        if next.norm() >= radius {
            let tau = to_boundary(&c, &d, radius);
            return done(&c + &d * tau, true, false, j + 1);
        }
        c = next;
        r += &hd * alpha;
        let rr_next = r.dot(&r);
        if rr_next.sqrt() <= stop {
            return done(c, false, false, j + 1);
        }
        d = -&r + &d * (rr_next / rr);
        rr = rr_next;
    }
    done(c, false, false, max_inner)
}

/// The inner trust-region step at `x` for radius `radius`, in ambient coordinates.
pub fn trust_region_step(
    m: &dyn Manifold,
    f: &dyn CostFunction,
    x: &Vector,
    frame: &Frame,
    radius: f64,
    cfg: &TrustRegionConfig,
) -> Result<(Vector, TruncatedCgOutcome)> {
    let df = manifold::semi_gradient(m, f, x)?;
    let h = manifold::frame_hessian(m, f, x, frame)?;
    let b = frame.pairings(&df, m.ambient());
    let max_inner = cfg.max_inner.unwrap_or(frame.len().max(1));
    let out = truncated_cg(&h, &b, radius, cfg.kappa, cfg.theta, max_inner);
    Ok((frame.combine(&out.coords), out))
}

/// Trust-region method with the model measured in the induced norm `||·||_+`.
pub fn trust_region(m: &dyn Manifold, f: &dyn CostFunction, x0: &Vector, cfg: &OptimizerConfig) -> Result<OptimResult> {
    if !f.has_hessian() {
        return Err(Error::MissingHessian);
    }
    let tr = &cfg.trust_region;
    let cap = tr.radius_cap();
    let mut run = Run::new(m, f, cfg)?;
    let x = run.admit(x0.clone(), 0)?;
    let mut e = run.evaluate(x)?;
    let mut radius = tr.initial_radius;
    let mut extra = Extra { radius: Some(radius), ..Default::default() };
    let mut k = 0;
    loop {
        run.record(k, &e, extra);
        if run.converged(&e) {
            return Ok(run.finish(e, k, Termination::Converged));
        }
        if k >= cfg.max_iters {
            return Ok(run.finish(e, k, Termination::MaxIterations));
        }
        let h = manifold::frame_hessian(m, f, &e.x, &e.frame)?;
        let b = e.frame.pairings(&e.df, m.ambient());
        let max_inner = tr.max_inner.unwrap_or(e.frame.len().max(1));
        let inner = truncated_cg(&h, &b, radius, tr.kappa, tr.theta, max_inner);
        let c = &inner.coords;
        let predicted = -(b.dot(c) + 0.5 * c.dot(&(&h * c)));
        let eta = e.frame.combine(c);
        let trial = run.step(&e.x, &eta, 1.0).ok().map(|y| {
            let fy = f.value(&y);
            (y, fy)
        });
        let rho = match &trial {
            Some((_, fy)) if fy.is_finite() && predicted > 0.0 => (e.f - fy) / predicted,
            _ => f64::NEG_INFINITY,
        };
        if rho < tr.shrink_below {
            radius *= tr.shrink_factor;
        } else if rho > tr.expand_above && inner.hit_boundary {
            radius = (radius * tr.expand_factor).min(cap);
        }
        k += 1;
        let step = c.norm();
        if rho >= tr.accept_ratio {
            let (y, _) = trial.expect("accepted step has a trial point");
            if y == e.x {
                return Ok(run.finish(e, k - 1, Termination::Stagnated));
            }
            let y = run.admit(y, k)?;
            e = run.evaluate(y)?;
            extra = Extra { step: Some(step), rho: Some(rho), radius: Some(radius), ..Default::default() };
        } else {
            if radius <= f64::EPSILON * (1.0 + e.x.norm()) {
                return Ok(run.finish(e, k - 1, Termination::Stagnated));
            }
            extra = Extra { step: Some(0.0), rho: Some(rho), radius: Some(radius), ..Default::default() };
        }
    }
}
