//! Semi-Riemannian steepest descent, conjugate gradient, Newton and trust
//! region methods.
//!
//! All of them stop on the coercive measure `sqrt(<Df, [Df]^+>)`, which
//! vanishes exactly at critical points, instead of the indefinite `<Df, Df>`.

mod cg;
pub mod config;
pub mod linesearch;
mod newton;
mod optimality;
mod sd;
pub mod trace;
mod trust_region;

use std::time::Instant;

use crate::error::{Error, Result};
use crate::indefinite::Frame;
use crate::linalg::Vector;
use crate::manifold::{self, CostFunction, FrameProvider, Manifold};

pub use cg::conjugate_gradient;
pub use config::{
    HessianRegularization, LineSearchConfig, NewtonConfig, OptimizerConfig, Reference, RetractionKind,
    TransportKind, TrustRegionConfig,
};
pub use linesearch::{armijo_linesearch, LineSearchOutcome};
pub use newton::{newton, newton_direction};
pub use optimality::{first_order_check, optimality_check, Optimality};
pub use sd::steepest_descent;
pub use trace::{IterationRecord, IterationTrace, OptimResult, PerturbationEvent, Termination};
pub use trust_region::{
    riemannian_model, semi_model, truncated_cg, trust_region, trust_region_step, TruncatedCgOutcome,
};

/// The four methods, for callers that pick one at run time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    SteepestDescent,
    ConjugateGradient,
    Newton,
    TrustRegion,
}

pub fn run(
    method: Method,
    m: &dyn Manifold,
    f: &dyn CostFunction,
    x0: &Vector,
    cfg: &OptimizerConfig,
) -> Result<OptimResult> {
    match method {
        Method::SteepestDescent => steepest_descent(m, f, x0, cfg),
        Method::ConjugateGradient => conjugate_gradient(m, f, x0, cfg),
        Method::Newton => newton(m, f, x0, cfg),
        Method::TrustRegion => trust_region(m, f, x0, cfg),
    }
}

/// Values shared by every method at an iterate.
pub(crate) struct Eval {
    pub x: Vector,
    pub f: f64,
    pub df: Vector,
    pub frame: Frame,
    pub stationarity: f64,
}

#[derive(Default)]
pub(crate) struct Extra {
    pub step: Option<f64>,
    pub beta: Option<f64>,
    pub rho: Option<f64>,
    pub radius: Option<f64>,
}

/// Bookkeeping for a single run.
pub(crate) struct Run<'a> {
    pub m: &'a dyn Manifold,
    pub f: &'a dyn CostFunction,
    pub cfg: &'a OptimizerConfig,
    frames: FrameProvider,
    start: Instant,
    trace: IterationTrace,
    iterates: Vec<Vector>,
    perturbations: u64,
}

impl<'a> Run<'a> {
    pub fn new(m: &'a dyn Manifold, f: &'a dyn CostFunction, cfg: &'a OptimizerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            m,
            f,
            cfg,
            frames: FrameProvider::new(cfg.frame_strategy),
            start: Instant::now(),
            trace: IterationTrace::default(),
            iterates: Vec::new(),
            perturbations: 0,
        })
    }

    /// Move `x` off the degenerate locus if needed, logging the event.
    pub fn admit(&mut self, x: Vector, k: usize) -> Result<Vector> {
        if !self.m.degenerate_at(&x) {
            return Ok(x);
        }
        let seed = self.cfg.perturbation_seed.wrapping_add(self.perturbations);
        self.perturbations += 1;
        let y = self.m.perturb(&x, seed)?;
        self.trace.perturbations.push(PerturbationEvent { k, displacement: (&y - &x).norm() });
        Ok(y)
    }

    pub fn evaluate(&mut self, x: Vector) -> Result<Eval> {
        let frame = self.frames.frame(self.m, &x)?;
        let df = manifold::semi_gradient(self.m, self.f, &x)?;
        let stationarity = manifold::stationarity_of(&df, &frame, self.m.ambient());
        let f = self.f.value(&x);
        Ok(Eval { x, f, df, frame, stationarity })
    }

    pub fn record(&mut self, k: usize, e: &Eval, extra: Extra) {
        let err_sq = self.cfg.reference.as_ref().map(|r| r.err_sq(&e.x));
        self.trace.records.push(IterationRecord {
            k,
            f: e.f,
            stationarity: e.stationarity,
            step: extra.step,
            beta: extra.beta,
            rho: extra.rho,
            radius: extra.radius,
            err_sq,
            wall_time: self.start.elapsed().as_secs_f64(),
        });
        if self.cfg.keep_iterates {
            self.iterates.push(e.x.clone());
        }
    }

    pub fn converged(&self, e: &Eval) -> bool {
        e.stationarity <= self.cfg.grad_tol
    }

    pub fn step(&self, x: &Vector, eta: &Vector, t: f64) -> Result<Vector> {
        match self.cfg.retraction {
            RetractionKind::Geodesic => match self.m.geodesic(x, eta, t) {
                Some(r) => r,
                None => self.m.retract(x, eta, t),
            },
            RetractionKind::Manifold => self.m.retract(x, eta, t),
        }
    }

    pub fn transport(&self, x: &Vector, eta: &Vector, t: f64, payload: &Vector) -> Result<Vector> {
        match self.cfg.transport {
            TransportKind::Manifold => self.m.transport(x, eta, t, payload),
            TransportKind::Projection => {
                let y = self.step(x, eta, t)?;
                self.m.tangent_project(&y, payload)
            }
        }
    }

    pub fn line_search(&self, e: &Eval, eta: &Vector) -> Result<LineSearchOutcome> {
        let slope = -self.m.metric(&e.x, &e.df, eta);
        linesearch::armijo_along(self.f, e.f, slope, &self.cfg.line_search, |t| self.step(&e.x, eta, t))
    }

    /// [`Run::line_search`], with `None` once `f` stops resolving decrease:
    /// the accepted point equals `x`, or no trial step passed along a descent
    /// direction (impossible in exact arithmetic).
    pub fn advance(&self, e: &Eval, eta: &Vector) -> Result<Option<LineSearchOutcome>> {
        match self.line_search(e, eta) {
            Ok(ls) if ls.x == e.x => Ok(None),
            Ok(ls) => Ok(Some(ls)),
            Err(Error::LineSearchFailed(_)) => Ok(None),
            Err(err) => Err(err),
        }
    }

    pub fn perturbation_count(&self) -> usize {
        self.trace.perturbations.len()
    }

    pub fn finish(self, e: Eval, k: usize, termination: Termination) -> OptimResult {
        OptimResult {
            x: e.x,
            f: e.f,
            stationarity: e.stationarity,
            iterations: k,
            termination,
            trace: self.trace,
            iterates: self.iterates,
        }
    }
}
