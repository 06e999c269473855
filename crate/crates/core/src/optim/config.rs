//! Optimizer hyperparameters.

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::manifold::FrameStrategy;

/// Backtracking Armijo parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchConfig {
    /// Sufficient-decrease constant, in `(0, 1)`.
    pub c: f64,
    /// Backtracking factor, in `(0, 1)`.
    pub shrink: f64,
    /// First trial step.
    pub t0: f64,
    pub max_backtracks: usize,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        Self { c: 1e-4, shrink: 0.5, t0: 1.0, max_backtracks: 50 }
    }
}

impl LineSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(Error::InvalidConfig(format!("armijo c = {} not in (0,1)", self.c)));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidConfig(format!("shrink = {} not in (0,1)", self.shrink)));
        }
        if !(self.t0 > 0.0) {
            return Err(Error::InvalidConfig(format!("t0 = {} not positive", self.t0)));
        }
        Ok(())
    }
}

/// Radius management and inner-solver settings for the trust-region method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustRegionConfig {
    pub initial_radius: f64,
    /// Defaults to ten times the initial radius.
    pub max_radius: Option<f64>,
    /// Steps with `ρ` below this are rejected.
    pub accept_ratio: f64,
    pub shrink_below: f64,
    pub shrink_factor: f64,
    pub expand_above: f64,
    pub expand_factor: f64,
    /// Inner truncated-CG stops once `||r|| <= ||r0|| min(||r0||^theta, kappa)`.
    pub kappa: f64,
    pub theta: f64,
    /// Defaults to the tangent-space dimension.
    pub max_inner: Option<usize>,
}

impl Default for TrustRegionConfig {
    fn default() -> Self {
        Self {
            initial_radius: 1.0,
            max_radius: None,
            accept_ratio: 0.1,
            shrink_below: 0.25,
            shrink_factor: 0.25,
            expand_above: 0.75,
            expand_factor: 2.0,
            kappa: 0.1,
            theta: 1.0,
            max_inner: None,
        }
    }
}

impl TrustRegionConfig {
    pub fn radius_cap(&self) -> f64 {
        self.max_radius.unwrap_or(10.0 * self.initial_radius)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.initial_radius > 0.0) || self.radius_cap() < self.initial_radius {
            return Err(Error::InvalidConfig("trust-region radii must satisfy 0 < initial <= max".into()));
        }
        if !(self.accept_ratio > 0.0 && self.accept_ratio < 0.25) {
            return Err(Error::InvalidConfig(format!("accept_ratio = {} not in (0,1/4)", self.accept_ratio)));
        }
        if !(self.shrink_factor > 0.0 && self.shrink_factor < 1.0 && self.expand_factor > 1.0) {
            return Err(Error::InvalidConfig("radius factors must satisfy shrink < 1 < expand".into()));
        }
        if !(self.kappa > 0.0 && self.theta > 0.0) {
            return Err(Error::InvalidConfig("inner tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// What to do with a singular or near-singular frame-coordinate Hessian.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum HessianRegularization {
    #[default]
    Off,
    /// Eigenvalues with `|λ|` below the floor are replaced by `±floor`.
    Floor(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    pub regularization: HessianRegularization,
    /// Use `-[Df]^+` when the Newton direction is unusable.
    pub fallback_to_gradient: bool,
    /// Relative eigenvalue threshold `min|λ| <= tol max|λ|` for singularity.
    pub singular_tol: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self { regularization: HessianRegularization::Off, fallback_to_gradient: false, singular_tol: 1e-12 }
    }
}

/// How iterates are moved along a tangent direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RetractionKind {
    /// The manifold's own retraction.
    #[default]
    Manifold,
    /// The closed-form geodesic where the manifold has one, else the retraction.
    Geodesic,
}

/// How CG moves the previous direction into the new tangent space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransportKind {
    /// The manifold's transport (parallel transport where closed forms exist).
    #[default]
    Manifold,
    /// Orthogonal projection onto the new tangent space.
    Projection,
}

/// Reference solution used to fill the `err_sq` trace column.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub point: Vector,
    /// Measure `min(||x - r||², ||x + r||²)`, for problems symmetric under `x -> -x`.
    pub antipodal: bool,
}

impl Reference {
    pub fn exact(point: Vector) -> Self {
        Self { point, antipodal: false }
    }

    pub fn antipodal(point: Vector) -> Self {
        Self { point, antipodal: true }
    }

    pub fn err_sq(&self, x: &Vector) -> f64 {
        let d = (x - &self.point).norm_squared();
        if self.antipodal {
            d.min((x + &self.point).norm_squared())
        } else {
            d
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    /// Convergence threshold on `sqrt(<Df, [Df]^+>)`.
    pub grad_tol: f64,
    pub frame_strategy: FrameStrategy,
    pub retraction: RetractionKind,
    pub transport: TransportKind,
    pub line_search: LineSearchConfig,
    pub trust_region: TrustRegionConfig,
    pub newton: NewtonConfig,
    /// CG restarts every this many iterations; defaults to the manifold dimension.
    pub cg_restart_every: Option<usize>,
    pub beta_cap: f64,
    pub reference: Option<Reference>,
    /// Seed for perturbations off a degenerate locus.
    pub perturbation_seed: u64,
    /// Keep every iterate in the result.
    pub keep_iterates: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            grad_tol: 1e-8,
            frame_strategy: FrameStrategy::Standard,
            retraction: RetractionKind::Manifold,
            transport: TransportKind::Manifold,
            line_search: LineSearchConfig::default(),
            trust_region: TrustRegionConfig::default(),
            newton: NewtonConfig::default(),
            cg_restart_every: None,
            beta_cap: 1e3,
            reference: None,
            perturbation_seed: 0,
            keep_iterates: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidConfig(format!("grad_tol = {} not positive", self.grad_tol)));
        }
        if !(self.beta_cap > 0.0) {
            return Err(Error::InvalidConfig(format!("beta_cap = {} not positive", self.beta_cap)));
        }
        if self.cg_restart_every == Some(0) {
            return Err(Error::InvalidConfig("cg_restart_every must be positive".into()));
        }
        self.line_search.validate()?;
        self.trust_region.validate()
    }
}
