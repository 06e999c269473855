//! The three benchmark problems and their deterministic instances.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use semiriem::costs::{Quadratic, SquaredDistance};
use semiriem::diagnostics;
use semiriem::hypersurfaces::{EuclideanSphere, MinkowskiSpace, PseudoSphere};
use semiriem::linalg::{Matrix, Vector};
use semiriem::manifold::{CostFunction, FrameStrategy, Manifold};
use semiriem::optim::{self, Method, OptimizerConfig, Reference, RetractionKind, TransportKind};

use crate::error::{BenchError, BenchResult};
use crate::trace::TraceFile;

/// Quadratic on `R^{1,1}` used when `p = q = 1`.
pub const MINKOWSKI_A: [f64; 4] = [0.3649, -0.1065, -0.1065, 1.7427];
pub const MINKOWSKI_X0: [f64; 2] = [-0.7285, 0.0230];
/// Minimum gap between the two largest eigenvalues of a Rayleigh instance.
pub const RAYLEIGH_GAP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    MinkowskiQuadratic,
    SphereRayleigh,
    PseudosphereDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerId {
    #[default]
    Sd,
    Cg,
    Newton,
    Tr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameChoice {
    #[default]
    Standard,
    PerPoint,
    PerRun,
}

macro_rules! kebab_enum {
    ($ty:ty { $($variant:ident => $name:literal),* $(,)? }) => {
        impl $ty {
            pub const ALL: &'static [$ty] = &[$(<$ty>::$variant),*];
            pub fn as_str(&self) -> &'static str {
                match self { $(<$ty>::$variant => $name),* }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($name => Ok(<$ty>::$variant),)*
                    _ => Err(format!("unknown value {s:?}; expected one of {}", [$($name),*].join(", "))),
                }
            }
        }
    };
}

kebab_enum!(ExperimentId {
    MinkowskiQuadratic => "minkowski-quadratic",
    SphereRayleigh => "sphere-rayleigh",
    PseudosphereDistance => "pseudosphere-distance",
});
kebab_enum!(OptimizerId { Sd => "sd", Cg => "cg", Newton => "newton", Tr => "tr" });
kebab_enum!(FrameChoice { Standard => "standard", PerPoint => "per-point", PerRun => "per-run" });

impl OptimizerId {
    pub fn method(&self) -> Method {
        match self {
            OptimizerId::Sd => Method::SteepestDescent,
            OptimizerId::Cg => Method::ConjugateGradient,
            OptimizerId::Newton => Method::Newton,
            OptimizerId::Tr => Method::TrustRegion,
        }
    }
}

/// Optional overrides of the optimizer defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub armijo_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shrink: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_backtracks: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cg_restart_every: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geodesic_steps: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection_transport: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newton_fallback: Option<bool>,
}

/// One benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentSpec {
    pub experiment: ExperimentId,
    pub p: usize,
    pub q: usize,
    /// Seeds the problem instance and the start point.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub optimizer: OptimizerId,
    #[serde(default)]
    pub frames: FrameChoice,
    /// Seeds random frames; defaults to `seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_seed: Option<u64>,
    #[serde(default)]
    pub config: Overrides,
    /// Output stem: `<out>.json` and `<out>.csv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(experiment: ExperimentId, p: usize, q: usize) -> Self {
        Self {
            experiment,
            p,
            q,
            seed: 0,
            optimizer: OptimizerId::Sd,
            frames: FrameChoice::Standard,
            frame_seed: None,
            config: Overrides::default(),
            out: None,
        }
    }

    pub fn validate(&self) -> BenchResult<()> {
        let n = self.p + self.q;
        let fail = |msg: String| Err(BenchError::Usage(msg));
        match self.experiment {
            ExperimentId::MinkowskiQuadratic if n == 0 => fail("minkowski-quadratic needs p + q >= 1".into()),
            ExperimentId::SphereRayleigh if n < 2 => fail("sphere-rayleigh needs p + q >= 2".into()),
            ExperimentId::PseudosphereDistance if self.q == 0 || n < 2 => {
                fail("pseudosphere-distance needs q >= 1 and p + q >= 2".into())
            }
            _ => Ok(()),
        }?;
        if let Some(0) = self.config.max_iters {
            return fail("max-iters must be positive".into());
        }
        self.optimizer_config(None).validate()?;
        Ok(())
    }

    /// Default file stem inside a suite directory.
    pub fn default_stem(&self) -> String {
        format!(
            "{}_p{}_q{}_{}_{}_s{}{}",
            self.experiment,
            self.p,
            self.q,
            self.optimizer,
            self.frames,
            self.seed,
            self.frame_seed.map(|s| format!("_f{s}")).unwrap_or_default()
        )
    }

    pub fn frame_strategy(&self) -> FrameStrategy {
        let seed = self.frame_seed.unwrap_or(self.seed);
        match self.frames {
            FrameChoice::Standard => FrameStrategy::Standard,
            FrameChoice::PerPoint => FrameStrategy::RandomPerPoint(seed),
            FrameChoice::PerRun => FrameStrategy::RandomPerRun(seed),
        }
    }

    pub fn optimizer_config(&self, reference: Option<Reference>) -> OptimizerConfig {
        let o = &self.config;
        let mut cfg = OptimizerConfig { frame_strategy: self.frame_strategy(), reference, ..Default::default() };
        cfg.perturbation_seed = self.seed;
        if let Some(v) = o.max_iters {
            cfg.max_iters = v;
        }
        if let Some(v) = o.grad_tol {
            cfg.grad_tol = v;
        }
        if let Some(v) = o.armijo_c {
            cfg.line_search.c = v;
        }
        if let Some(v) = o.shrink {
            cfg.line_search.shrink = v;
        }
        if let Some(v) = o.initial_step {
            cfg.line_search.t0 = v;
        }
        if let Some(v) = o.max_backtracks {
            cfg.line_search.max_backtracks = v;
        }
        if let Some(v) = o.beta_cap {
            cfg.beta_cap = v;
        }
        if o.cg_restart_every.is_some() {
            cfg.cg_restart_every = o.cg_restart_every;
        }
        if let Some(v) = o.initial_radius {
            cfg.trust_region.initial_radius = v;
        }
        if o.geodesic_steps == Some(true) {
            cfg.retraction = RetractionKind::Geodesic;
        }
        if o.projection_transport == Some(true) {
            cfg.transport = TransportKind::Projection;
        }
        if let Some(v) = o.newton_fallback {
            cfg.newton.fallback_to_gradient = v;
        }
        cfg
    }
}

/// A concrete problem: manifold, cost, start point and known solution.
pub struct Problem {
    pub manifold: Box<dyn Manifold>,
    pub cost: Box<dyn CostFunction>,
    pub x0: Vector,
    pub reference: Option<Reference>,
}

fn uniform(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

/// Random symmetric `n×n` matrix whose two largest eigenvalues differ by at
/// least [`RAYLEIGH_GAP`].
pub fn gapped_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    loop {
        let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let a = (&a + a.transpose()) * 0.5;
        if diagnostics::rayleigh_reference(&a).map(|r| r.gap >= RAYLEIGH_GAP).unwrap_or(false) {
            return a;
        }
    }
}

fn unit(v: Vector) -> Vector {
    let n = v.norm();
    v / n
}

impl Problem {
    pub fn build(spec: &ExperimentSpec) -> BenchResult<Self> {
        spec.validate()?;
        let (p, q) = (spec.p, spec.q);
        let n = p + q;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        Ok(match spec.experiment {
            ExperimentId::MinkowskiQuadratic => {
                let (a, x0) = if (p, q) == (1, 1) {
                    (Matrix::from_row_slice(2, 2, &MINKOWSKI_A), Vector::from_row_slice(&MINKOWSKI_X0))
                } else {
                    let b = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
                    (b.transpose() * &b / n as f64 + Matrix::identity(n, n) * 0.5, uniform(&mut rng, n))
                };
                Problem {
                    manifold: Box::new(MinkowskiSpace::new(p, q)),
                    cost: Box::new(Quadratic::new(a, None)),
                    x0,
                    reference: Some(Reference::exact(Vector::zeros(n))),
                }
            }
            ExperimentId::SphereRayleigh => {
                let a = gapped_symmetric(&mut rng, n);
                let top = diagnostics::rayleigh_reference(&a)?;
                // the start point depends on the seed only, so every signature starts alike
                let x0 = unit(uniform(&mut rng, n));
                Problem {
                    manifold: Box::new(EuclideanSphere::new(p, q)?),
                    cost: Box::new(Quadratic::neg_rayleigh(a)),
                    x0,
                    reference: Some(Reference::antipodal(top.vector)),
                }
            }
            ExperimentId::PseudosphereDistance => {
                let m = PseudoSphere::new(p, q)?;
                let xi = uniform(&mut rng, n);
                let truth = diagnostics::pseudosphere_distance_reference(p, q, &xi)?;
                let x0 = m.random_point(&mut rng);
                Problem {
                    manifold: Box::new(m),
                    cost: Box::new(SquaredDistance::new(xi)),
                    x0,
                    reference: Some(Reference::exact(truth)),
                }
            }
        })
    }
}

/// Runs `spec` and packages the trace.
pub fn run_experiment(spec: &ExperimentSpec) -> BenchResult<TraceFile> {
    let problem = Problem::build(spec)?;
    let cfg = spec.optimizer_config(problem.reference.clone());
    let start = Instant::now();
    let result = optim::run(spec.optimizer.method(), problem.manifold.as_ref(), problem.cost.as_ref(), &problem.x0, &cfg)?;
    Ok(TraceFile::from_result(spec, &result, problem.reference.as_ref(), start.elapsed().as_secs_f64()))
}
