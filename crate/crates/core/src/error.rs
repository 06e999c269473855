use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is numerically singular (min |eigenvalue| {min:e}, max {max:e})")]
    NearSingular { min: f64, max: f64 },

    #[error("declared signature ({declared_neg}, {declared_pos}) does not match inertia ({neg}, {pos})")]
    SignatureMismatch {
        declared_neg: usize,
        declared_pos: usize,
        neg: usize,
        pos: usize,
    },

    #[error("indefinite Gram-Schmidt hit a degenerate working set at step {step}")]
    DegeneratePivot { step: usize },

    #[error("no orthonormal frame found after {attempts} random draws")]
    FrameRetriesExhausted { attempts: usize },

    #[error("point lies on the degenerate locus of the manifold")]
    DegeneratePoint,

    #[error("hyperplane normal is null (<n,n> = {0:e}); the induced metric is degenerate")]
    DegenerateHyperplane(f64),

    #[error("vector is not tangent (residual {0:e})")]
    NotTangent(f64),

    #[error("point is not on the manifold (residual {0:e})")]
    NotOnManifold(f64),

    #[error("cost function does not provide a Hessian")]
    MissingHessian,

    #[error("no embedded geodesic exists for this direction (condition residual {0:e})")]
    GeodesicNonexistent(f64),

    #[error("group constraint violated along the curve (residual {0:e})")]
    ConstraintViolation(f64),

    #[error("matrix exponential overflowed (1-norm {0:e})")]
    ExpOverflow(f64),

    #[error("line search failed after {0} backtracks")]
    LineSearchFailed(usize),

    #[error("direction is not a descent direction (slope {0:e})")]
    NotDescent(f64),

    #[error("Newton system is singular (min |eigenvalue| {min:e}, max {max:e})")]
    SingularNewtonSystem { min: f64, max: f64 },

    #[error("no feasible stationary point found")]
    NoFeasibleRoot,

    #[error("could not move the point off the degenerate locus")]
    PerturbationFailed,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
