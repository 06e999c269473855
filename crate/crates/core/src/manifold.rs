//! The capability set shared by every embedded semi-Riemannian manifold, and
//! the adapters that turn ambient Euclidean derivatives into semi-Riemannian
//! ones.
//!
//! Points and tangent vectors are plain ambient-coordinate vectors. Each
//! manifold embeds in an ambient space with scalar product [`Manifold::ambient`];
//! tangent spaces inherit that product.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::indefinite::{self, Frame, ScalarProduct, Signature, DEFAULT_NULL_TOL};
use crate::linalg::Vector;

/// Tolerance for the defining constraint of a point.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Tolerance for the linear tangency constraint.
pub const TANGENCY_TOL: f64 = 1e-9;

pub trait Manifold: Send + Sync {
    /// Short identifier used in traces and error messages.
    fn name(&self) -> String;

    /// The ambient scalar product.
    fn ambient(&self) -> &ScalarProduct;

    fn ambient_dim(&self) -> usize {
        self.ambient().dim()
    }

    fn intrinsic_dim(&self) -> usize;

    /// Signature of the metric restricted to `T_x M`.
    fn signature_at(&self, x: &Vector) -> Result<Signature>;

    /// Absolute violation of the defining equation at `x`.
    fn constraint_residual(&self, x: &Vector) -> f64;

    /// Absolute violation of the tangency condition for `v` at `x`.
    fn tangent_residual(&self, x: &Vector, v: &Vector) -> f64;

    /// The metric-orthogonal projection of an ambient vector onto `T_x M`.
    fn tangent_project(&self, x: &Vector, v: &Vector) -> Result<Vector>;

    /// The scalar product on `T_x M`.
    fn metric(&self, _x: &Vector, u: &Vector, v: &Vector) -> f64 {
        self.ambient().dot_unchecked(u, v)
    }

    /// A canonical orthonormal tangent frame, where one exists independent of
    /// any projection.
    fn standard_frame(&self, _x: &Vector) -> Option<Frame> {
        None
    }

    /// `R_x(t v)`.
    fn retract(&self, x: &Vector, v: &Vector, t: f64) -> Result<Vector>;

    /// Move `payload` from `T_x M` to the tangent space at `retract(x, along, t)`.
    fn transport(&self, x: &Vector, along: &Vector, t: f64, payload: &Vector) -> Result<Vector>;

    fn degenerate_at(&self, _x: &Vector) -> bool {
        false
    }

    /// Curvature term added to `P_x(G^{-1} ∇²f v)` to obtain the Levi-Civita
    /// Hessian. `egrad` is the ambient Euclidean gradient at `x`.
    fn hessian_correction(&self, x: &Vector, egrad: &Vector, v: &Vector) -> Result<Vector>;

    /// The closed-form embedded geodesic, when one is known.
    fn geodesic(&self, _x: &Vector, _v: &Vector, _t: f64) -> Option<Result<Vector>> {
        None
    }

    /// Move `x` off the degenerate locus. Identity on non-degenerate points.
    fn perturb(&self, x: &Vector, _seed: u64) -> Result<Vector> {
        Ok(x.clone())
    }

    /// A feasible point drawn from `rng`.
    fn random_point(&self, rng: &mut ChaCha8Rng) -> Vector;

    /// A tangent vector at `x` drawn from `rng`.
    fn random_tangent(&self, x: &Vector, rng: &mut ChaCha8Rng) -> Result<Vector> {
        let v = indefinite::random_vectors(rng, 1, self.ambient_dim()).remove(0);
        self.tangent_project(x, &v)
    }
}

/// A smooth objective on the ambient space.
pub trait CostFunction: Send + Sync {
    fn value(&self, x: &Vector) -> f64;

    fn euclidean_gradient(&self, x: &Vector) -> Vector;

    /// `∇²f(x) v`, if available.
    fn euclidean_hessian(&self, _x: &Vector, _v: &Vector) -> Option<Vector> {
        None
    }

    fn has_hessian(&self) -> bool {
        false
    }
}

/// How tangent frames are chosen during an optimization run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrameStrategy {
    /// The manifold's canonical frame, or the canonical ambient basis projected
    /// into the tangent space and orthonormalized.
    #[default]
    Standard,
    /// A fresh random draw at every request.
    RandomPerPoint(u64),
    /// One set of ambient random draws reused at every point of the run.
    RandomPerRun(u64),
}


/// Stateful frame source for one optimization run.
#[derive(Debug, Clone)]
pub struct FrameProvider {
    strategy: FrameStrategy,
    requests: u64,
}

impl FrameProvider {
    pub fn new(strategy: FrameStrategy) -> Self {
        Self { strategy, requests: 0 }
    }

    pub fn strategy(&self) -> FrameStrategy {
        self.strategy
    }

    pub fn frame(&mut self, m: &dyn Manifold, x: &Vector) -> Result<Frame> {
        let counter = self.requests;
        self.requests += 1;
        tangent_frame(m, x, self.strategy, counter)
    }
}

fn canonical_basis(n: usize) -> Vec<Vector> {
    (0..n).map(|i| Vector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 })).collect()
}

/// Orthonormalize the projections of `candidates` into `T_x M`.
pub fn frame_from_candidates(m: &dyn Manifold, x: &Vector, candidates: &[Vector]) -> Result<Frame> {
    let projected = candidates.iter().map(|c| m.tangent_project(x, c)).collect::<Result<Vec<_>>>()?;
    indefinite::pivoted_gram_schmidt(&projected, m.ambient(), m.intrinsic_dim(), DEFAULT_NULL_TOL)
}

/// A tangent frame at `x`. `counter` distinguishes repeated requests under
/// [`FrameStrategy::RandomPerPoint`].
pub fn tangent_frame(m: &dyn Manifold, x: &Vector, strategy: FrameStrategy, counter: u64) -> Result<Frame> {
    if m.degenerate_at(x) {
        return Err(Error::DegeneratePoint);
    }
    let n = m.ambient_dim();
    match strategy {
        FrameStrategy::Standard => match m.standard_frame(x) {
            Some(f) => Ok(f),
            None => frame_from_candidates(m, x, &canonical_basis(n)),
        },
        FrameStrategy::RandomPerPoint(seed) | FrameStrategy::RandomPerRun(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            if let FrameStrategy::RandomPerPoint(_) = strategy {
                rng.set_stream(counter);
            }
            for _ in 0..indefinite::FIND_BASIS_ATTEMPTS {
                let draws = indefinite::random_vectors(&mut rng, n, n);
                match frame_from_candidates(m, x, &draws) {
                    Ok(f) => return Ok(f),
                    Err(Error::DegeneratePivot { .. }) => continue,
                    Err(e) => return Err(e),
                }
            }
            Err(Error::FrameRetriesExhausted { attempts: indefinite::FIND_BASIS_ATTEMPTS })
        }
    }
}

/// `Df = P_x(G^{-1} ∇f)`.
pub fn semi_gradient(m: &dyn Manifold, f: &dyn CostFunction, x: &Vector) -> Result<Vector> {
    if m.degenerate_at(x) {
        return Err(Error::DegeneratePoint);
    }
    let g = f.euclidean_gradient(x);
    m.tangent_project(x, &m.ambient().raise(&g))
}

/// `[D²f(x)](v)` for tangent `v`.
pub fn semi_hessian_apply(m: &dyn Manifold, f: &dyn CostFunction, x: &Vector, v: &Vector) -> Result<Vector> {
    if m.degenerate_at(x) {
        return Err(Error::DegeneratePoint);
    }
    let hv = f.euclidean_hessian(x, v).ok_or(Error::MissingHessian)?;
    let g = f.euclidean_gradient(x);
    let base = m.tangent_project(x, &m.ambient().raise(&hv))?;
    Ok(base + m.hessian_correction(x, &g, v)?)
}

/// `-[Df]^+` for a given semi-gradient and frame.
pub fn flip_descent(df: &Vector, frame: &Frame, g: &ScalarProduct) -> Vector {
    -indefinite::plus_map(df, frame, g)
}

/// Gradient and descent direction `η = -[Df(x)]^+` at `x`.
pub fn descent_direction(
    m: &dyn Manifold,
    f: &dyn CostFunction,
    x: &Vector,
    frame: &Frame,
) -> Result<(Vector, Vector)> {
    let df = semi_gradient(m, f, x)?;
    let eta = flip_descent(&df, frame, m.ambient());
    Ok((df, eta))
}

/// `sqrt(<Df, [Df]^+>)` on `frame`.
pub fn stationarity_of(df: &Vector, frame: &Frame, g: &ScalarProduct) -> f64 {
    indefinite::induced_inner(df, df, frame, g).max(0.0).sqrt()
}

pub fn stationarity_measure(m: &dyn Manifold, f: &dyn CostFunction, x: &Vector, frame: &Frame) -> Result<f64> {
    let df = semi_gradient(m, f, x)?;
    Ok(stationarity_of(&df, frame, m.ambient()))
}

/// Frame-coordinate Hessian `M_ij = <e_i, D²f(e_j)>`, symmetrized.
pub fn frame_hessian(
    m: &dyn Manifold,
    f: &dyn CostFunction,
    x: &Vector,
    frame: &Frame,
) -> Result<crate::linalg::Matrix> {
    let k = frame.len();
    let cols = frame
        .basis
        .iter()
        .map(|e| semi_hessian_apply(m, f, x, e))
        .collect::<Result<Vec<_>>>()?;
    let mut h = crate::linalg::Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            h[(i, j)] = m.metric(x, &frame.basis[i], &cols[j]);
        }
    }
    Ok((&h + h.transpose()) * 0.5)
}
