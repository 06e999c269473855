use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semiriem::costs::{Quadratic, SquaredDistance};
use semiriem::diagnostics::{pseudosphere_distance_reference, rayleigh_reference};
use semiriem::hypersurfaces::{EuclideanSphere, MinkowskiSpace, PseudoSphere};
use semiriem::linalg::{Matrix, Vector};
use semiriem::manifold::{FrameStrategy, Manifold};
use semiriem::optim::{self, Method, OptimizerConfig, Reference, Termination};

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    (&a + a.transpose()) * 0.5
}

#[test]
fn every_method_solves_the_minkowski_quadratic() {
    let m = MinkowskiSpace::new(1, 1);
    let a = Matrix::from_row_slice(2, 2, &[0.3649, -0.1065, -0.1065, 1.7427]);
    let f = Quadratic::new(a, None);
    let x0 = Vector::from_row_slice(&[-0.7285, 0.0230]);
    for method in [Method::SteepestDescent, Method::ConjugateGradient, Method::Newton, Method::TrustRegion] {
        for strategy in [FrameStrategy::Standard, FrameStrategy::RandomPerPoint(3)] {
            let cfg = OptimizerConfig { frame_strategy: strategy, ..Default::default() };
            let r = optim::run(method, &m, &f, &x0, &cfg).unwrap();
            assert_eq!(r.termination, Termination::Converged, "{method:?} {strategy:?}");
            assert!(r.x.amax() < 1e-7, "{method:?}");
            assert!(r.trace.is_monotone());
        }
    }
}

#[test]
fn sphere_rayleigh_converges_for_every_signature() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = random_symmetric(&mut rng, 6);
    let top = rayleigh_reference(&a).unwrap();
    for p in 0..=6 {
        let m = EuclideanSphere::new(p, 6 - p).unwrap();
        let f = Quadratic::neg_rayleigh(a.clone());
        let x0 = m.random_point(&mut rng);
        for method in [Method::SteepestDescent, Method::ConjugateGradient, Method::TrustRegion] {
            let cfg = OptimizerConfig {
                frame_strategy: FrameStrategy::RandomPerPoint(p as u64),
                reference: Some(Reference::antipodal(top.vector.clone())),
                ..Default::default()
            };
            let r = optim::run(method, &m, &f, &x0, &cfg).unwrap();
            let err = r.trace.last().unwrap().err_sq.unwrap();
            assert!(err <= 1e-6, "p={p} {method:?} err={err} iters={}", r.iterations);
        }
    }
}

#[test]
fn pseudosphere_distance_matches_the_kkt_reference() {
    let (p, q) = (3, 12);
    let m = PseudoSphere::new(p, q).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let xi = Vector::from_fn(p + q, |_, _| rng.random_range(-1.0..1.0));
    let truth = pseudosphere_distance_reference(p, q, &xi).unwrap();
    let f = SquaredDistance::new(xi);
    let x0 = m.random_point(&mut rng);
    let cfg = OptimizerConfig { reference: Some(Reference::exact(truth.clone())), ..Default::default() };
    for method in [Method::SteepestDescent, Method::ConjugateGradient, Method::TrustRegion] {
        let r = optim::run(method, &m, &f, &x0, &cfg).unwrap();
        assert!(r.converged(), "{method:?}");
        assert!(r.trace.last().unwrap().err_sq.unwrap() <= 1e-12, "{method:?}");
    }
    // Newton is only locally convergent: start it near the solution
    let near = m.retract(&truth, &m.random_tangent(&truth, &mut rng).unwrap(), 1e-2).unwrap();
    let r = optim::run(Method::Newton, &m, &f, &near, &cfg).unwrap();
    assert!(r.converged());
    assert!(r.trace.last().unwrap().err_sq.unwrap() <= 1e-20);
    assert!(r.iterations <= 10);
}

#[test]
fn newton_rejects_non_descent_directions_unless_fallback_is_enabled() {
    let m = MinkowskiSpace::new(0, 2);
    // saddle: the Newton step from (1, 1) points uphill
    let f = Quadratic::new(Matrix::from_diagonal(&Vector::from_row_slice(&[1.0, -0.5])), Some(Vector::from_row_slice(&[0.0, 3.0])));
    let x0 = Vector::from_row_slice(&[1.0, 1.0]);
    let cfg = OptimizerConfig { max_iters: 5, ..Default::default() };
    assert!(matches!(optim::newton(&m, &f, &x0, &cfg), Err(semiriem::Error::NotDescent(_))));
    let mut fallback = cfg.clone();
    fallback.newton.fallback_to_gradient = true;
    let r = optim::newton(&m, &f, &x0, &fallback).unwrap();
    assert!(r.trace.is_monotone());
}
