use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use semiriem::costs::{CosineRidge, Quadratic};
use semiriem::hypersurfaces::{self, GeodesicCase, PseudoHyperbolic, PseudoSphere};
use semiriem::indefinite::{self, find_on_basis, ScalarProduct, DEFAULT_NULL_TOL};
use semiriem::linalg::{self, Matrix, Vector};
use semiriem::manifold::{self, FrameStrategy, Manifold};
use semiriem::optim::{self, TrustRegionConfig};

fn signature() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=8).prop_flat_map(|n| (0..=n).prop_map(move |p| (p, n - p)))
}

fn vector(n: usize) -> impl Strategy<Value = Vector> {
    proptest::collection::vec(-2.0f64..2.0, n).prop_map(Vector::from_vec)
}

fn sig_and_vector() -> impl Strategy<Value = ((usize, usize), Vector, u64)> {
    signature().prop_flat_map(|(p, q)| (Just((p, q)), vector(p + q), any::<u64>()))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn random_frames_are_orthonormal(((p, q), _x, seed) in sig_and_vector()) {
        let g = ScalarProduct::minkowski(p, q);
        let f = find_on_basis(&g, seed).unwrap();
        prop_assert!(f.orthonormality_residual(&g) <= 1e-10);
        prop_assert_eq!(f.signature(), g.signature());
    }

    #[test]
    fn plus_map_is_coercive_and_an_involution(((p, q), x, seed) in sig_and_vector()) {
        let g = ScalarProduct::minkowski(p, q);
        let f = find_on_basis(&g, seed).unwrap();
        let plus = indefinite::plus_map(&x, &f, &g);
        let norm = indefinite::induced_inner(&x, &x, &f, &g);
        prop_assert!(norm >= 0.0);
        prop_assert!((g.dot(&x, &plus).unwrap() - norm).abs() <= 1e-10 * (1.0 + norm));
        let twice = indefinite::plus_map(&plus, &f, &g);
        prop_assert!((twice - &x).amax() <= 1e-10 * (1.0 + x.amax()));
    }

    #[test]
    fn flipped_gradient_is_a_descent_direction(((p, q), x, seed) in sig_and_vector()) {
        let n = p + q;
        let m = hypersurfaces::MinkowskiSpace::new(p, q);
        let a = Matrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) as f64 + seed as f64 * 1e-19).sin());
        let f = Quadratic::new(a, None);
        let frame = manifold::tangent_frame(&m, &x, FrameStrategy::RandomPerPoint(seed), 0).unwrap();
        let (df, eta) = manifold::descent_direction(&m, &f, &x, &frame).unwrap();
        let slope = m.metric(&x, &df, &eta);
        prop_assert!(slope <= 1e-14);
        prop_assert!((slope + manifold::stationarity_of(&df, &frame, m.ambient()).powi(2)).abs() <= 1e-9 * (1.0 + slope.abs()));
    }

    #[test]
    fn congruence_factor_reaches_the_signature(((p, q), _x, seed) in sig_and_vector()) {
        let n = p + q;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let basis = indefinite::random_vectors(&mut rng, n, n);
        let b = Matrix::from_columns(&basis);
        prop_assume!(b.clone().svd(false, false).singular_values.min() > 1e-3);
        let h = b.transpose() * linalg::minkowski_matrix(p, q) * &b;
        let (u, sig) = indefinite::congruence_factor(&h, 1e-12).unwrap();
        prop_assert_eq!((sig.neg, sig.pos), (p, q));
        let resid = (u.transpose() * &h * &u - linalg::minkowski_matrix(p, q)).amax();
        prop_assert!(resid <= 1e-10 * (1.0 + h.amax()));
    }

    #[test]
    fn pseudosphere_geodesics_stay_on_the_quadric(((p, q), _x, seed) in sig_and_vector(), t in -1.5f64..1.5) {
        prop_assume!(q >= 1 && p + q >= 2);
        let m = PseudoSphere::new(p, q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = m.random_point(&mut rng);
        for case in [GeodesicCase::Spacelike, GeodesicCase::Timelike, GeodesicCase::Null] {
            let Ok(v) = hypersurfaces::random_tangent_of_case(&m, &x, case, &mut rng) else { continue };
            let w = m.random_tangent(&x, &mut rng).unwrap();
            let y = m.geodesic_closed_form(&x, &v, t).unwrap();
            prop_assert!(m.constraint_residual(&y) <= 1e-9);
            let dv = m.transport_closed_form(&x, &v, &v, t).unwrap();
            let dw = m.transport_closed_form(&x, &v, &w, t).unwrap();
            let g = m.ambient();
            prop_assert!((g.dot(&dv, &dw).unwrap() - g.dot(&v, &w).unwrap()).abs() <= 1e-8 * (1.0 + v.norm() * w.norm()));
            prop_assert!(m.tangent_residual(&y, &dw) <= 1e-9);
        }
    }

    #[test]
    fn hyperbolic_direct_and_mirrored_paths_agree(((p, q), _x, seed) in sig_and_vector(), t in -1.0f64..1.0) {
        prop_assume!(p >= 1 && p + q >= 2);
        let m = PseudoHyperbolic::new(p, q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = m.random_point(&mut rng);
        let v = m.random_tangent(&x, &mut rng).unwrap();
        let w = m.random_tangent(&x, &mut rng).unwrap();
        let scale = 1.0 + x.norm() * (1.0 + v.norm()).powi(2) * (t.abs() + 1.0).exp();
        let a = m.geodesic_closed_form(&x, &v, t).unwrap();
        let b = m.geodesic_via_anti_isometry(&x, &v, t).unwrap();
        prop_assert!((a - b).amax() <= 1e-10 * scale);
        let a = m.transport_closed_form(&x, &v, &w, t).unwrap();
        let b = m.transport_via_anti_isometry(&x, &v, &w, t).unwrap();
        prop_assert!((a - b).amax() <= 1e-10 * scale * (1.0 + w.norm()));
    }

    #[test]
    fn newton_direction_ignores_the_metric(x in vector(5), seed in any::<u64>()) {
        let n = 5;
        let a = Matrix::from_fn(n, n, |i, j| if i == j { 3.0 } else { 0.3 * ((i + 2 * j) as f64).cos() });
        let w = Vector::from_fn(n, |i, _| 0.5 + 0.1 * i as f64);
        let f = CosineRidge::new(a, Vector::from_element(n, 0.2), vec![(0.4, w)]);
        let mut dirs = Vec::new();
        for p in 0..=n {
            let m = hypersurfaces::MinkowskiSpace::new(p, n - p);
            let frame = manifold::tangent_frame(&m, &x, FrameStrategy::RandomPerPoint(seed), 0).unwrap();
            let df = manifold::semi_gradient(&m, &f, &x).unwrap();
            dirs.push(optim::newton_direction(&m, &f, &x, &df, &frame, &Default::default()).unwrap());
        }
        for d in &dirs[1..] {
            prop_assert!((d - &dirs[0]).amax() <= 1e-10 * (1.0 + dirs[0].amax()));
        }
    }

    #[test]
    fn trust_region_models_coincide(((p, q), x, seed) in sig_and_vector(), f0 in -5.0f64..5.0) {
        let n = p + q;
        let g = ScalarProduct::minkowski(p, q);
        let frame = find_on_basis(&g, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let vs = indefinite::random_vectors(&mut rng, 3, n);
        let (df, eta, heta) = (&vs[0], &vs[1], &vs[2]);
        let eta = eta + &x * 0.1;
        let semi = optim::semi_model(&g, f0, df, &eta, heta);
        let riem = optim::riemannian_model(&g, &frame, f0, df, &eta, heta);
        let scale = 1.0 + f0.abs() + df.norm() * eta.norm() + heta.norm() * eta.norm();
        prop_assert!((semi - riem).abs() <= 1e-12 * scale * (1.0 + frame.basis.iter().map(|e| e.norm_squared()).fold(0.0, f64::max)));
    }

    #[test]
    fn truncated_cg_stays_inside_the_region(seed in any::<u64>(), radius in 1e-3f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vs = indefinite::random_vectors(&mut rng, 5, 4);
        let h = Matrix::from_columns(&vs[..4]);
        let h = &h + h.transpose();
        let out = optim::truncated_cg(&h, &vs[4], radius, 0.1, 1.0, 20);
        prop_assert!(out.coords.norm() <= radius * (1.0 + 1e-12));
        // the model never increases
        prop_assert!(vs[4].dot(&out.coords) + 0.5 * out.coords.dot(&(&h * &out.coords)) <= 1e-14);
    }
}

#[test]
fn trust_region_step_with_huge_radius_is_newton() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for p in 0..=4 {
        let m = hypersurfaces::MinkowskiSpace::new(p, 4 - p);
        let b = Matrix::from_columns(&indefinite::random_vectors(&mut rng, 4, 4));
        let a = b.transpose() * &b + Matrix::identity(4, 4);
        let f = Quadratic::new(a, Some(Vector::from_row_slice(&[1.0, -1.0, 0.5, 2.0])));
        let x = Vector::from_row_slice(&[0.3, 0.1, -0.7, 0.2]);
        let frame = manifold::tangent_frame(&m, &x, FrameStrategy::RandomPerPoint(p as u64), 0).unwrap();
        let df = manifold::semi_gradient(&m, &f, &x).unwrap();
        let newton = optim::newton_direction(&m, &f, &x, &df, &frame, &Default::default()).unwrap();
        let cfg = TrustRegionConfig { kappa: 1e-14, max_inner: Some(40), ..Default::default() };
        let (step, out) = optim::trust_region_step(&m, &f, &x, &frame, 1e12, &cfg).unwrap();
        assert!(!out.hit_boundary);
        assert!((step - &newton).amax() <= 1e-8 * (1.0 + newton.amax()));
    }
    let _ = DEFAULT_NULL_TOL;
}
