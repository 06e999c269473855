//! The diagnostics property suite behind the `check` subcommand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semiriem::costs::{CosineRidge, Quadratic, SquaredDistance};
use semiriem::diagnostics::{self, CURVE_FD_STEP, SIMPSON_MAX_DEPTH, SIMPSON_TOL};
use semiriem::hypersurfaces::{
    self, EuclideanSphere, GeodesicCase, Hyperplane, MinkowskiSpace, PseudoHyperbolic, PseudoSphere,
};
use semiriem::indefinite::{self, ScalarProduct};
use semiriem::lie::{self, GroupTag, PartitionedSkew, Sl2Element};
use semiriem::linalg::{self, Matrix, Vector};
use semiriem::manifold::{tangent_frame, CostFunction, FrameStrategy, Manifold};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
}

impl CheckLine {
    fn new(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold }
    }

    pub fn passed(&self) -> bool {
        self.value <= self.threshold
    }

    pub fn render(&self) -> String {
        format!(
            "{} {:<48} {:.3e} (<= {:.0e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.threshold
        )
    }
}

pub fn manifolds() -> Vec<Box<dyn Manifold>> {
    vec![
        Box::new(MinkowskiSpace::new(1, 3)),
        Box::new(Hyperplane::new(1, 3, Vector::from_row_slice(&[0.2, 1.0, -0.5, 0.3]), 0.7).expect("spacelike normal")),
        Box::new(EuclideanSphere::new(2, 2).expect("valid signature")),
        Box::new(PseudoSphere::new(1, 3).expect("valid signature")),
        Box::new(PseudoHyperbolic::new(2, 2).expect("valid signature")),
    ]
}

pub fn costs(n: usize, rng: &mut ChaCha8Rng) -> Vec<(String, Box<dyn CostFunction>)> {
    let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let a = (&a + a.transpose()) * 0.5;
    let xi = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    let w = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    vec![
        ("quadratic".into(), Box::new(Quadratic::new(a.clone(), Some(xi.clone())))),
        ("neg-rayleigh".into(), Box::new(Quadratic::neg_rayleigh(a.clone()))),
        ("squared-distance".into(), Box::new(SquaredDistance::new(xi.clone()))),
        ("cosine-ridge".into(), Box::new(CosineRidge::new(a, xi, vec![(0.5, w)]))),
    ]
}

fn samples(rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    (0..count).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Runs every check with `instances` random draws each.
pub fn run_checks(instances: usize, seed: u64) -> Vec<CheckLine> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for m in manifolds() {
        let n = m.ambient_dim();
        let (mut grad, mut hess, mut sym) = (0.0_f64, 0.0_f64, 0.0_f64);
        for _ in 0..instances {
            let x = m.random_point(&mut rng);
            let Ok(frame) = tangent_frame(m.as_ref(), &x, FrameStrategy::Standard, 0) else { continue };
            for (_, f) in costs(n, &mut rng) {
                let f = f.as_ref();
                grad = grad.max(diagnostics::fd_gradient_check(m.as_ref(), f, &x, &frame.basis, None).unwrap_or(f64::INFINITY));
                hess = hess.max(diagnostics::fd_hessian_check(m.as_ref(), f, &x, &frame.basis, None).unwrap_or(f64::INFINITY));
                sym = sym.max(diagnostics::hessian_symmetry(m.as_ref(), f, &x, &frame.basis).unwrap_or(f64::INFINITY));
            }
        }
        out.push(CheckLine::new(format!("fd gradient on {}", m.name()), grad, diagnostics::FD_GRADIENT_TOL));
        out.push(CheckLine::new(format!("fd hessian on {}", m.name()), hess, diagnostics::FD_GRADIENT_TOL));
        out.push(CheckLine::new(format!("hessian symmetry on {}", m.name()), sym, diagnostics::HESSIAN_SYMMETRY_TOL));
    }

    let quadrics: Vec<Box<dyn Manifold>> = vec![
        Box::new(MinkowskiSpace::new(1, 2)),
        Box::new(Hyperplane::new(1, 2, Vector::from_row_slice(&[0.1, 1.0, 0.4]), -0.3).expect("spacelike normal")),
        Box::new(PseudoSphere::new(2, 2).expect("valid signature")),
        Box::new(PseudoHyperbolic::new(2, 2).expect("valid signature")),
    ];
    for m in &quadrics {
        for case in [GeodesicCase::Spacelike, GeodesicCase::Timelike, GeodesicCase::Null] {
            let (mut constraint, mut geo, mut transport) = (0.0_f64, 0.0_f64, 0.0_f64);
            for _ in 0..instances {
                let x = m.random_point(&mut rng);
                let Ok(v) = hypersurfaces::random_tangent_of_case(m.as_ref(), &x, case, &mut rng) else { continue };
                let ts = samples(&mut rng, 5);
                match diagnostics::geodesic_residual(m.as_ref(), &x, &v, &ts) {
                    Ok(r) => {
                        constraint = constraint.max(r.constraint);
                        geo = geo.max(r.velocity.max(r.acceleration));
                    }
                    Err(_) => geo = f64::INFINITY,
                }
                let d = m.random_tangent(&x, &mut rng).expect("tangent");
                let e = m.random_tangent(&x, &mut rng).expect("tangent");
                transport = transport
                    .max(diagnostics::transport_invariance(m.as_ref(), &x, &v, &d, &e, &ts).unwrap_or(f64::INFINITY));
            }
            let tag = format!("{} {:?}", m.name(), case).to_lowercase();
            out.push(CheckLine::new(format!("constraint along {tag} geodesic"), constraint, 1e-9));
            out.push(CheckLine::new(format!("geodesic residual {tag}"), geo, 1e-5));
            out.push(CheckLine::new(format!("transport invariance {tag}"), transport, 1e-8));
        }
    }

    let (mut ortho, mut flip, mut cong) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..instances {
        let n = rng.random_range(1..=12);
        let p = rng.random_range(0..=n);
        let g = ScalarProduct::minkowski(p, n - p);
        let frame = indefinite::find_on_basis(&g, rng.random()).expect("frame");
        ortho = ortho.max(frame.orthonormality_residual(&g));
        let x = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let twice = indefinite::plus_map(&indefinite::plus_map(&x, &frame, &g), &frame, &g);
        flip = flip.max((twice - &x).amax());
        let b = Matrix::from_columns(&indefinite::random_vectors(&mut rng, n, n)) + Matrix::identity(n, n) * 2.0;
        let h = b.transpose() * linalg::minkowski_matrix(p, n - p) * &b;
        if let Ok((u, sig)) = indefinite::congruence_factor(&h, 1e-12) {
            cong = cong.max((u.transpose() * &h * &u - linalg::minkowski_matrix(sig.neg, sig.pos)).amax());
        }
    }
    out.push(CheckLine::new("gram-schmidt orthonormality", ortho, 1e-10));
    out.push(CheckLine::new("flip map involution", flip, 1e-10));
    out.push(CheckLine::new("congruence factor residual", cong, 1e-10));

    let (mut integral, mut generic_geo, mut commuting_geo, mut closed, mut speed, mut on_geo) =
        (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let mut metric_speed = 0.0_f64;
    for _ in 0..instances.min(40) {
        let p = rng.random_range(1..=3);
        let q = rng.random_range(1..=3);
        let tag = GroupTag::IndefOrthogonal { p, q };
        let a = lie::random_opq_point(p, q, 0.5, &mut rng).expect("point");
        let delta = PartitionedSkew::random(p, q, 0.7, &mut rng);
        let t = rng.random_range(0.2..1.0);
        let j = lie::opq_block_integral(&delta, t).expect("integral");
        let oracle = diagnostics::adaptive_simpson(
            &|s: f64| {
                linalg::expm(&(&delta.d1 * -s)).expect("exp") * delta.d2.transpose() * linalg::expm(&(&delta.d3 * s)).expect("exp")
            },
            0.0,
            t,
            SIMPSON_TOL,
            SIMPSON_MAX_DEPTH,
        );
        integral = integral.max((j - oracle).amax());
        let ts = samples(&mut rng, 3);
        let curve = |s: f64| lie::opq_geodesic(&a, &delta, s);
        generic_geo = generic_geo.max(diagnostics::lie_geodesic_residual(tag, &curve, &ts, CURVE_FD_STEP).map(|r| r.max()).unwrap_or(f64::INFINITY));
        let (s2, _) = lie::opq_speed_energy(&delta);
        for &s in &ts {
            let fd = diagnostics::lie_fd_speed_sq(tag, &curve, s, 1e-5).unwrap_or(f64::INFINITY);
            speed = speed.max((fd - s2).abs());
        }
        let comm = lie::random_commuting_skew(p, q, 0.7, &mut rng);
        let curve = |s: f64| lie::opq_geodesic(&a, &comm, s);
        commuting_geo = commuting_geo.max(diagnostics::lie_geodesic_residual(tag, &curve, &ts, CURVE_FD_STEP).map(|r| r.max()).unwrap_or(f64::INFINITY));
        for &s in &ts {
            let lhs = lie::opq_geodesic(&a, &comm, s).expect("curve");
            let rhs = lie::opq_exponential_curve(&a, &comm, s).expect("curve");
            closed = closed.max((lhs - rhs).amax());
            let fd = diagnostics::lie_fd_speed_sq(tag, &curve, s, 1e-5).unwrap_or(f64::INFINITY);
            metric_speed = metric_speed.max((fd - lie::opq_metric_speed_sq(&comm)).abs());
        }
        let on_tag = GroupTag::Orthogonal { p, q };
        let rot = linalg::expm(&PartitionedSkew::random(p, q, 0.5, &mut rng).matrix()).expect("rotation");
        let mut d = lie::random_commuting_skew(p, q, 0.7, &mut rng);
        // O(n) existence asks for Δ2 Δ1 = -Δ3 Δ2; flipping Δ3 maps one condition to the other
        d.d3 = -&d.d3;
        let curve = |s: f64| lie::on_geodesic(&rot, &d, s);
        on_geo = on_geo.max(diagnostics::lie_geodesic_residual(on_tag, &curve, &ts, CURVE_FD_STEP).map(|r| r.max()).unwrap_or(f64::INFINITY));
    }
    out.push(CheckLine::new("O(p,q) block integral vs quadrature", integral, 1e-8));
    out.push(CheckLine::new("O(p,q) curve geodesic residual, generic", generic_geo, 1e-5));
    out.push(CheckLine::new("O(p,q) curve geodesic residual, commuting", commuting_geo, 1e-5));
    out.push(CheckLine::new("O(p,q) commuting curve = A exp(t I delta)", closed, 1e-10));
    out.push(CheckLine::new("O(p,q) speed formula vs fd speed", speed, 1e-8));
    out.push(CheckLine::new("O(p,q) metric speed vs fd speed, commuting", metric_speed, 1e-8));
    out.push(CheckLine::new("O(n) geodesic residual", on_geo, 1e-5));

    let (mut sl2_geo, mut sl2_speed, mut sl2_metric) = (0.0_f64, 0.0_f64, 0.0_f64);
    let tag = GroupTag::SpecialLinear2;
    for _ in 0..instances {
        let (b, c): (f64, f64) = (rng.random_range(0.1..1.0), rng.random_range(-1.0..-0.1));
        let u = Sl2Element::new((-b * c).sqrt(), b, c);
        let a = linalg::expm(&Sl2Element::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)).matrix()).expect("exp");
        let curve = |s: f64| lie::sl2_geodesic(&a, &u, s);
        let ts = samples(&mut rng, 3);
        sl2_geo = sl2_geo.max(diagnostics::lie_geodesic_residual(tag, &curve, &ts, CURVE_FD_STEP).map(|r| r.max()).unwrap_or(f64::INFINITY));
        let fd = diagnostics::lie_fd_speed_sq(tag, &curve, ts[0], 1e-5).unwrap_or(f64::INFINITY);
        sl2_speed = sl2_speed.max((fd - u.speed_sq()).abs());
        sl2_metric = sl2_metric.max((fd - u.metric_speed_sq()).abs());
    }
    out.push(CheckLine::new("SL(2) geodesic residual", sl2_geo, 1e-5));
    out.push(CheckLine::new("SL(2) speed formula vs fd speed", sl2_speed, 1e-8));
    out.push(CheckLine::new("SL(2) metric speed vs fd speed", sl2_metric, 1e-8));
    out
}
