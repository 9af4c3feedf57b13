use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use surface_heights::geometry::meshgen::{annulus, pants, periodic_cylinder, periodic_cylinder_heights, PantsSpec};
use surface_heights::uniformization::*;
use surface_heights::{Error, MetricSurface, Profile};

fn planar_pants(n: usize) -> MetricSurface {
    pants(PantsSpec::with_vertex_target(n)).unwrap()
}

fn type_two(n: usize) -> MetricSurface {
    let s = planar_pants(n);
    uniformize(&s, UniformType::FlatBoundary, 2.0 * PI, &MapOptions::default())
        .unwrap()
        .metric
}

fn type_one(n: usize) -> MetricSurface {
    let s = planar_pants(n);
    uniformize(&s, UniformType::ConstantCurvature, 2.0 * PI, &MapOptions::default())
        .unwrap()
        .metric
}

fn mean_zero(rng: &mut ChaCha8Rng, weights: &[f64]) -> Vec<f64> {
    let mut x: Vec<f64> = weights.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mean: f64 = x.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>() / total;
    x.iter_mut().for_each(|a| *a -= mean);
    x
}

#[test]
fn dtn_is_symmetric_nonnegative_with_constant_kernel() {
    let s = planar_pants(500);
    let t = DirichletNeumannOperator::new(&s).unwrap();
    assert!(t.asymmetry() < 1e-12, "asymmetry {:e}", t.asymmetry());
    assert!(t.constant_defect() < 1e-12, "T·1 = {:e}", t.constant_defect());
    let arcs = t.restrict(&s.boundary_weights());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let phi = mean_zero(&mut rng, &arcs);
        assert!(t.quadratic_form(&phi) > 0.0);
    }
}

#[test]
fn dtn_fourier_modes_on_symmetric_annulus() {
    let r0 = 0.3;
    let a: MetricSurface = annulus(r0, 64, 24).unwrap();
    let t = DirichletNeumannOperator::new(&a).unwrap();
    let outer = &a.boundary_loops()[0];
    let b = a.boundary_weights();
    for n in 1..=10 {
        let phi: Vec<f64> = t
            .boundary
            .iter()
            .map(|&v| {
                if outer.contains(&v) {
                    let p = a.vertices()[v];
                    (n as f64 * p[1].atan2(p[0])).cos()
                } else {
                    0.0
                }
            })
            .collect();
        let norm: f64 = t.boundary.iter().zip(&phi).map(|(&v, p)| b[v] * p * p).sum();
        let rayleigh = t.quadratic_form(&phi) / norm;
        let q = r0.powi(2 * n);
        let exact = n as f64 * (1.0 + q) / (1.0 - q);
        assert!((rayleigh / exact - 1.0).abs() < 0.1, "mode {n}: {rayleigh} vs {exact}");
    }
}

#[test]
fn f2_on_annulus_matches_radial_solution() {
    // flat annulus with geodesic boundary: φ = −log r + r0 log r0 / (1 + r0)
    let r0 = 0.3;
    let a: MetricSurface = annulus(r0, 64, 24).unwrap();
    let r = minimize_f2(&a, a.area(), &NewtonOptions::default()).unwrap();
    let phi = r.boundary_factor.unwrap();
    let t = DirichletNeumannOperator::new(&a).unwrap();
    let beta = r0 * r0.ln() / (1.0 + r0);
    for (&v, p) in t.boundary.iter().zip(&phi) {
        let x = a.vertices()[v];
        let rad = (x[0] * x[0] + x[1] * x[1]).sqrt();
        assert!((p - (beta - rad.ln())).abs() < 5e-3, "vertex {v}: {p}");
    }
    let k = uniformity(&a.conformal(&r.factor).unwrap());
    assert!(k.max_abs_geodesic < 1e-10 && k.max_abs_gauss < 1e-10);
}

#[test]
fn functionals_at_zero() {
    let s = planar_pants(400);
    let zero = vec![0.0; s.vertex_count()];
    let chi = s.euler_characteristic() as f64;
    let f1 = evaluate_f1(&s, &zero).unwrap();
    assert!((f1 + PI * chi * s.area().ln()).abs() < 1e-12);
    let nb = s.boundary_vertices().len();
    let f2 = evaluate_f2(&s, &vec![0.0; nb], &NewtonOptions::default()).unwrap();
    assert!((f2 + 2.0 * PI * chi * s.boundary_length().ln()).abs() < 1e-12);
}

#[test]
fn f2_boundary_form_equals_interior_energy() {
    let s = planar_pants(500);
    let t = DirichletNeumannOperator::new(&s).unwrap();
    let lap = DiscreteLaplace::new(&s);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let phi: Vec<f64> = t.boundary.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        let u = t.harmonic_extension(&phi);
        let boundary = t.quadratic_form(&phi);
        let interior = lap.energy(&u);
        assert!((boundary - interior).abs() < 1e-10 * interior.max(1.0), "{boundary} vs {interior}");
    }
}

#[test]
fn f1_first_variation_vanishes_at_minimizer() {
    let (normalized, _) = normalize_geodesic_boundary(&planar_pants(600)).unwrap();
    let r = minimize_f1(&normalized, 2.0 * PI, &NewtonOptions::default()).unwrap();
    assert!(r.residual < 1e-10);
    let psi: Vec<f64> = r.factor.iter().map(|p| p - r.rescale).collect();
    let mass = normalized.vertex_areas();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = 1e-5;
    for _ in 0..10 {
        let d = mean_zero(&mut rng, &mass);
        let at = |t: f64| {
            let x: Vec<f64> = psi.iter().zip(&d).map(|(p, d)| p + t * d).collect();
            evaluate_f1(&normalized, &x).unwrap()
        };
        let derivative = (at(h) - at(-h)) / (2.0 * h);
        assert!(derivative.abs() < 1e-6, "directional derivative {derivative:e}");
    }
}

#[test]
fn functionals_are_midpoint_convex() {
    let (normalized, _) = normalize_geodesic_boundary(&planar_pants(400)).unwrap();
    let flat = planar_pants(400);
    let opts = NewtonOptions::default();
    let mass = normalized.vertex_areas();
    let t = DirichletNeumannOperator::new(&flat).unwrap();
    let arcs = t.restrict(&flat.boundary_weights());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let x = mean_zero(&mut rng, &mass);
        let y = mean_zero(&mut rng, &mass);
        let m: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
        let (fx, fy, fm) = (
            evaluate_f1(&normalized, &x).unwrap(),
            evaluate_f1(&normalized, &y).unwrap(),
            evaluate_f1(&normalized, &m).unwrap(),
        );
        assert!(fm <= 0.5 * (fx + fy) + 1e-10 * fx.abs().max(1.0));

        let x = mean_zero(&mut rng, &arcs);
        let y = mean_zero(&mut rng, &arcs);
        let m: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
        let g = |p: &[f64]| evaluate_f2(&flat, p, &opts).unwrap();
        assert!(g(&m) <= 0.5 * (g(&x) + g(&y)) + 1e-10 * g(&x).abs().max(1.0));
    }
}

#[test]
fn minimizers_are_unique() {
    let s = planar_pants(600);
    let opts = NewtonOptions::default();
    let (normalized, _) = normalize_geodesic_boundary(&s).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = s.vertex_count();
    let i1: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
    let i2: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
    let a = minimize_f1_from(&normalized, 2.0 * PI, &i1, &opts).unwrap();
    let b = minimize_f1_from(&normalized, 2.0 * PI, &i2, &opts).unwrap();
    let d = a.factor.iter().zip(&b.factor).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(d < 1e-8, "F1 minimizers differ by {d:e}");

    let nb = s.boundary_vertices().len();
    let j1: Vec<f64> = (0..nb).map(|_| rng.random_range(-0.5..0.5)).collect();
    let j2: Vec<f64> = (0..nb).map(|_| rng.random_range(-0.5..0.5)).collect();
    let a = minimize_f2_from(&s, 2.0 * PI, &j1, &opts).unwrap();
    let b = minimize_f2_from(&s, 2.0 * PI, &j2, &opts).unwrap();
    let d = a.factor.iter().zip(&b.factor).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(d < 1e-8, "F2 minimizers differ by {d:e}");
}

#[test]
fn uniform_metrics_are_fixed_points() {
    let opts = NewtonOptions::default();
    let tau = type_one(500);
    let r = minimize_f1(&tau, tau.area(), &opts).unwrap();
    assert!(r.residual < 1e-10);
    assert!(r.factor.iter().all(|p| p.abs() < 1e-10));

    let sigma = type_two(500);
    let r = minimize_f2(&sigma, sigma.area(), &opts).unwrap();
    assert!(r.residual < 1e-10);
    assert!(r.factor.iter().all(|p| p.abs() < 1e-10));
}

#[test]
fn uniform_types_have_constant_curvature() {
    let tau = type_one(800);
    let u = uniformity(&tau);
    assert!((u.gauss_mean + 1.0).abs() < 1e-10);
    assert!(u.gauss_spread < 1e-9 && u.max_abs_geodesic < 1e-9);
    assert!(tau.gauss_bonnet_defect().abs() < 1e-10);

    let sigma = type_two(800);
    let u = uniformity(&sigma);
    assert!(u.max_abs_gauss < 1e-9 && u.geodesic_spread < 1e-9);
    assert!((u.geodesic_mean * sigma.boundary_length() + 2.0 * PI).abs() < 1e-9);
}

#[test]
fn round_trip_recovers_the_input() {
    let sigma = type_two(800);
    let rt = round_trip(&sigma, 2.0 * PI, &MapOptions::default()).unwrap();
    assert!(rt.discrepancy < 1e-10, "round trip {:e}", rt.discrepancy);
}

#[test]
fn maps_reject_inputs_of_the_wrong_type() {
    let sigma = type_two(300);
    let tau = type_one(300);
    let opts = MapOptions::default();
    assert!(matches!(map_phi(&sigma, 1.0, &opts), Err(Error::Precondition(_))));
    assert!(matches!(map_psi(&tau, 1.0, &opts), Err(Error::Precondition(_))));
    let disk_like: MetricSurface = annulus(0.5, 24, 4).unwrap();
    assert!(matches!(
        minimize_f1(&disk_like, 1.0, &NewtonOptions::default()),
        Err(Error::Topology(_))
    ));
}

#[test]
fn maps_depend_continuously_on_edge_lengths() {
    let s = planar_pants(500);
    let opts = MapOptions::default();
    let base = uniformize(&s, UniformType::ConstantCurvature, 2.0 * PI, &opts).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let noise: Vec<f64> = s.edge_lengths().iter().map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut ratios = Vec::new();
    for eta in [1e-3, 1e-4] {
        let lengths: Vec<f64> = s
            .edge_lengths()
            .iter()
            .zip(&noise)
            .map(|(l, n)| l * (1.0 + eta * n))
            .collect();
        let p = s.with_lengths(&lengths).unwrap();
        let out = uniformize(&p, UniformType::ConstantCurvature, 2.0 * PI, &opts).unwrap();
        let d = out
            .factor
            .iter()
            .zip(&base.factor)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        ratios.push(d / eta);
    }
    // O(η): the difference quotient is bounded and stable under η → η/10
    assert!(ratios[1] < 2.0 * ratios[0] && ratios[1] > 0.5 * ratios[0], "{ratios:?}");
}

#[test]
fn flattening_a_collar_recovers_log_sin() {
    let (l, a) = (0.5, 0.8);
    let b = PI - a;
    let (nu, nv) = (12, 200);
    let c: MetricSurface = periodic_cylinder(l, a, b, &Profile::neg_log_sin(), nu, nv).unwrap();
    let (flat, phi) = normalize_flat(&c, 1e-2).unwrap();
    let v = periodic_cylinder_heights(a, b, nu, nv);
    let diff: Vec<f64> = phi.iter().zip(&v).map(|(p, v)| p - v.sin().ln()).collect();
    let mean = diff.iter().sum::<f64>() / diff.len() as f64;
    let dev = diff.iter().fold(0.0f64, |m, d| m.max((d - mean).abs()));
    assert!(dev < 1e-4, "deviation from log sin v: {dev:e}");
    assert!(uniformity(&flat).max_abs_gauss < 1e-10);
}

#[test]
fn geodesic_normalization_on_collar_has_normal_derivative_minus_cos() {
    let (l, a) = (0.5, 1.0);
    let b = PI - a;
    let (nu, nv) = (8, 800);
    let c: MetricSurface = periodic_cylinder(l, a, b, &Profile::neg_log_sin(), nu, nv).unwrap();
    let (_, phi) = normalize_geodesic_boundary(&c).unwrap();
    let flux = c.apply_stiffness(&phi);
    let arcs = c.boundary_weights();
    for v in c.boundary_vertices() {
        let dn = flux[v] / arcs[v];
        assert!((dn + a.cos()).abs() < 1e-6, "vertex {v}: {dn}");
    }
}

#[test]
fn discrete_scaling_law_is_exact() {
    let s = type_two(300);
    let chi = s.euler_characteristic() as f64;
    for lambda in [0.5f64, 2.0, 7.0] {
        let psi = vec![lambda.ln(); s.vertex_count()];
        let t = mesh_polyakov_terms(&s, &psi).unwrap();
        let expected = chi / 3.0 * lambda.ln();
        assert!((t.shift() - expected).abs() < 1e-13, "{} vs {expected}", t.shift());
    }
}

#[test]
fn height_inequality_on_pants() {
    for n in [400, 1200] {
        let tau = type_one(n);
        let psi = flattening_factor(&tau, 1e-6).unwrap();
        let hi = height_inequality_check(&tau, &psi, 1e-6).unwrap();
        assert!(hi.holds && hi.slack > 0.0);
        assert!((hi.normal - hi.two_pi_chi).abs() < 1e-9);
        assert!(hi.jensen_lhs <= hi.jensen_rhs);
        let expected = (hi.terms.dirichlet + hi.terms.gauss) / (6.0 * PI);
        assert!((hi.slack - expected).abs() < 1e-9);

        let shifted: Vec<f64> = psi.iter().map(|p| p + 0.1).collect();
        assert!(matches!(
            height_inequality_check(&tau, &shifted, 1e-6),
            Err(Error::Precondition(_))
        ));
    }
}
