use std::f64::consts::PI;
use std::sync::OnceLock;

use elastic_phaseless::obstacle::*;
use elastic_phaseless::wave::*;
use elastic_phaseless::{point, Complex64, Error, Point};

fn params() -> WaveParameters {
    WaveParameters::new(2.0 * PI, 1.0, 1.0).unwrap()
}

fn kite_solver() -> &'static ObstacleSolver {
    static SOLVER: OnceLock<ObstacleSolver> = OnceLock::new();
    SOLVER.get_or_init(|| {
        let scene = ObstacleScene::new(vec![Boundary::kite(point(0.0, 0.0))], params()).unwrap();
        ObstacleSolver::build(&scene, SolverOptions::default()).unwrap()
    })
}

fn disk_solver(center: Point, radius: f64) -> ObstacleSolver {
    let scene = ObstacleScene::new(vec![Boundary::circle(center, radius).unwrap()], params()).unwrap();
    ObstacleSolver::build(&scene, SolverOptions::default()).unwrap()
}

fn max_rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

/// A point source inside the obstacle is cancelled exactly by the
/// scattered field, so `v∞ = −τ Φ∞`.
fn interior_error(solver: &ObstacleSolver, z: Point) -> f64 {
    let p = params();
    let tau = Complex64::new(0.3, -0.7);
    let mut worst: f64 = 0.0;
    for q in PolarizationSet::standard().directions() {
        let v = solver.interior_source_far_field(z, *q, tau, 64).unwrap();
        for mode in Mode::ALL {
            let exact: Vec<Complex64> =
                direction_grid(64).iter().map(|x| -tau * green_far_field(mode, *x, &z, *q, &p)).collect();
            worst = worst.max(max_rel(v.get(mode), &exact));
        }
    }
    worst
}

#[test]
fn interior_source_disk() {
    let s = disk_solver(point(0.2, -0.1), 1.0);
    assert!(!s.diagnostics().degraded, "{:?}", s.diagnostics());
    let e = interior_error(&s, point(0.4, 0.1));
    assert!(e < 1e-6, "disk interior oracle error {e:e}");
}

#[test]
fn interior_source_kite() {
    let e = interior_error(kite_solver(), point(-0.3, 0.2));
    assert!(e < 1e-4, "kite interior oracle error {e:e}");
}

#[test]
fn exterior_source_rejected_as_validation_point() {
    let s = disk_solver(point(0.0, 0.0), 0.5);
    let q = Direction::from_angle(0.3);
    let one = Complex64::new(1.0, 0.0);
    assert!(matches!(s.interior_source_far_field(point(2.0, 0.0), q, one, 16), Err(Error::SourcePlacement(_))));
    assert!(matches!(s.point_source_far_field(point(0.1, 0.0), q, one, 16), Err(Error::SourcePlacement(_))));
}

#[test]
fn reciprocity_kite() {
    let n = 64;
    let u = kite_solver().plane_far_fields(n).unwrap();
    for pair in ModePair::ALL {
        let a = u.get(pair);
        let b = u.get(pair.transposed());
        let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut err: f64 = 0.0;
        for j in 0..n {
            for l in 0..n {
                err = err.max((a[(j, l)] - b[((l + n / 2) % n, (j + n / 2) % n)]).norm());
            }
        }
        assert!(err / scale < 1e-4, "{}: {:e}", pair.label(), err / scale);
    }
}

#[test]
fn translation_phase_factors() {
    let n = 32;
    let p = params();
    let h = point(0.3, -0.2);
    let scene = ObstacleScene::new(vec![Boundary::kite(point(0.0, 0.0))], p).unwrap();
    let shifted = ObstacleSolver::build(&scene.translate(h), SolverOptions::default()).unwrap();
    let u = kite_solver().plane_far_fields(n).unwrap();
    let uh = shifted.plane_far_fields(n).unwrap();
    let dirs = direction_grid(n);
    for pair in ModePair::ALL {
        let (kin, kout) = (p.wavenumber(pair.incident), p.wavenumber(pair.scattered));
        let a = u.get(pair);
        let b = uh.get(pair);
        let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut phase_err: f64 = 0.0;
        let mut modulus_err: f64 = 0.0;
        for j in 0..n {
            for l in 0..n {
                let factor = cis(kin * dirs[l].dot(&h) - kout * dirs[j].dot(&h));
                phase_err = phase_err.max((b[(j, l)] - factor * a[(j, l)]).norm());
                modulus_err = modulus_err.max((b[(j, l)].norm() - a[(j, l)].norm()).abs());
            }
        }
        assert!(phase_err / scale < 1e-3, "{} phase {:e}", pair.label(), phase_err / scale);
        assert!(modulus_err / scale < 1e-3, "{} modulus {:e}", pair.label(), modulus_err / scale);
    }
}

#[test]
fn energy_flux_disk() {
    let s = disk_solver(point(0.0, 0.0), 1.0);
    for mode in Mode::ALL {
        let f = s.solve(&Incidence::Plane { mode, direction: Direction::from_angle(0.4) }).unwrap();
        for r in [5.0, 10.0] {
            let e = s.energy_flux(&f, r, 256).unwrap();
            assert!((e.ratio() - 1.0).abs() < 0.02, "{} r={r}: {e:?}", mode.label());
        }
    }
}

#[test]
fn flux_circle_must_enclose_scene() {
    let s = disk_solver(point(0.0, 0.0), 1.0);
    let f = s.solve(&Incidence::Plane { mode: Mode::P, direction: Direction::from_angle(0.0) }).unwrap();
    assert!(matches!(s.energy_flux(&f, 0.9, 64), Err(Error::Geometry(_))));
}

#[test]
fn weak_interaction_decays_like_inverse_sqrt() {
    let s = kite_solver();
    let norm = |rho: f64| {
        let z = point(1.0, 1.0) / 2f64.sqrt() * rho;
        PolarizationSet::standard()
            .directions()
            .iter()
            .map(|q| {
                let v = s.point_source_far_field(z, *q, Complex64::new(1.0, 0.0), 64).unwrap();
                v.p.iter().chain(&v.s).map(|c| c.norm_sqr()).sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    };
    let ratio = norm(100.0) / norm(25.0);
    assert!((ratio - 0.5).abs() < 0.15, "ratio {ratio}");
}

#[test]
fn composite_far_field_adds_three_parts() {
    let p = params();
    let s = disk_solver(point(0.0, 0.0), 0.5);
    let n = 16;
    let u = s.plane_far_fields(n).unwrap();
    let z = point(3.0, 1.0);
    let q = Direction::from_angle(PI / 4.0);
    let tau = Complex64::new(0.0, 0.5);
    let v = s.point_source_far_field(z, q, tau, n).unwrap();
    let w = composite_far_field(&u, &v, Mode::S, z, q, tau, &p).unwrap();
    let dirs = direction_grid(n);
    let expect = u.get(ModePair::SS)[(5, 2)] + v.s[5] + tau * green_far_field(Mode::S, dirs[5], &z, q, &p);
    assert!((w.s[(5, 2)] - expect).norm() < 1e-14);
    let short = PointSourceFarField::zeros(n - 1);
    assert!(matches!(composite_far_field(&u, &short, Mode::S, z, q, tau, &p), Err(Error::Shape(_))));
}

#[test]
fn overlapping_boundaries_rejected() {
    let b = vec![Boundary::circle(point(0.0, 0.0), 1.0).unwrap(), Boundary::circle(point(1.5, 0.0), 1.0).unwrap()];
    assert!(ObstacleScene::new(b, params()).is_err());
}
