use std::f64::consts::PI;

use elastic_phaseless::source::*;
use elastic_phaseless::wave::*;
use elastic_phaseless::{point, Complex64, Error, Point};

fn params() -> WaveParameters {
    WaveParameters::new(2.0 * PI, 1.0, 1.0).unwrap()
}

/// `∫_a^b e^{−ict} dt` in closed form.
fn exp_integral(c: f64, a: f64, b: f64) -> Complex64 {
    if c.abs() < 1e-14 {
        return Complex64::new(b - a, 0.0);
    }
    (cis(-c * b) - cis(-c * a)) / Complex64::new(0.0, -c)
}

fn unit_piece(x0: f64, x1: f64, y0: f64, y1: f64, c: [f64; 2]) -> SourcePiece {
    SourcePiece { shape: Shape::Rect { x0, x1, y0, y1 }, density: Density::constant(c) }
}

#[test]
fn constant_rectangle_matches_closed_form() {
    let c = [0.7, -1.3];
    let f = SourceField::new(vec![unit_piece(1.0, 2.0, 1.0, 1.6, c)], "const").unwrap();
    let quad = f.quadrature(20.0, QuadratureOptions::default()).unwrap();
    for (i, theta) in [0.0, 0.4, 1.9, 3.3, 5.0].iter().enumerate() {
        let x = Direction::from_angle(*theta);
        for k in [0.5, 7.5, 19.5] {
            for mode in Mode::ALL {
                let e = if mode == Mode::P { x } else { x.perp() };
                let exact = exp_integral(k * x.x(), 1.0, 2.0) * exp_integral(k * x.y(), 1.0, 1.6) * (e.x() * c[0] + e.y() * c[1]);
                let got = quad.integrate(mode, x, k).unwrap();
                assert!((got - exact).norm() <= 1e-8 * exact.norm().max(1e-3), "case {i} k {k}: {got} vs {exact}");
            }
        }
    }
}

#[test]
fn translation_multiplies_by_phase() {
    let p = params();
    let h = point(0.4, -0.25);
    let f = SourceField::rectangle();
    let g = f.translated(h);
    let qf = f.quadrature(20.0, QuadratureOptions::default()).unwrap();
    let qg = g.quadrature(20.0, QuadratureOptions::default()).unwrap();
    for theta in [0.3, 2.0, 4.4] {
        let x = Direction::from_angle(theta);
        for omega in [1.5, 11.5] {
            let a = qf.far_field(Mode::S, x, omega, &p).unwrap();
            let b = qg.far_field(Mode::S, x, omega, &p).unwrap();
            let ks = p.with_omega(omega).unwrap().ks;
            assert!((b - cis(ks * x.dot(&h)) * a).norm() < 1e-9 * a.norm().max(1.0));
            assert!((b.norm() - a.norm()).abs() < 1e-9 * a.norm().max(1.0));
        }
    }
}

#[test]
fn far_field_is_fourier_transform_of_profile() {
    let f = SourceField::triangle();
    let quad = f.quadrature(10.0, QuadratureOptions::default()).unwrap();
    let x = Direction::from_angle(0.7);
    // the line y·x̂ + α = 0 meets the support for −α in the strip hull
    let (a0, a1) = strip_hull(&f, x);
    let (lo, hi) = (-a1, -a0);
    // ∫ e^{ikα} f(α) dα by composite Simpson
    let k = 6.0;
    let n = 4000;
    let h = (hi - lo) / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..=n {
        let a = lo + i as f64 * h;
        let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += cis(k * a) * (w * line_integral_profile(&f, x, a));
    }
    acc *= h / 3.0;
    let direct = quad.integrate(Mode::P, x, k).unwrap();
    assert!((acc - direct).norm() < 1e-6 * direct.norm(), "{acc} vs {direct}");
}

#[test]
fn profile_examples() {
    let sq = SourceField::new(vec![unit_piece(0.0, 1.0, 0.0, 1.0, [1.0, 0.0])], "square").unwrap();
    let e1 = Direction::from_angle(0.0);
    assert!((line_integral_profile(&sq, e1, -0.5) - 1.0).abs() < 1e-14);
    assert_eq!(line_integral_profile(&sq, e1, 0.5), 0.0);
    let f2 = SourceField::counterexample_f2();
    let e2 = Direction::from_angle(PI / 2.0);
    for a in [-1.5, 0.0, 1.5] {
        assert!(line_integral_profile(&f2, e2, a).abs() < 1e-15);
    }
    // profile vanishes outside the strip hull
    let f = SourceField::l_shape();
    let x = Direction::from_angle(1.1);
    let (lo, hi) = strip_hull(&f, x);
    assert_eq!(line_integral_profile(&f, x, -lo + 0.01), 0.0);
    assert_eq!(line_integral_profile(&f, x, -hi - 0.01), 0.0);
    assert!(line_integral_profile(&f, x, -0.5 * (lo + hi)).abs() > 0.0);
}

#[test]
fn counterexample_pair() {
    let p = params();
    let f1 = SourceField::counterexample_f1().quadrature(20.0, QuadratureOptions::default()).unwrap();
    let f2 = SourceField::counterexample_f2().quadrature(20.0, QuadratureOptions::default()).unwrap();
    let up = Direction::from_angle(PI / 2.0);
    let right = Direction::from_angle(0.0);
    let mut gap: f64 = 0.0;
    for omega in FrequencyGrid::standard().nodes() {
        let a = f1.far_field(Mode::P, up, omega, &p).unwrap();
        let b = f2.far_field(Mode::P, up, omega, &p).unwrap();
        assert!(a.norm() <= 1e-10 && b.norm() <= 1e-10);
        let a = f1.far_field(Mode::P, right, omega, &p).unwrap();
        let b = f2.far_field(Mode::P, right, omega, &p).unwrap();
        gap = gap.max((a - b).norm());
    }
    // the extra piece (y₁, 0) on (−1,1)² is odd in y₁ and radiates along e₁
    assert!(gap > 0.1, "F1 and F2 unexpectedly agree along (1,0): {gap}");
}

#[test]
fn combined_field_expansion() {
    let p = params();
    let quad = SourceField::rectangle().quadrature(20.0, QuadratureOptions::default()).unwrap();
    let z = point(4.0, 4.0);
    let q = Direction::from_angle(PI / 4.0);
    let x = Direction::from_angle(2.2);
    let tau = Complex64::new(0.5, 0.0);
    let omega = 9.5;
    let ks = p.with_omega(omega).unwrap().ks;
    let u = quad.far_field(Mode::S, x, omega, &p).unwrap();
    let w = combined_source_far_field(&quad, Mode::S, x, omega, &p, z, q, tau).unwrap();
    let proj = q.dot_dir(&x.perp());
    let lhs = w.norm_sqr() - u.norm_sqr() - (tau.norm() * proj).powi(2);
    let rhs = 2.0 * (u * (tau * cis(-ks * x.dot(&z))).conj()).re * proj;
    assert!((lhs - rhs).abs() < 1e-10 * u.norm_sqr().max(1.0));
    let zero = combined_source_far_field(&quad, Mode::S, x, omega, &p, z, q, Complex64::new(0.0, 0.0)).unwrap();
    assert_eq!(zero, u);
}

#[test]
fn unit_modulus_rescaling_keeps_moduli() {
    let p = params();
    let f = SourceField::l_shape();
    let c = -1.0;
    let neg = SourceField::new(
        f.pieces()
            .iter()
            .map(|s| SourcePiece { shape: s.shape, density: Density::new(s.density.x.scaled(c), s.density.y.scaled(c)) })
            .collect(),
        "negated",
    )
    .unwrap();
    let x = Direction::from_angle(0.9);
    let a = source_far_field(&f, Mode::S, x, 5.5, &p, QuadratureOptions::default()).unwrap();
    let b = source_far_field(&neg, Mode::S, x, 5.5, &p, QuadratureOptions::default()).unwrap();
    assert!((a + b).norm() < 1e-12 * a.norm());
}

#[test]
fn under_resolved_evaluation_is_an_error() {
    let quad = SourceField::rectangle().quadrature(5.0, QuadratureOptions::default()).unwrap();
    let x = Direction::from_angle(0.0);
    assert!(matches!(quad.integrate(Mode::S, x, 12.0), Err(Error::UnresolvedOscillation { .. })));
}

#[test]
fn shapes_reject_degenerate_input() {
    let bad = SourcePiece { shape: Shape::Rect { x0: 1.0, x1: 1.0, y0: 0.0, y1: 1.0 }, density: Density::standard() };
    assert!(SourceField::new(vec![bad], "flat").is_err());
    let p: Point = point(1.5, 1.3);
    assert!(SourceField::rectangle().eval(&p)[0] > 0.0);
    assert_eq!(SourceField::rectangle().eval(&point(0.0, 0.0)), [0.0, 0.0]);
}
