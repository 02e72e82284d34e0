use std::f64::consts::PI;

use elastic_phaseless::dataset::*;
use elastic_phaseless::obstacle::*;
use elastic_phaseless::sampling::*;
use elastic_phaseless::source::*;
use elastic_phaseless::wave::*;
use elastic_phaseless::{point, Complex64, Point};
use nalgebra::DMatrix;

fn params() -> WaveParameters {
    WaveParameters::new(2.0 * PI, 1.0, 1.0).unwrap()
}

fn strengths() -> Vec<Complex64> {
    let mut t = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    t.extend(StrengthSet::standard().tau);
    t
}

fn disk_dataset(z: Point) -> (PhaselessDataset, FarFieldMatrix) {
    let scene = ObstacleScene::new(vec![Boundary::circle(point(0.5, -0.3), 0.4).unwrap()], params()).unwrap();
    let solver = ObstacleSolver::build(&scene, SolverOptions::default()).unwrap();
    let u = solver.plane_far_fields(48).unwrap();
    let ds = synthesize_obstacle_dataset(&solver, &u, z, &PolarizationSet::standard(), &strengths()).unwrap();
    (ds, u)
}

fn source_dataset(obs: &[Direction], z: Point) -> PhaselessDataset {
    let grid = FrequencyGrid::standard();
    let quad = SourceField::rectangle().quadrature(grid.k_max(), QuadratureOptions::default()).unwrap();
    synthesize_source_dataset(&quad, &params(), obs, grid, z, &PolarizationSet::standard(), &strengths()).unwrap()
}

#[test]
fn noise_is_reproducible_and_shape_preserving() {
    let (ds, _) = disk_dataset(point(4.0, 4.0));
    let spec = NoiseSpec::new(NoiseKind::Relative, 0.1, 9).unwrap();
    let a = apply_noise(&ds, spec);
    let b = apply_noise(&ds, spec);
    assert_eq!(a, b);
    assert_ne!(a, apply_noise(&ds, NoiseSpec::new(NoiseKind::Relative, 0.1, 10).unwrap()));
    for (s, t) in ds.slices.iter().zip(&a.slices) {
        for (x, y) in s.values.iter().zip(t.values.iter()) {
            assert!((y - x).abs() <= 0.1 * x + 1e-15);
        }
    }
    let mut zeros = ds.clone();
    zeros.slices[0].values.fill(0.0);
    let rel = apply_noise(&zeros, spec);
    assert!(rel.slices[0].values.iter().all(|v| *v == 0.0));
    let abs = apply_noise(&zeros, NoiseSpec::new(NoiseKind::Absolute, 0.5, 1).unwrap());
    assert!(abs.slices.iter().all(|s| s.values.iter().all(|v| *v >= 0.0)));
    assert!(NoiseSpec::new(NoiseKind::Relative, -0.1, 1).is_err());
}

#[test]
fn phaseless_obstacle_indicator_is_point_symmetric() {
    let z0 = point(4.0, 4.0);
    let (ds, _) = disk_dataset(z0);
    let s = PhaselessObstacleSampler::new(&ds, Complex64::new(1.0, 0.0)).unwrap();
    let grid = SamplingGrid::centered(z0, 6, 0.37);
    for p in grid.points() {
        let mirror = z0 * 2.0 - p;
        let (a, b) = (s.iz0(&p), s.iz0(&mirror));
        assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()), "{p:?}: {a} vs {b}");
        let (a, b) = (s.iz0_d(&p, 3), s.iz0_d(&mirror, 3));
        assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()));
    }
}

#[test]
fn indicator_kernel_matches_phased_expansion() {
    // 𝔉 = 2 Re(u∞ · conj(τ₁ e^{−ik_s x̂·z₀}(q·x̂^⊥))) + interaction terms;
    // with a far source point the interaction is small against 𝔉.
    let z0 = point(40.0, 30.0);
    let (ds, u) = disk_dataset(z0);
    let s = PhaselessObstacleSampler::new(&ds, Complex64::new(1.0, 0.0)).unwrap();
    let p = params();
    let dirs = direction_grid(48);
    let uss = u.get(ModePair::SS);
    let q = PolarizationSet::standard().directions()[1];
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for j in 0..48 {
        let phi = green_far_field(Mode::S, dirs[j], &z0, q, &p);
        let expect = 2.0 * (uss[(j, 7)] * phi.conj()).re;
        num = num.max((s.f_value(j, 7, 1) - expect).abs());
        den = den.max(expect.abs());
    }
    assert!(num / den < 0.2, "{}", num / den);
}

#[test]
fn phased_indicators_ignore_global_phase() {
    let (_, u) = disk_dataset(point(4.0, 4.0));
    let pols = PolarizationSet::standard();
    let a = ObstacleSampler::new(u.get(ModePair::SS).clone(), &params(), &pols, Combine::Sum).unwrap();
    let c = Complex64::from_polar(1.0, 2.1);
    let b = ObstacleSampler::new(u.get(ModePair::SS) * c, &params(), &pols, Combine::Sum).unwrap();
    for p in [point(0.0, 0.0), point(0.5, -0.3), point(1.7, 2.2)] {
        assert!((a.i2(&p) - b.i2(&p)).abs() < 1e-12 * a.i2(&p));
        assert!((a.i3(&p, 5) - b.i3(&p, 5)).abs() < 1e-12 * a.i3(&p, 5));
    }
    // the disk attracts the phased indicator
    let grid = SamplingGrid::new(-2.0, 2.0, -2.0, 2.0, 0.1).unwrap();
    let field = IndicatorField::new(grid, grid.evaluate(|p| a.i2(p)), "i2").unwrap();
    assert!((field.argmax_point() - point(0.5, -0.3)).norm() < 0.45);
    let max = ObstacleSampler::new(u.get(ModePair::SS).clone(), &params(), &pols, Combine::Max).unwrap();
    assert!(max.i2(&point(0.5, -0.3)) <= a.i2(&point(0.5, -0.3)));
}

#[test]
fn zero_data_gives_zero_indicators() {
    let zero = DMatrix::from_element(16, 16, Complex64::new(0.0, 0.0));
    let s = ObstacleSampler::new(zero, &params(), &PolarizationSet::standard(), Combine::Sum).unwrap();
    assert_eq!(s.i2(&point(0.3, 0.1)), 0.0);
    let obs = [Direction::from_angle(PI / 2.0)];
    let h = SourceSampler::new(DMatrix::from_element(1, 20, Complex64::new(0.0, 0.0)), &obs, FrequencyGrid::standard(), &params())
        .unwrap();
    assert_eq!(h.itheta(&point(1.0, 1.0)), 0.0);
}

#[test]
fn source_indicator_symmetry_and_strip_invariance() {
    let obs = [Direction::from_angle(0.0), Direction::from_angle(PI / 2.0), Direction::from_angle(1.2)];
    let z0 = point(4.0, 1.3);
    let ds = source_dataset(&obs, z0);
    let s = PhaselessSourceSampler::new(&ds, Complex64::new(1.0, 0.0)).unwrap();
    assert!(s.skipped().is_empty());
    for p in SamplingGrid::centered(z0, 5, 0.41).points() {
        let (a, b) = (s.value(&p), s.value(&(z0 * 2.0 - p)));
        assert!((a - b).abs() <= 1e-12 * a.max(b));
    }
    let grid = FrequencyGrid::standard();
    let quad = SourceField::rectangle().quadrature(grid.k_max(), QuadratureOptions::default()).unwrap();
    let u = DMatrix::from_fn(obs.len(), grid.len(), |i, j| {
        quad.integrate(Mode::S, obs[i], params().with_omega(grid.node(j)).unwrap().ks).unwrap()
    });
    let h = SourceSampler::new(u, &obs, grid, &params()).unwrap();
    for (i, x) in obs.iter().enumerate() {
        let p = point(0.7, 2.1);
        let a = h.h(&p, i);
        for alpha in [-3.0, 0.5, 7.25] {
            let b = h.h(&(p + x.perp().vector() * alpha), i);
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }
}

#[test]
fn source_indicator_concentrates_on_rectangle_with_many_directions() {
    let obs: Vec<Direction> = (0..20).map(|j| Direction::from_angle(-PI / 2.0 + j as f64 * PI / 20.0)).collect();
    let ds = source_dataset(&obs, point(12.0, 12.0));
    let s = PhaselessSourceSampler::new(&ds, Complex64::new(1.0, 0.0)).unwrap();
    let grid = SamplingGrid::new(-1.0, 4.0, -1.0, 4.0, 0.05).unwrap();
    let field = IndicatorField::new(grid, grid.evaluate(|p| s.value(p)), "itheta").unwrap();
    let top = field.top_fraction(0.01);
    let centroid = top.iter().fold(point(0.0, 0.0), |a, b| a + b) / top.len() as f64;
    assert!((centroid - point(1.5, 1.3)).norm() < 0.3, "{centroid:?}");
}

#[test]
fn indicators_need_matching_dataset() {
    let (ds, _) = disk_dataset(point(4.0, 4.0));
    assert!(PhaselessSourceSampler::new(&ds, Complex64::new(1.0, 0.0)).is_err());
    assert!(PhaselessObstacleSampler::new(&ds, Complex64::new(0.25, 0.0)).is_err());
    let src = source_dataset(&[Direction::from_angle(0.0)], point(4.0, 4.0));
    assert!(PhaselessObstacleSampler::new(&src, Complex64::new(1.0, 0.0)).is_err());
}
