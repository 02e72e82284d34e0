//! Lamé parameters, directions, plane waves, the Navier Green's tensor and
//! its far-field patterns, plus the polarization-arc bookkeeping used by the
//! phase retrieval and sampling schemes.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};

use crate::specfun::hankel01;
use crate::{Complex64, Error, Point, Result};

/// Complex displacement vector.
pub type CVec2 = Vector2<Complex64>;
/// Complex 2×2 matrix.
pub type CMat2 = Matrix2<Complex64>;

/// Distance below which the Green's tensor refuses to evaluate.
pub const COINCIDENCE_TOLERANCE: f64 = 1e-12;

/// Slack on the `q·x̂ ≥ 1/2` arc membership test.
pub const ARC_TOLERANCE: f64 = 1e-12;

/// `e^{iθ}`.
#[inline]
pub fn cis(theta: f64) -> Complex64 {
    Complex64::new(libm::cos(theta), libm::sin(theta))
}

/// Circular frequency and Lamé constants with the derived wavenumbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveParameters {
    pub omega: f64,
    pub lambda: f64,
    pub mu: f64,
    pub kp: f64,
    pub ks: f64,
}

impl WaveParameters {
    pub fn new(omega: f64, lambda: f64, mu: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::Parameters(format!("omega must be positive, got {omega}")));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::Parameters(format!("mu must be positive, got {mu}")));
        }
        if !(lambda + 2.0 * mu > 0.0) || !lambda.is_finite() {
            return Err(Error::Parameters(format!(
                "lambda + 2 mu must be positive, got lambda = {lambda}, mu = {mu}"
            )));
        }
        Ok(Self {
            omega,
            lambda,
            mu,
            kp: omega / libm::sqrt(lambda + 2.0 * mu),
            ks: omega / libm::sqrt(mu),
        })
    }

    /// Same material at another circular frequency.
    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        Self::new(omega, self.lambda, self.mu)
    }

    #[inline]
    pub fn wavenumber(&self, mode: Mode) -> f64 {
        match mode {
            Mode::P => self.kp,
            Mode::S => self.ks,
        }
    }

    /// Shear wavelength `2π/ks`.
    #[inline]
    pub fn shear_wavelength(&self) -> f64 {
        2.0 * PI / self.ks
    }

    /// Constant `C_m` in `Φ(x,y)q ≈ C_m e^{ik_m|x|}/√|x| Φ∞_m e_m` with
    /// `e_p = x̂`, `e_s = x̂^⊥` and `Φ∞` as returned by [`green_far_field`].
    pub fn asymptotic_prefactor(&self, mode: Mode) -> Complex64 {
        let k = self.wavenumber(mode);
        cis(PI / 4.0) * (k * libm::sqrt(k) / (self.omega * self.omega * libm::sqrt(8.0 * PI)))
    }
}

/// Compressional (`P`) or shear (`S`) wave mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    P,
    S,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::P, Mode::S];

    pub fn label(self) -> &'static str {
        match self {
            Mode::P => "p",
            Mode::S => "s",
        }
    }
}

/// Incident mode `m` followed by scattered mode `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModePair {
    pub incident: Mode,
    pub scattered: Mode,
}

impl ModePair {
    pub const PP: ModePair = ModePair { incident: Mode::P, scattered: Mode::P };
    pub const PS: ModePair = ModePair { incident: Mode::P, scattered: Mode::S };
    pub const SP: ModePair = ModePair { incident: Mode::S, scattered: Mode::P };
    pub const SS: ModePair = ModePair { incident: Mode::S, scattered: Mode::S };
    pub const ALL: [ModePair; 4] = [Self::PP, Self::PS, Self::SP, Self::SS];

    pub fn new(incident: Mode, scattered: Mode) -> Self {
        Self { incident, scattered }
    }

    /// `mn` with the roles swapped, as used by reciprocity.
    pub fn transposed(self) -> Self {
        Self::new(self.scattered, self.incident)
    }

    pub fn label(self) -> &'static str {
        match (self.incident, self.scattered) {
            (Mode::P, Mode::P) => "pp",
            (Mode::P, Mode::S) => "ps",
            (Mode::S, Mode::P) => "sp",
            (Mode::S, Mode::S) => "ss",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.label() == label)
    }
}

/// Unit vector of the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction(Point);

impl Direction {
    pub fn from_angle(theta: f64) -> Self {
        Self(Point::new(libm::cos(theta), libm::sin(theta)))
    }

    /// Normalizes `v`; `None` for the zero or a non-finite vector.
    pub fn new(v: Point) -> Option<Self> {
        let n = libm::hypot(v.x, v.y);
        if n > 0.0 && n.is_finite() {
            Some(Self(v / n))
        } else {
            None
        }
    }

    #[inline]
    pub fn vector(&self) -> Point {
        self.0
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.0.x
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.0.y
    }

    /// Rotation by π/2 anticlockwise: `(−d₂, d₁)`.
    #[inline]
    pub fn perp(&self) -> Self {
        Self(Point::new(-self.0.y, self.0.x))
    }

    #[inline]
    pub fn neg(&self) -> Self {
        Self(-self.0)
    }

    #[inline]
    pub fn dot(&self, p: &Point) -> f64 {
        self.0.x * p.x + self.0.y * p.y
    }

    #[inline]
    pub fn dot_dir(&self, other: &Direction) -> f64 {
        self.dot(&other.0)
    }

    pub fn angle(&self) -> f64 {
        libm::atan2(self.0.y, self.0.x)
    }
}

/// Equispaced directions `θ_l = 2πl/N`.
pub fn direction_grid(n: usize) -> Vec<Direction> {
    (0..n)
        .map(|l| Direction::from_angle(2.0 * PI * l as f64 / n as f64))
        .collect()
}

/// Three polarization directions whose arcs cover the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationSet {
    q: Vec<Direction>,
}

impl PolarizationSet {
    /// Angles π/4, 11π/12, 19π/12.
    pub fn standard() -> Self {
        Self::from_angles(&[PI / 4.0, 11.0 * PI / 12.0, 19.0 * PI / 12.0])
    }

    pub fn from_angles(angles: &[f64]) -> Self {
        Self { q: angles.iter().map(|&a| Direction::from_angle(a)).collect() }
    }

    pub fn directions(&self) -> &[Direction] {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn angles(&self) -> Vec<f64> {
        self.q.iter().map(Direction::angle).collect()
    }

    /// Restricts to a subset of indices, for datasets that do not carry all
    /// polarizations.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self { q: indices.iter().map(|&i| self.q[i]).collect() }
    }
}

/// Three complex point-source strengths. The phase retrieval anchors are
/// `z_j = −τ_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrengthSet {
    pub tau: [Complex64; 3],
}

impl StrengthSet {
    /// `τ = 0.5, −0.5, 0.5i`.
    pub fn standard() -> Self {
        Self {
            tau: [Complex64::new(0.5, 0.0), Complex64::new(-0.5, 0.0), Complex64::new(0.0, 0.5)],
        }
    }

    pub fn new(tau: [Complex64; 3]) -> Result<Self> {
        let s = Self { tau };
        crate::retrieval::AnchorTriple::new(s.anchors())?;
        Ok(s)
    }

    pub fn anchors(&self) -> [Complex64; 3] {
        [-self.tau[0], -self.tau[1], -self.tau[2]]
    }
}

/// Incident plane wave of the given mode and direction at `x`.
pub fn plane_wave(mode: Mode, d: Direction, params: &WaveParameters, x: &Point) -> CVec2 {
    let k = params.wavenumber(mode);
    let phase = cis(k * d.dot(x));
    let pol = match mode {
        Mode::P => d.vector(),
        Mode::S => d.perp().vector(),
    };
    CVec2::new(phase * pol.x, phase * pol.y)
}

/// Hessian of `H_0^(1)(k|x|)` at offset `diff` with `r = |diff|`.
#[inline]
fn hankel_hessian(k: f64, r: f64, rhat: &Point, h0: Complex64, h1: Complex64) -> CMat2 {
    let z = k * r;
    let radial = -(h0 - h1 / z) * (k * k);
    let tangential = -h1 * (k / r);
    let rr = rhat * rhat.transpose();
    let eye = Matrix2::<f64>::identity();
    let mut out = CMat2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            out[(i, j)] = radial * rr[(i, j)] + tangential * (eye[(i, j)] - rr[(i, j)]);
        }
    }
    out
}

/// Navier Green's tensor `Φ(x, y)`.
pub fn green_tensor(params: &WaveParameters, x: &Point, y: &Point) -> Result<CMat2> {
    let diff = x - y;
    let r = libm::hypot(diff.x, diff.y);
    if !(r >= COINCIDENCE_TOLERANCE) {
        return Err(Error::Coincidence { distance: r });
    }
    let rhat = diff / r;
    let (h0s, h1s) = hankel01(params.ks * r)?;
    let (h0p, h1p) = hankel01(params.kp * r)?;
    let hs = hankel_hessian(params.ks, r, &rhat, h0s, h1s);
    let hp = hankel_hessian(params.kp, r, &rhat, h0p, h1p);
    let i = Complex64::i();
    let a = i * h0s / (4.0 * params.mu);
    let b = i / (4.0 * params.omega * params.omega);
    let mut out = (hs - hp) * b;
    out[(0, 0)] += a;
    out[(1, 1)] += a;
    Ok(out)
}

/// Far-field pattern of `Φ(·, y)q` for a real polarization `q`:
/// `e^{−ik_p x̂·y}(q·x̂)` or `e^{−ik_s x̂·y}(q·x̂^⊥)`.
pub fn green_far_field(mode: Mode, xhat: Direction, y: &Point, q: Direction, params: &WaveParameters) -> Complex64 {
    let (k, proj) = match mode {
        Mode::P => (params.kp, q.dot_dir(&xhat)),
        Mode::S => (params.ks, q.dot_dir(&xhat.perp())),
    };
    cis(-k * xhat.dot(y)) * proj
}

/// Far-field pattern of `Φ(·, y)c` for a complex coefficient vector `c`.
pub fn green_far_field_vec(mode: Mode, xhat: Direction, y: &Point, c: &CVec2, params: &WaveParameters) -> Complex64 {
    let (k, e) = match mode {
        Mode::P => (params.kp, xhat.vector()),
        Mode::S => (params.ks, xhat.perp().vector()),
    };
    cis(-k * xhat.dot(y)) * (c.x * e.x + c.y * e.y)
}

/// Index of the polarization used for direction `x̂`: among the `q` with
/// `q·x̂ ≥ 1/2` (mode p) or `q·x̂^⊥ ≥ 1/2` (mode s) the one with the largest
/// projection, ties resolved towards the smaller index.
pub fn arc_select_index(xhat: Direction, mode: Mode, polarizations: &PolarizationSet) -> Result<usize> {
    let target = match mode {
        Mode::P => xhat,
        Mode::S => xhat.perp(),
    };
    let mut best: Option<(usize, f64)> = None;
    for (i, q) in polarizations.directions().iter().enumerate() {
        let c = q.dot_dir(&target);
        if c >= 0.5 - ARC_TOLERANCE && best.is_none_or(|(_, b)| c > b) {
            best = Some((i, c));
        }
    }
    best.map(|(i, _)| i).ok_or(Error::ArcSelection { angle: xhat.angle() })
}

/// The polarization chosen by [`arc_select_index`].
pub fn arc_select(xhat: Direction, mode: Mode, polarizations: &PolarizationSet) -> Result<Direction> {
    arc_select_index(xhat, mode, polarizations).map(|i| polarizations.directions()[i])
}

/// Every polarization index whose arc contains `x̂`.
pub fn arc_members(xhat: Direction, mode: Mode, polarizations: &PolarizationSet) -> Vec<usize> {
    let target = match mode {
        Mode::P => xhat,
        Mode::S => xhat.perp(),
    };
    polarizations
        .directions()
        .iter()
        .enumerate()
        .filter(|(_, q)| q.dot_dir(&target) >= 0.5 - ARC_TOLERANCE)
        .map(|(i, _)| i)
        .collect()
}

/// A bounded planar set described by points whose convex hull is the set's
/// convex hull (polygon vertices or dense boundary samples).
pub trait Support {
    fn hull_points(&self) -> Vec<Point>;
}

impl Support for [Point] {
    fn hull_points(&self) -> Vec<Point> {
        self.to_vec()
    }
}

impl Support for Vec<Point> {
    fn hull_points(&self) -> Vec<Point> {
        self.clone()
    }
}

/// Smallest interval `[a, b]` with `a ≤ z·x̂ ≤ b` on the support.
pub fn strip_hull<S: Support + ?Sized>(shape: &S, xhat: Direction) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in shape.hull_points() {
        let t = xhat.dot(&p);
        lo = lo.min(t);
        hi = hi.max(t);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point;

    fn params() -> WaveParameters {
        WaveParameters::new(2.0 * PI, 1.0, 1.0).unwrap()
    }

    #[test]
    fn wavenumbers() {
        let p = WaveParameters::new(8.0 * PI, 1.0, 1.0).unwrap();
        assert!((p.ks - 8.0 * PI).abs() < 1e-14);
        assert!((p.kp - 8.0 * PI / 3f64.sqrt()).abs() < 1e-13);
        assert!(p.kp < p.ks);
        assert!(WaveParameters::new(1.0, 1.0, 0.0).is_err());
        assert!(WaveParameters::new(1.0, -3.0, 1.0).is_err());
        assert!(WaveParameters::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn direction_basics() {
        let d = Direction::from_angle(0.3);
        assert!((d.vector().norm() - 1.0).abs() < 1e-14);
        let pp = d.perp().perp();
        assert_eq!(pp.vector(), -d.vector());
        assert!(Direction::new(point(0.0, 0.0)).is_none());
    }

    #[test]
    fn plane_wave_values() {
        let p = params();
        let d = Direction::from_angle(0.0);
        let o = point(0.0, 0.0);
        let u = plane_wave(Mode::P, d, &p, &o);
        assert_eq!(u, CVec2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));
        let u = plane_wave(Mode::S, d, &p, &o);
        assert_eq!(u, CVec2::new(Complex64::new(-0.0, 0.0), Complex64::new(1.0, 0.0)));
        for (i, x) in [point(0.3, -7.1), point(12.0, 4.5)].iter().enumerate() {
            let d = Direction::from_angle(i as f64);
            for m in Mode::ALL {
                let u = plane_wave(m, d, &p, x);
                assert!(((u.x.norm_sqr() + u.y.norm_sqr()).sqrt() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn green_symmetry_and_coincidence() {
        let p = params();
        let x = point(0.3, 0.7);
        let y = point(-0.4, 0.1);
        let g = green_tensor(&p, &x, &y).unwrap();
        let gt = green_tensor(&p, &y, &x).unwrap();
        assert!((g - g.transpose()).norm() < 1e-15 * g.norm());
        assert!((g - gt).norm() < 1e-15 * g.norm());
        assert!(matches!(green_tensor(&p, &x, &x), Err(Error::Coincidence { .. })));
    }

    // Δ*u + ω²u with Δ*u = μΔu + (λ+μ)∇div u, by 5-point and cross stencils.
    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn navier_residual(p: &WaveParameters, x: &Point, y: &Point, col: usize, h: f64) -> (f64, f64) {
        let u = |dx: f64, dy: f64| {
            let g = green_tensor(p, &(x + Point::new(dx, dy)), y).unwrap();
            CVec2::new(g[(0, col)], g[(1, col)])
        };
        let c = u(0.0, 0.0);
        let uxx = (u(h, 0.0) - c * r(2.0) + u(-h, 0.0)) * r(1.0 / (h * h));
        let uyy = (u(0.0, h) - c * r(2.0) + u(0.0, -h)) * r(1.0 / (h * h));
        let uxy = (u(h, h) - u(h, -h) - u(-h, h) + u(-h, -h)) * r(1.0 / (4.0 * h * h));
        let lap = uxx + uyy;
        let grad_div = CVec2::new(uxx.x + uxy.y, uxy.x + uyy.y);
        let res = lap * r(p.mu) + grad_div * r(p.lambda + p.mu) + c * r(p.omega * p.omega);
        let scale = (c * r(p.omega * p.omega)).norm();
        (res.norm(), scale)
    }

    #[test]
    fn green_satisfies_navier() {
        let p = params();
        let y = point(0.1, -0.2);
        for x in [point(1.0, -0.2), point(0.8, 0.45), point(-0.5, -0.9)] {
            for col in 0..2 {
                let (res, scale) = navier_residual(&p, &x, &y, col, 1e-4);
                assert!(res <= 1e-4 * scale, "residual {res} vs {scale}");
            }
        }
    }

    #[test]
    fn far_field_basic_values() {
        let p = params();
        let q = Direction::from_angle(0.4);
        assert!(green_far_field(Mode::P, q.perp(), &point(3.0, 1.0), q, &p).norm() < 1e-15);
        assert!((green_far_field(Mode::P, q, &point(0.0, 0.0), q, &p) - 1.0).norm() < 1e-15);
        let c = CVec2::new(Complex64::new(q.x(), 0.0), Complex64::new(q.y(), 0.0));
        let xhat = Direction::from_angle(2.0);
        let y = point(0.3, 0.2);
        for m in Mode::ALL {
            let a = green_far_field(m, xhat, &y, q, &p);
            let b = green_far_field_vec(m, xhat, &y, &c, &p);
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn far_field_matches_asymptotics() {
        let p = params();
        let y = point(0.2, -0.3);
        let q = Direction::from_angle(1.1);
        let r = 1000.0 * p.shear_wavelength();
        for theta in [0.0, 0.7, 2.5, 4.0] {
            let xhat = Direction::from_angle(theta);
            let x = xhat.vector() * r;
            let g = green_tensor(&p, &x, &y).unwrap();
            let exact = g * CVec2::new(Complex64::new(q.x(), 0.0), Complex64::new(q.y(), 0.0));
            let mut approx = CVec2::zeros();
            for (m, e) in [(Mode::P, xhat), (Mode::S, xhat.perp())] {
                let k = p.wavenumber(m);
                let amp = p.asymptotic_prefactor(m) * cis(k * r) / r.sqrt() * green_far_field(m, xhat, &y, q, &p);
                approx += CVec2::new(amp * e.x(), amp * e.y());
            }
            assert!((exact - approx).norm() <= 0.01 * exact.norm());
        }
    }

    #[test]
    fn arc_select_examples() {
        let qs = PolarizationSet::standard();
        let x = Direction::from_angle(PI / 4.0);
        assert_eq!(arc_select_index(x, Mode::P, &qs).unwrap(), 0);
        let x = Direction::from_angle(PI / 4.0 + PI / 2.0);
        let q = arc_select(x, Mode::S, &qs).unwrap();
        assert!(q.dot_dir(&x.perp()) >= 0.5);
    }

    #[test]
    fn arc_coverage_sweep() {
        let qs = PolarizationSet::standard();
        for i in 0..10_000 {
            let x = Direction::from_angle(2.0 * PI * (i as f64 + 0.37) / 10_000.0);
            for m in Mode::ALL {
                let idx = arc_select_index(x, m, &qs).unwrap();
                assert!(arc_members(x, m, &qs).contains(&idx));
            }
        }
        let restricted = qs.subset(&[0]);
        assert!(arc_select(Direction::from_angle(PI), Mode::P, &restricted).is_err());
    }

    #[test]
    fn strip_hull_examples() {
        let rect = alloc::vec![point(1.0, 1.0), point(2.0, 1.0), point(2.0, 1.6), point(1.0, 1.6)];
        let (a, b) = strip_hull(&rect, Direction::from_angle(PI / 2.0));
        assert!((a - 1.0).abs() < 1e-15 && (b - 1.6).abs() < 1e-15);
        let tri = alloc::vec![point(-2.0, 0.0), point(1.0, 0.0), point(-0.5, 1.5 * 3f64.sqrt())];
        assert_eq!(strip_hull(&tri, Direction::from_angle(0.0)), (-2.0, 1.0));
        let disk: Vec<Point> = direction_grid(512).iter().map(|d| d.vector()).collect();
        let (a, b) = strip_hull(&disk, Direction::from_angle(0.123));
        assert!((a + 1.0).abs() < 1e-4 && (b - 1.0).abs() < 1e-4);
    }

    #[test]
    fn mode_pair_labels() {
        for p in ModePair::ALL {
            assert_eq!(ModePair::from_label(p.label()), Some(p));
        }
        assert_eq!(ModePair::PS.transposed(), ModePair::SP);
    }
}
