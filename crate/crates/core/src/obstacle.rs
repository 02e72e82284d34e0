//! Exterior Dirichlet (rigid body) scattering for the Navier equation.
//!
//! The scattered field is represented by Green's tensor sources placed on
//! a contour inside each obstacle, `u^sc(x) = Σ_k Φ(x, y_k) c_k`, which
//! satisfies the Navier equation and the Kupradze radiation condition by
//! construction. The coefficients are fitted to the boundary condition
//! `u^sc = −u^in` at collocation points by truncated-SVD least squares.
//! The pseudo-inverse is formed once, so every further right-hand side is a
//! matrix-vector product.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::wave::{
    cis, direction_grid, green_far_field, green_tensor, plane_wave, CVec2, Direction, Mode, ModePair, Support,
    WaveParameters,
};
use crate::{Complex64, Error, Point, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Parametric closed curves used as obstacle boundaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curve {
    /// `(a, b) + r(cos t, sin t)`.
    Circle { center: Point, radius: f64 },
    /// `offset + (cos t + 0.65 cos 2t − 0.65, 1.5 sin t)`.
    Kite { offset: Point },
}

impl Curve {
    pub fn point(&self, t: f64) -> Point {
        match *self {
            Curve::Circle { center, radius } => center + Point::new(libm::cos(t), libm::sin(t)) * radius,
            Curve::Kite { offset } => {
                offset + Point::new(libm::cos(t) + 0.65 * libm::cos(2.0 * t) - 0.65, 1.5 * libm::sin(t))
            }
        }
    }

    pub fn tangent(&self, t: f64) -> Point {
        match *self {
            Curve::Circle { radius, .. } => Point::new(-libm::sin(t), libm::cos(t)) * radius,
            Curve::Kite { .. } => Point::new(-libm::sin(t) - 1.3 * libm::sin(2.0 * t), 1.5 * libm::cos(t)),
        }
    }

    pub fn second_derivative(&self, t: f64) -> Point {
        match *self {
            Curve::Circle { radius, .. } => Point::new(-libm::cos(t), -libm::sin(t)) * radius,
            Curve::Kite { .. } => Point::new(-libm::cos(t) - 2.6 * libm::cos(2.0 * t), -1.5 * libm::sin(t)),
        }
    }

    /// Signed curvature; positive where the curve is locally convex.
    pub fn curvature(&self, t: f64) -> f64 {
        let d1 = self.tangent(t);
        let d2 = self.second_derivative(t);
        let speed = libm::hypot(d1.x, d1.y);
        (d1.x * d2.y - d1.y * d2.x) / (speed * speed * speed)
    }

    fn translated(&self, h: Point) -> Self {
        match *self {
            Curve::Circle { center, radius } => Curve::Circle { center: center + h, radius },
            Curve::Kite { offset } => Curve::Kite { offset: offset + h },
        }
    }

    fn tag(&self) -> &'static str {
        match self {
            Curve::Circle { .. } => "circle",
            Curve::Kite { .. } => "kite",
        }
    }
}

/// An obstacle boundary: an anticlockwise closed curve and a point strictly
/// inside it towards which the fictitious source contour is shrunk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    curve: Curve,
    reference: Point,
}

/// Sample count used for geometric predicates (containment, distance,
/// disjointness).
const GEOMETRY_SAMPLES: usize = 2048;

impl Boundary {
    pub fn circle(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Geometry(format!("circle radius must be positive, got {radius}")));
        }
        Ok(Self { curve: Curve::Circle { center, radius }, reference: center })
    }

    /// The kite, shifted by `offset`.
    pub fn kite(offset: Point) -> Self {
        Self { curve: Curve::Kite { offset }, reference: offset }
    }

    /// Same curve with a different interior reference point.
    pub fn with_reference(self, reference: Point) -> Result<Self> {
        let b = Self { reference, ..self };
        if !b.contains(&reference) {
            return Err(Error::Geometry(format!("reference point {reference:?} is not inside the boundary")));
        }
        Ok(b)
    }

    pub fn translate(&self, h: Point) -> Self {
        Self { curve: self.curve.translated(h), reference: self.reference + h }
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    pub fn reference(&self) -> Point {
        self.reference
    }

    pub fn tag(&self) -> &'static str {
        self.curve.tag()
    }

    /// `x(t_i)` for `t_i = 2πi/m`.
    pub fn samples(&self, m: usize) -> Vec<Point> {
        (0..m).map(|i| self.curve.point(2.0 * PI * i as f64 / m as f64)).collect()
    }

    /// Outward unit normals at `t_i = 2πi/m`.
    pub fn normals(&self, m: usize) -> Vec<Point> {
        (0..m)
            .map(|i| {
                let tau = self.curve.tangent(2.0 * PI * i as f64 / m as f64);
                Point::new(tau.y, -tau.x) / libm::hypot(tau.x, tau.y)
            })
            .collect()
    }

    /// Arclength by the periodic trapezoidal rule.
    pub fn perimeter(&self) -> f64 {
        let m = 1024;
        (0..m)
            .map(|i| {
                let tau = self.curve.tangent(2.0 * PI * i as f64 / m as f64);
                libm::hypot(tau.x, tau.y)
            })
            .sum::<f64>()
            * (2.0 * PI / m as f64)
    }

    /// Whether `p` lies inside the polygon through dense boundary samples.
    pub fn contains(&self, p: &Point) -> bool {
        point_in_polygon(&self.samples(GEOMETRY_SAMPLES), p)
    }

    /// Distance from `p` to the boundary, measured against dense samples.
    pub fn distance(&self, p: &Point) -> f64 {
        self.samples(GEOMETRY_SAMPLES)
            .iter()
            .map(|s| libm::hypot(s.x - p.x, s.y - p.y))
            .fold(f64::INFINITY, f64::min)
    }
}

impl Support for Boundary {
    fn hull_points(&self) -> Vec<Point> {
        self.samples(GEOMETRY_SAMPLES)
    }
}

fn point_in_polygon(poly: &[Point], p: &Point) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let orient = |p: Point, q: Point, r: Point| (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0
}

fn boundaries_overlap(a: &Boundary, b: &Boundary) -> bool {
    let m = 512;
    let pa = a.samples(m);
    let pb = b.samples(m);
    if pa.iter().any(|p| b.contains(p)) || pb.iter().any(|p| a.contains(p)) {
        return true;
    }
    for i in 0..m {
        for j in 0..m {
            if segments_cross(pa[i], pa[(i + 1) % m], pb[j], pb[(j + 1) % m]) {
                return true;
            }
        }
    }
    false
}

/// A collection of pairwise disjoint rigid obstacles in a given material.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleScene {
    boundaries: Vec<Boundary>,
    params: WaveParameters,
}

impl ObstacleScene {
    pub fn new(boundaries: Vec<Boundary>, params: WaveParameters) -> Result<Self> {
        for (i, a) in boundaries.iter().enumerate() {
            for (j, b) in boundaries.iter().enumerate().skip(i + 1) {
                if boundaries_overlap(a, b) {
                    return Err(Error::Geometry(format!("boundaries {i} and {j} overlap")));
                }
            }
        }
        Ok(Self { boundaries, params })
    }

    /// Scene without obstacles; every scattered field vanishes.
    pub fn empty(params: WaveParameters) -> Self {
        Self { boundaries: Vec::new(), params }
    }

    pub fn boundaries(&self) -> &[Boundary] {
        &self.boundaries
    }

    pub fn params(&self) -> &WaveParameters {
        &self.params
    }

    pub fn translate(&self, h: Point) -> Self {
        Self { boundaries: self.boundaries.iter().map(|b| b.translate(h)).collect(), params: self.params }
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.boundaries.iter().any(|b| b.contains(p))
    }

    /// Distance from `p` to the union of the boundaries.
    pub fn distance(&self, p: &Point) -> f64 {
        self.boundaries.iter().map(|b| b.distance(p)).fold(f64::INFINITY, f64::min)
    }

    /// Radius of the smallest origin-centred disk containing every boundary.
    pub fn bounding_radius(&self) -> f64 {
        self.boundaries
            .iter()
            .flat_map(|b| b.samples(GEOMETRY_SAMPLES))
            .map(|p| libm::hypot(p.x, p.y))
            .fold(0.0, f64::max)
    }
}

impl Support for ObstacleScene {
    fn hull_points(&self) -> Vec<Point> {
        self.boundaries.iter().flat_map(|b| b.hull_points()).collect()
    }
}

/// Placement of the fictitious sources inside each boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceContour {
    /// `c + σ(x(t) − c)` with `c` the interior reference point.
    Scaled { shrink: f64 },
    /// `x(t) − δ(t) ν(t)` with `ν` the outward unit normal and
    /// `δ(t) = min(distance, curvature_fraction · ρ(t))`, `ρ` the local
    /// radius of curvature on convex parts of the curve.
    NormalOffset { distance: f64, curvature_fraction: f64 },
}

impl SourceContour {
    fn place(&self, b: &Boundary, n: usize) -> Vec<Point> {
        match *self {
            SourceContour::Scaled { shrink } => {
                let c = b.reference();
                b.samples(n).into_iter().map(|p| c + (p - c) * shrink).collect()
            }
            SourceContour::NormalOffset { distance, curvature_fraction } => (0..n)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / n as f64;
                    let tau = b.curve.tangent(t);
                    let nu = Point::new(tau.y, -tau.x) / libm::hypot(tau.x, tau.y);
                    let kappa = b.curve.curvature(t);
                    let delta = if kappa > 0.0 { distance.min(curvature_fraction / kappa) } else { distance };
                    b.curve.point(t) - nu * delta
                })
                .collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            SourceContour::Scaled { shrink } if !(shrink > 0.0 && shrink < 1.0) => {
                Err(Error::Parameters(format!("shrink factor must lie in (0, 1), got {shrink}")))
            }
            SourceContour::NormalOffset { distance, curvature_fraction }
                if !(distance > 0.0) || !(curvature_fraction > 0.0 && curvature_fraction < 1.0) =>
            {
                Err(Error::Parameters(format!(
                    "source offset must be positive and curvature fraction in (0, 1), got {distance} and {curvature_fraction}"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Discretization and regularization settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub contour: SourceContour,
    /// Lower bound on collocation points per boundary.
    pub min_collocation: usize,
    /// Collocation density in points per shear wavelength of arclength.
    pub points_per_wavelength: f64,
    /// Singular values below `svd_cutoff × σ_max` are discarded.
    pub svd_cutoff: f64,
    /// Relative boundary residual above which a solve is flagged degraded.
    pub residual_tolerance: f64,
    /// Fraction of discarded singular values that triggers a warning.
    pub discard_warning: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            contour: SourceContour::NormalOffset { distance: 0.2, curvature_fraction: 0.3 },
            min_collocation: 128,
            points_per_wavelength: 40.0,
            svd_cutoff: 1e-12,
            residual_tolerance: 1e-4,
            discard_warning: 0.5,
        }
    }
}

/// Fit and conditioning information of a solver.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolverDiagnostics {
    pub collocation_points: usize,
    pub source_points: usize,
    pub singular_values_kept: usize,
    pub singular_values_total: usize,
    /// Ratio of largest to smallest retained singular value.
    pub condition: f64,
    /// Relative residual of the reference plane-wave solves on the check grid.
    pub boundary_residual: f64,
    pub degraded: bool,
    pub warnings: Vec<String>,
}

/// Incident field driving a scattering problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Incidence {
    Plane { mode: Mode, direction: Direction },
    /// `τ Φ(x, z) q`.
    Point { z: Point, q: Direction, tau: Complex64 },
}

impl Incidence {
    pub fn field(&self, params: &WaveParameters, x: &Point) -> Result<CVec2> {
        match *self {
            Incidence::Plane { mode, direction } => Ok(plane_wave(mode, direction, params, x)),
            Incidence::Point { z, q, tau } => {
                let g = green_tensor(params, x, &z)?;
                Ok(g * CVec2::new(Complex64::new(q.x(), 0.0), Complex64::new(q.y(), 0.0)) * tau)
            }
        }
    }
}

/// Coefficients `c_k ∈ ℂ²` of a fitted scattered field, stored as one
/// vector `(c_0x, c_0y, c_1x, …)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteredField {
    pub coefficients: DVector<Complex64>,
    /// Relative boundary residual on the check grid.
    pub residual: f64,
}

/// Precomputed MFS least-squares solver for a scene.
#[derive(Debug, Clone)]
pub struct ObstacleSolver {
    scene: ObstacleScene,
    options: SolverOptions,
    collocation: Vec<Point>,
    sources: Vec<Point>,
    check: Vec<Point>,
    pinv: DMatrix<Complex64>,
    check_matrix: DMatrix<Complex64>,
    diagnostics: SolverDiagnostics,
}

fn collocation_count(b: &Boundary, params: &WaveParameters, options: &SolverOptions) -> usize {
    let auto = libm::ceil(options.points_per_wavelength * b.perimeter() / params.shear_wavelength()) as usize;
    let m = auto.max(options.min_collocation).max(4);
    m + (m % 2)
}

fn green_block(params: &WaveParameters, rows: &[Point], sources: &[Point]) -> Result<DMatrix<Complex64>> {
    let mut a = DMatrix::from_element(2 * rows.len(), 2 * sources.len(), ZERO);
    for (k, y) in sources.iter().enumerate() {
        for (i, x) in rows.iter().enumerate() {
            let g = green_tensor(params, x, y)?;
            a[(2 * i, 2 * k)] = g[(0, 0)];
            a[(2 * i, 2 * k + 1)] = g[(0, 1)];
            a[(2 * i + 1, 2 * k)] = g[(1, 0)];
            a[(2 * i + 1, 2 * k + 1)] = g[(1, 1)];
        }
    }
    Ok(a)
}

impl ObstacleSolver {
    pub fn build(scene: &ObstacleScene, options: SolverOptions) -> Result<Self> {
        options.contour.validate()?;
        let params = scene.params;
        let mut collocation = Vec::new();
        let mut sources = Vec::new();
        let mut check = Vec::new();
        for b in &scene.boundaries {
            let m = collocation_count(b, &params, &options);
            collocation.extend(b.samples(m));
            check.extend(b.samples(4 * m));
            let placed = options.contour.place(b, m / 2);
            if placed.iter().any(|y| !b.contains(y)) {
                return Err(Error::Geometry(String::from("fictitious source contour leaves the obstacle")));
            }
            sources.extend(placed);
        }
        let mut diagnostics = SolverDiagnostics {
            collocation_points: collocation.len(),
            source_points: sources.len(),
            ..Default::default()
        };
        let (pinv, check_matrix) = if sources.is_empty() {
            (DMatrix::from_element(0, 0, ZERO), DMatrix::from_element(0, 0, ZERO))
        } else {
            let a = green_block(&params, &collocation, &sources)?;
            let (rows, cols) = a.shape();
            let svd = a.svd(true, true);
            let u = svd.u.expect("left singular vectors requested");
            let v_t = svd.v_t.expect("right singular vectors requested");
            let s = &svd.singular_values;
            let smax = s.iter().cloned().fold(0.0, f64::max);
            let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > options.svd_cutoff * smax).collect();
            let smin = keep.iter().map(|&i| s[i]).fold(f64::INFINITY, f64::min);
            diagnostics.singular_values_total = s.len();
            diagnostics.singular_values_kept = keep.len();
            diagnostics.condition = smax / smin;
            let discarded = 1.0 - keep.len() as f64 / s.len() as f64;
            if discarded > options.discard_warning {
                diagnostics.warnings.push(format!(
                    "ill-conditioned collocation system: {:.0}% of the singular spectrum discarded",
                    100.0 * discarded
                ));
            }
            // pinv = V Σ⁺ Uᴴ over the retained triplets
            let mut pinv = DMatrix::from_element(cols, rows, ZERO);
            let mut vs = DMatrix::from_element(cols, keep.len(), ZERO);
            let mut uh = DMatrix::from_element(keep.len(), rows, ZERO);
            for (c, &i) in keep.iter().enumerate() {
                let inv = 1.0 / s[i];
                for r in 0..cols {
                    vs[(r, c)] = v_t[(i, r)].conj() * inv;
                }
                for r in 0..rows {
                    uh[(c, r)] = u[(r, i)].conj();
                }
            }
            vs.mul_to(&uh, &mut pinv);
            (pinv, green_block(&params, &check, &sources)?)
        };
        let mut solver = Self {
            scene: scene.clone(),
            options,
            collocation,
            sources,
            check,
            pinv,
            check_matrix,
            diagnostics,
        };
        let mut residual: f64 = 0.0;
        for mode in Mode::ALL {
            let inc = Incidence::Plane { mode, direction: Direction::from_angle(0.0) };
            residual = residual.max(solver.solve(&inc)?.residual);
        }
        solver.diagnostics.boundary_residual = residual;
        if residual > options.residual_tolerance {
            solver.diagnostics.degraded = true;
            solver.diagnostics.warnings.push(format!(
                "boundary residual {residual:.3e} exceeds tolerance {:.1e}",
                options.residual_tolerance
            ));
        }
        Ok(solver)
    }

    pub fn scene(&self) -> &ObstacleScene {
        &self.scene
    }

    pub fn params(&self) -> &WaveParameters {
        &self.scene.params
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    pub fn diagnostics(&self) -> &SolverDiagnostics {
        &self.diagnostics
    }

    pub fn collocation_points(&self) -> &[Point] {
        &self.collocation
    }

    pub fn source_points(&self) -> &[Point] {
        &self.sources
    }

    fn boundary_values(&self, points: &[Point], incidences: &[Incidence]) -> Result<DMatrix<Complex64>> {
        let params = self.scene.params;
        let mut b = DMatrix::from_element(2 * points.len(), incidences.len(), ZERO);
        for (c, inc) in incidences.iter().enumerate() {
            for (i, x) in points.iter().enumerate() {
                let u = inc.field(&params, x)?;
                b[(2 * i, c)] = u.x;
                b[(2 * i + 1, c)] = u.y;
            }
        }
        Ok(b)
    }

    /// Coefficients for several incident fields at once, with the largest
    /// relative check-grid residual among them.
    pub fn solve_many(&self, incidences: &[Incidence]) -> Result<(DMatrix<Complex64>, f64)> {
        if self.sources.is_empty() {
            return Ok((DMatrix::from_element(0, incidences.len(), ZERO), 0.0));
        }
        let rhs = -self.boundary_values(&self.collocation, incidences)?;
        let coeffs = &self.pinv * rhs;
        let incident = self.boundary_values(&self.check, incidences)?;
        let fitted = &self.check_matrix * &coeffs;
        let mut worst: f64 = 0.0;
        for c in 0..incidences.len() {
            let mut err: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for i in 0..self.check.len() {
                let ex = fitted[(2 * i, c)] + incident[(2 * i, c)];
                let ey = fitted[(2 * i + 1, c)] + incident[(2 * i + 1, c)];
                err = err.max(libm::sqrt(ex.norm_sqr() + ey.norm_sqr()));
                let ux = incident[(2 * i, c)];
                let uy = incident[(2 * i + 1, c)];
                scale = scale.max(libm::sqrt(ux.norm_sqr() + uy.norm_sqr()));
            }
            if scale > 0.0 {
                worst = worst.max(err / scale);
            }
        }
        Ok((coeffs, worst))
    }

    pub fn solve(&self, incidence: &Incidence) -> Result<ScatteredField> {
        let (c, residual) = self.solve_many(core::slice::from_ref(incidence))?;
        Ok(ScatteredField { coefficients: c.column(0).into_owned(), residual })
    }

    /// Scattered displacement at `x`.
    pub fn scattered_field(&self, field: &ScatteredField, x: &Point) -> Result<CVec2> {
        let params = self.scene.params;
        let mut u = CVec2::zeros();
        for (k, y) in self.sources.iter().enumerate() {
            let g = green_tensor(&params, x, y)?;
            u += g * CVec2::new(field.coefficients[2 * k], field.coefficients[2 * k + 1]);
        }
        Ok(u)
    }

    /// Rows map coefficients to the mode-`mode` far field at each direction.
    pub fn far_field_operator(&self, mode: Mode, directions: &[Direction]) -> DMatrix<Complex64> {
        let k = self.scene.params.wavenumber(mode);
        let mut f = DMatrix::from_element(directions.len(), 2 * self.sources.len(), ZERO);
        for (j, xhat) in directions.iter().enumerate() {
            let e = match mode {
                Mode::P => xhat.vector(),
                Mode::S => xhat.perp().vector(),
            };
            for (k_idx, y) in self.sources.iter().enumerate() {
                let ph = cis(-k * xhat.dot(y));
                f[(j, 2 * k_idx)] = ph * e.x;
                f[(j, 2 * k_idx + 1)] = ph * e.y;
            }
        }
        f
    }

    /// Far field of a fitted scattered field at the given directions.
    pub fn far_field(&self, field: &ScatteredField, mode: Mode, directions: &[Direction]) -> Vec<Complex64> {
        if self.sources.is_empty() {
            return alloc::vec![ZERO; directions.len()];
        }
        let f = self.far_field_operator(mode, directions);
        (f * &field.coefficients).iter().cloned().collect()
    }

    /// Far-field matrices `u∞_mn(x̂_j, d_l)` on the grid `θ_l = 2πl/N` for
    /// all four mode pairs.
    pub fn plane_far_fields(&self, n: usize) -> Result<FarFieldMatrix> {
        let dirs = direction_grid(n);
        let mut blocks: [DMatrix<Complex64>; 4] = core::array::from_fn(|_| DMatrix::from_element(n, n, ZERO));
        let mut residual: f64 = 0.0;
        if !self.sources.is_empty() {
            for m in Mode::ALL {
                let incs: Vec<Incidence> = dirs.iter().map(|&d| Incidence::Plane { mode: m, direction: d }).collect();
                let (coeffs, res) = self.solve_many(&incs)?;
                residual = residual.max(res);
                for s in Mode::ALL {
                    let f = self.far_field_operator(s, &dirs);
                    blocks[FarFieldMatrix::slot(ModePair::new(m, s))] = f * &coeffs;
                }
            }
        }
        Ok(FarFieldMatrix { n, blocks, residual })
    }

    fn check_exterior(&self, z: &Point) -> Result<()> {
        if self.scene.contains(z) {
            return Err(Error::SourcePlacement(format!("point source {z:?} lies inside an obstacle")));
        }
        Ok(())
    }

    /// Scattered far fields `(v∞_p, v∞_s)` on the `N`-direction grid for the
    /// incident point source `τ Φ(·, z) q` with `z` outside every obstacle.
    pub fn point_source_far_field(&self, z: Point, q: Direction, tau: Complex64, n: usize) -> Result<PointSourceFarField> {
        self.check_exterior(&z)?;
        self.point_source_far_field_unchecked(z, q, tau, n)
    }

    /// Validation entry point: the same computation with `z` inside an
    /// obstacle, where the exact scattered field is `−τ Φ(·, z) q`.
    pub fn interior_source_far_field(&self, z: Point, q: Direction, tau: Complex64, n: usize) -> Result<PointSourceFarField> {
        if !self.scene.contains(&z) {
            return Err(Error::SourcePlacement(format!("validation source {z:?} must lie inside an obstacle")));
        }
        self.point_source_far_field_unchecked(z, q, tau, n)
    }

    fn point_source_far_field_unchecked(&self, z: Point, q: Direction, tau: Complex64, n: usize) -> Result<PointSourceFarField> {
        let dirs = direction_grid(n);
        let field = self.solve(&Incidence::Point { z, q, tau })?;
        Ok(PointSourceFarField {
            p: self.far_field(&field, Mode::P, &dirs),
            s: self.far_field(&field, Mode::S, &dirs),
            residual: field.residual,
        })
    }

    /// Energy flux of the scattered field through the circle `|x| = r`,
    /// `J = −4ω Im ∫ u^sc · conj(𝕋_ν u^sc) ds`, against its far-field
    /// counterpart `(kp² ∫|u∞_p|² + ks² ∫|u∞_s|²)/(2πω)`.
    pub fn energy_flux(&self, field: &ScatteredField, r: f64, nq: usize) -> Result<EnergyFlux> {
        if r <= self.scene.bounding_radius() {
            return Err(Error::Geometry(format!("flux circle of radius {r} intersects an obstacle")));
        }
        let p = self.scene.params;
        let h = 1e-4 * p.shear_wavelength();
        let inv2h = Complex64::new(0.5 / h, 0.0);
        let mut acc = 0.0;
        for i in 0..nq {
            let nu = Direction::from_angle(2.0 * PI * i as f64 / nq as f64);
            let x = nu.vector() * r;
            let u = self.scattered_field(field, &x)?;
            let dx = (self.scattered_field(field, &(x + Point::new(h, 0.0)))?
                - self.scattered_field(field, &(x - Point::new(h, 0.0)))?)
                * inv2h;
            let dy = (self.scattered_field(field, &(x + Point::new(0.0, h)))?
                - self.scattered_field(field, &(x - Point::new(0.0, h)))?)
                * inv2h;
            // σ(u)ν with ∂_j u_i = (dx, dy)[j][i]
            let div = dx.x + dy.y;
            let s12 = (dy.x + dx.y) * p.mu;
            let s11 = div * p.lambda + dx.x * (2.0 * p.mu);
            let s22 = div * p.lambda + dy.y * (2.0 * p.mu);
            let t = CVec2::new(s11 * nu.x() + s12 * nu.y(), s12 * nu.x() + s22 * nu.y());
            acc += (u.x * t.x.conj() + u.y * t.y.conj()).im;
        }
        let flux = -4.0 * p.omega * acc * (2.0 * PI * r / nq as f64);
        let dirs = direction_grid(nq);
        let w = 2.0 * PI / nq as f64;
        let ip: f64 = self.far_field(field, Mode::P, &dirs).iter().map(|v| v.norm_sqr()).sum::<f64>() * w;
        let is: f64 = self.far_field(field, Mode::S, &dirs).iter().map(|v| v.norm_sqr()).sum::<f64>() * w;
        let far_field = (p.kp * p.kp * ip + p.ks * p.ks * is) / (2.0 * PI * p.omega);
        Ok(EnergyFlux { flux, far_field })
    }
}

/// Both sides of the energy identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyFlux {
    pub flux: f64,
    pub far_field: f64,
}

impl EnergyFlux {
    pub fn ratio(&self) -> f64 {
        self.flux / self.far_field
    }
}

/// Scattered far fields of a point-source incidence on the direction grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSourceFarField {
    pub p: Vec<Complex64>,
    pub s: Vec<Complex64>,
    pub residual: f64,
}

impl PointSourceFarField {
    pub fn zeros(n: usize) -> Self {
        Self { p: alloc::vec![ZERO; n], s: alloc::vec![ZERO; n], residual: 0.0 }
    }

    pub fn get(&self, mode: Mode) -> &[Complex64] {
        match mode {
            Mode::P => &self.p,
            Mode::S => &self.s,
        }
    }
}

/// Far-field samples `u∞_mn(x̂_j, d_l)` for all four mode pairs on the grid
/// `θ_l = 2πl/N`; rows index observations, columns incidences.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldMatrix {
    n: usize,
    blocks: [DMatrix<Complex64>; 4],
    residual: f64,
}

impl FarFieldMatrix {
    fn slot(pair: ModePair) -> usize {
        match pair.label() {
            "pp" => 0,
            "ps" => 1,
            "sp" => 2,
            _ => 3,
        }
    }

    pub fn from_blocks(blocks: [DMatrix<Complex64>; 4]) -> Result<Self> {
        let n = blocks[0].nrows();
        for b in &blocks {
            if b.nrows() != n || b.ncols() != n {
                return Err(Error::Shape(format!("far-field block is {}x{}, expected {n}x{n}", b.nrows(), b.ncols())));
            }
            if b.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::Shape(String::from("far-field block has non-finite entries")));
            }
        }
        Ok(Self { n, blocks, residual: 0.0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn directions(&self) -> Vec<Direction> {
        direction_grid(self.n)
    }

    pub fn get(&self, pair: ModePair) -> &DMatrix<Complex64> {
        &self.blocks[Self::slot(pair)]
    }

    /// Largest relative boundary residual among the solves that produced
    /// the matrix.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Every entry multiplied by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        Self { n: self.n, blocks: self.blocks.clone().map(|b| b * c), residual: self.residual }
    }
}

/// Far fields `w∞_{mn}(x̂_j, d_l)` of the obstacle together with a point
/// source, for one incident mode `m` and both scattered modes.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeFarField {
    pub incident: Mode,
    pub p: DMatrix<Complex64>,
    pub s: DMatrix<Complex64>,
}

impl CompositeFarField {
    pub fn get(&self, mode: Mode) -> &DMatrix<Complex64> {
        match mode {
            Mode::P => &self.p,
            Mode::S => &self.s,
        }
    }
}

/// `w∞_mn = u∞_mn + v∞_n + τ Φ∞_n(·, z) q`.
pub fn composite_far_field(
    u: &FarFieldMatrix,
    v: &PointSourceFarField,
    incident: Mode,
    z: Point,
    q: Direction,
    tau: Complex64,
    params: &WaveParameters,
) -> Result<CompositeFarField> {
    let n = u.n();
    if v.p.len() != n || v.s.len() != n {
        return Err(Error::Shape(format!(
            "point-source far field has {} / {} samples, far-field matrix has {n}",
            v.p.len(),
            v.s.len()
        )));
    }
    let dirs = u.directions();
    let block = |s: Mode| {
        let base = u.get(ModePair::new(incident, s));
        let vs = v.get(s);
        DMatrix::from_fn(n, n, |j, l| base[(j, l)] + vs[j] + tau * green_far_field(s, dirs[j], &z, q, params))
    };
    Ok(CompositeFarField { incident, p: block(Mode::P), s: block(Mode::S) })
}
