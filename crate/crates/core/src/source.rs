//! Far fields radiated by compactly supported vector sources `F` with
//! piecewise polynomial densities, over a band of frequencies.
//!
//! `u∞_{F,p}(x̂, ω) = ∫ e^{−ik_p x̂·y} x̂·F(y) dy` and
//! `u∞_{F,s}(x̂, ω) = ∫ e^{−ik_s x̂·y} x̂^⊥·F(y) dy`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::quadrature::gauss_legendre;
use crate::wave::{cis, green_far_field, Direction, Mode, Support, WaveParameters};
use crate::{Complex64, Error, Point, Result};

/// Real bivariate polynomial `Σ c x^i y^j`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly2 {
    terms: Vec<(u32, u32, f64)>,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl Poly2 {
    pub fn new(terms: Vec<(u32, u32, f64)>) -> Self {
        Self { terms }
    }

    pub fn constant(c: f64) -> Self {
        Self { terms: alloc::vec![(0, 0, c)] }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> &[(u32, u32, f64)] {
        &self.terms
    }

    pub fn eval(&self, p: &Point) -> f64 {
        self.terms.iter().map(|&(i, j, c)| c * libm::pow(p.x, i as f64) * libm::pow(p.y, j as f64)).sum()
    }

    /// `q(y) = p(y + h)`.
    pub fn shifted(&self, h: Point) -> Self {
        let mut terms = Vec::new();
        for &(i, j, c) in &self.terms {
            for a in 0..=i {
                for b in 0..=j {
                    let coef = c
                        * binomial(i, a)
                        * binomial(j, b)
                        * libm::pow(h.x, (i - a) as f64)
                        * libm::pow(h.y, (j - b) as f64);
                    if coef != 0.0 {
                        terms.push((a, b, coef));
                    }
                }
            }
        }
        Self { terms }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { terms: self.terms.iter().map(|&(i, j, c)| (i, j, c * s)).collect() }
    }
}

/// Vector density `F = (F₁, F₂)` with polynomial components.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub x: Poly2,
    pub y: Poly2,
}

impl Density {
    pub fn new(x: Poly2, y: Poly2) -> Self {
        Self { x, y }
    }

    pub fn constant(c: [f64; 2]) -> Self {
        Self { x: Poly2::constant(c[0]), y: Poly2::constant(c[1]) }
    }

    /// `(x² + y² + 5, x² − y² + 5)`.
    pub fn standard() -> Self {
        Self {
            x: Poly2::new(alloc::vec![(2, 0, 1.0), (0, 2, 1.0), (0, 0, 5.0)]),
            y: Poly2::new(alloc::vec![(2, 0, 1.0), (0, 2, -1.0), (0, 0, 5.0)]),
        }
    }

    pub fn eval(&self, p: &Point) -> [f64; 2] {
        [self.x.eval(p), self.y.eval(p)]
    }

    fn shifted(&self, h: Point) -> Self {
        Self { x: self.x.shifted(h), y: self.y.shifted(h) }
    }
}

/// Convex support piece.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// `[x0, x1] × [y0, y1]`.
    Rect { x0: f64, x1: f64, y0: f64, y1: f64 },
    Triangle { a: Point, b: Point, c: Point },
}

impl Shape {
    pub fn vertices(&self) -> Vec<Point> {
        match *self {
            Shape::Rect { x0, x1, y0, y1 } => alloc::vec![
                Point::new(x0, y0),
                Point::new(x1, y0),
                Point::new(x1, y1),
                Point::new(x0, y1)
            ],
            Shape::Triangle { a, b, c } => alloc::vec![a, b, c],
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Shape::Rect { x0, x1, y0, y1 } => (x1 - x0) * (y1 - y0),
            Shape::Triangle { a, b, c } => 0.5 * libm::fabs((b - a).perp(&(c - a))),
        }
    }

    fn translated(&self, h: Point) -> Self {
        match *self {
            Shape::Rect { x0, x1, y0, y1 } => Shape::Rect { x0: x0 + h.x, x1: x1 + h.x, y0: y0 + h.y, y1: y1 + h.y },
            Shape::Triangle { a, b, c } => Shape::Triangle { a: a + h, b: b + h, c: c + h },
        }
    }

    /// Whether `p` lies in the closed piece.
    pub fn contains(&self, p: &Point) -> bool {
        match *self {
            Shape::Rect { x0, x1, y0, y1 } => p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1,
            Shape::Triangle { a, b, c } => {
                let s = (b - a).perp(&(c - a)).signum();
                [(a, b), (b, c), (c, a)].iter().all(|(u, v)| s * (v - u).perp(&(p - u)) >= 0.0)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Shape::Rect { x0, x1, y0, y1 } => x1 > x0 && y1 > y0,
            Shape::Triangle { .. } => self.area() > 0.0,
        };
        if ok && self.vertices().iter().all(|v| v.x.is_finite() && v.y.is_finite()) {
            Ok(())
        } else {
            Err(Error::Geometry(format!("degenerate source piece {self:?}")))
        }
    }
}

/// A support piece carrying a polynomial density.
#[derive(Debug, Clone, PartialEq)]
pub struct SourcePiece {
    pub shape: Shape,
    pub density: Density,
}

/// Vector source: a finite union of pieces with piecewise polynomial
/// densities (zero outside).
#[derive(Debug, Clone, PartialEq)]
pub struct SourceField {
    pieces: Vec<SourcePiece>,
    tag: String,
}

impl SourceField {
    pub fn new(pieces: Vec<SourcePiece>, tag: &str) -> Result<Self> {
        for p in &pieces {
            p.shape.validate()?;
        }
        Ok(Self { pieces, tag: String::from(tag) })
    }

    /// The standard density on the rectangle `(1, 2) × (1, 1.6)`.
    pub fn rectangle() -> Self {
        Self::uniform(&[Shape::Rect { x0: 1.0, x1: 2.0, y0: 1.0, y1: 1.6 }], "rectangle")
    }

    /// The standard density on `(0,2)² \ (1/16,2)²`, split into two
    /// rectangles.
    pub fn l_shape() -> Self {
        let w = 1.0 / 16.0;
        Self::uniform(
            &[
                Shape::Rect { x0: 0.0, x1: 2.0, y0: 0.0, y1: w },
                Shape::Rect { x0: 0.0, x1: w, y0: w, y1: 2.0 },
            ],
            "l-shape",
        )
    }

    /// The standard density on the equilateral triangle with vertices
    /// `(−2, 0)`, `(1, 0)`, `(−1/2, 3√3/2)`.
    pub fn triangle() -> Self {
        Self::uniform(
            &[Shape::Triangle {
                a: Point::new(-2.0, 0.0),
                b: Point::new(1.0, 0.0),
                c: Point::new(-0.5, 1.5 * libm::sqrt(3.0)),
            }],
            "triangle",
        )
    }

    fn uniform(shapes: &[Shape], tag: &str) -> Self {
        Self {
            pieces: shapes.iter().map(|&shape| SourcePiece { shape, density: Density::standard() }).collect(),
            tag: String::from(tag),
        }
    }

    /// `(1,0)` on `(−1,1) × [1,2)`, `(y₁,0)` on `(−1,1)²`, `(1,0)` on
    /// `(−1,1) × (−2,−1]`.
    pub fn counterexample_f1() -> Self {
        let mut f = Self::counterexample_f2();
        f.pieces.insert(
            1,
            SourcePiece {
                shape: Shape::Rect { x0: -1.0, x1: 1.0, y0: -1.0, y1: 1.0 },
                density: Density::new(Poly2::new(alloc::vec![(1, 0, 1.0)]), Poly2::zero()),
            },
        );
        f.tag = String::from("counterexample-f1");
        f
    }

    /// `(1,0)` on `(−1,1) × [1,2)` and on `(−1,1) × (−2,−1]`.
    pub fn counterexample_f2() -> Self {
        let piece = |y0, y1| SourcePiece {
            shape: Shape::Rect { x0: -1.0, x1: 1.0, y0, y1 },
            density: Density::constant([1.0, 0.0]),
        };
        Self { pieces: alloc::vec![piece(1.0, 2.0), piece(-2.0, -1.0)], tag: String::from("counterexample-f2") }
    }

    pub fn pieces(&self) -> &[SourcePiece] {
        &self.pieces
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    /// `F_h(y) = F(y + h)`: support moved by `−h`.
    pub fn translated(&self, h: Point) -> Self {
        Self {
            pieces: self
                .pieces
                .iter()
                .map(|p| SourcePiece { shape: p.shape.translated(-h), density: p.density.shifted(h) })
                .collect(),
            tag: self.tag.clone(),
        }
    }

    /// `F(y)`; zero off the support. On shared piece edges the first piece
    /// wins.
    pub fn eval(&self, p: &Point) -> [f64; 2] {
        self.pieces
            .iter()
            .find(|piece| piece.shape.contains(p))
            .map(|piece| piece.density.eval(p))
            .unwrap_or([0.0, 0.0])
    }

    /// Tensor Gauss rule resolving `e^{−ik x̂·y}` for every `k ≤ k_max`.
    pub fn quadrature(&self, k_max: f64, options: QuadratureOptions) -> Result<SourceQuadrature> {
        SourceQuadrature::build(self, k_max, options)
    }
}

impl Support for SourceField {
    fn hull_points(&self) -> Vec<Point> {
        self.pieces.iter().flat_map(|p| p.shape.vertices()).collect()
    }
}

/// Node density of the source quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Gauss–Legendre nodes per panel and dimension.
    pub order: usize,
    /// Target nodes per wavelength and dimension at the largest wavenumber.
    pub nodes_per_wavelength: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { order: 12, nodes_per_wavelength: 12.0 }
    }
}

/// Below this density the oscillation is not resolved.
pub const MIN_NODES_PER_WAVELENGTH: f64 = 6.0;

/// Nodes, weights and density values of a source quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceQuadrature {
    nodes: Vec<Point>,
    weights: Vec<f64>,
    values: Vec<[f64; 2]>,
    k_max: f64,
}

fn panels(length: f64, k: f64, options: &QuadratureOptions) -> usize {
    let wavelengths = length * k / (2.0 * PI);
    let need = libm::ceil(wavelengths * options.nodes_per_wavelength / options.order as f64) as usize;
    need.max(1)
}

impl SourceQuadrature {
    fn build(field: &SourceField, k_max: f64, options: QuadratureOptions) -> Result<Self> {
        if options.nodes_per_wavelength < MIN_NODES_PER_WAVELENGTH || options.order == 0 {
            return Err(Error::UnresolvedOscillation { nodes_per_wavelength: options.nodes_per_wavelength });
        }
        if !(k_max > 0.0) || !k_max.is_finite() {
            return Err(Error::Parameters(format!("maximal wavenumber must be positive, got {k_max}")));
        }
        let (gx, gw) = gauss_legendre(options.order);
        let rule = |n: usize| -> (Vec<f64>, Vec<f64>) {
            // composite rule on [0, 1]
            let h = 1.0 / n as f64;
            let mut x = Vec::with_capacity(n * gx.len());
            let mut w = Vec::with_capacity(n * gx.len());
            for p in 0..n {
                for (xi, wi) in gx.iter().zip(&gw) {
                    x.push((p as f64 + 0.5 + 0.5 * xi) * h);
                    w.push(0.5 * h * wi);
                }
            }
            (x, w)
        };
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut values = Vec::new();
        for piece in &field.pieces {
            match piece.shape {
                Shape::Rect { x0, x1, y0, y1 } => {
                    let (ux, uw) = rule(panels(x1 - x0, k_max, &options));
                    let (vx, vw) = rule(panels(y1 - y0, k_max, &options));
                    for (u, wu) in ux.iter().zip(&uw) {
                        for (v, wv) in vx.iter().zip(&vw) {
                            let p = Point::new(x0 + u * (x1 - x0), y0 + v * (y1 - y0));
                            nodes.push(p);
                            weights.push(wu * wv * (x1 - x0) * (y1 - y0));
                            values.push(piece.density.eval(&p));
                        }
                    }
                }
                Shape::Triangle { a, b, c } => {
                    // Duffy map y = a + u(b − a) + uv(c − b), Jacobian u·|det|
                    let det = libm::fabs((b - a).perp(&(c - b)));
                    let diam = [(b - a).norm(), (c - b).norm(), (a - c).norm()].into_iter().fold(0.0, f64::max);
                    let (ux, uw) = rule(panels(diam, k_max, &options));
                    let (vx, vw) = rule(panels(diam, k_max, &options));
                    for (u, wu) in ux.iter().zip(&uw) {
                        for (v, wv) in vx.iter().zip(&vw) {
                            let p = a + (b - a) * *u + (c - b) * (u * v);
                            nodes.push(p);
                            weights.push(wu * wv * u * det);
                            values.push(piece.density.eval(&p));
                        }
                    }
                }
            }
        }
        Ok(Self { nodes, weights, values, k_max })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    /// `∫ e^{−ik x̂·y} e·F(y) dy` with `e = x̂` (p) or `x̂^⊥` (s).
    pub fn integrate(&self, mode: Mode, xhat: Direction, k: f64) -> Result<Complex64> {
        if k > self.k_max * (1.0 + 1e-12) {
            return Err(Error::UnresolvedOscillation {
                nodes_per_wavelength: MIN_NODES_PER_WAVELENGTH * self.k_max / k,
            });
        }
        let e = match mode {
            Mode::P => xhat,
            Mode::S => xhat.perp(),
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for ((y, w), f) in self.nodes.iter().zip(&self.weights).zip(&self.values) {
            let proj = e.x() * f[0] + e.y() * f[1];
            if proj != 0.0 {
                acc += cis(-k * xhat.dot(y)) * (w * proj);
            }
        }
        Ok(acc)
    }

    /// Far field of mode `mode` at circular frequency `omega` in the
    /// material of `params` (whose own frequency is ignored).
    pub fn far_field(&self, mode: Mode, xhat: Direction, omega: f64, params: &WaveParameters) -> Result<Complex64> {
        let p = params.with_omega(omega)?;
        self.integrate(mode, xhat, p.wavenumber(mode))
    }
}

/// `u∞_{F,m}(x̂, ω)` with a quadrature built for this single evaluation.
pub fn source_far_field(
    field: &SourceField,
    mode: Mode,
    xhat: Direction,
    omega: f64,
    params: &WaveParameters,
    options: QuadratureOptions,
) -> Result<Complex64> {
    let p = params.with_omega(omega)?;
    field.quadrature(p.wavenumber(mode), options)?.integrate(mode, xhat, p.wavenumber(mode))
}

/// Far field of the source together with the point source `τ Φ(·, z) q`.
#[allow(clippy::too_many_arguments)]
pub fn combined_source_far_field(
    quad: &SourceQuadrature,
    mode: Mode,
    xhat: Direction,
    omega: f64,
    params: &WaveParameters,
    z: Point,
    q: Direction,
    tau: Complex64,
) -> Result<Complex64> {
    let p = params.with_omega(omega)?;
    Ok(quad.integrate(mode, xhat, p.wavenumber(mode))? + tau * green_far_field(mode, xhat, &z, q, &p))
}

/// `f_x̂(α) = ∫_{y·x̂ + α = 0} x̂·F(y) ds(y)`.
pub fn line_integral_profile(field: &SourceField, xhat: Direction, alpha: f64) -> f64 {
    let base = xhat.vector() * (-alpha);
    let t = xhat.perp().vector();
    let (gx, gw) = gauss_legendre(8);
    let mut acc = 0.0;
    for piece in &field.pieces {
        let Some((s0, s1)) = clip_line(&piece.shape.vertices(), &base, &t) else {
            continue;
        };
        let half = 0.5 * (s1 - s0);
        let mid = 0.5 * (s1 + s0);
        for (x, w) in gx.iter().zip(&gw) {
            let y = base + t * (mid + half * x);
            let f = piece.density.eval(&y);
            acc += w * half * (xhat.x() * f[0] + xhat.y() * f[1]);
        }
    }
    acc
}

/// Parameter interval of `base + s·t` inside a convex polygon.
fn clip_line(vertices: &[Point], base: &Point, t: &Point) -> Option<(f64, f64)> {
    let n = vertices.len();
    let orient = (vertices[1] - vertices[0]).perp(&(vertices[2] - vertices[0])).signum();
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for i in 0..n {
        let a = vertices[i];
        let e = vertices[(i + 1) % n] - a;
        // inside: orient · e × (p − a) ≥ 0, linear in s
        let c0 = orient * e.perp(&(base - a));
        let c1 = orient * e.perp(t);
        if c1.abs() < 1e-300 {
            if c0 < 0.0 {
                return None;
            }
        } else if c1 > 0.0 {
            lo = lo.max(-c0 / c1);
        } else {
            hi = hi.min(-c0 / c1);
        }
    }
    (hi > lo).then_some((lo, hi))
}

/// Frequency nodes `k_j = (j − 1/2)Δk`, `Δk = k_max/N`, `j = 1..N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    n: usize,
    k_max: f64,
}

impl FrequencyGrid {
    pub fn new(n: usize, k_max: f64) -> Result<Self> {
        if n == 0 || !(k_max > 0.0) || !k_max.is_finite() {
            return Err(Error::Parameters(format!("invalid frequency grid N = {n}, k_max = {k_max}")));
        }
        Ok(Self { n, k_max })
    }

    /// `N = 20`, `k_max = 20`.
    pub fn standard() -> Self {
        Self { n: 20, k_max: 20.0 }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    pub fn k_min(&self) -> f64 {
        0.5 * self.step()
    }

    pub fn step(&self) -> f64 {
        self.k_max / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.step()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }
}
