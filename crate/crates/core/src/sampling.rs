//! Direct sampling indicators on rectangular grids.
//!
//! Obstacle indicators work on the shear-shear far field sampled on the
//! grid `θ_j = 2πj/N` (phased: `G`, `A`, `I₂`, `I₃`; phaseless: `𝔉`,
//! `I_{z₀}` and its tilde variant). Source indicators work on shear far
//! fields over observation directions `Θ` and a frequency grid (phased:
//! `H`, `I^Θ_S`; phaseless: `𝒦`, `I^Θ_{z₀,S}`). Circle integrals use the
//! equispaced trapezoidal rule with weight `2π/N`, frequency integrals the
//! midpoint rule with weight `Δk`.
//!
//! Every indicator exposes `value(&p)` for a single sampling point, so grid
//! evaluation is an embarrassingly parallel map.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;

use crate::dataset::{DatasetAxes, PhaselessDataset};
use crate::source::FrequencyGrid;
use crate::wave::{arc_members, cis, direction_grid, Direction, Mode, PolarizationSet, WaveParameters};
use crate::{Complex64, Error, Point, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn sq(x: f64) -> f64 {
    x * x
}

/// Equispaced sampling points `x_min + i·h`, `y_min + k·h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingGrid {
    pub x_min: f64,
    pub y_min: f64,
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
}

/// Default grid spacing.
pub const DEFAULT_SPACING: f64 = 0.05;

impl SamplingGrid {
    /// Grid covering `[x_min, x_max] × [y_min, y_max]`; the far edges are
    /// included when they fall on the lattice up to rounding.
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) || !(x_max >= x_min) || !(y_max >= y_min) {
            return Err(Error::Parameters(format!(
                "invalid sampling grid [{x_min}, {x_max}] x [{y_min}, {y_max}] with spacing {spacing}"
            )));
        }
        let count = |a: f64, b: f64| libm::floor((b - a) / spacing + 1e-9) as usize + 1;
        Ok(Self { x_min, y_min, nx: count(x_min, x_max), ny: count(y_min, y_max), spacing })
    }

    /// Square grid of half-width `h·half_points` centred at `c`; symmetric
    /// under `p ↦ 2c − p`.
    pub fn centered(c: Point, half_points: usize, spacing: f64) -> Self {
        let w = spacing * half_points as f64;
        Self { x_min: c.x - w, y_min: c.y - w, nx: 2 * half_points + 1, ny: 2 * half_points + 1, spacing }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x_max(&self) -> f64 {
        self.x_min + (self.nx - 1) as f64 * self.spacing
    }

    pub fn y_max(&self) -> f64 {
        self.y_min + (self.ny - 1) as f64 * self.spacing
    }

    /// Point number `k` in row-major order (`x` fastest).
    pub fn point(&self, k: usize) -> Point {
        let (ix, iy) = (k % self.nx, k / self.nx);
        Point::new(self.x_min + ix as f64 * self.spacing, self.y_min + iy as f64 * self.spacing)
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    /// Sequential evaluation of `f` at every grid point.
    pub fn evaluate<F: Fn(&Point) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len()).map(|k| f(&self.point(k))).collect()
    }
}

/// Indicator values over a sampling grid with a description of how they
/// were produced.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorField {
    pub grid: SamplingGrid,
    pub values: Vec<f64>,
    pub name: String,
    pub parameters: Vec<(String, String)>,
}

impl IndicatorField {
    pub fn new(grid: SamplingGrid, values: Vec<f64>, name: &str) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!("{} values for a grid of {} points", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape(format!("indicator {name} has non-finite values")));
        }
        Ok(Self { grid, values, name: String::from(name), parameters: Vec::new() })
    }

    pub fn with_parameter(mut self, key: &str, value: String) -> Self {
        self.parameters.push((String::from(key), value));
        self
    }

    pub fn value_at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.grid.nx + ix]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// First grid index attaining the maximum.
    pub fn argmax(&self) -> usize {
        let m = self.max();
        self.values.iter().position(|&v| v == m).unwrap_or(0)
    }

    pub fn argmax_point(&self) -> Point {
        self.grid.point(self.argmax())
    }

    /// Grid points carrying the largest `fraction` of values (at least one).
    pub fn top_fraction(&self, fraction: f64) -> Vec<Point> {
        let k = (libm::ceil(fraction * self.values.len() as f64) as usize).clamp(1, self.values.len());
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[b].total_cmp(&self.values[a]).then(a.cmp(&b)));
        idx.truncate(k);
        idx.into_iter().map(|i| self.grid.point(i)).collect()
    }

    /// Strict local maxima over the 8-neighbourhood, strongest first, with
    /// weaker maxima closer than `separation` to a stronger one dropped.
    pub fn local_maxima(&self, separation: f64) -> Vec<(Point, f64)> {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut peaks = Vec::new();
        for iy in 0..ny {
            for ix in 0..nx {
                let v = self.value_at(ix, iy);
                let mut is_peak = true;
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let (jx, jy) = (ix as i64 + dx, iy as i64 + dy);
                        if jx < 0 || jy < 0 || jx >= nx as i64 || jy >= ny as i64 {
                            continue;
                        }
                        if self.value_at(jx as usize, jy as usize) >= v {
                            is_peak = false;
                        }
                    }
                }
                if is_peak {
                    peaks.push((self.grid.point(iy * nx + ix), v));
                }
            }
        }
        peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut kept: Vec<(Point, f64)> = Vec::new();
        for (p, v) in peaks {
            if kept.iter().all(|(q, _)| (p - q).norm() >= separation) {
                kept.push((p, v));
            }
        }
        kept
    }
}

/// How `I₂` and `I₃` combine the polarizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Combine {
    #[default]
    Sum,
    Max,
}

impl Combine {
    fn fold(self, values: impl Iterator<Item = f64>) -> f64 {
        match self {
            Combine::Sum => values.sum(),
            Combine::Max => values.fold(0.0, f64::max),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Combine::Sum => "sum",
            Combine::Max => "max",
        }
    }
}

/// Phased obstacle indicators from `u∞_ss(x̂_j, d_l)` (rows `j`, columns
/// `l`) on the grid `θ = 2πj/N`.
#[derive(Debug, Clone)]
pub struct ObstacleSampler {
    u: DMatrix<Complex64>,
    ks: f64,
    dirs: Vec<Direction>,
    /// `(q·x̂_j^⊥) · 2π/N` per polarization.
    proj: Vec<Vec<f64>>,
    combine: Combine,
}

impl ObstacleSampler {
    pub fn new(u_ss: DMatrix<Complex64>, params: &WaveParameters, polarizations: &PolarizationSet, combine: Combine) -> Result<Self> {
        let n = u_ss.nrows();
        if u_ss.ncols() != n || n == 0 {
            return Err(Error::Shape(format!("far field must be square, got {}x{}", u_ss.nrows(), u_ss.ncols())));
        }
        let dirs = direction_grid(n);
        let w = 2.0 * PI / n as f64;
        let proj = polarizations
            .directions()
            .iter()
            .map(|q| dirs.iter().map(|x| q.dot_dir(&x.perp()) * w).collect())
            .collect();
        Ok(Self { u: u_ss, ks: params.ks, dirs, proj, combine })
    }

    pub fn n(&self) -> usize {
        self.dirs.len()
    }

    fn phases(&self, p: &Point) -> Vec<Complex64> {
        self.dirs.iter().map(|x| cis(self.ks * x.dot(p))).collect()
    }

    fn g_with(&self, e: &[Complex64], l: usize, qi: usize) -> Complex64 {
        let col = self.u.column(l);
        let pr = &self.proj[qi];
        let mut acc = ZERO;
        for j in 0..e.len() {
            acc += col[j] * e[j] * pr[j];
        }
        acc
    }

    /// `G(p, d_l, q) = ∫ u∞_ss(x̂, d_l) e^{ik_s x̂·p} (q·x̂^⊥) ds(x̂)`.
    pub fn g(&self, p: &Point, l: usize, qi: usize) -> Complex64 {
        self.g_with(&self.phases(p), l, qi)
    }

    fn a_with(&self, e: &[Complex64], qi: usize) -> Complex64 {
        let pr = &self.proj[qi];
        let n = e.len();
        let mut acc = ZERO;
        for l in 0..n {
            if pr[l] == 0.0 {
                continue;
            }
            acc += self.g_with(e, l, qi) * e[l].conj() * pr[l];
        }
        acc
    }

    /// `A(p, q) = ∫ G(p, d, q) e^{−ik_s d·p} (q·d^⊥) ds(d)`.
    pub fn a(&self, p: &Point, qi: usize) -> Complex64 {
        self.a_with(&self.phases(p), qi)
    }

    /// `I₂(p)`: polarizations combined over `|A(p, q)|`.
    pub fn i2(&self, p: &Point) -> f64 {
        let e = self.phases(p);
        self.combine.fold((0..self.proj.len()).map(|qi| self.a_with(&e, qi).norm()))
    }

    /// `I₃(p, d_l)`: polarizations combined over `|G(p, d_l, q)|`.
    pub fn i3(&self, p: &Point, l: usize) -> f64 {
        let e = self.phases(p);
        self.combine.fold((0..self.proj.len()).map(|qi| self.g_with(&e, l, qi).norm()))
    }
}

/// `𝔉_{z₀}(x̂, d, q) = |w∞(τ₁)|² − |u∞_ss|² − |τ₁ q·x̂^⊥|²` per polarization
/// as `N × N` matrices.
pub fn indicator_f_matrices(ds: &PhaselessDataset, tau1: Complex64) -> Result<Vec<DMatrix<f64>>> {
    let n = match ds.axes {
        DatasetAxes::Obstacle { n } => n,
        _ => return Err(Error::Shape(String::from("obstacle indicators need an obstacle dataset"))),
    };
    let dirs = direction_grid(n);
    let zero = ds.slice(ZERO, 0)?;
    if zero.tau != ZERO {
        return Err(Error::MissingSlice(String::from("tau = 0")));
    }
    let mut out = Vec::new();
    for (qi, q) in ds.polarizations.directions().iter().enumerate() {
        let w = ds.slice(tau1, qi)?;
        out.push(DMatrix::from_fn(n, n, |j, l| {
            let t = tau1.norm() * q.dot_dir(&dirs[j].perp());
            sq(w.values[(j, l)]) - sq(zero.values[(j, l)]) - t * t
        }));
    }
    Ok(out)
}

/// Phaseless obstacle indicators `I_{z₀}(p, d)`, `I_{z₀}(p)` and the tilde
/// variant, built from the `τ = 0` and `τ = τ₁` slices of a dataset.
#[derive(Debug, Clone)]
pub struct PhaselessObstacleSampler {
    f: Vec<DMatrix<f64>>,
    ks: f64,
    z0: Point,
    dirs: Vec<Direction>,
    weight: f64,
}

impl PhaselessObstacleSampler {
    pub fn new(ds: &PhaselessDataset, tau1: Complex64) -> Result<Self> {
        let f = indicator_f_matrices(ds, tau1)?;
        let n = f[0].nrows();
        Ok(Self { f, ks: ds.params.ks, z0: ds.z, dirs: direction_grid(n), weight: 2.0 * PI / n as f64 })
    }

    pub fn n(&self) -> usize {
        self.dirs.len()
    }

    pub fn f_value(&self, j: usize, l: usize, qi: usize) -> f64 {
        self.f[qi][(j, l)]
    }

    fn cosines(&self, p: &Point) -> Vec<f64> {
        let d = p - self.z0;
        self.dirs.iter().map(|x| libm::cos(self.ks * x.dot(&d))).collect()
    }

    fn column_sum(&self, qi: usize, l: usize, c: &[f64]) -> f64 {
        let col = self.f[qi].column(l);
        let mut acc = 0.0;
        for j in 0..c.len() {
            acc += col[j] * c[j];
        }
        acc * self.weight
    }

    /// `I_{z₀}(p, d_l) = Σ_q |∫ 𝔉 cos(k_s x̂·(p − z₀)) ds(x̂)|²`.
    pub fn iz0_d(&self, p: &Point, l: usize) -> f64 {
        let c = self.cosines(p);
        (0..self.f.len()).map(|qi| sq(self.column_sum(qi, l, &c))).sum()
    }

    /// `I_{z₀}(p) = ∫ I_{z₀}(p, d) ds(d)`.
    pub fn iz0(&self, p: &Point) -> f64 {
        let c = self.cosines(p);
        let mut acc = 0.0;
        for l in 0..self.dirs.len() {
            for qi in 0..self.f.len() {
                acc += sq(self.column_sum(qi, l, &c));
            }
        }
        acc * self.weight
    }

    /// `Ĩ_{z₀}(p, d_l)` with cosine argument `k_s x̂·(p − z₀) − k_s p·d_l`.
    pub fn iz0_tilde_d(&self, p: &Point, l: usize) -> f64 {
        let d = p - self.z0;
        let shift = self.ks * self.dirs[l].dot(p);
        let c: Vec<f64> = self.dirs.iter().map(|x| libm::cos(self.ks * x.dot(&d) - shift)).collect();
        (0..self.f.len()).map(|qi| sq(self.column_sum(qi, l, &c))).sum()
    }
}

/// Shear far field of a source over `Θ` (rows) and a frequency grid
/// (columns), with the shear wavenumber of each column.
#[derive(Debug, Clone)]
pub struct SourceSampler {
    u: DMatrix<Complex64>,
    observations: Vec<Direction>,
    ks: Vec<f64>,
    step: f64,
}

impl SourceSampler {
    pub fn new(u: DMatrix<Complex64>, observations: &[Direction], frequencies: FrequencyGrid, params: &WaveParameters) -> Result<Self> {
        if u.nrows() != observations.len() || u.ncols() != frequencies.len() {
            return Err(Error::Shape(format!(
                "far field is {}x{}, expected {}x{}",
                u.nrows(),
                u.ncols(),
                observations.len(),
                frequencies.len()
            )));
        }
        let ks = frequencies.nodes().iter().map(|&w| params.with_omega(w).map(|p| p.ks)).collect::<Result<_>>()?;
        Ok(Self { u, observations: observations.to_vec(), ks, step: frequencies.step() })
    }

    /// `H(p, x̂_i) = ∫ u∞_{F,s}(x̂_i, ω) e^{ik_s x̂_i·p} dω`.
    pub fn h(&self, p: &Point, i: usize) -> Complex64 {
        let t = self.observations[i].dot(p);
        let row = self.u.row(i);
        let mut acc = ZERO;
        for (j, k) in self.ks.iter().enumerate() {
            acc += row[j] * cis(k * t);
        }
        acc * self.step
    }

    /// `I^Θ_S(p) = Σ_{x̂∈Θ} |H(p, x̂)|`.
    pub fn itheta(&self, p: &Point) -> f64 {
        (0..self.observations.len()).map(|i| self.h(p, i).norm()).sum()
    }
}

/// Phaseless source indicator `I^Θ_{z₀,S}` from the `τ = 0` and `τ = τ₁`
/// slices of a source dataset.
#[derive(Debug, Clone)]
pub struct PhaselessSourceSampler {
    /// `(observation index, 𝒦 over frequencies)` per qualifying pair.
    terms: Vec<(usize, Vec<f64>)>,
    observations: Vec<Direction>,
    ks: Vec<f64>,
    step: f64,
    z0: Point,
    skipped: Vec<usize>,
}

impl PhaselessSourceSampler {
    /// Uses every `(x̂, q)` with `q·x̂^⊥ ≥ 1/2`; observations that no
    /// polarization covers are listed in [`skipped`](Self::skipped).
    pub fn new(ds: &PhaselessDataset, tau1: Complex64) -> Result<Self> {
        let (observations, frequencies) = match &ds.axes {
            DatasetAxes::Source { observations, frequencies } => (observations.clone(), *frequencies),
            _ => return Err(Error::Shape(String::from("source indicators need a source dataset"))),
        };
        let zero = ds.slice(ZERO, 0)?;
        if zero.tau != ZERO {
            return Err(Error::MissingSlice(String::from("tau = 0")));
        }
        let mut terms = Vec::new();
        let mut skipped = Vec::new();
        for (i, x) in observations.iter().enumerate() {
            let members = arc_members(*x, Mode::S, &ds.polarizations);
            if members.is_empty() {
                skipped.push(i);
            }
            for qi in members {
                let w = ds.slice(tau1, qi)?;
                let t = tau1.norm() * ds.polarizations.directions()[qi].dot_dir(&x.perp());
                let k = (0..frequencies.len())
                    .map(|j| sq(w.values[(i, j)]) - sq(zero.values[(i, j)]) - t * t)
                    .collect();
                terms.push((i, k));
            }
        }
        let ks = frequencies.nodes().iter().map(|&w| ds.params.with_omega(w).map(|p| p.ks)).collect::<Result<_>>()?;
        Ok(Self { terms, observations, ks, step: frequencies.step(), z0: ds.z, skipped })
    }

    pub fn skipped(&self) -> &[usize] {
        &self.skipped
    }

    pub fn pair_count(&self) -> usize {
        self.terms.len()
    }

    /// `𝒦` values of pair `t` over the frequency grid.
    pub fn k_values(&self, t: usize) -> (usize, &[f64]) {
        (self.terms[t].0, &self.terms[t].1)
    }

    /// `I^Θ_{z₀,S}(p) = Σ |∫ 𝒦 cos(k_s x̂·(p − z₀)) dω|`.
    pub fn value(&self, p: &Point) -> f64 {
        let d = p - self.z0;
        let mut total = 0.0;
        for (i, k) in &self.terms {
            let t = self.observations[*i].dot(&d);
            let mut acc = 0.0;
            for (j, kj) in self.ks.iter().enumerate() {
                acc += k[j] * libm::cos(kj * t);
            }
            total += libm::fabs(acc * self.step);
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point;

    #[test]
    fn grid_layout() {
        let g = SamplingGrid::new(-1.0, 1.0, 0.0, 0.5, 0.05).unwrap();
        assert_eq!(g.nx, 41);
        assert_eq!(g.ny, 11);
        assert_eq!(g.point(0), point(-1.0, 0.0));
        assert!((g.point(g.len() - 1) - point(1.0, 0.5)).norm() < 1e-12);
        let c = SamplingGrid::centered(point(12.0, 12.0), 10, 0.05);
        for k in 0..c.len() {
            let mirror = c.len() - 1 - k;
            assert!((c.point(k) + c.point(mirror) - point(24.0, 24.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn field_queries() {
        let g = SamplingGrid::new(0.0, 1.0, 0.0, 1.0, 0.25).unwrap();
        let vals = g.evaluate(|p| -((p.x - 0.5).powi(2) + (p.y - 0.75).powi(2)));
        let f = IndicatorField::new(g, vals, "bump").unwrap();
        assert_eq!(f.argmax_point(), point(0.5, 0.75));
        assert_eq!(f.top_fraction(0.0)[0], point(0.5, 0.75));
        assert_eq!(f.local_maxima(0.1).len(), 1);
    }
}
