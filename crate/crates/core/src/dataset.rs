//! Modulus-only far-field datasets and their noise models.
//!
//! A dataset is a list of slices, one per strength `τ` and polarization
//! `q` (the `τ = 0` slice does not depend on `q` and is stored once). Each
//! slice is a real matrix whose rows index observation directions and whose
//! columns index incident directions (obstacles) or frequencies (sources).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::obstacle::{FarFieldMatrix, ObstacleSolver};
use crate::source::{FrequencyGrid, SourceQuadrature};
use crate::wave::{direction_grid, green_far_field, Direction, Mode, ModePair, PolarizationSet, WaveParameters};
use crate::{Complex64, Error, Point, Result};

/// Name of the noise generator, recorded in dataset metadata.
pub const NOISE_GENERATOR: &str = "chacha8-word-position";

/// Relative or absolute perturbation of the moduli.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    /// `m (1 + δ e)`.
    Relative,
    /// `max(0, m + δ e)`.
    Absolute,
}

impl NoiseKind {
    pub fn label(self) -> &'static str {
        match self {
            NoiseKind::Relative => "relative",
            NoiseKind::Absolute => "absolute",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub level: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, level: f64, seed: u64) -> Result<Self> {
        if !(level >= 0.0) || !level.is_finite() {
            return Err(Error::Parameters(format!("noise level must be non-negative, got {level}")));
        }
        Ok(Self { kind, level, seed })
    }
}

/// The `index`-th draw of the stream for `seed`, uniform in `(−1, 1)`.
///
/// Draw `i` is the 64-bit word at position `2i` of the ChaCha8 stream keyed
/// by `seed`, so any entry can be perturbed independently of evaluation
/// order. The top 53 bits are mapped to the cell midpoints
/// `((x >> 11) + ½)·2^{−53}` of `(0, 1)`, then affinely to `(−1, 1)`.
pub fn uniform_draw(seed: u64, index: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(2 * index as u128);
    let x = rng.next_u64();
    let u = ((x >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
    2.0 * u - 1.0
}

/// Sequential draws starting at `start`; identical to repeated
/// [`uniform_draw`] calls but without re-keying the generator.
pub fn uniform_draws(seed: u64, start: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(2 * start as u128);
    (0..count)
        .map(|_| {
            let x = rng.next_u64();
            let u = ((x >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
            2.0 * u - 1.0
        })
        .collect()
}

/// What the second axis of every slice indexes.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetAxes {
    /// Observations and incidences both on `θ_l = 2πl/N`.
    Obstacle { n: usize },
    /// Observations `Θ` against the frequency grid.
    Source { observations: Vec<Direction>, frequencies: FrequencyGrid },
}

/// One `(τ, q)` slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub tau: Complex64,
    /// Polarization index; `None` for the `τ = 0` slice.
    pub q: Option<usize>,
    pub values: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaselessDataset {
    pub axes: DatasetAxes,
    pub params: WaveParameters,
    pub z: Point,
    pub polarizations: PolarizationSet,
    pub strengths: Vec<Complex64>,
    pub slices: Vec<Slice>,
    pub noise: Option<NoiseSpec>,
    pub provenance: String,
}

impl PhaselessDataset {
    pub fn observations(&self) -> Vec<Direction> {
        match &self.axes {
            DatasetAxes::Obstacle { n } => direction_grid(*n),
            DatasetAxes::Source { observations, .. } => observations.clone(),
        }
    }

    /// Shear wavenumber for column `c`.
    pub fn column_wavenumber(&self, c: usize) -> Result<f64> {
        match &self.axes {
            DatasetAxes::Obstacle { .. } => Ok(self.params.ks),
            DatasetAxes::Source { frequencies, .. } => Ok(self.params.with_omega(frequencies.node(c))?.ks),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match &self.axes {
            DatasetAxes::Obstacle { n } => (*n, *n),
            DatasetAxes::Source { observations, frequencies } => (observations.len(), frequencies.len()),
        }
    }

    /// The slice for strength `τ` and polarization `q`; the `τ = 0` slice
    /// answers every `q`.
    pub fn slice(&self, tau: Complex64, q: usize) -> Result<&Slice> {
        self.slices
            .iter()
            .find(|s| s.tau == tau && (s.q.is_none() || s.q == Some(q)))
            .ok_or_else(|| Error::MissingSlice(format!("tau = {tau}, q index {q}")))
    }

    pub fn entry_count(&self) -> usize {
        self.slices.iter().map(|s| s.values.len()).sum()
    }

    pub fn max_value(&self) -> f64 {
        self.slices.iter().flat_map(|s| s.values.iter().cloned()).fold(0.0, f64::max)
    }
}

fn tau_list(strengths: &[Complex64]) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::new();
    for &t in strengths {
        if !out.contains(&t) {
            out.push(t);
        }
    }
    out
}

/// Moduli `|w∞_ss(x̂_j, d_l; q, τ)|` for the obstacle together with the
/// point source `τ Φ(·, z) q`, for every requested `τ` and every `q`.
///
/// `u` must be the solver's own far-field matrix. The obstacle's response
/// to the point source is computed once per `q` with `τ = 1` and scaled.
pub fn synthesize_obstacle_dataset(
    solver: &ObstacleSolver,
    u: &FarFieldMatrix,
    z: Point,
    polarizations: &PolarizationSet,
    strengths: &[Complex64],
) -> Result<PhaselessDataset> {
    let n = u.n();
    let params = *solver.params();
    let dirs = direction_grid(n);
    let uss = u.get(ModePair::SS);
    let taus = tau_list(strengths);
    let mut slices = Vec::new();
    if taus.iter().any(|t| *t == Complex64::new(0.0, 0.0)) {
        slices.push(Slice { tau: Complex64::new(0.0, 0.0), q: None, values: uss.map(|v| v.norm()) });
    }
    let one = Complex64::new(1.0, 0.0);
    let nonzero: Vec<Complex64> = taus.iter().cloned().filter(|t| *t != Complex64::new(0.0, 0.0)).collect();
    for (qi, q) in polarizations.directions().iter().enumerate() {
        if nonzero.is_empty() {
            break;
        }
        let v = solver.point_source_far_field(z, *q, one, n)?;
        let direct: Vec<Complex64> =
            dirs.iter().zip(&v.s).map(|(x, vs)| vs + green_far_field(Mode::S, *x, &z, *q, &params)).collect();
        for &tau in &nonzero {
            let values = DMatrix::from_fn(n, n, |j, l| (uss[(j, l)] + tau * direct[j]).norm());
            slices.push(Slice { tau, q: Some(qi), values });
        }
    }
    Ok(PhaselessDataset {
        axes: DatasetAxes::Obstacle { n },
        params,
        z,
        polarizations: polarizations.clone(),
        strengths: taus,
        slices,
        noise: None,
        provenance: format!(
            "obstacle scene [{}], residual {:.3e}",
            solver.scene().boundaries().iter().map(|b| b.tag()).collect::<Vec<_>>().join(","),
            u.residual()
        ),
    })
}

/// Moduli `|u∞_{F,s}(x̂, k_j) + τ e^{−ik_s x̂·z}(q·x̂^⊥)|` over `Θ` and the
/// frequency grid.
pub fn synthesize_source_dataset(
    quad: &SourceQuadrature,
    params: &WaveParameters,
    observations: &[Direction],
    frequencies: FrequencyGrid,
    z: Point,
    polarizations: &PolarizationSet,
    strengths: &[Complex64],
) -> Result<PhaselessDataset> {
    if observations.is_empty() {
        return Err(Error::Shape(String::from("observation set is empty")));
    }
    let (no, nf) = (observations.len(), frequencies.len());
    let mut phased = DMatrix::from_element(no, nf, Complex64::new(0.0, 0.0));
    let mut per_freq = Vec::with_capacity(nf);
    for j in 0..nf {
        let p = params.with_omega(frequencies.node(j))?;
        for (i, x) in observations.iter().enumerate() {
            phased[(i, j)] = quad.integrate(Mode::S, *x, p.ks)?;
        }
        per_freq.push(p);
    }
    let taus = tau_list(strengths);
    let mut slices = Vec::new();
    if taus.contains(&Complex64::new(0.0, 0.0)) {
        slices.push(Slice { tau: Complex64::new(0.0, 0.0), q: None, values: phased.map(|v| v.norm()) });
    }
    for (qi, q) in polarizations.directions().iter().enumerate() {
        for &tau in taus.iter().filter(|t| **t != Complex64::new(0.0, 0.0)) {
            let values = DMatrix::from_fn(no, nf, |i, j| {
                (phased[(i, j)] + tau * green_far_field(Mode::S, observations[i], &z, *q, &per_freq[j])).norm()
            });
            slices.push(Slice { tau, q: Some(qi), values });
        }
    }
    Ok(PhaselessDataset {
        axes: DatasetAxes::Source { observations: observations.to_vec(), frequencies },
        params: *params,
        z,
        polarizations: polarizations.clone(),
        strengths: taus,
        slices,
        noise: None,
        provenance: String::from("source quadrature"),
    })
}

/// Perturbs every modulus with i.i.d. uniform draws addressed by the
/// global entry index (slices in order, row-major inside a slice).
pub fn apply_noise(ds: &PhaselessDataset, spec: NoiseSpec) -> PhaselessDataset {
    let mut out = ds.clone();
    let mut offset: u64 = 0;
    for slice in &mut out.slices {
        let (rows, cols) = slice.values.shape();
        let draws = uniform_draws(spec.seed, offset, rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let e = draws[r * cols + c];
                let m = slice.values[(r, c)];
                slice.values[(r, c)] = match spec.kind {
                    NoiseKind::Relative => m * (1.0 + spec.level * e),
                    NoiseKind::Absolute => (m + spec.level * e).max(0.0),
                };
            }
        }
        offset += (rows * cols) as u64;
    }
    out.noise = Some(spec);
    out
}
