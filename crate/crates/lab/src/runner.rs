//! Turning a scenario into files.
//!
//! A run writes into `<out_root>/<scenario name>/`:
//!
//! * `far_field.csv`: phased far fields of the forward problem;
//! * one subdirectory per `(z0, noise level)` holding the phaseless slices,
//!   retrieved fields, overlays and indicator grids;
//! * `manifest.toml`: every file written, the resolved scenario, solver and
//!   retrieval diagnostics, indicator summaries and the wall time.
//!
//! Everything except the `wall_time_s` line depends only on the scenario and
//! the seed, not on the number of workers.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use elastic_phaseless::dataset::{
    apply_noise, synthesize_obstacle_dataset, synthesize_source_dataset, NoiseKind, NoiseSpec, PhaselessDataset,
    NOISE_GENERATOR,
};
use elastic_phaseless::nalgebra::DMatrix;
use elastic_phaseless::obstacle::{ObstacleSolver, SolverOptions};
use elastic_phaseless::retrieval::{retrieve_obstacle_far_field, retrieve_source_far_field, RetrievedField};
use elastic_phaseless::sampling::{
    IndicatorField, ObstacleSampler, PhaselessObstacleSampler, PhaselessSourceSampler, SamplingGrid, SourceSampler,
};
use elastic_phaseless::source::{FrequencyGrid, QuadratureOptions};
use elastic_phaseless::wave::{direction_grid, Direction, Mode, ModePair, WaveParameters};
use elastic_phaseless::{Complex64, Point};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, IndicatorKind, NoiseKindSpec, Scenario, Tier};
use crate::formats;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numeric(#[from] elastic_phaseless::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_root: PathBuf,
    /// Replaces the scenario's noise seed.
    pub seed: Option<u64>,
    /// Replaces the scenario's noise levels with this single level.
    pub noise: Option<f64>,
    pub tier: Tier,
    /// Threads used for indicator grids; `0` lets rayon decide.
    pub workers: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { out_root: PathBuf::from("eplab-out"), seed: None, noise: None, tier: Tier::Ci, workers: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    /// Scenario output directory.
    pub dir: PathBuf,
    /// Files written, relative to `dir`, manifest last.
    pub files: Vec<PathBuf>,
    /// The solver reported a degraded solve.
    pub degraded: bool,
    pub warnings: Vec<String>,
    pub runs: Vec<RunSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverSummary {
    pub collocation_points: usize,
    pub source_points: usize,
    pub singular_values_kept: usize,
    pub singular_values_total: usize,
    pub condition: f64,
    pub boundary_residual: f64,
    pub far_field_residual: f64,
    pub degraded: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RetrievalSummary {
    pub clamped: usize,
    pub inconsistent: usize,
    pub missing_directions: usize,
    /// `‖retrieved − exact‖ / ‖exact‖` over the covered directions.
    pub relative_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IndicatorSummary {
    pub name: String,
    pub file: String,
    pub min: f64,
    pub max: f64,
    pub argmax: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub dir: String,
    pub z0: [f64; 2],
    pub noise_level: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retrieval: Option<RetrievalSummary>,
    pub indicators: Vec<IndicatorSummary>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    scenario: &'a str,
    tier: &'static str,
    seed: u64,
    noise_kind: &'static str,
    noise_generator: &'static str,
    degraded: bool,
    warnings: &'a [String],
    files: Vec<String>,
    wall_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    solver: Option<SolverSummary>,
    runs: &'a [RunSummary],
    resolved: &'a Scenario,
}

/// Output collector rooted at the scenario directory.
struct Sink {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Sink {
    fn path(&self, rel: &Path) -> PathBuf {
        self.dir.join(rel)
    }

    fn io<T>(&self, rel: &Path, r: io::Result<T>) -> Result<T, RunError> {
        r.map_err(|source| RunError::Io { path: self.path(rel), source })
    }

    fn mkdir(&self, rel: &Path) -> Result<(), RunError> {
        self.io(rel, fs::create_dir_all(self.path(rel)))
    }

    fn write(&mut self, rel: PathBuf, f: impl FnOnce(&Path) -> io::Result<()>) -> Result<(), RunError> {
        let full = self.path(&rel);
        self.io(&rel, f(&full))?;
        self.files.push(rel);
        Ok(())
    }
}

fn run_dir_name(z: Point, level: f64) -> String {
    format!("z{}_{}-delta{}", z.x, z.y, level)
}

fn relative_error(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, rows: &[usize]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for &i in rows {
        for j in 0..b.ncols() {
            num += (a[(i, j)] - b[(i, j)]).norm_sqr();
            den += b[(i, j)].norm_sqr();
        }
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        0.0
    }
}

fn retrieval_summary(r: &RetrievedField, truth: &DMatrix<Complex64>) -> RetrievalSummary {
    let covered: Vec<usize> = (0..truth.nrows()).filter(|i| r.polarization[*i].is_some()).collect();
    RetrievalSummary {
        clamped: r.clamped,
        inconsistent: r.inconsistent,
        missing_directions: truth.nrows() - covered.len(),
        relative_error: relative_error(&r.values, truth, &covered),
    }
}

/// What the forward problem produced, shared by every run of a scenario.
enum Forward {
    Obstacle {
        solver: Box<ObstacleSolver>,
        u: elastic_phaseless::obstacle::FarFieldMatrix,
    },
    Source {
        quad: elastic_phaseless::source::SourceQuadrature,
        observations: Vec<Direction>,
        frequencies: FrequencyGrid,
        /// Exact shear far field over observations and frequencies.
        phased: DMatrix<Complex64>,
    },
}

impl Forward {
    fn exact_shear(&self) -> &DMatrix<Complex64> {
        match self {
            Forward::Obstacle { u, .. } => u.get(ModePair::SS),
            Forward::Source { phased, .. } => phased,
        }
    }
}

struct Runner<'a> {
    scenario: &'a Scenario,
    params: WaveParameters,
    grid: SamplingGrid,
    pool: rayon::ThreadPool,
    forward: Forward,
    sink: Sink,
    warnings: Vec<String>,
}

/// Runs a scenario end to end and writes its bundle.
pub fn run_scenario(scenario: &Scenario, options: &RunOptions) -> Result<RunReport, RunError> {
    let started = Instant::now();
    let mut s = scenario.clone();
    s.apply_tier(options.tier);
    if let Some(level) = options.noise {
        s.override_noise(level);
    }
    if let Some(seed) = options.seed {
        s.noise.seed = seed;
    }
    s.validate().map_err(|(key, message)| ConfigError { line: None, message: format!("{key}: {message}") })?;

    let dir = options.out_root.join(&s.name);
    if dir.join("manifest.toml").exists() {
        fs::remove_dir_all(&dir).map_err(|source| RunError::Io { path: dir.clone(), source })?;
    }
    let sink = Sink { dir: dir.clone(), files: Vec::new() };
    sink.mkdir(Path::new(""))?;

    let params = s.params()?;
    let grid = s.sampling_grid().map_err(|message| ConfigError { line: None, message })?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(options.workers).build()?;
    let mut warnings = Vec::new();
    let forward = build_forward(&s, params, &mut warnings)?;
    let mut runner = Runner { scenario: &s, params, grid, pool, forward, sink, warnings };
    runner.write_forward()?;

    let mut runs = Vec::new();
    for z in s.z0() {
        let clean = runner.dataset(z)?;
        for &level in &s.noise.levels {
            runs.push(runner.run_one(&clean, z, level)?);
        }
    }

    let solver = match &runner.forward {
        Forward::Obstacle { solver, u } => {
            let d = solver.diagnostics();
            Some(SolverSummary {
                collocation_points: d.collocation_points,
                source_points: d.source_points,
                singular_values_kept: d.singular_values_kept,
                singular_values_total: d.singular_values_total,
                condition: d.condition,
                boundary_residual: d.boundary_residual,
                far_field_residual: u.residual(),
                degraded: d.degraded,
            })
        }
        Forward::Source { .. } => None,
    };
    let degraded = solver.as_ref().is_some_and(|d| d.degraded);
    let Runner { mut sink, warnings, .. } = runner;
    let manifest = Manifest {
        scenario: &s.name,
        tier: match options.tier {
            Tier::Ci => "ci",
            Tier::Paper => "paper",
        },
        seed: s.noise.seed,
        noise_kind: match s.noise.kind {
            NoiseKindSpec::Relative => "relative",
            NoiseKindSpec::Absolute => "absolute",
        },
        noise_generator: NOISE_GENERATOR,
        degraded,
        warnings: &warnings,
        files: sink.files.iter().map(|p| p.to_string_lossy().replace('\\', "/")).collect(),
        wall_time_s: started.elapsed().as_secs_f64(),
        solver,
        runs: &runs,
        resolved: &s,
    };
    let text = toml::to_string_pretty(&manifest).expect("manifest serializes");
    sink.write(PathBuf::from("manifest.toml"), |p| fs::write(p, text))?;
    Ok(RunReport { dir, files: sink.files, degraded, warnings, runs })
}

fn build_forward(s: &Scenario, params: WaveParameters, warnings: &mut Vec<String>) -> Result<Forward, RunError> {
    if let Some(o) = &s.obstacle {
        let scene = s.scene(params).map_err(|message| ConfigError { line: None, message })?;
        let solver = ObstacleSolver::build(&scene, SolverOptions::default())?;
        warnings.extend(solver.diagnostics().warnings.iter().cloned());
        let u = solver.plane_far_fields(o.directions)?;
        return Ok(Forward::Obstacle { solver: Box::new(solver), u });
    }
    let field = s.source_field().expect("validated source scenario");
    let frequencies = s.frequency_grid().expect("validated frequency grid");
    let top = params.with_omega(frequencies.k_max())?;
    let quad = field.quadrature(top.kp.max(top.ks), QuadratureOptions::default())?;
    let observations = s.observations();
    let mut phased = DMatrix::from_element(observations.len(), frequencies.len(), Complex64::new(0.0, 0.0));
    for j in 0..frequencies.len() {
        for (i, x) in observations.iter().enumerate() {
            phased[(i, j)] = quad.far_field(Mode::S, *x, frequencies.node(j), &params)?;
        }
    }
    Ok(Forward::Source { quad, observations, frequencies, phased })
}

impl Runner<'_> {
    fn write_forward(&mut self) -> Result<(), RunError> {
        if !self.scenario.output.far_field {
            return Ok(());
        }
        match &self.forward {
            Forward::Obstacle { u, .. } => {
                let u = u.clone();
                self.sink.write(PathBuf::from("far_field.csv"), |p| formats::write_far_field(p, &u))
            }
            Forward::Source { quad, observations, frequencies, phased } => {
                let mut p_mode = DMatrix::from_element(observations.len(), frequencies.len(), Complex64::new(0.0, 0.0));
                for j in 0..frequencies.len() {
                    for (i, x) in observations.iter().enumerate() {
                        p_mode[(i, j)] = quad.far_field(Mode::P, *x, frequencies.node(j), &self.params)?;
                    }
                }
                let s_mode = phased.clone();
                self.sink.write(PathBuf::from("far_field.csv"), |p| {
                    formats::write_source_far_field(p, &[(Mode::P, &p_mode), (Mode::S, &s_mode)])
                })
            }
        }
    }

    /// Noiseless dataset for source point `z`.
    fn dataset(&self, z: Point) -> Result<PhaselessDataset, RunError> {
        let s = self.scenario;
        let mut taus = vec![Complex64::new(0.0, 0.0), s.indicator_tau()];
        if s.wants_retrieval() {
            taus.extend(s.strengths().map_err(|message| ConfigError { line: None, message })?.tau);
        }
        let pols = s.polarizations();
        Ok(match &self.forward {
            Forward::Obstacle { solver, u } => synthesize_obstacle_dataset(solver, u, z, &pols, &taus)?,
            Forward::Source { quad, observations, frequencies, .. } => {
                synthesize_source_dataset(quad, &self.params, observations, *frequencies, z, &pols, &taus)?
            }
        })
    }

    fn evaluate(&self, f: impl Fn(&Point) -> f64 + Sync) -> Vec<f64> {
        let grid = self.grid;
        self.pool.install(|| (0..grid.len()).into_par_iter().map(|k| f(&grid.point(k))).collect())
    }

    fn run_one(&mut self, clean: &PhaselessDataset, z: Point, level: f64) -> Result<RunSummary, RunError> {
        let s = self.scenario;
        let name = run_dir_name(z, level);
        let rel = PathBuf::from(&name);
        self.sink.mkdir(&rel)?;
        let ds = if level > 0.0 {
            let kind = match s.noise.kind {
                NoiseKindSpec::Relative => NoiseKind::Relative,
                NoiseKindSpec::Absolute => NoiseKind::Absolute,
            };
            apply_noise(clean, NoiseSpec::new(kind, level, s.noise.seed)?)
        } else {
            clean.clone()
        };
        let second = formats::second_axis(&ds);

        if s.output.phaseless {
            for (k, slice) in ds.slices.iter().enumerate() {
                let file = rel.join(format!("{}.csv", formats::slice_stem(k, slice)));
                self.sink.write(file, |p| formats::write_slice(p, slice, second))?;
            }
            let meta = formats::dataset_meta(&ds);
            self.sink.write(rel.join("phaseless.meta"), |p| formats::write_meta(p, &meta))?;
        }

        let mut retrieval = None;
        let mut retrieved = None;
        if s.wants_retrieval() {
            let strengths = s.strengths().map_err(|message| ConfigError { line: None, message })?;
            let r = match self.forward {
                Forward::Obstacle { .. } => retrieve_obstacle_far_field(&ds, &strengths)?,
                Forward::Source { .. } => retrieve_source_far_field(&ds, &strengths)?,
            };
            let missing = r.missing();
            if !missing.is_empty() {
                self.warnings.push(format!("{name}: no polarization covers observation(s) {missing:?}"));
            }
            let meta = formats::retrieved_meta(&r, &ds);
            self.sink.write(rel.join("retrieved_ss.csv"), |p| formats::write_retrieved(p, &r, second))?;
            self.sink.write(rel.join("retrieved_ss.meta"), |p| formats::write_meta(p, &meta))?;
            if let Some(deg) = s.output.overlay_deg {
                self.write_overlay(&rel, &r, deg)?;
            }
            retrieval = Some(retrieval_summary(&r, self.forward.exact_shear()));
            retrieved = Some(r);
        }

        let mut indicators = Vec::new();
        for &kind in &s.output.indicators {
            let field = self.indicator(kind, &ds, retrieved.as_ref())?;
            let field = field
                .with_parameter("z0", format!("{},{}", z.x, z.y))
                .with_parameter("noise_level", level.to_string())
                .with_parameter("seed", s.noise.seed.to_string());
            let stem = rel.join(kind.label());
            let csv = stem.with_extension("csv");
            self.sink.write(csv.clone(), |p| formats::write_indicator_csv(p, &field))?;
            if s.output.pgm {
                self.sink.write(stem.with_extension("pgm"), |p| formats::write_pgm(p, &field))?;
            }
            let meta = formats::indicator_meta(&field);
            self.sink.write(stem.with_extension("meta"), |p| formats::write_meta(p, &meta))?;
            let a = field.argmax_point();
            indicators.push(IndicatorSummary {
                name: kind.label().to_string(),
                file: csv.to_string_lossy().replace('\\', "/"),
                min: field.min(),
                max: field.max(),
                argmax: [a.x, a.y],
            });
        }
        Ok(RunSummary { dir: name, z0: [z.x, z.y], noise_level: level, retrieval, indicators })
    }

    fn write_overlay(&mut self, rel: &Path, r: &RetrievedField, deg: f64) -> Result<(), RunError> {
        let s = self.scenario;
        let exact = self.forward.exact_shear();
        let (angles, truth, got): (Vec<f64>, Vec<Complex64>, Vec<Complex64>) = match self.forward {
            // a fixed incidence, all observation directions
            Forward::Obstacle { ref u, .. } => {
                let l = s.direction_index(deg).map_err(|message| ConfigError { line: None, message })?;
                let angles = direction_grid(u.n()).iter().map(|d| d.angle()).collect();
                (angles, exact.column(l).iter().cloned().collect(), r.values.column(l).iter().cloned().collect())
            }
            // a fixed observation direction, all frequencies
            Forward::Source { ref frequencies, .. } => {
                let i = s.observation_index(deg).map_err(|message| ConfigError { line: None, message })?;
                (frequencies.nodes(), exact.row(i).iter().cloned().collect(), r.values.row(i).iter().cloned().collect())
            }
        };
        self.sink.write(rel.join("overlay.csv"), |p| formats::write_overlay(p, &angles, &truth, &got))
    }

    fn indicator(
        &mut self,
        kind: IndicatorKind,
        ds: &PhaselessDataset,
        retrieved: Option<&RetrievedField>,
    ) -> Result<IndicatorField, RunError> {
        let s = self.scenario;
        let tau = s.indicator_tau();
        let pols = s.polarizations();
        let incidence = || s.direction_index(s.output.incidence_deg).map_err(|message| ConfigError { line: None, message });
        let retrieved_values = || retrieved.expect("retrieval runs for retrieved indicators").values.clone();
        let values = match kind {
            IndicatorKind::Iz0 | IndicatorKind::Iz0D | IndicatorKind::Iz0TildeD => {
                let sampler = PhaselessObstacleSampler::new(ds, tau)?;
                match kind {
                    IndicatorKind::Iz0 => self.evaluate(|p| sampler.iz0(p)),
                    IndicatorKind::Iz0D => {
                        let l = incidence()?;
                        self.evaluate(|p| sampler.iz0_d(p, l))
                    }
                    _ => {
                        let l = incidence()?;
                        self.evaluate(|p| sampler.iz0_tilde_d(p, l))
                    }
                }
            }
            IndicatorKind::I2Phased | IndicatorKind::I3Phased | IndicatorKind::I2Retrieved | IndicatorKind::I3Retrieved => {
                let u = match kind {
                    IndicatorKind::I2Phased | IndicatorKind::I3Phased => self.forward.exact_shear().clone(),
                    _ => retrieved_values(),
                };
                let sampler = ObstacleSampler::new(u, &self.params, &pols, s.combine())?;
                if matches!(kind, IndicatorKind::I2Phased | IndicatorKind::I2Retrieved) {
                    self.evaluate(|p| sampler.i2(p))
                } else {
                    let l = incidence()?;
                    self.evaluate(|p| sampler.i3(p, l))
                }
            }
            IndicatorKind::IthetaZ0 => {
                let sampler = PhaselessSourceSampler::new(ds, tau)?;
                if !sampler.skipped().is_empty() {
                    self.warnings.push(format!("itheta-z0: observations {:?} have no covering polarization", sampler.skipped()));
                }
                self.evaluate(|p| sampler.value(p))
            }
            IndicatorKind::IthetaPhased | IndicatorKind::IthetaRetrieved => {
                let Forward::Source { observations, frequencies, phased, .. } = &self.forward else {
                    unreachable!("validated source indicator")
                };
                let u = if kind == IndicatorKind::IthetaPhased { phased.clone() } else { retrieved_values() };
                let sampler = SourceSampler::new(u, observations, *frequencies, &self.params)?;
                self.evaluate(|p| sampler.itheta(p))
            }
        };
        let mut field = IndicatorField::new(self.grid, values, kind.label())?
            .with_parameter("tau", format!("{}{:+}i", tau.re, tau.im));
        if matches!(kind, IndicatorKind::I2Phased | IndicatorKind::I2Retrieved | IndicatorKind::I3Phased | IndicatorKind::I3Retrieved) {
            field = field.with_parameter("combine", s.combine().label().to_string());
        }
        if matches!(kind, IndicatorKind::Iz0D | IndicatorKind::Iz0TildeD | IndicatorKind::I3Phased | IndicatorKind::I3Retrieved) {
            field = field.with_parameter("incidence_deg", s.output.incidence_deg.to_string());
        }
        Ok(field)
    }
}
