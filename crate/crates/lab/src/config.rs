//! Scenario files.
//!
//! A scenario is a TOML document with a handful of sections:
//!
//! ```toml
//! name = "obstacle-big-kite"
//! description = "kite, phaseless indicator for three source points"
//!
//! [wave]            # omega, lambda, mu
//! omega = 6.283185307179586
//!
//! [obstacle]        # either [obstacle] or [source]
//! directions = 128
//! boundaries = [{ kind = "kite", offset = [0.0, 0.0] }]
//!
//! [data]            # z0 list, indicator strength, retrieval strengths, polarizations
//! z0 = [[2.0, 4.0], [12.0, 12.0]]
//!
//! [noise]           # kind, levels, seed
//! levels = [0.1]
//!
//! [grid]            # sampling rectangle and spacing
//! x = [-3.0, 3.0]
//! y = [-3.0, 3.0]
//!
//! [output]          # indicators and artifacts
//! indicators = ["iz0"]
//! ```
//!
//! Every `(z0, noise level)` pair is one run of the scenario.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use elastic_phaseless::obstacle::{Boundary, ObstacleScene};
use elastic_phaseless::sampling::{Combine, SamplingGrid};
use elastic_phaseless::source::{FrequencyGrid, SourceField};
use elastic_phaseless::wave::{Direction, PolarizationSet, StrengthSet, WaveParameters};
use elastic_phaseless::{point, Complex64, Point};
use serde::{Deserialize, Serialize};

/// A configuration problem, with the 1-based line it refers to when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn default_omega() -> f64 {
    2.0 * PI
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSection {
    #[serde(default = "default_omega")]
    pub omega: f64,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default = "one")]
    pub mu: f64,
}

impl Default for WaveSection {
    fn default() -> Self {
        Self { omega: default_omega(), lambda: 1.0, mu: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BoundarySpec {
    Kite {
        #[serde(default)]
        offset: [f64; 2],
    },
    Circle {
        center: [f64; 2],
        radius: f64,
    },
}

fn default_directions() -> usize {
    128
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSection {
    /// `N` of the direction grid `θ_l = 2πl/N`.
    #[serde(default = "default_directions")]
    pub directions: usize,
    pub boundaries: Vec<BoundarySpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceShape {
    Rectangle,
    LShape,
    Triangle,
    F1,
    F2,
}

fn default_frequencies() -> usize {
    20
}

fn default_k_max() -> f64 {
    20.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub shape: SourceShape,
    /// Explicit observation angles in degrees.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observations_deg: Option<Vec<f64>>,
    /// `θ_j = −π/2 + jπ/n`, `j = 1..n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fan: Option<usize>,
    #[serde(default = "default_frequencies")]
    pub frequencies: usize,
    #[serde(default = "default_k_max")]
    pub k_max: f64,
}

fn default_z0() -> Vec<[f64; 2]> {
    vec![[12.0, 12.0]]
}

fn default_tau() -> [f64; 2] {
    [1.0, 0.0]
}

fn default_strengths() -> [[f64; 2]; 3] {
    [[0.5, 0.0], [-0.5, 0.0], [0.0, 0.5]]
}

fn default_polarizations() -> Vec<f64> {
    vec![45.0, 165.0, 285.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    #[serde(default = "default_z0")]
    pub z0: Vec<[f64; 2]>,
    /// `τ₁` of the phaseless indicators as `[re, im]`.
    #[serde(default = "default_tau")]
    pub indicator_tau: [f64; 2],
    /// The three retrieval strengths as `[re, im]`.
    #[serde(default = "default_strengths")]
    pub strengths: [[f64; 2]; 3],
    #[serde(default = "default_polarizations")]
    pub polarizations_deg: Vec<f64>,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            z0: default_z0(),
            indicator_tau: default_tau(),
            strengths: default_strengths(),
            polarizations_deg: default_polarizations(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKindSpec {
    #[default]
    Relative,
    Absolute,
}

fn default_levels() -> Vec<f64> {
    vec![0.0]
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default)]
    pub kind: NoiseKindSpec,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self { kind: NoiseKindSpec::Relative, levels: default_levels(), seed: default_seed() }
    }
}

fn default_spacing() -> f64 {
    elastic_phaseless::sampling::DEFAULT_SPACING
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x: [f64; 2],
    pub y: [f64; 2],
    #[serde(default = "default_spacing")]
    pub spacing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndicatorKind {
    #[serde(rename = "iz0")]
    Iz0,
    #[serde(rename = "iz0-d")]
    Iz0D,
    #[serde(rename = "iz0-tilde-d")]
    Iz0TildeD,
    #[serde(rename = "i2-phased")]
    I2Phased,
    #[serde(rename = "i3-phased")]
    I3Phased,
    #[serde(rename = "i2-retrieved")]
    I2Retrieved,
    #[serde(rename = "i3-retrieved")]
    I3Retrieved,
    #[serde(rename = "itheta-z0")]
    IthetaZ0,
    #[serde(rename = "itheta-phased")]
    IthetaPhased,
    #[serde(rename = "itheta-retrieved")]
    IthetaRetrieved,
}

impl IndicatorKind {
    pub fn label(self) -> &'static str {
        match self {
            IndicatorKind::Iz0 => "iz0",
            IndicatorKind::Iz0D => "iz0-d",
            IndicatorKind::Iz0TildeD => "iz0-tilde-d",
            IndicatorKind::I2Phased => "i2-phased",
            IndicatorKind::I3Phased => "i3-phased",
            IndicatorKind::I2Retrieved => "i2-retrieved",
            IndicatorKind::I3Retrieved => "i3-retrieved",
            IndicatorKind::IthetaZ0 => "itheta-z0",
            IndicatorKind::IthetaPhased => "itheta-phased",
            IndicatorKind::IthetaRetrieved => "itheta-retrieved",
        }
    }

    pub fn for_sources(self) -> bool {
        matches!(self, IndicatorKind::IthetaZ0 | IndicatorKind::IthetaPhased | IndicatorKind::IthetaRetrieved)
    }

    pub fn needs_retrieval(self) -> bool {
        matches!(self, IndicatorKind::I2Retrieved | IndicatorKind::I3Retrieved | IndicatorKind::IthetaRetrieved)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CombineSpec {
    #[default]
    Sum,
    Max,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub indicators: Vec<IndicatorKind>,
    /// Incidence `d` of the single-direction obstacle indicators.
    #[serde(default)]
    pub incidence_deg: f64,
    /// Direction of the retrieval overlay: an incidence for obstacles, an
    /// observation for sources.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlay_deg: Option<f64>,
    #[serde(default = "yes")]
    pub far_field: bool,
    #[serde(default = "yes")]
    pub phaseless: bool,
    #[serde(default)]
    pub retrieval: bool,
    #[serde(default = "yes")]
    pub pgm: bool,
    #[serde(default)]
    pub combine: CombineSpec,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            indicators: Vec::new(),
            incidence_deg: 0.0,
            overlay_deg: None,
            far_field: true,
            phaseless: true,
            retrieval: false,
            pgm: true,
            combine: CombineSpec::Sum,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub wave: WaveSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstacle: Option<ObstacleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceSection>,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub noise: NoiseSection,
    pub grid: GridSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Resolution tier: `ci` keeps the scenario as written, `paper` switches
/// obstacle scenarios to `ω = 8π` and `N = 512`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Tier {
    #[default]
    Ci,
    Paper,
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// First line whose key (or section header) is `key`.
fn line_of_key(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let t = l.trim_start();
        t.strip_prefix(key).is_some_and(|rest| {
            let rest = rest.trim_start();
            rest.starts_with('=') || rest.starts_with(']')
        }) || t.strip_prefix('[').and_then(|r| r.strip_prefix(key)).is_some_and(|r| r.starts_with(']'))
    })
    .map(|i| i + 1)
}

fn deg(a: f64) -> f64 {
    a * PI / 180.0
}

impl Scenario {
    /// Parses and validates a scenario.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let s: Scenario = toml::from_str(text).map_err(|e| ConfigError {
            line: e.span().map(|r| line_of_offset(text, r.start)),
            message: e.message().trim().to_string(),
        })?;
        s.validate().map_err(|(key, message)| ConfigError { line: line_of_key(text, key), message })?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError { line: None, message: format!("cannot read {}: {e}", path.display()) })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn is_obstacle(&self) -> bool {
        self.obstacle.is_some()
    }

    /// Checks everything that can be checked without running a solver.
    /// Errors name the offending key.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(("name", format!("scenario name {:?} must be non-empty ASCII letters, digits, '-' or '_'", self.name)));
        }
        let params = self.params().map_err(|e| ("wave", e.to_string()))?;
        match (&self.obstacle, &self.source) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(("obstacle", String::from("exactly one of [obstacle] and [source] is required")))
            }
            (Some(o), None) => {
                if o.directions < 4 || o.directions % 2 != 0 {
                    return Err(("directions", format!("directions must be even and at least 4, got {}", o.directions)));
                }
                let scene = self.scene(params).map_err(|e| ("boundaries", e))?;
                if scene.boundaries().is_empty() {
                    return Err(("boundaries", String::from("at least one boundary is required")));
                }
                for z in &self.data.z0 {
                    if scene.contains(&point(z[0], z[1])) {
                        return Err(("z0", format!("source point {z:?} lies inside an obstacle")));
                    }
                }
                self.direction_index(self.output.incidence_deg).map_err(|e| ("incidence_deg", e))?;
                if let Some(a) = self.output.overlay_deg {
                    self.direction_index(a).map_err(|e| ("overlay_deg", e))?;
                }
            }
            (None, Some(s)) => {
                match (&s.observations_deg, s.fan) {
                    (Some(v), None) if !v.is_empty() => {}
                    (None, Some(n)) if n > 0 => {}
                    _ => {
                        return Err((
                            "source",
                            String::from("give exactly one of a non-empty observations_deg list and a positive fan"),
                        ))
                    }
                }
                FrequencyGrid::new(s.frequencies, s.k_max).map_err(|e| ("frequencies", e.to_string()))?;
                if let Some(a) = self.output.overlay_deg {
                    self.observation_index(a).map_err(|e| ("overlay_deg", e))?;
                }
            }
        }
        for k in &self.output.indicators {
            if k.for_sources() == self.is_obstacle() {
                return Err(("indicators", format!("indicator {} does not apply to this scenario", k.label())));
            }
        }
        if self.data.z0.is_empty() {
            return Err(("z0", String::from("at least one source point is required")));
        }
        if self.data.z0.iter().flatten().any(|v| !v.is_finite()) {
            return Err(("z0", String::from("source points must be finite")));
        }
        if self.data.polarizations_deg.is_empty() {
            return Err(("polarizations_deg", String::from("at least one polarization is required")));
        }
        let tau = self.indicator_tau();
        if tau.norm() == 0.0 || self.strengths().map_err(|e| ("strengths", e))?.tau.contains(&tau) {
            return Err(("indicator_tau", String::from("indicator strength must be nonzero and differ from the retrieval strengths")));
        }
        if self.noise.levels.is_empty() || self.noise.levels.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(("levels", String::from("noise levels must be a non-empty list of finite values >= 0")));
        }
        self.sampling_grid().map_err(|e| ("grid", e))?;
        Ok(())
    }

    pub fn params(&self) -> elastic_phaseless::Result<WaveParameters> {
        WaveParameters::new(self.wave.omega, self.wave.lambda, self.wave.mu)
    }

    pub fn scene(&self, params: WaveParameters) -> Result<ObstacleScene, String> {
        let o = self.obstacle.as_ref().ok_or("not an obstacle scenario")?;
        let boundaries = o
            .boundaries
            .iter()
            .map(|b| match *b {
                BoundarySpec::Kite { offset } => Ok(Boundary::kite(point(offset[0], offset[1]))),
                BoundarySpec::Circle { center, radius } => {
                    Boundary::circle(point(center[0], center[1]), radius).map_err(|e| e.to_string())
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        ObstacleScene::new(boundaries, params).map_err(|e| e.to_string())
    }

    pub fn source_field(&self) -> Option<SourceField> {
        self.source.as_ref().map(|s| match s.shape {
            SourceShape::Rectangle => SourceField::rectangle(),
            SourceShape::LShape => SourceField::l_shape(),
            SourceShape::Triangle => SourceField::triangle(),
            SourceShape::F1 => SourceField::counterexample_f1(),
            SourceShape::F2 => SourceField::counterexample_f2(),
        })
    }

    pub fn observations(&self) -> Vec<Direction> {
        match &self.source {
            Some(SourceSection { observations_deg: Some(v), .. }) => v.iter().map(|a| Direction::from_angle(deg(*a))).collect(),
            Some(SourceSection { fan: Some(n), .. }) => {
                (1..=*n).map(|j| Direction::from_angle(-PI / 2.0 + j as f64 * PI / *n as f64)).collect()
            }
            _ => Vec::new(),
        }
    }

    pub fn frequency_grid(&self) -> Option<FrequencyGrid> {
        self.source.as_ref().and_then(|s| FrequencyGrid::new(s.frequencies, s.k_max).ok())
    }

    pub fn polarizations(&self) -> PolarizationSet {
        let a: Vec<f64> = self.data.polarizations_deg.iter().map(|d| deg(*d)).collect();
        PolarizationSet::from_angles(&a)
    }

    pub fn strengths(&self) -> Result<StrengthSet, String> {
        let s = self.data.strengths;
        StrengthSet::new([0, 1, 2].map(|i| Complex64::new(s[i][0], s[i][1]))).map_err(|e| e.to_string())
    }

    pub fn indicator_tau(&self) -> Complex64 {
        Complex64::new(self.data.indicator_tau[0], self.data.indicator_tau[1])
    }

    pub fn z0(&self) -> Vec<Point> {
        self.data.z0.iter().map(|z| point(z[0], z[1])).collect()
    }

    pub fn sampling_grid(&self) -> Result<SamplingGrid, String> {
        let g = &self.grid;
        SamplingGrid::new(g.x[0], g.x[1], g.y[0], g.y[1], g.spacing).map_err(|e| e.to_string())
    }

    pub fn combine(&self) -> Combine {
        match self.output.combine {
            CombineSpec::Sum => Combine::Sum,
            CombineSpec::Max => Combine::Max,
        }
    }

    /// Index `l` of an angle on the grid `θ_l = 2πl/N`.
    pub fn direction_index(&self, degrees: f64) -> Result<usize, String> {
        let n = self.obstacle.as_ref().map_or(0, |o| o.directions);
        let x = degrees.rem_euclid(360.0) * n as f64 / 360.0;
        let l = x.round();
        if (x - l).abs() > 1e-9 || n == 0 {
            return Err(format!("{degrees} degrees is not on the {n}-direction grid"));
        }
        Ok(l as usize % n)
    }

    /// Index of an observation direction within the configured set.
    pub fn observation_index(&self, degrees: f64) -> Result<usize, String> {
        let target = Direction::from_angle(deg(degrees));
        self.observations()
            .iter()
            .position(|d| (d.vector() - target.vector()).norm() < 1e-9)
            .ok_or_else(|| format!("{degrees} degrees is not an observation direction"))
    }

    /// Every indicator that needs retrieved data switches retrieval on.
    pub fn wants_retrieval(&self) -> bool {
        self.output.retrieval || self.output.indicators.iter().any(|k| k.needs_retrieval()) || self.output.overlay_deg.is_some()
    }

    pub fn apply_tier(&mut self, tier: Tier) {
        if tier == Tier::Paper {
            if let Some(o) = &mut self.obstacle {
                self.wave.omega = 8.0 * PI;
                o.directions = 512;
            }
        }
    }

    /// Replaces the noise levels with a single level.
    pub fn override_noise(&mut self, level: f64) {
        self.noise.levels = vec![level];
    }
}
