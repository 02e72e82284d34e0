//! Three-distance trilateration and the far-field phase retrieval built on
//! it.
//!
//! With the point source `τ Φ(·, z) q` added to the unknown field, the
//! measured modulus is `|u∞ + τ e^{−ik_s x̂·z}(q·x̂^⊥)|`. Dividing by
//! `q·x̂^⊥ > 0` turns it into the distance between
//! `w = u∞ e^{ik_s x̂·z}/(q·x̂^⊥)` and the anchor `−τ`, so three
//! non-collinear strengths determine `w`, and hence `u∞`.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::dataset::PhaselessDataset;
use crate::wave::{arc_select_index, cis, Mode, StrengthSet};
use crate::{Complex64, Error, Result};

/// Three pairwise distinct, non-collinear points of the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnchorTriple {
    z: [Complex64; 3],
}

/// Collinearity threshold relative to the squared largest pairwise distance.
pub const AREA_TOLERANCE: f64 = 1e-10;

impl AnchorTriple {
    pub fn new(z: [Complex64; 3]) -> Result<Self> {
        let d = [(z[0] - z[1]).norm(), (z[1] - z[2]).norm(), (z[2] - z[0]).norm()];
        let dmax = d.iter().cloned().fold(0.0, f64::max);
        let e1 = z[1] - z[0];
        let e2 = z[2] - z[0];
        let area = 0.5 * libm::fabs(e1.re * e2.im - e1.im * e2.re);
        if d.iter().any(|&x| x == 0.0) || !(area > AREA_TOLERANCE * dmax * dmax) {
            return Err(Error::DegenerateAnchors);
        }
        Ok(Self { z })
    }

    /// Anchors `−τ_j`.
    pub fn from_strengths(s: &StrengthSet) -> Result<Self> {
        Self::new(s.anchors())
    }

    pub fn points(&self) -> [Complex64; 3] {
        self.z
    }
}

/// Result of one trilateration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trilateration {
    pub z: Complex64,
    /// `||z − z₃| − r₃|` of the returned candidate.
    pub mismatch: f64,
    /// Whether the law-of-cosines value had to be clamped into `[−1, 1]`.
    pub clamped: bool,
}

/// Recovers `z` from `r_j = |z − z_j|`.
///
/// `M = z₂ + (r₂/d₁₂)(z₁ − z₂)` lies on the circle about `z₂` towards `z₁`;
/// rotating it about `z₂` by `±α`, `cos α = (r₂² + d₁₂² − r₁²)/(2r₂d₁₂)`,
/// gives the two intersections of the first two circles, and the one whose
/// distance to `z₃` is closest to `r₃` is returned. Inconsistent (noisy)
/// distances still yield the best candidate.
///
/// Near the line through `z₁, z₂` the two-circle intersection is badly
/// conditioned, so consistent distances are resolved by the linear system
/// obtained from differencing the three circle equations instead.
pub fn trilaterate(anchors: &AnchorTriple, r: [f64; 3]) -> Trilateration {
    let [z1, z2, z3] = anchors.z;
    for j in 0..3 {
        if r[j] == 0.0 {
            return Trilateration { z: anchors.z[j], mismatch: 0.0, clamped: false };
        }
    }
    let d12 = (z1 - z2).norm();
    let m = z2 + (z1 - z2) * (r[1] / d12);
    let raw = (r[1] * r[1] + d12 * d12 - r[0] * r[0]) / (2.0 * r[1] * d12);
    let clamped = !(-1.0..=1.0).contains(&raw);
    let cos_a = raw.clamp(-1.0, 1.0);
    // 1 - cos² factored into distance differences keeps sin α accurate near
    // the anchor axis, where 1 - cos² cancels.
    let heron = (r[0] - r[1] + d12) * (r[0] + r[1] - d12) * (r[1] + d12 - r[0]) * (r[1] + d12 + r[0]);
    let sin_a = if clamped { 0.0 } else { (libm::sqrt(heron.max(0.0)) / (2.0 * r[1] * d12)).min(1.0) };
    let za = z2 + (m - z2) * Complex64::new(cos_a, -sin_a);
    let zb = z2 + (m - z2) * Complex64::new(cos_a, sin_a);
    let ea = libm::fabs((za - z3).norm() - r[2]);
    let eb = libm::fabs((zb - z3).norm() - r[2]);
    let (z, mismatch) = if ea <= eb { (za, ea) } else { (zb, eb) };
    if clamped || mismatch > CONSISTENCY_SLACK * r[2].max(1.0) {
        return Trilateration { z, mismatch, clamped };
    }
    // 2 Re(conj(e_j) w) = r₁² − r_j² + |e_j|² with w = z − z₁, e_j = z_j − z₁
    let (e2, e3) = (z2 - z1, z3 - z1);
    let c2 = (r[0] - r[1]) * (r[0] + r[1]) + e2.norm_sqr();
    let c3 = (r[0] - r[2]) * (r[0] + r[2]) + e3.norm_sqr();
    let det = 2.0 * (e2.re * e3.im - e2.im * e3.re);
    let w = Complex64::new((c2 * e3.im - c3 * e2.im) / det, (e2.re * c3 - e3.re * c2) / det);
    let z = z1 + w;
    Trilateration { z, mismatch: libm::fabs((z - z3).norm() - r[2]), clamped }
}

/// Phased shear far field recovered from a phaseless dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievedField {
    /// Rows: observation directions; columns: incidences or frequencies.
    pub values: DMatrix<Complex64>,
    /// Polarization used per observation; `None` marks directions without a
    /// covering polarization in the dataset (rows left at zero).
    pub polarization: Vec<Option<usize>>,
    /// Number of entries whose distances had to be clamped.
    pub clamped: usize,
    /// Number of entries whose best candidate misses `r₃` by more than the
    /// slack.
    pub inconsistent: usize,
}

impl RetrievedField {
    pub fn missing(&self) -> Vec<usize> {
        self.polarization.iter().enumerate().filter(|(_, q)| q.is_none()).map(|(i, _)| i).collect()
    }
}

/// Relative slack on `r₃` before an entry counts as inconsistent.
pub const CONSISTENCY_SLACK: f64 = 1e-6;

fn retrieve(ds: &PhaselessDataset, strengths: &StrengthSet) -> Result<RetrievedField> {
    let anchors = AnchorTriple::from_strengths(strengths)?;
    let obs = ds.observations();
    let (rows, cols) = ds.shape();
    let mut values = DMatrix::from_element(rows, cols, Complex64::new(0.0, 0.0));
    let mut polarization = Vec::with_capacity(rows);
    let mut clamped = 0;
    let mut inconsistent = 0;
    let wavenumbers: Vec<f64> = (0..cols).map(|c| ds.column_wavenumber(c)).collect::<Result<_>>()?;
    for (i, xhat) in obs.iter().enumerate() {
        let qi = match arc_select_index(*xhat, Mode::S, &ds.polarizations) {
            Ok(q) => q,
            Err(_) => {
                polarization.push(None);
                continue;
            }
        };
        polarization.push(Some(qi));
        let a = ds.polarizations.directions()[qi].dot_dir(&xhat.perp());
        let slices = [
            ds.slice(strengths.tau[0], qi)?,
            ds.slice(strengths.tau[1], qi)?,
            ds.slice(strengths.tau[2], qi)?,
        ];
        let proj = xhat.dot(&ds.z);
        for c in 0..cols {
            let r = [slices[0].values[(i, c)] / a, slices[1].values[(i, c)] / a, slices[2].values[(i, c)] / a];
            let t = trilaterate(&anchors, r);
            clamped += t.clamped as usize;
            if t.mismatch > CONSISTENCY_SLACK * r[2].max(1.0) {
                inconsistent += 1;
            }
            values[(i, c)] = t.z * a * cis(-wavenumbers[c] * proj);
        }
    }
    Ok(RetrievedField { values, polarization, clamped, inconsistent })
}

/// `u∞_{F,s}(x̂, k_j)` over `Θ` and the frequency grid.
pub fn retrieve_source_far_field(ds: &PhaselessDataset, strengths: &StrengthSet) -> Result<RetrievedField> {
    if !matches!(ds.axes, crate::dataset::DatasetAxes::Source { .. }) {
        return Err(Error::Shape(format!("expected a source dataset, got {:?}", ds.axes)));
    }
    retrieve(ds, strengths)
}

/// `u∞_{Ω,ss}(x̂_j, d_l)` on the direction grid. The point-source
/// interaction term `v∞_s` is not modelled and remains as a bias that
/// decays with the distance between `z` and the obstacle.
pub fn retrieve_obstacle_far_field(ds: &PhaselessDataset, strengths: &StrengthSet) -> Result<RetrievedField> {
    if !matches!(ds.axes, crate::dataset::DatasetAxes::Obstacle { .. }) {
        return Err(Error::Shape(format!("expected an obstacle dataset, got {:?}", ds.axes)));
    }
    retrieve(ds, strengths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn anchors() -> AnchorTriple {
        AnchorTriple::from_strengths(&StrengthSet::standard()).unwrap()
    }

    #[test]
    fn zero_distance_returns_anchor() {
        let a = anchors();
        let t = trilaterate(&a, [1.0, 0.0, 0.7]);
        assert_eq!(t.z, a.points()[1]);
    }

    #[test]
    fn midpoint_substitution() {
        // z₁ = 1, z₂ = 0, r₂ = 0.5: M = 0.5, and z = 0.5 is recovered when r₁ = 0.5
        let a = AnchorTriple::new([Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)]).unwrap();
        let z = Complex64::new(0.5, 0.0);
        let r = [0.5, 0.5, (z - Complex64::new(0.0, 1.0)).norm()];
        let t = trilaterate(&a, r);
        assert!((t.z - z).norm() < 1e-15);
    }

    #[test]
    fn degenerate_anchors() {
        let c = |x: f64, y: f64| Complex64::new(x, y);
        assert!(AnchorTriple::new([c(0.0, 0.0), c(1.0, 1.0), c(2.0, 2.0)]).is_err());
        assert!(AnchorTriple::new([c(0.0, 0.0), c(0.0, 0.0), c(2.0, 1.0)]).is_err());
        assert!(StrengthSet::new([c(0.5, 0.0), c(-0.5, 0.0), c(0.0, 0.0)]).is_err());
        assert!(StrengthSet::new([c(0.5, 0.0), c(-0.5, 0.0), c(0.0, 0.5)]).is_ok());
    }

    #[test]
    fn clamping_reports_and_stays_finite() {
        let a = anchors();
        let t = trilaterate(&a, [10.0, 0.1, 3.0]);
        assert!(t.clamped);
        assert!(t.z.re.is_finite() && t.z.im.is_finite());
    }
}
