//! Plain-text output formats.
//!
//! Every table is a CSV file with a header row. Floats are written with
//! Rust's shortest round-trip formatting, so reading a file back gives the
//! exact values that were computed. Sidecar `.meta` files hold one
//! `key = value` pair per line.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use elastic_phaseless::dataset::{DatasetAxes, PhaselessDataset, Slice, NOISE_GENERATOR};
use elastic_phaseless::nalgebra::DMatrix;
use elastic_phaseless::obstacle::FarFieldMatrix;
use elastic_phaseless::retrieval::RetrievedField;
use elastic_phaseless::sampling::IndicatorField;
use elastic_phaseless::wave::{Mode, ModePair};
use elastic_phaseless::Complex64;

/// Ordered `key = value` pairs.
pub type Meta = Vec<(String, String)>;

fn create(path: &Path) -> io::Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

fn join<T: std::fmt::Display>(v: impl IntoIterator<Item = T>) -> String {
    v.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn complex(c: Complex64) -> String {
    format!("{}{:+}i", c.re, c.im)
}

pub fn write_meta(path: &Path, meta: &[(String, String)]) -> io::Result<()> {
    let mut w = create(path)?;
    for (k, v) in meta {
        writeln!(w, "{k} = {v}")?;
    }
    w.flush()
}

pub fn read_meta(path: &Path) -> io::Result<Meta> {
    fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_once(" = ")
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| invalid(format!("bad meta line {l:?}")))
        })
        .collect()
}

/// Obstacle far fields: `mode,obs_index,inc_index,re,im` for all four mode
/// pairs, `mode` being e.g. `ps` for P incidence and S observation.
pub fn write_far_field(path: &Path, u: &FarFieldMatrix) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "mode,obs_index,inc_index,re,im")?;
    for pair in ModePair::ALL {
        let m = u.get(pair);
        for j in 0..m.nrows() {
            for l in 0..m.ncols() {
                let c = m[(j, l)];
                writeln!(w, "{},{j},{l},{},{}", pair.label(), c.re, c.im)?;
            }
        }
    }
    w.flush()
}

/// Source far fields over observations and frequencies:
/// `mode,obs_index,freq_index,re,im`.
pub fn write_source_far_field(path: &Path, fields: &[(Mode, &DMatrix<Complex64>)]) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "mode,obs_index,freq_index,re,im")?;
    for (mode, m) in fields {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let c = m[(i, j)];
                writeln!(w, "{},{i},{j},{},{}", mode.label(), c.re, c.im)?;
            }
        }
    }
    w.flush()
}

/// Column header for the second axis of a dataset.
pub fn second_axis(ds: &PhaselessDataset) -> &'static str {
    match ds.axes {
        DatasetAxes::Obstacle { .. } => "inc_index",
        DatasetAxes::Source { .. } => "freq_index",
    }
}

/// One phaseless slice: `obs_index,<second axis>,value`.
pub fn write_slice(path: &Path, slice: &Slice, second: &str) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "obs_index,{second},value")?;
    for i in 0..slice.values.nrows() {
        for j in 0..slice.values.ncols() {
            writeln!(w, "{i},{j},{}", slice.values[(i, j)])?;
        }
    }
    w.flush()
}

/// Reads a slice written by [`write_slice`].
pub fn read_slice(path: &Path) -> io::Result<DMatrix<f64>> {
    let rows = read_rows(path, 3)?;
    let nr = rows.iter().map(|r| r[0] as usize + 1).max().unwrap_or(0);
    let nc = rows.iter().map(|r| r[1] as usize + 1).max().unwrap_or(0);
    let mut m = DMatrix::zeros(nr, nc);
    for r in rows {
        m[(r[0] as usize, r[1] as usize)] = r[2];
    }
    Ok(m)
}

/// Description of a dataset for its sidecar.
pub fn dataset_meta(ds: &PhaselessDataset) -> Meta {
    let mut m: Meta = vec![
        ("kind".into(), match ds.axes {
            DatasetAxes::Obstacle { .. } => "obstacle".into(),
            DatasetAxes::Source { .. } => "source".into(),
        }),
        ("provenance".into(), ds.provenance.clone()),
        ("omega".into(), ds.params.omega.to_string()),
        ("lambda".into(), ds.params.lambda.to_string()),
        ("mu".into(), ds.params.mu.to_string()),
        ("z".into(), join([ds.z.x, ds.z.y])),
        ("tau".into(), ds.strengths.iter().map(|t| complex(*t)).collect::<Vec<_>>().join(",")),
        ("polarization_angles".into(), join(ds.polarizations.angles())),
    ];
    match &ds.axes {
        DatasetAxes::Obstacle { n } => m.push(("directions".into(), n.to_string())),
        DatasetAxes::Source { observations, frequencies } => {
            m.push(("observation_angles".into(), join(observations.iter().map(|d| d.angle()))));
            m.push(("frequencies".into(), frequencies.len().to_string()));
            m.push(("k_max".into(), frequencies.k_max().to_string()));
        }
    }
    match ds.noise {
        Some(n) => {
            m.push(("noise_kind".into(), n.kind.label().into()));
            m.push(("noise_level".into(), n.level.to_string()));
            m.push(("seed".into(), n.seed.to_string()));
            m.push(("generator".into(), NOISE_GENERATOR.into()));
        }
        None => m.push(("noise_kind".into(), "none".into())),
    }
    m
}

/// File stem for slice number `k`.
pub fn slice_stem(k: usize, slice: &Slice) -> String {
    match slice.q {
        Some(q) => format!("phaseless_{k:02}_q{q}"),
        None => format!("phaseless_{k:02}_tau0"),
    }
}

/// Indicator values as `x,y,value` in grid order (`x` fastest).
pub fn write_indicator_csv(path: &Path, f: &IndicatorField) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "x,y,value")?;
    for (k, v) in f.values.iter().enumerate() {
        let p = f.grid.point(k);
        writeln!(w, "{},{},{v}", p.x, p.y)?;
    }
    w.flush()
}

/// Reads `x,y,value` rows.
pub fn read_indicator_csv(path: &Path) -> io::Result<Vec<[f64; 3]>> {
    Ok(read_rows(path, 3)?.into_iter().map(|r| [r[0], r[1], r[2]]).collect())
}

/// Greyscale P2 image, min-max normalised to `0..=255`, top row at the
/// largest `y`.
pub fn write_pgm(path: &Path, f: &IndicatorField) -> io::Result<()> {
    let (lo, hi) = (f.min(), f.max());
    let scale = if hi > lo { 255.0 / (hi - lo) } else { 0.0 };
    let mut w = create(path)?;
    writeln!(w, "P2\n# {}\n{} {}\n255", f.name, f.grid.nx, f.grid.ny)?;
    for iy in (0..f.grid.ny).rev() {
        let row: Vec<String> =
            (0..f.grid.nx).map(|ix| (((f.value_at(ix, iy) - lo) * scale).round() as u8).to_string()).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    w.flush()
}

/// A parsed P2 image.
#[derive(Debug, Clone, PartialEq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub max: u32,
    pub pixels: Vec<u32>,
}

pub fn read_pgm(path: &Path) -> io::Result<Pgm> {
    let text = fs::read_to_string(path)?;
    let mut tokens = text.lines().filter(|l| !l.starts_with('#')).flat_map(|l| l.split_whitespace());
    if tokens.next() != Some("P2") {
        return Err(invalid(String::from("not a P2 image")));
    }
    let mut num = || -> io::Result<u32> {
        tokens.next().and_then(|t| t.parse().ok()).ok_or_else(|| invalid(String::from("truncated image")))
    };
    let (width, height, max) = (num()? as usize, num()? as usize, num()?);
    let pixels = (0..width * height).map(|_| num()).collect::<io::Result<Vec<_>>>()?;
    Ok(Pgm { width, height, max, pixels })
}

/// Grid and provenance of an indicator field.
pub fn indicator_meta(f: &IndicatorField) -> Meta {
    let g = &f.grid;
    let mut m: Meta = vec![
        ("indicator".into(), f.name.clone()),
        ("x_min".into(), g.x_min.to_string()),
        ("y_min".into(), g.y_min.to_string()),
        ("nx".into(), g.nx.to_string()),
        ("ny".into(), g.ny.to_string()),
        ("spacing".into(), g.spacing.to_string()),
        ("min".into(), f.min().to_string()),
        ("max".into(), f.max().to_string()),
    ];
    m.extend(f.parameters.iter().cloned());
    m
}

/// Retrieved shear far field: `obs_index,<second axis>,re,im`.
pub fn write_retrieved(path: &Path, r: &RetrievedField, second: &str) -> io::Result<()> {
    write_complex_table(path, &r.values, second)
}

/// Sidecar of a retrieved field.
pub fn retrieved_meta(r: &RetrievedField, ds: &PhaselessDataset) -> Meta {
    let pol = r.polarization.iter().map(|q| q.map_or(String::from("-"), |q| q.to_string()));
    let mut m: Meta = vec![
        ("retrieved".into(), "true".into()),
        ("mode".into(), "s".into()),
        ("polarization_index".into(), pol.collect::<Vec<_>>().join(",")),
        ("clamped".into(), r.clamped.to_string()),
        ("inconsistent".into(), r.inconsistent.to_string()),
        ("missing".into(), join(r.missing())),
    ];
    m.extend(dataset_meta(ds));
    m
}

fn write_complex_table(path: &Path, m: &DMatrix<Complex64>, second: &str) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "obs_index,{second},re,im")?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            writeln!(w, "{i},{j},{},{}", m[(i, j)].re, m[(i, j)].im)?;
        }
    }
    w.flush()
}

/// Reads a table written by [`write_retrieved`].
pub fn read_complex_table(path: &Path) -> io::Result<DMatrix<Complex64>> {
    let rows = read_rows(path, 4)?;
    let nr = rows.iter().map(|r| r[0] as usize + 1).max().unwrap_or(0);
    let nc = rows.iter().map(|r| r[1] as usize + 1).max().unwrap_or(0);
    let mut m = DMatrix::zeros(nr, nc);
    for r in rows {
        m[(r[0] as usize, r[1] as usize)] = Complex64::new(r[2], r[3]);
    }
    Ok(m)
}

/// True and retrieved values side by side along one column:
/// `index,angle,true_re,true_im,retrieved_re,retrieved_im`.
pub fn write_overlay(path: &Path, angles: &[f64], truth: &[Complex64], retrieved: &[Complex64]) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "index,angle,true_re,true_im,retrieved_re,retrieved_im")?;
    for (i, ((a, t), r)) in angles.iter().zip(truth).zip(retrieved).enumerate() {
        writeln!(w, "{i},{a},{},{},{},{}", t.re, t.im, r.re, r.im)?;
    }
    w.flush()
}

/// Numeric rows of a CSV file with a text first column allowed to be a
/// mode label, which is skipped.
fn read_rows(path: &Path, width: usize) -> io::Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .skip(1)
        .enumerate()
        .map(|(i, l)| {
            let v: Vec<f64> = l.split(',').filter_map(|t| t.parse().ok()).collect();
            if v.len() == width {
                Ok(v)
            } else {
                Err(invalid(format!("{}: row {} has {} numeric fields", path.display(), i + 2, v.len())))
            }
        })
        .collect()
}

/// Far-field rows `(mode, obs, second, value)` from either far-field CSV.
pub fn read_far_field(path: &Path) -> io::Result<Vec<(String, usize, usize, Complex64)>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let parse = |i: usize| f.get(i).and_then(|t| t.parse::<f64>().ok());
            match (f.first(), parse(1), parse(2), parse(3), parse(4)) {
                (Some(m), Some(a), Some(b), Some(re), Some(im)) => {
                    Ok((m.to_string(), a as usize, b as usize, Complex64::new(re, im)))
                }
                _ => Err(invalid(format!("bad far-field row {l:?}"))),
            }
        })
        .collect()
}
