use alloc::string::String;
use core::fmt;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Special-function argument or order outside the supported domain.
    Domain { function: &'static str, order: u32, x: f64 },
    /// Green's tensor evaluated with source and target closer than the coincidence threshold.
    Coincidence { distance: f64 },
    /// Invalid Lamé constants or frequency.
    Parameters(String),
    /// Overlapping or otherwise invalid obstacle geometry.
    Geometry(String),
    /// A point source was placed where the operation does not allow it.
    SourcePlacement(String),
    /// Quadrature density too low to resolve the oscillation of the integrand.
    UnresolvedOscillation { nodes_per_wavelength: f64 },
    /// Strengths or anchors that are coincident or collinear.
    DegenerateAnchors,
    /// No polarization covers the requested direction.
    ArcSelection { angle: f64 },
    /// Array dimensions that do not agree.
    Shape(String),
    /// A τ or q slice required by an indicator is absent from the dataset.
    MissingSlice(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { function, order, x } => {
                write!(f, "{function}: unsupported order {order} or argument {x}")
            }
            Error::Coincidence { distance } => {
                write!(f, "green tensor evaluated at coincident points (r = {distance:e})")
            }
            Error::Parameters(msg) => write!(f, "invalid wave parameters: {msg}"),
            Error::Geometry(msg) => write!(f, "invalid geometry: {msg}"),
            Error::SourcePlacement(msg) => write!(f, "invalid source placement: {msg}"),
            Error::UnresolvedOscillation { nodes_per_wavelength } => write!(
                f,
                "quadrature resolves only {nodes_per_wavelength:.2} nodes per wavelength (need at least 6)"
            ),
            Error::DegenerateAnchors => write!(f, "anchors are coincident or collinear"),
            Error::ArcSelection { angle } => {
                write!(f, "no polarization covers the direction at angle {angle}")
            }
            Error::Shape(msg) => write!(f, "shape mismatch: {msg}"),
            Error::MissingSlice(msg) => write!(f, "missing dataset slice: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
