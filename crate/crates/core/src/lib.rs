//! Two-dimensional elastic scattering with phaseless far-field data.
//!
//! The crate is `no_std` (with `alloc`) and contains the numerical core:
//!
//! * [`specfun`]: Bessel and Hankel functions of orders 0, 1 and 2.
//! * [`wave`]: Lamé parameters, directions, plane waves, the Navier Green's
//!   tensor and its far-field patterns, polarization arcs and strip hulls.
//! * [`obstacle`]: a rigid-body (Dirichlet) exterior solver based on
//!   fundamental-solution collocation, producing far-field matrices for
//!   plane-wave and point-source incidence.
//! * [`source`]: far fields radiated by compactly supported vector sources.
//! * [`dataset`]: modulus-only datasets and their noise models.
//! * [`retrieval`]: three-distance trilateration and the phase retrieval
//!   pipelines built on it.
//! * [`sampling`]: direct sampling indicators for obstacles and sources.
//!
//! IO, scenario configuration and the command line live in the companion
//! `elastic-phaseless-lab` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod dataset;
pub mod error;
pub mod obstacle;
pub mod quadrature;
pub mod retrieval;
pub mod sampling;
pub mod source;
pub mod specfun;
pub mod wave;

pub use error::{Error, Result};
pub use nalgebra;
pub use num_complex::Complex64;

/// Complex scalar used throughout the crate.
pub type ComplexValue = Complex64;

/// A point of the plane.
pub type Point = nalgebra::Vector2<f64>;

/// Convenience constructor for [`Point`].
#[inline]
pub fn point(x: f64, y: f64) -> Point {
    Point::new(x, y)
}
