//! Bessel functions of the first and second kind and the Hankel function
//! of the first kind for real positive arguments and orders 0, 1, 2.
//!
//! Values come from the fdlibm algorithms shipped in the `libm` crate
//! (rational approximations below x = 2, Hankel asymptotic expansions with
//! rational corrections above). Order 2 uses the same library's `jn`/`yn`.

use crate::{Complex64, Error, Result};

const MAX_ORDER: u32 = 2;

fn check(function: &'static str, order: u32, x: f64) -> Result<()> {
    if order > MAX_ORDER || !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain { function, order, x });
    }
    Ok(())
}

fn finite(function: &'static str, order: u32, x: f64, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain { function, order, x })
    }
}

/// Bessel function of the first kind `J_n(x)`.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    check("bessel_j", order, x)?;
    let v = match order {
        0 => libm::j0(x),
        1 => libm::j1(x),
        _ => libm::jn(2, x),
    };
    finite("bessel_j", order, x, v)
}

/// Bessel function of the second kind `Y_n(x)`.
///
/// `Y_0` diverges logarithmically at the origin and stays finite for every
/// positive normal argument; `Y_1` and `Y_2` overflow for arguments below
/// roughly `1e-308` and `1e-154` respectively, which is reported as a
/// domain error rather than an infinity.
pub fn bessel_y(order: u32, x: f64) -> Result<f64> {
    check("bessel_y", order, x)?;
    let v = match order {
        0 => libm::y0(x),
        1 => libm::y1(x),
        _ => libm::yn(2, x),
    };
    finite("bessel_y", order, x, v)
}

/// Hankel function of the first kind `H_n^(1)(x) = J_n(x) + i Y_n(x)`.
pub fn hankel1(order: u32, x: f64) -> Result<Complex64> {
    Ok(Complex64::new(bessel_j(order, x)?, bessel_y(order, x)?))
}

/// `(H_0^(1)(x), H_1^(1)(x))` in one call; the pair every Green's tensor
/// evaluation needs.
#[inline]
pub fn hankel01(x: f64) -> Result<(Complex64, Complex64)> {
    Ok((hankel1(0, x)?, hankel1(1, x)?))
}
