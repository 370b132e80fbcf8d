//! Complex error function built on the Faddeeva function `w(z) = e^{-z^2} erfc(-iz)`.

use errorfunctions::ComplexErrorFunctions;
use num_complex::Complex64;

use super::logpolar::LogPolar;
use crate::error::{Error, Result};

/// Largest `|Im z|` accepted by [`cerf`].
pub const STRIP: f64 = 30.0;

/// Faddeeva function.
pub fn faddeeva(z: Complex64) -> Complex64 {
    z.w()
}

/// Complex error function on the strip `|Im z| <= 30`.
///
/// Evaluated in the first quadrant and reflected, so `erf(-z) = -erf(z)` and
/// `erf(conj z) = conj(erf z)` hold bit for bit.
pub fn cerf(z: Complex64) -> Result<Complex64> {
    if z.re.is_nan() || z.im.is_nan() || z.im.abs() > STRIP {
        return Err(Error::Range(z));
    }
    let q = Complex64::new(z.re.abs(), z.im.abs()).erf();
    let q = if z.im < 0.0 { q.conj() } else { q };
    Ok(if z.re < 0.0 { -q.conj() } else { q })
}

/// `erfc(z) = c + e^{-z^2} u` with `c` in {0, 2} and `u` bounded.
fn erfc_parts(z: Complex64) -> (f64, Complex64) {
    let i = Complex64::i();
    if z.re >= 0.0 {
        (0.0, faddeeva(i * z))
    } else {
        (2.0, -faddeeva(-i * z))
    }
}

/// `(erf(a) - erf(b)) e^{a^2}` in log-polar form; stays finite when the
/// exponential factor alone would overflow.
pub fn erf_difference_scaled(a: Complex64, b: Complex64) -> LogPolar {
    if a == b {
        return LogPolar::ZERO;
    }
    let (ca, ua) = erfc_parts(a);
    let (cb, ub) = erfc_parts(b);
    let mut total = -LogPolar::from_complex(ua);
    total = total + LogPolar::exp(a * a - b * b) * LogPolar::from_complex(ub);
    if cb != ca {
        total = total + LogPolar::exp(a * a).scale(Complex64::new(cb - ca, 0.0));
    }
    total
}
