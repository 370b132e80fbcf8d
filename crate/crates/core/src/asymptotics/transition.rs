use std::f64::consts::PI;

use num_complex::Complex64;

use super::erf::faddeeva;
use crate::error::{Error, Result};
use crate::grid::PhysParams;

/// `c(mu) = (1 + i) int_0^U exp(-i s^2) ds` with `U = sqrt(w0 mu / eps)`.
///
/// Uses `int_0^U e^{-i s^2} ds = (sqrt(pi)/2) e^{-i pi/4} erf(e^{i pi/4} U)` and
/// `erf(z) = 1 - e^{-z^2} w(iz)`, which stays bounded for every `U`.
pub fn c_transition(mu: f64, p: &PhysParams) -> Result<Complex64> {
    if !(mu >= 0.0) {
        return Err(Error::Domain(format!("transition function needs mu >= 0, got {mu}")));
    }
    let u = (p.omega0 * mu / p.eps).sqrt();
    if u == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let rot = Complex64::from_polar(1.0, PI / 4.0);
    let z = rot * u;
    let tail = Complex64::new(0.0, -u * u).exp() * faddeeva(Complex64::i() * z);
    Ok((Complex64::new(1.0, 0.0) - tail) * (PI / 2.0).sqrt())
}
