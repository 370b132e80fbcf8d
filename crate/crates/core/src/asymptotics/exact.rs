use std::f64::consts::PI;

use num_complex::Complex64;

use super::erf::erf_difference_scaled;
use super::logpolar::LogPolar;
use super::InitialData;
use crate::error::{Error, Result};
use crate::grid::PhysParams;
use crate::quad::{integrate, Tolerance};
use crate::sources::{kernel_g, SourceTerm};

/// `sqrt(pi/2) eps^(beta - 1/2) (erf(a) - erf(b)) e^{a^2}` with
/// `a = (mu + i w0 - eps shift) / sqrt(2 eps)` and `b` likewise at `mu0`.
fn erf_block(mu: f64, p: &PhysParams, shift: Complex64) -> LogPolar {
    let s = (2.0 * p.eps).sqrt();
    let a = (p.shifted(mu) - shift * p.eps) / s;
    let b = (p.shifted(p.mu0) - shift * p.eps) / s;
    let pref = (PI / 2.0).sqrt() * p.eps.powf(p.beta - 0.5);
    erf_difference_scaled(a, b).scale(Complex64::new(pref, 0.0))
}

/// Exact particular solution (zero data at `mu0`) for sources whose kernel is
/// polynomial or exponential in `tau`, as `(ln|A_p|, arg A_p)`.
pub fn a_p_exact(s: &SourceTerm, x: f64, mu: f64, p: &PhysParams) -> Result<LogPolar> {
    let dd = p.slow_diffusivity();
    match *s {
        SourceTerm::Periodic { p1, p2 } => {
            let flat = erf_block(mu, p, Complex64::new(0.0, 0.0)).scale(Complex64::new(p1, 0.0));
            let wave = erf_block(mu, p, dd).scale(Complex64::new(p2 * x.cos(), 0.0));
            Ok(flat + wave)
        }
        SourceTerm::SignChanging => {
            Ok(erf_block(mu, p, dd).scale(Complex64::new(x.cos(), 0.0)))
        }
        SourceTerm::Algebraic => {
            let z = p.shifted(mu);
            let z0 = p.shifted(p.mu0);
            let lead = erf_block(mu, p, Complex64::new(0.0, 0.0)).scale(dd * z * 2.0 + x * x);
            // eps^beta 2 D (1 - exp(((mu + i w0)^2 - (mu0 + i w0)^2) / 2 eps))
            let tail = (LogPolar::from_complex(Complex64::new(1.0, 0.0))
                + -LogPolar::exp((z * z - z0 * z0) / (2.0 * p.eps)))
            .scale(dd * 2.0 * p.eps.powf(p.beta));
            Ok(lead + tail)
        }
        _ => Err(Error::Unsupported(format!(
            "no closed-form particular solution for the {} source; use contour quadrature",
            s.name()
        ))),
    }
}

/// Homogeneous solution `A_h(x, mu)` as `(ln|A_h|, arg A_h)`.
pub fn a_h_closed(
    data: &InitialData,
    s: &SourceTerm,
    x: f64,
    mu: f64,
    p: &PhysParams,
) -> Result<LogPolar> {
    if !(mu > p.mu0) {
        return Err(Error::Domain(format!(
            "homogeneous solution needs mu > mu0, got mu = {mu}, mu0 = {}",
            p.mu0
        )));
    }
    let tau = mu - p.mu0;
    let dd = p.slow_diffusivity();
    let z = p.shifted(mu);
    let z0 = p.shifted(p.mu0);
    let growth = LogPolar::exp((z * z - z0 * z0) / (2.0 * p.eps));
    let spread = match data {
        InitialData::QssMultiple { factor } => {
            let g = kernel_g(s, x, Complex64::new(tau, 0.0), dd)?;
            LogPolar::from_complex(factor * p.eps.sqrt() / z0) * LogPolar::from_complex(g)
        }
        InitialData::Cosine {
            wavenumber,
            amplitude,
        } => {
            let k2 = wavenumber * wavenumber;
            LogPolar::exp(-dd * k2 * tau)
                .scale(Complex64::new(amplitude * (wavenumber * x).cos(), 0.0))
        }
        InitialData::GaussianData { amplitude, sigma } => {
            let g = kernel_g(&SourceTerm::gaussian(*sigma), x, Complex64::new(tau, 0.0), dd)?;
            LogPolar::from_complex(g * *amplitude)
        }
        InitialData::Tabulated { .. } => {
            LogPolar::from_complex(heat_convolve_table(data, s, x, tau, dd, p)?)
        }
    };
    Ok(growth * spread)
}

/// Free-space heat convolution of tabulated data, held constant beyond the table.
fn heat_convolve_table(
    data: &InitialData,
    s: &SourceTerm,
    x: f64,
    tau: f64,
    dd: Complex64,
    p: &PhysParams,
) -> Result<Complex64> {
    let dt = dd * tau;
    let decay = (1.0 / (dt * 4.0)).re;
    if !(decay > 0.0) {
        return Err(Error::Domain(format!("heat convolution diverges for d*tau = {dt}")));
    }
    let w = (16.0 * 10f64.ln() / decay).sqrt();
    let inv = 1.0 / (dt * 4.0);
    let norm = (dt * (4.0 * PI)).sqrt();
    let f = |u: f64| (-(u * u) * inv).exp() * data.eval(x + u, s, p);
    let panels = ((2.0 * w / 0.05).ceil() as usize).clamp(8, 20_000);
    let est = integrate(f, -w, w, panels, Tolerance::default())?;
    Ok(est.value / norm)
}
