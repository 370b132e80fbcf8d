//! Source terms and their heat-semigroup kernels `g(x, tau)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asymptotics::erf::cerf;
use crate::error::{Error, Result};
use crate::quad::{integrate, Tolerance};

/// Distance kept from branch points and cuts of the closed forms.
pub const BRANCH_MARGIN: f64 = 1e-3;

fn one() -> f64 {
    1.0
}

/// Catalog of spatial forcing profiles `I(x)`.
///
/// The amplitude prefactor `eps^beta` is applied by the caller.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
pub enum SourceTerm {
    /// `amplitude * exp(-x^2 / (4 sigma))`
    Gaussian {
        sigma: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `i_ave + i_e erf(x)`
    SmoothStep { i_ave: f64, i_e: f64 },
    /// `p1 + p2 cos(x)`
    Periodic { p1: f64, p2: f64 },
    /// `cos(x)`
    SignChanging,
    /// `x^2`
    Algebraic,
    Constant { c: f64 },
}

impl SourceTerm {
    pub fn gaussian(sigma: f64) -> Self {
        SourceTerm::Gaussian {
            sigma,
            amplitude: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SourceTerm::Gaussian { sigma, amplitude } => sigma > 0.0 && amplitude > 0.0,
            SourceTerm::SmoothStep { i_ave, i_e } => i_ave > i_e && i_e > 0.0,
            SourceTerm::Periodic { p1, p2 } => p1 > p2 && p2 > 0.0,
            SourceTerm::SignChanging | SourceTerm::Algebraic => true,
            SourceTerm::Constant { c } => c > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid source parameters: {self:?}")))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SourceTerm::Gaussian { .. } => "gaussian",
            SourceTerm::SmoothStep { .. } => "smooth_step",
            SourceTerm::Periodic { .. } => "periodic",
            SourceTerm::SignChanging => "sign_changing",
            SourceTerm::Algebraic => "algebraic",
            SourceTerm::Constant { .. } => "constant",
        }
    }

    /// True when `I(x) = I(-x)`.
    pub fn is_even(&self) -> bool {
        !matches!(self, SourceTerm::SmoothStep { .. })
    }

    /// True when `I` changes sign, so the kernel has nodal lines in `x`.
    pub fn has_zeros(&self) -> bool {
        matches!(self, SourceTerm::SignChanging)
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_source(self, x)
    }

    /// `I''(x)`.
    pub fn second_derivative(&self, x: f64) -> f64 {
        match *self {
            SourceTerm::Gaussian { sigma, amplitude } => {
                amplitude * (x * x / (4.0 * sigma * sigma) - 0.5 / sigma) * (-x * x / (4.0 * sigma)).exp()
            }
            SourceTerm::SmoothStep { i_e, .. } => {
                i_e * (2.0 / PI.sqrt()) * (-2.0 * x) * (-x * x).exp()
            }
            SourceTerm::Periodic { p2, .. } => -p2 * x.cos(),
            SourceTerm::SignChanging => -x.cos(),
            SourceTerm::Algebraic => 2.0,
            SourceTerm::Constant { .. } => 0.0,
        }
    }
}

fn real_erf(x: f64) -> f64 {
    cerf(Complex64::new(x, 0.0))
        .map(|z| z.re)
        .unwrap_or(f64::NAN)
}

pub fn eval_source(s: &SourceTerm, x: f64) -> f64 {
    match *s {
        SourceTerm::Gaussian { sigma, amplitude } => amplitude * (-x * x / (4.0 * sigma)).exp(),
        SourceTerm::SmoothStep { i_ave, i_e } => i_ave + i_e * real_erf(x),
        SourceTerm::Periodic { p1, p2 } => p1 + p2 * x.cos(),
        SourceTerm::SignChanging => x.cos(),
        SourceTerm::Algebraic => x * x,
        SourceTerm::Constant { c } => c,
    }
}

/// True when `z` sits on or next to the non-positive real axis.
fn near_cut(z: Complex64) -> bool {
    z.norm() < BRANCH_MARGIN || (z.re <= 0.0 && z.im.abs() < BRANCH_MARGIN)
}

/// Heat-semigroup image of the source: the solution of `g_tau = d g_xx`
/// with `g(x, 0) = I(x)`, continued analytically to complex `tau`.
pub fn kernel_g(s: &SourceTerm, x: f64, tau: Complex64, d: Complex64) -> Result<Complex64> {
    let dt = d * tau;
    match *s {
        SourceTerm::Gaussian { sigma, amplitude } => {
            let z = dt + sigma;
            if near_cut(z) {
                return Err(Error::Domain(format!(
                    "gaussian kernel: d*tau + sigma = {z} is on the branch cut of the square root"
                )));
            }
            Ok((Complex64::new(sigma, 0.0) / z).sqrt() * (-x * x / (4.0 * z)).exp() * amplitude)
        }
        SourceTerm::SmoothStep { i_ave, i_e } => {
            let w = dt * 4.0 + 1.0;
            if w.re <= BRANCH_MARGIN {
                return Err(Error::Domain(format!(
                    "smooth-step kernel: |arg sqrt(1 + 4 d tau)| must stay below pi/4, got 1 + 4 d tau = {w}"
                )));
            }
            Ok(cerf(x / w.sqrt())? * i_e + i_ave)
        }
        SourceTerm::Periodic { p1, p2 } => Ok((-dt).exp() * x.cos() * p2 + p1),
        SourceTerm::SignChanging => Ok((-dt).exp() * x.cos()),
        SourceTerm::Algebraic => {
            if dt.re < 0.0 && dt.im.abs() < BRANCH_MARGIN * dt.norm() {
                return Err(Error::Domain(format!(
                    "algebraic kernel: d*tau = {dt} lies on the negative real axis"
                )));
            }
            Ok(dt * 2.0 + x * x)
        }
        SourceTerm::Constant { c } => Ok(Complex64::new(c, 0.0)),
    }
}

/// Direct quadrature of the heat convolution defining [`kernel_g`].
pub fn kernel_g_numeric(s: &SourceTerm, x: f64, tau: Complex64, d: Complex64) -> Result<Complex64> {
    let dt = d * tau;
    let decay = (1.0 / (dt * 4.0)).re;
    if !(dt.re > 0.0) || !(decay > 0.0) {
        return Err(Error::Domain(format!(
            "heat convolution diverges for d*tau = {dt}"
        )));
    }
    // exp(-W^2 decay) < 1e-16, widened for the quadratic source.
    let mut half_width = (16.0 * 10f64.ln() / decay).sqrt();
    if matches!(s, SourceTerm::Algebraic) {
        half_width *= 1.5;
        half_width += x.abs();
    }
    let norm = (dt * (4.0 * PI)).sqrt();
    let inv = 1.0 / (dt * 4.0);
    let f = |u: f64| (-(u * u) * inv).exp() * eval_source(s, x + u);
    // Split at the peak and keep panels narrower than the source features.
    let panels = ((2.0 * half_width / 0.25).ceil() as usize).clamp(8, 4000);
    let tol = Tolerance {
        abs: 1e-14,
        rel: 1e-11,
        ..Tolerance::default()
    };
    let est = integrate(f, -half_width, half_width, panels, tol)?;
    let value = est.value / norm;
    if est.error > 1e-9 * est.value.norm().max(1e-300) && est.error > 1e-13 {
        return Err(Error::Quadrature {
            message: "heat convolution did not reach 1e-9".into(),
            achieved: est.error / est.value.norm(),
        });
    }
    Ok(value)
}
