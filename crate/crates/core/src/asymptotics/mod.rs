//! Predictive curves, exact linear solutions and the special functions they need.

pub mod erf;
pub mod logpolar;

mod curves;
mod exact;
mod transition;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use curves::{
    hopf_curve, large_amplitude_saddles, mu_h, mu_hopf, mu_stbc, mu_stbc_with_threshold,
    stbc_curve, stbc_residual, hom_exit_curve, CurveKind, CurveSample, HopfRegime, StbcRegime,
    G_FLOOR,
};
pub use erf::{cerf, erf_difference_scaled, faddeeva};
pub use exact::{a_h_closed, a_p_exact};
pub use logpolar::LogPolar;
pub use transition::c_transition;

use crate::error::{Error, Result};
use crate::grid::{Grid, PhysParams};
use crate::sources::{eval_source, SourceTerm};

/// Data `A(x, mu0) = A0(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
pub enum InitialData {
    /// `factor * sqrt(eps) * I(x) / (mu0 + i w0)`; `factor = -1` is the leading QSS.
    QssMultiple { factor: Complex64 },
    /// `amplitude * cos(wavenumber * x)`
    Cosine { wavenumber: f64, amplitude: f64 },
    /// `amplitude * exp(-x^2 / (4 sigma))`
    GaussianData { amplitude: f64, sigma: f64 },
    /// Values on a uniform grid over `[-half_length, half_length]`.
    Tabulated {
        half_length: f64,
        values: Vec<Complex64>,
    },
}

impl InitialData {
    pub fn qss() -> Self {
        InitialData::QssMultiple {
            factor: Complex64::new(-1.0, 0.0),
        }
    }

    /// `cos(n pi x / l)`
    pub fn cosine_mode(n: u32, half_length: f64, amplitude: f64) -> Self {
        InitialData::Cosine {
            wavenumber: n as f64 * std::f64::consts::PI / half_length,
            amplitude,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            InitialData::QssMultiple { factor } => factor.re.is_finite() && factor.im.is_finite(),
            InitialData::Cosine {
                wavenumber,
                amplitude,
            } => wavenumber.is_finite() && amplitude.is_finite(),
            InitialData::GaussianData { amplitude, sigma } => amplitude.is_finite() && *sigma > 0.0,
            InitialData::Tabulated {
                half_length,
                values,
            } => {
                *half_length > 0.0
                    && values.len() >= 3
                    && values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid initial data: {self:?}")))
        }
    }

    /// Pointwise value of `A0`.
    pub fn eval(&self, x: f64, s: &SourceTerm, p: &PhysParams) -> Complex64 {
        match self {
            InitialData::QssMultiple { factor } => {
                factor * p.eps.sqrt() * eval_source(s, x) / p.shifted(p.mu0)
            }
            InitialData::Cosine {
                wavenumber,
                amplitude,
            } => Complex64::new(amplitude * (wavenumber * x).cos(), 0.0),
            InitialData::GaussianData { amplitude, sigma } => {
                Complex64::new(amplitude * (-x * x / (4.0 * sigma)).exp(), 0.0)
            }
            InitialData::Tabulated {
                half_length,
                values,
            } => {
                let n = values.len() - 1;
                let dx = 2.0 * half_length / n as f64;
                let u = ((x + half_length) / dx).clamp(0.0, n as f64);
                let j = (u.floor() as usize).min(n - 1);
                let w = u - j as f64;
                values[j] * (1.0 - w) + values[j + 1] * w
            }
        }
    }

    pub fn sample(&self, grid: &Grid, s: &SourceTerm, p: &PhysParams) -> Vec<Complex64> {
        grid.points().into_iter().map(|x| self.eval(x, s, p)).collect()
    }
}
