//! Quasi-steady states of the forced CGL equation and their residuals.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asymptotics::faddeeva;
use crate::error::{Error, Result};
use crate::grid::{laplacian_values, Grid, PhysParams};
use crate::sources::{eval_source, SourceTerm};

/// Default half-width of the band around `mu = 0` where the expansions are not ordered.
pub const QSS_DELTA: f64 = 0.05;

/// Floor on `I(x)` below which the large-source correction is not evaluated.
pub const SOURCE_FLOOR: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QssRegime {
    BaseCase,
    LargeAmplitude,
    Algebraic,
    O1Diffusivity,
}

fn check_band(mu: f64, delta: f64) -> Result<()> {
    if mu.abs() < delta {
        Err(Error::OutOfRegime { mu, delta })
    } else {
        Ok(())
    }
}

/// Small-source QSS: `-sqrt(eps) I / (mu + i w0)` plus, at order 2, the
/// `eps^(3/2)` linear and cubic corrections.
pub fn qss_base(s: &SourceTerm, x: f64, mu: f64, p: &PhysParams, order: u8) -> Result<Complex64> {
    check_band(mu, QSS_DELTA)?;
    if !p.is_base() {
        return Err(Error::InvalidInput(format!(
            "base QSS needs beta = 1/2 and gamma = 1, got {} and {}",
            p.beta, p.gamma
        )));
    }
    qss_base_unchecked(s, x, mu, p, order)
}

pub(crate) fn qss_base_unchecked(
    s: &SourceTerm,
    x: f64,
    mu: f64,
    p: &PhysParams,
    order: u8,
) -> Result<Complex64> {
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidInput(format!("base QSS order must be 1 or 2, got {order}")));
    }
    let z = p.shifted(mu);
    let i = eval_source(s, x);
    let lead = -p.eps.sqrt() * i / z;
    if order == 1 {
        return Ok(lead);
    }
    let linear = (p.d() * z * s.second_derivative(x) + i) / (z * z * z);
    let cubic = Complex64::new(1.0, p.alpha) * i.powi(3)
        / (z * z * (mu * mu + p.omega0 * p.omega0));
    Ok(lead + (linear - cubic) * p.eps.powf(1.5))
}

/// Large-source QSS `eps^(-1/6) (1 - i alpha) I^(1/3) / (1 + alpha^2)^(2/3)`,
/// with the `eps^(1/6)` correction at order 1.
pub fn qss_large_amp(
    s: &SourceTerm,
    x: f64,
    mu: f64,
    p: &PhysParams,
    order: u8,
) -> Result<Complex64> {
    if order > 1 {
        return Err(Error::InvalidInput(format!(
            "large-source QSS order must be 0 or 1, got {order}"
        )));
    }
    let i = eval_source(s, x);
    let a = p.alpha;
    let a2 = 1.0 + a * a;
    let cube = i.abs().cbrt().copysign(i);
    let lead = Complex64::new(1.0, -a) * cube / a2.powf(2.0 / 3.0) * p.eps.powf(-1.0 / 6.0);
    if order == 0 {
        return Ok(lead);
    }
    if i.abs() < SOURCE_FLOOR {
        return Err(Error::DegenerateSource { x, value: i });
    }
    let w = p.omega0;
    let num = Complex64::new(
        mu - 3.0 * a * a * mu + 4.0 * a * w,
        3.0 * w - a * a * w - 4.0 * a * mu,
    );
    let correction = num / (3.0 * a2.powf(4.0 / 3.0) * cube);
    Ok(lead + correction * p.eps.powf(1.0 / 6.0))
}

/// QSS for the quadratic source `x^2`: linear balance near the centre,
/// cubic balance far out, blended linearly over `[0.8, 1.2] eps^(-1/4)`.
pub fn qss_algebraic(x: f64, mu: f64, p: &PhysParams) -> Complex64 {
    let xc = p.eps.powf(-0.25);
    let ax = x.abs();
    let w = ((ax - 0.8 * xc) / (0.4 * xc)).clamp(0.0, 1.0);
    let inner = || -p.eps.sqrt() * x * x / p.shifted(mu);
    let outer = || {
        let a = p.alpha;
        let a2 = 1.0 + a * a;
        let lead = Complex64::new(1.0, -a) * p.eps.powf(1.0 / 6.0) * ax.powf(2.0 / 3.0)
            / a2.powf(2.0 / 3.0);
        let num = Complex64::new(3.0 - a * a, -4.0 * a) * p.shifted(mu) - 2.0 * mu * a2;
        lead + num * p.eps.powf(-1.0 / 6.0) * ax.powf(-2.0 / 3.0) / (3.0 * a2.powf(4.0 / 3.0))
    };
    if w == 0.0 {
        inner()
    } else if w == 1.0 {
        outer()
    } else {
        inner() * (1.0 - w) + outer() * w
    }
}

/// Linear QSS with O(1) diffusivity `d_hat` and Gaussian source.
pub fn qss_o1_diffusivity(s: &SourceTerm, x: f64, mu: f64, p: &PhysParams) -> Result<Complex64> {
    check_band(mu, QSS_DELTA)?;
    if !p.is_order_one() {
        return Err(Error::InvalidInput(format!(
            "O(1) QSS needs beta = 0 and gamma = 0, got {} and {}",
            p.beta, p.gamma
        )));
    }
    qss_o1_unchecked(s, x, mu, p)
}

/// `c1 e^{-kx} + c2 e^{kx}` with `k = sqrt(-(mu + i w0)/d_hat)`, rewritten with
/// the Faddeeva function so that neither factor overflows:
/// `c1 e^{-kx} = P e^{-x^2/4 sigma} w(i(s - h))`, `c2 e^{kx} = P e^{-x^2/4 sigma} w(i(s + h))`,
/// where `s = sqrt(sigma) k`, `h = x / (2 sqrt(sigma))` and `P = (1/2) sqrt(pi sigma / (-d_hat (mu + i w0)))`.
pub(crate) fn qss_o1_unchecked(
    s: &SourceTerm,
    x: f64,
    mu: f64,
    p: &PhysParams,
) -> Result<Complex64> {
    let SourceTerm::Gaussian { sigma, amplitude } = *s else {
        return Err(Error::Unsupported(format!(
            "O(1)-diffusivity QSS is available for the Gaussian source only, got {}",
            s.name()
        )));
    };
    let d = p.d();
    let z = p.shifted(mu);
    let k = (-z / d).sqrt();
    let sk = k * sigma.sqrt();
    let h = x / (2.0 * sigma.sqrt());
    let pref = (Complex64::new(PI * sigma, 0.0) / (-d * z)).sqrt() * 0.5;
    let pair = damped_w(sk, -h) + damped_w(sk, h);
    Ok(pref * pair * amplitude)
}

/// `e^{-h^2} w(i (s + h))`, using `w(z) = 2 e^{-z^2} - w(-z)` below the real
/// axis so the growing and decaying exponentials are combined before evaluation.
fn damped_w(s: Complex64, h: f64) -> Complex64 {
    let u = s + h;
    let i = Complex64::i();
    let damp = (-h * h).exp();
    if u.re >= 0.0 {
        faddeeva(i * u) * damp
    } else {
        (s * s + s * (2.0 * h)).exp() * 2.0 - faddeeva(-i * u) * damp
    }
}

/// A QSS expansion bound to its source and parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QssExpansion {
    pub regime: QssRegime,
    pub order: u8,
    pub source: SourceTerm,
    pub params: PhysParams,
}

impl QssExpansion {
    pub fn new(regime: QssRegime, order: u8, source: SourceTerm, params: PhysParams) -> Self {
        Self {
            regime,
            order,
            source,
            params,
        }
    }

    pub fn eval(&self, x: f64, mu: f64) -> Result<Complex64> {
        let (s, p) = (&self.source, &self.params);
        match self.regime {
            QssRegime::BaseCase => qss_base(s, x, mu, p, self.order),
            QssRegime::LargeAmplitude => qss_large_amp(s, x, mu, p, self.order),
            QssRegime::Algebraic => Ok(qss_algebraic(x, mu, p)),
            QssRegime::O1Diffusivity => qss_o1_diffusivity(s, x, mu, p),
        }
    }

    /// Same formulas without the `|mu| >= delta` guard; used to track the QSS
    /// through the Hopf point.
    pub fn eval_unchecked(&self, x: f64, mu: f64) -> Result<Complex64> {
        let (s, p) = (&self.source, &self.params);
        match self.regime {
            QssRegime::BaseCase => qss_base_unchecked(s, x, mu, p, self.order),
            QssRegime::O1Diffusivity => qss_o1_unchecked(s, x, mu, p),
            _ => self.eval(x, mu),
        }
    }
}

/// Sup-norm over the grid of
/// `eps dA/dmu - (mu + i w0) A + (1 + i alpha)|A|^2 A - eps^beta I - eps^gamma d A_xx`.
pub fn qss_residual(
    q: &QssExpansion,
    s: &SourceTerm,
    p: &PhysParams,
    mu: f64,
    grid: &Grid,
) -> Result<f64> {
    let h = 1e-4;
    let xs = grid.points();
    let at = |m: f64| -> Result<Vec<Complex64>> {
        xs.iter().map(|&x| q.eval_unchecked(x, m)).collect()
    };
    let a = at(mu)?;
    let ap = at(mu + h)?;
    let am = at(mu - h)?;
    let lap = laplacian_values(&a, grid.dx())?;
    let z = p.shifted(mu);
    let cubic = Complex64::new(1.0, p.alpha);
    let kappa = p.fast_diffusivity();
    let scale = p.source_scale();
    let mut worst: f64 = 0.0;
    for j in 0..xs.len() {
        let da = (ap[j] - am[j]) / (2.0 * h);
        let r = da * p.eps - z * a[j] + cubic * a[j].norm_sqr() * a[j]
            - scale * eval_source(s, xs[j])
            - kappa * lap[j];
        worst = worst.max(r.norm());
    }
    Ok(worst)
}
