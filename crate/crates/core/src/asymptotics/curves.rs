use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exact::a_h_closed;
use super::InitialData;
use crate::error::{Error, Result};
use crate::grid::{Grid, PhysParams};
use crate::qss::qss_o1_unchecked;
use crate::sources::{eval_source, kernel_g, SourceTerm};

/// Below this `|g|` the buffer curve is reported as `+inf`.
pub const G_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Stbc,
    HomExit,
    Hopf,
    /// Pointwise minimum of the buffer and homogeneous exit curves.
    Predicted,
}

impl CurveKind {
    pub fn label(&self) -> &'static str {
        match self {
            CurveKind::Stbc => "stbc",
            CurveKind::HomExit => "hom_exit",
            CurveKind::Hopf => "hopf",
            CurveKind::Predicted => "predicted",
        }
    }
}

/// A curve `mu(x)` sampled on a grid; `+inf` marks points with no finite value.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSample {
    pub x: Vec<f64>,
    pub mu: Vec<f64>,
    pub kind: CurveKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StbcRegime {
    /// `beta = 1/2`, `gamma = 1`
    Base,
    /// `beta = 0`, `gamma = 0`
    O1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HopfRegime {
    Base,
    LargeAmp,
    O1,
}

fn check_stbc_regime(p: &PhysParams, regime: StbcRegime) -> Result<()> {
    let ok = match regime {
        StbcRegime::Base => p.is_base(),
        StbcRegime::O1 => p.is_order_one(),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{regime:?} buffer curve needs matching exponents, got beta = {}, gamma = {}",
            p.beta, p.gamma
        )))
    }
}

/// Right-hand side constant of the buffer-curve relation
/// `mu^2 = c - 2 eps ln|g(x, mu + i w0)|`.
fn stbc_constant(p: &PhysParams, threshold: f64) -> f64 {
    let e = p.eps;
    p.omega0 * p.omega0 + 2.0 * e * threshold.ln() - e * (2.0 * PI).ln()
        - (2.0 * p.beta - 1.0) * e * e.ln()
}

fn log_abs_g(s: &SourceTerm, x: f64, mu: f64, p: &PhysParams) -> Result<f64> {
    Ok(kernel_g(s, x, p.shifted(mu), p.slow_diffusivity())?.norm().ln())
}

/// Residual of the buffer-curve relation at `mu`; zero on the curve.
pub fn stbc_residual(
    s: &SourceTerm,
    x: f64,
    mu: f64,
    p: &PhysParams,
    threshold: f64,
) -> Result<f64> {
    Ok(mu * mu - stbc_constant(p, threshold) + 2.0 * p.eps * log_abs_g(s, x, mu, p)?)
}

/// Buffer curve with the onset criterion `|A_p| = 1`.
pub fn mu_stbc(s: &SourceTerm, x: f64, p: &PhysParams, regime: StbcRegime) -> Result<f64> {
    mu_stbc_with_threshold(s, x, p, regime, 1.0)
}

/// Buffer curve with the onset criterion `|A_p| = threshold`.
pub fn mu_stbc_with_threshold(
    s: &SourceTerm,
    x: f64,
    p: &PhysParams,
    regime: StbcRegime,
    threshold: f64,
) -> Result<f64> {
    check_stbc_regime(p, regime)?;
    if !(threshold > 0.0) {
        return Err(Error::InvalidInput("onset threshold must be positive".into()));
    }
    let w0 = p.omega0;
    let (lo, hi) = (0.5 * w0, 5.0 * w0);

    // Only sources with real zeros have nodal lines; Gaussian tails are tiny but never zero.
    let vanishes = s.has_zeros() && (0..=16).all(|k| {
        let mu = lo + (hi - lo) * k as f64 / 16.0;
        kernel_g(s, x, p.shifted(mu), p.slow_diffusivity())
            .map(|g| g.norm() < G_FLOOR)
            .unwrap_or(false)
    });
    if vanishes {
        return Ok(f64::INFINITY);
    }

    let c = stbc_constant(p, threshold);
    let mut mu = w0;
    let mut last_step = f64::INFINITY;
    for _ in 0..400 {
        let Ok(lg) = log_abs_g(s, x, mu, p) else { break };
        let rhs = c - 2.0 * p.eps * lg;
        if !(rhs > 0.0) {
            break;
        }
        let next = rhs.sqrt();
        let step = (next - mu).abs();
        mu = next;
        if step <= 1e-14 * mu.max(1.0) {
            return Ok(mu);
        }
        if step > last_step * 1.5 && step > 1e-6 {
            break;
        }
        last_step = step;
    }
    bisect_stbc(s, x, p, threshold, lo, hi)
}

fn bisect_stbc(
    s: &SourceTerm,
    x: f64,
    p: &PhysParams,
    threshold: f64,
    lo: f64,
    mut hi: f64,
) -> Result<f64> {
    let f = |mu: f64| stbc_residual(s, x, mu, p, threshold);
    let f_lo = f(lo)?;
    let mut f_hi = f(hi)?;
    while f_lo.signum() == f_hi.signum() && hi < 100.0 * p.omega0 {
        hi *= 2.0;
        f_hi = f(hi)?;
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Convergence(format!(
            "buffer curve at x = {x}: residual keeps sign {} on [{lo}, {hi}]",
            f_lo.signum()
        )));
    }
    let (mut a, mut b, mut fa) = (lo, hi, f_lo);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        if b - a <= 1e-15 * b.abs() {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

/// First `mu > 0` where the homogeneous solution reaches unit amplitude.
pub fn mu_h(data: &InitialData, s: &SourceTerm, x: f64, p: &PhysParams) -> Result<f64> {
    if p.mu0 >= 0.0 {
        return Err(Error::InvalidInput(format!(
            "homogeneous exit needs mu0 < 0, got {}",
            p.mu0
        )));
    }
    let lo = 0.0;
    let hi = 3.0 * p.mu0.abs() + 3.0 * p.omega0;
    let f = |mu: f64| a_h_closed(data, s, x, mu, p).map(|l| l.log_amplitude);
    let samples = 600;
    let mut prev_mu = lo;
    let mut prev = f(lo)?;
    if prev >= 0.0 {
        return Ok(lo);
    }
    for k in 1..=samples {
        let mu = lo + (hi - lo) * k as f64 / samples as f64;
        let v = f(mu)?;
        if v >= 0.0 {
            let (mut a, mut b) = (prev_mu, mu);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if f(m)? < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
                if b - a <= 1e-15 * b.abs().max(1e-300) {
                    break;
                }
            }
            return Ok(0.5 * (a + b));
        }
        prev_mu = mu;
        prev = v;
    }
    let _ = prev;
    Err(Error::NoExit { x, lo, hi })
}

/// Instantaneous Hopf point `mu_Hopf(x)` of the quasi-steady state.
pub fn mu_hopf(s: &SourceTerm, x: f64, p: &PhysParams, regime: HopfRegime) -> Result<f64> {
    let ok = match regime {
        HopfRegime::Base => p.is_base(),
        HopfRegime::LargeAmp => p.is_large_amplitude(),
        HopfRegime::O1 => p.is_order_one(),
    };
    if !ok {
        return Err(Error::InvalidInput(format!(
            "{regime:?} Hopf curve needs matching exponents, got beta = {}, gamma = {}",
            p.beta, p.gamma
        )));
    }
    let i = eval_source(s, x);
    match regime {
        HopfRegime::Base => Ok(2.0 * p.eps * i * i / (p.omega0 * p.omega0)),
        HopfRegime::LargeAmp => {
            let a2 = 1.0 + p.alpha * p.alpha;
            Ok(2.0 * p.eps.powf(-1.0 / 3.0) * i.abs().powf(2.0 / 3.0) / a2.powf(1.0 / 3.0))
        }
        HopfRegime::O1 => {
            let mut mu = 2.0 * qss_o1_unchecked(s, x, 0.1, p)?.norm_sqr();
            for _ in 0..200 {
                let next = 2.0 * qss_o1_unchecked(s, x, mu, p)?.norm_sqr();
                if (next - mu).abs() <= 1e-8 {
                    return Ok(next);
                }
                mu = next;
            }
            Err(Error::Convergence(format!(
                "Hopf fixed point at x = {x} did not settle in 200 iterations"
            )))
        }
    }
}

/// `(mu_I+, mu_I-)`: imaginary parts of the two saddles created by a large
/// source, both located at `mu_R = mu_Hopf(x)`.
pub fn large_amplitude_saddles(s: &SourceTerm, x: f64, p: &PhysParams) -> (f64, f64) {
    let i = eval_source(s, x);
    let a2 = 1.0 + p.alpha * p.alpha;
    let shift = (3.0 * p.alpha * p.alpha - 1.0) / 8.0;
    let plus = -p.omega0 + 8.0 * i.powf(4.0 / 3.0) / (p.eps.powf(2.0 / 3.0) * a2.powf(2.0 / 3.0))
        - shift;
    (plus, -p.omega0 + shift)
}

pub fn stbc_curve(
    s: &SourceTerm,
    grid: &Grid,
    p: &PhysParams,
    regime: StbcRegime,
    threshold: f64,
) -> Result<CurveSample> {
    let x = grid.points();
    let mu = x
        .par_iter()
        .map(|&x| mu_stbc_with_threshold(s, x, p, regime, threshold))
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveSample {
        x,
        mu,
        kind: CurveKind::Stbc,
    })
}

pub fn hom_exit_curve(
    data: &InitialData,
    s: &SourceTerm,
    grid: &Grid,
    p: &PhysParams,
) -> Result<CurveSample> {
    let x = grid.points();
    let mu = x
        .par_iter()
        .map(|&x| match mu_h(data, s, x, p) {
            Err(Error::NoExit { .. }) => Ok(f64::INFINITY),
            other => other,
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveSample {
        x,
        mu,
        kind: CurveKind::HomExit,
    })
}

pub fn hopf_curve(
    s: &SourceTerm,
    grid: &Grid,
    p: &PhysParams,
    regime: HopfRegime,
) -> Result<CurveSample> {
    let x = grid.points();
    let mu = x
        .par_iter()
        .map(|&x| mu_hopf(s, x, p, regime))
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveSample {
        x,
        mu,
        kind: CurveKind::Hopf,
    })
}
