//! Convergence scans in `eps` shared by the CLI verification commands and the tests.

use serde::{Deserialize, Serialize};

use crate::contour::{build_contour, saddle_term, segment_asymptotics_check, stokes_prefactor};
use crate::contour::{ContourKind, SegmentReport};
use crate::error::{Error, Result};
use crate::grid::{Grid, PhysParams};
use crate::qss::{qss_residual, QssExpansion, QssRegime};
use crate::sources::SourceTerm;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub eps: f64,
    pub error: f64,
}

/// Errors against `eps` with the least-squares slope of `ln error` on `ln eps`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsScan {
    pub label: String,
    pub points: Vec<ScanPoint>,
    pub slope: f64,
}

impl EpsScan {
    pub fn new(label: impl Into<String>, points: Vec<ScanPoint>) -> Self {
        let slope = loglog_slope(&points);
        Self {
            label: label.into(),
            points,
            slope,
        }
    }

    /// `error[k] / error[k + 1]` for consecutive entries.
    pub fn ratios(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| w[0].error / w[1].error).collect()
    }
}

pub fn loglog_slope(points: &[ScanPoint]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.eps > 0.0 && p.error > 0.0)
        .map(|p| (p.eps.ln(), p.error.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

fn check_eps(eps: &[f64]) -> Result<()> {
    if eps.len() < 2 || eps.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "an eps scan needs at least two positive values, got {eps:?}"
        )));
    }
    Ok(())
}

/// Sup-norm QSS residual at fixed `mu` for each `eps`.
pub fn qss_residual_scan(
    s: &SourceTerm,
    p: &PhysParams,
    order: u8,
    mu: f64,
    grid: &Grid,
    eps: &[f64],
) -> Result<EpsScan> {
    check_eps(eps)?;
    let points = eps
        .iter()
        .map(|&e| {
            let pe = PhysParams { eps: e, ..*p };
            let q = QssExpansion::new(QssRegime::BaseCase, order, *s, pe);
            Ok(ScanPoint {
                eps: e,
                error: qss_residual(&q, s, &pe, mu, grid)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EpsScan::new(format!("qss_order{order}_mu{mu}"), points))
}

/// Relative error of the quadrature prefactor against `sqrt(2 pi) g(x, mu + i w0)`.
pub fn prefactor_scan(
    s: &SourceTerm,
    x: f64,
    mu: f64,
    p: &PhysParams,
    eps: &[f64],
) -> Result<EpsScan> {
    check_eps(eps)?;
    let points = eps
        .iter()
        .map(|&e| {
            let pe = PhysParams { eps: e, ..*p };
            let kind = if mu > pe.omega0 { ContourKind::C } else { ContourKind::Cr };
            let path = build_contour(kind, pe.mu0, mu, &pe)?;
            let numeric = stokes_prefactor(&path, s, x, &pe)?;
            let lead = saddle_term(s, x, mu, &pe)?.to_complex() / pe.eps.powf(pe.beta - 0.5);
            Ok(ScanPoint {
                eps: e,
                error: (numeric - lead).norm() / lead.norm(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EpsScan::new(format!("prefactor_x{x}_mu{mu}"), points))
}

/// Segment reports of the path that `mu` selects, tagged with `eps` and `mu`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentCheck {
    pub eps: f64,
    pub mu: f64,
    pub x: f64,
    pub segments: Vec<SegmentReport>,
}

pub fn segment_check(s: &SourceTerm, x: f64, mu: f64, p: &PhysParams) -> Result<SegmentCheck> {
    let path = build_contour(ContourKind::for_mu(mu, p), p.mu0, mu, p)?;
    Ok(SegmentCheck {
        eps: p.eps,
        mu,
        x,
        segments: segment_asymptotics_check(&path, s, x, p)?,
    })
}
