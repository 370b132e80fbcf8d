//! Exit times, case classification, wavetrain dispersion and prediction reports.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    hom_exit_curve, stbc_curve, CurveKind, CurveSample, InitialData, StbcRegime,
};
use crate::error::{Error, Result};
use crate::grid::{Grid, PhysParams};
use crate::qss::{QssExpansion, QSS_DELTA};
use crate::solver::Trajectory;
use crate::sources::SourceTerm;

pub const DEFAULT_EXIT_THRESHOLD: f64 = 0.1;

/// Measured exit `mu` per grid point; `+inf` where the solution never left the QSS.
#[derive(Clone, Debug, PartialEq)]
pub struct ExitProfile {
    pub x: Vec<f64>,
    pub mu_exit: Vec<f64>,
    pub threshold: f64,
}

impl ExitProfile {
    pub fn at(&self, x: f64) -> Option<f64> {
        let j = self
            .x
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))?
            .0;
        Some(self.mu_exit[j])
    }
}

/// Smallest `mu > 0` at which `|A - A_QSS|` reaches `threshold`, interpolated
/// linearly between the bracketing snapshots.
pub fn exit_times(traj: &Trajectory, q: &QssExpansion, threshold: f64) -> Result<ExitProfile> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidInput(format!(
            "exit threshold must be > 0, got {threshold}"
        )));
    }
    let x = traj.grid.points();
    let start = traj.snapshots.iter().position(|s| s.mu > 0.0);
    let mu_exit = x
        .par_iter()
        .enumerate()
        .map(|(j, &xj)| -> Result<f64> {
            let Some(start) = start else {
                return Ok(f64::INFINITY);
            };
            let gap = |k: usize| -> Result<f64> {
                let s = &traj.snapshots[k];
                Ok((s.values[j] - q.eval_unchecked(xj, s.mu)?).norm())
            };
            let mut prev: Option<(f64, f64)> = None;
            if start > 0 {
                prev = Some((traj.snapshots[start - 1].mu, gap(start - 1)?));
            }
            for k in start..traj.snapshots.len() {
                let mu = traj.snapshots[k].mu;
                let d = gap(k)?;
                if d >= threshold {
                    return Ok(match prev {
                        Some((mu0, d0)) if d0 < threshold && k > start => {
                            mu0 + (threshold - d0) / (d - d0) * (mu - mu0)
                        }
                        _ => mu,
                    });
                }
                prev = Some((mu, d));
            }
            Ok(f64::INFINITY)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExitProfile {
        x,
        mu_exit,
        threshold,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    Stbc,
    Hom,
}

impl Winner {
    pub fn label(&self) -> &'static str {
        match self {
            Winner::Stbc => "stbc",
            Winner::Hom => "hom",
        }
    }
}

/// `min(mu_stbc, mu_h)` with the curve that attains it.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictedExit {
    pub x: Vec<f64>,
    pub mu: Vec<f64>,
    pub stbc: Vec<f64>,
    pub hom: Vec<f64>,
    pub winner: Vec<Winner>,
}

impl PredictedExit {
    pub fn from_curves(stbc: &CurveSample, hom: &CurveSample) -> Result<Self> {
        if stbc.x.len() != hom.x.len() {
            return Err(Error::InvalidInput("curves are sampled on different grids".into()));
        }
        let (mu, winner) = stbc
            .mu
            .iter()
            .zip(&hom.mu)
            .map(|(&s, &h)| if h < s { (h, Winner::Hom) } else { (s, Winner::Stbc) })
            .unzip();
        Ok(Self {
            x: stbc.x.clone(),
            mu,
            stbc: stbc.mu.clone(),
            hom: hom.mu.clone(),
            winner,
        })
    }

    pub fn curve(&self) -> CurveSample {
        CurveSample {
            x: self.x.clone(),
            mu: self.mu.clone(),
            kind: CurveKind::Predicted,
        }
    }
}

/// Buffer-curve onset level: `sqrt(eps)` for the periodic source, 1 otherwise.
pub fn onset_threshold(s: &SourceTerm, p: &PhysParams) -> f64 {
    match s {
        SourceTerm::Periodic { .. } => p.eps.sqrt(),
        _ => 1.0,
    }
}

pub fn stbc_regime(p: &PhysParams) -> Result<StbcRegime> {
    if p.is_base() {
        Ok(StbcRegime::Base)
    } else if p.is_order_one() {
        Ok(StbcRegime::O1)
    } else {
        Err(Error::Unsupported(format!(
            "no buffer curve for beta = {}, gamma = {}",
            p.beta, p.gamma
        )))
    }
}

pub fn predicted_exit(
    s: &SourceTerm,
    data: &InitialData,
    p: &PhysParams,
    grid: &Grid,
) -> Result<PredictedExit> {
    let stbc = stbc_curve(s, grid, p, stbc_regime(p)?, onset_threshold(s, p))?;
    let hom = hom_exit_curve(data, s, grid, p)?;
    PredictedExit::from_curves(&stbc, &hom)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case_id: u8,
    /// `x` where `mu_stbc - mu_h` changes sign.
    pub crossovers: Vec<f64>,
    pub winners: Vec<Winner>,
}

/// Sign changes of `mu_stbc - mu_h`, linearly interpolated.
pub fn crossovers(pred: &PredictedExit) -> Vec<f64> {
    let diff: Vec<f64> = pred
        .stbc
        .iter()
        .zip(&pred.hom)
        .map(|(s, h)| match (s.is_finite(), h.is_finite()) {
            (true, true) => s - h,
            (false, true) => 1.0,
            (true, false) => -1.0,
            (false, false) => 0.0,
        })
        .collect();
    let mut out = Vec::new();
    for j in 1..diff.len() {
        let (a, b) = (diff[j - 1], diff[j]);
        if a == 0.0 || b == 0.0 || a.signum() == b.signum() {
            continue;
        }
        let (x0, x1) = (pred.x[j - 1], pred.x[j]);
        let exact = pred.stbc[j - 1].is_finite()
            && pred.stbc[j].is_finite()
            && pred.hom[j - 1].is_finite()
            && pred.hom[j].is_finite();
        out.push(if exact {
            x0 + a / (a - b) * (x1 - x0)
        } else {
            0.5 * (x0 + x1)
        });
    }
    out
}

pub fn classify_case(pred: &PredictedExit, p: &PhysParams) -> CaseReport {
    let all = |w: Winner| pred.winner.iter().all(|&v| v == w);
    let case_id = if p.mu0 > -p.omega0 {
        4
    } else if all(Winner::Stbc) {
        1
    } else if all(Winner::Hom) {
        3
    } else {
        2
    };
    CaseReport {
        case_id,
        crossovers: crossovers(pred),
        winners: pred.winner.clone(),
    }
}

/// True when `mu0` lies in the near-Hopf entry window `(-w0, -delta]`.
pub fn near_hopf_entry(p: &PhysParams) -> bool {
    p.mu0 > -p.omega0 && p.mu0 <= -QSS_DELTA
}

/// Uniform wavetrain `A = r e^{i(k x - omega t)}` of the unforced equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dispersion {
    pub r: f64,
    pub omega: f64,
    /// Phase velocity; absent at `k = 0`.
    pub c_p: Option<f64>,
    pub c_g: f64,
    pub bf_stable: bool,
}

pub fn dispersion(k: f64, mu: f64, p: &PhysParams) -> Result<Dispersion> {
    let (e, a, dr, di) = (p.eps, p.alpha, p.d_re, p.d_im);
    let r2 = mu - e * dr * k * k;
    if !(r2 >= 0.0) {
        return Err(Error::Domain(format!(
            "no wavetrain with k = {k} at mu = {mu}: mu - eps d_R k^2 = {r2} < 0"
        )));
    }
    let omega = -p.omega0 + a * mu - e * (a * dr - di) * k * k;
    let band = 1.0 + a * di;
    Ok(Dispersion {
        r: r2.sqrt(),
        omega,
        c_p: (k != 0.0).then(|| omega / k),
        c_g: 2.0 * e * (di - a * dr) * k,
        bf_stable: band > 0.0 && k * k < mu * band / (3.0 + a * di + 2.0 * a * a),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub x: f64,
    pub mu_pred: f64,
    pub mu_meas: f64,
    pub diff: f64,
    pub winner: Option<Winner>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub max_abs_diff: f64,
    pub mean_diff: f64,
    pub fraction_within: f64,
    pub tolerance: f64,
    pub compared: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub rows: Vec<ReportRow>,
    pub summary: ReportSummary,
}

impl CompareReport {
    /// Summary restricted to `|x| <= half_width`.
    pub fn summary_within(&self, half_width: f64) -> ReportSummary {
        summarize(
            self.rows.iter().filter(|r| r.x.abs() <= half_width),
            self.summary.tolerance,
        )
    }
}

fn summarize<'a>(rows: impl Iterator<Item = &'a ReportRow>, tolerance: f64) -> ReportSummary {
    let diffs: Vec<f64> = rows.map(|r| r.diff).filter(|d| d.is_finite()).collect();
    let n = diffs.len();
    let max_abs_diff = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let mean_diff = if n == 0 { 0.0 } else { diffs.iter().sum::<f64>() / n as f64 };
    let within = diffs.iter().filter(|d| d.abs() <= tolerance).count();
    ReportSummary {
        max_abs_diff,
        mean_diff,
        fraction_within: if n == 0 { 0.0 } else { within as f64 / n as f64 },
        tolerance,
        compared: n,
    }
}

/// Per-point `measured - predicted` with summary statistics.
pub fn compare_report(
    pred: &CurveSample,
    winners: Option<&[Winner]>,
    measured: &ExitProfile,
    tolerance: f64,
) -> Result<CompareReport> {
    if pred.x.len() != measured.x.len() {
        return Err(Error::InvalidInput(format!(
            "prediction has {} points, measurement {}",
            pred.x.len(),
            measured.x.len()
        )));
    }
    let rows: Vec<ReportRow> = (0..pred.x.len())
        .map(|j| {
            let (a, b) = (pred.mu[j], measured.mu_exit[j]);
            ReportRow {
                x: pred.x[j],
                mu_pred: a,
                mu_meas: b,
                diff: if a.is_finite() && b.is_finite() { b - a } else { f64::NAN },
                winner: winners.map(|w| w[j]),
            }
        })
        .collect();
    let summary = summarize(rows.iter(), tolerance);
    Ok(CompareReport { rows, summary })
}

/// `|A|` at one grid point over all snapshots, for time traces.
pub fn time_trace(traj: &Trajectory, x: f64) -> Vec<(f64, Complex64)> {
    let j = traj.grid.nearest(x);
    traj.snapshots.iter().map(|s| (s.mu, s.values[j])).collect()
}
