//! Deformed integration paths in the complex `mu~` plane and quadrature of
//! the particular solution along them.
//!
//! With `Phi(m) = -(m + i w0)^2 / (2 eps)` the particular solution is
//! `B_p(x, mu) = eps^(beta - 1) int g(x, mu - m) e^{Phi(m)} dm` from `mu0` to `mu`,
//! and `A_p = B_p e^{-Phi(mu)}`.

use std::cell::RefCell;
use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::LogPolar;
use crate::error::{Error, Result};
use crate::grid::PhysParams;
use crate::quad::{integrate_breaks, Tolerance};
use crate::sources::{kernel_g, SourceTerm, BRANCH_MARGIN};

/// Far-field cut-off: truncated tails are below `10^-40` of the path maximum.
const TAIL_DECADES: f64 = 40.0;
/// Samples used to place quadrature breakpoints and to pick the scaling exponent.
const PROBES: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourKind {
    /// `mu` in `(-w0, 0)`: two steepest arcs joined far to the left.
    Ca,
    /// `mu` in `(0, w0]`: real axis, both Stokes segments, then a steepest arc.
    Cr,
    /// `mu > w0`: real axis, both Stokes segments, real axis again.
    C,
    /// `mu = 0`: steepest arc from `mu0`, then horizontal and vertical lines through the saddle.
    AppendixB,
    /// The real segment `[mu0, mu]`.
    Straight,
}

impl ContourKind {
    /// The path the asymptotic analysis uses for a given `mu`.
    pub fn for_mu(mu: f64, p: &PhysParams) -> ContourKind {
        if mu == 0.0 {
            ContourKind::AppendixB
        } else if mu < 0.0 {
            if mu > -p.omega0 && p.mu0 < 0.0 {
                ContourKind::Ca
            } else {
                ContourKind::Straight
            }
        } else if mu <= p.omega0 {
            ContourKind::Cr
        } else {
            ContourKind::C
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    RealAxis,
    StokesDown,
    StokesUp,
    SteepestAscent,
    SteepestDescent,
    VerticalAxis,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Geometry {
    Line {
        start: Complex64,
        end: Complex64,
    },
    /// `m(s) = -i w0 + sign sqrt((anchor + i w0)^2 - 2 s)` with `s` linear in `t`.
    Arc {
        anchor: f64,
        sign: f64,
        s_start: f64,
        s_end: f64,
    },
}

/// One piece of a [`ContourPath`], parametrized by `t` in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub name: &'static str,
    pub kind: SegmentKind,
    omega0: f64,
    geometry: Geometry,
}

impl Segment {
    fn line(name: &'static str, kind: SegmentKind, omega0: f64, a: Complex64, b: Complex64) -> Self {
        Self {
            name,
            kind,
            omega0,
            geometry: Geometry::Line { start: a, end: b },
        }
    }

    fn arc(name: &'static str, kind: SegmentKind, omega0: f64, anchor: f64, s: (f64, f64)) -> Self {
        Self {
            name,
            kind,
            omega0,
            geometry: Geometry::Arc {
                anchor,
                sign: if anchor < 0.0 { -1.0 } else { 1.0 },
                s_start: s.0,
                s_end: s.1,
            },
        }
    }

    /// `(m(t), dm/dt)`.
    pub fn point(&self, t: f64) -> (Complex64, Complex64) {
        match self.geometry {
            Geometry::Line { start, end } => (start + (end - start) * t, end - start),
            Geometry::Arc {
                anchor,
                sign,
                s_start,
                s_end,
            } => {
                let s = s_start + (s_end - s_start) * t;
                let iw = Complex64::new(0.0, self.omega0);
                let root = ((anchor + iw) * (anchor + iw) - 2.0 * s).sqrt() * sign;
                (root - iw, -(s_end - s_start) / root)
            }
        }
    }

    /// `Phi(m(t))`; on arcs this is `Phi(anchor) + s / eps` exactly.
    pub fn exponent(&self, t: f64, eps: f64) -> Complex64 {
        match self.geometry {
            Geometry::Line { .. } => phi(self.point(t).0, self.omega0, eps),
            Geometry::Arc {
                anchor,
                s_start,
                s_end,
                ..
            } => {
                let s = s_start + (s_end - s_start) * t;
                phi(Complex64::new(anchor, 0.0), self.omega0, eps) + s / eps
            }
        }
    }

    pub fn start(&self) -> Complex64 {
        self.point(0.0).0
    }

    pub fn end(&self) -> Complex64 {
        self.point(1.0).0
    }

    fn is_degenerate(&self) -> bool {
        match self.geometry {
            Geometry::Line { start, end } => start == end,
            Geometry::Arc { s_start, s_end, .. } => s_start == s_end,
        }
    }
}

/// `-(m + i w0)^2 / (2 eps)`.
pub fn phi(m: Complex64, omega0: f64, eps: f64) -> Complex64 {
    let w = m + Complex64::new(0.0, omega0);
    -(w * w) / (2.0 * eps)
}

/// Point of the steepest curve through real `anchor` with real part `re`,
/// from `Im((m + i w0)^2) = 2 anchor w0`.
pub fn steepest_point_from_real_part(anchor: f64, omega0: f64, re: f64) -> Complex64 {
    Complex64::new(re, anchor * omega0 / re - omega0)
}

/// Arc parameter `s` at which the steepest curve through `anchor` reaches real part `re`.
fn arc_parameter_at(anchor: f64, omega0: f64, re: f64) -> f64 {
    let iw = Complex64::new(0.0, omega0);
    let w = steepest_point_from_real_part(anchor, omega0, re) + iw;
    (((anchor + iw) * (anchor + iw) - w * w) / 2.0).re
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContourPath {
    pub kind: ContourKind,
    pub mu0: f64,
    pub mu: f64,
    pub segments: Vec<Segment>,
}

impl ContourPath {
    /// Largest gap between consecutive segment end points.
    pub fn chain_gap(&self) -> f64 {
        self.segments
            .windows(2)
            .map(|w| (w[0].end() - w[1].start()).norm())
            .fold(0.0, f64::max)
    }

    pub fn segment(&self, name: &str) -> Option<&Segment> {
        self.segments.iter().find(|s| s.name == name)
    }
}

fn far_left(mu0: f64, mu: f64, p: &PhysParams) -> f64 {
    let w2 = p.omega0 * p.omega0;
    (2.0 * p.eps * (TAIL_DECADES * 10f64.ln() + 10.0) + w2 + mu0 * mu0 + mu * mu).sqrt() + 1.0
}

/// Build the deformed contour of the given kind from `mu0` to `mu`.
pub fn build_contour(kind: ContourKind, mu0: f64, mu: f64, p: &PhysParams) -> Result<ContourPath> {
    p.validate()?;
    let w0 = p.omega0;
    let iw = Complex64::new(0.0, w0);
    let re = |v: f64| Complex64::new(v, 0.0);
    let bad = |what: &str| Err(Error::InvalidInput(format!("{kind:?} contour: {what}")));
    let mut segments = Vec::new();
    match kind {
        ContourKind::Straight => {
            if !(mu > mu0) {
                return bad(&format!("needs mu > mu0, got mu = {mu}, mu0 = {mu0}"));
            }
            segments.push(Segment::line("real", SegmentKind::RealAxis, w0, re(mu0), re(mu)));
        }
        ContourKind::Cr | ContourKind::C => {
            if !(mu0 <= -w0) {
                return bad(&format!("needs mu0 <= -w0, got {mu0}"));
            }
            let cr = kind == ContourKind::Cr;
            if cr && !(mu > 0.0 && mu <= w0) {
                return bad(&format!("needs 0 < mu <= w0, got {mu}"));
            }
            if !cr && !(mu > w0) {
                return bad(&format!("needs mu > w0, got {mu}"));
            }
            let names = if cr {
                ["C_r1", "C_r2", "C_r3"]
            } else {
                ["C_1", "C_2", "C_3"]
            };
            let top = if cr { (w0 * mu).sqrt() } else { w0 };
            let q = Complex64::new(top, top - w0);
            segments.push(Segment::line(names[0], SegmentKind::RealAxis, w0, re(mu0), re(-w0)));
            segments.push(Segment::line(names[1], SegmentKind::StokesDown, w0, re(-w0), -iw));
            segments.push(Segment::line(names[2], SegmentKind::StokesUp, w0, -iw, q));
            if cr {
                let s0 = 0.5 * (mu * mu - w0 * w0);
                segments.push(Segment::arc("C_r4", SegmentKind::SteepestAscent, w0, mu, (s0, 0.0)));
            } else {
                segments.push(Segment::line("C_4", SegmentKind::RealAxis, w0, re(w0), re(mu)));
            }
        }
        ContourKind::Ca | ContourKind::AppendixB => {
            if !(mu0 < 0.0) {
                return bad(&format!("needs mu0 < 0, got {mu0}"));
            }
            let r = far_left(mu0, mu, p);
            let a1 = Segment::arc(
                "C_a1",
                SegmentKind::SteepestDescent,
                w0,
                mu0,
                (0.0, arc_parameter_at(mu0, w0, -r)),
            );
            let a1_end = a1.end();
            segments.push(a1);
            if kind == ContourKind::Ca {
                if !(mu > -w0 && mu < 0.0 && mu > mu0) {
                    return bad(&format!("needs max(mu0, -w0) < mu < 0, got {mu}"));
                }
                let a2 = Segment::arc(
                    "C_a2",
                    SegmentKind::SteepestAscent,
                    w0,
                    mu,
                    (arc_parameter_at(mu, w0, -r), 0.0),
                );
                segments.push(Segment::line("link", SegmentKind::VerticalAxis, w0, a1_end, a2.start()));
                segments.push(a2);
            } else {
                if mu != 0.0 {
                    return bad(&format!("needs mu = 0, got {mu}"));
                }
                let corner = Complex64::new(-r, -w0);
                segments.push(Segment::line("link", SegmentKind::VerticalAxis, w0, a1_end, corner));
                segments.push(Segment::line("L_1", SegmentKind::SteepestAscent, w0, corner, -iw));
                segments.push(Segment::line("L_2", SegmentKind::VerticalAxis, w0, -iw, re(0.0)));
            }
        }
    }
    segments.retain(|s| !s.is_degenerate());
    let path = ContourPath {
        kind,
        mu0,
        mu,
        segments,
    };
    if path.chain_gap() > 1e-12 {
        return Err(Error::Convergence(format!(
            "contour segments do not chain: gap {}",
            path.chain_gap()
        )));
    }
    Ok(path)
}

/// Reject paths that pass within [`BRANCH_MARGIN`] of the kernel's branch point
/// or cross its cut.
pub fn check_branch_clearance(path: &ContourPath, s: &SourceTerm, p: &PhysParams) -> Result<()> {
    let SourceTerm::Gaussian { sigma, .. } = *s else {
        return Ok(());
    };
    let dd = p.slow_diffusivity();
    let branch = path.mu + sigma / dd;
    let arg = |m: Complex64| dd * (path.mu - m) + sigma;
    for seg in &path.segments {
        let mut prev: Option<Complex64> = None;
        for k in 0..=PROBES {
            let m = seg.point(k as f64 / PROBES as f64).0;
            let z = arg(m);
            if (m - branch).norm() < BRANCH_MARGIN {
                return Err(Error::Domain(format!(
                    "segment {} passes within {BRANCH_MARGIN} of the branch point {branch}",
                    seg.name
                )));
            }
            if let Some(zp) = prev {
                if zp.im.signum() != z.im.signum() && zp.im != 0.0 {
                    let u = zp.im / (zp.im - z.im);
                    if zp.re + (z.re - zp.re) * u < 0.0 {
                        return Err(Error::Domain(format!(
                            "segment {} crosses the branch cut of the kernel",
                            seg.name
                        )));
                    }
                }
            }
            prev = Some(z);
        }
    }
    Ok(())
}

/// Breakpoints in `t` so that `Im Phi` turns by less than `pi/4` per panel.
fn breakpoints(seg: &Segment, eps: f64) -> Vec<f64> {
    let mut breaks = vec![0.0];
    let mut turned = 0.0;
    let mut prev = seg.exponent(0.0, eps).im;
    for k in 1..=PROBES {
        let t = k as f64 / PROBES as f64;
        let cur = seg.exponent(t, eps).im;
        turned += (cur - prev).abs();
        prev = cur;
        if turned >= FRAC_PI_4 || k % (PROBES / 8) == 0 {
            breaks.push(t);
            turned = 0.0;
        }
    }
    if *breaks.last().unwrap() != 1.0 {
        breaks.push(1.0);
    }
    breaks
}

/// Value of one segment integral in `B_p` units.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentValue {
    pub name: &'static str,
    pub value: LogPolar,
    /// Quadrature error estimate relative to `|value|`.
    pub error: f64,
}

fn integrate_segment(seg: &Segment, s: &SourceTerm, x: f64, mu: f64, p: &PhysParams) -> Result<SegmentValue> {
    let eps = p.eps;
    let dd = p.slow_diffusivity();
    let reference = (0..=256)
        .map(|k| seg.exponent(k as f64 / 256.0, eps).re)
        .fold(f64::NEG_INFINITY, f64::max);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let f = |t: f64| {
        let (m, dm) = seg.point(t);
        match kernel_g(s, x, mu - m, dd) {
            Ok(g) => g * (seg.exponent(t, eps) - reference).exp() * dm,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex64::new(f64::NAN, f64::NAN)
            }
        }
    };
    let tol = Tolerance {
        abs: 1e-15,
        rel: 1e-12,
        max_panels: 400_000,
    };
    let est = integrate_breaks(f, &breakpoints(seg, eps), tol);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let est = est.map_err(|e| match e {
        Error::Quadrature { message, achieved } => Error::Quadrature {
            message: format!("segment {}: {message}", seg.name),
            achieved,
        },
        other => other,
    })?;
    let scale = (p.beta - 1.0) * eps.ln() + reference;
    let v = LogPolar::from_complex(est.value);
    Ok(SegmentValue {
        name: seg.name,
        value: v * LogPolar::new(scale, 0.0),
        error: est.error / est.value.norm().max(f64::MIN_POSITIVE),
    })
}

/// Per-segment contributions to `B_p`, in path order.
pub fn integrate_segments(
    path: &ContourPath,
    s: &SourceTerm,
    x: f64,
    p: &PhysParams,
) -> Result<Vec<SegmentValue>> {
    s.validate()?;
    check_branch_clearance(path, s, p)?;
    let p = PhysParams { mu0: path.mu0, ..*p };
    path.segments
        .par_iter()
        .map(|seg| integrate_segment(seg, s, x, path.mu, &p))
        .collect()
}

/// `A_p = B_p e^{-Phi(mu)}`.
pub fn bp_to_ap(b: LogPolar, mu: f64, p: &PhysParams) -> LogPolar {
    b * LogPolar::exp(-phi(Complex64::new(mu, 0.0), p.omega0, p.eps))
}

/// Particular solution `A_p(x, path.mu)` by quadrature of `B_p` along `path`.
pub fn quad_bp(path: &ContourPath, s: &SourceTerm, x: f64, p: &PhysParams) -> Result<LogPolar> {
    let parts = integrate_segments(path, s, x, p)?;
    let b: LogPolar = parts.into_iter().map(|v| v.value).sum();
    Ok(bp_to_ap(b, path.mu, p))
}

/// Leading endpoint term `eps^(beta-1) g e^{Phi} / Phi'` at the upper end `m` of a segment.
fn endpoint_term(s: &SourceTerm, x: f64, mu: f64, m: Complex64, p: &PhysParams) -> Result<LogPolar> {
    let g = kernel_g(s, x, mu - m, p.slow_diffusivity())?;
    let w = m + Complex64::new(0.0, p.omega0);
    let lead = -g * p.eps.powf(p.beta) / w;
    Ok(LogPolar::from_complex(lead) * LogPolar::exp(phi(m, p.omega0, p.eps)))
}

/// `sqrt(2 pi) eps^(beta - 1/2) g(x, mu + i w0)`: the full saddle contribution to `B_p`.
pub fn saddle_term(s: &SourceTerm, x: f64, mu: f64, p: &PhysParams) -> Result<LogPolar> {
    let g = kernel_g(s, x, p.shifted(mu), p.slow_diffusivity())?;
    Ok(LogPolar::from_complex(g * (2.0 * PI).sqrt() * p.eps.powf(p.beta - 0.5)))
}

/// Segment-by-segment comparison of quadrature and leading-order asymptotics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub segment: String,
    pub numeric_log_amp: f64,
    pub numeric_phase: f64,
    pub asymptotic_log_amp: f64,
    pub rel_error: f64,
    /// Power of `eps` expected for `rel_error`.
    pub expected_order: f64,
}

fn segment_asymptotics(
    name: &str,
    path: &ContourPath,
    s: &SourceTerm,
    x: f64,
    p: &PhysParams,
) -> Result<Option<(LogPolar, f64)>> {
    let mu = path.mu;
    let w0 = p.omega0;
    let re = |v: f64| Complex64::new(v, 0.0);
    let end = |m: Complex64| endpoint_term(s, x, mu, m, p);
    let half = || saddle_term(s, x, mu, p).map(|v| v * LogPolar::new(-(2f64.ln()), 0.0));
    Ok(Some(match name {
        "C_r1" | "C_1" => (end(re(-w0))? + -end(re(path.mu0))?, 1.0),
        "C_r2" | "C_r3" | "C_2" | "C_3" | "L_1" => (half()?, 0.5),
        "C_r4" | "C_a2" | "L_2" => (end(re(mu))?, 1.0),
        "C_4" => (end(re(mu))? + -end(re(w0))?, 1.0),
        "C_a1" => (-end(re(path.mu0))?, 1.0),
        _ => return Ok(None),
    }))
}

/// Quadrature of every segment of `path` next to its leading-order asymptotic value.
pub fn segment_asymptotics_check(
    path: &ContourPath,
    s: &SourceTerm,
    x: f64,
    p: &PhysParams,
) -> Result<Vec<SegmentReport>> {
    let p = PhysParams { mu0: path.mu0, ..*p };
    let values = integrate_segments(path, s, x, &p)?;
    values
        .into_iter()
        .map(|v| {
            let asym = segment_asymptotics(v.name, path, s, x, &p)?;
            let (a, order, rel) = match asym {
                Some((a, order)) => (a.log_amplitude, order, v.value.relative_distance(&a)),
                None => (f64::NAN, f64::NAN, f64::NAN),
            };
            Ok(SegmentReport {
                segment: v.name.to_string(),
                numeric_log_amp: v.value.log_amplitude,
                numeric_phase: v.value.phase,
                asymptotic_log_amp: a,
                rel_error: rel,
                expected_order: order,
            })
        })
        .collect()
}

/// Sum of the real-axis and Stokes segments of a `Cr` or `C` path divided by
/// `eps^(beta - 1/2)`: the numerical counterpart of `sqrt(2 pi) g(x, mu + i w0)`.
pub fn stokes_prefactor(path: &ContourPath, s: &SourceTerm, x: f64, p: &PhysParams) -> Result<Complex64> {
    if !matches!(path.kind, ContourKind::Cr | ContourKind::C) {
        return Err(Error::InvalidInput(format!(
            "Stokes prefactor needs a Cr or C path, got {:?}",
            path.kind
        )));
    }
    let values = integrate_segments(path, s, x, p)?;
    let sum: LogPolar = values
        .into_iter()
        .filter(|v| !matches!(v.name, "C_r4" | "C_4"))
        .map(|v| v.value)
        .sum();
    Ok((sum * LogPolar::new(-(p.beta - 0.5) * p.eps.ln(), 0.0)).to_complex())
}
