//! CSV, JSON and binary artifacts.
//!
//! Floats are written with 17 significant digits so that files round-trip exactly.
//!
//! Binary trajectory layout, all little-endian:
//! `b"DHB1"`, `n_points: u32`, `half_length: f64`, then
//! `eps, omega0, alpha, d_re, d_im, beta, gamma, mu0` as `f64`, followed by
//! snapshots `{mu: f64, [re, im] * n_points}` until end of file.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::analysis::CompareReport;
use crate::asymptotics::CurveSample;
use crate::error::{Error, Result};
use crate::grid::{Grid, PhysParams};
use crate::solver::{Snapshot, Trajectory};

pub const MAGIC: &[u8; 4] = b"DHB1";
const HEADER_LEN: usize = 4 + 4 + 9 * 8;

/// Shortest text that carries 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, w: W) -> Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "mu,x,re_A,im_A")?;
    let xs = traj.grid.points();
    for s in &traj.snapshots {
        let mu = fmt_f64(s.mu);
        for (x, a) in xs.iter().zip(&s.values) {
            writeln!(w, "{mu},{},{},{}", fmt_f64(*x), fmt_f64(a.re), fmt_f64(a.im))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory_binary<W: Write>(traj: &Trajectory, w: W) -> Result<()> {
    let mut w = BufWriter::new(w);
    let n = u32::try_from(traj.grid.n_points())
        .map_err(|_| Error::InvalidInput("grid too large for the binary format".into()))?;
    let p = &traj.params;
    w.write_all(MAGIC)?;
    w.write_all(&n.to_le_bytes())?;
    for v in [
        traj.grid.half_length(),
        p.eps,
        p.omega0,
        p.alpha,
        p.d_re,
        p.d_im,
        p.beta,
        p.gamma,
        p.mu0,
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    for s in &traj.snapshots {
        w.write_all(&s.mu.to_le_bytes())?;
        for a in &s.values {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn f64_at(buf: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(buf[at..at + 8].try_into().expect("8-byte slice"))
}

/// Reads a binary trajectory; `dt` and `config_hash` are not stored and come back as NaN and 0.
pub fn read_trajectory_binary<R: Read>(mut r: R) -> Result<Trajectory> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    let bad = |m: &str| Error::InvalidInput(format!("binary trajectory: {m}"));
    if buf.len() < HEADER_LEN || &buf[..4] != MAGIC {
        return Err(bad("missing DHB1 header"));
    }
    let n = u32::from_le_bytes(buf[4..8].try_into().expect("4-byte slice")) as usize;
    let h: Vec<f64> = (0..9).map(|k| f64_at(&buf, 8 + 8 * k)).collect();
    let grid = Grid::new(h[0], n)?;
    let params = PhysParams {
        eps: h[1],
        omega0: h[2],
        alpha: h[3],
        d_re: h[4],
        d_im: h[5],
        beta: h[6],
        gamma: h[7],
        mu0: h[8],
    };
    let rec = 8 * (1 + 2 * n);
    let body = &buf[HEADER_LEN..];
    if body.len() % rec != 0 {
        return Err(bad("truncated snapshot"));
    }
    let snapshots = body
        .chunks_exact(rec)
        .map(|c| Snapshot {
            mu: f64_at(c, 0),
            values: (0..n)
                .map(|j| Complex64::new(f64_at(c, 8 + 16 * j), f64_at(c, 16 + 16 * j)))
                .collect(),
        })
        .collect();
    Ok(Trajectory {
        grid,
        params,
        snapshots,
        dt: f64::NAN,
        config_hash: 0,
        warnings: Vec::new(),
    })
}

/// Rows `x,mu,kind` for each curve in turn.
pub fn write_curves_csv<W: Write>(curves: &[CurveSample], w: W) -> Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "x,mu,kind")?;
    for c in curves {
        for (x, mu) in c.x.iter().zip(&c.mu) {
            writeln!(w, "{},{},{}", fmt_f64(*x), fmt_f64(*mu), c.kind.label())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_report_csv<W: Write>(report: &CompareReport, w: W) -> Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "x,mu_pred,mu_meas,diff,winner")?;
    for r in &report.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_f64(r.x),
            fmt_f64(r.mu_pred),
            fmt_f64(r.mu_meas),
            fmt_f64(r.diff),
            r.winner.map(|v| v.label()).unwrap_or("")
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON; non-finite floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::InvalidInput(e.to_string()))
}

pub fn write_file(path: &Path, f: impl FnOnce(&mut File) -> Result<()>) -> Result<()> {
    let mut file = File::create(path)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", path.display())))?;
    f(&mut file)
}
