//! Command-line driver: every subcommand reads one experiment config and writes
//! its artifacts into the output directory.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{
    classify_case, compare_report, exit_times, predicted_exit, CaseReport, ReportSummary,
};
use crate::asymptotics::{hopf_curve, CurveKind, CurveSample};
use crate::config::{preset, preset_names, ExperimentConfig};
use crate::error::{Error, Result};
use crate::io;
use crate::solver::{run, Trajectory};
use crate::verify::{prefactor_scan, qss_residual_scan, segment_check, EpsScan, SegmentCheck};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "hopf-delay", version, about = "Delayed Hopf bifurcation in the forced CGL equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Built-in experiment, used when --config is absent.
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,
    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Integrate the PDE and write the trajectory (CSV and binary).
    Simulate,
    /// Buffer, homogeneous-exit, Hopf and predicted curves as CSV.
    Curves,
    /// Contour quadrature against its asymptotics, plus eps-scans of the prefactor.
    VerifyContour,
    /// eps-scans of the QSS residual at orders 1 and 2.
    VerifyQss,
    /// Which curve sets the exit where, and the resulting case.
    Classify,
    /// Measured exit times against the prediction; reuses a matching trajectory in --out.
    Report,
    /// List the built-in experiments.
    Presets,
}

/// Parse `args` (including the program name) and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() || matches!(e, Error::Io(_)) {
        EXIT_VALIDATION
    } else {
        EXIT_NUMERICAL
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    if cli.command == Command::Presets {
        for name in preset_names() {
            println!("{name}");
        }
        return Ok(());
    }
    let cfg = load_config(cli)?;
    fs::create_dir_all(&cli.out)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", cli.out.display())))?;
    let text = cfg.to_toml()?;
    fs::write(cli.out.join("config.toml"), text)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cli.command, &cfg, &cli.out))
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    match (&cli.config, &cli.preset) {
        (Some(path), _) => ExperimentConfig::load(path),
        (None, Some(name)) => preset(name),
        (None, None) => Err(Error::Config("pass --config PATH or --preset NAME".into())),
    }
}

fn dispatch(cmd: Command, cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    match cmd {
        Command::Simulate => simulate(cfg, out).map(|_| ()),
        Command::Curves => curves(cfg, out),
        Command::VerifyContour => verify_contour(cfg, out),
        Command::VerifyQss => verify_qss(cfg, out),
        Command::Classify => classify(cfg, out).map(|_| ()),
        Command::Report => report(cfg, out),
        Command::Presets => Ok(()),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, io::to_json(value)? + "\n")?;
    Ok(())
}

fn save_trajectory(traj: &Trajectory, out: &Path) -> Result<()> {
    io::write_file(&out.join("trajectory.csv"), |f| io::write_trajectory_csv(traj, f))?;
    io::write_file(&out.join("trajectory.dhb"), |f| io::write_trajectory_binary(traj, f))
}

fn simulate(cfg: &ExperimentConfig, out: &Path) -> Result<Trajectory> {
    let exp = cfg.experiment()?;
    match run(&exp) {
        Ok(traj) => {
            for w in &traj.warnings {
                eprintln!("warning: {w}");
            }
            save_trajectory(&traj, out)?;
            println!(
                "simulate: {} snapshots, dt = {}, mu in [{}, {}]",
                traj.snapshots.len(),
                traj.dt,
                exp.params.mu0,
                exp.mu_end
            );
            Ok(traj)
        }
        Err(Error::Divergence { x, mu, partial }) => {
            if let Some(t) = &partial {
                save_trajectory(t, out)?;
            }
            Err(Error::Divergence { x, mu, partial })
        }
        Err(e) => Err(e),
    }
}

fn curves(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let grid = cfg.grid()?;
    let data = cfg.initial_data()?;
    let pred = predicted_exit(&cfg.source, &data, &cfg.params, &grid)?;
    let stbc = CurveSample {
        x: pred.x.clone(),
        mu: pred.stbc.clone(),
        kind: CurveKind::Stbc,
    };
    let hom = CurveSample {
        x: pred.x.clone(),
        mu: pred.hom.clone(),
        kind: CurveKind::HomExit,
    };
    let hopf = hopf_curve(&cfg.source, &grid, &cfg.params, cfg.analysis.hopf_regime)?;
    let all = [stbc, hom, hopf, pred.curve()];
    io::write_file(&out.join("curves.csv"), |f| io::write_curves_csv(&all, f))?;
    let j = grid.nearest(0.0);
    println!(
        "curves: {} points; at x = {}: stbc {}, hom {}, hopf {}",
        grid.n_points(),
        pred.x[j],
        all[0].mu[j],
        all[1].mu[j],
        all[2].mu[j]
    );
    Ok(())
}

#[derive(Serialize)]
struct ContourVerification {
    segments: Vec<SegmentCheck>,
    scans: Vec<EpsScan>,
}

fn verify_mus(cfg: &ExperimentConfig) -> Vec<f64> {
    if cfg.analysis.verify_mu.is_empty() {
        vec![0.3, cfg.params.omega0]
    } else {
        cfg.analysis.verify_mu.clone()
    }
}

fn verify_contour(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let a = &cfg.analysis;
    let p = &cfg.params;
    let mus = verify_mus(cfg);
    let segments = mus
        .iter()
        .map(|&mu| segment_check(&cfg.source, a.verify_x, mu, p))
        .collect::<Result<Vec<_>>>()?;
    let scans = mus
        .iter()
        .filter(|&&mu| mu > 0.0)
        .map(|&mu| prefactor_scan(&cfg.source, a.verify_x, mu, p, &a.eps_scan))
        .collect::<Result<Vec<_>>>()?;
    for s in &scans {
        println!("verify-contour: {} slope {:.3}", s.label, s.slope);
    }
    write_json(&out.join("verify_contour.json"), &ContourVerification { segments, scans })
}

fn verify_qss(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let a = &cfg.analysis;
    let grid = cfg.grid()?;
    let scans = [1, 2]
        .into_iter()
        .map(|order| qss_residual_scan(&cfg.source, &cfg.params, order, a.qss_mu, &grid, &a.eps_scan))
        .collect::<Result<Vec<_>>>()?;
    for s in &scans {
        println!("verify-qss: {} slope {:.3}", s.label, s.slope);
    }
    write_json(&out.join("verify_qss.json"), &scans)
}

fn classify(cfg: &ExperimentConfig, out: &Path) -> Result<CaseReport> {
    let pred = predicted_exit(&cfg.source, &cfg.initial_data()?, &cfg.params, &cfg.grid()?)?;
    let case = classify_case(&pred, &cfg.params);
    println!("classify: case {} with crossovers {:?}", case.case_id, case.crossovers);
    write_json(&out.join("classify.json"), &case)?;
    Ok(case)
}

/// Trajectory from `out` when its header matches the config, else a fresh run.
fn trajectory_for(cfg: &ExperimentConfig, out: &Path) -> Result<Trajectory> {
    let path = out.join("trajectory.dhb");
    if let Ok(file) = fs::File::open(&path) {
        if let Ok(t) = io::read_trajectory_binary(file) {
            let exp = cfg.experiment()?;
            let done = t.snapshots.last().map(|s| s.mu >= exp.mu_end).unwrap_or(false);
            if t.grid == exp.grid && t.params == exp.params && done {
                return Ok(t);
            }
        }
    }
    simulate(cfg, out)
}

#[derive(Serialize)]
struct ReportJson {
    summary: ReportSummary,
    threshold: f64,
    compare_half_width: Option<f64>,
    case_id: u8,
    crossovers: Vec<f64>,
}

fn report(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let a = &cfg.analysis;
    let traj = trajectory_for(cfg, out)?;
    let measured = exit_times(&traj, &cfg.qss(), a.exit_threshold)?;
    let pred = predicted_exit(&cfg.source, &cfg.initial_data()?, &cfg.params, &traj.grid)?;
    let case = classify_case(&pred, &cfg.params);
    let rep = compare_report(&pred.curve(), Some(&pred.winner), &measured, a.tolerance)?;
    let summary = match a.compare_half_width {
        Some(h) => rep.summary_within(h),
        None => rep.summary,
    };
    io::write_file(&out.join("report.csv"), |f| io::write_report_csv(&rep, f))?;
    println!(
        "report: max |diff| {:.4} over {} points, {:.1}% within {}",
        summary.max_abs_diff,
        summary.compared,
        100.0 * summary.fraction_within,
        summary.tolerance
    );
    write_json(
        &out.join("report.json"),
        &ReportJson {
            summary,
            threshold: a.exit_threshold,
            compare_half_width: a.compare_half_width,
            case_id: case.case_id,
            crossovers: case.crossovers,
        },
    )
}
