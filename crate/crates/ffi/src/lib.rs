//! C ABI over `hopf_delay`.
//!
//! Objects cross the boundary as opaque handles created by `hd_*_new`/`hd_*_from_*`
//! and released with the matching `hd_*_free`. Every fallible call returns an
//! [`HdStatus`]; the message of the last failure on the calling thread is
//! available through [`hd_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hopf_delay::analysis::{classify_case, exit_times, onset_threshold, predicted_exit, stbc_regime};
use hopf_delay::asymptotics::{cerf, mu_h, mu_hopf, mu_stbc_with_threshold};
use hopf_delay::config::{preset, ExperimentConfig};
use hopf_delay::solver::{run, Trajectory};
use hopf_delay::Error;
use num_complex::Complex64;

/// Result codes shared by all functions.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HdStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad configuration or arguments outside an operation's domain.
    InvalidInput = 2,
    /// Divergence, failed convergence or failed quadrature.
    Numerical = 3,
    OutOfBounds = 4,
    InvalidUtf8 = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// Parsed experiment configuration.
pub struct HdConfig(ExperimentConfig);

/// Simulation output: one snapshot of `A` per recorded `mu`.
pub struct HdTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn from_error(e: Error) -> HdStatus {
    let status = if e.is_validation() {
        HdStatus::InvalidInput
    } else {
        HdStatus::Numerical
    };
    set_error(e.to_string());
    status
}

fn guard(f: impl FnOnce() -> Result<(), HdStatus>) -> HdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HdStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside hopf_delay");
            HdStatus::Panic
        }
    }
}

fn null(what: &str) -> HdStatus {
    set_error(format!("{what} is null"));
    HdStatus::NullPointer
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, HdStatus> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        HdStatus::InvalidUtf8
    })
}

unsafe fn config_ref<'a>(c: *const HdConfig) -> Result<&'a ExperimentConfig, HdStatus> {
    c.as_ref().map(|c| &c.0).ok_or_else(|| null("config"))
}

unsafe fn traj_ref<'a>(t: *const HdTrajectory) -> Result<&'a Trajectory, HdStatus> {
    t.as_ref().map(|t| &t.0).ok_or_else(|| null("trajectory"))
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), HdStatus> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(v);
    Ok(())
}

/// Copies the last error message, NUL-terminated and truncated to `len` bytes.
/// Returns the full message length excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hd_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Parses a TOML experiment.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hd_config_from_toml(toml: *const c_char, out: *mut *mut HdConfig) -> HdStatus {
    guard(|| {
        let text = read_str(toml, "toml")?;
        let cfg = ExperimentConfig::from_toml(text).map_err(from_error)?;
        put(out, Box::into_raw(Box::new(HdConfig(cfg))))
    })
}

/// Loads a built-in experiment such as `"fig3"`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hd_config_from_preset(name: *const c_char, out: *mut *mut HdConfig) -> HdStatus {
    guard(|| {
        let name = read_str(name, "name")?;
        let cfg = preset(name).map_err(from_error)?;
        put(out, Box::into_raw(Box::new(HdConfig(cfg))))
    })
}

/// # Safety
/// `cfg` must be null or a handle from `hd_config_from_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hd_config_free(cfg: *mut HdConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Number of grid points of the configured domain.
///
/// # Safety
/// Handles must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hd_config_n_points(cfg: *const HdConfig, out: *mut usize) -> HdStatus {
    guard(|| {
        let grid = config_ref(cfg)?.grid().map_err(from_error)?;
        put(out, grid.n_points())
    })
}

/// Runs the simulation described by `cfg`.
///
/// # Safety
/// Handles must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hd_simulate(cfg: *const HdConfig, out: *mut *mut HdTrajectory) -> HdStatus {
    guard(|| {
        let exp = config_ref(cfg)?.experiment().map_err(from_error)?;
        let traj = run(&exp).map_err(from_error)?;
        put(out, Box::into_raw(Box::new(HdTrajectory(traj))))
    })
}

/// # Safety
/// `traj` must be null or a handle from `hd_simulate` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hd_trajectory_free(traj: *mut HdTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// # Safety
/// Handles must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hd_trajectory_n_snapshots(traj: *const HdTrajectory, out: *mut usize) -> HdStatus {
    guard(|| put(out, traj_ref(traj)?.snapshots.len()))
}

/// # Safety
/// Handles must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hd_trajectory_n_points(traj: *const HdTrajectory, out: *mut usize) -> HdStatus {
    guard(|| put(out, traj_ref(traj)?.grid.n_points()))
}

/// Copies snapshot `k`: its `mu` and the real and imaginary parts of `A`.
///
/// # Safety
/// `re` and `im` must each hold `len` doubles, `len` equal to the point count.
#[no_mangle]
pub unsafe extern "C" fn hd_trajectory_snapshot(
    traj: *const HdTrajectory,
    k: usize,
    mu: *mut f64,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> HdStatus {
    guard(|| {
        let t = traj_ref(traj)?;
        let Some(s) = t.snapshots.get(k) else {
            set_error(format!("snapshot {k} of {}", t.snapshots.len()));
            return Err(HdStatus::OutOfBounds);
        };
        if len != s.values.len() {
            set_error(format!("buffer length {len}, need {}", s.values.len()));
            return Err(HdStatus::OutOfBounds);
        }
        if re.is_null() || im.is_null() {
            return Err(null("value buffer"));
        }
        put(mu, s.mu)?;
        for (j, a) in s.values.iter().enumerate() {
            *re.add(j) = a.re;
            *im.add(j) = a.im;
        }
        Ok(())
    })
}

/// Measured exit `mu` per grid point (`+inf` where the solution never left the QSS).
///
/// # Safety
/// `out` must hold `len` doubles, `len` equal to the point count.
#[no_mangle]
pub unsafe extern "C" fn hd_exit_times(
    traj: *const HdTrajectory,
    cfg: *const HdConfig,
    threshold: f64,
    out: *mut f64,
    len: usize,
) -> HdStatus {
    guard(|| {
        let t = traj_ref(traj)?;
        let c = config_ref(cfg)?;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        if len != t.grid.n_points() {
            set_error(format!("buffer length {len}, need {}", t.grid.n_points()));
            return Err(HdStatus::OutOfBounds);
        }
        let e = exit_times(t, &c.qss(), threshold).map_err(from_error)?;
        ptr::copy_nonoverlapping(e.mu_exit.as_ptr(), out, len);
        Ok(())
    })
}

/// Space-time buffer curve at `x` (`+inf` on nodal lines of the source).
///
/// # Safety
/// Handles must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hd_mu_stbc(cfg: *const HdConfig, x: f64, out: *mut f64) -> HdStatus {
    guard(|| {
        let c = config_ref(cfg)?;
        let p = &c.params;
        let regime = stbc_regime(p).map_err(from_error)?;
        let v = mu_stbc_with_threshold(&c.source, x, p, regime, onset_threshold(&c.source, p))
            .map_err(from_error)?;
        put(out, v)
    })
}

/// Homogeneous exit time at `x` (`+inf` when the homogeneous part never reaches 1).
///
/// # Safety
/// Handles must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hd_mu_h(cfg: *const HdConfig, x: f64, out: *mut f64) -> HdStatus {
    guard(|| {
        let c = config_ref(cfg)?;
        let data = c.initial_data().map_err(from_error)?;
        let v = match mu_h(&data, &c.source, x, &c.params) {
            Ok(v) => v,
            Err(Error::NoExit { .. }) => f64::INFINITY,
            Err(e) => return Err(from_error(e)),
        };
        put(out, v)
    })
}

/// Instantaneous Hopf curve at `x` in the configured regime.
///
/// # Safety
/// Handles must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hd_mu_hopf(cfg: *const HdConfig, x: f64, out: *mut f64) -> HdStatus {
    guard(|| {
        let c = config_ref(cfg)?;
        let v = mu_hopf(&c.source, x, &c.params, c.analysis.hopf_regime).map_err(from_error)?;
        put(out, v)
    })
}

/// Case 1 to 4 from the predicted curves on the configured grid.
///
/// # Safety
/// Handles must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hd_classify(cfg: *const HdConfig, out: *mut u8) -> HdStatus {
    guard(|| {
        let c = config_ref(cfg)?;
        let grid = c.grid().map_err(from_error)?;
        let data = c.initial_data().map_err(from_error)?;
        let pred = predicted_exit(&c.source, &data, &c.params, &grid).map_err(from_error)?;
        put(out, classify_case(&pred, &c.params).case_id)
    })
}

/// Complex error function on the strip `|Im z| <= 30`.
///
/// # Safety
/// `out_re` and `out_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hd_cerf(re: f64, im: f64, out_re: *mut f64, out_im: *mut f64) -> HdStatus {
    guard(|| {
        if out_re.is_null() || out_im.is_null() {
            return Err(null("output pointer"));
        }
        let w = cerf(Complex64::new(re, im)).map_err(from_error)?;
        put(out_re, w.re)?;
        put(out_im, w.im)
    })
}
