//! Complex numbers stored as `(ln|z|, arg z)`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// `exp(log_amplitude + i phase)`. Zero is `log_amplitude = -inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogPolar {
    pub log_amplitude: f64,
    pub phase: f64,
}

fn wrap(phase: f64) -> f64 {
    if (-PI..=PI).contains(&phase) {
        return phase;
    }
    let r = (phase + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

impl LogPolar {
    pub const ZERO: LogPolar = LogPolar {
        log_amplitude: f64::NEG_INFINITY,
        phase: 0.0,
    };

    pub fn new(log_amplitude: f64, phase: f64) -> Self {
        if log_amplitude == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        Self {
            log_amplitude,
            phase: wrap(phase),
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        let r = z.norm();
        if r == 0.0 {
            Self::ZERO
        } else {
            Self::new(r.ln(), z.arg())
        }
    }

    /// `e^w` without forming it.
    pub fn exp(w: Complex64) -> Self {
        Self::new(w.re, w.im)
    }

    pub fn is_zero(&self) -> bool {
        self.log_amplitude == f64::NEG_INFINITY
    }

    pub fn is_finite(&self) -> bool {
        self.log_amplitude.is_finite() && self.phase.is_finite()
    }

    /// Ordinary complex value; overflows to infinity for huge magnitudes.
    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_amplitude.exp(), self.phase)
    }

    pub fn amplitude(&self) -> f64 {
        self.log_amplitude.exp()
    }

    pub fn scale(self, z: Complex64) -> Self {
        self * LogPolar::from_complex(z)
    }

    /// Relative distance `|a - b| / |b|` evaluated without overflow.
    pub fn relative_distance(&self, reference: &LogPolar) -> f64 {
        if reference.is_zero() {
            return if self.is_zero() { 0.0 } else { f64::INFINITY };
        }
        let ratio = LogPolar::new(
            self.log_amplitude - reference.log_amplitude,
            self.phase - reference.phase,
        );
        (ratio.to_complex() - 1.0).norm()
    }
}

impl Mul for LogPolar {
    type Output = LogPolar;
    fn mul(self, rhs: LogPolar) -> LogPolar {
        if self.is_zero() || rhs.is_zero() {
            return LogPolar::ZERO;
        }
        LogPolar::new(self.log_amplitude + rhs.log_amplitude, self.phase + rhs.phase)
    }
}

impl Neg for LogPolar {
    type Output = LogPolar;
    fn neg(self) -> LogPolar {
        if self.is_zero() {
            return self;
        }
        LogPolar::new(self.log_amplitude, self.phase + PI)
    }
}

impl Add for LogPolar {
    type Output = LogPolar;
    /// Log-sum-exp with phases.
    fn add(self, rhs: LogPolar) -> LogPolar {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let m = self.log_amplitude.max(rhs.log_amplitude);
        let z = Complex64::from_polar((self.log_amplitude - m).exp(), self.phase)
            + Complex64::from_polar((rhs.log_amplitude - m).exp(), rhs.phase);
        let r = z.norm();
        if r == 0.0 {
            return LogPolar::ZERO;
        }
        LogPolar::new(m + r.ln(), z.arg())
    }
}

impl std::iter::Sum for LogPolar {
    fn sum<I: Iterator<Item = LogPolar>>(iter: I) -> LogPolar {
        iter.fold(LogPolar::ZERO, |a, b| a + b)
    }
}
