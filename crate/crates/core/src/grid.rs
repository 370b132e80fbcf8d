//! Spatial grid, physical parameters and the zero-flux Laplacian.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on `[-half_length, half_length]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_length: f64,
    n_points: usize,
}

impl Grid {
    pub fn new(half_length: f64, n_points: usize) -> Result<Self> {
        if n_points < 3 {
            return Err(Error::InvalidInput(format!(
                "grid needs at least 3 points, got {n_points}"
            )));
        }
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "half length must be positive, got {half_length}"
            )));
        }
        Ok(Self {
            half_length,
            n_points,
        })
    }

    /// Smallest odd point count with spacing at most `max_dx`.
    pub fn with_max_spacing(half_length: f64, max_dx: f64) -> Result<Self> {
        if !(max_dx > 0.0) {
            return Err(Error::InvalidInput("spacing must be positive".into()));
        }
        let mut intervals = (2.0 * half_length / max_dx - 1e-9).ceil() as usize;
        if intervals % 2 == 1 {
            intervals += 1;
        }
        Self::new(half_length, intervals.max(2) + 1)
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / (self.n_points - 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        // Integer offset from the centre keeps odd grids exactly symmetric with x = 0 on the grid.
        let n = self.n_points - 1;
        let k = 2 * j as i64 - n as i64;
        self.half_length * k as f64 / n as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Index of the grid point closest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let j = ((x + self.half_length) / self.dx()).round();
        j.clamp(0.0, (self.n_points - 1) as f64) as usize
    }
}

/// Coefficients of the forced CGL equation
/// `A_t = (mu + i w0) A - (1 + i alpha)|A|^2 A + eps^beta I(x) + eps^gamma d A_xx`
/// with `mu = mu0 + eps t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub eps: f64,
    pub omega0: f64,
    pub alpha: f64,
    pub d_re: f64,
    pub d_im: f64,
    #[serde(default = "half")]
    pub beta: f64,
    #[serde(default = "one")]
    pub gamma: f64,
    pub mu0: f64,
}

fn half() -> f64 {
    0.5
}

fn one() -> f64 {
    1.0
}

impl PhysParams {
    /// Small-source, weak-diffusion parameters (`beta = 1/2`, `gamma = 1`).
    pub fn base(eps: f64, omega0: f64, alpha: f64, d: Complex64, mu0: f64) -> Self {
        Self {
            eps,
            omega0,
            alpha,
            d_re: d.re,
            d_im: d.im,
            beta: 0.5,
            gamma: 1.0,
            mu0,
        }
    }

    pub fn with_exponents(mut self, beta: f64, gamma: f64) -> Self {
        self.beta = beta;
        self.gamma = gamma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.eps, self.omega0, self.alpha, self.d_re, self.d_im, self.beta, self.gamma,
            self.mu0,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("parameters must be finite".into()));
        }
        if self.eps <= 0.0 {
            return Err(Error::InvalidInput(format!("eps must be > 0, got {}", self.eps)));
        }
        if self.omega0 <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "omega0 must be > 0, got {}",
                self.omega0
            )));
        }
        if self.d_re <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "Re d must be > 0, got {}",
                self.d_re
            )));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidInput(format!(
                "gamma must be >= 0, got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    pub fn d(&self) -> Complex64 {
        Complex64::new(self.d_re, self.d_im)
    }

    /// Diffusivity seen in the slow time `mu`: `eps^(gamma - 1) d`.
    pub fn slow_diffusivity(&self) -> Complex64 {
        self.d() * self.eps.powf(self.gamma - 1.0)
    }

    /// Diffusion coefficient in the fast time `t`: `eps^gamma d`.
    pub fn fast_diffusivity(&self) -> Complex64 {
        self.d() * self.eps.powf(self.gamma)
    }

    pub fn source_scale(&self) -> f64 {
        self.eps.powf(self.beta)
    }

    pub fn is_base(&self) -> bool {
        (self.beta - 0.5).abs() < 1e-12 && (self.gamma - 1.0).abs() < 1e-12
    }

    pub fn is_order_one(&self) -> bool {
        self.beta.abs() < 1e-12 && self.gamma.abs() < 1e-12
    }

    pub fn is_large_amplitude(&self) -> bool {
        (self.beta + 0.5).abs() < 1e-12 && (self.gamma - 1.0).abs() < 1e-12
    }

    /// `mu + i w0`.
    pub fn shifted(&self, mu: f64) -> Complex64 {
        Complex64::new(mu, self.omega0)
    }
}

/// `mu(t) = mu0 + eps t`.
pub fn mu_of_t(t: f64, p: &PhysParams) -> f64 {
    p.mu0 + p.eps * t
}

/// Complex amplitude sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::InvalidInput(format!(
                "field has {} values for a {}-point grid",
                values.len(),
                grid.n_points()
            )));
        }
        if let Some(j) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidInput(format!(
                "non-finite value at x = {}",
                grid.x(j)
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n_points()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new(grid, grid.points().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Second difference with ghost-point reflection at both ends.
pub fn laplacian_neumann(f: &ComplexField) -> Result<ComplexField> {
    let values = laplacian_values(f.values(), f.grid().dx())?;
    Ok(ComplexField {
        grid: *f.grid(),
        values,
    })
}

pub(crate) fn laplacian_values(f: &[Complex64], dx: f64) -> Result<Vec<Complex64>> {
    let n = f.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "laplacian needs at least 3 points, got {n}"
        )));
    }
    let inv = 1.0 / (dx * dx);
    let mut out = Vec::with_capacity(n);
    out.push((f[1] - f[0]) * (2.0 * inv));
    for j in 1..n - 1 {
        out.push((f[j - 1] - f[j] * 2.0 + f[j + 1]) * inv);
    }
    out.push((f[n - 2] - f[n - 1]) * (2.0 * inv));
    Ok(out)
}

/// Trapezoid weights matching the ghost-point scheme, so that
/// `sum_j w_j (L f)_j = 0` exactly.
pub fn trapezoid_weights(grid: &Grid) -> Vec<f64> {
    let dx = grid.dx();
    let n = grid.n_points();
    (0..n)
        .map(|j| if j == 0 || j == n - 1 { 0.5 * dx } else { dx })
        .collect()
}
