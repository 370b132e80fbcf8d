//! Strang-split integration of the forced CGL equation with a slowly ramping `mu`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::InitialData;
use crate::error::{Error, Result};
use crate::grid::{laplacian_values, mu_of_t, ComplexField, Grid, PhysParams};
use crate::sources::{eval_source, SourceTerm};

/// Fields larger than this are treated as numerical blow-up.
pub const DIVERGENCE_LIMIT: f64 = 1e6;
/// Default snapshot spacing in `mu`.
pub const DEFAULT_RECORD_DMU: f64 = 0.005;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusionScheme {
    #[default]
    CrankNicolson,
    /// Classical RK4 on the semi-discrete heat equation; conditionally stable.
    ExplicitRk4,
}

/// Everything needed to integrate one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub params: PhysParams,
    pub source: SourceTerm,
    pub initial: InitialData,
    pub grid: Grid,
    pub mu_end: f64,
    /// Step in the fast time `t`; `None` picks the default.
    pub dt: Option<f64>,
    pub record_dmu: f64,
    pub diffusion: DiffusionScheme,
    /// Keep the `-(1 + i alpha)|A|^2 A` term.
    pub cubic: bool,
    /// Keep the `eps^beta I(x)` term.
    pub forcing: bool,
}

impl Experiment {
    pub fn new(
        params: PhysParams,
        source: SourceTerm,
        initial: InitialData,
        grid: Grid,
        mu_end: f64,
    ) -> Self {
        Self {
            params,
            source,
            initial,
            grid,
            mu_end,
            dt: None,
            record_dmu: DEFAULT_RECORD_DMU,
            diffusion: DiffusionScheme::CrankNicolson,
            cubic: true,
            forcing: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.source.validate()?;
        self.initial.validate()?;
        if !(self.mu_end >= self.params.mu0) || !self.mu_end.is_finite() {
            return Err(Error::InvalidInput(format!(
                "mu_end = {} must be >= mu0 = {}",
                self.mu_end, self.params.mu0
            )));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}")));
            }
        }
        if !(self.record_dmu > 0.0) {
            return Err(Error::InvalidInput(format!(
                "snapshot spacing must be > 0, got {}",
                self.record_dmu
            )));
        }
        Ok(())
    }

    /// Step that turns the fastest linear rotation by at most 0.1 rad.
    pub fn default_dt(&self) -> f64 {
        let p = &self.params;
        0.1 / (p.mu0.abs().max(self.mu_end.abs()) + p.omega0)
    }

    pub fn effective_dt(&self) -> f64 {
        self.dt.unwrap_or_else(|| self.default_dt())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub field: ComplexField,
    pub t: f64,
    pub mu: f64,
    pub step_count: u64,
}

impl SimState {
    pub fn initial(exp: &Experiment) -> Result<Self> {
        let values = exp.initial.sample(&exp.grid, &exp.source, &exp.params);
        Ok(Self {
            field: ComplexField::new(exp.grid, values)?,
            t: 0.0,
            mu: exp.params.mu0,
            step_count: 0,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub mu: f64,
    pub values: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub grid: Grid,
    pub params: PhysParams,
    pub snapshots: Vec<Snapshot>,
    pub dt: f64,
    pub config_hash: u64,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn mus(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.mu).collect()
    }

    /// Snapshot with `mu` closest to the request.
    pub fn nearest(&self, mu: f64) -> Option<&Snapshot> {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.mu - mu).abs().total_cmp(&(b.mu - mu).abs()))
    }
}

/// Constant-coefficient tridiagonal system `(I - h k L) u = rhs` with the
/// ghost-point Neumann rows, factorized once.
#[derive(Clone, Debug)]
struct CrankNicolson {
    /// `h k / dx^2`
    r: Complex64,
    /// Modified super-diagonal of the forward sweep.
    c_prime: Vec<Complex64>,
    /// Reciprocal pivots.
    inv_pivot: Vec<Complex64>,
}

impl CrankNicolson {
    fn new(n: usize, r: Complex64) -> Self {
        let diag = 1.0 + 2.0 * r;
        let zero = Complex64::new(0.0, 0.0);
        let mut c_prime = vec![zero; n];
        let mut inv_pivot = vec![zero; n];
        let mut prev_c = zero;
        for j in 0..n {
            let below = Self::sub_diagonal(j, n, r);
            inv_pivot[j] = 1.0 / (diag - below * prev_c);
            let above = match j {
                0 => -2.0 * r,
                _ if j + 1 < n => -r,
                _ => zero,
            };
            c_prime[j] = above * inv_pivot[j];
            prev_c = c_prime[j];
        }
        Self {
            r,
            c_prime,
            inv_pivot,
        }
    }

    fn sub_diagonal(j: usize, n: usize, r: Complex64) -> Complex64 {
        if j == 0 {
            Complex64::new(0.0, 0.0)
        } else if j == n - 1 {
            -2.0 * r
        } else {
            -r
        }
    }

    /// `u <- (I - h k L)^{-1} (I + h k L) u`.
    fn apply(&self, u: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let n = u.len();
        let r = self.r;
        scratch.clear();
        scratch.push(u[0] * (1.0 - 2.0 * r) + u[1] * (2.0 * r));
        for j in 1..n - 1 {
            scratch.push(u[j] * (1.0 - 2.0 * r) + (u[j - 1] + u[j + 1]) * r);
        }
        scratch.push(u[n - 1] * (1.0 - 2.0 * r) + u[n - 2] * (2.0 * r));
        // forward sweep
        let mut prev = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let below = Self::sub_diagonal(j, n, r);
            prev = (scratch[j] - below * prev) * self.inv_pivot[j];
            scratch[j] = prev;
        }
        u[n - 1] = scratch[n - 1];
        for j in (0..n - 1).rev() {
            u[j] = scratch[j] - self.c_prime[j] * u[j + 1];
        }
    }
}

/// `|1 + z + z^2/2 + z^3/6 + z^4/24|`
fn rk4_amplification(z: Complex64) -> f64 {
    (1.0 + z * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0)))).norm()
}

/// Reusable stepping machinery for a fixed `dt`.
pub struct Stepper {
    dt: f64,
    params: PhysParams,
    dx: f64,
    kappa: Complex64,
    forcing: Vec<f64>,
    cubic: bool,
    scheme: DiffusionScheme,
    cn: CrankNicolson,
    scratch: Vec<Complex64>,
}

impl Stepper {
    pub fn new(exp: &Experiment, dt: f64) -> Result<Self> {
        let p = exp.params;
        let grid = exp.grid;
        let dx = grid.dx();
        let kappa = p.fast_diffusivity();
        let half = 0.5 * dt;
        if exp.diffusion == DiffusionScheme::ExplicitRk4 {
            // eigenvalues of kappa L lie on kappa * [-4/dx^2, 0]
            let unstable = (0..=64).any(|k| {
                let z = kappa * (-4.0 * k as f64 / 64.0 / (dx * dx)) * half;
                rk4_amplification(z) > 1.0 + 1e-12
            });
            if unstable {
                return Err(Error::InvalidInput(format!(
                    "explicit diffusion is unstable for dt = {dt}, dx = {dx}; reduce dt below about {:.3e}",
                    2.78 * dx * dx / (4.0 * kappa.norm()) * 2.0
                )));
            }
        }
        let scale = if exp.forcing { p.source_scale() } else { 0.0 };
        let forcing = grid
            .points()
            .iter()
            .map(|&x| scale * eval_source(&exp.source, x))
            .collect();
        let r = kappa * (0.5 * half) / (dx * dx);
        Ok(Self {
            dt,
            params: p,
            dx,
            kappa,
            forcing,
            cubic: exp.cubic,
            scheme: exp.diffusion,
            cn: CrankNicolson::new(grid.n_points(), r),
            scratch: Vec::with_capacity(grid.n_points()),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn diffuse(&mut self, u: &mut [Complex64], h: f64) -> Result<()> {
        match self.scheme {
            DiffusionScheme::CrankNicolson => self.cn.apply(u, &mut self.scratch),
            DiffusionScheme::ExplicitRk4 => {
                let k = self.kappa;
                let dx = self.dx;
                let rhs = |v: &[Complex64]| -> Result<Vec<Complex64>> {
                    Ok(laplacian_values(v, dx)?.into_iter().map(|l| l * k).collect())
                };
                let k1 = rhs(u)?;
                let s1: Vec<_> = u.iter().zip(&k1).map(|(a, b)| a + b * (0.5 * h)).collect();
                let k2 = rhs(&s1)?;
                let s2: Vec<_> = u.iter().zip(&k2).map(|(a, b)| a + b * (0.5 * h)).collect();
                let k3 = rhs(&s2)?;
                let s3: Vec<_> = u.iter().zip(&k3).map(|(a, b)| a + b * h).collect();
                let k4 = rhs(&s3)?;
                for j in 0..u.len() {
                    u[j] += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (h / 6.0);
                }
            }
        }
        Ok(())
    }

    fn react(&self, u: &mut [Complex64], t: f64) {
        let p = self.params;
        let dt = self.dt;
        let cubic = if self.cubic {
            Complex64::new(1.0, p.alpha)
        } else {
            Complex64::new(0.0, 0.0)
        };
        let rate = |tau: f64| Complex64::new(mu_of_t(tau, &p), p.omega0);
        let (r0, r1, r2) = (rate(t), rate(t + 0.5 * dt), rate(t + dt));
        u.par_iter_mut().zip(self.forcing.par_iter()).for_each(|(a, &f)| {
            let rhs = |r: Complex64, v: Complex64| r * v - cubic * v.norm_sqr() * v + f;
            let k1 = rhs(r0, *a);
            let k2 = rhs(r1, *a + k1 * (0.5 * dt));
            let k3 = rhs(r1, *a + k2 * (0.5 * dt));
            let k4 = rhs(r2, *a + k3 * dt);
            *a += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (dt / 6.0);
        });
    }

    /// One `D(dt/2) R(dt) D(dt/2)` step.
    pub fn step(&mut self, st: &mut SimState) -> Result<()> {
        let dt = self.dt;
        let u = st.field.values_mut();
        self.diffuse(u, 0.5 * dt)?;
        self.react(u, st.t);
        self.diffuse(u, 0.5 * dt)?;
        st.t += dt;
        st.mu = mu_of_t(st.t, &self.params);
        st.step_count += 1;
        if let Some(j) = u
            .iter()
            .position(|v| !(v.norm() <= DIVERGENCE_LIMIT))
        {
            return Err(Error::Divergence {
                x: st.field.grid().x(j),
                mu: st.mu,
                partial: None,
            });
        }
        Ok(())
    }
}

/// Single step of the splitting with the given `dt`.
pub fn step_strang(st: &SimState, dt: f64, exp: &Experiment) -> Result<SimState> {
    let mut next = st.clone();
    Stepper::new(exp, dt)?.step(&mut next)?;
    Ok(next)
}

/// FNV-1a over the debug rendering of the experiment.
fn experiment_hash(exp: &Experiment) -> u64 {
    format!("{exp:?}")
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

fn regime_warnings(exp: &Experiment) -> Vec<String> {
    let p = &exp.params;
    let mut out = Vec::new();
    if p.omega0 >= 1.0 || p.omega0 <= p.eps.powf(0.25) * 0.1 {
        out.push(format!(
            "omega0 = {} is outside (0.1 eps^(1/4), 1): asymptotic predictions may be poor",
            p.omega0
        ));
    }
    out
}

/// Integrate from `mu0` to `mu_end`, recording a snapshot every `record_dmu`.
pub fn run(exp: &Experiment) -> Result<Trajectory> {
    exp.validate()?;
    let p = exp.params;
    let mut st = SimState::initial(exp)?;
    let base_dt = exp.effective_dt();
    let mut traj = Trajectory {
        grid: exp.grid,
        params: p,
        snapshots: vec![Snapshot {
            mu: p.mu0,
            values: st.field.values().to_vec(),
        }],
        dt: base_dt,
        config_hash: experiment_hash(exp),
        warnings: regime_warnings(exp),
    };
    let total = exp.mu_end - p.mu0;
    let intervals = (total / exp.record_dmu - 1e-9).ceil().max(0.0) as usize;
    let mut cache: Option<(usize, Stepper)> = None;
    for k in 1..=intervals {
        let mu_target = if k == intervals {
            exp.mu_end
        } else {
            p.mu0 + k as f64 * exp.record_dmu
        };
        let t_target = (mu_target - p.mu0) / p.eps;
        let span = t_target - st.t;
        let steps = (span / base_dt - 1e-9).ceil().max(1.0) as usize;
        let stepper = match cache.take() {
            Some((n, s)) if n == steps && (s.dt() - span / steps as f64).abs() < 1e-12 * s.dt() => s,
            _ => Stepper::new(exp, span / steps as f64)?,
        };
        let mut stepper = stepper;
        for _ in 0..steps {
            if let Err(e) = stepper.step(&mut st) {
                return Err(match e {
                    Error::Divergence { x, mu, .. } => Error::Divergence {
                        x,
                        mu,
                        partial: Some(Box::new(traj)),
                    },
                    other => other,
                });
            }
        }
        st.t = t_target;
        st.mu = mu_target;
        traj.snapshots.push(Snapshot {
            mu: mu_target,
            values: st.field.values().to_vec(),
        });
        cache = Some((steps, stepper));
    }
    Ok(traj)
}
