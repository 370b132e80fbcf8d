//! Slow passage through a Hopf bifurcation in the forced complex Ginzburg-Landau equation
//!
//! `A_t = (mu + i w0) A - (1 + i alpha)|A|^2 A + eps^beta I(x) + eps^gamma d A_xx`, `mu = mu0 + eps t`,
//! on `[-l, l]` with zero-flux boundaries.
//!
//! The crate simulates the equation and computes the curves that predict where and
//! when oscillations set in: the space-time buffer curve, the homogeneous exit-time
//! curve and the instantaneous Hopf curve. Contour quadrature of the linear
//! particular solution provides an independent check of the asymptotics.

pub mod analysis;
pub mod asymptotics;
pub mod cli;
pub mod config;
pub mod contour;
pub mod error;
pub mod grid;
pub mod io;
pub mod qss;
pub mod quad;
pub mod solver;
pub mod sources;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{ComplexField, Grid, PhysParams};
pub use sources::SourceTerm;
