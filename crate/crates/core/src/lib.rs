//! Numerical laboratory for the translation-invariant BCS functional.
//!
//! The crate solves the BCS gap equation for radial two-body interactions,
//! locates the critical temperature through the Birman-Schwinger spectral
//! criterion, evaluates the weak-coupling, low-density and zero-range
//! asymptotic formulas for `T_c`, and reduces the microscopic theory near
//! `T_c` to Ginzburg-Landau coefficients and the field-shifted critical
//! parameter `D_c`.
//!
//! Units: `hbar = 2m = k_B = 1`, so the kinetic energy is `p^2` and the
//! chemical potential `mu` is the square of the Fermi momentum.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dispersion;
pub mod error;
pub mod gapsolve;
pub mod glcoeff;
pub mod glfield;
pub(crate) mod linalg;
pub mod potential;
pub mod scatter;
pub mod specfun;
pub mod tcrit;
pub mod verify;

pub use error::{Error, Result};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
