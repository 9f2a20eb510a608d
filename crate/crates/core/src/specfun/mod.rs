//! Special functions and quadrature shared by the numerical modules.

mod bessel;
mod grid;
mod quadrature;

pub use bessel::{
    legendre_p, spherical_bessel_j, spherical_bessel_j_all, spherical_bessel_j_recurrence,
    spherical_bessel_j_series,
};
pub use grid::{build_fermi_adapted_grid, GridControls, GridSpec, RadialGrid};
pub use quadrature::{composite_gauss_legendre, gauss_legendre, integrate_adaptive, NeumaierSum};

use std::fmt;

/// Angular momentum quantum number of a spherical-harmonic sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AngularChannel(pub usize);

impl AngularChannel {
    pub const S: AngularChannel = AngularChannel(0);

    pub fn ell(self) -> usize {
        self.0
    }

    /// Degeneracy `2l + 1` of the sector.
    pub fn multiplicity(self) -> usize {
        2 * self.0 + 1
    }
}

impl From<usize> for AngularChannel {
    fn from(ell: usize) -> Self {
        AngularChannel(ell)
    }
}

impl fmt::Display for AngularChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l={}", self.0)
    }
}

/// Default truncation of partial-wave sums.
pub const DEFAULT_ELL_MAX: usize = 40;
