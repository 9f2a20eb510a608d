//! Closed-form and independent-route checks of the numerical building blocks.

use approx::assert_relative_eq;
use bcslab::dispersion::{k_t, m_mu, m_mu_constant, ThermoPoint};
use bcslab::gapsolve::{solve_gap, GapOptions};
use bcslab::glcoeff::{compute_coefficients, compute_coefficients_adaptive, t_profile, AlphaZero};
use bcslab::potential::{kernel_entry_momentum, kernel_entry_position, RadialPotential};
use bcslab::scatter::{bs_spectrum_floor, scattering_length};
use bcslab::specfun::{
    gauss_legendre, integrate_adaptive, legendre_p, spherical_bessel_j, AngularChannel, GridControls,
};
use bcslab::tcrit::{channel_critical_temperature, tc_prefactor, universal_ratio_limit, TcOptions};
use std::f64::consts::PI;

#[test]
fn spherical_bessel_closed_forms() {
    for &x in &[0.1f64, 0.7, 2.5, 10.0, 40.0] {
        let (s, c) = x.sin_cos();
        assert_relative_eq!(spherical_bessel_j(0, x), s / x, max_relative = 1e-13);
        assert_relative_eq!(spherical_bessel_j(1, x), s / (x * x) - c / x, max_relative = 1e-10, epsilon = 1e-15);
        let j2 = (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x);
        assert_relative_eq!(spherical_bessel_j(2, x), j2, max_relative = 1e-9, epsilon = 1e-15);
    }
    // leading terms of the power series where the closed forms cancel
    let x = 1e-3f64;
    assert_relative_eq!(spherical_bessel_j(1, x), x / 3.0 * (1.0 - x * x / 10.0), max_relative = 1e-12);
    assert_relative_eq!(spherical_bessel_j(2, x), x * x / 15.0 * (1.0 - x * x / 14.0), max_relative = 1e-12);
}

#[test]
fn legendre_closed_forms() {
    for &u in &[-1.0f64, -0.4, 0.0, 0.3, 0.9, 1.0] {
        assert_relative_eq!(legendre_p(2, u), 1.5 * u * u - 0.5, epsilon = 1e-15);
        assert_relative_eq!(legendre_p(3, u), 2.5 * u * u * u - 1.5 * u, epsilon = 1e-15);
    }
}

#[test]
fn gauss_legendre_is_exact_for_polynomials() {
    let (x, w) = gauss_legendre(10);
    for k in 0..20 {
        let quad: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
        let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
        assert_relative_eq!(quad, exact, epsilon = 1e-14);
    }
}

#[test]
fn prefactor_constants() {
    assert_relative_eq!(tc_prefactor(), 8.0 / PI * (bcslab::EULER_GAMMA - 2.0).exp(), max_relative = 1e-15);
    assert_relative_eq!(universal_ratio_limit(), 1.7638769888620457, max_relative = 1e-14);
    assert_relative_eq!(m_mu_constant(), -0.48800, epsilon = 1e-3);
}

#[test]
fn gaussian_fourier_transform() {
    let (v, s) = (3.0, 0.7);
    let g = RadialPotential::gaussian(v, s).unwrap();
    for &p in &[0.0, 0.5, 2.0, 5.0] {
        let exact = -v * s.powi(3) * (-0.5 * (p * s).powi(2)).exp();
        assert_relative_eq!(g.fourier_transform(p), exact, max_relative = 1e-10, epsilon = 1e-14);
    }
}

/// `(2/pi) int_0^R r^2 (-v) j0(pr) j0(qr) dr` in closed form.
fn square_well_s_kernel(v: f64, r: f64, p: f64, q: f64) -> f64 {
    let f = |k: f64| if k == 0.0 { r } else { (k * r).sin() / k };
    -v * (2.0 / PI) * (f(p - q) - f(p + q)) / (2.0 * p * q)
}

#[test]
fn square_well_kernel_matches_closed_form() {
    let sw = RadialPotential::square_well(2.0, 1.3).unwrap();
    for &(p, q) in &[(0.3, 0.3), (0.3, 1.1), (1.0, 4.0), (7.5, 2.2)] {
        let exact = square_well_s_kernel(2.0, 1.3, p, q);
        let a = kernel_entry_position(&sw, AngularChannel::S, p, q).unwrap();
        let b = kernel_entry_momentum(&sw, AngularChannel::S, p, q).unwrap();
        assert_relative_eq!(a, exact, max_relative = 1e-10);
        assert_relative_eq!(b, exact, max_relative = 1e-8);
    }
}

#[test]
fn m_mu_matches_direct_quadrature() {
    // int_0^inf (1/K_T(p) - 1/p^2) p^2 dp ... split at the Fermi surface
    let t = 0.05;
    let pt = ThermoPoint::new(t, 1.0).unwrap();
    let f = |p: f64| p * p / k_t(p, pt) - 1.0;
    let mut total = 0.0;
    for (a, b) in [(0.0, 0.9), (0.9, 1.0), (1.0, 1.1), (1.1, 3.0), (3.0, 30.0)] {
        total += integrate_adaptive(f, a, b, 1e-14, 1e-13).unwrap().0;
    }
    // tail beyond 30: p^2/K_T - 1 = mu/(p^2 - mu) up to exponentially small terms
    total += 0.5 * ((30.0f64 + 1.0) / (30.0 - 1.0)).ln();
    let m = m_mu(pt).unwrap();
    assert_relative_eq!(m, total, max_relative = 1e-8);
}

#[test]
fn square_well_scattering_length_closed_form() {
    // u'' = V u with V = -v on [0, R]: a = R - tan(sqrt(v) R)/sqrt(v)
    for &(v, r) in &[(0.5, 1.0), (1.0, 1.0), (2.0, 1.0), (0.5, 2.0)] {
        let k: f64 = f64::sqrt(v);
        let exact = r - (k * r).tan() / k;
        let a = scattering_length(&RadialPotential::square_well(v, r).unwrap()).unwrap().a;
        assert_relative_eq!(a, exact, max_relative = 1e-9);
    }
}

#[test]
fn bound_state_floor_crosses_minus_one_at_the_threshold() {
    // a square well first binds at sqrt(v) R = pi/2
    let v0 = (PI / 2.0).powi(2);
    let below = bs_spectrum_floor(&RadialPotential::square_well(0.99 * v0, 1.0).unwrap()).unwrap();
    let above = bs_spectrum_floor(&RadialPotential::square_well(1.01 * v0, 1.0).unwrap()).unwrap();
    assert!(below > -1.0 && above < -1.0, "{below} {above}");
    assert!(scattering_length(&RadialPotential::square_well(1.01 * v0, 1.0).unwrap()).is_err());
}

#[test]
fn gl_coefficients_grid_route_matches_adaptive_quadrature() {
    let v = RadialPotential::gaussian(1.5, 1.0).unwrap();
    let opts = TcOptions {
        ell_max: 0,
        ..TcOptions::default()
    };
    let tc = channel_critical_temperature(&v, AngularChannel::S, 1.0, &opts, None).unwrap().tc;
    let a0 = AlphaZero::compute(&v, 1.0, tc, &GridControls::default()).unwrap();
    let grid = compute_coefficients(1.0, tc, &t_profile(&v, &a0).unwrap(), a0.norm).unwrap();
    let adaptive = compute_coefficients_adaptive(&v, &a0, 1e-11).unwrap();
    for (a, b) in [
        (grid.lambda0, adaptive.lambda0),
        (grid.lambda1, adaptive.lambda1),
        (grid.lambda2, adaptive.lambda2),
        (grid.lambda3, adaptive.lambda3),
    ] {
        assert_relative_eq!(a, b, max_relative = 1e-8);
    }
}

#[test]
fn gap_solution_has_lower_free_energy_than_the_normal_state() {
    let v = RadialPotential::gaussian(1.5, 1.0).unwrap();
    let sol = solve_gap(&v, AngularChannel::S, ThermoPoint::new(0.1, 1.0).unwrap(), &GapOptions::default()).unwrap();
    assert!(!sol.trivial);
    assert!(sol.free_energy_density < sol.normal_free_energy_density);
}
