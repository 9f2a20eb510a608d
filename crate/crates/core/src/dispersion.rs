//! Dispersion functions `K_T`, `E_Delta`, `K_T^Delta`, the renormalization
//! function `m_mu(T)` and the Ginzburg-Landau weight functions `g1`, `g2`.

use crate::error::{Error, Result};
use crate::specfun::{GridSpec, NeumaierSum, RadialGrid};
use std::f64::consts::PI;

/// Temperature and chemical potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoPoint {
    pub t: f64,
    pub mu: f64,
}

impl ThermoPoint {
    pub fn new(t: f64, mu: f64) -> Result<Self> {
        if !t.is_finite() || !mu.is_finite() {
            return Err(Error::invalid("dispersion", "temperature and mu must be finite"));
        }
        if t < 0.0 {
            return Err(Error::invalid("dispersion", format!("negative temperature {t}")));
        }
        Ok(ThermoPoint { t, mu })
    }

    /// Inverse temperature; infinite at `T = 0`.
    pub fn beta(&self) -> f64 {
        if self.t == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.t
        }
    }

    pub fn with_t(&self, t: f64) -> Self {
        ThermoPoint { t, mu: self.mu }
    }
}

/// `z / tanh(z / 2T)` for real `z`; `|z|` at `T = 0` and `2T` at `z = 0`.
pub fn k_t_energy(z: f64, t: f64) -> f64 {
    if t == 0.0 {
        return z.abs();
    }
    let x = z / (2.0 * t);
    let ax = x.abs();
    if ax < 1e-6 {
        let x2 = x * x;
        2.0 * t * (1.0 + x2 / 3.0 - x2 * x2 / 45.0 + 2.0 * x2 * x2 * x2 / 945.0)
    } else if ax > 20.0 {
        // tanh(x) rounds to +-1 here
        z.abs()
    } else {
        z / x.tanh()
    }
}

/// `K_T(p) = (p^2 - mu) / tanh((p^2 - mu) / 2T)`.
pub fn k_t(p: f64, pt: ThermoPoint) -> f64 {
    k_t_energy(p * p - pt.mu, pt.t)
}

/// `E_Delta(p) = sqrt((p^2 - mu)^2 + delta^2)`.
pub fn e_delta(p: f64, delta: f64, pt: ThermoPoint) -> f64 {
    (p * p - pt.mu).hypot(delta)
}

/// `K_T^Delta(p) = E / tanh(E / 2T)` with `E = E_Delta(p)`.
pub fn k_t_delta(p: f64, delta: f64, pt: ThermoPoint) -> f64 {
    k_t_energy(e_delta(p, delta, pt), pt.t)
}

/// Options for the `m_mu` quadrature.
#[derive(Debug, Clone, Copy)]
pub struct MuIntegralOptions {
    pub panels_per_decade: usize,
    pub points_per_panel: usize,
    /// Relative tolerance on the difference between a coarse and a fine grid.
    pub tolerance: f64,
}

impl Default for MuIntegralOptions {
    fn default() -> Self {
        MuIntegralOptions {
            panels_per_decade: 4,
            points_per_panel: 24,
            tolerance: 1e-10,
        }
    }
}

/// Cutoff that makes `tanh` saturate in the tail of the `m_mu` integrand.
pub fn m_mu_cutoff(pt: ThermoPoint) -> f64 {
    let kf = pt.mu.sqrt();
    (20.0 * kf.max(1.0)).max((pt.mu + 80.0 * pt.t).sqrt() * 1.5)
}

/// `int_0^Lambda (p^2 / K_T(p) - 1) dp` on `grid`, plus the closed-form tail
/// `(sqrt(mu) / 2) ln((Lambda + sqrt(mu)) / (Lambda - sqrt(mu)))` beyond the cutoff.
pub fn m_mu_on_grid(grid: &RadialGrid, t: f64) -> f64 {
    let kf = grid.mu.sqrt();
    let lam = grid.cutoff;
    let mut s = NeumaierSum::new();
    for (&w, &xi) in grid.weights.iter().zip(&grid.xi) {
        // p^2 / K - 1 = (mu + xi - K) / K
        let k = k_t_energy(xi, t);
        s.add(w * ((grid.mu - (k - xi)) / k));
    }
    s.add(0.5 * kf * ((lam + kf) / (lam - kf)).ln());
    s.value()
}

/// `m_mu(T) = int_0^inf (p^2 / K_T(p) - 1) dp` for `mu > 0, T > 0`.
pub fn m_mu(pt: ThermoPoint) -> Result<f64> {
    m_mu_with(pt, MuIntegralOptions::default())
}

pub fn m_mu_with(pt: ThermoPoint, opts: MuIntegralOptions) -> Result<f64> {
    if !(pt.mu > 0.0) || !(pt.t > 0.0) {
        return Err(Error::domain(
            "dispersion",
            format!("m_mu needs mu > 0 and T > 0 (mu = {}, T = {})", pt.mu, pt.t),
        ));
    }
    let cutoff = m_mu_cutoff(pt);
    let fine = GridSpec::new(pt.mu, cutoff, pt.t)
        .panels_per_decade(opts.panels_per_decade)
        .points_per_panel(opts.points_per_panel)
        .build()?;
    let coarse = GridSpec::new(pt.mu, cutoff, pt.t)
        .panels_per_decade(opts.panels_per_decade)
        .points_per_panel((opts.points_per_panel * 2) / 3)
        .build()?;
    let a = m_mu_on_grid(&fine, pt.t);
    let b = m_mu_on_grid(&coarse, pt.t);
    let err = (a - b).abs();
    if !a.is_finite() || err > opts.tolerance * a.abs().max(1.0) {
        return Err(Error::accuracy("dispersion", "m_mu quadrature not resolved", err));
    }
    Ok(a)
}

/// `m_mu(T) / (2 pi^2)`, the normalization used in the low-density analysis.
pub fn m_mu_lowdensity(pt: ThermoPoint) -> Result<f64> {
    Ok(m_mu(pt)? / (2.0 * PI * PI))
}

/// `ln(8/pi) + gamma - 2`, the constant in `m_mu(T) ~ sqrt(mu)(ln(mu/T) + c)`.
pub fn m_mu_constant() -> f64 {
    (8.0 / PI).ln() + crate::EULER_GAMMA - 2.0
}

/// `g1(z) = (e^{2z} - 2z e^z - 1) / (z^2 (1 + e^z)^2)`.
pub fn g1(z: f64) -> f64 {
    z * g1_over_z(z)
}

/// `g1(z) / z`, even and positive; `1/12` at `z = 0`.
pub fn g1_over_z(z: f64) -> f64 {
    let a = z.abs();
    if a < 1e-3 {
        let z2 = z * z;
        return 1.0 / 12.0 - z2 / 60.0 + z2 * z2 * 17.0 / 6720.0 - z2 * z2 * z2 * 31.0 / 90720.0;
    }
    // g1 = (sinh z - z) / (2 z^2 cosh^2(z/2)); cosh^-2 = 1 - tanh^2.
    let sech2 = sech_sq_half(a);
    if a < 1.0 {
        sinh_minus_x(a) * sech2 / (2.0 * a * a * a)
    } else {
        (2.0 * (0.5 * a).tanh() - a * sech2) / (2.0 * a * a * a)
    }
}

/// `g2(z) = 2 e^z (e^z - 1) / (z (e^z + 1)^3)`, even; `1/4` at `z = 0`.
pub fn g2(z: f64) -> f64 {
    let a = z.abs();
    if a < 1e-3 {
        let z2 = z * z;
        return 0.25 - z2 / 12.0 + z2 * z2 * 17.0 / 960.0 - z2 * z2 * z2 * 31.0 / 10080.0;
    }
    (0.5 * a).tanh() * sech_sq_half(a) / (2.0 * a)
}

/// `1 / cosh^2(a/2)` for `a >= 0`, without overflow.
fn sech_sq_half(a: f64) -> f64 {
    let e = (-a).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

fn sinh_minus_x(x: f64) -> f64 {
    // Taylor series; used only for |x| < 1.
    let x2 = x * x;
    let mut term = x * x2 / 6.0;
    let mut sum = term;
    let mut k = 3.0;
    while term.abs() > 1e-18 * sum.abs() {
        term *= x2 / ((k + 1.0) * (k + 2.0));
        sum += term;
        k += 2.0;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pt(t: f64, mu: f64) -> ThermoPoint {
        ThermoPoint::new(t, mu).unwrap()
    }

    #[test]
    fn k_t_examples() {
        assert_relative_eq!(k_t(1.0, pt(0.3, 1.0)), 0.6, epsilon = 1e-15);
        assert_relative_eq!(k_t(2f64.sqrt(), pt(0.5, 1.0)), 1.0 / 1f64.tanh(), max_relative = 1e-14);
        assert_eq!(k_t(2.0, pt(0.0, 1.0)), 3.0);
    }

    #[test]
    fn k_t_is_continuous_at_series_switch() {
        let t = 0.01;
        for &x in &[0.999e-6, 1.001e-6] {
            let z: f64 = 2.0 * t * x;
            let direct = z / (z / (2.0 * t)).tanh();
            assert_relative_eq!(k_t_energy(z, t), direct, max_relative = 1e-15);
        }
    }

    #[test]
    fn e_delta_examples() {
        let p = pt(0.1, 1.0);
        assert_eq!(e_delta(2.0, 0.0, p), 3.0);
        assert_relative_eq!(e_delta(1.0, 0.2, p), 0.2);
        assert_relative_eq!(e_delta(2.0, 4.0, pt(0.1, 1.0)), 5.0);
        assert_eq!(k_t_delta(1.3, 0.0, p), k_t(1.3, p));
        assert_eq!(k_t_delta(1.3, 0.7, pt(0.0, 1.0)), e_delta(1.3, 0.7, p));
        assert_relative_eq!(k_t_delta(1.0, 0.0, p), 0.2);
    }

    #[test]
    fn k_t_lower_bound_and_monotonicity() {
        for i in 0..200 {
            let p = i as f64 * 0.02;
            let a = k_t(p, pt(0.05, 1.0));
            assert!(a >= 0.1 - 1e-15);
            assert!(k_t(p, pt(0.08, 1.0)) >= a);
            assert!(k_t_delta(p, 0.3, pt(0.05, 1.0)) >= k_t_delta(p, 0.2, pt(0.05, 1.0)));
        }
    }

    #[test]
    fn m_mu_oracle_values() {
        // 30-digit quadrature references.
        let cases = [
            (1e-4, 8.722_267_694_764_319),
            (1e-5, 11.024_852_785_722_759),
            (1e-6, 13.327_437_878_696_448),
            (0.5, 0.259_054_375_395_362_95),
            (0.01, 4.117_118_072_839_976),
        ];
        for (t, want) in cases {
            let got = m_mu(pt(t, 1.0)).unwrap();
            assert!((got - want).abs() < 1e-11, "T={t}: {got} vs {want}");
        }
    }

    #[test]
    fn m_mu_scaling() {
        let c: f64 = 1.7;
        let a = m_mu(pt(0.01, 2.0)).unwrap();
        let b = m_mu(pt(0.01 * c * c, 2.0 * c * c)).unwrap();
        assert_relative_eq!(b, c * a, max_relative = 1e-11);
    }

    #[test]
    fn m_mu_decreasing() {
        let mut prev = f64::INFINITY;
        for k in 0..12 {
            let t = 10f64.powf(-6.0 + 0.5 * k as f64);
            let m = m_mu(pt(t, 1.0)).unwrap();
            assert!(m < prev);
            prev = m;
        }
    }

    #[test]
    fn m_mu_rejects_bad_domain() {
        assert!(matches!(m_mu(pt(0.1, -1.0)), Err(Error::Domain { .. })));
        assert!(matches!(m_mu(pt(0.0, 1.0)), Err(Error::Domain { .. })));
    }

    #[test]
    fn g_functions_against_references() {
        let cases = [
            (5.0, 0.036_805_349_257_741_15, 0.002_623_627_106_529_025_2),
            (-5.0, -0.036_805_349_257_741_15, 0.002_623_627_106_529_025_2),
            (0.5, 0.039_659_800_808_458_56, 0.230_227_179_409_282_96),
            (2.0, 0.085_404_953_585_434_7, 0.079_962_501_056_153_06),
            (30.0, 0.001_111_111_111_104_664_7, 6.238_415_312_557_781e-15),
            (-0.7, -0.053_015_350_461_182_74, 0.213_082_252_686_690_9),
            (1e-4, 8.333_333_316_666_667e-6, 0.249_999_999_166_666_67),
        ];
        for (z, w1, w2) in cases {
            assert_relative_eq!(g1(z), w1, max_relative = 1e-13);
            assert_relative_eq!(g2(z), w2, max_relative = 1e-13);
        }
        assert_relative_eq!(g1_over_z(5.0), 0.007_361_069_851_548_23, max_relative = 1e-13);
        assert_eq!(g2(0.0), 0.25);
        assert_eq!(g1_over_z(0.0), 1.0 / 12.0);
        assert_eq!(g1(0.0), 0.0);
    }

    #[test]
    fn g_functions_continuous_at_switches() {
        for &z in &[1e-3, 1.0] {
            let lo = g1_over_z(z * (1.0 - 1e-12));
            let hi = g1_over_z(z * (1.0 + 1e-12));
            assert_relative_eq!(lo, hi, max_relative = 1e-11);
            assert_relative_eq!(g2(z * (1.0 - 1e-12)), g2(z * (1.0 + 1e-12)), max_relative = 1e-11);
        }
    }

    #[test]
    fn g1_over_z_positive() {
        for i in -5000..=5000 {
            let z = i as f64 * 0.01;
            assert!(g1_over_z(z) > 0.0, "z={z}");
        }
        assert!(g1_over_z(800.0) > 0.0);
    }
}
