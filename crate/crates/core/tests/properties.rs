//! Invariants checked over randomized inputs.

use bcslab::dispersion::{k_t, ThermoPoint};
use bcslab::gapsolve::constraint_gap;
use bcslab::glfield::{critical_d, gl_energy, CriticalOptions, ExternalFields, GlParams, PeriodicField};
use bcslab::potential::RadialPotential;
use bcslab::scatter::scattering_length;
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constraint_rhs_lies_in_quarter_interval(xi in -20.0f64..20.0, delta in 0.0f64..3.0, t in 1e-3f64..2.0) {
        let c = constraint_gap(xi, delta, t);
        prop_assert!((0.0..=0.25 + 1e-15).contains(&c), "{c}");
    }

    #[test]
    fn k_t_is_bounded_below_by_2t(p in 0.0f64..5.0, t in 1e-4f64..3.0, mu in -1.0f64..4.0) {
        let pt = ThermoPoint::new(t, mu).unwrap();
        prop_assert!(k_t(p, pt) >= 2.0 * t * (1.0 - 1e-14));
    }

    #[test]
    fn gl_energy_is_phase_invariant(theta in 0.0f64..6.3, seed in 0u64..1000) {
        let mut psi = PeriodicField::zeros(2, 2).unwrap();
        for (i, c) in psi.coeffs.iter_mut().enumerate() {
            let s = (seed as f64 + 1.0) * (i as f64 + 1.0);
            *c = Complex64::new((0.37 * s).sin(), (0.91 * s).cos()) * 0.3;
        }
        let fields = ExternalFields::cosine_w(2, 0.7, 0).unwrap();
        let p = GlParams { lambda1: 0.8, lambda2: 1.1, lambda3: 0.6 };
        let e0 = gl_energy(&psi, &fields, p, 0.9).unwrap();
        let e1 = gl_energy(&psi.with_phase(theta), &fields, p, 0.9).unwrap();
        prop_assert!((e0 - e1).abs() <= 1e-12 * e0.abs().max(1.0));
    }

    #[test]
    fn scattering_length_scales_with_range(v in 0.05f64..1.2, c in 0.3f64..3.0) {
        // V_c(r) = c^-2 V(r/c) has scattering length c a
        let a = scattering_length(&RadialPotential::gaussian(v, 1.0).unwrap()).unwrap().a;
        let ac = scattering_length(&RadialPotential::gaussian(v / (c * c), c).unwrap()).unwrap().a;
        prop_assert!((ac - c * a).abs() <= 1e-8 * (c * a).abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn critical_d_is_translation_invariant(x0 in 0.0f64..1.0, y0 in 0.0f64..1.0) {
        let fields = ExternalFields::parse("W 1 0 0 0.4 0.2\nW -1 0 0 0.4 -0.2\nW 0 1 0 -0.3 0\nW 0 -1 0 -0.3 0\n", 2).unwrap();
        let opts = CriticalOptions { n: 6, ..CriticalOptions::default() };
        let d0 = critical_d(&fields, 1.0, 1.0, &opts).unwrap().d_c;
        let d1 = critical_d(&fields.shifted_w([x0, y0, 0.0]), 1.0, 1.0, &opts).unwrap().d_c;
        prop_assert!((d0 - d1).abs() <= 1e-10, "{d0} {d1}");
    }
}
