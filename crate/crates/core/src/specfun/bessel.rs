/// Spherical Bessel function `j_l(x)` for `x >= 0`.
///
/// Uses the power series below `x = 1`, upward recurrence from `j_0, j_1`
/// when `x >= l`, and Miller's downward recurrence in between.
pub fn spherical_bessel_j(ell: usize, x: f64) -> f64 {
    debug_assert!(x >= 0.0, "j_l needs x >= 0, got {x}");
    if x == 0.0 {
        return if ell == 0 { 1.0 } else { 0.0 };
    }
    if x < 1.0 {
        return spherical_bessel_j_series(ell, x);
    }
    spherical_bessel_j_recurrence(ell, x)
}

/// Power series of `j_l(x)`; accurate for `x` up to a few units.
pub fn spherical_bessel_j_series(ell: usize, x: f64) -> f64 {
    // x^l / (2l+1)!! built as a product to stay in range.
    let mut lead = 1.0;
    for i in 1..=ell {
        lead *= x / (2 * i + 1) as f64;
    }
    let y = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= y / (k as f64 * (2 * ell + 2 * k + 1) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

/// Recurrence evaluation of `j_l(x)` for `x > 0` (upward when `x >= l`,
/// normalized downward recurrence otherwise).
pub fn spherical_bessel_j_recurrence(ell: usize, x: f64) -> f64 {
    let (j0, j1) = j0_j1(x);
    if ell == 0 {
        return j0;
    }
    if x >= ell as f64 {
        let mut prev = j0;
        let mut cur = j1;
        for n in 1..ell {
            let next = (2 * n + 1) as f64 / x * cur - prev;
            prev = cur;
            cur = next;
        }
        return cur;
    }
    let values = miller_downward(ell, x, j0, j1);
    values[ell]
}

/// All `j_0(x) .. j_lmax(x)`.
pub fn spherical_bessel_j_all(lmax: usize, x: f64) -> Vec<f64> {
    if x == 0.0 {
        let mut out = vec![0.0; lmax + 1];
        out[0] = 1.0;
        return out;
    }
    if x < 1.0 {
        return (0..=lmax).map(|l| spherical_bessel_j_series(l, x)).collect();
    }
    let (j0, j1) = j0_j1(x);
    // Upward recurrence is stable up to l ~ x; switch to Miller above that.
    let mut out = Vec::with_capacity(lmax + 1);
    out.push(j0);
    if lmax == 0 {
        return out;
    }
    out.push(j1);
    let up_to = (x.floor() as usize).min(lmax);
    for n in 1..up_to {
        let next = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
        out.push(next);
    }
    if out.len() <= lmax {
        let down = miller_downward(lmax, x, j0, j1);
        out.extend_from_slice(&down[out.len()..=lmax]);
    }
    out
}

fn j0_j1(x: f64) -> (f64, f64) {
    if x < 1.0 {
        return (
            spherical_bessel_j_series(0, x),
            spherical_bessel_j_series(1, x),
        );
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    (j0, (j0 - c) / x)
}

fn miller_downward(lmax: usize, x: f64, j0: f64, j1: f64) -> Vec<f64> {
    let top = lmax.max(x.ceil() as usize);
    let start = top + 20 + (40.0 * top as f64).sqrt() as usize;
    let mut f = vec![0.0; start + 2];
    f[start] = 1e-300;
    for n in (1..=start).rev() {
        let v = (2 * n + 1) as f64 / x * f[n] - f[n + 1];
        f[n - 1] = v;
        if v.abs() > 1e250 {
            for val in f.iter_mut().skip(n - 1) {
                *val *= 1e-250;
            }
        }
    }
    let scale = if j0.abs() >= j1.abs() {
        j0 / f[0]
    } else {
        j1 / f[1]
    };
    f.truncate(lmax + 1);
    for v in f.iter_mut() {
        *v *= scale;
    }
    f
}

/// Legendre polynomial `P_l(u)` by the three-term recurrence.
pub fn legendre_p(ell: usize, u: f64) -> f64 {
    debug_assert!(u.abs() <= 1.0 + 1e-12);
    match ell {
        0 => 1.0,
        1 => u,
        _ => {
            let mut prev = 1.0;
            let mut cur = u;
            for n in 1..ell {
                let nf = n as f64;
                let next = ((2.0 * nf + 1.0) * u * cur - nf * prev) / (nf + 1.0);
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn j0_limits() {
        assert_eq!(spherical_bessel_j(0, 0.0), 1.0);
        assert_relative_eq!(spherical_bessel_j(0, 1e-9), 1.0, epsilon = 1e-15);
        assert!(spherical_bessel_j(0, PI).abs() < 1e-15);
        assert_eq!(spherical_bessel_j(3, 0.0), 0.0);
    }

    #[test]
    fn closed_forms() {
        for &x in &[0.3f64, 1.0, 2.5, 7.0, 40.0, 1234.5] {
            let (s, c) = x.sin_cos();
            let j1 = s / (x * x) - c / x;
            let j2 = (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x);
            assert_relative_eq!(spherical_bessel_j(1, x), j1, max_relative = 1e-12, epsilon = 1e-15);
            assert_relative_eq!(spherical_bessel_j(2, x), j2, max_relative = 1e-11, epsilon = 1e-15);
        }
    }

    #[test]
    fn sum_rule() {
        for &x in &[0.1, 1.0, 5.0, 20.0] {
            let lmax = (x as usize) + 40;
            let js = spherical_bessel_j_all(lmax, x);
            let s: f64 = js.iter().enumerate().map(|(l, j)| (2 * l + 1) as f64 * j * j).sum();
            assert!((s - 1.0).abs() < 1e-10, "x={x} sum={s}");
        }
        let js = spherical_bessel_j_all(60, 5.0);
        let s: f64 = js.iter().enumerate().map(|(l, j)| (2 * l + 1) as f64 * j * j).sum();
        assert!((s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn series_and_recurrence_overlap() {
        for ell in 0..12 {
            for k in 0..=20 {
                let x = 0.5 + k as f64 * 0.05;
                let a = spherical_bessel_j_series(ell, x);
                let b = spherical_bessel_j_recurrence(ell, x);
                assert!(
                    (a - b).abs() <= 1e-12 * a.abs().max(1e-300) + 1e-300,
                    "l={ell} x={x} series={a} rec={b}"
                );
            }
        }
    }

    #[test]
    fn all_matches_single() {
        for &x in &[0.7, 3.3, 12.0, 80.0] {
            let all = spherical_bessel_j_all(64, x);
            for (l, v) in all.iter().enumerate() {
                let single = spherical_bessel_j(l, x);
                assert!((v - single).abs() <= 1e-13 * single.abs() + 1e-300, "l={l} x={x}");
            }
        }
    }

    #[test]
    fn legendre_values() {
        assert_eq!(legendre_p(0, 0.3), 1.0);
        assert_eq!(legendre_p(1, 0.3), 0.3);
        assert_relative_eq!(legendre_p(2, 1.0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(legendre_p(3, 0.5), 0.5 * (5.0 * 0.125 - 1.5), epsilon = 1e-15);
        for l in 0..20 {
            assert_relative_eq!(legendre_p(l, -1.0), if l % 2 == 0 { 1.0 } else { -1.0 }, epsilon = 1e-13);
        }
    }
}
