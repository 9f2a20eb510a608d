//! Ginzburg–Landau coefficients from the s-wave zero mode `alpha_0` of
//! `K_{T_c} + V`.
//!
//! `alpha_0` is normalized so that `int |alpha_0(p)|^2 dp = c^2` over
//! momentum space, with `c = 1` unless rescaled. All integrals use the
//! measure `dq / (2 pi)^3 = q^2 dq / (2 pi^2)`.

use crate::dispersion::{g1, g1_over_z, g2, k_t_energy, ThermoPoint};
use crate::error::{Error, Result};
use crate::potential::RadialPotential;
use crate::specfun::{integrate_adaptive, spherical_bessel_j, AngularChannel, GridControls, NeumaierSum, RadialGrid};
use crate::tcrit::ChannelOperator;
use std::f64::consts::PI;

/// Zero mode of `K_{T_c} + V` in the s-wave channel on a radial grid.
#[derive(Debug, Clone)]
pub struct AlphaZero {
    pub grid: RadialGrid,
    /// `alpha_0(p_i)`.
    pub values: Vec<f64>,
    pub tc: f64,
    pub mu: f64,
    /// `(int |alpha_0|^2 dp)^{1/2}`.
    pub norm: f64,
    /// Birman–Schwinger eigenvalue at `tc` (ideally `-1`).
    pub eigenvalue: f64,
}

impl AlphaZero {
    /// Compute `alpha_0` at the supplied `T_c` on a grid built from `controls`.
    pub fn compute(v: &RadialPotential, mu: f64, tc: f64, controls: &GridControls) -> Result<Self> {
        if !(tc > 0.0) || !tc.is_finite() {
            return Err(Error::invalid("glcoeff", format!("T_c must be positive, got {tc}")));
        }
        let grid = controls.build(mu, v.range(), tc)?;
        let op = ChannelOperator::assemble(v, AngularChannel::S, ThermoPoint::new(tc, mu)?, &grid)?;
        let mut values = op.alpha_profile();
        let meas = grid.measure();
        let n2: f64 = 4.0 * PI * values.iter().zip(&meas).map(|(a, m)| m * a * a).sum::<f64>();
        let s = n2.sqrt();
        values.iter_mut().for_each(|a| *a /= s);
        Ok(AlphaZero {
            grid,
            values,
            tc,
            mu,
            norm: 1.0,
            eigenvalue: op.lowest_eigenvalue,
        })
    }

    /// Copy multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|a| *a *= c);
        out.norm *= c.abs();
        out
    }

    /// `alpha_0(r) = sqrt(2/pi) int q^2 alpha_0(q) j0(q r) dq` at the radii `r`.
    pub fn position_values(&self, r: &[f64]) -> Vec<f64> {
        let meas = self.grid.measure();
        let c = (2.0 / PI).sqrt();
        r.iter()
            .map(|&x| {
                c * (0..self.grid.len())
                    .map(|j| meas[j] * self.values[j] * spherical_bessel_j(0, self.grid.nodes[j] * x))
                    .collect::<NeumaierSum>()
                    .value()
            })
            .collect()
    }
}

/// `t(q)` evaluated two ways on the grid of `alpha_0`.
#[derive(Debug, Clone)]
pub struct TProfile {
    pub grid: RadialGrid,
    /// `2 K_{T_c}(q) alpha_0(q)`.
    pub via_dispersion: Vec<f64>,
    /// `-2 (2 pi)^{-3/2} int V alpha_0 e^{-iqx} dx` as a radial transform.
    pub via_potential: Vec<f64>,
    /// `max |difference| / max |t|`.
    pub max_rel_diff: f64,
}

/// Evaluator of `t(q) = -2 sqrt(2/pi) int r^2 V(r) alpha_0(r) j0(q r) dr` at arbitrary `q`.
pub struct PotentialRoute {
    r: Vec<f64>,
    weight: Vec<f64>,
}

impl PotentialRoute {
    pub fn new(v: &RadialPotential, alpha0: &AlphaZero) -> Self {
        let kmax = 2.0 * alpha0.grid.cutoff;
        let (r, w) = v.radial_rule(kmax);
        let a = alpha0.position_values(&r);
        let c = -2.0 * (2.0 / PI).sqrt();
        let weight = (0..r.len()).map(|k| c * w[k] * r[k] * r[k] * v.value(r[k]) * a[k]).collect();
        PotentialRoute { r, weight }
    }

    pub fn eval(&self, q: f64) -> f64 {
        self.r
            .iter()
            .zip(&self.weight)
            .map(|(&r, &w)| w * spherical_bessel_j(0, q * r))
            .collect::<NeumaierSum>()
            .value()
    }
}

/// Both routes to `t(q)`; they coincide because `(K_{T_c} + V) alpha_0 = 0`.
///
/// Disagreement above `1e-6` relative beyond what the eigenvalue offset
/// from `-1` explains is reported as an accuracy error.
pub fn t_profile(v: &RadialPotential, alpha0: &AlphaZero) -> Result<TProfile> {
    let g = &alpha0.grid;
    let via_dispersion: Vec<f64> = (0..g.len())
        .map(|i| 2.0 * k_t_energy(g.xi[i], alpha0.tc) * alpha0.values[i])
        .collect();
    let route = PotentialRoute::new(v, alpha0);
    let via_potential: Vec<f64> = g.nodes.iter().map(|&q| route.eval(q)).collect();
    let scale = via_dispersion.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff = via_dispersion
        .iter()
        .zip(&via_potential)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let max_rel_diff = if scale > 0.0 { diff / scale } else { 0.0 };
    let allowed = 1e-6 + (alpha0.eigenvalue + 1.0).abs();
    if max_rel_diff > allowed {
        return Err(Error::accuracy(
            "glcoeff",
            format!("t(q) routes disagree by {max_rel_diff:.3e} (allowed {allowed:.3e})"),
            max_rel_diff,
        ));
    }
    Ok(TProfile {
        grid: g.clone(),
        via_dispersion,
        via_potential,
        max_rel_diff,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GLCoefficients {
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub tc: f64,
    pub mu: f64,
    /// `t(q)` used for the integrals (dispersion route).
    pub t_profile: Vec<f64>,
    /// `(int |alpha_0|^2 dp)^{1/2}` of the zero mode behind `t`.
    pub alpha0_norm: f64,
}

impl GLCoefficients {
    /// `kappa = sqrt(lambda2 D)` for `D > 0`.
    pub fn kappa(&self, d: f64) -> Result<f64> {
        if !(d > 0.0) {
            return Err(Error::domain("glcoeff", format!("kappa needs D > 0, got {d}")));
        }
        Ok((self.lambda2 * d).sqrt())
    }
}

/// The four raw integrals `(I0, I1, I2, I3)` at one momentum, with
/// `lambda0 = I0`, `lambda_k = I_k / lambda0`.
fn integrands(q: f64, t: f64, mu: f64, tc: f64) -> [f64; 4] {
    let beta = 1.0 / tc;
    let xi = q * q - mu;
    let z = beta * xi;
    let t2 = t * t;
    let m = q * q / (2.0 * PI * PI);
    let sech = 1.0 / (0.5 * z).cosh();
    [
        m * t2 * (g1(z) + 2.0 / 3.0 * beta * q * q * g2(z)) / (16.0 * tc * tc),
        m * t2 * g1(z) / (4.0 * tc * tc),
        m * t2 * sech * sech / (8.0 * tc),
        m * t2 * t2 * beta * g1_over_z(z) / (16.0 * tc * tc),
    ]
}

fn finish(raw: [f64; 4], tc: f64, mu: f64, t: Vec<f64>, norm: f64) -> Result<GLCoefficients> {
    let lambda0 = raw[0];
    let out = GLCoefficients {
        lambda0,
        lambda1: raw[1] / lambda0,
        lambda2: raw[2] / lambda0,
        lambda3: raw[3] / lambda0,
        tc,
        mu,
        t_profile: t,
        alpha0_norm: norm,
    };
    let ok = [out.lambda0, out.lambda1, out.lambda2, out.lambda3].iter().all(|x| x.is_finite())
        && out.lambda0 > 0.0
        && out.lambda2 > 0.0
        && out.lambda3 > 0.0;
    if !ok {
        return Err(Error::accuracy(
            "glcoeff",
            format!("coefficients not finite/positive: {out:?}"),
            f64::NAN,
        ));
    }
    Ok(out)
}

/// Coefficients from `t` on the zero-mode grid.
pub fn compute_coefficients(mu: f64, tc: f64, t: &TProfile, alpha0_norm: f64) -> Result<GLCoefficients> {
    let g = &t.grid;
    let mut sums = [NeumaierSum::new(), NeumaierSum::new(), NeumaierSum::new(), NeumaierSum::new()];
    for i in 0..g.len() {
        let f = integrands(g.nodes[i], t.via_dispersion[i], mu, tc);
        for k in 0..4 {
            sums[k].add(g.weights[i] * f[k]);
        }
    }
    let raw = [sums[0].value(), sums[1].value(), sums[2].value(), sums[3].value()];
    finish(raw, tc, mu, t.via_dispersion.clone(), alpha0_norm)
}

/// Microscopic pipeline: `alpha_0` at `tc`, `t(q)` by both routes, coefficients.
pub fn coefficients_from_potential(
    v: &RadialPotential,
    mu: f64,
    tc: f64,
    controls: &GridControls,
    scale: f64,
) -> Result<GLCoefficients> {
    let alpha0 = AlphaZero::compute(v, mu, tc, controls)?.scaled(scale);
    let t = t_profile(v, &alpha0)?;
    compute_coefficients(mu, tc, &t, alpha0.norm)
}

/// Same integrals by adaptive quadrature over `[0, cutoff]`, with `t(q)`
/// from the potential route at arbitrary `q`.
pub fn compute_coefficients_adaptive(v: &RadialPotential, alpha0: &AlphaZero, rel_tol: f64) -> Result<GLCoefficients> {
    let route = PotentialRoute::new(v, alpha0);
    let (mu, tc) = (alpha0.mu, alpha0.tc);
    let mut stops = vec![0.0];
    if mu > 0.0 {
        let kf = mu.sqrt();
        for k in [-20.0, -5.0, 0.0, 5.0, 20.0] {
            let q2 = mu + k * tc;
            if q2 > 0.0 && q2.sqrt() < alpha0.grid.cutoff {
                stops.push(q2.sqrt());
            }
        }
        stops.push(2.0 * kf);
        stops.sort_by(f64::total_cmp);
        stops.dedup();
    }
    stops.retain(|&s| s < alpha0.grid.cutoff);
    stops.push(alpha0.grid.cutoff);
    let mut raw = [0.0; 4];
    for (k, slot) in raw.iter_mut().enumerate() {
        let mut total = NeumaierSum::new();
        for w in stops.windows(2) {
            let (val, _) = integrate_adaptive(|q| integrands(q, route.eval(q), mu, tc)[k], w[0], w[1], 0.0, rel_tol)?;
            total.add(val);
        }
        *slot = total.value();
    }
    finish(raw, tc, mu, Vec::new(), alpha0.norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrand_limits_are_finite_at_fermi_surface() {
        let f = integrands(1.0, 0.3, 1.0, 0.05);
        assert!(f.iter().all(|x| x.is_finite()));
        // at xi = 0: g1 = 0, g2 = 1/4, g1/z = 1/12
        let m = 1.0 / (2.0 * PI * PI);
        assert!((f[0] - m * 0.09 * (2.0 / 3.0 * 20.0 * 0.25) / (16.0 * 0.0025)).abs() < 1e-12);
        assert!((f[3] - m * 0.0081 * 20.0 / 12.0 / (16.0 * 0.0025)).abs() < 1e-10);
    }
}
