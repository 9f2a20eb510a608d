//! Scattering length of `2V` from the Birman–Schwinger resolvent
//! `a = (1/4pi) <|V|^{1/2}, (1 + V^{1/2} p^{-2} |V|^{1/2})^{-1} V^{1/2}>`,
//! and a zero-energy radial ODE (`u'' = V u`) used as an oracle.

use crate::error::{Error, Result};
use crate::linalg::dense_lowest_value;
use crate::potential::RadialPotential;
use crate::specfun::{gauss_legendre, legendre_p};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use std::fmt;

const PANEL_POINTS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScatteringMethod {
    Resolvent,
    OdeOracle,
}

impl fmt::Display for ScatteringMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScatteringMethod::Resolvent => "resolvent",
            ScatteringMethod::OdeOracle => "ode_oracle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringReport {
    pub a: f64,
    /// Lowest eigenvalue of the s-wave operator `V^{1/2} p^{-2} |V|^{1/2}`.
    pub bs_spectrum_floor: f64,
    pub method: ScatteringMethod,
    /// `bs_spectrum_floor > -1`.
    pub bound_state_free: bool,
}

/// Radial nodes with weights and the cumulative weights `L_ij` such that
/// `sum_j L_ij f(r_j) = int_0^{r_i} f`, exact for piecewise polynomials.
struct RadialNystrom {
    r: Vec<f64>,
    w: Vec<f64>,
    cumulative: DMatrix<f64>,
}

/// `Q_ij = int_{-1}^{x_i} l_j(x) dx` for the Lagrange basis on Gauss nodes.
fn reference_cumulative(n: usize) -> (Vec<f64>, Vec<f64>, DMatrix<f64>) {
    let (x, w) = gauss_legendre(n);
    let prim = |k: usize, t: f64| -> f64 {
        if k == 0 {
            t + 1.0
        } else {
            (legendre_p(k + 1, t) - legendre_p(k - 1, t)) / (2 * k + 1) as f64
        }
    };
    let q = DMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| (2 * k + 1) as f64 / 2.0 * w[j] * legendre_p(k, x[j]) * prim(k, x[i]))
            .sum()
    });
    (x, w, q)
}

fn peak_magnitude(v: &RadialPotential) -> f64 {
    let (r, _) = v.radial_rule(0.0);
    r.iter().fold(0.0f64, |a, &x| a.max(v.value(x).abs()))
}

/// Panels on `[0, R]`, with `R` where `|V|` has dropped below `1e-17` of its peak.
fn scattering_panels(v: &RadialPotential) -> Vec<f64> {
    let peak = peak_magnitude(v);
    let kmax = 2.0 * peak.sqrt();
    let mut edges = v.radial_panels(kmax);
    let cut = edges
        .iter()
        .position(|&e| e > 0.0 && tail_negligible(v, e, peak));
    if let Some(k) = cut {
        edges.truncate(k + 1);
    }
    // Widen panels geometrically in the smooth tail.
    let knee = 6.0 * v.range();
    let last = *edges.last().expect("non-empty panels");
    let mut out: Vec<f64> = Vec::with_capacity(edges.len());
    for &e in &edges {
        let prev = out.last().copied().unwrap_or(0.0);
        if e <= knee || e == last || e - prev >= 0.3 * prev {
            out.push(e);
        }
    }
    out
}

fn tail_negligible(v: &RadialPotential, r: f64, peak: f64) -> bool {
    let end = v.support_radius();
    (0..=16).all(|k| {
        let x = r + (end - r) * k as f64 / 16.0;
        v.value(x).abs() <= 1e-17 * peak
    })
}

impl RadialNystrom {
    fn new(edges: &[f64]) -> Self {
        let (x, w, q) = reference_cumulative(PANEL_POINTS);
        let panels = edges.len() - 1;
        let n = panels * PANEL_POINTS;
        let mut r = Vec::with_capacity(n);
        let mut wt = Vec::with_capacity(n);
        for p in 0..panels {
            let (a, b) = (edges[p], edges[p + 1]);
            let h = 0.5 * (b - a);
            for k in 0..PANEL_POINTS {
                r.push(a + h * (x[k] + 1.0));
                wt.push(h * w[k]);
            }
        }
        let mut cumulative = DMatrix::zeros(n, n);
        for p in 0..panels {
            let h = 0.5 * (edges[p + 1] - edges[p]);
            for i in 0..PANEL_POINTS {
                let gi = p * PANEL_POINTS + i;
                for j in 0..p * PANEL_POINTS {
                    cumulative[(gi, j)] = wt[j];
                }
                for j in 0..PANEL_POINTS {
                    cumulative[(gi, p * PANEL_POINTS + j)] = h * q[(i, j)];
                }
            }
        }
        RadialNystrom { r, w: wt, cumulative }
    }

    /// `G_ij` with `sum_j G_ij h_j = int_0^inf h(r') / max(r_i, r') dr'`.
    fn green(&self) -> DMatrix<f64> {
        let n = self.r.len();
        DMatrix::from_fn(n, n, |i, j| {
            let l = self.cumulative[(i, j)];
            l / self.r[i] + (self.w[j] - l) / self.r[j]
        })
    }
}

/// Lowest eigenvalue of `V^{1/2} p^{-2} |V|^{1/2}` in the s-wave sector.
///
/// The operator is similar to `S^{1/2} sgn(V) S^{1/2}` with the symmetric
/// `S = |V|^{1/2} p^{-2} |V|^{1/2}`, which is what gets diagonalized.
pub fn bs_spectrum_floor(v: &RadialPotential) -> Result<f64> {
    if v.is_zero() {
        return Ok(0.0);
    }
    let grid = RadialNystrom::new(&scattering_panels(v));
    let n = grid.r.len();
    let u: Vec<f64> = (0..n).map(|i| grid.w[i].sqrt() * grid.r[i] * v.value(grid.r[i]).abs().sqrt()).collect();
    let s = DMatrix::from_fn(n, n, |i, j| u[i] * u[j] / grid.r[i].max(grid.r[j]));
    let eig = SymmetricEigen::new(s);
    let root = DVector::from_iterator(n, eig.eigenvalues.iter().map(|x| x.max(0.0).sqrt()));
    let half = &eig.eigenvectors * DMatrix::from_diagonal(&root) * eig.eigenvectors.transpose();
    let sign = DMatrix::from_diagonal(&DVector::from_iterator(
        n,
        grid.r.iter().map(|&r| if v.value(r) < 0.0 { -1.0 } else { 1.0 }),
    ));
    dense_lowest_value(&(&half * sign * &half))
}

/// Scattering length by the resolvent formula.
pub fn scattering_length(v: &RadialPotential) -> Result<ScatteringReport> {
    if v.is_zero() {
        return Ok(ScatteringReport {
            a: 0.0,
            bs_spectrum_floor: 0.0,
            method: ScatteringMethod::Resolvent,
            bound_state_free: true,
        });
    }
    let floor = bs_spectrum_floor(v)?;
    if floor <= -1.0 {
        return Err(Error::domain(
            "scatter",
            format!("Birman-Schwinger floor {floor} <= -1: bound state or resonance, the scattering length is infinite"),
        ));
    }
    let grid = RadialNystrom::new(&scattering_panels(v));
    let n = grid.r.len();
    let vals: Vec<f64> = grid.r.iter().map(|&r| v.value(r)).collect();
    let root: Vec<f64> = vals.iter().map(|x| x.abs().sqrt()).collect();
    let sroot: Vec<f64> = vals.iter().zip(&root).map(|(x, s)| x.signum() * s).collect();
    // phi + V^{1/2} G (r^2 |V|^{1/2} phi) = V^{1/2}
    let g = grid.green();
    let mut m = DMatrix::from_fn(n, n, |i, j| sroot[i] * g[(i, j)] * grid.r[j] * grid.r[j] * root[j]);
    for i in 0..n {
        m[(i, i)] += 1.0;
    }
    let rhs = DVector::from_column_slice(&sroot);
    let phi = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::numerical("scatter", "singular resolvent system"))?;
    // (1/4pi) <f, g>_{R^3} = int r^2 f g dr
    let a: f64 = (0..n).map(|i| grid.w[i] * grid.r[i] * grid.r[i] * root[i] * phi[i]).sum();
    if !a.is_finite() {
        return Err(Error::numerical("scatter", "non-finite scattering length"));
    }
    Ok(ScatteringReport {
        a,
        bs_spectrum_floor: floor,
        method: ScatteringMethod::Resolvent,
        bound_state_free: true,
    })
}

/// Scattering length from the zero-energy solution of `u'' = V u`,
/// `u(0) = 0`, `u'(0) = 1`, as `R - u(R)/u'(R)` past the support.
pub fn scattering_length_ode(v: &RadialPotential) -> Result<ScatteringReport> {
    let floor = bs_spectrum_floor(v)?;
    let mut stops = vec![0.0];
    let end = *scattering_panels(v).last().expect("non-empty panels");
    stops.extend(v.breakpoints().into_iter().filter(|&b| b > 0.0 && b < end));
    stops.push(end);
    let peak = peak_magnitude(v);
    let h_max = (2e-3 * v.range()).min(if peak > 0.0 { 0.02 / peak.sqrt() } else { f64::INFINITY });
    let (mut u, mut du) = (0.0f64, 1.0f64);
    for w in stops.windows(2) {
        let (a, b) = (w[0], w[1]);
        let steps = ((b - a) / h_max).ceil().max(1.0) as usize;
        let h = (b - a) / steps as f64;
        // Sample strictly inside the panel so discontinuities at its ends are not seen.
        let pot = |r: f64| v.value(r.clamp(a + 1e-15 * b, b - 1e-15 * b));
        for k in 0..steps {
            let r = a + h * k as f64;
            let (k1u, k1d) = (du, pot(r) * u);
            let (k2u, k2d) = (du + 0.5 * h * k1d, pot(r + 0.5 * h) * (u + 0.5 * h * k1u));
            let (k3u, k3d) = (du + 0.5 * h * k2d, pot(r + 0.5 * h) * (u + 0.5 * h * k2u));
            let (k4u, k4d) = (du + h * k3d, pot(r + h) * (u + h * k3u));
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            du += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        }
    }
    if du == 0.0 || !(u / du).is_finite() {
        return Err(Error::domain("scatter", "zero-energy resonance: the scattering length is infinite"));
    }
    Ok(ScatteringReport {
        a: end - u / du,
        bs_spectrum_floor: floor,
        method: ScatteringMethod::OdeOracle,
        bound_state_free: floor > -1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulative_rule_is_exact_for_polynomials() {
        let (x, _, q) = reference_cumulative(8);
        for i in 0..8 {
            let f: f64 = (0..8).map(|j| q[(i, j)] * x[j].powi(5)).sum();
            let exact = (x[i].powi(6) - 1.0) / 6.0;
            assert!((f - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn square_well_closed_form() {
        let v = RadialPotential::square_well(1.0, 1.0).unwrap();
        let exact = 1.0 - 1f64.tan();
        let a = scattering_length(&v).unwrap().a;
        let b = scattering_length_ode(&v).unwrap().a;
        assert!((a - exact).abs() < 1e-10, "{a} {exact}");
        assert!((b - exact).abs() < 1e-9, "{b} {exact}");
    }

    #[test]
    fn zero_potential() {
        let v = RadialPotential::gaussian(1.0, 1.0).unwrap().with_coupling(0.0).unwrap();
        assert_eq!(scattering_length(&v).unwrap().a, 0.0);
    }
}
