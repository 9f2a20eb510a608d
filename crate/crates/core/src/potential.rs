//! Radial two-body potentials, their Fourier transforms and the
//! angular-momentum channel kernels
//! `K_l(p, q) = (2/pi) int_0^inf r^2 V(r) j_l(pr) j_l(qr) dr`.

use crate::error::{Error, Result};
use crate::specfun::{
    integrate_adaptive, legendre_p, spherical_bessel_j, AngularChannel,
    NeumaierSum, RadialGrid,
};
use nalgebra::DMatrix;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// `(2 pi)^{-3/2}`.
const FT_NORM: f64 = 0.063_493_635_934_240_97;

/// Points per panel of the radial rules.
const R_POINTS: usize = 16;

/// Shape-preserving (PCHIP) cubic interpolant of a tabulated profile.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProfile {
    r: Vec<f64>,
    v: Vec<f64>,
    slopes: Vec<f64>,
}

impl TabulatedProfile {
    pub fn new(r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if r.len() != v.len() || r.len() < 2 {
            return Err(Error::invalid("potential", "table needs at least two (r, V) rows"));
        }
        if r.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::invalid("potential", "table contains non-finite values"));
        }
        if r[0] < 0.0 || r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("potential", "table radii must be non-negative and strictly increasing"));
        }
        let peak = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if v[v.len() - 1].abs() > 1e-8 * peak {
            return Err(Error::invalid(
                "potential",
                "tabulated potential must decay to below 1e-8 of its peak at the last node",
            ));
        }
        let slopes = pchip_slopes(&r, &v);
        Ok(TabulatedProfile { r, v, slopes })
    }

    /// Parse two whitespace-separated columns `r V(r)`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut r = Vec::new();
        let mut v = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 2 {
                return Err(Error::config(
                    "potential",
                    format!("line {}: expected two columns, found {}", lineno + 1, cols.len()),
                ));
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| {
                    Error::config("potential", format!("line {}: cannot parse '{s}'", lineno + 1))
                })
            };
            r.push(parse(cols[0])?);
            v.push(parse(cols[1])?);
        }
        Self::new(r, v)
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.r.len();
        if x <= self.r[0] {
            return self.v[0];
        }
        if x >= self.r[n - 1] {
            return 0.0;
        }
        let k = self.r.partition_point(|&ri| ri <= x) - 1;
        let h = self.r[k + 1] - self.r[k];
        let t = (x - self.r[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.v[k] + h10 * h * self.slopes[k] + h01 * self.v[k + 1] + h11 * h * self.slopes[k + 1]
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
        return d;
    }
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s.signum() != d0.signum() {
            0.0
        } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    d[0] = end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

/// Shape family of a radial potential. Each shape carries a signed strength
/// `v` with `V(r) = -v * shape(r)`, so `v > 0` is attractive.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialFamily {
    /// `-v exp(-r^2 / (2 s^2))`
    Gaussian { v: f64, s: f64 },
    /// `-v` for `r < R`, zero outside.
    SquareWell { v: f64, radius: f64 },
    /// `-v exp(-r / s)`
    Exponential { v: f64, s: f64 },
    /// Interpolated table of `V(r)` (used as given, no sign flip).
    Tabulated(TabulatedProfile),
}

/// Radial potential `lambda * V(r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPotential {
    family: PotentialFamily,
    coupling: f64,
    label: Option<String>,
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::invalid("potential", format!("{name} must be positive and finite, got {x}")))
    }
}

fn finite(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::invalid("potential", format!("{name} must be finite, got {x}")))
    }
}

impl RadialPotential {
    pub fn new(family: PotentialFamily) -> Result<Self> {
        match &family {
            PotentialFamily::Gaussian { v, s } | PotentialFamily::Exponential { v, s } => {
                finite("strength", *v)?;
                positive("width", *s)?;
            }
            PotentialFamily::SquareWell { v, radius } => {
                finite("strength", *v)?;
                positive("radius", *radius)?;
            }
            PotentialFamily::Tabulated(_) => {}
        }
        Ok(RadialPotential {
            family,
            coupling: 1.0,
            label: None,
        })
    }

    pub fn gaussian(v: f64, s: f64) -> Result<Self> {
        Self::new(PotentialFamily::Gaussian { v, s })
    }

    pub fn square_well(v: f64, radius: f64) -> Result<Self> {
        Self::new(PotentialFamily::SquareWell { v, radius })
    }

    pub fn exponential(v: f64, s: f64) -> Result<Self> {
        Self::new(PotentialFamily::Exponential { v, s })
    }

    pub fn tabulated(r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        Self::new(PotentialFamily::Tabulated(TabulatedProfile::new(r, v)?))
    }

    pub fn from_table_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::config("potential", format!("cannot read {}: {e}", path.display()))
        })?;
        let mut pot = Self::new(PotentialFamily::Tabulated(TabulatedProfile::parse(&text)?))?;
        pot.label = Some(format!("tabulated:path={}", path.display()));
        Ok(pot)
    }

    /// Copy with the coupling constant replaced.
    pub fn with_coupling(&self, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::invalid("potential", format!("coupling must be >= 0, got {lambda}")));
        }
        let mut out = self.clone();
        out.coupling = lambda;
        Ok(out)
    }

    pub fn family(&self) -> &PotentialFamily {
        &self.family
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// `V(r)` including the coupling.
    pub fn value(&self, r: f64) -> f64 {
        self.coupling * self.shape_value(r)
    }

    fn shape_value(&self, r: f64) -> f64 {
        match &self.family {
            PotentialFamily::Gaussian { v, s } => -v * (-0.5 * (r / s).powi(2)).exp(),
            PotentialFamily::SquareWell { v, radius } => {
                if r < *radius {
                    -v
                } else {
                    0.0
                }
            }
            PotentialFamily::Exponential { v, s } => -v * (-r / s).exp(),
            PotentialFamily::Tabulated(t) => t.eval(r),
        }
    }

    pub fn is_zero(&self) -> bool {
        if self.coupling == 0.0 {
            return true;
        }
        match &self.family {
            PotentialFamily::Gaussian { v, .. }
            | PotentialFamily::SquareWell { v, .. }
            | PotentialFamily::Exponential { v, .. } => *v == 0.0,
            PotentialFamily::Tabulated(t) => t.v.iter().all(|&x| x == 0.0),
        }
    }

    /// Radius beyond which `V` is treated as zero.
    pub fn support_radius(&self) -> f64 {
        match &self.family {
            PotentialFamily::Gaussian { s, .. } => 9.2 * s,
            PotentialFamily::SquareWell { radius, .. } => *radius,
            PotentialFamily::Exponential { s, .. } => 50.0 * s,
            PotentialFamily::Tabulated(t) => t.r[t.r.len() - 1],
        }
    }

    /// Natural length scale of the profile.
    pub fn range(&self) -> f64 {
        match &self.family {
            PotentialFamily::Gaussian { s, .. } | PotentialFamily::Exponential { s, .. } => *s,
            PotentialFamily::SquareWell { radius, .. } => *radius,
            PotentialFamily::Tabulated(t) => t.r[t.r.len() - 1] / 4.0,
        }
    }

    /// Radii where the profile is not smooth (quadrature panels end there).
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.family {
            PotentialFamily::SquareWell { radius, .. } => vec![*radius],
            PotentialFamily::Tabulated(t) => t.r.iter().copied().filter(|&x| x > 0.0).collect(),
            _ => vec![],
        }
    }

    /// Panel edges on `[0, support]` fine enough for integrands that oscillate
    /// with wavenumber up to `kmax` against the profile.
    pub fn radial_panels(&self, kmax: f64) -> Vec<f64> {
        let smooth_h = match &self.family {
            PotentialFamily::Gaussian { s, .. } | PotentialFamily::Exponential { s, .. } => 0.5 * s,
            PotentialFamily::SquareWell { radius, .. } => 0.5 * radius,
            PotentialFamily::Tabulated(_) => f64::INFINITY,
        };
        let h = if kmax > 0.0 { smooth_h.min(8.0 / kmax) } else { smooth_h };
        let rmax = self.support_radius();
        let mut stops = vec![0.0];
        stops.extend(self.breakpoints().into_iter().filter(|&b| b < rmax));
        stops.push(rmax);
        if let PotentialFamily::Tabulated(t) = &self.family {
            if t.r[0] > 0.0 && !stops.contains(&t.r[0]) {
                stops.insert(1, t.r[0]);
            }
        }
        let mut edges = vec![0.0];
        for w in stops.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let pieces = if h.is_finite() { ((b - a) / h).ceil().max(1.0) as usize } else { 1 };
            for k in 1..=pieces {
                edges.push(if k == pieces { b } else { a + (b - a) * k as f64 / pieces as f64 });
            }
        }
        edges
    }

    /// Composite Gauss rule `(r_k, w_k)` on [`Self::radial_panels`].
    pub fn radial_rule(&self, kmax: f64) -> (Vec<f64>, Vec<f64>) {
        crate::specfun::composite_gauss_legendre(&self.radial_panels(kmax), R_POINTS)
    }

    /// `int V(x) d^3x`.
    pub fn volume_integral(&self) -> f64 {
        self.fourier_transform(0.0) / FT_NORM
    }

    /// `V^(p) = (2 pi)^{-3/2} int V(x) e^{-ipx} dx`.
    pub fn fourier_transform(&self, p: f64) -> f64 {
        let c = self.coupling;
        match &self.family {
            PotentialFamily::Gaussian { v, s } => -c * v * s.powi(3) * (-0.5 * (s * p).powi(2)).exp(),
            PotentialFamily::SquareWell { v, radius } => {
                let x = p * radius;
                let shape = if x == 0.0 { 1.0 / 3.0 } else { spherical_bessel_j(1, x) / x };
                -c * v * FT_NORM * 4.0 * PI * radius.powi(3) * shape
            }
            PotentialFamily::Exponential { v, s } => {
                let d = 1.0 + (s * p).powi(2);
                -c * v * FT_NORM * 8.0 * PI * s.powi(3) / (d * d)
            }
            PotentialFamily::Tabulated(_) => {
                let (r, w) = self.radial_rule(p);
                let s: NeumaierSum = r
                    .iter()
                    .zip(&w)
                    .map(|(&ri, &wi)| wi * ri * ri * self.value(ri) * spherical_bessel_j(0, p * ri))
                    .collect();
                FT_NORM * 4.0 * PI * s.value()
            }
        }
    }
}

impl fmt::Display for RadialPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.family, &self.label) {
            (_, Some(label)) => write!(f, "{label}")?,
            (PotentialFamily::Gaussian { v, s }, _) => write!(f, "gaussian:v={v},s={s}")?,
            (PotentialFamily::SquareWell { v, radius }, _) => write!(f, "square_well:v={v},R={radius}")?,
            (PotentialFamily::Exponential { v, s }, _) => write!(f, "exponential:v={v},s={s}")?,
            (PotentialFamily::Tabulated(t), _) => write!(f, "tabulated:{}-nodes", t.r.len())?,
        }
        if self.coupling != 1.0 {
            write!(f, ",lambda={}", self.coupling)?;
        }
        Ok(())
    }
}

impl FromStr for RadialPotential {
    type Err = Error;

    /// Parse `family:key=value,...`, e.g. `gaussian:v=5,s=1`,
    /// `square_well:v=1,R=1`, `exponential:v=2,s=0.5`, `tabulated:path=V.txt`.
    /// Every family accepts an optional `lambda` coupling.
    fn from_str(text: &str) -> Result<Self> {
        let (name, rest) = text.split_once(':').unwrap_or((text, ""));
        let mut keys: Vec<(String, String)> = Vec::new();
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::config("potential", format!("expected key=value, got '{item}'")))?;
            keys.push((k.trim().to_string(), v.trim().to_string()));
        }
        let allowed: &[&str] = match name.trim() {
            "gaussian" | "exponential" => &["v", "s", "lambda"],
            "square_well" | "squarewell" => &["v", "R", "lambda"],
            "tabulated" => &["path", "lambda"],
            other => return Err(Error::config("potential", format!("unknown potential family '{other}'"))),
        };
        for (k, _) in &keys {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::config("potential", format!("unknown key '{k}' for {name}")));
            }
        }
        let raw = |key: &str| keys.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let num = |key: &str| -> Result<f64> {
            let s = raw(key).ok_or_else(|| Error::config("potential", format!("missing key '{key}' for {name}")))?;
            s.parse::<f64>()
                .map_err(|_| Error::config("potential", format!("cannot parse {key}='{s}'")))
        };
        let pot = match name.trim() {
            "gaussian" => Self::gaussian(num("v")?, num("s")?)?,
            "exponential" => Self::exponential(num("v")?, num("s")?)?,
            "tabulated" => {
                let path = raw("path").ok_or_else(|| Error::config("potential", "tabulated potential needs path=..."))?;
                Self::from_table_file(path)?
            }
            _ => Self::square_well(num("v")?, num("R")?)?,
        };
        match raw("lambda") {
            Some(_) => pot.with_coupling(num("lambda")?),
            None => Ok(pot),
        }
    }
}

/// Matrix of `K_l(p_i, p_j)` on a radial grid.
#[derive(Debug, Clone)]
pub struct ChannelKernel {
    pub ell: AngularChannel,
    pub grid: RadialGrid,
    pub matrix: DMatrix<f64>,
}

impl ChannelKernel {
    /// Largest `|K_ij - K_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let m = &self.matrix;
        let scale = m.amax().max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..i {
                worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        worst / scale
    }
}

fn bessel_table(ell: usize, momenta: &[f64], radii: &[f64], weights: Option<&[f64]>) -> DMatrix<f64> {
    DMatrix::from_fn(momenta.len(), radii.len(), |i, k| {
        let j = spherical_bessel_j(ell, momenta[i] * radii[k]);
        match weights {
            Some(w) => j * w[k],
            None => j,
        }
    })
}

/// `K_l(p_i, q_j)` for arbitrary row and column momenta through the
/// position-space integral.
pub fn kernel_position_rect(
    v: &RadialPotential,
    ell: AngularChannel,
    rows: &[f64],
    cols: &[f64],
) -> Result<DMatrix<f64>> {
    if v.is_zero() {
        return Ok(DMatrix::zeros(rows.len(), cols.len()));
    }
    let kmax = rows.iter().chain(cols).fold(0.0f64, |a, &x| a.max(x));
    let (r, w) = v.radial_rule(2.0 * kmax);
    let weight: Vec<f64> = r
        .iter()
        .zip(&w)
        .map(|(&ri, &wi)| 2.0 / PI * wi * ri * ri * v.value(ri))
        .collect();
    let jr = bessel_table(ell.0, rows, &r, Some(&weight));
    let jc = bessel_table(ell.0, cols, &r, None);
    let k = jr * jc.transpose();
    if k.iter().any(|x| !x.is_finite()) {
        return Err(Error::numerical("potential", "non-finite channel kernel entry"));
    }
    Ok(k)
}

/// Single kernel value `K_l(p, q)` by the position-space route.
pub fn kernel_entry_position(v: &RadialPotential, ell: AngularChannel, p: f64, q: f64) -> Result<f64> {
    Ok(kernel_position_rect(v, ell, &[p], &[q])?[(0, 0)])
}

/// Channel kernel on the grid nodes from the position-space integral.
pub fn channel_kernel_position(
    v: &RadialPotential,
    ell: AngularChannel,
    grid: &RadialGrid,
) -> Result<ChannelKernel> {
    let mut m = kernel_position_rect(v, ell, &grid.nodes, &grid.nodes)?;
    symmetrize(&mut m);
    Ok(ChannelKernel {
        ell,
        grid: grid.clone(),
        matrix: m,
    })
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let a = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = a;
            m[(j, i)] = a;
        }
    }
}

/// `K_l(p, q) = (2 pi)^{-1/2} int_{-1}^{1} V^(|p - q u|) P_l(u) du`,
/// integrated adaptively in `t = 1 - u`.
pub fn kernel_entry_momentum(v: &RadialPotential, ell: AngularChannel, p: f64, q: f64) -> Result<f64> {
    let norm = 1.0 / (2.0 * PI).sqrt();
    if p == 0.0 || q == 0.0 {
        return Ok(if ell.0 == 0 { 2.0 * norm * v.fourier_transform(p.max(q)) } else { 0.0 });
    }
    let scale = v.fourier_transform(0.0).abs().max(f64::MIN_POSITIVE);
    let dpq = (p - q) * (p - q);
    let f = |t: f64| {
        let k = (dpq + 2.0 * p * q * t).sqrt();
        v.fourier_transform(k) * legendre_p(ell.0, 1.0 - t)
    };
    // Split where the integrand is peaked: |p - q'| ~ 1/range.
    let width = (1.0 / v.range()).powi(2) / (2.0 * p * q);
    let mut stops = vec![0.0];
    let mut b = width;
    while b < 2.0 {
        stops.push(b);
        b *= 4.0;
    }
    stops.push(2.0);
    let mut total = NeumaierSum::new();
    for w in stops.windows(2) {
        let (val, _) = integrate_adaptive(f, w[0], w[1], 1e-15 * scale, 1e-13)?;
        total.add(val);
    }
    Ok(norm * total.value())
}

/// Channel kernel on the grid nodes through the momentum-space route.
pub fn channel_kernel_momentum(
    v: &RadialPotential,
    ell: AngularChannel,
    grid: &RadialGrid,
) -> Result<ChannelKernel> {
    let n = grid.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let k = kernel_entry_momentum(v, ell, grid.nodes[i], grid.nodes[j])?;
            m[(i, j)] = k;
            m[(j, i)] = k;
        }
    }
    if m.iter().any(|x: &f64| !x.is_finite()) {
        return Err(Error::numerical("potential", "non-finite channel kernel entry"));
    }
    Ok(ChannelKernel {
        ell,
        grid: grid.clone(),
        matrix: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::build_fermi_adapted_grid;
    use approx::assert_relative_eq;

    #[test]
    fn ft_norm_constant() {
        assert_relative_eq!(FT_NORM, (2.0 * PI).powf(-1.5), max_relative = 1e-15);
    }

    #[test]
    fn gaussian_transform_matches_quadrature() {
        let v = RadialPotential::gaussian(2.0, 0.7).unwrap();
        let table = RadialPotential::tabulated(
            (0..=4000).map(|i| i as f64 * 0.002).collect(),
            (0..=4000).map(|i| v.value(i as f64 * 0.002)).collect(),
        )
        .unwrap();
        for &p in &[0.0f64, 0.5, 1.0, 3.0] {
            let exact = -2.0 * 0.7f64.powi(3) * (-0.5 * (0.7 * p) * (0.7 * p)).exp();
            assert_relative_eq!(v.fourier_transform(p), exact, max_relative = 1e-14);
            assert_relative_eq!(table.fourier_transform(p), exact, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn square_well_at_zero() {
        let v = RadialPotential::square_well(1.0, 1.0).unwrap();
        assert_relative_eq!(v.fourier_transform(0.0), -FT_NORM * 4.0 * PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(v.fourier_transform(1e-9), v.fourier_transform(0.0), max_relative = 1e-15);
    }

    #[test]
    fn zero_momentum_row() {
        let v = RadialPotential::gaussian(1.0, 1.0).unwrap();
        let k = kernel_position_rect(&v, AngularChannel(2), &[0.0], &[0.3, 1.0, 2.0]).unwrap();
        assert!(k.iter().all(|&x| x == 0.0));
        let k0 = kernel_entry_position(&v, AngularChannel(0), 0.0, 0.0).unwrap();
        // (2/pi) int r^2 (-e^{-r^2/2}) dr = -(2/pi) sqrt(pi/2)
        assert_relative_eq!(k0, -(2.0 / PI) * (PI / 2.0).sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn routes_agree() {
        let grid = build_fermi_adapted_grid(1.0, 6.0, 0.05, 2, 8).unwrap();
        let pots = [
            RadialPotential::gaussian(1.5, 1.0).unwrap(),
            RadialPotential::square_well(1.0, 1.0).unwrap(),
            RadialPotential::exponential(1.0, 0.6).unwrap(),
        ];
        for v in &pots {
            for ell in 0..3 {
                let a = channel_kernel_position(v, AngularChannel(ell), &grid).unwrap();
                let b = channel_kernel_momentum(v, AngularChannel(ell), &grid).unwrap();
                let diff = (&a.matrix - &b.matrix).amax();
                assert!(diff < 1e-9, "{v} l={ell} diff={diff}");
                assert!(a.asymmetry() == 0.0);
            }
        }
    }

    #[test]
    fn parse_specs() {
        let v: RadialPotential = "gaussian:v=5,s=1".parse().unwrap();
        assert_eq!(v, RadialPotential::gaussian(5.0, 1.0).unwrap());
        let w: RadialPotential = "square_well:v=1,R=2,lambda=0.5".parse().unwrap();
        assert_eq!(w.coupling(), 0.5);
        assert!(matches!("gaussian:v=5".parse::<RadialPotential>(), Err(Error::Config { .. })));
        assert!(matches!("gaussian:v=5,s=1,q=2".parse::<RadialPotential>(), Err(Error::Config { .. })));
        assert!(matches!("yukawa:v=1".parse::<RadialPotential>(), Err(Error::Config { .. })));
        assert!(matches!("gaussian:v=5,s=-1".parse::<RadialPotential>(), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn table_validation() {
        assert!(TabulatedProfile::parse("# r V\n0 -1\n1 -0.5\n2 0\n").is_ok());
        assert!(TabulatedProfile::parse("0 -1\n1 -0.5\n").is_err());
        assert!(TabulatedProfile::parse("0 -1\n0 0\n").is_err());
        assert!(TabulatedProfile::parse("0 -1 3\n1 0\n").is_err());
    }

    #[test]
    fn pchip_is_monotone_on_monotone_data() {
        let t = TabulatedProfile::new(vec![0.0, 0.1, 0.5, 2.0, 3.0], vec![-3.0, -2.9, -1.0, -0.01, 0.0]).unwrap();
        let mut prev = t.eval(0.0);
        for i in 1..300 {
            let y = t.eval(i as f64 * 0.01);
            assert!(y >= prev - 1e-15);
            prev = y;
        }
    }
}
