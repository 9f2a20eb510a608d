//! Ginzburg–Landau functional on the periodic unit cell `[0, 1)^d`,
//!
//! `E(psi) = int |(-i grad + 2A) psi|^2 + lambda1 W |psi|^2 - lambda2 D |psi|^2 + lambda3 |psi|^4`,
//!
//! discretized by plane waves `p in 2 pi Z^d` with `|k_i| <= N`. Nonlinear
//! terms are collocated on `4N + 2` points per axis, which makes the energy
//! and its gradient exact for the truncated field.

use crate::error::{Error, Result};
use crate::glcoeff::GLCoefficients;
use crate::linalg::lanczos_lowest;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

type C = Complex64;

/// Integer mode index `k`, with momentum `p = 2 pi k`; unused axes are 0.
pub type Mode = [i64; 3];

fn check_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        Err(Error::invalid("glfield", format!("dimension must be 1, 2 or 3, got {dim}")))
    }
}

/// Enumerate the modes with `|k_i| <= n` in storage order.
fn mode_list(dim: usize, n: usize) -> Vec<Mode> {
    let n = n as i64;
    let mut out = Vec::new();
    let range = |axis: usize| if axis < dim { -n..=n } else { 0..=0 };
    for k2 in range(2) {
        for k1 in range(1) {
            for k0 in range(0) {
                out.push([k0, k1, k2]);
            }
        }
    }
    out
}

/// Truncated Fourier series of the order parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    pub dim: usize,
    /// Mode radius `N`.
    pub n: usize,
    /// `psi_hat(k)` in the order of [`PeriodicField::modes`].
    pub coeffs: Vec<C>,
}

impl PeriodicField {
    pub fn zeros(dim: usize, n: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(PeriodicField {
            dim,
            n,
            coeffs: vec![C::new(0.0, 0.0); (2 * n + 1).pow(dim as u32)],
        })
    }

    pub fn constant(dim: usize, n: usize, c: C) -> Result<Self> {
        let mut f = Self::zeros(dim, n)?;
        let zero = f.index_of([0, 0, 0]).expect("zero mode");
        f.coeffs[zero] = c;
        Ok(f)
    }

    pub fn modes(&self) -> Vec<Mode> {
        mode_list(self.dim, self.n)
    }

    pub fn index_of(&self, k: Mode) -> Option<usize> {
        let n = self.n as i64;
        let side = 2 * n + 1;
        let mut idx = 0i64;
        let mut stride = 1i64;
        for (axis, &ki) in k.iter().enumerate() {
            if axis >= self.dim {
                if ki != 0 {
                    return None;
                }
                continue;
            }
            if ki.abs() > n {
                return None;
            }
            idx += (ki + n) * stride;
            stride *= side;
        }
        Some(idx as usize)
    }

    /// `int |psi|^2` over the cell, by Parseval.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Values of `psi` on the collocation grid (`4N + 2` points per axis).
    pub fn real_space(&self) -> Vec<C> {
        Spectral::new(self.dim, self.n).to_real(&self.coeffs)
    }

    /// Multiply by a global phase `e^{i theta}`.
    pub fn with_phase(&self, theta: f64) -> Self {
        let ph = C::from_polar(1.0, theta);
        PeriodicField {
            coeffs: self.coeffs.iter().map(|c| c * ph).collect(),
            ..self.clone()
        }
    }

    fn from_reals(dim: usize, n: usize, x: &[f64]) -> Self {
        let m = x.len() / 2;
        PeriodicField {
            dim,
            n,
            coeffs: (0..m).map(|i| C::new(x[i], x[m + i])).collect(),
        }
    }
}

/// Periodic external fields `W` and `A` as sparse Fourier series.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExternalFields {
    pub dim: usize,
    pub w_modes: Vec<(Mode, C)>,
    /// `(axis, k, A_hat_axis(k))`.
    pub a_modes: Vec<(usize, Mode, C)>,
}

impl ExternalFields {
    pub fn none(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(ExternalFields {
            dim,
            ..Default::default()
        })
    }

    pub fn constant_w(dim: usize, w: f64) -> Result<Self> {
        let mut f = Self::none(dim)?;
        f.w_modes.push(([0, 0, 0], C::new(w, 0.0)));
        Ok(f)
    }

    pub fn constant_a(dim: usize, a: &[f64]) -> Result<Self> {
        let mut f = Self::none(dim)?;
        if a.len() != dim {
            return Err(Error::invalid("glfield", "vector potential needs one component per axis"));
        }
        for (axis, &x) in a.iter().enumerate() {
            f.a_modes.push((axis, [0, 0, 0], C::new(x, 0.0)));
        }
        Ok(f)
    }

    /// `W(x) = w cos(2 pi x_axis)`.
    pub fn cosine_w(dim: usize, w: f64, axis: usize) -> Result<Self> {
        let mut f = Self::none(dim)?;
        if axis >= dim {
            return Err(Error::invalid("glfield", format!("axis {axis} out of range")));
        }
        let mut k = [0i64; 3];
        k[axis] = 1;
        f.w_modes.push((k, C::new(0.5 * w, 0.0)));
        k[axis] = -1;
        f.w_modes.push((k, C::new(0.5 * w, 0.0)));
        Ok(f)
    }

    /// `W(x - x0)`, i.e. `W_hat(k) e^{-2 pi i k.x0}`.
    pub fn shifted_w(&self, x0: [f64; 3]) -> Self {
        let mut out = self.clone();
        for (k, c) in &mut out.w_modes {
            let phase = -2.0 * PI * (0..3).map(|i| k[i] as f64 * x0[i]).sum::<f64>();
            *c *= C::from_polar(1.0, phase);
        }
        out
    }

    /// Parse lines `W k1 k2 k3 re im` and `A axis k1 k2 k3 re im`; `#` starts a comment.
    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        let mut f = Self::none(dim)?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::config("glfield", format!("line {}: {msg}: {raw:?}", lineno + 1));
            let tok: Vec<&str> = line.split_whitespace().collect();
            let int = |s: &str| s.parse::<i64>().map_err(|_| bad("expected an integer"));
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad("expected a number"));
            match tok[0] {
                "W" | "w" if tok.len() == 6 => {
                    let k = [int(tok[1])?, int(tok[2])?, int(tok[3])?];
                    f.w_modes.push((k, C::new(num(tok[4])?, num(tok[5])?)));
                }
                "A" | "a" if tok.len() == 7 => {
                    let axis = int(tok[1])?;
                    if axis < 0 || axis as usize >= dim {
                        return Err(bad("axis out of range"));
                    }
                    let k = [int(tok[2])?, int(tok[3])?, int(tok[4])?];
                    f.a_modes.push((axis as usize, k, C::new(num(tok[5])?, num(tok[6])?)));
                }
                _ => return Err(bad("expected `W k1 k2 k3 re im` or `A axis k1 k2 k3 re im`")),
            }
        }
        f.validate()?;
        Ok(f)
    }

    pub fn from_file(path: impl AsRef<Path>, dim: usize) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("glfield", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, dim)
    }

    fn w_map(&self) -> HashMap<Mode, C> {
        let mut m = HashMap::new();
        for (k, c) in &self.w_modes {
            *m.entry(*k).or_insert(C::new(0.0, 0.0)) += c;
        }
        m
    }

    fn a_maps(&self) -> Vec<HashMap<Mode, C>> {
        let mut maps = vec![HashMap::new(); self.dim];
        for (axis, k, c) in &self.a_modes {
            *maps[*axis].entry(*k).or_insert(C::new(0.0, 0.0)) += c;
        }
        maps
    }

    /// Finite coefficients, modes inside the dimension, real-valued fields.
    pub fn validate(&self) -> Result<()> {
        check_dim(self.dim)?;
        let mut maps = vec![self.w_map()];
        maps.extend(self.a_maps());
        for m in &maps {
            for (k, c) in m {
                if !(c.re.is_finite() && c.im.is_finite()) {
                    return Err(Error::invalid("glfield", format!("non-finite field coefficient at {k:?}")));
                }
                if k[self.dim..].iter().any(|&x| x != 0) {
                    return Err(Error::invalid("glfield", format!("mode {k:?} outside dimension {}", self.dim)));
                }
                let neg = [-k[0], -k[1], -k[2]];
                let partner = m.get(&neg).copied().unwrap_or(C::new(0.0, 0.0));
                if (partner - c.conj()).norm() > 1e-12 * c.norm().max(1.0) {
                    return Err(Error::invalid(
                        "glfield",
                        format!("field is not real-valued: coefficient at {k:?} has no conjugate partner"),
                    ));
                }
            }
        }
        Ok(())
    }

    fn max_mode(&self) -> i64 {
        self.w_modes
            .iter()
            .map(|(k, _)| k)
            .chain(self.a_modes.iter().map(|(_, k, _)| k))
            .flat_map(|k| k.iter().map(|x| x.abs()))
            .max()
            .unwrap_or(0)
    }
}

/// `(lambda1, lambda2, lambda3)` of the functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl From<&GLCoefficients> for GlParams {
    fn from(c: &GLCoefficients) -> Self {
        GlParams {
            lambda1: c.lambda1,
            lambda2: c.lambda2,
            lambda3: c.lambda3,
        }
    }
}

struct Spectral {
    dim: usize,
    n: usize,
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Spectral {
    fn new(dim: usize, n: usize) -> Self {
        let m = 4 * n + 2;
        let mut planner = FftPlanner::new();
        Spectral {
            dim,
            n,
            m,
            fwd: planner.plan_fft_forward(m),
            inv: planner.plan_fft_inverse(m),
        }
    }

    fn points(&self) -> usize {
        self.m.pow(self.dim as u32)
    }

    fn grid_index(&self, k: &Mode) -> usize {
        let m = self.m as i64;
        let mut idx = 0i64;
        let mut stride = 1i64;
        for &ki in k.iter().take(self.dim) {
            idx += ki.rem_euclid(m) * stride;
            stride *= m;
        }
        idx as usize
    }

    fn transform(&self, data: &mut [C], inverse: bool) {
        let fft = if inverse { &self.inv } else { &self.fwd };
        let m = self.m;
        let mut buf = vec![C::new(0.0, 0.0); m];
        for axis in 0..self.dim {
            let stride = m.pow(axis as u32);
            let block = stride * m;
            for base in (0..data.len()).step_by(block) {
                for off in 0..stride {
                    let start = base + off;
                    for (i, b) in buf.iter_mut().enumerate() {
                        *b = data[start + i * stride];
                    }
                    fft.process(&mut buf);
                    for (i, b) in buf.iter().enumerate() {
                        data[start + i * stride] = *b;
                    }
                }
            }
        }
    }

    fn to_real(&self, coeffs: &[C]) -> Vec<C> {
        let mut grid = vec![C::new(0.0, 0.0); self.points()];
        for (k, c) in mode_list(self.dim, self.n).iter().zip(coeffs) {
            grid[self.grid_index(k)] = *c;
        }
        self.transform(&mut grid, true);
        grid
    }

    fn sparse_to_real(&self, map: &HashMap<Mode, C>) -> Vec<f64> {
        let mut grid = vec![C::new(0.0, 0.0); self.points()];
        for (k, c) in map {
            grid[self.grid_index(k)] += *c;
        }
        self.transform(&mut grid, true);
        grid.iter().map(|z| z.re).collect()
    }

    fn to_modes(&self, mut vals: Vec<C>) -> Vec<C> {
        self.transform(&mut vals, false);
        let s = 1.0 / self.points() as f64;
        mode_list(self.dim, self.n)
            .iter()
            .map(|k| vals[self.grid_index(k)] * s)
            .collect()
    }
}

/// Discretized functional with fields sampled on the collocation grid.
struct Problem {
    sp: Spectral,
    modes: Vec<Mode>,
    w: Vec<f64>,
    a: Vec<Vec<f64>>,
    params: GlParams,
    d: f64,
}

impl Problem {
    fn new(fields: &ExternalFields, params: GlParams, d: f64, dim: usize, n: usize) -> Result<Self> {
        fields.validate()?;
        if fields.dim != dim {
            return Err(Error::config("glfield", format!("fields are {}-dimensional, field is {dim}-dimensional", fields.dim)));
        }
        if fields.max_mode() > n as i64 {
            return Err(Error::config(
                "glfield",
                format!("aliasing guard: field modes up to {} exceed the mode radius {n}", fields.max_mode()),
            ));
        }
        if ![params.lambda1, params.lambda2, params.lambda3, d].iter().all(|x| x.is_finite()) {
            return Err(Error::invalid("glfield", "coefficients and D must be finite"));
        }
        let sp = Spectral::new(dim, n);
        let w = sp.sparse_to_real(&fields.w_map());
        let a = fields.a_maps().iter().map(|m| sp.sparse_to_real(m)).collect();
        Ok(Problem {
            modes: mode_list(dim, n),
            sp,
            w,
            a,
            params,
            d,
        })
    }

    /// Energy and `dE / d conj(psi_hat)`; the gradient with respect to the
    /// real and imaginary parts is twice the latter.
    fn energy_grad(&self, coeffs: &[C], want_grad: bool) -> (f64, Vec<C>) {
        let sp = &self.sp;
        let psi = sp.to_real(coeffs);
        let npts = psi.len();
        let mut density = vec![0.0; npts];
        let mut rest: Vec<C> = vec![C::new(0.0, 0.0); npts];
        let mut grad = vec![C::new(0.0, 0.0); coeffs.len()];
        let GlParams { lambda1, lambda2, lambda3 } = self.params;
        for i in 0..npts {
            let rho = psi[i].norm_sqr();
            density[i] = (lambda1 * self.w[i] - lambda2 * self.d) * rho + lambda3 * rho * rho;
            rest[i] = psi[i] * (lambda1 * self.w[i] - lambda2 * self.d + 2.0 * lambda3 * rho);
        }
        for axis in 0..sp.dim {
            let dcoef: Vec<C> = self
                .modes
                .iter()
                .zip(coeffs)
                .map(|(k, c)| c * (2.0 * PI * k[axis] as f64))
                .collect();
            let mut phi = sp.to_real(&dcoef);
            for i in 0..npts {
                phi[i] += psi[i] * (2.0 * self.a[axis][i]);
                density[i] += phi[i].norm_sqr();
                rest[i] += phi[i] * (2.0 * self.a[axis][i]);
            }
            if want_grad {
                let ph = sp.to_modes(phi);
                for ((g, k), p) in grad.iter_mut().zip(&self.modes).zip(ph) {
                    *g += p * (2.0 * PI * k[axis] as f64);
                }
            }
        }
        if want_grad {
            for (g, r) in grad.iter_mut().zip(sp.to_modes(rest)) {
                *g += r;
            }
        }
        let e = density.iter().sum::<f64>() / npts as f64;
        (e, grad)
    }
}

/// `E(psi)` for coefficients `params` at parameter `D`.
pub fn gl_energy(psi: &PeriodicField, fields: &ExternalFields, params: GlParams, d: f64) -> Result<f64> {
    let pb = Problem::new(fields, params, d, psi.dim, psi.n)?;
    Ok(pb.energy_grad(&psi.coeffs, false).0)
}

/// `E(psi)` and its gradient with respect to `(Re psi_hat, Im psi_hat)`,
/// returned as complex numbers `dE/dRe + i dE/dIm`.
pub fn gl_energy_gradient(
    psi: &PeriodicField,
    fields: &ExternalFields,
    params: GlParams,
    d: f64,
) -> Result<(f64, Vec<C>)> {
    let pb = Problem::new(fields, params, d, psi.dim, psi.n)?;
    let (e, g) = pb.energy_grad(&psi.coeffs, true);
    Ok((e, g.into_iter().map(|z| z * 2.0).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    pub dim: usize,
    pub n: usize,
    /// Stop when the Euclidean gradient norm is below this.
    pub grad_tol: f64,
    pub max_iter: usize,
    pub starts: usize,
    pub seed: u64,
    pub memory: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            dim: 2,
            n: 16,
            grad_tol: 1e-10,
            max_iter: 5000,
            starts: 4,
            seed: 0,
            memory: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GlMinimum {
    pub psi: PeriodicField,
    pub energy: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    /// Energy reached from every start, in order.
    pub start_energies: Vec<f64>,
}

struct LbfgsOutcome {
    x: Vec<f64>,
    f: f64,
    gnorm: f64,
    iters: usize,
    converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lbfgs<F>(mut fg: F, x0: Vec<f64>, tol: f64, max_iter: usize, memory: usize) -> LbfgsOutcome
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut x = x0;
    let (mut f, mut g) = fg(&x);
    let mut hist: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    let mut iters = 0;
    while iters < max_iter {
        let gnorm = dot(&g, &g).sqrt();
        if gnorm <= tol {
            return LbfgsOutcome { x, f, gnorm, iters, converged: true };
        }
        iters += 1;
        // Two-loop recursion.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        let gamma = match hist.last() {
            Some((s, y, _)) => dot(s, y) / dot(y, y),
            None => 1.0 / gnorm.max(1.0),
        };
        q.iter_mut().for_each(|v| *v *= gamma);
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            dir = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
            hist.clear();
        }
        // Weak Wolfe line search by bracketing; near the rounding floor of `f`
        // the sufficient-decrease test is relaxed to the approximate form
        // `phi(t) <= phi(0) + eps`, `phi'(t) <= (2 c1 - 1) phi'(0)`.
        let (c1, c2) = (1e-4, 0.9);
        let eps = 1e-12 * f.abs();
        let (mut lo, mut hi, mut t) = (0.0, f64::INFINITY, 1.0);
        let mut accepted = None;
        for _ in 0..60 {
            let xt: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
            let (ft, gt) = fg(&xt);
            let dt = dot(&gt, &dir);
            let decrease = ft <= f + c1 * t * slope || (ft <= f + eps && dt <= (2.0 * c1 - 1.0) * slope);
            if !decrease {
                hi = t;
            } else if dt < c2 * slope {
                lo = t;
                accepted = Some((xt, ft, gt));
            } else {
                accepted = Some((xt, ft, gt));
                break;
            }
            t = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * lo };
            if hi.is_finite() && hi - lo < 1e-16 * hi {
                break;
            }
        }
        let Some((xn, fnew, gn)) = accepted else {
            let gnorm = dot(&g, &g).sqrt();
            return LbfgsOutcome { x, f, gnorm, iters, converged: false };
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            hist.push((s, y, 1.0 / sy));
            if hist.len() > memory {
                hist.remove(0);
            }
        }
        x = xn;
        f = fnew;
        g = gn;
    }
    let gnorm = dot(&g, &g).sqrt();
    LbfgsOutcome { x, f, gnorm, iters, converged: gnorm <= tol }
}

/// Minimize `E` by L-BFGS from several random-plus-constant starts and keep
/// the lowest energy.
pub fn minimize_gl(fields: &ExternalFields, params: GlParams, d: f64, opts: &MinimizeOptions) -> Result<GlMinimum> {
    if !(params.lambda3 > 0.0) {
        return Err(Error::invalid("glfield", format!("lambda3 must be positive, got {}", params.lambda3)));
    }
    if opts.starts == 0 || !(opts.grad_tol > 0.0) {
        return Err(Error::invalid("glfield", "need at least one start and a positive tolerance"));
    }
    let pb = Problem::new(fields, params, d, opts.dim, opts.n)?;
    let nmodes = pb.modes.len();
    let flat = (params.lambda2 * d).max(0.0) / (2.0 * params.lambda3);
    let c0 = if flat > 0.0 { flat.sqrt() } else { 0.1 };
    let fg = |x: &[f64]| -> (f64, Vec<f64>) {
        let coeffs: Vec<C> = (0..nmodes).map(|i| C::new(x[i], x[nmodes + i])).collect();
        let (e, g) = pb.energy_grad(&coeffs, true);
        let mut out = Vec::with_capacity(2 * nmodes);
        out.extend(g.iter().map(|z| 2.0 * z.re));
        out.extend(g.iter().map(|z| 2.0 * z.im));
        (e, out)
    };
    let zero = pb.modes.iter().position(|k| *k == [0, 0, 0]).expect("zero mode");
    let mut best: Option<LbfgsOutcome> = None;
    let mut energies = Vec::with_capacity(opts.starts);
    for s in 0..opts.starts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(s as u64));
        let mut x0: Vec<f64> = (0..2 * nmodes).map(|_| 0.1 * c0 * (rng.random::<f64>() - 0.5)).collect();
        x0[zero] += c0;
        let out = lbfgs(fg, x0, opts.grad_tol, opts.max_iter, opts.memory);
        energies.push(out.f);
        if best.as_ref().is_none_or(|b| out.f < b.f) {
            best = Some(out);
        }
    }
    let best = best.expect("at least one start");
    if !best.converged {
        return Err(Error::NonConvergence {
            module: "glfield",
            iterations: best.iters,
            residual: best.gnorm,
        });
    }
    Ok(GlMinimum {
        psi: PeriodicField::from_reals(opts.dim, opts.n, &best.x),
        energy: best.f,
        grad_norm: best.gnorm,
        iterations: best.iters,
        start_energies: energies,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalOptions {
    pub dim: usize,
    pub n: usize,
    /// Allowed change of `D_c` between mode radii `N` and `N + 2`.
    pub truncation_tol: f64,
    /// Largest mode count diagonalized densely; above it Lanczos is used.
    pub dense_limit: usize,
    pub lanczos_tol: f64,
}

impl Default for CriticalOptions {
    fn default() -> Self {
        CriticalOptions {
            dim: 2,
            n: 16,
            truncation_tol: 1e-8,
            dense_limit: 300,
            lanczos_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriticalD {
    pub d_c: f64,
    /// `D_c` at mode radius `N + 2`.
    pub d_c_refined: f64,
    /// Lowest eigenfunction at mode radius `N`.
    pub mode: PeriodicField,
}

/// Plane-wave matrix of `(-i grad + 2A)^2 + lambda1 W` on modes `|k_i| <= n`.
fn hamiltonian(fields: &ExternalFields, lambda1: f64, dim: usize, n: usize) -> DMatrix<C> {
    let modes = mode_list(dim, n);
    let w = fields.w_map();
    let a = fields.a_maps();
    // (A_j^2)_hat by convolution
    let mut a2: HashMap<Mode, C> = HashMap::new();
    for m in &a {
        for (k1, c1) in m {
            for (k2, c2) in m {
                let k = [k1[0] + k2[0], k1[1] + k2[1], k1[2] + k2[2]];
                *a2.entry(k).or_insert(C::new(0.0, 0.0)) += c1 * c2;
            }
        }
    }
    let zero = C::new(0.0, 0.0);
    let nm = modes.len();
    DMatrix::from_fn(nm, nm, |r, c| {
        let (kp, k) = (&modes[r], &modes[c]);
        let dk = [kp[0] - k[0], kp[1] - k[1], kp[2] - k[2]];
        let mut h = C::new(lambda1, 0.0) * w.get(&dk).copied().unwrap_or(zero) + 4.0 * a2.get(&dk).copied().unwrap_or(zero);
        for (axis, m) in a.iter().enumerate() {
            if let Some(ah) = m.get(&dk) {
                h += ah * (2.0 * 2.0 * PI * (kp[axis] + k[axis]) as f64);
            }
        }
        if r == c {
            h += C::new((0..dim).map(|i| (2.0 * PI * k[i] as f64).powi(2)).sum::<f64>(), 0.0);
        }
        h
    })
}

fn lowest_mode(fields: &ExternalFields, lambda1: f64, dim: usize, n: usize, opts: &CriticalOptions) -> Result<(f64, PeriodicField)> {
    let nm = (2 * n + 1).pow(dim as u32);
    if nm <= opts.dense_limit {
        let h = hamiltonian(fields, lambda1, dim, n);
        let eig = SymmetricEigen::new(h);
        let (idx, val) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .ok_or_else(|| Error::numerical("glfield", "empty Hamiltonian"))?;
        let v = eig.eigenvectors.column(idx);
        let field = PeriodicField {
            dim,
            n,
            coeffs: v.iter().copied().collect(),
        };
        return Ok((*val, field));
    }
    // Matrix-free on the real form [[Re H, -Im H], [Im H, Re H]].
    let params = GlParams { lambda1, lambda2: 0.0, lambda3: 0.0 };
    let pb = Problem::new(fields, params, 0.0, dim, n)?;
    let apply = |x: &[f64], y: &mut [f64]| {
        let coeffs: Vec<C> = (0..nm).map(|i| C::new(x[i], x[nm + i])).collect();
        let (_, g) = pb.energy_grad(&coeffs, true);
        for i in 0..nm {
            y[i] = g[i].re;
            y[nm + i] = g[i].im;
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let start: Vec<f64> = (0..2 * nm).map(|_| rng.random::<f64>() - 0.5).collect();
    let (val, vec) = lanczos_lowest(2 * nm, apply, &start, opts.lanczos_tol, 2 * nm)?;
    Ok((val, PeriodicField::from_reals(dim, n, &vec)))
}

/// `D_c = (1/lambda2) infspec((-i grad + 2A)^2 + lambda1 W)`, checked against
/// the same quantity at mode radius `N + 2`.
pub fn critical_d(fields: &ExternalFields, lambda1: f64, lambda2: f64, opts: &CriticalOptions) -> Result<CriticalD> {
    if !(lambda2 > 0.0) {
        return Err(Error::invalid("glfield", format!("lambda2 must be positive, got {lambda2}")));
    }
    fields.validate()?;
    if fields.dim != opts.dim {
        return Err(Error::config("glfield", "field dimension does not match the requested dimension"));
    }
    if fields.max_mode() > opts.n as i64 {
        return Err(Error::config("glfield", "aliasing guard: field modes exceed the mode radius"));
    }
    let (e, mode) = lowest_mode(fields, lambda1, opts.dim, opts.n, opts)?;
    let (e2, _) = lowest_mode(fields, lambda1, opts.dim, opts.n + 2, opts)?;
    let (d_c, d_c_refined) = (e / lambda2, e2 / lambda2);
    if (d_c - d_c_refined).abs() > opts.truncation_tol * d_c.abs().max(1.0) {
        return Err(Error::accuracy(
            "glfield",
            format!("D_c not converged in the mode radius: {d_c} at N = {}, {d_c_refined} at N + 2", opts.n),
            (d_c - d_c_refined).abs(),
        ));
    }
    Ok(CriticalD { d_c, d_c_refined, mode })
}

/// `d^2/de^2 E(e phi)` at `e = 0`.
pub fn hessian_along(phi: &PeriodicField, fields: &ExternalFields, params: GlParams, d: f64) -> Result<f64> {
    let quad = GlParams { lambda3: 0.0, ..params };
    Ok(2.0 * gl_energy(phi, fields, quad, d)?)
}

#[derive(Debug, Clone)]
pub struct PhaseCall {
    pub d: f64,
    pub d_c: f64,
    /// `D > D_c`.
    pub linear: bool,
    /// The minimizer is nonzero.
    pub minimizer: bool,
    /// `|D - D_c| <= band`.
    pub critical_window: bool,
    pub energy: f64,
    pub density: f64,
}

impl PhaseCall {
    pub fn agree(&self) -> bool {
        self.linear == self.minimizer
    }
}

/// Compare the linear criterion `D > D_c` with the minimizer's phase call.
pub fn superconducting_phase_boundary(
    fields: &ExternalFields,
    params: GlParams,
    d: f64,
    band: f64,
    crit: &CriticalOptions,
    min: &MinimizeOptions,
) -> Result<PhaseCall> {
    let dc = critical_d(fields, params.lambda1, params.lambda2, crit)?.d_c;
    let m = minimize_gl(fields, params, d, min)?;
    let density = m.psi.norm_sq();
    let scale = (params.lambda2 * d.abs()).max(1.0) / params.lambda3;
    Ok(PhaseCall {
        d,
        d_c: dc,
        linear: d > dc,
        minimizer: density > 1e-8 * scale,
        critical_window: (d - dc).abs() <= band,
        energy: m.energy,
        density,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: GlParams = GlParams { lambda1: 1.0, lambda2: 1.0, lambda3: 1.0 };

    #[test]
    fn flat_energy() {
        let f = ExternalFields::none(2).unwrap();
        let psi = PeriodicField::constant(2, 3, C::new(0.3, 0.4)).unwrap();
        let e = gl_energy(&psi, &f, P, 1.5).unwrap();
        let r = 0.25;
        assert!((e - (-1.5 * r + r * r)).abs() < 1e-14);
    }

    #[test]
    fn parseval_on_grid() {
        let mut psi = PeriodicField::zeros(2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        psi.coeffs.iter_mut().for_each(|c| *c = C::new(rng.random::<f64>(), rng.random::<f64>()));
        let vals = psi.real_space();
        let mean: f64 = vals.iter().map(|z| z.norm_sqr()).sum::<f64>() / vals.len() as f64;
        assert!((mean - psi.norm_sq()).abs() < 1e-12 * mean);
    }

    #[test]
    fn parse_fields() {
        let f = ExternalFields::parse("# W\nW 1 0 0 0.5 0\nW -1 0 0 0.5 0\nA 1 0 0 0 0.2 0\n", 2).unwrap();
        assert_eq!(f.w_modes.len(), 2);
        assert_eq!(f.a_modes.len(), 1);
        assert!(ExternalFields::parse("W 1 0 0 0.5 0\n", 2).is_err());
        assert!(ExternalFields::parse("Q 1 0 0 0.5 0\n", 2).is_err());
    }
}
