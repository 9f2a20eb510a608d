//! Radial BCS gap equation in a single angular channel,
//! `Delta(p) = -int q^2 K_l(p, q) Delta(q) / K_T^Delta(q) dq`,
//! with the reconstruction of `(gamma, alpha)`, the free energy and the
//! zero-temperature energy gap.

use crate::dispersion::{k_t_energy, ThermoPoint};
use crate::error::{Error, Result};
use crate::linalg::dense_lowest;
use crate::potential::{kernel_position_rect, RadialPotential};
use crate::specfun::{AngularChannel, GridControls, NeumaierSum, RadialGrid};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapOptions {
    /// Fixed-point damping `eta` in `(0, 1]`.
    pub damping: f64,
    /// Maximum number of damped fixed-point sweeps.
    pub max_iter: usize,
    /// Convergence threshold on `|Delta - F(Delta)|_inf / |Delta|_inf`.
    pub tol: f64,
    /// Amplitude of the initial guess; `None` means `0.1 max(T, 0.01 mu)`.
    pub initial_amplitude: Option<f64>,
    pub grid: GridControls,
    /// `|Delta|_inf` below `floor * amplitude` declares the normal phase.
    pub triviality_floor: f64,
    /// Rescale the shape along which the iteration stalls (near `T_c`).
    pub amplitude_bisection: bool,
    /// Finish with Newton steps on the discrete system.
    pub newton: bool,
}

impl Default for GapOptions {
    fn default() -> Self {
        GapOptions {
            damping: 0.5,
            max_iter: 500,
            tol: 1e-12,
            initial_amplitude: None,
            grid: GridControls::default(),
            triviality_floor: 1e-12,
            amplitude_bisection: true,
            newton: true,
        }
    }
}

impl GapOptions {
    fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::invalid("gapsolve", format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 || !(self.triviality_floor > 0.0) {
            return Err(Error::invalid("gapsolve", "tolerance, floor and iteration count must be positive"));
        }
        if let Some(a) = self.initial_amplitude {
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::invalid("gapsolve", format!("initial amplitude must be positive, got {a}")));
            }
        }
        Ok(())
    }

    fn amplitude(&self, pt: ThermoPoint) -> f64 {
        self.initial_amplitude
            .unwrap_or_else(|| 0.1 * pt.t.max(0.01 * pt.mu.abs()).max(1e-300))
    }
}

/// Converged gap function with its derived quantities.
#[derive(Debug, Clone)]
pub struct GapSolution {
    pub grid: RadialGrid,
    pub ell: AngularChannel,
    pub pt: ThermoPoint,
    pub delta: Vec<f64>,
    pub alpha_hat: Vec<f64>,
    pub gamma_hat: Vec<f64>,
    /// `K_T^Delta(p_i)`.
    pub k_delta: Vec<f64>,
    /// `K_l(p_i, p_j)` on the grid.
    pub kernel: DMatrix<f64>,
    pub free_energy_density: f64,
    pub normal_free_energy_density: f64,
    /// `|Delta - F(Delta)|_inf`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trivial: bool,
}

impl GapSolution {
    pub fn max_delta(&self) -> f64 {
        self.delta.iter().fold(0.0f64, |a, d| a.max(d.abs()))
    }

    /// `|Delta|` interpolated at the Fermi momentum (largest node value when `mu <= 0`).
    pub fn delta_at_fermi_surface(&self) -> f64 {
        match self.grid.fermi_momentum() {
            Some(kf) => {
                let i = self.grid.nodes.partition_point(|&p| p < kf);
                let (a, b) = (i.saturating_sub(1), i.min(self.grid.len() - 1));
                let (pa, pb) = (self.grid.nodes[a], self.grid.nodes[b]);
                if pb == pa {
                    self.delta[a].abs()
                } else {
                    (self.delta[a] + (self.delta[b] - self.delta[a]) * (kf - pa) / (pb - pa)).abs()
                }
            }
            None => self.max_delta(),
        }
    }
}

/// `E^2 / sinh^2(E / 2T) = K^2 - E^2`, which is `0` at `T = 0`.
fn k2_minus_e2(e: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let x = e / (2.0 * t);
    if x < 1e-4 {
        4.0 * t * t * (1.0 - x * x / 3.0)
    } else if x > 350.0 {
        0.0
    } else {
        let s = x.sinh();
        e * e / (s * s)
    }
}

/// Nodewise `(gamma, alpha, K)` from `xi` and `Delta`.
fn reconstruct(xi: f64, delta: f64, t: f64) -> (f64, f64, f64) {
    let e = xi.hypot(delta);
    let k = k_t_energy(e, t);
    if k == 0.0 {
        return (0.5, 0.0, 0.0);
    }
    let gamma = if xi > 0.0 {
        // (K - xi) / 2K without cancellation.
        (k2_minus_e2(e, t) + delta * delta) / (2.0 * k * (k + xi))
    } else {
        (k - xi) / (2.0 * k)
    };
    (gamma, delta / (2.0 * k), k)
}

/// `gamma(1 - gamma) - alpha^2` predicted by `(K^2 - E^2) / (4 K^2)`.
pub fn constraint_gap(xi: f64, delta: f64, t: f64) -> f64 {
    let e = xi.hypot(delta);
    let k = k_t_energy(e, t);
    if k == 0.0 {
        return 0.25;
    }
    k2_minus_e2(e, t) / (4.0 * k * k)
}

/// Binary entropy of the 2x2 density with `gamma`, `alpha`, given its determinant.
fn pair_entropy(gamma: f64, det: f64) -> f64 {
    let r_plus = 0.5 + (gamma - 0.5).abs().max(0.0);
    let lp = r_plus.min(1.0);
    let lm = if lp > 0.0 { (det / lp).max(0.0) } else { 0.0 };
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    term(lp) + term(lm)
}

struct Ctx<'a> {
    grid: &'a RadialGrid,
    kernel: DMatrix<f64>,
    meas: Vec<f64>,
    t: f64,
}

impl Ctx<'_> {
    /// `h_i = tanh(E_i / 2T) / E_i = 1 / K_T^Delta(p_i)`.
    fn h(&self, delta: &[f64]) -> Vec<f64> {
        self.grid
            .xi
            .iter()
            .zip(delta)
            .map(|(&xi, &d)| 1.0 / k_t_energy(xi.hypot(d), self.t))
            .collect()
    }

    fn apply(&self, delta: &[f64]) -> Vec<f64> {
        let h = self.h(delta);
        let x = DVector::from_iterator(delta.len(), (0..delta.len()).map(|j| self.meas[j] * h[j] * delta[j]));
        let y = &self.kernel * x;
        y.iter().map(|v| -v).collect()
    }

    /// Derivative of `Delta h(E(Delta))` with respect to `Delta`.
    fn dphi(&self, delta: &[f64]) -> Vec<f64> {
        self.grid
            .xi
            .iter()
            .zip(delta)
            .map(|(&xi, &d)| {
                let e = xi.hypot(d);
                let k = k_t_energy(e, self.t);
                let h = 1.0 / k;
                // h'(E) / E
                let dh = if self.t == 0.0 {
                    -1.0 / (e * e * e)
                } else {
                    let x = e / (2.0 * self.t);
                    if x < 1e-3 {
                        (-2.0 / 3.0 + 8.0 * x * x / 15.0) / (8.0 * self.t.powi(3))
                    } else {
                        let em = (-2.0 * x).exp();
                        let sech2 = 4.0 * em / ((1.0 + em) * (1.0 + em));
                        (x * sech2 - x.tanh()) / (8.0 * self.t.powi(3) * x * x * x)
                    }
                };
                h + d * d * dh
            })
            .collect()
    }

    /// `phi^T D_a (phi + K D_a phi)` with `D_a = diag(w p^2 h(a phi))`.
    fn amplitude_defect(&self, phi: &[f64], a: f64) -> f64 {
        let scaled: Vec<f64> = phi.iter().map(|x| a * x).collect();
        let h = self.h(&scaled);
        let dphi: Vec<f64> = (0..phi.len()).map(|j| self.meas[j] * h[j] * phi[j]).collect();
        let kd = &self.kernel * DVector::from_column_slice(&dphi);
        (0..phi.len()).map(|i| dphi[i] * (phi[i] + kd[i])).collect::<NeumaierSum>().value()
    }
}

fn sup(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

enum Outcome {
    Trivial(usize),
    Solved(Vec<f64>, usize),
}

fn iterate(ctx: &Ctx<'_>, start: Vec<f64>, amp: f64, opts: &GapOptions) -> Result<Outcome> {
    let floor = opts.triviality_floor * amp;
    let mut delta = start;
    let mut iters = 0;
    let mut ready = false;
    for _ in 0..opts.max_iter {
        iters += 1;
        let f = ctx.apply(&delta);
        if f.iter().any(|x| !x.is_finite()) {
            return Err(Error::numerical("gapsolve", "non-finite value in gap iteration"));
        }
        if sup(&f) < floor {
            return Ok(Outcome::Trivial(iters));
        }
        let step = f.iter().zip(&delta).map(|(a, b)| a - b).collect::<Vec<_>>();
        let res = sup(&step);
        for (d, s) in delta.iter_mut().zip(&step) {
            *d += opts.damping * s;
        }
        let size = sup(&delta);
        if res <= opts.tol * size {
            return Ok(Outcome::Solved(delta, iters));
        }
        if opts.newton && res <= 1e-4 * size {
            ready = true;
            break;
        }
    }
    if !ready && opts.amplitude_bisection {
        let size = sup(&delta);
        let phi: Vec<f64> = delta.iter().map(|d| d / size).collect();
        if ctx.amplitude_defect(&phi, 0.0) >= 0.0 {
            return Ok(Outcome::Trivial(iters));
        }
        let mut hi = size.max(amp);
        let mut guard = 0;
        while ctx.amplitude_defect(&phi, hi) < 0.0 {
            hi *= 2.0;
            guard += 1;
            if guard > 200 {
                return Err(Error::numerical("gapsolve", "amplitude bracket not found"));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ctx.amplitude_defect(&phi, mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi {
                break;
            }
        }
        delta = phi.iter().map(|x| x * 0.5 * (lo + hi)).collect();
    }
    if !opts.newton {
        let f = ctx.apply(&delta);
        let res = sup(&f.iter().zip(&delta).map(|(a, b)| a - b).collect::<Vec<_>>());
        return Err(Error::NonConvergence {
            module: "gapsolve",
            iterations: iters,
            residual: res,
        });
    }
    // Newton on G(Delta) = Delta - F(Delta) with backtracking.
    let n = delta.len();
    let resid = |d: &[f64]| -> Vec<f64> { ctx.apply(d).iter().zip(d).map(|(f, x)| x - f).collect() };
    let mut r = resid(&delta);
    for _ in 0..60 {
        iters += 1;
        let size = sup(&delta);
        if size < floor {
            return Ok(Outcome::Trivial(iters));
        }
        if sup(&r) <= opts.tol * size {
            return Ok(Outcome::Solved(delta, iters));
        }
        let dphi = ctx.dphi(&delta);
        let mut jac = DMatrix::from_fn(n, n, |i, j| ctx.kernel[(i, j)] * ctx.meas[j] * dphi[j]);
        for i in 0..n {
            jac[(i, i)] += 1.0;
        }
        let rhs = DVector::from_iterator(n, r.iter().map(|x| -x));
        let step = jac
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::numerical("gapsolve", "singular Newton system"))?;
        let r0 = sup(&r);
        let mut s = 1.0;
        loop {
            let trial: Vec<f64> = delta.iter().zip(step.iter()).map(|(d, x)| d + s * x).collect();
            let rt = resid(&trial);
            if sup(&rt) < (1.0 - 1e-4 * s) * r0 || s < 1e-6 {
                delta = trial;
                r = rt;
                break;
            }
            s *= 0.5;
        }
    }
    Err(Error::NonConvergence {
        module: "gapsolve",
        iterations: iters,
        residual: sup(&r),
    })
}

fn build_solution(
    ell: AngularChannel,
    pt: ThermoPoint,
    grid: RadialGrid,
    kernel: DMatrix<f64>,
    delta: Vec<f64>,
    iterations: usize,
    trivial: bool,
) -> GapSolution {
    let n = grid.len();
    let mut gamma = Vec::with_capacity(n);
    let mut alpha = Vec::with_capacity(n);
    let mut kd = Vec::with_capacity(n);
    for i in 0..n {
        let (g, a, k) = reconstruct(grid.xi[i], delta[i], pt.t);
        gamma.push(g);
        alpha.push(a);
        kd.push(k);
    }
    let meas = grid.measure();
    let x = DVector::from_iterator(n, (0..n).map(|j| meas[j] * delta[j] / kd[j].max(f64::MIN_POSITIVE)));
    let f = &kernel * x;
    let residual = if trivial { 0.0 } else { (0..n).map(|i| (delta[i] + f[i]).abs()).fold(0.0, f64::max) };
    let mut sol = GapSolution {
        grid,
        ell,
        pt,
        delta,
        alpha_hat: alpha,
        gamma_hat: gamma,
        k_delta: kd,
        kernel,
        free_energy_density: 0.0,
        normal_free_energy_density: 0.0,
        residual,
        iterations,
        converged: true,
        trivial,
    };
    let (f, fnorm) = free_energy(&sol);
    sol.free_energy_density = f;
    sol.normal_free_energy_density = fnorm;
    sol
}

/// Solve the gap equation at temperature `pt.t >= 0` in channel `ell`.
pub fn solve_gap(v: &RadialPotential, ell: AngularChannel, pt: ThermoPoint, opts: &GapOptions) -> Result<GapSolution> {
    opts.validate()?;
    if !(pt.t >= 0.0) || !pt.t.is_finite() || !pt.mu.is_finite() {
        return Err(Error::invalid("gapsolve", "temperature must be finite and >= 0"));
    }
    let amp = opts.amplitude(pt);
    let scale1 = pt.t.max(amp);
    let grid = opts.grid.build(pt.mu, v.range(), scale1)?;
    let kernel = kernel_position_rect(v, ell, &grid.nodes, &grid.nodes)?;
    let kernel = symmetric(kernel);
    // Initial shape: the potential acting on the Fermi sphere.
    let anchor = if pt.mu > 0.0 { pt.mu.sqrt() } else { 0.0 };
    let shape = kernel_position_rect(v, ell, &grid.nodes, &[anchor])?;
    let norm = shape.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if v.is_zero() || norm == 0.0 {
        let n = grid.len();
        return Ok(build_solution(ell, pt, grid, kernel, vec![0.0; n], 0, true));
    }
    let start: Vec<f64> = shape.iter().map(|x| amp * x / norm).collect();
    let ctx = Ctx {
        grid: &grid,
        meas: grid.measure(),
        kernel: kernel.clone(),
        t: pt.t,
    };
    let out = iterate(&ctx, start, amp, opts)?;
    let (delta, iters) = match out {
        Outcome::Trivial(it) => {
            let n = grid.len();
            return Ok(build_solution(ell, pt, grid, kernel, vec![0.0; n], it, true));
        }
        Outcome::Solved(d, it) => (d, it),
    };
    let sol = build_solution(ell, pt, grid.clone(), kernel.clone(), delta, iters, false);
    // Refine the Fermi-surface panels to the gap size when it is below the first scale.
    let scale2 = pt.t.max(0.5 * sol.delta_at_fermi_surface());
    if scale2 >= 0.5 * scale1 {
        return Ok(sol);
    }
    let grid2 = opts.grid.build(pt.mu, v.range(), scale2)?;
    let kernel2 = symmetric(kernel_position_rect(v, ell, &grid2.nodes, &grid2.nodes)?);
    // Nystrom interpolation of the first-pass solution onto the new nodes.
    let cross = kernel_position_rect(v, ell, &grid2.nodes, &grid.nodes)?;
    let meas = grid.measure();
    let x = DVector::from_iterator(grid.len(), (0..grid.len()).map(|j| meas[j] * sol.delta[j] / sol.k_delta[j]));
    let start2: Vec<f64> = (cross * x).iter().map(|v| -v).collect();
    let ctx2 = Ctx {
        grid: &grid2,
        meas: grid2.measure(),
        kernel: kernel2.clone(),
        t: pt.t,
    };
    match iterate(&ctx2, start2, amp, opts)? {
        Outcome::Trivial(it) => {
            let n = grid2.len();
            Ok(build_solution(ell, pt, grid2, kernel2, vec![0.0; n], iters + it, true))
        }
        Outcome::Solved(d, it) => Ok(build_solution(ell, pt, grid2, kernel2, d, iters + it, false)),
    }
}

/// Zero-temperature gap equation `Delta = -int q^2 K_l Delta / E_Delta`.
pub fn solve_gap_t0(v: &RadialPotential, ell: AngularChannel, mu: f64, opts: &GapOptions) -> Result<GapSolution> {
    solve_gap(v, ell, ThermoPoint { t: 0.0, mu }, opts)
}

fn symmetric(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let a = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = a;
            m[(j, i)] = a;
        }
    }
    m
}

/// Free energy of the solution and of the normal state on the same grid:
/// `4 pi int p^2 [xi gamma - T s] dp + 4 pi int int p^2 q^2 alpha K alpha`.
///
/// The difference is accumulated node by node, so the ordering of the two
/// values is resolved even when the condensation energy is tiny.
pub fn free_energy(sol: &GapSolution) -> (f64, f64) {
    let g = &sol.grid;
    let t = sol.pt.t;
    let meas = g.measure();
    let mut normal = NeumaierSum::new();
    let mut diff = NeumaierSum::new();
    for i in 0..g.len() {
        let xi = g.xi[i];
        let (gn, _, _) = reconstruct(xi, 0.0, t);
        let sn = if t > 0.0 { pair_entropy(gn, constraint_gap(xi, 0.0, t)) } else { 0.0 };
        let fn_i = xi * gn - t * sn;
        normal.add(4.0 * PI * meas[i] * fn_i);
        if !sol.trivial {
            let gs = sol.gamma_hat[i];
            let ss = if t > 0.0 { pair_entropy(gs, constraint_gap(xi, sol.delta[i], t)) } else { 0.0 };
            diff.add(4.0 * PI * meas[i] * (xi * (gs - gn) - t * (ss - sn)));
        }
    }
    if !sol.trivial {
        let x = DVector::from_iterator(g.len(), (0..g.len()).map(|j| meas[j] * sol.alpha_hat[j]));
        let kx = &sol.kernel * &x;
        diff.add(4.0 * PI * x.dot(&kx));
    }
    let fnorm = normal.value();
    (fnorm + diff.value(), fnorm)
}

/// `|(K_T^Delta + V) alpha|_2 / |alpha|_2` on the grid (0 for the trivial solution).
///
/// The channel kernel cached in `sol` is used; `_v` is the potential it was built from.
pub fn verify_gap_residual(sol: &GapSolution, _v: &RadialPotential) -> Result<f64> {
    Ok(residual_norm(sol, &sol.alpha_hat, &sol.k_delta))
}

fn residual_norm(sol: &GapSolution, alpha: &[f64], kd: &[f64]) -> f64 {
    let n = sol.grid.len();
    let meas = sol.grid.measure();
    let norm2: f64 = (0..n).map(|i| meas[i] * alpha[i].powi(2)).sum();
    if norm2 == 0.0 {
        return 0.0;
    }
    let x = DVector::from_iterator(n, (0..n).map(|j| meas[j] * alpha[j]));
    let va = &sol.kernel * x;
    let r2: f64 = (0..n).map(|i| meas[i] * (kd[i] * alpha[i] + va[i]).powi(2)).sum();
    (r2 / norm2).sqrt()
}

/// Residual of [`verify_gap_residual`] for a trial `Delta` on the grid of `sol`.
pub fn gap_residual_for(sol: &GapSolution, delta: &[f64]) -> f64 {
    let (mut alpha, mut kd) = (Vec::with_capacity(delta.len()), Vec::with_capacity(delta.len()));
    for (xi, d) in sol.grid.xi.iter().zip(delta) {
        let (_, a, k) = reconstruct(*xi, *d, sol.pt.t);
        alpha.push(a);
        kd.push(k);
    }
    residual_norm(sol, &alpha, &kd)
}

/// Result of the second-variation check around a solution.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityCheck {
    pub lowest_eigenvalue: f64,
    /// `|<y, sqrt(w p^2) alpha>| / |y| |sqrt(w p^2) alpha|`; `None` for trivial solutions.
    pub overlap: Option<f64>,
}

/// Lowest eigenvalue of the symmetric discretization
/// `H_ij = K_T^Delta(p_i) delta_ij + sqrt(w_i p_i^2) K_l(p_i, p_j) sqrt(w_j p_j^2)`
/// of `K_T^Delta + V`, and the overlap of its eigenvector with `alpha`.
pub fn check_translation_invariance_condition(sol: &GapSolution, _v: &RadialPotential) -> Result<StabilityCheck> {
    let g = &sol.grid;
    let n = g.len();
    let sq: Vec<f64> = g.measure().iter().map(|m| m.sqrt()).collect();
    let mut h = DMatrix::from_fn(n, n, |i, j| sq[i] * sol.kernel[(i, j)] * sq[j]);
    for i in 0..n {
        h[(i, i)] += sol.k_delta[i];
    }
    let (val, vec) = dense_lowest(&h)?;
    let overlap = if sol.trivial {
        None
    } else {
        let y: Vec<f64> = (0..n).map(|i| sq[i] * sol.alpha_hat[i]).collect();
        let ny = y.iter().map(|x| x * x).sum::<f64>().sqrt();
        let dot: f64 = y.iter().zip(vec.iter()).map(|(a, b)| a * b).sum();
        Some((dot.abs() / ny).min(1.0))
    };
    Ok(StabilityCheck {
        lowest_eigenvalue: val,
        overlap,
    })
}

/// Temperature at which the gap solver's phase call flips, by bisection in
/// `ln T` on `[lo, hi]` until the relative width is below `rel_tol`.
/// `lo` must give a nontrivial solution and `hi` the trivial one.
pub fn critical_temperature_nonlinear(
    v: &RadialPotential,
    ell: AngularChannel,
    mu: f64,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    opts: &GapOptions,
) -> Result<f64> {
    if !(lo > 0.0 && hi > lo) || !(rel_tol > 0.0) {
        return Err(Error::invalid("gapsolve", "need 0 < lo < hi and rel_tol > 0"));
    }
    let nontrivial = |t: f64| -> Result<bool> { Ok(!solve_gap(v, ell, ThermoPoint::new(t, mu)?, opts)?.trivial) };
    if !nontrivial(lo)? || nontrivial(hi)? {
        return Err(Error::domain("gapsolve", format!("phase change not bracketed by [{lo}, {hi}]")));
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > rel_tol * lo {
        let mid = (lo * hi).sqrt();
        if nontrivial(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

/// `Xi = inf_p E_Delta(p)`, refined by a parabola through the three nodes
/// around the discrete minimum of `E^2`.
pub fn energy_gap(sol: &GapSolution) -> f64 {
    let g = &sol.grid;
    let e2: Vec<f64> = (0..g.len()).map(|i| g.xi[i] * g.xi[i] + sol.delta[i] * sol.delta[i]).collect();
    if sol.trivial && sol.pt.mu >= 0.0 {
        return 0.0;
    }
    let (i, &m) = e2
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    if i == 0 || i + 1 == e2.len() {
        return m.sqrt();
    }
    let (x0, x1, x2) = (g.nodes[i - 1], g.nodes[i], g.nodes[i + 1]);
    let (y0, y1, y2) = (e2[i - 1], e2[i], e2[i + 1]);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let c = (d12 - d01) / (x2 - x0);
    if !(c > 0.0) {
        return m.sqrt();
    }
    let b = d01 - c * (x0 + x1);
    let xm = (-b / (2.0 * c)).clamp(x0, x2);
    let ym = y1 + (xm - x1) * (d01 + c * (xm - x0));
    ym.clamp(0.0, m).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constraint_identity_and_entropy() {
        for &(xi, d, t) in &[(0.3, 0.1, 0.05), (-2.0, 0.01, 0.2), (50.0, 0.3, 0.01), (1e-9, 0.0, 0.1), (0.2, 0.4, 0.0)] {
            let (g, a, _) = reconstruct(xi, d, t);
            assert!((0.0..=1.0).contains(&g));
            let lhs = g * (1.0 - g) - a * a;
            let rhs = constraint_gap(xi, d, t);
            assert!((lhs - rhs).abs() < 1e-14, "{xi} {d} {t}: {lhs} {rhs}");
        }
        let s = pair_entropy(0.5, 0.25);
        assert!((s - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn free_case_is_fermi_dirac() {
        let v = RadialPotential::gaussian(5.0, 1.0).unwrap().with_coupling(0.0).unwrap();
        let pt = ThermoPoint { t: 0.1, mu: 1.0 };
        let sol = solve_gap(&v, AngularChannel(0), pt, &GapOptions::default()).unwrap();
        assert!(sol.trivial);
        for (xi, g) in sol.grid.xi.iter().zip(&sol.gamma_hat) {
            let fd = 1.0 / (1.0 + (xi / pt.t).exp());
            assert!((g - fd).abs() < 1e-14);
        }
        assert_eq!(sol.free_energy_density, sol.normal_free_energy_density);
        assert_eq!(verify_gap_residual(&sol, &v).unwrap(), 0.0);
    }
}
