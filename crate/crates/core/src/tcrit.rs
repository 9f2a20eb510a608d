//! Critical temperature from the Birman–Schwinger criterion, the Fermi-sphere
//! channel values `e_l`, the second-order coefficients `w_l`, `b_mu(lambda)`,
//! and the closed-form asymptotic `T_c` formulas.

use crate::dispersion::{k_t_energy, ThermoPoint};
use crate::error::{Error, Result};
use crate::gapsolve::{energy_gap, solve_gap_t0, GapOptions};
use crate::linalg::{dense_lowest, lanczos_lowest};
use crate::potential::{kernel_entry_position, kernel_position_rect, RadialPotential};
use crate::specfun::{composite_gauss_legendre, AngularChannel, GridControls, GridSpec, NeumaierSum, RadialGrid};
use crate::EULER_GAMMA;
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

/// `(8/pi) e^{gamma - 2}`.
pub fn tc_prefactor() -> f64 {
    8.0 / PI * (EULER_GAMMA - 2.0).exp()
}

/// `pi / e^gamma`, the weak-coupling limit of `Xi / T_c`.
pub fn universal_ratio_limit() -> f64 {
    PI / EULER_GAMMA.exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcOptions {
    pub ell_max: usize,
    /// Relative width of the final temperature bracket.
    pub rel_tol: f64,
    /// Lowest temperature probed; `None` means `1e-12 * max(mu, 1)`.
    pub t_floor: Option<f64>,
    /// Highest temperature probed; `None` means `100 * max(|mu|, 1)`.
    pub t_ceiling: Option<f64>,
    pub grid: GridControls,
    pub degeneracy_tol: f64,
}

impl Default for TcOptions {
    fn default() -> Self {
        TcOptions {
            ell_max: 8,
            rel_tol: 1e-6,
            t_floor: None,
            t_ceiling: None,
            grid: GridControls::default(),
            degeneracy_tol: 1e-8,
        }
    }
}

impl TcOptions {
    pub fn floor(&self, mu: f64) -> f64 {
        self.t_floor.unwrap_or(1e-12 * mu.max(1.0))
    }

    pub fn ceiling(&self, mu: f64) -> f64 {
        self.t_ceiling.unwrap_or(100.0 * mu.abs().max(1.0))
    }
}

fn check_temperature(pt: ThermoPoint) -> Result<()> {
    if !(pt.t > 0.0) || !pt.t.is_finite() || !pt.mu.is_finite() {
        return Err(Error::invalid("tcrit", format!("need finite T > 0, got T = {}", pt.t)));
    }
    Ok(())
}

/// Measure weights `w_i p_i^2` and `d_i = sqrt(w_i p_i^2 / K_T(p_i))`.
fn bs_weights(grid: &RadialGrid, t: f64) -> (Vec<f64>, Vec<f64>) {
    let meas = grid.measure();
    let d = meas
        .iter()
        .zip(&grid.xi)
        .map(|(m, &xi)| (m / k_t_energy(xi, t)).sqrt())
        .collect();
    (meas, d)
}

/// Lowest eigenvalue of the channel Birman–Schwinger matrix
/// `A_ij = d_i K_l(p_i, p_j) d_j`, computed matrix-free by Lanczos on the
/// factored kernel `K = (2/pi) J diag(w r^2 V) J^T`.
pub fn bs_lowest_eigenvalue(
    v: &RadialPotential,
    ell: AngularChannel,
    pt: ThermoPoint,
    grid: &RadialGrid,
) -> Result<f64> {
    check_temperature(pt)?;
    if v.is_zero() {
        return Ok(0.0);
    }
    let n = grid.len();
    let (_, d) = bs_weights(grid, pt.t);
    let kmax = grid.nodes[n - 1];
    let (r, w) = v.radial_rule(2.0 * kmax);
    let c: Vec<f64> = r
        .iter()
        .zip(&w)
        .map(|(&ri, &wi)| 2.0 / PI * wi * ri * ri * v.value(ri))
        .collect();
    let j = DMatrix::from_fn(n, r.len(), |i, k| {
        d[i] * crate::specfun::spherical_bessel_j(ell.0, grid.nodes[i] * r[k])
    });
    let apply = |x: &[f64], y: &mut [f64]| {
        let xv = DVector::from_column_slice(x);
        let mut t = j.tr_mul(&xv);
        t.iter_mut().zip(&c).for_each(|(ti, ci)| *ti *= ci);
        let z = &j * t;
        y.copy_from_slice(z.as_slice());
    };
    let (theta, _) = lanczos_lowest(n, apply, &d, 1e-11, 400)?;
    Ok(theta)
}

/// Dense Birman–Schwinger matrix of one channel with its lowest eigenpair.
#[derive(Debug, Clone)]
pub struct ChannelOperator {
    pub ell: AngularChannel,
    pub pt: ThermoPoint,
    pub grid: RadialGrid,
    pub matrix: DMatrix<f64>,
    pub lowest_eigenvalue: f64,
    pub lowest_eigenvector: DVector<f64>,
}

impl ChannelOperator {
    pub fn assemble(v: &RadialPotential, ell: AngularChannel, pt: ThermoPoint, grid: &RadialGrid) -> Result<Self> {
        check_temperature(pt)?;
        let kernel = kernel_position_rect(v, ell, &grid.nodes, &grid.nodes)?;
        let (_, d) = bs_weights(grid, pt.t);
        let n = grid.len();
        let mut a = DMatrix::from_fn(n, n, |i, j| d[i] * kernel[(i, j)] * d[j]);
        for i in 0..n {
            for j in 0..i {
                let s = 0.5 * (a[(i, j)] + a[(j, i)]);
                a[(i, j)] = s;
                a[(j, i)] = s;
            }
        }
        let (val, mut vec) = dense_lowest(&a)?;
        // Fix the sign so that the component of largest magnitude is positive.
        if vec.iter().fold(0.0f64, |m, &x| if x.abs() > m.abs() { x } else { m }) < 0.0 {
            vec.neg_mut();
        }
        Ok(ChannelOperator {
            ell,
            pt,
            grid: grid.clone(),
            matrix: a,
            lowest_eigenvalue: val,
            lowest_eigenvector: vec,
        })
    }

    /// Momentum profile `alpha(p_i) = y_i / sqrt(w_i p_i^2 K_T(p_i))` of the
    /// lowest eigenvector `y`; it solves `(K_T + V) alpha = 0` when the
    /// eigenvalue is `-1`.
    pub fn alpha_profile(&self) -> Vec<f64> {
        let meas = self.grid.measure();
        (0..self.grid.len())
            .map(|i| {
                let k = k_t_energy(self.grid.xi[i], self.pt.t);
                self.lowest_eigenvector[i] / (meas[i] * k).sqrt()
            })
            .collect()
    }
}

/// Outcome of the temperature search in one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTc {
    pub ell: AngularChannel,
    /// `0` when no pairing instability exists above the temperature floor.
    pub tc: f64,
    pub bracket: (f64, f64),
    /// Sampled `(T, lowest eigenvalue)` pairs.
    pub trace: Vec<(f64, f64)>,
    /// Lowest eigenvalue at the winning `T_c` of the whole search (when probed).
    pub eigenvalue_at_tc: Option<f64>,
    /// `true` if this channel was discarded by a single probe at a higher `T_c`.
    pub pruned: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TcReport {
    pub tc: f64,
    pub channel: AngularChannel,
    pub bracket: (f64, f64),
    pub eigen_trace: Vec<(f64, f64)>,
    pub degenerate: bool,
    pub channels: Vec<ChannelTc>,
}

struct Probe<'a> {
    v: &'a RadialPotential,
    ell: AngularChannel,
    mu: f64,
    opts: &'a TcOptions,
    trace: Vec<(f64, f64)>,
}

impl Probe<'_> {
    fn eig(&mut self, t: f64) -> Result<f64> {
        let grid = self.opts.grid.build(self.mu, self.v.range(), t)?;
        let pt = ThermoPoint { t, mu: self.mu };
        let e = bs_lowest_eigenvalue(self.v, self.ell, pt, &grid)?;
        self.trace.push((t, e));
        Ok(e)
    }
}

/// Root of the increasing function `f(ln T) = eig(T) + 1` inside the
/// bracket `[lo, hi]` (`f(lo) < 0 <= f(hi)`), by regula falsi with the
/// Illinois modification plus bisection safeguards.
fn refine_bracket(
    probe: &mut Probe<'_>,
    lo: (f64, f64),
    hi: (f64, f64),
    rel_tol: f64,
) -> Result<(f64, (f64, f64))> {
    let tol = (1.0 + rel_tol).ln();
    let (mut a, mut fa) = (lo.0.ln(), lo.1);
    let (mut b, mut fb) = (hi.0.ln(), hi.1);
    let mut side = 0i32;
    let mut stalls = 0;
    for _ in 0..200 {
        let width = b - a;
        if width <= tol {
            break;
        }
        let mut x = if stalls >= 2 {
            stalls = 0;
            0.5 * (a + b)
        } else {
            a - fa * (b - a) / (fb - fa)
        };
        let guard = 0.45 * tol;
        x = x.clamp(a + guard, b - guard);
        let fx = probe.eig(x.exp())? + 1.0;
        if fx < 0.0 {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if b - a > 0.5 * width {
            stalls += 1;
        } else {
            stalls = 0;
        }
    }
    if b - a > tol {
        return Err(Error::NonConvergence {
            module: "tcrit",
            iterations: 200,
            residual: b - a,
        });
    }
    // Undo Illinois down-weighting for the final interpolation.
    let ea = probe.trace.iter().find(|s| s.0 == a.exp()).map(|s| s.1 + 1.0).unwrap_or(fa);
    let eb = probe.trace.iter().find(|s| s.0 == b.exp()).map(|s| s.1 + 1.0).unwrap_or(fb);
    let x = if eb > ea { a - ea * (b - a) / (eb - ea) } else { 0.5 * (a + b) };
    Ok((x.exp(), (a.exp(), b.exp())))
}

/// Search `T_c` in a single channel, optionally seeded by a guess.
pub fn channel_critical_temperature(
    v: &RadialPotential,
    ell: AngularChannel,
    mu: f64,
    opts: &TcOptions,
    seed: Option<f64>,
) -> Result<ChannelTc> {
    let floor = opts.floor(mu);
    let ceiling = opts.ceiling(mu);
    if !(floor > 0.0 && ceiling > floor) {
        return Err(Error::invalid("tcrit", "temperature window must satisfy 0 < floor < ceiling"));
    }
    let mut probe = Probe {
        v,
        ell,
        mu,
        opts,
        trace: Vec::new(),
    };
    let none = |trace| ChannelTc {
        ell,
        tc: 0.0,
        bracket: (0.0, floor),
        trace,
        eigenvalue_at_tc: None,
        pruned: false,
    };
    if v.is_zero() {
        return Ok(none(vec![]));
    }
    let t0 = seed
        .filter(|s| s.is_finite() && *s > 0.0)
        .unwrap_or_else(|| (floor * ceiling).sqrt())
        .clamp(floor, ceiling);
    let f0 = probe.eig(t0)? + 1.0;
    let (lo, hi);
    if f0 < 0.0 {
        let mut a = (t0, f0);
        loop {
            if a.0 >= ceiling {
                return Err(Error::domain(
                    "tcrit",
                    format!("no bracket below the temperature ceiling {ceiling}: T_c >= ceiling (channel {ell})"),
                ));
            }
            let t = (a.0 * 10.0).min(ceiling);
            let f = probe.eig(t)? + 1.0;
            if f >= 0.0 {
                lo = a;
                hi = (t, f);
                break;
            }
            a = (t, f);
        }
    } else {
        let mut b = (t0, f0);
        loop {
            if b.0 <= floor {
                return Ok(none(probe.trace));
            }
            let t = (b.0 / 10.0).max(floor);
            let f = probe.eig(t)? + 1.0;
            if f < 0.0 {
                lo = (t, f);
                hi = b;
                break;
            }
            b = (t, f);
        }
    }
    let (tc, bracket) = refine_bracket(&mut probe, lo, hi, opts.rel_tol)?;
    Ok(ChannelTc {
        ell,
        tc,
        bracket,
        trace: probe.trace,
        eigenvalue_at_tc: None,
        pruned: false,
    })
}

/// Leading-order estimate `mu C exp(1 / (sqrt(mu) e_l))`, used as a seed.
fn leading_order_seed(e: f64, mu: f64) -> Option<f64> {
    (mu > 0.0 && e < 0.0).then(|| mu * tc_prefactor() * (1.0 / (mu.sqrt() * e)).exp())
}

/// `T_c` as the largest temperature at which the lowest Birman–Schwinger
/// eigenvalue of some channel `l <= ell_max` reaches `-1`.
pub fn critical_temperature(v: &RadialPotential, mu: f64, opts: &TcOptions) -> Result<TcReport> {
    if !mu.is_finite() {
        return Err(Error::invalid("tcrit", "mu must be finite"));
    }
    let mut order: Vec<(usize, Option<f64>)> = (0..=opts.ell_max)
        .map(|l| {
            let e = if mu > 0.0 {
                kernel_entry_position(v, AngularChannel(l), mu.sqrt(), mu.sqrt()).ok()
            } else {
                None
            };
            (l, e)
        })
        .collect();
    // Most attractive Fermi-sphere channel first.
    order.sort_by(|a, b| a.1.unwrap_or(0.0).total_cmp(&b.1.unwrap_or(0.0)).then(a.0.cmp(&b.0)));

    let mut channels: Vec<ChannelTc> = Vec::new();
    let mut best: Option<usize> = None;
    for (l, e) in order {
        let ell = AngularChannel(l);
        if let Some(bi) = best {
            let tbest = channels[bi].tc;
            let mut probe = Probe {
                v,
                ell,
                mu,
                opts,
                trace: Vec::new(),
            };
            let eig = probe.eig(tbest)?;
            if eig > -1.0 {
                channels.push(ChannelTc {
                    ell,
                    tc: 0.0,
                    bracket: (0.0, tbest),
                    trace: probe.trace,
                    eigenvalue_at_tc: Some(eig),
                    pruned: true,
                });
                continue;
            }
        }
        let seed = match best {
            Some(bi) => Some(channels[bi].tc),
            None => e.and_then(|e| leading_order_seed(e, mu)),
        };
        let res = channel_critical_temperature(v, ell, mu, opts, seed)?;
        let better = match best {
            Some(bi) => res.tc > channels[bi].tc,
            None => res.tc > 0.0,
        };
        channels.push(res);
        if better {
            best = Some(channels.len() - 1);
        }
    }
    channels.sort_by_key(|c| c.ell);
    let Some(win) = channels.iter().filter(|c| c.tc > 0.0).max_by(|a, b| a.tc.total_cmp(&b.tc)).cloned() else {
        return Ok(TcReport {
            tc: 0.0,
            channel: AngularChannel(0),
            bracket: (0.0, opts.floor(mu)),
            eigen_trace: channels.first().map(|c| c.trace.clone()).unwrap_or_default(),
            degenerate: false,
            channels,
        });
    };
    // Degeneracy: compare lowest eigenvalues of all channels at the winning T_c.
    let grid = opts.grid.build(mu, v.range(), win.tc)?;
    let pt = ThermoPoint { t: win.tc, mu };
    let e_win = bs_lowest_eigenvalue(v, win.ell, pt, &grid)?;
    let mut degenerate = false;
    for c in channels.iter_mut() {
        if c.ell == win.ell {
            c.eigenvalue_at_tc = Some(e_win);
            continue;
        }
        let e = match c.eigenvalue_at_tc {
            Some(e) if c.pruned && c.bracket.1 == win.tc => e,
            _ => bs_lowest_eigenvalue(v, c.ell, pt, &grid)?,
        };
        c.eigenvalue_at_tc = Some(e);
        if (e - e_win).abs() <= opts.degeneracy_tol * e_win.abs() {
            degenerate = true;
        }
    }
    Ok(TcReport {
        tc: win.tc,
        channel: win.ell,
        bracket: win.bracket,
        eigen_trace: win.trace.clone(),
        degenerate,
        channels,
    })
}

/// `e_l = K_l(sqrt(mu), sqrt(mu))`, the eigenvalue of the Fermi-sphere
/// operator in channel `l`.
pub fn e_channel(v: &RadialPotential, ell: AngularChannel, mu: f64) -> Result<f64> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::domain("tcrit", format!("e_l needs mu > 0, got {mu}")));
    }
    kernel_entry_position(v, ell, mu.sqrt(), mu.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct WOptions {
    /// Temperatures of the extrapolation ladder, in units of `mu`.
    pub t_ladder: Vec<f64>,
    pub grid: GridControls,
    /// Allowed relative drift of the bracket across the ladder.
    pub tolerance: f64,
}

impl Default for WOptions {
    fn default() -> Self {
        WOptions {
            t_ladder: vec![1e-6, 1e-7, 1e-8],
            grid: GridControls {
                points_per_panel: 16,
                panels_per_decade: 3,
                ..GridControls::default()
            },
            tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WChannel {
    pub ell: AngularChannel,
    pub e: f64,
    pub w: f64,
    /// `(T, bracket)` along the ladder.
    pub ladder: Vec<(f64, f64)>,
}

/// `int_0^inf p^2 B(p)^2 / K_T(p) dp - m_mu(T) e^2` with `B(p) = K_l(p, sqrt(mu))`.
pub fn w_bracket(v: &RadialPotential, ell: AngularChannel, mu: f64, t: f64, grid: &GridControls) -> Result<f64> {
    let kf = mu.sqrt();
    let cutoff = grid.cutoff_for(mu, v.range());
    let g = GridSpec::new(mu, cutoff, t)
        .panels_per_decade(grid.panels_per_decade)
        .points_per_panel(grid.points_per_panel)
        .max_panel_width(grid.max_panel_width)
        .build()?;
    let mut rows = g.nodes.clone();
    rows.push(kf);
    let b = kernel_position_rect(v, ell, &rows, &[kf])?;
    let e = b[(g.len(), 0)];
    let e2 = e * e;
    let mut s = NeumaierSum::new();
    for i in 0..g.len() {
        let p = g.nodes[i];
        let k = k_t_energy(g.xi[i], t);
        let bi = b[(i, 0)];
        s.add(g.weights[i] * p * p * (bi - e) * (bi + e) / k);
    }
    // int_0^cutoff [p^2 B^2 / K - e^2 (p^2 / K - 1)] = sum + e^2 * cutoff
    let main = s.value() + e2 * cutoff;
    // p^2 B^2 / K beyond the cutoff (K = p^2 - mu there), and the matching
    // e^2 tail; each octave gets its own radial rule.
    let mut tail = NeumaierSum::new();
    let octaves = 8;
    for k in 0..octaves {
        let (tp, tw) = composite_gauss_legendre(&[cutoff * 2f64.powi(k), cutoff * 2f64.powi(k + 1)], 16);
        let bt = kernel_position_rect(v, ell, &tp, &[kf])?;
        for (i, (&p, &w)) in tp.iter().zip(&tw).enumerate() {
            tail.add(w * (p * p * bt[(i, 0)].powi(2) - e2 * mu) / ((p - kf) * (p + kf)));
        }
    }
    let far = -e2 * mu / (cutoff * 2f64.powi(octaves));
    Ok(main + tail.value() + far)
}

/// Second-order coefficient `w_l = lim_{T -> 0} [int p^2 B^2 / K_T - m_mu(T) e_l^2]`.
pub fn w_channel(v: &RadialPotential, ell: AngularChannel, mu: f64, opts: &WOptions) -> Result<WChannel> {
    let e = e_channel(v, ell, mu)?;
    if opts.t_ladder.len() < 2 {
        return Err(Error::invalid("tcrit", "w_l needs at least two ladder temperatures"));
    }
    let mut ladder = Vec::new();
    for &tr in &opts.t_ladder {
        let t = tr * mu;
        ladder.push((t, w_bracket(v, ell, mu, t, &opts.grid)?));
    }
    let n = ladder.len();
    let (t1, b1) = ladder[n - 2];
    let (t2, b2) = ladder[n - 1];
    // Corrections vanish like T^2.
    let r = (t1 / t2).powi(2);
    let w = b2 + (b2 - b1) / (r - 1.0);
    let drift = ladder.iter().map(|x| (x.1 - b2).abs()).fold(0.0, f64::max);
    let scale = b2.abs().max(e * e * mu.sqrt()).max(f64::MIN_POSITIVE);
    if !w.is_finite() || drift > opts.tolerance * scale {
        return Err(Error::accuracy(
            "tcrit",
            format!("w_l bracket does not settle along the temperature ladder (channel {ell})"),
            drift / scale,
        ));
    }
    Ok(WChannel { ell, e, w, ladder })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BmuReport {
    pub lambda: f64,
    pub value: f64,
    pub ell: AngularChannel,
    /// Minimizing channel of `e_l` alone.
    pub leading_ell: AngularChannel,
    pub channels: Vec<WChannel>,
}

/// `b_mu(lambda) = min_l (lambda e_l - lambda^2 w_l)` over `l <= ell_max`.
pub fn b_mu(v: &RadialPotential, mu: f64, lambda: f64, ell_max: usize, opts: &WOptions) -> Result<BmuReport> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid("tcrit", format!("b_mu needs lambda > 0, got {lambda}")));
    }
    let channels = (0..=ell_max)
        .map(|l| w_channel(v, AngularChannel(l), mu, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(b_mu_from_channels(channels, lambda))
}

/// `b_mu(lambda)` from precomputed `(e_l, w_l)`.
pub fn b_mu_from_channels(channels: Vec<WChannel>, lambda: f64) -> BmuReport {
    let combined = |c: &WChannel| lambda * c.e - lambda * lambda * c.w;
    let best = channels
        .iter()
        .min_by(|a, b| combined(a).total_cmp(&combined(b)))
        .expect("at least one channel");
    let leading = channels.iter().min_by(|a, b| a.e.total_cmp(&b.e)).expect("at least one channel");
    BmuReport {
        lambda,
        value: combined(best),
        ell: best.ell,
        leading_ell: leading.ell,
        channels: channels.clone(),
    }
}

/// `T_c = mu (8/pi) e^{gamma-2} exp(1 / (sqrt(mu) b))` for a given `b_mu(lambda) < 0`.
pub fn tc_from_b(b: f64, mu: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::domain("tcrit", format!("formula needs mu > 0, got {mu}")));
    }
    if !(b < 0.0) {
        return Err(Error::domain(
            "tcrit",
            format!("b_mu = {b} is not negative: no pairing predicted at this order"),
        ));
    }
    Ok(mu * tc_prefactor() * (1.0 / (mu.sqrt() * b)).exp())
}

/// Weak-coupling `T_c` of `lambda V` from `b_mu(lambda)`.
pub fn tc_weak_coupling_formula(v: &RadialPotential, mu: f64, lambda: f64, ell_max: usize, opts: &WOptions) -> Result<f64> {
    let b = b_mu(v, mu, lambda, ell_max, opts)?;
    tc_from_b(b.value, mu)
}

/// Low-density formula `T_c = mu (8/pi) e^{gamma-2} exp(pi / (2 sqrt(mu) a))`.
pub fn tc_low_density_formula(a: f64, mu: f64) -> Result<f64> {
    if !(a < 0.0) || !(mu > 0.0) {
        return Err(Error::domain(
            "tcrit",
            format!("low-density formula needs a < 0 and mu > 0 (a = {a}, mu = {mu})"),
        ));
    }
    Ok(mu * tc_prefactor() * (PI / (2.0 * mu.sqrt() * a)).exp())
}

/// `int_0^inf (p^2 tanh(E/2T)/E - 1) dp` for constant gap `delta`, with
/// `E = sqrt((p^2 - mu)^2 + delta^2)`.
pub fn zero_range_integral(mu: f64, t: f64, delta: f64) -> Result<f64> {
    let scale = t.max(delta).max(1e-300);
    let cutoff = 20.0 * mu.max(0.0).sqrt().max(1.0).max((delta + 40.0 * t).sqrt());
    let g = GridSpec::new(mu, cutoff, scale).panels_per_decade(4).points_per_panel(20).build()?;
    let f = |xi: f64, p2: f64| {
        let e = xi.hypot(delta);
        // p^2 tanh(E/2T)/E - 1 = (p^2 - K)/K with K = E / tanh(E/2T)
        let k = k_t_energy(e, t);
        (p2 - k) / k
    };
    let mut s = NeumaierSum::new();
    for i in 0..g.len() {
        s.add(g.weights[i] * f(g.xi[i], g.nodes[i] * g.nodes[i]));
    }
    let edges: Vec<f64> = (0..=30).map(|k| cutoff * 2f64.powi(k)).collect();
    let (tp, tw) = composite_gauss_legendre(&edges, 16);
    for (p, w) in tp.iter().zip(&tw) {
        let p2 = p * p;
        s.add(w * f(p2 - mu, p2));
    }
    // Remaining tail ~ mu / p^2.
    s.add(mu / edges[edges.len() - 1]);
    Ok(s.value())
}

fn check_zero_range(a: f64, mu: f64) -> Result<()> {
    if !(a < 0.0) || !a.is_finite() || !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::domain(
            "tcrit",
            format!("zero-range model needs a < 0 and mu > 0 (a = {a}, mu = {mu})"),
        ));
    }
    Ok(())
}

/// Bracketed root of a monotone function by Illinois regula falsi.
fn illinois<F: FnMut(f64) -> Result<f64>>(mut f: F, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64, tol: f64) -> Result<f64> {
    let mut side = 0;
    for _ in 0..300 {
        if (b - a).abs() <= tol {
            break;
        }
        let mut x = a - fa * (b - a) / (fb - fa);
        if !x.is_finite() || x <= a.min(b) || x >= a.max(b) {
            x = 0.5 * (a + b);
        }
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx < 0.0) == (fa < 0.0) {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Ok(a - fa * (b - a) / (fb - fa))
}

/// Zero-range `T_c`: root of `m_mu(T) = -pi / (2a)`.
pub fn tc_zero_range(a: f64, mu: f64) -> Result<f64> {
    check_zero_range(a, mu)?;
    let target = -PI / (2.0 * a);
    let g = |x: f64| -> Result<f64> { Ok(zero_range_integral(mu, x.exp(), 0.0)? - target) };
    let mut lo = (mu * 1e-300f64.max(1e-14)).ln();
    let glo = g(lo)?;
    if glo < 0.0 {
        return Err(Error::domain("tcrit", "zero-range T_c lies below 1e-14 mu"));
    }
    let mut hi = mu.ln();
    let mut ghi = g(hi)?;
    while ghi > 0.0 {
        lo = hi;
        hi += 10f64.ln();
        ghi = g(hi)?;
        if hi > (1e8 * mu).ln() {
            return Err(Error::domain("tcrit", "no zero-range T_c below 1e8 mu"));
        }
    }
    let glo = g(lo)?;
    Ok(illinois(g, lo, glo, hi, ghi, 1e-13)?.exp())
}

/// Zero-range constant gap at temperature `T` (zero above `T_c`).
pub fn gap_zero_range(a: f64, mu: f64, t: f64) -> Result<f64> {
    check_zero_range(a, mu)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid("tcrit", format!("temperature must be >= 0, got {t}")));
    }
    let target = -PI / (2.0 * a);
    if t > 0.0 && zero_range_integral(mu, t, 0.0)? <= target {
        return Ok(0.0);
    }
    let g = |d: f64| -> Result<f64> { Ok(zero_range_integral(mu, t, d)? - target) };
    let mut hi = mu.max(t).max(1e-3);
    let mut ghi = g(hi)?;
    while ghi > 0.0 {
        hi *= 2.0;
        ghi = g(hi)?;
    }
    let mut lo = hi / 2.0;
    let mut glo = g(lo)?;
    while glo < 0.0 {
        lo /= 2.0;
        if lo < 1e-300 {
            return Ok(0.0);
        }
        glo = g(lo)?;
    }
    let root = illinois(|x| g(x.exp()), lo.ln(), glo, hi.ln(), ghi, 1e-14)?;
    Ok(root.exp())
}

/// One rung of [`universal_ratio`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioSample {
    pub lambda: f64,
    pub tc: f64,
    pub xi: f64,
    pub ratio: f64,
}

/// `Xi(lambda) / T_c(lambda)` along a coupling ladder, both computed in the
/// s-wave channel (`lambda` multiplies the coupling already carried by `v`).
pub fn universal_ratio(
    v: &RadialPotential,
    mu: f64,
    lambdas: &[f64],
    tc_opts: &TcOptions,
    gap_opts: &GapOptions,
) -> Result<Vec<RatioSample>> {
    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        if !(lambda > 0.0) {
            return Err(Error::invalid("tcrit", format!("coupling must be positive, got {lambda}")));
        }
        let vl = v.with_coupling(v.coupling() * lambda)?;
        let tc = channel_critical_temperature(&vl, AngularChannel::S, mu, tc_opts, None)?.tc;
        if tc <= 0.0 {
            return Err(Error::domain("tcrit", format!("no superconducting phase at lambda = {lambda}")));
        }
        let xi = energy_gap(&solve_gap_t0(&vl, AngularChannel::S, mu, gap_opts)?);
        out.push(RatioSample { lambda, tc, xi, ratio: xi / tc });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::build_fermi_adapted_grid;

    #[test]
    fn prefactor_constants() {
        assert!((tc_prefactor() - 0.613_808_260_286_556_2).abs() < 1e-15);
        assert!((universal_ratio_limit() - 1.763_876_988_862_045_7).abs() < 1e-15);
    }

    #[test]
    fn zero_potential_has_zero_spectrum() {
        let v = RadialPotential::gaussian(0.0, 1.0).unwrap();
        let g = build_fermi_adapted_grid(1.0, 20.0, 0.01, 3, 12).unwrap();
        let pt = ThermoPoint { t: 0.01, mu: 1.0 };
        assert_eq!(bs_lowest_eigenvalue(&v, AngularChannel(0), pt, &g).unwrap(), 0.0);
        let r = critical_temperature(&v, 1.0, &TcOptions::default()).unwrap();
        assert_eq!(r.tc, 0.0);
    }

    #[test]
    fn lanczos_matches_dense_operator() {
        let v = RadialPotential::gaussian(5.0, 1.0).unwrap();
        let pt = ThermoPoint { t: 0.05, mu: 1.0 };
        let g = build_fermi_adapted_grid(1.0, 20.0, pt.t, 3, 12).unwrap();
        for l in 0..3 {
            let lz = bs_lowest_eigenvalue(&v, AngularChannel(l), pt, &g).unwrap();
            let op = ChannelOperator::assemble(&v, AngularChannel(l), pt, &g).unwrap();
            assert!((lz - op.lowest_eigenvalue).abs() < 1e-10, "l={l}: {lz} vs {}", op.lowest_eigenvalue);
        }
    }

    #[test]
    fn repulsive_potential_has_no_tc() {
        let v = RadialPotential::gaussian(-1.0, 1.0).unwrap();
        let r = critical_temperature(&v, 1.0, &TcOptions { ell_max: 2, ..TcOptions::default() }).unwrap();
        assert_eq!(r.tc, 0.0);
    }

    #[test]
    fn low_density_formula_limits() {
        assert!(matches!(tc_low_density_formula(1.0, 1.0), Err(Error::Domain { .. })));
        let t = tc_low_density_formula(-1e12, 1.0).unwrap();
        assert!((t - tc_prefactor()).abs() < 1e-9);
    }

    #[test]
    fn zero_range_gap_vanishes_at_tc() {
        let tc = tc_zero_range(-1.0, 1.0).unwrap();
        assert!(tc > 0.0);
        assert_eq!(gap_zero_range(-1.0, 1.0, tc * 1.001).unwrap(), 0.0);
        let d = gap_zero_range(-1.0, 1.0, tc * 0.5).unwrap();
        assert!(d > 0.0);
    }
}
