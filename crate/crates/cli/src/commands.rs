//! Subcommand pipelines. Each returns its result table together with the
//! numerical tolerances that produced it.

use rayon::prelude::*;
use serde_json::{json, Value};

use bcslab::dispersion::ThermoPoint;
use bcslab::gapsolve::{energy_gap, solve_gap, solve_gap_t0, GapOptions};
use bcslab::glcoeff::coefficients_from_potential;
use bcslab::glfield::{critical_d, minimize_gl, CriticalOptions, ExternalFields, GlParams, MinimizeOptions};
use bcslab::scatter::{scattering_length, scattering_length_ode};
use bcslab::specfun::AngularChannel;
use bcslab::tcrit::{
    b_mu, critical_temperature, e_channel, gap_zero_range, tc_from_b, tc_low_density_formula, tc_zero_range,
    universal_ratio, universal_ratio_limit, TcOptions, WOptions,
};
use bcslab::verify;

use crate::config::{CliError, CliResult, RunConfig};
use crate::output::{Cell, Table};

pub struct Outcome {
    pub table: Table,
    pub tolerances: Value,
    /// `false` when a verification suite failed.
    pub success: bool,
}

fn ok(table: Table, tolerances: Value) -> CliResult<Outcome> {
    Ok(Outcome {
        table,
        tolerances,
        success: true,
    })
}

pub fn run(cfg: &RunConfig) -> CliResult<Outcome> {
    match cfg.command {
        "gap" => gap(cfg),
        "tc" => tc(cfg),
        "emu" => emu(cfg),
        "bmu" => bmu(cfg),
        "scatlen" => scatlen(cfg),
        "zerorange" => zerorange(cfg),
        "xi-ratio" => xi_ratio(cfg),
        "glcoeff" => glcoeff(cfg),
        "dc" => dc(cfg),
        "glmin" => glmin(cfg),
        "verify" => verify_cmd(cfg),
        other => Err(CliError::Config(format!("unknown command '{other}'"))),
    }
}

/// Evaluate `f` over a ladder in parallel, keeping ladder order.
fn fan_out<T: Send>(xs: &[f64], f: impl Fn(f64) -> CliResult<T> + Sync) -> CliResult<Vec<T>> {
    xs.par_iter().map(|&x| f(x)).collect::<Vec<_>>().into_iter().collect()
}

fn fields(cfg: &RunConfig, dim: usize) -> CliResult<ExternalFields> {
    Ok(match cfg.raw("fields") {
        Some(path) => ExternalFields::from_file(path, dim)?,
        None => ExternalFields::none(dim)?,
    })
}

fn gap(cfg: &RunConfig) -> CliResult<Outcome> {
    let v = cfg.potential()?;
    let mu = cfg.f64("mu")?;
    let ell = AngularChannel(cfg.usize("ell")?);
    let opts = GapOptions {
        tol: cfg.f64("tol")?,
        damping: cfg.f64("damping")?,
        grid: cfg.grid()?,
        ..GapOptions::default()
    };
    let ts = cfg.ladder("t")?;
    let sols = fan_out(&ts, |t| {
        Ok(if t == 0.0 {
            solve_gap_t0(&v, ell, mu, &opts)?
        } else {
            solve_gap(&v, ell, ThermoPoint::new(t, mu)?, &opts)?
        })
    })?;
    let mut table = Table::new(&[
        "t",
        "trivial",
        "converged",
        "iterations",
        "delta_fermi",
        "delta_max",
        "energy_gap",
        "free_energy",
        "normal_free_energy",
        "residual",
    ]);
    for (t, s) in ts.iter().zip(&sols) {
        table.push(vec![
            Cell::Num(*t),
            s.trivial.into(),
            s.converged.into(),
            s.iterations.into(),
            s.delta_at_fermi_surface().into(),
            s.max_delta().into(),
            energy_gap(s).into(),
            s.free_energy_density.into(),
            s.normal_free_energy_density.into(),
            s.residual.into(),
        ]);
    }
    ok(
        table,
        json!({"fixed_point_tol": opts.tol, "damping": opts.damping, "max_iter": opts.max_iter,
               "triviality_floor": opts.triviality_floor}),
    )
}

fn tc_options(cfg: &RunConfig) -> CliResult<TcOptions> {
    Ok(TcOptions {
        ell_max: cfg.usize("ell-max")?,
        rel_tol: cfg.f64("rel-tol")?,
        grid: cfg.grid()?,
        ..TcOptions::default()
    })
}

fn tc(cfg: &RunConfig) -> CliResult<Outcome> {
    let v = cfg.potential()?;
    let mu = cfg.f64("mu")?;
    let opts = tc_options(cfg)?;
    let lambdas = cfg.ladder("lambda")?;
    let reports = fan_out(&lambdas, |l| Ok(critical_temperature(&v.with_coupling(v.coupling() * l)?, mu, &opts)?))?;
    let mut table = Table::new(&["lambda", "tc", "channel", "bracket_lo", "bracket_hi", "degenerate"]);
    for (l, r) in lambdas.iter().zip(&reports) {
        table.push(vec![
            Cell::Num(*l),
            r.tc.into(),
            r.channel.ell().into(),
            r.bracket.0.into(),
            r.bracket.1.into(),
            r.degenerate.into(),
        ]);
    }
    ok(table, json!({"rel_tol": opts.rel_tol, "degeneracy_tol": opts.degeneracy_tol}))
}

fn emu(cfg: &RunConfig) -> CliResult<Outcome> {
    let v = cfg.potential()?;
    let mu = cfg.f64("mu")?;
    let ells: Vec<f64> = (0..=cfg.usize("ell-max")?).map(|l| l as f64).collect();
    let es = fan_out(&ells, |l| Ok(e_channel(&v, AngularChannel(l as usize), mu)?))?;
    let mut table = Table::new(&["ell", "e", "multiplicity"]);
    for (l, e) in ells.iter().zip(&es) {
        let ch = AngularChannel(*l as usize);
        table.push(vec![ch.ell().into(), (*e).into(), ch.multiplicity().into()]);
    }
    ok(table, json!({}))
}

fn bmu(cfg: &RunConfig) -> CliResult<Outcome> {
    let v = cfg.potential()?;
    let mu = cfg.f64("mu")?;
    let ell_max = cfg.usize("ell-max")?;
    let wopts = WOptions::default();
    let lambdas = cfg.ladder("lambda")?;
    let reports = fan_out(&lambdas, |l| Ok(b_mu(&v, mu, l, ell_max, &wopts)?))?;
    let mut table = Table::new(&["lambda", "b_mu", "ell", "leading_ell", "tc_formula"]);
    for r in &reports {
        let tc = if r.value < 0.0 { tc_from_b(r.value, mu)? } else { 0.0 };
        table.push(vec![
            r.lambda.into(),
            r.value.into(),
            r.ell.ell().into(),
            r.leading_ell.ell().into(),
            tc.into(),
        ]);
    }
    ok(table, json!({"t_ladder": wopts.t_ladder, "w_tolerance": wopts.tolerance}))
}

fn scatlen(cfg: &RunConfig) -> CliResult<Outcome> {
    let v = cfg.potential()?;
    let method = cfg.string("method")?;
    let reports = match method.as_str() {
        "resolvent" => vec![scattering_length(&v)?],
        "ode" => vec![scattering_length_ode(&v)?],
        "both" => vec![scattering_length(&v)?, scattering_length_ode(&v)?],
        other => return Err(CliError::Config(format!("method: expected resolvent, ode or both, got '{other}'"))),
    };
    let mut table = Table::new(&["method", "a", "bs_spectrum_floor", "bound_state_free"]);
    for r in &reports {
        table.push(vec![
            r.method.to_string().into(),
            r.a.into(),
            r.bs_spectrum_floor.into(),
            r.bound_state_free.into(),
        ]);
    }
    ok(table, json!({}))
}

fn zerorange(cfg: &RunConfig) -> CliResult<Outcome> {
    let a = cfg.f64("a")?;
    let mu = cfg.f64("mu")?;
    let tc = tc_zero_range(a, mu)?;
    let formula = tc_low_density_formula(a, mu)?;
    let ts = cfg.ladder("t")?;
    let gaps = fan_out(&ts, |t| Ok(gap_zero_range(a, mu, t)?))?;
    let mut table = Table::new(&["a", "mu", "tc", "tc_low_density_formula", "t", "delta"]);
    if ts.is_empty() {
        table.push(vec![a.into(), mu.into(), tc.into(), formula.into(), Cell::from(""), Cell::from("")]);
    }
    for (t, d) in ts.iter().zip(&gaps) {
        table.push(vec![a.into(), mu.into(), tc.into(), formula.into(), (*t).into(), (*d).into()]);
    }
    ok(table, json!({}))
}

fn xi_ratio(cfg: &RunConfig) -> CliResult<Outcome> {
    let v = cfg.potential()?;
    let mu = cfg.f64("mu")?;
    let grid = cfg.grid()?;
    let tco = TcOptions {
        grid,
        ..TcOptions::default()
    };
    let gapo = GapOptions {
        grid,
        ..GapOptions::default()
    };
    let lambdas = cfg.ladder("lambda")?;
    let samples = fan_out(&lambdas, |l| Ok(universal_ratio(&v, mu, &[l], &tco, &gapo)?[0]))?;
    let limit = universal_ratio_limit();
    let mut table = Table::new(&["lambda", "tc", "xi", "ratio", "relative_deviation"]);
    for s in &samples {
        table.push(vec![
            s.lambda.into(),
            s.tc.into(),
            s.xi.into(),
            s.ratio.into(),
            ((s.ratio - limit).abs() / limit).into(),
        ]);
    }
    ok(table, json!({"tc_rel_tol": tco.rel_tol, "gap_tol": gapo.tol, "limit": limit}))
}

fn glcoeff(cfg: &RunConfig) -> CliResult<Outcome> {
    let v = cfg.potential()?;
    let mu = cfg.f64("mu")?;
    let grid = cfg.grid()?;
    let tc = match cfg.opt_f64("tc")? {
        Some(t) => t,
        None => {
            let opts = TcOptions {
                grid,
                ..TcOptions::default()
            };
            let r = critical_temperature(&v, mu, &opts)?;
            if r.channel != AngularChannel::S || r.tc <= 0.0 {
                return Err(bcslab::Error::Domain {
                    module: "glcoeff",
                    message: format!("no s-wave instability (leading channel l={}, Tc={})", r.channel.ell(), r.tc),
                }
                .into());
            }
            r.tc
        }
    };
    let c = coefficients_from_potential(&v, mu, tc, &grid, cfg.f64("scale")?)?;
    let mut table = Table::new(&["tc", "lambda0", "lambda1", "lambda2", "lambda3", "alpha0_norm"]);
    table.push(vec![
        c.tc.into(),
        c.lambda0.into(),
        c.lambda1.into(),
        c.lambda2.into(),
        c.lambda3.into(),
        c.alpha0_norm.into(),
    ]);
    ok(table, json!({"route_agreement": "1e-6 + |eigenvalue + 1|"}))
}

fn dc(cfg: &RunConfig) -> CliResult<Outcome> {
    let opts = CriticalOptions {
        dim: cfg.usize("dim")?,
        n: cfg.usize("modes")?,
        ..CriticalOptions::default()
    };
    let f = fields(cfg, opts.dim)?;
    let r = critical_d(&f, cfg.f64("lambda1")?, cfg.f64("lambda2")?, &opts)?;
    let mut table = Table::new(&["d_c", "d_c_refined"]);
    table.push(vec![r.d_c.into(), r.d_c_refined.into()]);
    ok(
        table,
        json!({"truncation_tol": opts.truncation_tol, "lanczos_tol": opts.lanczos_tol, "dense_limit": opts.dense_limit}),
    )
}

fn glmin(cfg: &RunConfig) -> CliResult<Outcome> {
    let opts = MinimizeOptions {
        dim: cfg.usize("dim")?,
        n: cfg.usize("modes")?,
        starts: cfg.usize("starts")?,
        seed: cfg.u64("seed")?,
        grad_tol: cfg.f64("grad-tol")?,
        ..MinimizeOptions::default()
    };
    let f = fields(cfg, opts.dim)?;
    let params = GlParams {
        lambda1: cfg.f64("lambda1")?,
        lambda2: cfg.f64("lambda2")?,
        lambda3: cfg.f64("lambda3")?,
    };
    let m = minimize_gl(&f, params, cfg.f64("d")?, &opts)?;
    let density = m.psi.real_space().iter().map(|z| z.norm_sqr()).sum::<f64>() / m.psi.real_space().len() as f64;
    let mut table = Table::new(&["energy", "mean_density", "grad_norm", "iterations"]);
    table.push(vec![m.energy.into(), density.into(), m.grad_norm.into(), m.iterations.into()]);
    ok(table, json!({"grad_tol": opts.grad_tol, "max_iter": opts.max_iter, "memory": opts.memory}))
}

fn verify_cmd(cfg: &RunConfig) -> CliResult<Outcome> {
    let sel = cfg.string("suite")?;
    let names: Vec<String> = if sel == "all" {
        verify::suite_names().into_iter().map(String::from).collect()
    } else {
        sel.split(',').map(|s| s.trim().to_string()).collect()
    };
    let mut table = Table::new(&["suite", "check", "value", "limit", "pass"]);
    let mut success = true;
    for name in &names {
        let report = verify::run_suite(name).ok_or_else(|| {
            CliError::Config(format!("unknown suite '{name}' (known: {})", verify::suite_names().join(", ")))
        })??;
        eprintln!(
            "{} {} ({:.1}s)",
            if report.passed() { "PASS" } else { "FAIL" },
            report.name,
            report.elapsed.as_secs_f64()
        );
        for c in &report.checks {
            eprintln!("    {c}");
            table.push(vec![name.as_str().into(), c.label.clone().into(), c.value.into(), c.limit.into(), c.pass.into()]);
        }
        success &= report.passed();
    }
    Ok(Outcome {
        table,
        tolerances: json!({}),
        success,
    })
}
