//! Verification suites. Every check is a report entry; nothing here panics on failure.

use std::f64::consts::PI;

use crate::besov::{besov_norm, hybrid_besov_norm, l2_parseval, lp_norm, BesovSpec, HybridBesovSpec};
use crate::error::{Error, Result};
use crate::init::{gaussian_bump, heat_kernel_data, random_band_field};
use crate::lp::dyadic::{default_filter, dyadic_block};
use crate::lp::field::SpectralField;
use crate::lp::grid::make_grid;
use crate::lp::ops::multiply;
use crate::paraproduct::bony;
use crate::quasi::{
    friction_exact_residual, heat_evolve, kernel_decay_fit, kernel_rate, max_principle_check, quasi_residual, HeatState,
};
use crate::solver::{
    full_residual_with, mass_drift, scaling_check, scaling_check_with, snapshot, step, History, Mode, SimState,
    SolverConfig, TimeDerivative,
};

use super::config::RunConfig;
use super::fit::fit_decay;
use super::report::{Check, Report};
use super::run::run;

pub const SUITES: [&str; 7] = ["lp", "besov", "paraproduct", "quasi", "solver", "decay", "all"];

/// Decay window and tolerances of the long-run exponent checks.
pub const DECAY_WINDOW: (f64, f64) = (2.0, 20.0);
pub const RHO_DECAY_TOL: f64 = 0.15;
pub const U_DECAY_TOL: f64 = 0.20;

fn push(report: &mut Report, suite: &str, name: &str, r: Result<Check>) {
    match r {
        Ok(c) => report.checks.push(c),
        Err(e) => report.checks.push(Check::errored(suite, name, &e)),
    }
}

pub fn verify(suite: &str, config: &RunConfig) -> Result<Report> {
    let mut report = Report::default();
    match suite {
        "lp" => lp_suite(&mut report),
        "besov" => besov_suite(&mut report),
        "paraproduct" => paraproduct_suite(&mut report),
        "quasi" => quasi_suite(&mut report),
        "solver" => solver_suite(&mut report),
        "decay" => decay_suite(&mut report, config),
        "all" => {
            for s in &SUITES[..SUITES.len() - 1] {
                report.extend(verify(s, config)?);
            }
        }
        other => return Err(Error::Config(format!("unknown suite {other:?}; expected one of {SUITES:?}"))),
    }
    Ok(report)
}

fn lp_suite(report: &mut Report) {
    let s = "lp";
    push(report, s, "partition_of_unity", (|| {
        let g = make_grid(2, 128, 2.0 * PI)?;
        let f = default_filter(&g)?;
        let sum = f.partition_sum();
        let xs = g.xi_sq();
        let err = (1..g.len())
            .filter(|&i| {
                let r = xs[i].sqrt();
                r < f.exact_radius() && r > f.exact_radius_low()
            })
            .map(|i| (sum[i] - 1.0).abs())
            .fold(0.0, f64::max);
        Ok(Check::upper(s, "partition_of_unity", err, 1e-10))
    })());
    push(report, s, "reconstruction", (|| {
        let g = make_grid(2, 128, 2.0 * PI)?;
        let f = default_filter(&g)?;
        let mut worst: f64 = 0.0;
        for seed in 0..5 {
            let u = random_band_field(&f, 1, 1.0, HybridBesovSpec::uniform(BesovSpec { s: 0.0, p: 2.0, r: 2.0 }, 0), seed)?
                .shift(0.7);
            let mut acc = SpectralField::zeros(&g, 1);
            for l in f.levels() {
                acc = acc.add(&dyadic_block(&f, &u, l)?)?;
            }
            worst = worst.max(acc.rel_l2_diff(&u.shift(-u.mean(0)))?);
        }
        Ok(Check::upper(s, "reconstruction", worst, 1e-10))
    })());
    push(report, s, "parseval", (|| {
        let g = make_grid(2, 64, 5.0)?;
        let u = SpectralField::scalar_from_fn(&g, |x| (2.0 * PI * x[0] / 5.0).sin() * (0.3 + (2.0 * PI * x[1] / 5.0).cos()));
        let a = lp_norm(&u, 2.0);
        let b = l2_parseval(&u);
        Ok(Check::upper(s, "parseval", (a - b).abs() / b, 1e-12))
    })());
}

fn besov_suite(report: &mut Report) {
    let s = "besov";
    push(report, s, "triangle_inequality", (|| {
        let g = make_grid(2, 64, 2.0 * PI)?;
        let f = default_filter(&g)?;
        let h = HybridBesovSpec::uniform(BesovSpec { s: 0.0, p: 2.0, r: 1.0 }, 0);
        let u = random_band_field(&f, 1, 1.0, h, 11)?;
        let v = random_band_field(&f, 1, 1.0, h, 12)?;
        let spec = BesovSpec { s: 0.5, p: f64::INFINITY, r: 2.0 };
        let lhs = besov_norm(&f, &u.add(&v)?, spec)?;
        let rhs = besov_norm(&f, &u, spec)? + besov_norm(&f, &v, spec)?;
        Ok(Check::upper(s, "triangle_inequality", lhs / rhs, 1.0 + 1e-12))
    })());
    push(report, s, "homogeneity", (|| {
        let g = make_grid(2, 64, 2.0 * PI)?;
        let f = default_filter(&g)?;
        let h = HybridBesovSpec::summable(-0.5, 1.0, 2.0, f64::INFINITY, 1);
        let u = random_band_field(&f, 1, 1.0, h, 13)?;
        let a = hybrid_besov_norm(&f, &u.scale(-3.5), h)?;
        let b = 3.5 * hybrid_besov_norm(&f, &u, h)?;
        Ok(Check::upper(s, "homogeneity", (a - b).abs() / b, 1e-12))
    })());
    push(report, s, "heat_characterization_two_sided", (|| {
        let g = make_grid(2, 64, 2.0 * PI)?;
        let f = default_filter(&g)?;
        let u = random_band_field(&f, 1, 1.0, HybridBesovSpec::uniform(BesovSpec { s: 0.0, p: 2.0, r: 2.0 }, 0), 14)?;
        let (up, down) = crate::besov::heat_characterization_ratio(&f, &u, 0.5, 2.0, 2.0)?
            .ratios()
            .ok_or_else(|| Error::Config("zero field".into()))?;
        Ok(Check::upper(s, "heat_characterization_two_sided", up.max(down), 10.0))
    })());
}

fn paraproduct_suite(report: &mut Report) {
    let s = "paraproduct";
    push(report, s, "bony_identity", (|| {
        let g = make_grid(2, 128, 2.0 * PI)?;
        let f = default_filter(&g)?;
        let h = HybridBesovSpec::uniform(BesovSpec { s: 0.0, p: 2.0, r: 2.0 }, 0);
        let mut worst: f64 = 0.0;
        for k in 0..10 {
            let u = random_band_field(&f, 1, 1.0, h, 2 * k)?.shift(0.3);
            let v = random_band_field(&f, 1, 1.0, h, 2 * k + 1)?.shift(-1.1);
            let parts = bony(&f, &u, &v)?;
            worst = worst.max(parts.sum().rel_l2_diff(&multiply(&u, &v)?)?);
        }
        Ok(Check::upper(s, "bony_identity", worst, 1e-12))
    })());
}

/// `0.5 sin x` on `[0, 2 pi)`: `rho1` ranges over `[0.5, 1.5]`.
pub fn quasi_1d_residual(n: usize, mu: f64) -> Result<f64> {
    let g = make_grid(1, n, 2.0 * PI)?;
    let q = SpectralField::scalar_from_fn(&g, |x| 0.5 * x[0].sin());
    Ok(quasi_residual(&HeatState { t: 0.0, q1: q, mu })?.momentum)
}

/// Gaussian bump of amplitude 0.5 and width 1.5 on a box of side 64.
pub fn quasi_2d_residual(n: usize, mu: f64) -> Result<f64> {
    let g = make_grid(2, n, 64.0)?;
    let q = gaussian_bump(&g, 0.5, 1.5, None)?;
    Ok(quasi_residual(&HeatState { t: 0.0, q1: q, mu })?.momentum)
}

/// Kernel-rate fit for heat-kernel data of unit age on a box of side 64, `mu = 1`.
pub fn kernel_rate_fit(dim: usize, alpha: usize, p: f64) -> Result<(f64, f64)> {
    let n = if dim == 1 { 1024 } else { 256 };
    let g = make_grid(dim, n, 64.0)?;
    let q = heat_kernel_data(&g, 1.0, 0.5)?;
    let fitted = kernel_decay_fit(&q, 1.0, alpha, p, (3.0, 15.0), 24)?;
    Ok((fitted, kernel_rate(dim, alpha, p)))
}

fn quasi_suite(report: &mut Report) {
    let s = "quasi";
    push(report, s, "residual_1d", quasi_1d_residual(1024, 0.3).map(|r| Check::upper(s, "residual_1d", r, 1e-8)));
    push(report, s, "residual_2d", quasi_2d_residual(256, 0.1).map(|r| Check::upper(s, "residual_2d", r, 1e-6)));
    push(report, s, "friction_exact", (|| {
        let g = make_grid(2, 128, 32.0)?;
        let q = gaussian_bump(&g, 0.5, 2.0, None)?;
        let r = friction_exact_residual(&HeatState { t: 0.0, q1: q, mu: 1.0 }, 1.0, 1.0)?;
        Ok(Check::upper(s, "friction_exact", r.relative, 1e-8))
    })());
    push(report, s, "max_principle", (|| {
        let g = make_grid(2, 128, 32.0)?;
        let q = gaussian_bump(&g, -0.4, 2.0, None)?.add(&gaussian_bump(&g, 0.6, 1.0, Some(&[5.0, 7.0]))?)?;
        let mut worst: f64 = 0.0;
        for k in 0..=10 {
            let st = heat_evolve(&q, 0.5, 0.5 * k as f64)?;
            let m = max_principle_check(&q, &st);
            let (lo, hi) = (1.0 + q.min_value(0), 1.0 + q.max_value(0));
            worst = worst.max((lo - m.min).max(m.max - hi));
        }
        Ok(Check::upper(s, "max_principle_excess", worst, 1e-8))
    })());
    for dim in [1, 2] {
        for (alpha, p) in [(0, f64::INFINITY), (1, f64::INFINITY), (0, 2.0)] {
            let name = format!("kernel_rate_n{dim}_a{alpha}_p{p}");
            push(report, s, &name, kernel_rate_fit(dim, alpha, p).map(|(fit, want)| {
                let mut c = Check::upper(s, &name, (fit - want).abs() / want, 0.15);
                c.note = Some(format!("fitted {fit:.4}, predicted {want:.4}"));
                c
            }));
        }
    }
}

fn solver_suite(report: &mut Report) {
    let s = "solver";
    let g = match make_grid(2, 64, 16.0) {
        Ok(g) => g,
        Err(e) => return report.checks.push(Check::errored(s, "grid", &e)),
    };
    let bump = |amp| gaussian_bump(&g, amp, 1.5, None);
    push(report, s, "unforced_fixed_point", (|| {
        let config = SolverConfig { mode: Mode::ShallowWater, forcing: false, mu: 0.5, dt: 0.01, ..Default::default() };
        let mut st = SimState::new(0.0, bump(0.4)?, SpectralField::zeros(&g, 1), SpectralField::zeros(&g, 2), config.mu)?;
        for _ in 0..20 {
            st = step(&st, &config)?;
        }
        Ok(Check::upper(s, "unforced_fixed_point", st.h2.max_abs().max(st.u2.max_abs()), 1e-300))
    })());
    push(report, s, "quasi_solution_misses_pressure", (|| {
        let config = SolverConfig { mode: Mode::ShallowWater, mu: 0.5, a: 2.0, ..Default::default() };
        let st = SimState::new(0.0, bump(0.3)?, SpectralField::zeros(&g, 1), SpectralField::zeros(&g, 2), config.mu)?;
        let r = full_residual_with(&st, &config, TimeDerivative::Frozen)?;
        let p = (g.volume() * crate::lp::ops::grad(&st.q1)?.scale(config.a).coeff_energy()).sqrt();
        Ok(Check::upper(s, "quasi_solution_misses_pressure", (r.momentum_abs - p).abs() / p, 1e-8))
    })());
    push(report, s, "scaling_l2", (|| {
        let config = SolverConfig { mode: Mode::ShallowWater, mu: 0.5, a: 2.0, ..Default::default() };
        let h = SpectralField::scalar_from_fn(&g, |x| 1e-2 * (2.0 * PI * x[0] / 16.0).cos());
        let u = SpectralField::from_fn(&g, 2, |x, c| 1e-2 * (2.0 * PI * x[1 - c] / 16.0).sin());
        let st = SimState::new(0.0, bump(0.3)?, h, u, config.mu)?;
        Ok(Check::upper(s, "scaling_l2", scaling_check(&st, &config, 2)?, 1e-10))
    })());
    push(report, s, "scaling_negative_control", (|| {
        let config = SolverConfig { mode: Mode::ShallowWater, mu: 0.5, a: 2.0, ..Default::default() };
        let st = SimState::new(0.0, bump(0.3)?, SpectralField::zeros(&g, 1), SpectralField::zeros(&g, 2), config.mu)?;
        Ok(Check::lower(s, "scaling_negative_control", scaling_check_with(&st, &config, 2, false)?, 1e-6))
    })());
    push(report, s, "heat_only_mass_drift", (|| {
        let f = default_filter(&g)?;
        let config = SolverConfig { mode: Mode::HeatOnly, mu: 0.5, dt: 0.05, ..Default::default() };
        let mut st = SimState::new(0.0, bump(0.3)?, SpectralField::zeros(&g, 1), SpectralField::zeros(&g, 2), config.mu)?;
        let mut h = History::new(2, 0);
        for _ in 0..10 {
            h.push(snapshot(&f, &st, &config)?)?;
            st = step(&st, &config)?;
        }
        Ok(Check::upper(s, "heat_only_mass_drift", mass_drift(&h)?, 1e-13))
    })());
}

fn decay_suite(report: &mut Report, config: &RunConfig) {
    let s = "decay";
    let out = match run(config) {
        Ok(o) => o,
        Err(e) => return report.checks.push(Check::errored(s, "run", &e)),
    };
    let t: Vec<f64> = out.rows.iter().map(|r| r.t).collect();
    let rho: Vec<f64> = out.rows.iter().map(|r| r.linf_rho_minus_1).collect();
    let u: Vec<f64> = out.rows.iter().map(|r| r.besov_u_m1_inf).collect();
    let n = config.grid.dim as f64;
    match fit_decay("linf_rho_minus_1", &t, &rho, DECAY_WINDOW, n / 2.0, RHO_DECAY_TOL) {
        Ok(r) => report.decay.push(r),
        Err(e) => report.checks.push(Check::errored(s, "linf_rho_minus_1", &e)),
    }
    match fit_decay("besov_u_m1_inf", &t, &u, DECAY_WINDOW, n / 2.0 + 0.5, U_DECAY_TOL) {
        Ok(r) => report.decay.push(r),
        Err(e) => report.checks.push(Check::errored(s, "besov_u_m1_inf", &e)),
    }
}
