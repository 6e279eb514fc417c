//! Run orchestration: initial data, stepping, snapshots and output files.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::besov::HybridBesovSpec;
use crate::error::{Error, Result};
use crate::init::{gaussian_bump, heat_kernel_data, random_band_field};
use crate::lp::dump::write_field;
use crate::lp::dyadic::{default_filter, DyadicFilter};
use crate::lp::field::SpectralField;
use crate::solver::{
    ft_norm, ft_specs, gronwall_integrand, snapshot, step, History, Mode, SimState, Snapshot, SolverConfig,
};

use super::config::{DensityProfile, RunConfig};

/// Lebesgue indices of the Gronwall exponent reported in the time series.
pub const GRONWALL_Q: f64 = 2.0;

pub const CSV_COLUMNS: [&str; 10] =
    ["t", "linf_rho_minus_1", "besov_u_m1_inf", "mass", "mass_drift", "res_mass", "res_mom", "ft_norm", "V_T", "cfl"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub t: f64,
    pub linf_rho_minus_1: f64,
    pub besov_u_m1_inf: f64,
    pub mass: f64,
    pub mass_drift: f64,
    pub res_mass: f64,
    pub res_mom: f64,
    pub ft_norm: f64,
    #[serde(rename = "V_T")]
    pub v_t: f64,
    pub cfl: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub status: String,
    pub message: Option<String>,
    pub t_final: f64,
    pub steps: usize,
    pub l0: i32,
    pub filter_range: (i32, i32),
    pub max_mass_drift: f64,
    pub max_res_mass: f64,
    pub max_res_mom: f64,
    pub ft_initial: f64,
    pub ft_max: f64,
    pub v_final: f64,
    pub rho1_min: f64,
    pub rho1_max: f64,
    pub config: RunConfig,
}

impl Summary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

#[derive(Debug)]
pub struct RunOutput {
    pub rows: Vec<Row>,
    pub history: History,
    pub final_state: SimState,
    pub summary: Summary,
}

/// Crossover block of a run: configured, or derived from the viscosity and pressure and
/// clamped into the filter range.
pub fn crossover_for(solver: &SolverConfig, filter: &DyadicFilter) -> i32 {
    solver.crossover().clamp(filter.l_min() - 1, filter.l_max())
}

/// Density perturbation `q1` and the perturbation `(h2, u2)` at time zero.
pub fn initial_state(config: &RunConfig, filter: &DyadicFilter, l0: i32) -> Result<SimState> {
    let g = filter.grid();
    let init = &config.init;
    let q1 = match init.profile {
        DensityProfile::Bump => gaussian_bump(g, init.bump_amplitude, init.bump_width, None)?,
        DensityProfile::HeatKernel => heat_kernel_data(g, config.solver.mu, init.bump_amplitude)?,
    };
    let d = g.dim();
    let (h2, u2) = if init.eps == 0.0 {
        (SpectralField::zeros(g, 1), SpectralField::zeros(g, d))
    } else {
        let [(hs, _), (us, _)] = ft_specs(d, l0);
        let h2 = random_band_field(filter, 1, init.eps, hs, init.seed)?;
        let u2 = random_band_field(filter, d, init.eps, us, init.seed.wrapping_add(1))?;
        (h2, u2)
    };
    SimState::new(0.0, q1, h2, u2, config.solver.mu)
}

/// Perturbation norm at time zero: the sum of the two sup-in-time hybrid norms of the data.
pub fn initial_ft(history: &History) -> Result<f64> {
    ft_norm(&history.prefix(1))
}

struct Tracker {
    mass0: f64,
    v_t: f64,
    prev: Option<(f64, f64)>,
    ft_sup: Vec<Vec<(i32, f64)>>,
    ft_int: Vec<Vec<(i32, f64)>>,
    prev_blocks: Option<(Vec<(i32, f64)>, Vec<(i32, f64)>)>,
    prev_t: f64,
    specs: [(HybridBesovSpec, HybridBesovSpec); 2],
}

impl Tracker {
    /// Running `ft_norm` and `V(T)`, updated in O(levels) per snapshot.
    fn row(&mut self, s: &Snapshot, dim: usize, l0: i32) -> Result<Row> {
        let w = gronwall_integrand(s, dim, l0, GRONWALL_Q, GRONWALL_Q)?;
        if let Some((t, wp)) = self.prev {
            self.v_t += 0.5 * (s.t - t) * (w + wp);
        }
        self.prev = Some((s.t, w));
        let blocks = [&s.h2_blocks, &s.u2_blocks];
        for (k, b) in blocks.iter().enumerate() {
            if self.ft_sup.len() <= k {
                self.ft_sup.push(b.iter().map(|&(l, v)| (l, v)).collect());
                self.ft_int.push(b.iter().map(|&(l, _)| (l, 0.0)).collect());
            } else {
                let prev = match (&self.prev_blocks, k) {
                    (Some((h, _)), 0) => h,
                    (Some((_, u)), _) => u,
                    (None, _) => unreachable!("blocks recorded after the first snapshot"),
                };
                let dt = s.t - self.prev_t;
                for (((sup, int), &(_, v)), &(_, vp)) in self.ft_sup[k].iter_mut().zip(self.ft_int[k].iter_mut()).zip(b.iter()).zip(prev.iter()) {
                    sup.1 = sup.1.max(v);
                    int.1 += 0.5 * dt * (v + vp);
                }
            }
        }
        self.prev_blocks = Some((s.h2_blocks.clone(), s.u2_blocks.clone()));
        self.prev_t = s.t;
        let mut ft = 0.0;
        for k in 0..2 {
            let (sup_spec, int_spec) = &self.specs[k];
            ft += crate::besov::hybrid_from_blocks(&self.ft_sup[k], &self.ft_sup[k], sup_spec)
                + crate::besov::hybrid_from_blocks(&self.ft_int[k], &self.ft_int[k], int_spec);
        }
        Ok(Row {
            t: s.t,
            linf_rho_minus_1: s.linf_rho_minus_1,
            besov_u_m1_inf: s.besov_u_m1_inf,
            mass: s.mass,
            mass_drift: ((s.mass - self.mass0) / self.mass0).abs(),
            res_mass: s.res_mass,
            res_mom: s.res_mom,
            ft_norm: ft,
            v_t: self.v_t,
            cfl: s.cfl,
        })
    }
}

/// Runs the configured simulation. Output files are written when `config.out` is set,
/// also when the run ends in a blowup.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let grid = config.build_grid()?;
    let filter = default_filter(&grid)?;
    let l0 = crossover_for(&config.solver, &filter);
    let mut state = initial_state(config, &filter, l0)?;
    let mut solver = config.solver.clone();
    solver.l0 = Some(l0);
    if solver.mode == Mode::Friction && !solver.friction_balanced() {
        log::warn!("r mu Fr^2 = {:.6} != 1: the quasi-solution is not exact", solver.r_fric * solver.mu * solver.fr * solver.fr);
    }
    let per = config.steps_per_snapshot();
    let total = (config.solver.t_end / config.solver.dt).round() as usize;
    let dump_per = config.dump_every.map(|d| ((d / config.solver.dt).round() as usize).max(1));

    let mut history = History::new(grid.dim(), l0);
    let mut tracker = Tracker {
        mass0: 0.0,
        v_t: 0.0,
        prev: None,
        ft_sup: Vec::new(),
        ft_int: Vec::new(),
        prev_blocks: None,
        prev_t: 0.0,
        specs: ft_specs(grid.dim(), l0),
    };
    let mut rows = Vec::new();
    let mut record = |state: &SimState, history: &mut History, rows: &mut Vec<Row>| -> Result<()> {
        let s = snapshot(&filter, state, &solver)?;
        if history.snapshots.is_empty() {
            tracker.mass0 = s.mass;
        }
        rows.push(tracker.row(&s, grid.dim(), l0)?);
        history.push(s)
    };
    let dump = |state: &SimState, k: usize| -> Result<()> {
        if let (Some(dir), Some(dp)) = (&config.out, dump_per) {
            if k % dp == 0 {
                let d = dir.join("dumps");
                let stem = format!("t{k:07}");
                write_field(&d, &format!("{stem}_q1"), &state.q1, state.t)?;
                write_field(&d, &format!("{stem}_h2"), &state.h2, state.t)?;
                write_field(&d, &format!("{stem}_u2"), &state.u2, state.t)?;
            }
        }
        Ok(())
    };

    record(&state, &mut history, &mut rows)?;
    dump(&state, 0)?;
    let mut failure = None;
    let mut steps = 0;
    for k in 1..=total {
        // exact multiples of dt keep snapshot times free of accumulated rounding
        let mut cfg = solver.clone();
        cfg.dt = k as f64 * config.solver.dt - state.t;
        match step(&state, &cfg) {
            Ok(next) => state = next,
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
        steps = k;
        if k % per == 0 || k == total {
            record(&state, &mut history, &mut rows)?;
        }
        dump(&state, k)?;
    }

    let ft0 = initial_ft(&history)?;
    let summary = Summary {
        status: match &failure {
            None => "ok".into(),
            Some(Error::Blowup { .. }) => "blowup".into(),
            Some(_) => "error".into(),
        },
        message: failure.as_ref().map(|e| e.to_string()),
        t_final: state.t,
        steps,
        l0,
        filter_range: (filter.l_min(), filter.l_max()),
        max_mass_drift: rows.iter().map(|r| r.mass_drift).fold(0.0, f64::max),
        max_res_mass: rows.iter().map(|r| r.res_mass).fold(0.0, f64::max),
        max_res_mom: rows.iter().map(|r| r.res_mom).fold(0.0, f64::max),
        ft_initial: ft0,
        ft_max: rows.iter().map(|r| r.ft_norm).fold(0.0, f64::max),
        v_final: rows.last().map(|r| r.v_t).unwrap_or(0.0),
        rho1_min: history.snapshots.iter().map(|s| s.rho1_min).fold(f64::INFINITY, f64::min),
        rho1_max: history.snapshots.iter().map(|s| s.rho1_max).fold(f64::NEG_INFINITY, f64::max),
        config: config.clone(),
    };
    if let Some(dir) = &config.out {
        write_outputs(dir, &rows, &summary)?;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(RunOutput { rows, history, final_state: state, summary })
}

pub fn write_csv(path: &Path, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_outputs(dir: &Path, rows: &[Row], summary: &Summary) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_csv(&dir.join("series.csv"), rows)?;
    fs::write(dir.join("summary.json"), serde_json::to_vec_pretty(summary)?)?;
    Ok(())
}
