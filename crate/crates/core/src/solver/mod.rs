//! Time integration of the perturbation `(h2, u2)` around the heat-driven quasi-solution.
//!
//! The full density and velocity are `rho = rho1 e^{h2}` and `u = u1 + u2` with
//! `rho1 = 1 + q1` solving the heat equation and `u1 = -mu grad ln rho1`.

mod diagnostics;
mod rhs;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::field::SpectralField;
use crate::quasi::{check_floor, heat_multiplier, velocity_from_density, HeatState, DENSITY_FLOOR};

pub use diagnostics::*;
pub use rhs::{assemble_rhs, rhs_terms, RhsTerms};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Affine pressure `P = a rho`, no drag.
    ShallowWater,
    /// Pressure `rho / Fr^2` and drag `r rho u`.
    Friction,
    /// Only the heat part evolves; the perturbation is frozen.
    HeatOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Forward Euler on the explicit terms, backward Euler on viscosity and drag.
    Imex1,
    /// Heun on the explicit terms, Crank-Nicolson on viscosity and drag.
    Imex2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub mu: f64,
    /// Pressure coefficient in shallow-water mode.
    pub a: f64,
    pub fr: f64,
    pub r_fric: f64,
    pub mode: Mode,
    pub dt: f64,
    pub t_end: f64,
    pub dealias: f64,
    pub cfl_max: f64,
    /// Crossover block of the hybrid norms; derived from `mu` and the pressure when absent.
    pub l0: Option<i32>,
    pub scheme: Scheme,
    /// Keeps the `grad ln rho1` forcing of the velocity perturbation.
    pub forcing: bool,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig {
            mu: 0.1,
            a: 1.0,
            fr: 1.0,
            r_fric: 10.0,
            mode: Mode::Friction,
            dt: 0.02,
            t_end: 20.0,
            dealias: 2.0 / 3.0,
            cfl_max: 0.4,
            l0: None,
            scheme: Scheme::Imex1,
            forcing: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} = {v} must be positive")))
            }
        };
        pos("mu", self.mu)?;
        pos("a", self.a)?;
        pos("fr", self.fr)?;
        pos("dt", self.dt)?;
        pos("cfl_max", self.cfl_max)?;
        if !(self.t_end >= 0.0) {
            return Err(Error::Config(format!("t_end = {} must be non-negative", self.t_end)));
        }
        if !(self.r_fric >= 0.0) {
            return Err(Error::Config(format!("r_fric = {} must be non-negative", self.r_fric)));
        }
        if !(self.dealias > 0.0 && self.dealias <= 1.0) {
            return Err(Error::Config(format!("dealias = {} must lie in (0, 1]", self.dealias)));
        }
        Ok(())
    }

    /// Coefficient of `grad h2` in the velocity equation.
    pub fn pressure_coefficient(&self) -> f64 {
        match self.mode {
            Mode::ShallowWater => self.a,
            Mode::Friction => 1.0 / (self.fr * self.fr),
            Mode::HeatOnly => 0.0,
        }
    }

    /// Linear drag rate acting on the velocity perturbation.
    pub fn drag(&self) -> f64 {
        match self.mode {
            Mode::Friction => self.r_fric,
            _ => 0.0,
        }
    }

    /// Coefficient of the `-grad ln rho1` forcing: the part of the pressure (and drag) the
    /// quasi-solution does not balance.
    pub fn forcing_coefficient(&self) -> f64 {
        if !self.forcing {
            return 0.0;
        }
        match self.mode {
            Mode::ShallowWater => self.a,
            Mode::Friction => 1.0 / (self.fr * self.fr) - self.r_fric * self.mu,
            Mode::HeatOnly => 0.0,
        }
    }

    /// Whether `r mu Fr^2 = 1`, the drag/pressure balance making the quasi-solution exact.
    pub fn friction_balanced(&self) -> bool {
        crate::quasi::friction_relation_holds(self.mu, self.fr, self.r_fric)
    }

    /// Crossover block: `log2(sqrt(P') / mu)`, the scale where viscosity overtakes the
    /// acoustic coupling.
    pub fn crossover(&self) -> i32 {
        self.l0.unwrap_or_else(|| {
            let c = self.pressure_coefficient().max(f64::MIN_POSITIVE).sqrt();
            (c / self.mu).log2().floor() as i32
        })
    }
}

#[derive(Clone, Debug)]
pub struct SimState {
    pub t: f64,
    pub q1: SpectralField,
    pub h2: SpectralField,
    pub u2: SpectralField,
    /// `-mu grad ln(1 + q1)` at the current time.
    pub u1: SpectralField,
}

impl SimState {
    pub fn new(t: f64, q1: SpectralField, h2: SpectralField, u2: SpectralField, mu: f64) -> Result<SimState> {
        let g = q1.grid().clone();
        if h2.grid() != &g || u2.grid() != &g {
            return Err(Error::GridMismatch);
        }
        if q1.components() != 1 || h2.components() != 1 {
            return Err(Error::ComponentMismatch { expected: 1, found: q1.components().max(h2.components()) });
        }
        if u2.components() != g.dim() {
            return Err(Error::ComponentMismatch { expected: g.dim(), found: u2.components() });
        }
        let u1 = velocity_from_density(&HeatState { t, q1: q1.clone(), mu })?;
        Ok(SimState { t, q1, h2, u2, u1 })
    }

    pub fn heat(&self, mu: f64) -> HeatState {
        HeatState { t: self.t, q1: self.q1.clone(), mu }
    }

    /// Total velocity `u1 + u2`.
    pub fn velocity(&self) -> SpectralField {
        self.u1.add(&self.u2).expect("shapes agree")
    }

    pub fn is_finite(&self) -> bool {
        self.h2.is_finite() && self.u2.is_finite() && self.q1.is_finite()
    }
}

/// Advective CFL number `max|u| dt n / period`.
pub fn cfl_number(state: &SimState, dt: f64) -> f64 {
    let g = state.q1.grid();
    let h = g.period().iter().copied().fold(f64::INFINITY, f64::min) / g.n() as f64;
    state.velocity().max_abs() * dt / h
}

/// Applies `(1 + c dt L)` (`implicit = false`) or `(1 - c dt L)^{-1}` (`implicit = true`)
/// where `L u = mu div D(u) - r u`. The longitudinal part of `L` has symbol
/// `-(mu |xi|^2 + r)`, the transverse part `-(mu |xi|^2 / 2 + r)`.
pub fn viscous_operator(u: &SpectralField, mu: f64, drag: f64, c_dt: f64, implicit: bool) -> SpectralField {
    let g = u.grid();
    let d = g.dim();
    let f = |lam: f64| if implicit { 1.0 / (1.0 - c_dt * lam) } else { 1.0 + c_dt * lam };
    let mut out = vec![vec![Complex64::new(0.0, 0.0); g.len()]; d];
    let mut xi = vec![0.0; d];
    for i in 0..g.len() {
        let mut k2 = 0.0;
        for (ax, x) in xi.iter_mut().enumerate() {
            *x = g.xi_axis(ax)[i];
            k2 += *x * *x;
        }
        let ml = f(-(mu * k2 + drag));
        let mt = f(-(0.5 * mu * k2 + drag));
        if k2 == 0.0 {
            for ax in 0..d {
                out[ax][i] = u.coeffs(ax)[i] * mt;
            }
            continue;
        }
        let mut proj = Complex64::new(0.0, 0.0);
        for (ax, x) in xi.iter().enumerate() {
            proj += u.coeffs(ax)[i] * *x;
        }
        proj /= k2;
        for (ax, x) in xi.iter().enumerate() {
            let long = proj * *x;
            out[ax][i] = long * ml + (u.coeffs(ax)[i] - long) * mt;
        }
    }
    SpectralField::from_hermitian(g, out)
}

fn check_state(state: &SimState, next: SimState) -> Result<SimState> {
    if !next.is_finite() {
        return Err(Error::Blowup { t: next.t, last_valid: Box::new(state.clone()) });
    }
    Ok(next)
}

fn advance_heat(state: &SimState, config: &SolverConfig, dt: f64) -> Result<(SpectralField, SpectralField)> {
    let q1 = heat_multiplier(&state.q1, config.mu, dt);
    check_floor(&q1, DENSITY_FLOOR)?;
    let u1 = velocity_from_density(&HeatState { t: state.t + dt, q1: q1.clone(), mu: config.mu })?;
    Ok((q1, u1))
}

/// One IMEX step of length `config.dt`.
pub fn step(state: &SimState, config: &SolverConfig) -> Result<SimState> {
    let dt = config.dt;
    let cfl = cfl_number(state, dt);
    if cfl > config.cfl_max {
        return Err(Error::Cfl { cfl, cap: config.cfl_max });
    }
    let (q1, u1) = advance_heat(state, config, dt)?;
    let t = state.t + dt;
    if config.mode == Mode::HeatOnly {
        return check_state(state, SimState { t, q1, h2: state.h2.clone(), u2: state.u2.clone(), u1 });
    }
    let (mu, r) = (config.mu, config.drag());
    let f0 = match assemble_rhs(state, config) {
        Ok(f) => f,
        Err(Error::DensityFloor { .. }) | Err(Error::Blowup { .. }) => {
            return Err(Error::Blowup { t, last_valid: Box::new(state.clone()) })
        }
        Err(e) => return Err(e),
    };
    let h_pred = state.h2.axpy(dt, &f0.h2_rhs)?;
    let u_pred = viscous_operator(&state.u2.axpy(dt, &f0.u2_rhs)?, mu, r, dt, true);
    let predicted = SimState { t, q1, h2: h_pred, u2: u_pred, u1 };
    if config.scheme == Scheme::Imex1 || !predicted.is_finite() {
        return check_state(state, predicted);
    }
    let f1 = assemble_rhs(&predicted, config)?;
    let h2 = state.h2.axpy(0.5 * dt, &f0.h2_rhs)?.axpy(0.5 * dt, &f1.h2_rhs)?;
    let explicit = viscous_operator(&state.u2, mu, r, 0.5 * dt, false)
        .axpy(0.5 * dt, &f0.u2_rhs)?
        .axpy(0.5 * dt, &f1.u2_rhs)?;
    let u2 = viscous_operator(&explicit, mu, r, 0.5 * dt, true);
    check_state(state, SimState { t, q1: predicted.q1, h2, u2, u1: predicted.u1 })
}
