//! Recomposition, residuals of the full systems, and run-level diagnostics.

use num_complex::Complex64;
use serde::Serialize;

use crate::besov::{
    besov_minus1_infty, block_lp_norms, hybrid_from_blocks, time_block_norms, time_lebesgue, HybridBesovSpec,
};
use crate::error::{Error, Result};
use crate::lp::dyadic::DyadicFilter;
use crate::lp::field::SpectralField;
use crate::lp::ops::{div, from_values_dealiased, grad, grad_tensor, laplacian, multiply, sym_grad};
use crate::quasi::{check_floor, outer, rel, tensor_divergence, DENSITY_FLOOR};

use super::{assemble_rhs, cfl_number, Mode, SimState, SolverConfig};

/// `(rho1 e^{h2}, u1 + u2)`, both projected back onto the dealiased band.
pub fn recompose(state: &SimState) -> Result<(SpectralField, SpectralField)> {
    check_floor(&state.q1, DENSITY_FLOOR)?;
    let g = state.q1.grid();
    let vals: Vec<f64> = state.q1.values(0).iter().zip(state.h2.values(0)).map(|(q, h)| (1.0 + q) * h.exp()).collect();
    let rho = from_values_dealiased(g, vec![vals])?;
    Ok((rho, state.velocity()))
}

/// Source of `d_t h2` and `d_t u2` in [`full_residual_with`].
#[derive(Clone, Copy, Debug)]
pub enum TimeDerivative<'a> {
    /// Tendencies of the perturbation system itself (explicit part plus viscosity and drag).
    FromSystem,
    /// `d_t h2 = d_t u2 = 0`; isolates what the quasi-solution alone misses.
    Frozen,
    /// Backward difference against an earlier state, for refinement studies.
    Backward(&'a SimState),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FullResidual {
    /// Relative to the largest term of the mass equation.
    pub mass: f64,
    /// Relative to the largest term of the momentum equation.
    pub momentum: f64,
    pub mass_abs: f64,
    pub momentum_abs: f64,
}

/// `mu div D(u) - r u`.
pub fn viscous_linear(u: &SpectralField, mu: f64, drag: f64) -> Result<SpectralField> {
    Ok(tensor_divergence(&sym_grad(u)?)?.scale(mu).axpy(-drag, u)?)
}

fn l2_abs(f: &SpectralField) -> f64 {
    (f.grid().volume() * f.coeff_energy()).sqrt()
}

/// Pressure coefficient of the affine law `P = c rho` used by the full system.
fn pressure_law(config: &SolverConfig) -> f64 {
    config.pressure_coefficient()
}

/// Residuals of `d_t rho + div(rho u) = 0` and
/// `d_t(rho u) + div(rho u (x) u) - mu div(rho D u) + grad P + r rho u = 0`.
pub fn full_residual(state: &SimState, config: &SolverConfig) -> Result<FullResidual> {
    full_residual_with(state, config, TimeDerivative::FromSystem)
}

pub fn full_residual_with(state: &SimState, config: &SolverConfig, deriv: TimeDerivative) -> Result<FullResidual> {
    let g = state.q1.grid().clone();
    let mu = config.mu;
    let (rho, u) = recompose(state)?;
    let (dh, du2) = match deriv {
        TimeDerivative::Frozen => (SpectralField::zeros(&g, 1), SpectralField::zeros(&g, g.dim())),
        TimeDerivative::FromSystem => {
            if config.mode == Mode::HeatOnly {
                (SpectralField::zeros(&g, 1), SpectralField::zeros(&g, g.dim()))
            } else {
                let r = assemble_rhs(state, config)?;
                let lin = viscous_linear(&state.u2, mu, config.drag())?;
                (r.h2_rhs, r.u2_rhs.add(&lin)?)
            }
        }
        TimeDerivative::Backward(prev) => {
            let dt = state.t - prev.t;
            if !(dt > 0.0) {
                return Err(Error::UnorderedSnapshots);
            }
            (state.h2.sub(&prev.h2)?.scale(1.0 / dt), state.u2.sub(&prev.u2)?.scale(1.0 / dt))
        }
    };
    let rho1 = state.q1.shift(1.0);
    let dt_rho1 = laplacian(&state.q1)?.scale(mu);
    let eh: Vec<f64> = state.h2.values(0).iter().map(|h| h.exp()).collect();
    let eh = from_values_dealiased(&g, vec![eh])?;
    let dt_rho = multiply(&eh, &dt_rho1)?.add(&multiply(&rho, &dh)?)?;
    let ratio: Vec<f64> = dt_rho1.values(0).iter().zip(rho1.values(0)).map(|(a, b)| a / b).collect();
    let dt_u1 = grad(&from_values_dealiased(&g, vec![ratio])?)?.scale(-mu);
    let dt_u = dt_u1.add(&du2)?;
    let dt_m = multiply(&dt_rho, &u)?.add(&multiply(&rho, &dt_u)?)?;

    let m = multiply(&rho, &u)?;
    let flux = div(&m)?;
    let conv = tensor_divergence(&outer(&m, &u)?)?;
    let visc = tensor_divergence(&multiply(&rho, &sym_grad(&u)?)?)?.scale(mu);
    let pressure = grad(&rho)?.scale(pressure_law(config));
    let drag = m.scale(config.drag());

    let mass_res = dt_rho.add(&flux)?;
    let mom_res = dt_m.add(&conv)?.sub(&visc)?.add(&pressure)?.add(&drag)?;
    Ok(FullResidual {
        mass: rel(&mass_res, &[&dt_rho, &flux]),
        momentum: rel(&mom_res, &[&dt_m, &conv, &visc, &pressure, &drag]),
        mass_abs: l2_abs(&mass_res),
        momentum_abs: l2_abs(&mom_res),
    })
}

/// `int rho dx` of the recomposed density, from the samples.
pub fn total_mass(state: &SimState) -> f64 {
    let g = state.q1.grid();
    let s: f64 = state.q1.values(0).iter().zip(state.h2.values(0)).map(|(q, h)| (1.0 + q) * h.exp()).sum();
    s * g.cell_volume()
}

/// Lebesgue indices whose block norms of `q1` and `grad u1` every snapshot records.
pub const RECORDED_P: [f64; 2] = [2.0, f64::INFINITY];

#[derive(Clone, Debug, Serialize)]
pub struct BlockRecord {
    pub p: f64,
    pub q1: Vec<(i32, f64)>,
    pub grad_u1: Vec<(i32, f64)>,
}

/// Scalars and block norms of one instant; full fields are not kept.
#[derive(Clone, Debug, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub mass: f64,
    pub linf_rho_minus_1: f64,
    pub besov_u_m1_inf: f64,
    pub res_mass: f64,
    pub res_mom: f64,
    pub cfl: f64,
    pub rho1_min: f64,
    pub rho1_max: f64,
    /// `L^2` block norms of `h2` and `u2`.
    pub h2_blocks: Vec<(i32, f64)>,
    pub u2_blocks: Vec<(i32, f64)>,
    pub heat_blocks: Vec<BlockRecord>,
    pub grad_u1_linf: f64,
    pub grad_v_linf: f64,
}

/// Records a snapshot. Residuals use the system's own tendencies.
pub fn snapshot(filter: &DyadicFilter, state: &SimState, config: &SolverConfig) -> Result<Snapshot> {
    let (rho, u) = recompose(state)?;
    let res = full_residual(state, config)?;
    let gu1 = grad_tensor(&state.u1)?;
    let gv = grad_tensor(&u)?;
    let mut heat_blocks = Vec::with_capacity(RECORDED_P.len());
    for p in RECORDED_P {
        heat_blocks.push(BlockRecord {
            p,
            q1: block_lp_norms(filter, &state.q1, p)?,
            grad_u1: block_lp_norms(filter, &gu1, p)?,
        });
    }
    let rho1_min = 1.0 + state.q1.min_value(0);
    let rho1_max = 1.0 + state.q1.max_value(0);
    Ok(Snapshot {
        t: state.t,
        mass: total_mass(state),
        linf_rho_minus_1: rho.shift(-1.0).max_abs(),
        besov_u_m1_inf: besov_minus1_infty(filter, &u)?,
        res_mass: res.mass,
        res_mom: res.momentum,
        cfl: cfl_number(state, config.dt),
        rho1_min,
        rho1_max,
        h2_blocks: block_lp_norms(filter, &state.h2, 2.0)?,
        u2_blocks: block_lp_norms(filter, &state.u2, 2.0)?,
        heat_blocks,
        grad_u1_linf: gu1.max_abs(),
        grad_v_linf: gv.max_abs(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct History {
    pub dim: usize,
    /// Crossover block of the hybrid norms.
    pub l0: i32,
    pub snapshots: Vec<Snapshot>,
}

impl History {
    pub fn new(dim: usize, l0: i32) -> History {
        History { dim, l0, snapshots: Vec::new() }
    }

    pub fn push(&mut self, s: Snapshot) -> Result<()> {
        if let Some(last) = self.snapshots.last() {
            if !(s.t > last.t) {
                return Err(Error::UnorderedSnapshots);
            }
        }
        self.snapshots.push(s);
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    /// History truncated to its first `len` snapshots.
    pub fn prefix(&self, len: usize) -> History {
        History { dim: self.dim, l0: self.l0, snapshots: self.snapshots[..len.min(self.snapshots.len())].to_vec() }
    }
}

/// Largest relative deviation of the total mass from its first recorded value.
pub fn mass_drift(history: &History) -> Result<f64> {
    let first = history.snapshots.first().ok_or(Error::EmptyHistory)?;
    if history.snapshots.len() < 2 {
        return Err(Error::EmptyHistory);
    }
    let m0 = first.mass;
    Ok(history.snapshots.iter().map(|s| ((s.mass - m0) / m0).abs()).fold(0.0, f64::max))
}

/// Hybrid indices of the perturbation space at `L^2`: `(sup-in-time part, integrated part)` for `h2` and `u2`.
pub fn ft_specs(dim: usize, l0: i32) -> [(HybridBesovSpec, HybridBesovSpec); 2] {
    let n = dim as f64;
    let s_lo = n / 2.0;
    let s = n / 2.0;
    [
        (
            HybridBesovSpec::summable(s_lo - 1.0, s, 2.0, 2.0, l0),
            HybridBesovSpec::summable(s_lo + 1.0, s, 2.0, 2.0, l0),
        ),
        (
            HybridBesovSpec::summable(s_lo - 1.0, s - 1.0, 2.0, 2.0, l0),
            HybridBesovSpec::summable(s_lo + 1.0, s + 1.0, 2.0, 2.0, l0),
        ),
    ]
}

/// Sum of the four Chemin-Lerner norms measuring `(h2, u2)` over the recorded window.
pub fn ft_norm(history: &History) -> Result<f64> {
    if history.snapshots.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let times = history.times();
    let [hs, us] = ft_specs(history.dim, history.l0);
    let mut total = 0.0;
    for (blocks, (sup_spec, int_spec)) in [
        (history.snapshots.iter().map(|s| s.h2_blocks.clone()).collect::<Vec<_>>(), hs),
        (history.snapshots.iter().map(|s| s.u2_blocks.clone()).collect::<Vec<_>>(), us),
    ] {
        let sup = time_block_norms(&times, &blocks, f64::INFINITY)?;
        let int = time_block_norms(&times, &blocks, 1.0)?;
        total += hybrid_from_blocks(&sup, &sup, &sup_spec) + hybrid_from_blocks(&int, &int, &int_spec);
    }
    Ok(total)
}

/// `ft_norm` of every prefix of the history.
pub fn ft_norm_series(history: &History) -> Result<Vec<f64>> {
    (1..=history.snapshots.len()).map(|k| ft_norm(&history.prefix(k))).collect()
}

fn record(s: &Snapshot, p: f64) -> Result<&BlockRecord> {
    s.heat_blocks
        .iter()
        .find(|b| b.p == p)
        .ok_or_else(|| Error::Config(format!("no block norms recorded at p = {p}")))
}

/// Integrand of the Gronwall exponent at one snapshot, Lebesgue indices `q` (high) and `q1` (low).
pub fn gronwall_integrand(s: &Snapshot, dim: usize, l0: i32, q: f64, q1: f64) -> Result<f64> {
    let n = dim as f64;
    let (lo, hi) = (record(s, q1)?, record(s, q)?);
    let spec = |s_low: f64, s_high: f64| HybridBesovSpec {
        s_low,
        s_high,
        p_low: q1,
        p_high: q,
        r_low: f64::INFINITY,
        r_high: f64::INFINITY,
        l0,
    };
    let a = hybrid_from_blocks(&lo.q1, &hi.q1, &spec(n / q1 - 0.5, n / q + 0.5));
    let b = hybrid_from_blocks(&lo.q1, &hi.q1, &spec(n / q1 + 1.0, n / q + 2.0));
    let c = s.grad_u1_linf + hybrid_from_blocks(&lo.grad_u1, &hi.grad_u1, &spec(n / q1 - 1.0, n / q));
    Ok(a.powi(4) + b + c + s.grad_v_linf)
}

/// `V(T)`: trapezoid integral of the Gronwall integrand over the history.
pub fn gronwall_exponent(history: &History, q: f64, q1: f64) -> Result<f64> {
    if history.snapshots.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let vals = history
        .snapshots
        .iter()
        .map(|s| gronwall_integrand(s, history.dim, history.l0, q, q1))
        .collect::<Result<Vec<_>>>()?;
    Ok(time_lebesgue(&history.times(), &vals, 1.0))
}

/// Moves the coefficient at `k` to `l k`. Coefficients must vanish for `|k_i| > (n/2 - 1) / l`.
fn dilate(f: &SpectralField, l: usize) -> SpectralField {
    let g = f.grid();
    let li = l as i64;
    let coeffs = f
        .all_coeffs()
        .iter()
        .map(|c| {
            let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
            for (i, z) in c.iter().enumerate() {
                if *z != Complex64::new(0.0, 0.0) {
                    let k: Vec<i64> = g.wavevector(i).iter().map(|k| k * li).collect();
                    out[g.flatten_k(&k)] = *z;
                }
            }
            out
        })
        .collect();
    SpectralField::from_hermitian(g, coeffs)
}

fn spatial_operator(rho: &SpectralField, u: &SpectralField, mu: f64, c_p: f64, drag: f64) -> Result<(SpectralField, SpectralField)> {
    let m = multiply(rho, u)?;
    let mass = div(&m)?;
    let mom = tensor_divergence(&outer(&m, u)?)?
        .sub(&tensor_divergence(&multiply(rho, &sym_grad(u)?)?)?.scale(mu))?
        .add(&grad(rho)?.scale(c_p))?
        .add(&m.scale(drag))?;
    Ok((mass, mom))
}

/// Equivariance defect of the spatial operator under `(rho, u)(x) -> (rho(l x), l u(l x))`
/// with the pressure (and drag) coefficient multiplied by `l^2`.
pub fn scaling_check(state: &SimState, config: &SolverConfig, l_factor: usize) -> Result<f64> {
    scaling_check_with(state, config, l_factor, true)
}

/// As [`scaling_check`]; `adjust = false` keeps the pressure and drag unchanged.
pub fn scaling_check_with(state: &SimState, config: &SolverConfig, l_factor: usize, adjust: bool) -> Result<f64> {
    if l_factor == 0 || !l_factor.is_power_of_two() {
        return Err(Error::IncompatibleScaling(format!("factor {l_factor} is not a power of two")));
    }
    let g = state.q1.grid().clone();
    let kmax = g.dealias_cutoff() / (3 * l_factor as i64);
    if kmax < 1 {
        return Err(Error::IncompatibleScaling(format!(
            "factor {l_factor} leaves no modes below the dealiasing cutoff {}",
            g.dealias_cutoff()
        )));
    }
    let (rho, u) = recompose(state)?;
    let keep: Vec<f64> =
        (0..g.len()).map(|i| if g.wavevector(i).iter().all(|k| k.abs() <= kmax) { 1.0 } else { 0.0 }).collect();
    let rho = rho.apply_multiplier(|i| keep[i]);
    let u = u.apply_multiplier(|i| keep[i]);
    let (c_p, drag) = (pressure_law(config), config.drag());
    let (mass, mom) = spatial_operator(&rho, &u, config.mu, c_p, drag)?;
    let l = l_factor as f64;
    let adj = if adjust { l * l } else { 1.0 };
    let (mass_l, mom_l) =
        spatial_operator(&dilate(&rho, l_factor), &dilate(&u, l_factor).scale(l), config.mu, adj * c_p, adj * drag)?;
    let want_mass = dilate(&mass, l_factor).scale(l * l);
    let want_mom = dilate(&mom, l_factor).scale(l * l * l);
    let d = |a: &SpectralField, b: &SpectralField| -> Result<f64> {
        let scale = b.coeff_energy().sqrt();
        let diff = a.sub(b)?.coeff_energy().sqrt();
        Ok(if scale == 0.0 { diff } else { diff / scale })
    };
    Ok(d(&mass_l, &want_mass)?.max(d(&mom_l, &want_mom)?))
}
