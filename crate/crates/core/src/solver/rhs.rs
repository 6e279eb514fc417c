//! Explicit right-hand sides of the perturbation equations.

use crate::error::Result;
use crate::lp::field::SpectralField;
use crate::lp::ops::{from_values_dealiased, grad, grad_tensor};

use super::{SimState, SolverConfig};

/// Explicit tendencies of `h2` and `u2`. Viscosity `mu div D(u2)` and drag `-r u2` are
/// linear and handled by the implicit stage, so they are not part of `u2_rhs`.
#[derive(Clone, Debug)]
pub struct RhsTerms {
    pub h2_rhs: SpectralField,
    pub u2_rhs: SpectralField,
    /// Individual contributions, filled by [`rhs_terms`].
    pub h2_parts: Vec<(&'static str, SpectralField)>,
    pub u2_parts: Vec<(&'static str, SpectralField)>,
}

/// Summed tendencies, one dealiasing pass per component.
pub fn assemble_rhs(state: &SimState, config: &SolverConfig) -> Result<RhsTerms> {
    build(state, config, false)
}

/// Same as [`assemble_rhs`] with every named contribution kept separately.
pub fn rhs_terms(state: &SimState, config: &SolverConfig) -> Result<RhsTerms> {
    build(state, config, true)
}

fn acc(dst: &mut [f64], s: f64, a: &[f64], b: &[f64]) {
    for ((d, x), y) in dst.iter_mut().zip(a).zip(b) {
        *d += s * x * y;
    }
}

fn build(state: &SimState, config: &SolverConfig, keep: bool) -> Result<RhsTerms> {
    let g = state.q1.grid().clone();
    let d = g.dim();
    let n = g.len();
    let mu = config.mu;
    let u = state.velocity();
    let grad_h = grad(&state.h2)?;
    let grad_u2 = grad_tensor(&state.u2)?;
    // u1 is a gradient, so its gradient tensor is already symmetric.
    let du1 = grad_tensor(&state.u1)?;
    let du2 = |i: usize, j: usize| -> Vec<f64> {
        grad_u2.values(i * d + j).iter().zip(grad_u2.values(j * d + i)).map(|(a, b)| 0.5 * (a + b)).collect()
    };
    let du2: Vec<Vec<f64>> = (0..d * d).map(|k| du2(k / d, k % d)).collect();
    // grad ln rho1 = -u1 / mu
    let gl: Vec<Vec<f64>> = (0..d).map(|c| state.u1.values(c).iter().map(|x| -x / mu).collect()).collect();

    // h2 terms
    let mut h_adv = vec![0.0; n];
    let mut h_cmp = vec![0.0; n];
    let mut h_log = vec![0.0; n];
    for j in 0..d {
        acc(&mut h_adv, -1.0, u.values(j), grad_h.values(j));
        for (a, x) in h_cmp.iter_mut().zip(grad_u2.values(j * d + j)) {
            *a -= x;
        }
        acc(&mut h_log, -1.0, state.u2.values(j), &gl[j]);
    }

    // u2 terms, (g . T)_i = sum_j g_j T_{ji}
    let names = ["advection", "stretching", "viscous_log_density", "viscous_h_u1", "viscous_h_u2"];
    let mut parts = vec![vec![vec![0.0; n]; d]; names.len()];
    for i in 0..d {
        for j in 0..d {
            acc(&mut parts[0][i], -1.0, u.values(j), grad_u2.values(j * d + i));
            acc(&mut parts[1][i], -1.0, state.u2.values(j), du1.values(j * d + i));
            acc(&mut parts[2][i], mu, &gl[j], &du2[j * d + i]);
            acc(&mut parts[3][i], mu, grad_h.values(j), du1.values(j * d + i));
            acc(&mut parts[4][i], mu, grad_h.values(j), &du2[j * d + i]);
        }
    }
    let pressure = grad_h.scale(-config.pressure_coefficient());
    let forcing = state.u1.scale(config.forcing_coefficient() / mu);

    let (h2_parts, u2_parts, h2_rhs, u2_rhs);
    if keep {
        let hp = vec![
            ("advection", from_values_dealiased(&g, vec![h_adv])?),
            ("compression", from_values_dealiased(&g, vec![h_cmp])?),
            ("log_density_coupling", from_values_dealiased(&g, vec![h_log])?),
        ];
        let mut up = Vec::with_capacity(7);
        for (name, vals) in names.iter().zip(parts) {
            up.push((*name, from_values_dealiased(&g, vals)?));
        }
        up.insert(1, ("pressure", pressure));
        up.insert(4, ("forcing", forcing));
        let mut hs = SpectralField::zeros(&g, 1);
        for (_, f) in &hp {
            hs = hs.add(f)?;
        }
        let mut us = SpectralField::zeros(&g, d);
        for (_, f) in &up {
            us = us.add(f)?;
        }
        h2_rhs = hs;
        u2_rhs = us;
        h2_parts = hp;
        u2_parts = up;
    } else {
        let hv: Vec<f64> = (0..n).map(|k| h_adv[k] + h_cmp[k] + h_log[k]).collect();
        h2_rhs = from_values_dealiased(&g, vec![hv])?;
        let mut uv = vec![vec![0.0; n]; d];
        for p in &parts {
            for (o, c) in uv.iter_mut().zip(p) {
                for (a, x) in o.iter_mut().zip(c) {
                    *a += x;
                }
            }
        }
        u2_rhs = from_values_dealiased(&g, uv)?.add(&pressure)?.add(&forcing)?;
        h2_parts = Vec::new();
        u2_parts = Vec::new();
    }
    Ok(RhsTerms { h2_rhs, u2_rhs, h2_parts, u2_parts })
}
