//! Bony decomposition `uv = T_u v + T_v u + R(u, v)` and ratio diagnostics for the
//! product, paraproduct and composition estimates.
//!
//! Zero-mode convention: the low-frequency cut-off used inside `T_u v` carries the mean
//! of `u`, and `R(u, v)` carries the product of the means, so the three pieces add up to
//! the dealiased product exactly.

use crate::besov::{block_lp_norms, besov_norm, hybrid_besov_norm, lp_norm, weighted_block_sum, BesovSpec, HybridBesovSpec};
use crate::error::{Error, Result};
use crate::lp::dyadic::DyadicFilter;
use crate::lp::field::SpectralField;
use crate::lp::ops::{from_values_dealiased, map_pointwise, multiply};
use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct BonyParts {
    pub tuv: SpectralField,
    pub tvu: SpectralField,
    pub ruv: SpectralField,
}

impl BonyParts {
    pub fn sum(&self) -> SpectralField {
        self.tuv.add(&self.tvu).and_then(|s| s.add(&self.ruv)).expect("parts share a grid")
    }
}

fn scalar_pair(filter: &DyadicFilter, u: &SpectralField, v: &SpectralField) -> Result<()> {
    u.same_grid(v)?;
    if u.grid() != filter.grid() {
        return Err(Error::GridMismatch);
    }
    for f in [u, v] {
        if f.components() != 1 {
            return Err(Error::ComponentMismatch { expected: 1, found: f.components() });
        }
    }
    Ok(())
}

/// Samples of every block `Delta_l u`, indexed from `l_min`; empty blocks are `None`.
fn block_samples(filter: &DyadicFilter, u: &SpectralField) -> Result<Vec<Option<Vec<f64>>>> {
    let g = u.grid();
    filter
        .levels()
        .map(|l| {
            let w = filter.weights(l)?;
            if w.is_empty() {
                return Ok(None);
            }
            let mut buf = vec![Complex64::new(0.0, 0.0); g.len()];
            for &(i, wt) in w {
                buf[i as usize] = u.coeffs(0)[i as usize] * wt;
            }
            g.fft_inverse(&mut buf);
            Ok(Some(buf.into_iter().map(|z| z.re).collect()))
        })
        .collect()
}

fn accumulate(acc: &mut [f64], a: &[f64], b: &[f64]) {
    for ((o, x), y) in acc.iter_mut().zip(a).zip(b) {
        *o += x * y;
    }
}

fn para_from_blocks(mean_u: f64, bu: &[Option<Vec<f64>>], bv: &[Option<Vec<f64>>], len: usize) -> Vec<f64> {
    let mut acc = vec![0.0; len];
    let mut low = vec![mean_u; len];
    for q in 0..bv.len() {
        if q >= 2 {
            if let Some(b) = &bu[q - 2] {
                low.iter_mut().zip(b).for_each(|(o, x)| *o += x);
            }
        }
        if let Some(v) = &bv[q] {
            accumulate(&mut acc, &low, v);
        }
    }
    acc
}

/// `T_u v = sum_q S_{q-1} u Delta_q v`, with `S_{q-1}` including the mean of `u`.
pub fn para(filter: &DyadicFilter, u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    scalar_pair(filter, u, v)?;
    let bu = block_samples(filter, u)?;
    let bv = block_samples(filter, v)?;
    let acc = para_from_blocks(u.mean(0), &bu, &bv, u.grid().len());
    from_values_dealiased(u.grid(), vec![acc])
}

fn remainder_from_blocks(means: f64, bu: &[Option<Vec<f64>>], bv: &[Option<Vec<f64>>], len: usize) -> Vec<f64> {
    let mut acc = vec![means; len];
    for q in 0..bu.len() {
        let Some(a) = &bu[q] else { continue };
        let mut near = vec![0.0; len];
        for k in q.saturating_sub(1)..=(q + 1).min(bv.len() - 1) {
            if let Some(b) = &bv[k] {
                near.iter_mut().zip(b).for_each(|(o, x)| *o += x);
            }
        }
        accumulate(&mut acc, a, &near);
    }
    acc
}

/// `R(u, v) = mean(u) mean(v) + sum_q Delta_q u (Delta_{q-1} v + Delta_q v + Delta_{q+1} v)`.
pub fn remainder(filter: &DyadicFilter, u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    scalar_pair(filter, u, v)?;
    let bu = block_samples(filter, u)?;
    let bv = block_samples(filter, v)?;
    let acc = remainder_from_blocks(u.mean(0) * v.mean(0), &bu, &bv, u.grid().len());
    from_values_dealiased(u.grid(), vec![acc])
}

pub fn bony(filter: &DyadicFilter, u: &SpectralField, v: &SpectralField) -> Result<BonyParts> {
    scalar_pair(filter, u, v)?;
    let len = u.grid().len();
    let bu = block_samples(filter, u)?;
    let bv = block_samples(filter, v)?;
    let g = u.grid();
    Ok(BonyParts {
        tuv: from_values_dealiased(g, vec![para_from_blocks(u.mean(0), &bu, &bv, len)])?,
        tvu: from_values_dealiased(g, vec![para_from_blocks(v.mean(0), &bv, &bu, len)])?,
        ruv: from_values_dealiased(g, vec![remainder_from_blocks(u.mean(0) * v.mean(0), &bu, &bv, len)])?,
    })
}

/// Product law used as the denominator of [`product_law_ratio`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProductLaw {
    /// `|uv| <= C (|u|_inf |v|_{spec_v} + |v|_inf |u|_{spec_u})`
    Tame,
    /// `|uv| <= C |u|_{spec_u} (|v|_{spec_v} + |v|_inf)`
    Multiplier,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    if den > 0.0 && den.is_finite() {
        Some(num / den)
    } else {
        None
    }
}

/// `|uv|_{spec_out}` over the right side of `law`; `None` when the right side vanishes.
pub fn product_law_ratio(
    filter: &DyadicFilter,
    u: &SpectralField,
    v: &SpectralField,
    spec_out: BesovSpec,
    spec_u: BesovSpec,
    spec_v: BesovSpec,
    law: ProductLaw,
) -> Result<Option<f64>> {
    scalar_pair(filter, u, v)?;
    let uv = multiply(u, v)?;
    let num = besov_norm(filter, &uv, spec_out)?;
    let nu = besov_norm(filter, u, spec_u)?;
    let nv = besov_norm(filter, v, spec_v)?;
    let iu = lp_norm(u, f64::INFINITY);
    let iv = lp_norm(v, f64::INFINITY);
    let den = match law {
        ProductLaw::Tame => iu * nv + iv * nu,
        ProductLaw::Multiplier => nu * (nv + iv),
    };
    Ok(ratio(num, den))
}

/// Which hybrid paraproduct estimate [`hybrid_para_ratio`] evaluates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HybridEstimate {
    /// `|T_u v|_{out} <= C |u|_{hu} |v|_{hv}`
    Para,
    /// high blocks (`l > l0` of the output spec) of `R(u, v)` against `|u|_{hu} |v|_{hv}`
    RemainderHigh,
    /// low blocks (`l <= l0`) of `R(u, v)` against `|u|_{hu} |v|_{hv}`
    RemainderLow,
    /// `|T_u v|_{out} <= C |u|_inf |v|_{hv}`
    ParaBounded,
    /// `|R(u, v)|_{out} <= C |u|_inf |v|_{hv}`
    RemainderBounded,
}

pub fn hybrid_para_ratio(
    filter: &DyadicFilter,
    u: &SpectralField,
    v: &SpectralField,
    estimate: HybridEstimate,
    out: HybridBesovSpec,
    hu: HybridBesovSpec,
    hv: HybridBesovSpec,
) -> Result<Option<f64>> {
    scalar_pair(filter, u, v)?;
    out.validate(filter)?;
    let nv = hybrid_besov_norm(filter, v, hv)?;
    let num = match estimate {
        HybridEstimate::Para | HybridEstimate::ParaBounded => hybrid_besov_norm(filter, &para(filter, u, v)?, out)?,
        HybridEstimate::RemainderBounded => hybrid_besov_norm(filter, &remainder(filter, u, v)?, out)?,
        HybridEstimate::RemainderHigh => {
            let r = remainder(filter, u, v)?;
            let b = block_lp_norms(filter, &r, out.p_high)?;
            weighted_block_sum(b.iter().filter(|(l, _)| *l > out.l0), out.s_high, out.r_high)
        }
        HybridEstimate::RemainderLow => {
            let r = remainder(filter, u, v)?;
            let b = block_lp_norms(filter, &r, out.p_low)?;
            weighted_block_sum(b.iter().filter(|(l, _)| *l <= out.l0), out.s_low, out.r_low)
        }
    };
    let left = match estimate {
        HybridEstimate::ParaBounded | HybridEstimate::RemainderBounded => lp_norm(u, f64::INFINITY),
        _ => hybrid_besov_norm(filter, u, hu)?,
    };
    Ok(ratio(num, left * nv))
}

/// `|e^u - 1|_{B^s_{p,1}} / |u|_{B^s_{p,1}}` and `|e^u - 1 - u|_{B^s_{p,1}} / |u|^2_{B^s_{p,1}}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompositionRatios {
    pub linear: Option<f64>,
    pub quadratic: Option<f64>,
}

/// Largest admissible `|u|_inf` for the composition diagnostic.
pub const COMPOSITION_BOUND: f64 = 2.0;

pub fn composition_ratio(filter: &DyadicFilter, u: &SpectralField, s: f64, p: f64) -> Result<CompositionRatios> {
    let sup = lp_norm(u, f64::INFINITY);
    if sup > COMPOSITION_BOUND {
        return Err(Error::AmplitudeBound { found: sup, limit: COMPOSITION_BOUND });
    }
    let spec = BesovSpec::new(s, p, 1.0)?;
    let f = map_pointwise(u, f64::exp_m1)?;
    let nu = besov_norm(filter, u, spec)?;
    let nf = besov_norm(filter, &f, spec)?;
    let nq = besov_norm(filter, &f.sub(&u.dealiased())?, spec)?;
    Ok(CompositionRatios { linear: ratio(nf, nu), quadratic: ratio(nq, nu * nu) })
}
