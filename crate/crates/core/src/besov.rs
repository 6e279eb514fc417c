//! Homogeneous, hybrid and time-integrated Besov norms.
//!
//! Lebesgue norms use volume-weighted quadrature, `|u|_p = (sum_x |u(x)|^p dV)^{1/p}`,
//! so a constant `c` has norm `|c| vol^{1/p}` and `p = inf` is the largest sample.
//! Vector and tensor fields use the pointwise Euclidean magnitude. Block sums run over
//! the filter range; the mean is excluded.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::dyadic::DyadicFilter;
use crate::lp::field::SpectralField;

/// Fraction of L2 mass outside the resolved blocks above which a warning is logged.
pub const STALE_FRACTION: f64 = 1e-3;

fn check_index(name: &str, v: f64) -> Result<()> {
    if v.is_nan() || v < 1.0 {
        return Err(Error::InvalidSpec(format!("{name} = {v} must lie in [1, inf]")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovSpec {
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

impl BesovSpec {
    pub fn new(s: f64, p: f64, r: f64) -> Result<BesovSpec> {
        let spec = BesovSpec { s, p, r };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(Error::InvalidSpec(format!("s = {} must be finite", self.s)));
        }
        check_index("p", self.p)?;
        check_index("r", self.r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HybridBesovSpec {
    pub s_low: f64,
    pub s_high: f64,
    pub p_low: f64,
    pub p_high: f64,
    pub r_low: f64,
    pub r_high: f64,
    pub l0: i32,
}

impl HybridBesovSpec {
    /// Summable (`r = 1`) hybrid norm with regularities `s_low`, `s_high`.
    pub fn summable(s_low: f64, s_high: f64, p_low: f64, p_high: f64, l0: i32) -> HybridBesovSpec {
        HybridBesovSpec { s_low, s_high, p_low, p_high, r_low: 1.0, r_high: 1.0, l0 }
    }

    pub fn uniform(spec: BesovSpec, l0: i32) -> HybridBesovSpec {
        HybridBesovSpec {
            s_low: spec.s,
            s_high: spec.s,
            p_low: spec.p,
            p_high: spec.p,
            r_low: spec.r,
            r_high: spec.r,
            l0,
        }
    }

    pub fn low(&self) -> BesovSpec {
        BesovSpec { s: self.s_low, p: self.p_low, r: self.r_low }
    }

    pub fn high(&self) -> BesovSpec {
        BesovSpec { s: self.s_high, p: self.p_high, r: self.r_high }
    }

    pub fn validate(&self, filter: &DyadicFilter) -> Result<()> {
        self.low().validate()?;
        self.high().validate()?;
        if self.l0 < filter.l_min() - 1 || self.l0 > filter.l_max() {
            return Err(Error::BlockOutOfRange {
                l: self.l0,
                l_min: filter.l_min() - 1,
                l_max: filter.l_max(),
            });
        }
        Ok(())
    }
}

fn lp_of_samples(samples: &[f64], p: f64, cell: f64) -> f64 {
    if p.is_infinite() {
        samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else if p == 1.0 {
        samples.iter().map(|v| v.abs()).sum::<f64>() * cell
    } else if p == 2.0 {
        (samples.iter().map(|v| v * v).sum::<f64>() * cell).sqrt()
    } else {
        (samples.iter().map(|v| v.abs().powf(p)).sum::<f64>() * cell).powf(1.0 / p)
    }
}

/// Pointwise magnitude across components.
fn magnitude(values: &[Vec<f64>]) -> Vec<f64> {
    if values.len() == 1 {
        return values[0].clone();
    }
    let mut out = vec![0.0; values[0].len()];
    for c in values {
        for (o, v) in out.iter_mut().zip(c) {
            *o += v * v;
        }
    }
    out.iter_mut().for_each(|v| *v = v.sqrt());
    out
}

pub fn lp_norm(field: &SpectralField, p: f64) -> f64 {
    lp_of_samples(&magnitude(field.all_values()), p, field.grid().cell_volume())
}

/// L2 norm through Parseval: `vol^{1/2} (sum_k |c_k|^2)^{1/2}`.
pub fn l2_parseval(field: &SpectralField) -> f64 {
    (field.grid().volume() * field.coeff_energy()).sqrt()
}

/// `|Delta_l u|_{L^p}` for every level holding lattice points.
pub fn block_lp_norms(filter: &DyadicFilter, field: &SpectralField, p: f64) -> Result<Vec<(i32, f64)>> {
    if field.grid() != filter.grid() {
        return Err(Error::GridMismatch);
    }
    let g = field.grid();
    let mut out = Vec::new();
    for l in filter.active_levels() {
        let w = filter.weights(l)?;
        let norm = if p == 2.0 {
            let e: f64 = field
                .all_coeffs()
                .iter()
                .map(|c| w.iter().map(|&(i, wt)| (c[i as usize] * wt).norm_sqr()).sum::<f64>())
                .sum();
            (g.volume() * e).sqrt()
        } else {
            let vals: Vec<Vec<f64>> = field
                .all_coeffs()
                .iter()
                .map(|c| {
                    let mut buf = vec![Complex64::new(0.0, 0.0); g.len()];
                    for &(i, wt) in w {
                        buf[i as usize] = c[i as usize] * wt;
                    }
                    g.fft_inverse(&mut buf);
                    buf.into_iter().map(|z| z.re).collect()
                })
                .collect();
            lp_of_samples(&magnitude(&vals), p, g.cell_volume())
        };
        out.push((l, norm));
    }
    Ok(out)
}

/// `(sum_l (2^{ls} b_l)^r)^{1/r}` over the supplied block norms.
pub fn weighted_block_sum<'a>(blocks: impl Iterator<Item = &'a (i32, f64)>, s: f64, r: f64) -> f64 {
    let terms = blocks.map(|&(l, b)| 2f64.powf(l as f64 * s) * b);
    if r.is_infinite() {
        terms.fold(0.0, f64::max)
    } else if r == 1.0 {
        terms.sum()
    } else {
        terms.map(|t| t.powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

fn warn_if_stale(filter: &DyadicFilter, field: &SpectralField) {
    let miss = filter.unresolved_fraction(field);
    if miss > STALE_FRACTION {
        log::warn!("{:.2}% of the L2 mass lies outside the resolved dyadic blocks", 100.0 * miss);
    }
}

pub fn besov_norm(filter: &DyadicFilter, field: &SpectralField, spec: BesovSpec) -> Result<f64> {
    spec.validate()?;
    warn_if_stale(filter, field);
    let blocks = block_lp_norms(filter, field, spec.p)?;
    Ok(weighted_block_sum(blocks.iter(), spec.s, spec.r))
}

/// Hybrid norm from precomputed block norms at the low and high Lebesgue indices.
pub fn hybrid_from_blocks(low: &[(i32, f64)], high: &[(i32, f64)], h: &HybridBesovSpec) -> f64 {
    weighted_block_sum(low.iter().filter(|(l, _)| *l <= h.l0), h.s_low, h.r_low)
        + weighted_block_sum(high.iter().filter(|(l, _)| *l > h.l0), h.s_high, h.r_high)
}

pub fn hybrid_besov_norm(filter: &DyadicFilter, field: &SpectralField, h: HybridBesovSpec) -> Result<f64> {
    h.validate(filter)?;
    warn_if_stale(filter, field);
    let low = block_lp_norms(filter, field, h.p_low)?;
    let high = if h.p_high == h.p_low { low.clone() } else { block_lp_norms(filter, field, h.p_high)? };
    Ok(hybrid_from_blocks(&low, &high, &h))
}

/// `(sum_{l <= l0} Delta_l u, sum_{l > l0} Delta_l u)`.
pub fn freq_split(filter: &DyadicFilter, field: &SpectralField, l0: i32) -> Result<(SpectralField, SpectralField)> {
    if field.grid() != filter.grid() {
        return Err(Error::GridMismatch);
    }
    if l0 < filter.l_min() - 1 || l0 > filter.l_max() {
        return Err(Error::BlockOutOfRange { l: l0, l_min: filter.l_min() - 1, l_max: filter.l_max() });
    }
    let n = field.grid().len();
    let (mut lo, mut hi) = (vec![0.0; n], vec![0.0; n]);
    for l in filter.levels() {
        let target = if l <= l0 { &mut lo } else { &mut hi };
        for &(i, w) in filter.weights(l)? {
            target[i as usize] += w;
        }
    }
    Ok((field.apply_multiplier(|i| lo[i]), field.apply_multiplier(|i| hi[i])))
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::EmptyHistory);
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::UnorderedSnapshots);
    }
    Ok(())
}

/// `L^rho` norm in time of a sampled series; trapezoid rule, `rho = inf` is the sup.
pub fn time_lebesgue(times: &[f64], values: &[f64], rho: f64) -> f64 {
    if rho.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let mut acc = 0.0;
    for k in 1..times.len() {
        let dt = times[k] - times[k - 1];
        acc += 0.5 * dt * (values[k].abs().powf(rho) + values[k - 1].abs().powf(rho));
    }
    acc.powf(1.0 / rho)
}

/// Per-level `|Delta_l u|_{L^rho_T(L^p)}` from per-snapshot block norms.
pub fn time_block_norms(times: &[f64], per_snapshot: &[Vec<(i32, f64)>], rho: f64) -> Result<Vec<(i32, f64)>> {
    check_times(times)?;
    if per_snapshot.len() != times.len() {
        return Err(Error::SizeMismatch { expected: times.len(), found: per_snapshot.len() });
    }
    let levels: Vec<i32> = per_snapshot[0].iter().map(|(l, _)| *l).collect();
    let mut out = Vec::with_capacity(levels.len());
    for (k, &l) in levels.iter().enumerate() {
        let series: Vec<f64> = per_snapshot.iter().map(|b| b[k].1).collect();
        out.push((l, time_lebesgue(times, &series, rho)));
    }
    Ok(out)
}

/// Chemin-Lerner norm: time `L^rho` per block first, then the weighted block sum.
pub fn time_besov_norm(
    filter: &DyadicFilter,
    snapshots: &[(f64, &SpectralField)],
    rho: f64,
    spec: BesovSpec,
) -> Result<f64> {
    spec.validate()?;
    check_index("rho", rho)?;
    let times: Vec<f64> = snapshots.iter().map(|(t, _)| *t).collect();
    check_times(&times)?;
    let blocks = snapshots
        .iter()
        .map(|(_, f)| block_lp_norms(filter, f, spec.p))
        .collect::<Result<Vec<_>>>()?;
    let tb = time_block_norms(&times, &blocks, rho)?;
    Ok(weighted_block_sum(tb.iter(), spec.s, spec.r))
}

/// Chemin-Lerner norm with hybrid indices.
pub fn time_hybrid_norm(
    filter: &DyadicFilter,
    snapshots: &[(f64, &SpectralField)],
    rho: f64,
    h: HybridBesovSpec,
) -> Result<f64> {
    h.validate(filter)?;
    check_index("rho", rho)?;
    let times: Vec<f64> = snapshots.iter().map(|(t, _)| *t).collect();
    check_times(&times)?;
    let per = |p: f64| -> Result<Vec<(i32, f64)>> {
        let blocks = snapshots
            .iter()
            .map(|(_, f)| block_lp_norms(filter, f, p))
            .collect::<Result<Vec<_>>>()?;
        time_block_norms(&times, &blocks, rho)
    };
    let low = per(h.p_low)?;
    let high = if h.p_high == h.p_low { low.clone() } else { per(h.p_high)? };
    Ok(hybrid_from_blocks(&low, &high, &h))
}

/// Plain Bochner norm `L^rho_T(B^s_{p,r})`: Besov norm per snapshot, then time `L^rho`.
pub fn bochner_norm(
    filter: &DyadicFilter,
    snapshots: &[(f64, &SpectralField)],
    rho: f64,
    spec: BesovSpec,
) -> Result<f64> {
    let times: Vec<f64> = snapshots.iter().map(|(t, _)| *t).collect();
    check_times(&times)?;
    let vals = snapshots
        .iter()
        .map(|(_, f)| besov_norm(filter, f, spec))
        .collect::<Result<Vec<_>>>()?;
    Ok(time_lebesgue(&times, &vals, rho))
}

/// `sup_l 2^{-l} |Delta_l u|_{L^inf}`.
pub fn besov_minus1_infty(filter: &DyadicFilter, field: &SpectralField) -> Result<f64> {
    besov_norm(filter, field, BesovSpec { s: -1.0, p: f64::INFINITY, r: f64::INFINITY })
}

/// Semigroup quantity and the matching negative-regularity Besov norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeatCharacterization {
    pub semigroup: f64,
    pub besov: f64,
}

impl HeatCharacterization {
    /// `(semigroup / besov, besov / semigroup)`; `None` for the zero field.
    pub fn ratios(&self) -> Option<(f64, f64)> {
        if self.semigroup == 0.0 || self.besov == 0.0 {
            None
        } else {
            Some((self.semigroup / self.besov, self.besov / self.semigroup))
        }
    }
}

/// Time window `[t_min, t_max]` covering the active blocks of `field` with a margin.
pub fn heat_window(filter: &DyadicFilter, field: &SpectralField) -> Option<(f64, f64)> {
    let blocks = block_lp_norms(filter, field, 2.0).ok()?;
    let top = blocks.iter().map(|(_, b)| *b).fold(0.0, f64::max);
    let active: Vec<i32> = blocks.iter().filter(|(_, b)| *b > 1e-14 * top && top > 0.0).map(|(l, _)| *l).collect();
    let lo = *active.first()?;
    let hi = *active.last()?;
    Some((4f64.powi(-hi) / 64.0, 4f64.powi(-lo) * 64.0))
}

/// Evaluates `| |t^s e^{t Lap} u|_{L^p} |_{L^r(dt/t)}` on a log-spaced window and compares
/// it with `|u|_{B^{-2s}_{p,r}}`. Returns `Ok(None)`-style degeneracy through
/// [`HeatCharacterization::ratios`].
pub fn heat_characterization_ratio(
    filter: &DyadicFilter,
    field: &SpectralField,
    s: f64,
    p: f64,
    r: f64,
) -> Result<HeatCharacterization> {
    let spec = BesovSpec::new(-2.0 * s, p, r)?;
    if !(s > 0.0) {
        return Err(Error::InvalidSpec(format!("s = {s} must be positive")));
    }
    let besov = besov_norm(filter, field, spec)?;
    let Some((t0, t1)) = heat_window(filter, field) else {
        return Ok(HeatCharacterization { semigroup: 0.0, besov });
    };
    heat_characterization_window(filter, field, s, p, r, t0, t1, 24)
}

/// As [`heat_characterization_ratio`] with an explicit window and samples per octave of t.
#[allow(clippy::too_many_arguments)]
pub fn heat_characterization_window(
    filter: &DyadicFilter,
    field: &SpectralField,
    s: f64,
    p: f64,
    r: f64,
    t_min: f64,
    t_max: f64,
    per_octave: usize,
) -> Result<HeatCharacterization> {
    let spec = BesovSpec::new(-2.0 * s, p, r)?;
    let besov = besov_norm(filter, field, spec)?;
    if let Some((need0, need1)) = heat_window(filter, field) {
        if t_min > need0 * 1.0001 || t_max < need1 / 1.0001 {
            return Err(Error::Window(format!(
                "[{t_min:.3e}, {t_max:.3e}] does not cover the active blocks ([{need0:.3e}, {need1:.3e}] required)"
            )));
        }
    } else {
        return Ok(HeatCharacterization { semigroup: 0.0, besov });
    }
    let g = field.grid();
    let centred = field.apply_multiplier(|i| if i == 0 { 0.0 } else { 1.0 });
    let octaves = (t_max / t_min).log2();
    let samples = ((octaves * per_octave as f64).ceil() as usize).max(2);
    let h = (t_max / t_min).ln() / (samples - 1) as f64;
    let mut vals = Vec::with_capacity(samples);
    for k in 0..samples {
        let t = t_min * (h * k as f64).exp();
        let xs = g.xi_sq();
        let evolved = centred.apply_multiplier(|i| (-t * xs[i]).exp());
        vals.push(t.powf(s) * lp_norm(&evolved, p));
    }
    let semigroup = if r.is_infinite() {
        vals.iter().fold(0.0, |m: f64, v| m.max(*v))
    } else {
        // trapezoid in ln t
        let mut acc = 0.0;
        for k in 1..samples {
            acc += 0.5 * h * (vals[k].powf(r) + vals[k - 1].powf(r));
        }
        acc.powf(1.0 / r)
    };
    Ok(HeatCharacterization { semigroup, besov })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::dyadic::{block_weight, default_filter};
    use crate::lp::grid::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn constant_lp_norm_scales_with_volume() {
        let g = make_grid(2, 16, 3.0).unwrap();
        let c = SpectralField::constant(&g, -2.0);
        for p in [1.0, 2.0, 3.5] {
            assert!((lp_norm(&c, p) - 2.0 * 9f64.powf(1.0 / p)).abs() < 1e-12);
        }
        assert_eq!(lp_norm(&c, f64::INFINITY), 2.0);
        assert_eq!(lp_norm(&SpectralField::zeros(&g, 2), 3.0), 0.0);
    }

    #[test]
    fn cosine_two_block_norm() {
        let g = make_grid(1, 256, 2.0 * PI).unwrap();
        let f = default_filter(&g).unwrap();
        let u = SpectralField::scalar_from_fn(&g, |x| (8.0 * x[0]).cos());
        let s = 0.7;
        let got = besov_norm(&f, &u, BesovSpec::new(s, 2.0, 1.0).unwrap()).unwrap();
        // |cos(8x)|_{L^2} = sqrt(pi); each block scales it by phi(2^{-l} 8)
        let expect: f64 = [2, 3]
            .iter()
            .map(|&l| 2f64.powf(l as f64 * s) * block_weight(8.0, l) * PI.sqrt())
            .sum();
        assert!((got - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn minus_one_infinity_norm_of_single_block() {
        let g = make_grid(1, 256, 2.0 * PI).unwrap();
        let f = default_filter(&g).unwrap();
        let u = SpectralField::scalar_from_fn(&g, |x| (8.0 * x[0]).cos());
        let got = besov_minus1_infty(&f, &u).unwrap();
        let expect = [2, 3]
            .iter()
            .map(|&l| 2f64.powi(-l) * block_weight(8.0, l))
            .fold(0.0, f64::max);
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn single_mode_heat_characterization_matches_closed_form() {
        // p = r = 2, s = 1: int t^2 e^{-2 t k^2} |u|_2^2 dt/t = (2k^2)^{-2} |u|_2^2
        let g = make_grid(1, 128, 2.0 * PI).unwrap();
        let f = default_filter(&g).unwrap();
        let k = 6.0;
        let u = SpectralField::scalar_from_fn(&g, |x| (k * x[0]).sin());
        let hc = heat_characterization_window(&f, &u, 1.0, 2.0, 2.0, 1e-6, 1e3, 48).unwrap();
        let exact = PI.sqrt() / (2.0 * k * k);
        assert!((hc.semigroup - exact).abs() < 1e-6 * exact, "{} vs {}", hc.semigroup, exact);
        assert!(hc.ratios().is_some());
    }

    #[test]
    fn zero_field_heat_characterization_is_degenerate() {
        let g = make_grid(1, 64, 2.0 * PI).unwrap();
        let f = default_filter(&g).unwrap();
        let hc = heat_characterization_ratio(&f, &SpectralField::zeros(&g, 1), 0.5, 2.0, 2.0).unwrap();
        assert!(hc.ratios().is_none());
    }

    #[test]
    fn narrow_window_is_rejected() {
        let g = make_grid(1, 64, 2.0 * PI).unwrap();
        let f = default_filter(&g).unwrap();
        let u = SpectralField::scalar_from_fn(&g, |x| (3.0 * x[0]).sin());
        assert!(heat_characterization_window(&f, &u, 0.5, 2.0, 2.0, 1e-1, 1.0, 8).is_err());
    }

    #[test]
    fn invalid_indices() {
        assert!(BesovSpec::new(0.0, 0.5, 1.0).is_err());
        assert!(BesovSpec::new(0.0, 2.0, f64::NAN).is_err());
        assert!(BesovSpec::new(1.0, f64::INFINITY, f64::INFINITY).is_ok());
    }

    #[test]
    fn time_norm_needs_ordered_snapshots() {
        let g = make_grid(1, 32, 2.0 * PI).unwrap();
        let f = default_filter(&g).unwrap();
        let u = SpectralField::scalar_from_fn(&g, |x| x[0].sin());
        let spec = BesovSpec::new(0.0, 2.0, 1.0).unwrap();
        assert!(time_besov_norm(&f, &[(1.0, &u), (0.5, &u)], 1.0, spec).is_err());
        assert!(time_besov_norm(&f, &[], 1.0, spec).is_err());
        let single = time_besov_norm(&f, &[(0.0, &u), (2.0, &u)], f64::INFINITY, spec).unwrap();
        assert!((single - besov_norm(&f, &u, spec).unwrap()).abs() < 1e-14);
    }
}
