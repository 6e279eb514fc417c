//! Empirical constants of the product, paraproduct, composition and heat estimates.
//!
//! Each draw builds random band-limited data with a random spectral slope and records the
//! ratio of the left side of every estimate to its right side.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::besov::{heat_characterization_ratio, lp_norm, BesovSpec, HybridBesovSpec};
use crate::error::{Error, Result};
use crate::lp::dyadic::{default_filter, DyadicFilter};
use crate::lp::field::SpectralField;
use crate::lp::grid::make_grid;
use crate::paraproduct::{composition_ratio, hybrid_para_ratio, product_law_ratio, HybridEstimate, ProductLaw};
use crate::quasi::heat_estimate_ratio;

/// Names of the recorded ratios, in the order of [`estimate_ratios`].
pub const RATIO_NAMES: [&str; 16] = [
    "product_tame",
    "product_multiplier",
    "hybrid_para",
    "hybrid_remainder_high",
    "hybrid_remainder_low",
    "hybrid_para_bounded",
    "hybrid_remainder_bounded",
    "composition_linear",
    "composition_quadratic",
    "heat_estimate_sup",
    "heat_estimate_integrated",
    "heat_char_l2_upper",
    "heat_char_l2_lower",
    "heat_char_linf_upper",
    "heat_char_linf_lower",
    "heat_estimate_l2",
];

/// Mean-free field on the partition-exact modes with amplitude `(1 + |xi|^2)^{-slope/2}`.
pub fn random_sloped_field(filter: &DyadicFilter, rng: &mut ChaCha8Rng, slope: f64) -> Result<SpectralField> {
    let g = filter.grid();
    let (lo, hi) = (filter.exact_radius_low(), filter.exact_radius());
    let mask = g.dealias_mask();
    let coeffs: Vec<Complex64> = g
        .xi_sq()
        .iter()
        .zip(mask)
        .map(|(&k2, &keep)| {
            let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let r = k2.sqrt();
            if keep && r > lo && r < hi {
                Complex64::new(a, b) * (1.0 + k2).powf(-slope / 2.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let f = SpectralField::from_coeffs(g, vec![coeffs])?;
    let sup = lp_norm(&f, f64::INFINITY);
    if sup == 0.0 {
        return Err(Error::Config("empty band".into()));
    }
    Ok(f.scale(1.0 / sup))
}

fn need(name: &str, r: Option<f64>) -> Result<f64> {
    r.ok_or_else(|| Error::Config(format!("degenerate denominator in {name}")))
}

/// One draw of every ratio in [`RATIO_NAMES`] on a 2D 64x64 grid.
pub fn estimate_ratios(seed: u64) -> Result<Vec<(&'static str, f64)>> {
    let g = make_grid(2, 64, 2.0 * std::f64::consts::PI)?;
    let filter = default_filter(&g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let su = rng.gen_range(0.5..3.0);
    let sv = rng.gen_range(0.5..3.0);
    let u = random_sloped_field(&filter, &mut rng, su)?.scale(rng.gen_range(0.1..1.0));
    let v = random_sloped_field(&filter, &mut rng, sv)?.scale(rng.gen_range(0.1..1.0));
    let b = |s: f64, p: f64, r: f64| BesovSpec { s, p, r };
    let l0 = 1;
    let mut out = Vec::with_capacity(RATIO_NAMES.len());

    // tame law for s > 0 and the multiplier law B^{N/2}_{2,1} x B^{-1/2}_{2,1} -> B^{-1/2}_{2,1}
    out.push(need("tame", product_law_ratio(&filter, &u, &v, b(1.0, 2.0, 1.0), b(1.0, 2.0, 1.0), b(1.0, 2.0, 1.0), ProductLaw::Tame)?)?);
    out.push(need(
        "multiplier",
        product_law_ratio(&filter, &u, &v, b(-0.5, 2.0, 1.0), b(1.0, 2.0, 1.0), b(-0.5, 2.0, 1.0), ProductLaw::Multiplier)?,
    )?);

    let hu = HybridBesovSpec::uniform(b(1.0, 2.0, 1.0), l0);
    let hv = HybridBesovSpec::summable(0.0, 0.5, 2.0, 2.0, l0);
    for est in [HybridEstimate::Para, HybridEstimate::RemainderHigh, HybridEstimate::RemainderLow] {
        out.push(need("hybrid", hybrid_para_ratio(&filter, &u, &v, est, hv, hu, hv)?)?);
    }
    for est in [HybridEstimate::ParaBounded, HybridEstimate::RemainderBounded] {
        out.push(need("hybrid bounded", hybrid_para_ratio(&filter, &u, &v, est, hv, hu, hv)?)?);
    }

    let c = composition_ratio(&filter, &u.scale(0.5), 1.0, 2.0)?;
    out.push(need("composition", c.linear)?);
    out.push(need("composition", c.quadratic)?);

    // forced heat flow with f(t) = e^{-t} v on [0, 1]
    let mu = 1.0;
    let snaps: Vec<(f64, SpectralField)> = (0..=20)
        .map(|k| {
            let t = k as f64 / 20.0;
            (t, v.scale((-t).exp()))
        })
        .collect();
    let spec = b(0.0, 2.0, 1.0);
    out.push(need("heat sup", heat_estimate_ratio(&filter, &u, &snaps, mu, spec, f64::INFINITY, 1.0)?.ratio())?);
    out.push(need("heat int", heat_estimate_ratio(&filter, &u, &snaps, mu, spec, 1.0, 1.0)?.ratio())?);

    for (p, r) in [(2.0, 2.0), (f64::INFINITY, f64::INFINITY)] {
        let (up, down) = heat_characterization_ratio(&filter, &u, 0.5, p, r)?
            .ratios()
            .ok_or_else(|| Error::Config("degenerate heat characterization".into()))?;
        out.push(up);
        out.push(down);
    }
    out.push(need("heat l2", heat_estimate_ratio(&filter, &u, &snaps, mu, spec, 2.0, 2.0)?.ratio())?);

    Ok(RATIO_NAMES.iter().copied().zip(out).collect())
}
