//! Initial-data generators.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::besov::{hybrid_besov_norm, HybridBesovSpec};
use crate::error::{Error, Result};
use crate::lp::dyadic::DyadicFilter;
use crate::lp::field::SpectralField;
use crate::lp::grid::Grid;

/// `amplitude exp(-|x - c|^2 / width^2)` with periodic minimum-image distance.
/// The center defaults to the middle of the box.
pub fn gaussian_bump(grid: &Grid, amplitude: f64, width: f64, center: Option<&[f64]>) -> Result<SpectralField> {
    if !(width > 0.0) {
        return Err(Error::Config(format!("bump width {width} must be positive")));
    }
    let period = grid.period().to_vec();
    let c: Vec<f64> = match center {
        Some(c) if c.len() == grid.dim() => c.to_vec(),
        Some(c) => return Err(Error::SizeMismatch { expected: grid.dim(), found: c.len() }),
        None => period.iter().map(|a| a / 2.0).collect(),
    };
    Ok(SpectralField::scalar_from_fn(grid, |x| {
        let r2: f64 = x
            .iter()
            .zip(&c)
            .zip(&period)
            .map(|((x, c), a)| {
                let d = (x - c) - a * ((x - c) / a).round();
                d * d
            })
            .sum();
        amplitude * (-r2 / (width * width)).exp()
    }))
}

/// Heat kernel of viscosity `mu` at unit time, scaled to peak `amplitude`:
/// evolving it for time `t` gives the kernel at time `1 + t`.
pub fn heat_kernel_data(grid: &Grid, mu: f64, amplitude: f64) -> Result<SpectralField> {
    gaussian_bump(grid, amplitude, 2.0 * mu.sqrt(), None)
}

/// Mean-free random field with a flat spectrum on the partition-exact modes of `filter`,
/// each component scaled so its hybrid norm equals `target`.
pub fn random_band_field(
    filter: &DyadicFilter,
    components: usize,
    target: f64,
    spec: HybridBesovSpec,
    seed: u64,
) -> Result<SpectralField> {
    let g = filter.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = g.xi_sq();
    let mask = g.dealias_mask();
    let (lo, hi) = (filter.exact_radius_low(), filter.exact_radius());
    let mut parts = Vec::with_capacity(components);
    for _ in 0..components {
        let coeffs: Vec<Complex64> = (0..g.len())
            .map(|i| {
                let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let r = xs[i].sqrt();
                if r > lo && r < hi && mask[i] {
                    Complex64::new(a, b)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let f = SpectralField::from_coeffs(g, vec![coeffs])?;
        let norm = hybrid_besov_norm(filter, &f, spec)?;
        if norm == 0.0 {
            return Err(Error::Config("no admissible modes for a random band field".into()));
        }
        parts.push(f.scale(target / norm));
    }
    SpectralField::stack(&parts)
}
