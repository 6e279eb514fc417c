//! Littlewood-Paley blocks on the periodic lattice.
//!
//! The profile is a smooth bump in `log2 |xi|` supported on the open annulus
//! `3/4 < |xi| < 8/3`, divided by its full dyadic sum so that the weights of all
//! blocks add to one at every `xi != 0`. The zero mode belongs to no block.

use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::Grid;
use crate::error::{Error, Result};

pub const ANNULUS_LO: f64 = 0.75;
pub const ANNULUS_HI: f64 = 8.0 / 3.0;

fn bump(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        (-1.0 / (x * (1.0 - x))).exp()
    }
}

/// Unnormalized radial profile as a function of `log2 |xi|`.
fn profile(y: f64) -> f64 {
    let lo = ANNULUS_LO.log2();
    let hi = ANNULUS_HI.log2();
    bump((y - lo) / (hi - lo))
}

/// Sum of the profile over every dyadic dilation; invariant under `y -> y + 1`.
fn dyadic_sum(y: f64) -> f64 {
    let lo = ANNULUS_LO.log2();
    let hi = ANNULUS_HI.log2();
    let m0 = (y - hi).floor() as i64;
    let m1 = (y - lo).ceil() as i64;
    (m0..=m1).map(|m| profile(y - m as f64)).sum()
}

/// `phi(2^{-l} xi)` for `|xi| = r > 0`.
pub fn block_weight(r: f64, l: i32) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let y = r.log2();
    let p = profile(y - l as f64);
    if p == 0.0 {
        0.0
    } else {
        p / dyadic_sum(y)
    }
}

#[derive(Clone, Debug)]
pub struct DyadicFilter {
    grid: Grid,
    l_min: i32,
    l_max: i32,
    /// Per block: sparse (flat index, weight) pairs.
    blocks: Vec<Vec<(u32, f64)>>,
}

/// Default block range: the top block's annulus sits below half the Nyquist frequency,
/// the bottom one covers the smallest nonzero frequency.
pub fn default_range(grid: &Grid) -> (i32, i32) {
    let l_max = (grid.nyquist() * 3.0 / 8.0).log2().floor() as i32 - 1;
    let from_n = -(grid.n() as f64).log2().round() as i32;
    let from_box = (3.0 * grid.xi_min() / 8.0).log2().floor() as i32;
    (from_n.min(from_box), l_max)
}

pub fn build_dyadic_filter(grid: &Grid, l_min: i32, l_max: i32) -> Result<DyadicFilter> {
    if l_min >= l_max {
        return Err(Error::BlockRange { l_min, l_max, reason: "l_min must be below l_max".into() });
    }
    let top = 2f64.powi(l_max) * ANNULUS_HI;
    if top > grid.nyquist() * (1.0 + 1e-12) {
        return Err(Error::BlockRange {
            l_min,
            l_max,
            reason: format!("top annulus edge {top:.4} exceeds Nyquist {:.4}", grid.nyquist()),
        });
    }
    let count = (l_max - l_min + 1) as usize;
    let mut blocks = vec![Vec::new(); count];
    let lo = ANNULUS_LO.log2();
    let hi = ANNULUS_HI.log2();
    for (i, &k2) in grid.xi_sq().iter().enumerate() {
        if k2 == 0.0 {
            continue;
        }
        let y = 0.5 * k2.log2();
        let den = dyadic_sum(y);
        let first = ((y - hi).floor() as i32).max(l_min);
        let last = ((y - lo).ceil() as i32).min(l_max);
        for l in first..=last {
            let p = profile(y - l as f64);
            if p > 0.0 {
                blocks[(l - l_min) as usize].push((i as u32, p / den));
            }
        }
    }
    Ok(DyadicFilter { grid: grid.clone(), l_min, l_max, blocks })
}

pub fn default_filter(grid: &Grid) -> Result<DyadicFilter> {
    let (lo, hi) = default_range(grid);
    build_dyadic_filter(grid, lo, hi)
}

impl DyadicFilter {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn l_min(&self) -> i32 {
        self.l_min
    }

    pub fn l_max(&self) -> i32 {
        self.l_max
    }

    pub fn levels(&self) -> std::ops::RangeInclusive<i32> {
        self.l_min..=self.l_max
    }

    /// Levels whose block contains at least one lattice point.
    pub fn active_levels(&self) -> impl Iterator<Item = i32> + '_ {
        self.levels().filter(|&l| !self.blocks[(l - self.l_min) as usize].is_empty())
    }

    pub fn weights(&self, l: i32) -> Result<&[(u32, f64)]> {
        self.check(l)?;
        Ok(&self.blocks[(l - self.l_min) as usize])
    }

    fn check(&self, l: i32) -> Result<()> {
        if l < self.l_min || l > self.l_max {
            return Err(Error::BlockOutOfRange { l, l_min: self.l_min, l_max: self.l_max });
        }
        Ok(())
    }

    /// Radius below which every nonzero frequency is fully covered by the retained blocks.
    pub fn exact_radius(&self) -> f64 {
        ANNULUS_LO * 2f64.powi(self.l_max + 1)
    }

    /// Radius above which every frequency is fully covered.
    pub fn exact_radius_low(&self) -> f64 {
        ANNULUS_HI * 2f64.powi(self.l_min - 1)
    }

    /// Sum of all block weights at every lattice point.
    pub fn partition_sum(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.grid.len()];
        for b in &self.blocks {
            for &(i, w) in b {
                s[i as usize] += w;
            }
        }
        s
    }

    /// Whether the full dyadic cover of a nonzero frequency lies inside the range.
    pub fn fully_covered(&self, r: f64) -> bool {
        if r <= 0.0 {
            return false;
        }
        let y = r.log2();
        let first = (y - ANNULUS_HI.log2()).floor() as i32;
        let last = (y - ANNULUS_LO.log2()).ceil() as i32;
        (first..=last).all(|l| block_weight(r, l) == 0.0 || (self.l_min..=self.l_max).contains(&l))
    }

    /// Block coefficients of `Delta_l u` for one component, as a dense array.
    pub fn block_coeffs(&self, coeffs: &[Complex64], l: i32) -> Result<Vec<Complex64>> {
        let w = self.weights(l)?;
        let mut out = vec![Complex64::new(0.0, 0.0); coeffs.len()];
        for &(i, wt) in w {
            out[i as usize] = coeffs[i as usize] * wt;
        }
        Ok(out)
    }

    /// Relative L2 mass of `u - mean` lying outside the partition-exact region.
    pub fn unresolved_fraction(&self, u: &SpectralField) -> f64 {
        let sum = self.partition_sum();
        let (mut miss, mut total) = (0.0, 0.0);
        for c in u.all_coeffs() {
            for (i, z) in c.iter().enumerate().skip(1) {
                let e = z.norm_sqr();
                total += e;
                miss += e * (1.0 - sum[i]).abs();
            }
        }
        if total == 0.0 {
            0.0
        } else {
            miss / total
        }
    }
}

/// `Delta_l u`, applied to every component.
pub fn dyadic_block(filter: &DyadicFilter, u: &SpectralField, l: i32) -> Result<SpectralField> {
    if u.grid() != filter.grid() {
        return Err(Error::GridMismatch);
    }
    let coeffs = u
        .all_coeffs()
        .iter()
        .map(|c| filter.block_coeffs(c, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralField::from_hermitian(u.grid(), coeffs))
}

/// `S_l u = sum_{k <= l-1} Delta_k u` over the filter range (mean excluded).
pub fn low_sum(filter: &DyadicFilter, u: &SpectralField, l: i32) -> Result<SpectralField> {
    if u.grid() != filter.grid() {
        return Err(Error::GridMismatch);
    }
    if l < filter.l_min() || l > filter.l_max() + 1 {
        return Err(Error::BlockOutOfRange { l, l_min: filter.l_min(), l_max: filter.l_max() + 1 });
    }
    let mut mult = vec![0.0; u.grid().len()];
    for k in filter.l_min()..l {
        for &(i, w) in filter.weights(k)? {
            mult[i as usize] += w;
        }
    }
    Ok(u.apply_multiplier(|i| mult[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::grid::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn analytic_partition_is_exact() {
        for i in 0..2000 {
            let r = 10f64.powf(-3.0 + 6.0 * i as f64 / 2000.0);
            let s: f64 = (-20..=20).map(|l| block_weight(r, l)).sum();
            assert!((s - 1.0).abs() < 1e-13, "r={r} sum={s}");
        }
    }

    #[test]
    fn power_of_two_frequency_hits_two_blocks() {
        for lstar in -3..4 {
            let r = 2f64.powi(lstar);
            for l in -10..10 {
                let w = block_weight(r, l);
                let ratio = 2f64.powi(lstar - l);
                let inside = ratio > ANNULUS_LO && ratio < ANNULUS_HI;
                assert_eq!(w > 0.0, inside);
                assert_eq!(inside, l == lstar || l == lstar - 1);
            }
        }
    }

    #[test]
    fn default_range_for_reference_grid() {
        let g = make_grid(2, 512, 64.0).unwrap();
        let (lo, hi) = default_range(&g);
        assert_eq!(hi, 2);
        assert_eq!(lo, -9);
        assert!(build_dyadic_filter(&g, lo, hi).is_ok());
    }

    #[test]
    fn rejects_unresolved_range() {
        let g = make_grid(1, 64, 2.0 * PI).unwrap();
        assert!(build_dyadic_filter(&g, -2, 3).is_ok());
        assert!(build_dyadic_filter(&g, -2, 4).is_err());
        assert!(build_dyadic_filter(&g, 3, 3).is_err());
    }

    #[test]
    fn zero_mode_is_excluded() {
        let g = make_grid(2, 32, 2.0 * PI).unwrap();
        let f = default_filter(&g).unwrap();
        assert_eq!(f.partition_sum()[0], 0.0);
        let c = SpectralField::constant(&g, 4.0);
        for l in f.levels() {
            assert!(dyadic_block(&f, &c, l).unwrap().max_abs() < 1e-15);
        }
        assert!(low_sum(&f, &c, f.l_max() + 1).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn block_support_of_cosine() {
        let g = make_grid(1, 256, 2.0 * PI).unwrap();
        let f = default_filter(&g).unwrap();
        let lstar = 3;
        let u = SpectralField::scalar_from_fn(&g, |x| (8.0 * x[0]).cos());
        for l in f.levels() {
            let b = dyadic_block(&f, &u, l).unwrap();
            if l == lstar || l == lstar - 1 {
                assert!(b.max_abs() > 1e-3);
            } else {
                assert!(b.max_abs() < 1e-13, "l={l}");
            }
        }
        let s = low_sum(&f, &u, lstar + 2).unwrap();
        assert!(s.rel_l2_diff(&u).unwrap() < 1e-14);
        assert!(low_sum(&f, &u, f.l_min()).unwrap().max_abs() == 0.0);
    }
}
