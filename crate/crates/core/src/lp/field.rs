use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Forward discrete transform, normalized so that a constant `c` maps to `c` at `k = 0`.
pub fn transform(grid: &Grid, values: &[f64]) -> Result<Vec<Complex64>> {
    check_len(grid, values.len())?;
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.fft_forward(&mut buf);
    Ok(buf)
}

/// Inverse of [`transform`]; the imaginary part of the synthesis is discarded.
pub fn inverse_transform(grid: &Grid, coeffs: &[Complex64]) -> Result<Vec<f64>> {
    check_len(grid, coeffs.len())?;
    let mut buf = coeffs.to_vec();
    grid.fft_inverse(&mut buf);
    Ok(buf.into_iter().map(|c| c.re).collect())
}

fn check_len(grid: &Grid, len: usize) -> Result<()> {
    if len != grid.len() {
        return Err(Error::SizeMismatch { expected: grid.len(), found: len });
    }
    Ok(())
}

/// Real scalar, vector or tensor field carried both as samples and as Fourier coefficients.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid,
    values: Vec<Vec<f64>>,
    coeffs: Vec<Vec<Complex64>>,
}

impl SpectralField {
    pub fn from_values(grid: &Grid, values: Vec<Vec<f64>>) -> Result<SpectralField> {
        if values.is_empty() {
            return Err(Error::ComponentMismatch { expected: 1, found: 0 });
        }
        let coeffs = values
            .iter()
            .map(|v| transform(grid, v))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralField { grid: grid.clone(), values, coeffs })
    }

    pub fn scalar(grid: &Grid, values: Vec<f64>) -> Result<SpectralField> {
        SpectralField::from_values(grid, vec![values])
    }

    /// Builds from coefficients, projecting onto the Hermitian-symmetric (real) subspace.
    pub fn from_coeffs(grid: &Grid, mut coeffs: Vec<Vec<Complex64>>) -> Result<SpectralField> {
        if coeffs.is_empty() {
            return Err(Error::ComponentMismatch { expected: 1, found: 0 });
        }
        for c in &mut coeffs {
            check_len(grid, c.len())?;
            let neg = grid.neg_index();
            for i in 0..c.len() {
                let j = neg[i] as usize;
                if j >= i {
                    let avg = 0.5 * (c[i] + c[j].conj());
                    c[i] = avg;
                    c[j] = avg.conj();
                }
            }
        }
        Ok(SpectralField::from_hermitian(grid, coeffs))
    }

    /// Caller guarantees Hermitian symmetry.
    pub(crate) fn from_hermitian(grid: &Grid, coeffs: Vec<Vec<Complex64>>) -> SpectralField {
        let values = coeffs
            .iter()
            .map(|c| {
                let mut buf = c.clone();
                grid.fft_inverse(&mut buf);
                buf.into_iter().map(|z| z.re).collect()
            })
            .collect();
        SpectralField { grid: grid.clone(), values, coeffs }
    }

    pub fn from_fn(grid: &Grid, components: usize, f: impl Fn(&[f64], usize) -> f64) -> SpectralField {
        let values = (0..components)
            .map(|c| (0..grid.len()).map(|i| f(&grid.position(i), c)).collect())
            .collect();
        SpectralField::from_values(grid, values).expect("sizes match by construction")
    }

    pub fn scalar_from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> SpectralField {
        SpectralField::from_fn(grid, 1, |x, _| f(x))
    }

    pub fn zeros(grid: &Grid, components: usize) -> SpectralField {
        SpectralField {
            grid: grid.clone(),
            values: vec![vec![0.0; grid.len()]; components],
            coeffs: vec![vec![ZERO; grid.len()]; components],
        }
    }

    pub fn constant(grid: &Grid, c: f64) -> SpectralField {
        let mut f = SpectralField::zeros(grid, 1);
        f.values[0].iter_mut().for_each(|v| *v = c);
        f.coeffs[0][0] = Complex64::new(c, 0.0);
        f
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self, c: usize) -> &[f64] {
        &self.values[c]
    }

    pub fn coeffs(&self, c: usize) -> &[Complex64] {
        &self.coeffs[c]
    }

    pub fn all_values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn all_coeffs(&self) -> &[Vec<Complex64>] {
        &self.coeffs
    }

    pub fn into_values(self) -> Vec<Vec<f64>> {
        self.values
    }

    pub fn component(&self, c: usize) -> SpectralField {
        SpectralField {
            grid: self.grid.clone(),
            values: vec![self.values[c].clone()],
            coeffs: vec![self.coeffs[c].clone()],
        }
    }

    /// Concatenates the components of several fields.
    pub fn stack(parts: &[SpectralField]) -> Result<SpectralField> {
        let first = parts.first().ok_or(Error::ComponentMismatch { expected: 1, found: 0 })?;
        let mut out = SpectralField { grid: first.grid.clone(), values: vec![], coeffs: vec![] };
        for p in parts {
            out.same_grid(p)?;
            out.values.extend(p.values.iter().cloned());
            out.coeffs.extend(p.coeffs.iter().cloned());
        }
        Ok(out)
    }

    pub fn same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    fn same_shape(&self, other: &SpectralField) -> Result<()> {
        self.same_grid(other)?;
        if self.components() != other.components() {
            return Err(Error::ComponentMismatch {
                expected: self.components(),
                found: other.components(),
            });
        }
        Ok(())
    }

    pub fn mean(&self, c: usize) -> f64 {
        self.coeffs[c][0].re
    }

    pub fn scale(&self, s: f64) -> SpectralField {
        let mut out = self.clone();
        out.values.iter_mut().flatten().for_each(|v| *v *= s);
        out.coeffs.iter_mut().flatten().for_each(|v| *v *= s);
        out
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &SpectralField) -> Result<SpectralField> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().flatten().zip(other.values.iter().flatten()) {
            *a += s * b;
        }
        for (a, b) in out.coeffs.iter_mut().flatten().zip(other.coeffs.iter().flatten()) {
            *a += s * b;
        }
        Ok(out)
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.axpy(-1.0, other)
    }

    /// Adds a constant to every component.
    pub fn shift(&self, c: f64) -> SpectralField {
        let mut out = self.clone();
        out.values.iter_mut().flatten().for_each(|v| *v += c);
        out.coeffs.iter_mut().for_each(|co| co[0] += c);
        out
    }

    /// Applies a real even multiplier `m(flat index)` to every component.
    pub fn apply_multiplier(&self, m: impl Fn(usize) -> f64) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.iter().enumerate().map(|(i, z)| z * m(i)).collect())
            .collect();
        SpectralField::from_hermitian(&self.grid, coeffs)
    }

    /// Truncates to the dealiased band.
    pub fn dealiased(&self) -> SpectralField {
        let mask = self.grid.dealias_mask();
        self.apply_multiplier(|i| if mask[i] { 1.0 } else { 0.0 })
    }

    /// Relative L2 mass of coefficients outside the dealiased band.
    pub fn alias_tail(&self) -> f64 {
        let mask = self.grid.dealias_mask();
        let (mut tail, mut total) = (0.0, 0.0);
        for c in &self.coeffs {
            for (z, keep) in c.iter().zip(mask) {
                let e = z.norm_sqr();
                total += e;
                if !keep {
                    tail += e;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }

    pub fn is_band_limited(&self) -> bool {
        self.alias_tail() <= 1e-28
    }

    /// Sum of squared coefficient moduli over components, i.e. the mean of |u|^2.
    pub fn coeff_energy(&self) -> f64 {
        self.coeffs.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    /// Relative L2 distance `|self - other| / |other|` evaluated through Parseval.
    pub fn rel_l2_diff(&self, other: &SpectralField) -> Result<f64> {
        self.same_shape(other)?;
        let mut num = 0.0;
        for (a, b) in self.coeffs.iter().flatten().zip(other.coeffs.iter().flatten()) {
            num += (a - b).norm_sqr();
        }
        let den = other.coeff_energy();
        Ok(if den == 0.0 { num.sqrt() } else { (num / den).sqrt() })
    }

    /// Pointwise Euclidean magnitude across components.
    pub fn magnitude(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for c in &self.values {
            for (o, v) in out.iter_mut().zip(c) {
                *o += v * v;
            }
        }
        out.iter_mut().for_each(|v| *v = v.sqrt());
        out
    }

    pub fn max_abs(&self) -> f64 {
        if self.components() == 1 {
            return self.values[0].iter().fold(0.0, |m, v| m.max(v.abs()));
        }
        self.magnitude().into_iter().fold(0.0, f64::max)
    }

    pub fn min_value(&self, c: usize) -> f64 {
        self.values[c].iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self, c: usize) -> f64 {
        self.values[c].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_finite())
            && self.coeffs.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest mismatch between stored samples and the synthesis of the stored coefficients,
    /// relative to the largest sample.
    pub fn consistency_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, c) in self.values.iter().zip(&self.coeffs) {
            let synth = inverse_transform(&self.grid, c).expect("sizes match");
            let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
            let err = v.iter().zip(&synth).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            worst = worst.max(err / scale);
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::grid::make_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn constant_maps_to_mean_mode() {
        let g = make_grid(2, 16, 3.0).unwrap();
        let f = SpectralField::scalar(&g, vec![2.5; g.len()]).unwrap();
        assert!((f.coeffs(0)[0].re - 2.5).abs() < 1e-14);
        for z in &f.coeffs(0)[1..] {
            assert!(z.norm() < 1e-14);
        }
    }

    #[test]
    fn cosine_has_half_coefficients() {
        let g = make_grid(1, 64, 2.0 * PI).unwrap();
        let f = SpectralField::scalar_from_fn(&g, |x| x[0].cos());
        for i in 0..64 {
            let k = g.wavenumber(i);
            let expect = if k.abs() == 1 { 0.5 } else { 0.0 };
            assert!((f.coeffs(0)[i] - Complex64::new(expect, 0.0)).norm() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn random_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in 1..=3 {
            let g = make_grid(dim, 16, 1.7).unwrap();
            let v: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let c = transform(&g, &v).unwrap();
            let back = inverse_transform(&g, &c).unwrap();
            let num: f64 = v.iter().zip(&back).map(|(a, b)| (a - b).powi(2)).sum();
            let den: f64 = v.iter().map(|a| a * a).sum();
            assert!((num / den).sqrt() < 1e-12);
        }
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let g = make_grid(1, 16, 1.0).unwrap();
        assert!(transform(&g, &[0.0; 8]).is_err());
        assert!(inverse_transform(&g, &[ZERO; 15]).is_err());
    }

    #[test]
    fn hermitian_projection_yields_consistent_field() {
        let g = make_grid(2, 8, 1.0).unwrap();
        let mut c = vec![ZERO; g.len()];
        c[g.flatten_k(&[1, 2])] = Complex64::new(0.0, 1.0);
        let f = SpectralField::from_coeffs(&g, vec![c]).unwrap();
        assert!(f.consistency_error() < 1e-13);
        let j = g.flatten_k(&[-1, -2]);
        assert!((f.coeffs(0)[j] - Complex64::new(0.0, -0.5)).norm() < 1e-15);
    }
}
