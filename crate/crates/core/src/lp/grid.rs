use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Periodic box `[0, a_1) x ... x [0, a_dim)` sampled with `n` points per axis.
///
/// Cheap to clone; FFT plans and wavevector tables are shared.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    dim: usize,
    n: usize,
    period: Vec<f64>,
    dealias: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Signed integer wavenumber of each 1D index.
    k: Vec<i64>,
    /// Per-axis derivative symbols with the Nyquist mode zeroed, flattened.
    xi_eff: Vec<Vec<f64>>,
    /// True |xi|^2 per flat index.
    xi_sq: Vec<f64>,
    /// Flat index of -k.
    neg: Vec<u32>,
    /// Dealiasing mask.
    keep: Vec<bool>,
}

pub fn make_grid(dim: usize, n: usize, period: f64) -> Result<Grid> {
    Grid::new(dim, n, &vec![period; dim.max(1)])
}

impl Grid {
    pub fn new(dim: usize, n: usize, period: &[f64]) -> Result<Grid> {
        Grid::with_dealias(dim, n, period, 2.0 / 3.0)
    }

    /// `dealias` is the retained fraction of the half-band per axis.
    pub fn with_dealias(dim: usize, n: usize, period: &[f64], dealias: f64) -> Result<Grid> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n = {n} must be a power of two >= 8")));
        }
        if period.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "{} periods given for dimension {dim}",
                period.len()
            )));
        }
        if period.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::InvalidGrid("periods must be positive".into()));
        }
        if !(dealias > 0.0 && dealias <= 1.0) {
            return Err(Error::InvalidGrid(format!("dealias fraction {dealias} not in (0, 1]")));
        }
        let total = n.pow(dim as u32);
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let half = (n / 2) as i64;
        let k: Vec<i64> = (0..n as i64).map(|i| if i < half { i } else { i - n as i64 }).collect();
        let kc = (dealias * half as f64 + 1e-9).floor() as i64;

        let mut xi_eff = vec![vec![0.0; total]; dim];
        let mut xi_sq = vec![0.0; total];
        let mut neg = vec![0u32; total];
        let mut keep = vec![true; total];
        let mut idx = vec![0usize; dim];
        for flat in 0..total {
            let mut rem = flat;
            for ax in (0..dim).rev() {
                idx[ax] = rem % n;
                rem /= n;
            }
            let mut nflat = 0usize;
            for ax in 0..dim {
                let kk = k[idx[ax]];
                let xi = 2.0 * PI * kk as f64 / period[ax];
                xi_sq[flat] += xi * xi;
                xi_eff[ax][flat] = if kk == -half { 0.0 } else { xi };
                if kk.abs() > kc || kk == -half {
                    keep[flat] = false;
                }
                nflat = nflat * n + (n - idx[ax]) % n;
            }
            neg[flat] = nflat as u32;
        }
        Ok(Grid {
            inner: Arc::new(GridInner {
                dim,
                n,
                period: period.to_vec(),
                dealias,
                fwd,
                inv,
                k,
                xi_eff,
                xi_sq,
                neg,
                keep,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn period(&self) -> &[f64] {
        &self.inner.period
    }

    pub fn len(&self) -> usize {
        self.inner.xi_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn volume(&self) -> f64 {
        self.inner.period.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len() as f64
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.inner.dealias
    }

    /// Same box with another dealiasing fraction.
    pub fn rebuilt_with_dealias(&self, dealias: f64) -> Result<Grid> {
        Grid::with_dealias(self.dim(), self.n(), self.period(), dealias)
    }

    /// Largest retained integer wavenumber per axis after dealiasing.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.inner.dealias * (self.n() / 2) as f64 + 1e-9).floor() as i64
    }

    /// Nyquist angular frequency of the coarsest axis.
    pub fn nyquist(&self) -> f64 {
        self.inner
            .period
            .iter()
            .map(|a| PI * self.n() as f64 / a)
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest nonzero |xi| on the lattice.
    pub fn xi_min(&self) -> f64 {
        self.inner
            .period
            .iter()
            .map(|a| 2.0 * PI / a)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn wavenumber(&self, i: usize) -> i64 {
        self.inner.k[i]
    }

    /// Multi-index of a flat index, row-major.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let n = self.n();
        let mut idx = vec![0; self.dim()];
        for ax in (0..self.dim()).rev() {
            idx[ax] = flat % n;
            flat /= n;
        }
        idx
    }

    /// Signed wavevector of a flat index.
    pub fn wavevector(&self, flat: usize) -> Vec<i64> {
        self.unflatten(flat).into_iter().map(|i| self.inner.k[i]).collect()
    }

    pub fn flatten_k(&self, k: &[i64]) -> usize {
        let n = self.n() as i64;
        k.iter().fold(0usize, |acc, &kk| acc * n as usize + kk.rem_euclid(n) as usize)
    }

    /// Physical coordinates of a flat sample index.
    pub fn position(&self, flat: usize) -> Vec<f64> {
        let n = self.n() as f64;
        self.unflatten(flat)
            .into_iter()
            .zip(self.period())
            .map(|(i, a)| i as f64 * a / n)
            .collect()
    }

    /// Derivative symbol along `axis`, Nyquist zeroed.
    pub fn xi_axis(&self, axis: usize) -> &[f64] {
        &self.inner.xi_eff[axis]
    }

    pub fn xi_sq(&self) -> &[f64] {
        &self.inner.xi_sq
    }

    pub fn neg_index(&self) -> &[u32] {
        &self.inner.neg
    }

    pub fn dealias_mask(&self) -> &[bool] {
        &self.inner.keep
    }

    pub(crate) fn fft_forward(&self, data: &mut [Complex64]) {
        self.fft_all_axes(data, &self.inner.fwd);
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
    }

    pub(crate) fn fft_inverse(&self, data: &mut [Complex64]) {
        self.fft_all_axes(data, &self.inner.inv);
    }

    fn fft_all_axes(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n();
        let dim = self.dim();
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        const LINES: usize = 32;
        let mut buf = vec![Complex64::new(0.0, 0.0); n * LINES];
        for ax in 0..dim.saturating_sub(1) {
            let stride = n.pow((dim - 1 - ax) as u32);
            let block = stride * n;
            for chunk in data.chunks_mut(block) {
                let mut i0 = 0;
                while i0 < stride {
                    let lines = LINES.min(stride - i0);
                    for j in 0..n {
                        let row = &chunk[j * stride + i0..j * stride + i0 + lines];
                        for (l, v) in row.iter().enumerate() {
                            buf[l * n + j] = *v;
                        }
                    }
                    plan.process_with_scratch(&mut buf[..lines * n], &mut scratch);
                    for j in 0..n {
                        let row = &mut chunk[j * stride + i0..j * stride + i0 + lines];
                        for (l, v) in row.iter_mut().enumerate() {
                            *v = buf[l * n + j];
                        }
                    }
                    i0 += lines;
                }
            }
        }
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.dim() == other.dim()
                && self.n() == other.n()
                && self.period() == other.period()
                && self.dealias_fraction() == other.dealias_fraction())
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim())
            .field("n", &self.n())
            .field("period", &self.period())
            .field("dealias", &self.dealias_fraction())
            .finish()
    }
}
