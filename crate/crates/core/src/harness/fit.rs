//! Power-law decay fits with plateau subtraction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quasi::log_log_slope;

/// Fraction of the series used to estimate the long-time plateau.
pub const TAIL_FRACTION: f64 = 0.2;
/// Relative spread above which the tail is still decaying and no plateau is subtracted.
pub const PLATEAU_SPREAD: f64 = 0.1;
pub const MIN_SAMPLES: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    pub norm: String,
    pub window: (f64, f64),
    pub fitted: f64,
    pub expected: f64,
    pub rel_error: f64,
    pub tolerance: f64,
    pub floor: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Long-time plateau: the mean of the last fifth of the series when that tail is flat to
/// within ten percent, zero otherwise.
pub fn plateau(values: &[f64]) -> f64 {
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    let k = ((n as f64 * TAIL_FRACTION).ceil() as usize).clamp(1, n);
    let tail = &values[n - k..];
    let mean = tail.iter().sum::<f64>() / k as f64;
    let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if mean > 0.0 && (hi - lo) / mean <= PLATEAU_SPREAD {
        mean
    } else {
        0.0
    }
}

/// Least-squares exponent `k` of `value - floor ~ (1 + t)^{-k}` over `window`.
pub fn fit_exponent(times: &[f64], values: &[f64], window: (f64, f64), floor: f64) -> Result<(f64, usize)> {
    if times.len() != values.len() {
        return Err(Error::SizeMismatch { expected: times.len(), found: values.len() });
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (&t, &v) in times.iter().zip(values) {
        if t >= window.0 && t <= window.1 {
            if !(v > floor) {
                return Err(Error::Window(format!("floor {floor:.3e} reaches the signal {v:.3e} at t = {t}")));
            }
            xs.push(1.0 + t);
            ys.push(v - floor);
        }
    }
    if xs.len() < MIN_SAMPLES {
        return Err(Error::Window(format!("{} samples in [{}, {}], need {MIN_SAMPLES}", xs.len(), window.0, window.1)));
    }
    Ok((-log_log_slope(&xs, &ys), xs.len()))
}

/// Fits a series after subtracting its plateau and compares with `expected`.
pub fn fit_decay(
    norm: &str,
    times: &[f64],
    values: &[f64],
    window: (f64, f64),
    expected: f64,
    tolerance: f64,
) -> Result<DecayReport> {
    let floor = plateau(values);
    let (fitted, samples) = fit_exponent(times, values, window, floor)?;
    let rel_error = (fitted - expected).abs() / expected.abs();
    Ok(DecayReport {
        norm: norm.to_string(),
        window,
        fitted,
        expected,
        rel_error,
        tolerance,
        floor,
        samples,
        pass: rel_error <= tolerance,
    })
}
