//! Spectral differential operators and dealiased pointwise products.
//!
//! Odd derivatives drop the Nyquist mode so that real fields stay real; the laplacian
//! uses the same symbols, which makes `laplacian == div(grad)` exact.

use num_complex::Complex64;

use super::field::{transform, SpectralField};
use crate::error::{Error, Result};

/// Relative L2 mass above which a pointwise map's discarded tail is reported.
pub const TAIL_WARN: f64 = 1e-10;

fn need(field: &SpectralField, expected: usize) -> Result<()> {
    if field.components() != expected {
        return Err(Error::ComponentMismatch { expected, found: field.components() });
    }
    Ok(())
}

fn derivative(coeffs: &[Complex64], xi: &[f64]) -> Vec<Complex64> {
    coeffs.iter().zip(xi).map(|(z, x)| Complex64::new(-z.im * x, z.re * x)).collect()
}

/// Partial derivative of every component along `axis`.
pub fn partial(field: &SpectralField, axis: usize) -> SpectralField {
    let g = field.grid();
    let xi = g.xi_axis(axis);
    let coeffs = field.all_coeffs().iter().map(|c| derivative(c, xi)).collect();
    SpectralField::from_hermitian(g, coeffs)
}

pub fn grad(field: &SpectralField) -> Result<SpectralField> {
    need(field, 1)?;
    let g = field.grid();
    let coeffs = (0..g.dim()).map(|ax| derivative(field.coeffs(0), g.xi_axis(ax))).collect();
    Ok(SpectralField::from_hermitian(g, coeffs))
}

pub fn div(field: &SpectralField) -> Result<SpectralField> {
    let g = field.grid();
    need(field, g.dim())?;
    let mut acc = vec![Complex64::new(0.0, 0.0); g.len()];
    for ax in 0..g.dim() {
        for ((a, z), x) in acc.iter_mut().zip(field.coeffs(ax)).zip(g.xi_axis(ax)) {
            *a += Complex64::new(-z.im * x, z.re * x);
        }
    }
    Ok(SpectralField::from_hermitian(g, vec![acc]))
}

/// Symbol of the laplacian at a flat index (non-positive).
pub fn laplacian_symbol(grid: &crate::lp::Grid, i: usize) -> f64 {
    -(0..grid.dim()).map(|ax| grid.xi_axis(ax)[i].powi(2)).sum::<f64>()
}

pub fn laplacian(field: &SpectralField) -> Result<SpectralField> {
    need(field, 1)?;
    let g = field.grid().clone();
    Ok(field.apply_multiplier(|i| laplacian_symbol(&g, i)))
}

/// Full gradient tensor, component `i * dim + j` holding `d_i u_j`.
pub fn grad_tensor(field: &SpectralField) -> Result<SpectralField> {
    let g = field.grid();
    let d = g.dim();
    need(field, d)?;
    let mut coeffs = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            coeffs.push(derivative(field.coeffs(j), g.xi_axis(i)));
        }
    }
    Ok(SpectralField::from_hermitian(g, coeffs))
}

/// Symmetric gradient `(grad u + grad u^T) / 2`, row-major `dim x dim` components.
pub fn sym_grad(field: &SpectralField) -> Result<SpectralField> {
    let g = field.grid();
    let d = g.dim();
    need(field, d)?;
    let mut coeffs = vec![Vec::new(); d * d];
    for i in 0..d {
        for j in i..d {
            let a = derivative(field.coeffs(j), g.xi_axis(i));
            let b = derivative(field.coeffs(i), g.xi_axis(j));
            let s: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            coeffs[j * d + i] = s.clone();
            coeffs[i * d + j] = s;
        }
    }
    Ok(SpectralField::from_hermitian(g, coeffs))
}

/// Vorticity: a scalar in 1D (identically zero) and 2D, a vector in 3D.
pub fn curl(field: &SpectralField) -> Result<SpectralField> {
    let g = field.grid();
    let d = g.dim();
    need(field, d)?;
    let dd = |comp: usize, ax: usize| derivative(field.coeffs(comp), g.xi_axis(ax));
    let sub = |a: Vec<Complex64>, b: Vec<Complex64>| -> Vec<Complex64> {
        a.iter().zip(&b).map(|(x, y)| x - y).collect()
    };
    let coeffs = match d {
        1 => vec![vec![Complex64::new(0.0, 0.0); g.len()]],
        2 => vec![sub(dd(1, 0), dd(0, 1))],
        _ => vec![sub(dd(2, 1), dd(1, 2)), sub(dd(0, 2), dd(2, 0)), sub(dd(1, 0), dd(0, 1))],
    };
    Ok(SpectralField::from_hermitian(g, coeffs))
}

/// Splits a vector field into its gradient (curl-free) and divergence-free parts.
/// The mean flow is assigned to the divergence-free part.
pub fn helmholtz(field: &SpectralField) -> Result<(SpectralField, SpectralField)> {
    let g = field.grid();
    let d = g.dim();
    need(field, d)?;
    let mut long = vec![vec![Complex64::new(0.0, 0.0); g.len()]; d];
    for i in 0..g.len() {
        let k2: f64 = (0..d).map(|ax| g.xi_axis(ax)[i].powi(2)).sum();
        if k2 == 0.0 {
            continue;
        }
        let mut proj = Complex64::new(0.0, 0.0);
        for ax in 0..d {
            proj += field.coeffs(ax)[i] * g.xi_axis(ax)[i];
        }
        for (ax, l) in long.iter_mut().enumerate() {
            l[i] = proj * (g.xi_axis(ax)[i] / k2);
        }
    }
    let grad_part = SpectralField::from_hermitian(g, long);
    let sol = field.sub(&grad_part)?;
    Ok((grad_part, sol))
}

/// Builds a field from samples, truncated to the dealiased band.
pub fn from_values_dealiased(grid: &crate::lp::Grid, values: Vec<Vec<f64>>) -> Result<SpectralField> {
    let mask = grid.dealias_mask();
    let coeffs = values
        .iter()
        .map(|v| {
            let mut c = transform(grid, v)?;
            c.iter_mut().zip(mask).for_each(|(z, k)| {
                if !k {
                    *z = Complex64::new(0.0, 0.0);
                }
            });
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralField::from_hermitian(grid, coeffs))
}

/// Dealiased product. A scalar factor broadcasts against any number of components.
pub fn multiply(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.same_grid(v)?;
    let (s, w) = match (u.components(), v.components()) {
        (1, _) => (u, v),
        (_, 1) => (v, u),
        (a, b) if a == b => {
            let vals = (0..a)
                .map(|c| u.values(c).iter().zip(v.values(c)).map(|(x, y)| x * y).collect())
                .collect();
            return from_values_dealiased(u.grid(), vals);
        }
        (a, b) => return Err(Error::ComponentMismatch { expected: a, found: b }),
    };
    let vals = (0..w.components())
        .map(|c| s.values(0).iter().zip(w.values(c)).map(|(x, y)| x * y).collect())
        .collect();
    from_values_dealiased(u.grid(), vals)
}

/// Dealiased Euclidean inner product of two vector fields.
pub fn dot(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.same_grid(v)?;
    need(v, u.components())?;
    let mut acc = vec![0.0; u.grid().len()];
    for c in 0..u.components() {
        for ((a, x), y) in acc.iter_mut().zip(u.values(c)).zip(v.values(c)) {
            *a += x * y;
        }
    }
    from_values_dealiased(u.grid(), vec![acc])
}

/// Raw samples of `(u . grad) w` for every component of `w`.
pub fn advection_values(u: &SpectralField, w: &SpectralField) -> Result<Vec<Vec<f64>>> {
    let g = u.grid();
    need(u, g.dim())?;
    u.same_grid(w)?;
    let mut out = vec![vec![0.0; g.len()]; w.components()];
    for ax in 0..g.dim() {
        let dw = partial(w, ax);
        for (o, dc) in out.iter_mut().zip(dw.all_values()) {
            for ((a, x), y) in o.iter_mut().zip(u.values(ax)).zip(dc) {
                *a += x * y;
            }
        }
    }
    Ok(out)
}

/// Dealiased advection `(u . grad) w`.
pub fn advect(u: &SpectralField, w: &SpectralField) -> Result<SpectralField> {
    let vals = advection_values(u, w)?;
    from_values_dealiased(u.grid(), vals)
}

/// Raw samples of the contraction `(g . T)_i = sum_j g_j T_{ji}`.
pub fn contract_values(gvec: &SpectralField, tensor: &SpectralField) -> Result<Vec<Vec<f64>>> {
    let grid = gvec.grid();
    let d = grid.dim();
    need(gvec, d)?;
    need(tensor, d * d)?;
    gvec.same_grid(tensor)?;
    let mut out = vec![vec![0.0; grid.len()]; d];
    for (i, o) in out.iter_mut().enumerate() {
        for j in 0..d {
            for ((a, x), t) in o.iter_mut().zip(gvec.values(j)).zip(tensor.values(j * d + i)) {
                *a += x * t;
            }
        }
    }
    Ok(out)
}

/// Dealiased contraction of a vector with a tensor on its first index.
pub fn contract(gvec: &SpectralField, tensor: &SpectralField) -> Result<SpectralField> {
    let vals = contract_values(gvec, tensor)?;
    from_values_dealiased(gvec.grid(), vals)
}

/// Applies `f` pointwise and re-projects onto the dealiased band, warning when the
/// discarded tail exceeds [`TAIL_WARN`] of the L2 mass.
pub fn map_pointwise(field: &SpectralField, f: impl Fn(f64) -> f64) -> Result<SpectralField> {
    let g = field.grid();
    let vals: Vec<Vec<f64>> =
        field.all_values().iter().map(|v| v.iter().map(|&x| f(x)).collect()).collect();
    let raw = SpectralField::from_values(g, vals)?;
    let tail = raw.alias_tail();
    if tail > TAIL_WARN {
        log::warn!("pointwise map discards {tail:.2e} of its L2 mass beyond the dealiasing band");
    }
    Ok(raw.dealiased())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::grid::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn grad_of_constant_vanishes() {
        let g = make_grid(2, 16, 5.0).unwrap();
        let gr = grad(&SpectralField::constant(&g, 3.0)).unwrap();
        assert_eq!(gr.components(), 2);
        assert!(gr.max_abs() < 1e-14);
    }

    #[test]
    fn laplacian_of_cosine() {
        let g = make_grid(1, 32, 2.0 * PI).unwrap();
        let f = SpectralField::scalar_from_fn(&g, |x| x[0].cos());
        let l = laplacian(&f).unwrap();
        assert!(l.rel_l2_diff(&f.scale(-1.0)).unwrap() < 1e-13);
    }

    #[test]
    fn laplacian_equals_div_grad() {
        let g = make_grid(2, 16, 3.0).unwrap();
        let f = SpectralField::scalar_from_fn(&g, |x| {
            (2.0 * PI * x[0] / 3.0).sin() * (4.0 * PI * x[1] / 3.0).cos() + 0.3 * x[0]
        });
        let a = laplacian(&f).unwrap();
        let b = div(&grad(&f).unwrap()).unwrap();
        assert!(a.rel_l2_diff(&b).unwrap() < 1e-12);
    }

    #[test]
    fn symmetric_gradient_of_shear_mode() {
        // u = (sin y, sin x) on a 2pi box: grad u is already symmetric up to the swap
        // of cos x and cos y, checked against centred differences.
        let g = make_grid(2, 32, 2.0 * PI).unwrap();
        let u = SpectralField::from_fn(&g, 2, |x, c| if c == 0 { x[1].sin() } else { x[0].sin() });
        let d = sym_grad(&u).unwrap();
        let h = 1e-5;
        for &flat in &[0usize, 37, 300, 777] {
            let x = g.position(flat);
            let fd01 = 0.5 * (((x[1] + h).sin() - (x[1] - h).sin()) / (2.0 * h)
                + ((x[0] + h).sin() - (x[0] - h).sin()) / (2.0 * h));
            assert!((d.values(1)[flat] - fd01).abs() < 1e-6);
            assert!((d.values(2)[flat] - fd01).abs() < 1e-6);
            assert!(d.values(0)[flat].abs() < 1e-12);
            assert!(d.values(3)[flat].abs() < 1e-12);
        }
    }

    #[test]
    fn component_checks() {
        let g = make_grid(2, 8, 1.0).unwrap();
        let s = SpectralField::zeros(&g, 1);
        let v = SpectralField::zeros(&g, 2);
        assert!(grad(&v).is_err());
        assert!(div(&s).is_err());
        assert!(laplacian(&v).is_err());
        assert!(sym_grad(&s).is_err());
    }

    #[test]
    fn gradients_are_irrotational() {
        let g = make_grid(3, 16, 2.0).unwrap();
        let f = SpectralField::scalar_from_fn(&g, |x| (PI * x[0]).sin() * (2.0 * PI * x[1]).cos() * (PI * x[2]).cos());
        let c = curl(&grad(&f).unwrap()).unwrap();
        assert!(c.max_abs() < 1e-12);
    }

    #[test]
    fn helmholtz_parts_recombine() {
        let g = make_grid(2, 16, 2.0 * PI).unwrap();
        let u = SpectralField::from_fn(&g, 2, |x, c| {
            if c == 0 { (x[0] + 2.0 * x[1]).cos() + 0.2 } else { x[0].sin() * x[1].cos() }
        });
        let (gp, sp) = helmholtz(&u).unwrap();
        assert!(curl(&gp).unwrap().max_abs() < 1e-12);
        assert!(div(&sp).unwrap().max_abs() < 1e-12);
        assert!(gp.add(&sp).unwrap().rel_l2_diff(&u).unwrap() < 1e-14);
    }

    #[test]
    fn product_of_low_modes_is_exact() {
        let g = make_grid(1, 32, 2.0 * PI).unwrap();
        let a = SpectralField::scalar_from_fn(&g, |x| x[0].cos());
        let b = SpectralField::scalar_from_fn(&g, |x| (2.0 * x[0]).sin());
        let p = multiply(&a, &b).unwrap();
        let exact = SpectralField::scalar_from_fn(&g, |x| x[0].cos() * (2.0 * x[0]).sin());
        assert!(p.rel_l2_diff(&exact).unwrap() < 1e-14);
    }

    #[test]
    fn product_drops_aliased_modes() {
        let g = make_grid(1, 16, 2.0 * PI).unwrap();
        let a = SpectralField::scalar_from_fn(&g, |x| (5.0 * x[0]).cos());
        let p = multiply(&a, &a).unwrap();
        // cos^2(5x) = 1/2 + cos(10x)/2 and |k| = 10 lies beyond the 2/3 cutoff of 5.
        assert!((p.mean(0) - 0.5).abs() < 1e-14);
        assert!(p.is_band_limited());
        assert!(p.sub(&SpectralField::constant(&g, 0.5)).unwrap().max_abs() < 1e-14);
    }
}
