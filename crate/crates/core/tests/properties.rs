use std::f64::consts::PI;

use proptest::prelude::*;
use swquasi::besov::{besov_norm, hybrid_besov_norm, l2_parseval, lp_norm, BesovSpec, HybridBesovSpec};
use swquasi::init::random_band_field;
use swquasi::lp::ops::{curl, grad, multiply};
use swquasi::lp::{default_filter, dyadic_block, inverse_transform, low_sum, make_grid, transform, DyadicFilter, Grid};
use swquasi::paraproduct::{bony, para};
use swquasi::quasi::{heat_multiplier, velocity_from_density, HeatState};
use swquasi::solver::{ft_norm_series, Mode, SolverConfig};
use swquasi::harness::{run, GridConfig, RunConfig};

fn setup(dim: usize) -> (Grid, DyadicFilter) {
    let n = if dim == 1 { 128 } else { 32 };
    let g = make_grid(dim, n, 2.0 * PI).unwrap();
    let f = default_filter(&g).unwrap();
    (g, f)
}

fn field(f: &DyadicFilter, seed: u64, mean: f64) -> swquasi::lp::SpectralField {
    let h = HybridBesovSpec::uniform(BesovSpec { s: 0.0, p: 2.0, r: 2.0 }, 0);
    random_band_field(f, 1, 1.0, h, seed).unwrap().shift(mean)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parseval_holds(seed in any::<u64>(), dim in 1usize..=2, mean in -2.0..2.0f64) {
        let (_, f) = setup(dim);
        let u = field(&f, seed, mean);
        let (a, b) = (lp_norm(&u, 2.0), l2_parseval(&u));
        prop_assert!((a - b).abs() <= 1e-12 * b);
    }

    #[test]
    fn transform_round_trip(vals in prop::collection::vec(-10.0..10.0f64, 64)) {
        let g = make_grid(1, 64, 3.0).unwrap();
        let back = inverse_transform(&g, &transform(&g, &vals).unwrap()).unwrap();
        for (a, b) in vals.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn bernstein_inequality(seed in any::<u64>(), dim in 1usize..=2) {
        let (_, f) = setup(dim);
        let u = field(&f, seed, 0.0);
        for l in f.levels() {
            let b = dyadic_block(&f, &u, l).unwrap();
            let lhs = lp_norm(&grad(&b).unwrap(), 2.0);
            prop_assert!(lhs <= (8.0 / 3.0) * 2f64.powi(l) * lp_norm(&b, 2.0) * (1.0 + 1e-12) + 1e-14);
        }
    }

    #[test]
    fn blocks_are_almost_orthogonal(seed in any::<u64>()) {
        let (_, f) = setup(2);
        let u = field(&f, seed, 0.5);
        for j in f.levels() {
            let bj = dyadic_block(&f, &u, j).unwrap();
            for l in f.levels() {
                if (j - l).abs() >= 2 {
                    prop_assert!(dyadic_block(&f, &bj, l).unwrap().max_abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn gradient_commutes_with_low_pass(seed in any::<u64>(), l_off in 0i32..4) {
        let (_, f) = setup(2);
        let u = field(&f, seed, 1.0);
        let l = f.l_min() + l_off;
        let a = grad(&low_sum(&f, &u, l).unwrap()).unwrap();
        let b = low_sum(&f, &grad(&u).unwrap(), l).unwrap();
        prop_assert!(a.sub(&b).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn besov_norm_is_a_norm(sa in any::<u64>(), sb in any::<u64>(), c in -5.0..5.0f64, s in -1.0..2.0f64, pi in 0usize..3, ri in 0usize..3) {
        let (_, f) = setup(2);
        let ps = [1.0, 2.0, f64::INFINITY];
        let spec = BesovSpec { s, p: ps[pi], r: ps[ri] };
        let (u, v) = (field(&f, sa, 0.0), field(&f, sb, 0.0));
        let nu = besov_norm(&f, &u, spec).unwrap();
        let ncu = besov_norm(&f, &u.scale(c), spec).unwrap();
        prop_assert!((ncu - c.abs() * nu).abs() <= 1e-12 * nu);
        let nsum = besov_norm(&f, &u.add(&v).unwrap(), spec).unwrap();
        prop_assert!(nsum <= (nu + besov_norm(&f, &v, spec).unwrap()) * (1.0 + 1e-12));
    }

    #[test]
    fn hybrid_with_equal_indices_matches_plain(seed in any::<u64>(), s in -1.0..2.0f64, l0_off in 0i32..6, ri in 0usize..3) {
        let (_, f) = setup(2);
        let rs = [1.0, 2.0, f64::INFINITY];
        let r = rs[ri];
        let spec = BesovSpec { s, p: 2.0, r };
        let u = field(&f, seed, 0.0);
        let plain = besov_norm(&f, &u, spec).unwrap();
        let hybrid = hybrid_besov_norm(&f, &u, HybridBesovSpec::uniform(spec, f.l_min() - 1 + l0_off)).unwrap();
        if r == 1.0 {
            prop_assert!((plain - hybrid).abs() <= 1e-12 * plain);
        } else {
            let k = 2f64.powf(1.0 - 1.0 / r);
            prop_assert!(plain <= hybrid * (1.0 + 1e-12) && hybrid <= k * plain * (1.0 + 1e-12));
        }
    }

    #[test]
    fn bony_identity_and_bilinearity(sa in any::<u64>(), sb in any::<u64>(), sc in any::<u64>(), ma in -1.0..1.0f64, mb in -1.0..1.0f64, c in -3.0..3.0f64) {
        let (_, f) = setup(2);
        let (u, v, w) = (field(&f, sa, ma), field(&f, sb, mb), field(&f, sc, 0.2));
        let parts = bony(&f, &u, &v).unwrap();
        prop_assert!(parts.sum().rel_l2_diff(&multiply(&u, &v).unwrap()).unwrap() < 1e-12);
        let lhs = para(&f, &u.axpy(c, &w).unwrap(), &v).unwrap();
        let rhs = para(&f, &u, &v).unwrap().axpy(c, &para(&f, &w, &v).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn heat_semigroup(seed in any::<u64>(), s in 0.0..2.0f64, t in 0.0..2.0f64, mu in 0.01..2.0f64) {
        let (_, f) = setup(2);
        let u = field(&f, seed, 0.3);
        let a = heat_multiplier(&heat_multiplier(&u, mu, s), mu, t);
        let b = heat_multiplier(&u, mu, s + t);
        prop_assert!(a.sub(&b).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn quasi_velocity_is_irrotational(seed in any::<u64>(), amp in 0.01..0.3f64, mu in 0.05..2.0f64) {
        let (_, f) = setup(2);
        let q = field(&f, seed, 0.0);
        let q = q.scale(amp / q.max_abs());
        let u = velocity_from_density(&HeatState { t: 0.0, q1: q, mu }).unwrap();
        prop_assert!(curl(&u).unwrap().max_abs() < 1e-12 * (1.0 + u.max_abs()));
    }
}

#[test]
fn ft_norm_is_monotone_in_time() {
    let mut c = RunConfig::default();
    c.grid = GridConfig { dim: 2, n: 32, period: 16.0 };
    c.solver = SolverConfig { mode: Mode::ShallowWater, mu: 0.5, a: 1.0, dt: 0.02, t_end: 1.0, ..Default::default() };
    c.init.bump_width = 1.5;
    c.init.eps = 1e-2;
    let out = run(&c).unwrap();
    let series = ft_norm_series(&out.history).unwrap();
    for w in series.windows(2) {
        assert!(w[1] >= w[0]);
    }
}
