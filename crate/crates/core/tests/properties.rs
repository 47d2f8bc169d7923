mod common;

use std::sync::Arc;

use common::{max_diff, random_even_field, random_field};
use novikov_core::besov::{BesovParams, DyadicPartition};
use novikov_core::integrator::{solve, SolverConfig};
use novikov_core::rhs::{mform_residual, rhs, RhsTerms, StatePair};
use novikov_core::spectral::{Field, Grid};
use num_complex::Complex64;
use proptest::prelude::*;

fn grid() -> Arc<Grid> {
    Grid::new(256, 12.0).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parseval(seed in any::<u64>(), amp in 0.01f64..10.0) {
        let g = grid();
        let f = random_field(&g, g.k_max(), amp, seed);
        let phys: f64 = f.values().iter().map(|v| v * v).sum::<f64>() * g.dx();
        let spec: f64 = f.spectrum().iter().map(|c| c.norm_sqr()).sum::<f64>() / (2.0 * g.half_width());
        prop_assert!(rel(phys, spec) < 1e-10);
    }

    #[test]
    fn multiplier_composition(seed in any::<u64>(), a in 0.1f64..3.0, b in -2.0f64..2.0) {
        let g = grid();
        let f = random_field(&g, g.k_max(), 1.0, seed);
        let sa = move |k: f64| Complex64::new(1.0 / (1.0 + a * k * k), 0.0);
        let sb = move |k: f64| Complex64::new(0.0, b * k);
        let two = f.apply_multiplier(sa).unwrap().apply_multiplier(sb).unwrap();
        let one = f.apply_multiplier(move |k| sa(k) * sb(k)).unwrap();
        prop_assert!(max_diff(&two, &one) <= 1e-10 * f.max_abs().max(1.0));
    }

    #[test]
    fn derivative_after_helmholtz_inverse(seed in any::<u64>()) {
        let g = grid();
        let f = random_field(&g, g.k_max(), 1.0, seed);
        let a = f.helmholtz_inverse().derivative();
        let b = f.helmholtz_dx();
        prop_assert!(max_diff(&a, &b) <= 1e-10 * b.max_abs().max(1e-300));
    }

    #[test]
    fn multiply_commutative_and_bilinear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let g = grid();
        let band = g.k_max() / 3.0;
        let f = random_field(&g, band, 1.0, seed);
        let h = random_field(&g, band, 1.0, seed.wrapping_add(1));
        let w = random_field(&g, band, 1.0, seed.wrapping_add(2));
        let fh = f.multiply(&h).unwrap();
        prop_assert!(max_diff(&fh, &h.multiply(&f).unwrap()) <= 1e-12 * fh.max_abs());
        let lhs = f.lincomb(a, &h, b).unwrap().multiply(&w).unwrap();
        let rhs_ = f.multiply(&w).unwrap().lincomb(a, &h.multiply(&w).unwrap(), b).unwrap();
        prop_assert!(max_diff(&lhs, &rhs_) <= 1e-12 * lhs.max_abs().max(1.0));
    }

    #[test]
    fn partition_reconstruction_and_disjointness(seed in any::<u64>()) {
        let g = Grid::new(512, 20.0).unwrap();
        let p = DyadicPartition::new(&g).unwrap();
        let f = random_field(&g, p.coverage(), 1.0, seed);
        prop_assert!(p.reconstruct(&f).unwrap().relative_l2_distance(&f).unwrap() < 1e-10);
        for j in -1..=p.j_max() {
            let bj = p.block(&f, j).unwrap();
            for jj in -1..=p.j_max() {
                if (j - jj).abs() >= 2 {
                    prop_assert_eq!(p.block(&bj, jj).unwrap().max_abs(), 0.0);
                }
            }
        }
    }

    #[test]
    fn bernstein(seed in any::<u64>(), p_exp in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0, 6.0])) {
        let g = Grid::new(512, 20.0).unwrap();
        let part = DyadicPartition::new(&g).unwrap();
        let f = random_field(&g, g.k_max(), 1.0, seed);
        for j in -1..=part.j_max() {
            let b = part.block(&f, j).unwrap();
            let lhs = b.derivative().lp_norm(p_exp).unwrap();
            let rhs_ = 8.0 / 3.0 * 2f64.powi(j) * b.lp_norm(p_exp).unwrap();
            prop_assert!(lhs <= rhs_ * (1.0 + 1e-6), "j = {}: {} > {}", j, lhs, rhs_);
        }
    }

    #[test]
    fn blockwise_monotone_embedding(seed in any::<u64>(), s1 in -2.0f64..3.0, ds in 0.0f64..2.0) {
        let g = Grid::new(512, 20.0).unwrap();
        let part = DyadicPartition::new(&g).unwrap();
        let f = random_field(&g, part.coverage(), 1.0, seed);
        let norms = part.block_norms(&f, 2.0).unwrap();
        for j in 0..=part.j_max() {
            let a = 2f64.powf(j as f64 * s1) * norms.block(j);
            let b = 2f64.powf(j as f64 * (s1 + ds)) * norms.block(j);
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn besov_scaling(seed in any::<u64>(), c in -50.0f64..50.0) {
        let g = Grid::new(512, 20.0).unwrap();
        let part = DyadicPartition::new(&g).unwrap();
        let f = random_field(&g, part.coverage(), 1.0, seed);
        let params = BesovParams::new(1.5, 3.0, 2.0).unwrap();
        let a = part.besov_norm(&f.scale(c), &params).unwrap();
        let b = c.abs() * part.besov_norm(&f, &params).unwrap();
        prop_assert!(rel(a, b) < 1e-13 || (a == 0.0 && b == 0.0));
    }

    #[test]
    fn novikov_reduction(seed in any::<u64>()) {
        let g = grid();
        let u = random_field(&g, g.k_max() / 3.0, 0.3, seed);
        let s = StatePair::new(Field::zeros(&g), u).unwrap();
        let d = rhs(&s).unwrap();
        prop_assert_eq!(d.rho_dot.max_abs(), 0.0);
        prop_assert!(mform_residual(&s, &d).unwrap().momentum < 1e-8);
    }

    #[test]
    fn momentum_form_equivalence(seed in any::<u64>()) {
        let g = grid();
        let band = g.k_max() / 3.0;
        let s = StatePair::new(
            random_field(&g, band, 0.3, seed),
            random_field(&g, band, 0.3, seed ^ 0x5555),
        ).unwrap();
        prop_assert!(mform_residual(&s, &rhs(&s).unwrap()).unwrap().max() < 1e-8);
    }

    #[test]
    fn even_data_give_odd_terms(seed in any::<u64>()) {
        let g = grid();
        let band = g.k_max() / 3.0;
        let s = StatePair::new(
            random_even_field(&g, band, 0.5, seed),
            random_even_field(&g, band, 0.5, seed ^ 0xabc),
        ).unwrap();
        let t = RhsTerms::evaluate(&s).unwrap();
        let n = g.n_points();
        for term in [&t.rho_advection, &t.rho_stretch, &t.u_advection, &t.p1, &t.p2, &t.p3, &t.r1, &t.r2] {
            let v = term.values();
            let scale = term.max_abs().max(1e-300);
            for i in 1..n {
                prop_assert!((v[i] + v[n - i]).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn cubic_scaling(seed in any::<u64>(), c in prop::sample::select(vec![0.5, 2.0, -1.0, 4.0])) {
        // Powers of two keep every rounding step exact.
        let g = grid();
        let band = g.k_max() / 3.0;
        let s = StatePair::new(
            random_field(&g, band, 0.3, seed),
            random_field(&g, band, 0.3, seed ^ 0x77),
        ).unwrap();
        let a = rhs(&s.scale(c)).unwrap();
        let b = rhs(&s).unwrap();
        let c3 = c * c * c;
        let (br, bu) = (b.rho_dot.scale(c3), b.u_dot.scale(c3));
        prop_assert_eq!(a.rho_dot.values(), br.values());
        prop_assert_eq!(a.u_dot.values(), bu.values());
    }

    #[test]
    fn solve_reduction_and_determinism(seed in any::<u64>()) {
        let g = Grid::new(64, std::f64::consts::PI).unwrap();
        let u = random_field(&g, 6.0, 0.2, seed);
        let s0 = StatePair::new(Field::zeros(&g), u).unwrap();
        let cfg = SolverConfig::default();
        let a = solve(&s0, 0.05, &[0.0, 0.02, 0.05], &cfg).unwrap();
        let b = solve(&s0, 0.05, &[0.0, 0.02, 0.05], &cfg).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            prop_assert_eq!(x.rho.max_abs(), 0.0);
            prop_assert_eq!(x.u.values(), y.u.values());
        }
    }
}
