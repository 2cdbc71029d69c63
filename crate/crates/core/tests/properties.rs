//! Property tests for the invariants each module promises.

use cqnls::dynamics::{self, Perturbation, SimConfig};
use cqnls::grid::{apply_shifted, diff, inner, solve_shifted, Grid, GridFn, Parity};
use cqnls::operators::{BandLimited, OpName, OperatorBundle};
use cqnls::profiles::{e0, q0, Soliton};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn smooth(seed: u64, grid: Grid) -> GridFn {
    let h = BandLimited::random(&mut ChaCha8Rng::seed_from_u64(seed));
    h.sample(grid, 0).remove(0)
}

fn bump(grid: Grid, c: f64, w: f64) -> GridFn {
    GridFn::from_fn(grid, |y| (-(y - c).powi(2) / (2.0 * w * w)).exp())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn trapezoid_is_exact_for_piecewise_linear_data(a in -5.0..5.0f64, b in -5.0..5.0f64, k in -3.0..3.0f64, l in 1.0..20.0f64, m in 0usize..400) {
        // a + b·y + k·|y - y_m| has its only kink at the node y_m.
        let g = Grid::new(l, 400).unwrap();
        let ym = g.node(m);
        let f = GridFn::from_fn(g, |y| a + b * y + k * (y - ym).abs());
        let exact = 2.0 * a * l + 0.5 * k * ((l + ym).powi(2) + (l - ym).powi(2));
        prop_assert!((f.integrate() - exact).abs() <= 1e-10 * (1.0 + exact.abs()));
    }

    #[test]
    fn even_functions_integrate_like_their_reflection(seed in any::<u64>()) {
        let g = Grid::new(20.0, 800).unwrap();
        let h = smooth(seed, g);
        let even = h.add(&h.reflect()).unwrap().with_parity(Parity::Even);
        prop_assert!((even.integrate() - even.reflect().integrate()).abs() <= 1e-12 * (1.0 + even.integrate().abs()));
    }

    #[test]
    fn inner_product_is_symmetric_bilinear_positive(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>(), a in -3.0..3.0f64) {
        let g = Grid::new(20.0, 800).unwrap();
        let (f, h, k) = (smooth(s1, g), smooth(s2, g), smooth(s3, g));
        let fh = inner(&f, &h).unwrap();
        prop_assert!((fh - inner(&h, &f).unwrap()).abs() <= 1e-12 * (1.0 + fh.abs()));
        let lhs = inner(&f.lin_comb(a, &k, 1.0).unwrap(), &h).unwrap();
        let rhs = a * fh + inner(&k, &h).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        prop_assert!(inner(&f, &f).unwrap() >= 0.0);
    }

    #[test]
    fn repeated_first_derivative_matches_second(seed in any::<u64>()) {
        let g = Grid::new(20.0, 4000).unwrap();
        let f = smooth(seed, g);
        let dd = diff(&diff(&f, 1).unwrap(), 1).unwrap();
        let d2 = diff(&f, 2).unwrap();
        let scale = d2.sup_norm().max(1e-3);
        prop_assert!(dd.sub(&d2).unwrap().interior_sup_norm() <= 1e-4 * scale);
    }

    #[test]
    fn shifted_solve_round_trips(seed in any::<u64>(), c in 0.5..4.0f64) {
        let g = Grid::new(20.0, 2000).unwrap();
        let rhs = smooth(seed, g);
        let u = solve_shifted(c, &rhs).unwrap();
        let back = apply_shifted(c, &u).unwrap();
        let n = g.len();
        let skip = n / 20;
        let err = (skip..n - skip).map(|j| (back.at(j) - rhs.at(j)).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-8 * rhs.sup_norm().max(1e-3));
    }

    #[test]
    fn mass_increases_with_frequency(w in 1e-3..0.1f64) {
        let h = 1e-5;
        let m = |w: f64| Soliton::new(w).unwrap().mass();
        prop_assert!(m(w + h) - m(w - h) > 0.0);
        prop_assert!(Soliton::new(w).unwrap().c_omega() > 0.0);
    }

    #[test]
    fn physical_profile_matches_textbook_formula(w in 1e-3..0.1f64, x in -60.0..60.0f64) {
        let a = (1.0 + 16.0 * w / 3.0).sqrt();
        let want = (4.0 * w / (1.0 + a * (2.0 * w.sqrt() * x).cosh())).sqrt();
        let got = Soliton::new(w).unwrap().phi(x);
        prop_assert!((got - want).abs() <= 1e-13 * want.max(1e-300) + 1e-300);
    }

    #[test]
    fn omega_derivative_at_zero_is_e(y in -12.0..12.0f64) {
        // (Q_h - Q_0)/h = E + O(h).
        for h in [1e-3, 1e-4] {
            let dq = (Soliton::new(h).unwrap().q(y) - q0(y)) / h;
            prop_assert!((dq - e0(y)).abs() <= 5.0 * h, "h = {h}: {dq} vs {}", e0(y));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn linearized_operators_are_symmetric(c1 in -5.0..5.0f64, c2 in -5.0..5.0f64, w1 in 0.5..2.0f64, w2 in 0.5..2.0f64) {
        let b = OperatorBundle::new(0.02, Grid::new(30.0, 3000).unwrap()).unwrap();
        let g = *b.grid();
        let (f, h) = (bump(g, c1, w1), bump(g, c2, w2));
        for op in [OpName::LPlus, OpName::LMinus, OpName::MPlus, OpName::MMinus] {
            let a = inner(&b.apply(op, &f).unwrap(), &h).unwrap();
            let c = inner(&f, &b.apply(op, &h).unwrap()).unwrap();
            prop_assert!((a - c).abs() <= 1e-9 * (1.0 + a.abs()), "{op:?}: {a} vs {c}");
        }
        let sf = inner(&b.apply(OpName::S, &f).unwrap(), &h).unwrap();
        let fs = inner(&f, &b.apply(OpName::SStar, &h).unwrap()).unwrap();
        prop_assert!((sf - fs).abs() <= 1e-9 * (1.0 + sf.abs()), "S: {sf} vs {fs}");
    }

    #[test]
    fn parity_is_preserved(w in 0.5..2.0f64, c in 0.0..3.0f64) {
        let b = OperatorBundle::new(0.02, Grid::new(30.0, 3000).unwrap()).unwrap();
        let g = *b.grid();
        let even = bump(g, c, w).add(&bump(g, -c, w)).unwrap().with_parity(Parity::Even);
        let odd = bump(g, c, w).sub(&bump(g, -c, w)).unwrap().with_parity(Parity::Odd);
        for op in [OpName::LPlus, OpName::LMinus, OpName::MPlus, OpName::MMinus] {
            let r = b.apply(op, &even).unwrap();
            prop_assert_eq!(r.parity(), Parity::Even);
            prop_assert!(r.parity_defect() <= 1e-10 * r.sup_norm());
        }
        for op in [OpName::S, OpName::SStar] {
            prop_assert_eq!(b.apply(op, &even).unwrap().parity(), Parity::Odd);
            prop_assert_eq!(b.apply(op, &odd).unwrap().parity(), Parity::Even);
        }
    }
}

fn small_config(seed: u64, epsilon: f64) -> SimConfig {
    let mut c = SimConfig::default();
    c.initial.omega0 = 0.1;
    c.initial.perturbation = Perturbation::RandomEven { epsilon, bumps: 3 };
    c.seed = seed;
    c.half_width = 100.0;
    c.points = 512;
    c.dt = 0.01;
    c.t_end = 20.0;
    c.output_every = 1.0;
    c.analysis.enabled = false;
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sponge_off_runs_conserve_mass_and_parity(seed in any::<u64>(), eps in 0.0..0.05f64) {
        let out = dynamics::run(&small_config(seed, eps)).unwrap();
        prop_assert!(out.summary.mass_drift_rel <= 1e-12, "{:e}", out.summary.mass_drift_rel);
        prop_assert!(out.summary.max_parity_defect <= 1e-10, "{:e}", out.summary.max_parity_defect);
        prop_assert_eq!(out.summary.failed_frames, 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3))]

    #[test]
    fn frame_invariants_hold_at_every_frame(seed in any::<u64>(), eps in 0.005..0.03f64) {
        let mut c = small_config(seed, eps);
        c.initial.omega0 = 0.05;
        c.half_width = 200.0;
        c.points = 1024;
        c.analysis.enabled = true;
        c.analysis.spacing = 0.1;
        let out = dynamics::run(&c).unwrap();
        for f in &out.frames {
            prop_assert!(f.analyzed, "frame {} not analyzed: {:?}", f.index, f.error);
            let orth = [f.u_orth_lambda_q, f.u_orth_q, f.v_orth_lambda_q, f.v_orth_q, f.v_orth_v1, f.v_orth_v2];
            prop_assert!(orth.iter().all(|v| *v <= 1e-5), "frame {}: {orth:?}", f.index);
            prop_assert!(f.reconstruction <= 1e-12);
        }
    }
}
