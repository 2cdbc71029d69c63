use cqnls::dynamics::{self, initial_state, read_snapshot, Perturbation, SimConfig, SplitStep, SpongeConfig};
use num::complex::Complex64;

fn base(omega0: f64, perturbation: Perturbation) -> SimConfig {
    let mut c = SimConfig::default();
    c.initial.omega0 = omega0;
    c.initial.perturbation = perturbation;
    c.half_width = 200.0;
    c.points = 1024;
    c.dt = 0.01;
    c.output_every = 0.5;
    c.sponge.enabled = false;
    c.analysis.spacing = 0.1;
    c
}

fn evolve(config: &SimConfig, dt: f64, t: f64) -> Vec<Complex64> {
    let mut psi = initial_state(config, None).unwrap();
    let mut stepper = SplitStep::new(config.grid().unwrap(), dt, true, SpongeConfig { enabled: false, ..Default::default() }).unwrap();
    let steps = (t / dt).round() as usize;
    stepper.advance(&mut psi, steps, 0.0).unwrap();
    psi
}

fn l2_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

#[test]
fn strang_splitting_is_second_order() {
    let mut c = base(0.1, Perturbation::RandomEven { epsilon: 0.05, bumps: 3 });
    c.half_width = 60.0;
    c.points = 512;
    c.seed = 5;
    let t = 2.0;
    let reference = evolve(&c, 0.0025, t);
    let e1 = l2_dist(&evolve(&c, 0.04, t), &reference);
    let e2 = l2_dist(&evolve(&c, 0.02, t), &reference);
    let e3 = l2_dist(&evolve(&c, 0.01, t), &reference);
    let (r1, r2) = (e1 / e2, e2 / e3);
    println!("errors {e1:e} {e2:e} {e3:e}, ratios {r1:.3} {r2:.3}");
    assert!((3.5..4.8).contains(&r1) && (3.5..4.8).contains(&r2), "ratios {r1} {r2}");
}

#[test]
fn unperturbed_soliton_is_stationary() {
    let mut c = base(0.1, Perturbation::None);
    c.t_end = 10.0;
    let out = dynamics::run(&c).unwrap();
    assert_eq!(out.summary.failed_frames, 0);
    let worst_omega = out.frames.iter().map(|f| (f.omega - 0.1).abs()).fold(0.0, f64::max);
    let worst_b = out.frames.iter().map(|f| f.b_abs).fold(0.0, f64::max);
    let phase_err = out.frames.iter().map(|f| (f.gamma - 0.1 * f.t).abs()).fold(0.0, f64::max);
    println!("omega {worst_omega:e} b {worst_b:e} phase {phase_err:e}");
    assert!(worst_omega <= 1e-8, "{worst_omega:e}");
    assert!(worst_b <= 1e-6, "{worst_b:e}");
    // The splitting shifts the phase by O(dt²) per unit time.
    assert!(phase_err <= 1e-5, "{phase_err:e}");
}

#[test]
fn frequency_shift_is_recovered_by_the_fit() {
    let delta = 2e-3;
    let mut c = base(0.05, Perturbation::OmegaShift { delta });
    c.t_end = 5.0;
    let out = dynamics::run(&c).unwrap();
    assert_eq!(out.summary.failed_frames, 0);
    // The shifted profile is an exact soliton, so the fit lands on ω₀ + δ.
    let worst = out.frames.iter().map(|f| (f.omega - 0.05 - delta).abs()).fold(0.0, f64::max);
    let worst_b = out.frames.iter().map(|f| f.b_abs).fold(0.0, f64::max);
    println!("omega {worst:e} b {worst_b:e}");
    assert!(worst <= 1e-7, "{worst:e}");
    assert!(worst_b <= 1e-5, "{worst_b:e}");
}

#[test]
fn small_kick_follows_the_linear_rotation() {
    // With ε small, b(s) ≈ b(0) e^{-iλs}: ḃ₁ = λb₂, ḃ₂ = -λb₁ up to O(ε²).
    for eps in [1e-3, 2e-3] {
        let mut c = base(0.05, Perturbation::InternalMode { epsilon: eps });
        c.t_end = 40.0;
        c.output_every = 0.25;
        let out = dynamics::run(&c).unwrap();
        assert_eq!(out.summary.failed_frames, 0);
        let lambda = out.summary.lambda0.unwrap();
        let f = &out.frames;
        let mut worst = 0.0f64;
        for j in 1..f.len() - 1 {
            let ds = f[j + 1].s - f[j - 1].s;
            let d1 = (f[j + 1].b1 - f[j - 1].b1) / ds;
            let d2 = (f[j + 1].b2 - f[j - 1].b2) / ds;
            worst = worst.max((d1 - lambda * f[j].b2).abs()).max((d2 + lambda * f[j].b1).abs());
        }
        let amp = f[0].b_abs;
        let m = out.summary.modulation_ratio.unwrap();
        println!("eps {eps}: |b(0)| {amp:e}, residual {worst:e}, residual/eps^2 {:.3}, modulation ratio {m:.3}", worst / (eps * eps));
        // Finite-difference truncation is λ³Δs²/6 · |b| ≈ 1e-5 |b|; the rest is nonlinear.
        assert!(worst <= 0.5 * eps * eps, "eps {eps}: {worst:e}");
        assert!(amp > 0.5 * eps && amp < 3.0 * eps);
        // Modulation rates are quadratic in the perturbation: |γ' - 1| + |ω'/ω| ≲ ‖νu‖².
        assert!(m <= 1.0, "modulation ratio {m}");
    }
}

#[test]
fn snapshot_restart_continues_the_same_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = base(0.1, Perturbation::Gaussian { epsilon: 0.02, width: 2.0 });
    c.t_end = 2.0;
    c.analysis.enabled = false;
    c.output.snapshot_dir = Some(dir.path().to_path_buf());
    c.output.snapshot_every = 2;
    let full = dynamics::run(&c).unwrap();
    let (n, l, t, mut psi) = read_snapshot(&dir.path().join("snapshot_000002.bin")).unwrap();
    assert_eq!((n, l, t), (c.points, c.half_width, 1.0));
    let mut stepper = SplitStep::new(c.grid().unwrap(), c.dt, true, c.sponge).unwrap();
    stepper.advance(&mut psi, 100, t).unwrap();
    assert!(l2_dist(&psi, &full.final_psi) <= 1e-12);
}

#[test]
fn unstable_time_step_is_rejected() {
    let mut c = base(0.1, Perturbation::None);
    c.dt = 1.0;
    assert!(dynamics::run(&c).is_err());
    let mut c = base(0.2, Perturbation::None);
    c.t_end = 1.0;
    assert!(dynamics::run(&c).is_err());
}
