//! The acceptance suite: fourteen numbered checks with pinned tolerances.
//! Each check reports what it measured, the bound it was held to and how
//! long it took.

use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dynamics::{self, Perturbation, RunSummary, SimConfig};
use crate::error::Result;
use crate::fgr_exact::{certify_gamma0, gamma0_numeric, gamma_numeric, moments_by_quadrature, p1_closed_form, richardson3, RatVec4};
use crate::grid::{Grid, GridFn};
use crate::operators::{
    build_k, check_conjugation_first, check_conjugation_second, observed_order, simon_inequality_check, simon_weight, virial_identity_check,
    BandLimited, OpName, OperatorBundle,
};
use crate::profiles::q0;
use crate::spectral::{build_internal_mode, compare_with_mode, solve_g, uniqueness_probe, ModeClass, Expansions, InternalMode};

pub const GAMMA0_TARGET: f64 = 18.887;
pub const GAMMA0_TOL: f64 = 1e-3;
pub const P1_TARGET: f64 = 1.770652;
pub const P1_TOL: f64 = 1e-6;
pub const FAST_SECONDS: f64 = 1.0;

pub const SLOPE_OMEGAS: [f64; 3] = [0.04, 0.02, 0.01];
pub const SLOPE_REL_TOL: f64 = 0.01;
pub const SOLVE_SECONDS: f64 = 30.0;

pub const AGREEMENT_OMEGAS: [f64; 3] = [0.01, 0.02, 0.05];
pub const LAMBDA_GAP_TOL: f64 = 1e-6;
pub const CORRELATION_TOL: f64 = 1e-6;

pub const REPULSIVITY_REL_TOL: f64 = 0.02;
pub const REPULSIVITY_SECONDS: f64 = 60.0;
/// Half-width and points of the grid on which 𝒦 is sampled.
pub const K_GRID: (f64, usize) = (40.0, 4096);

pub const GAMMA_REL_TOL: f64 = 0.03;
pub const GAMMA_SECONDS: f64 = 120.0;

pub const FACTORIZATION_TOL: f64 = 1e-4;
pub const FACTORIZATION_ORDER: f64 = 3.0;
/// Grid half-width and FD accuracy for the factorization checks.
pub const FACTORIZATION_GRID: (f64, usize) = (120.0, 6);
pub const FACTORIZATION_POINTS: (usize, usize) = (4096, 8192);

pub const RESONANCE_TOL: f64 = 1e-6;

pub const EXPANSION_OMEGAS: (f64, f64) = (0.01, 0.005);
pub const EXPANSION_TOL: f64 = 0.5;
pub const EXPANSION_RADIUS: f64 = 3.0;

pub const VIRIAL_TOL: f64 = 1e-4;
pub const VIRIAL_SEED: u64 = 7;
pub const VIRIAL_CORPUS: usize = 200;
pub const SIMON_C: f64 = 0.5;

pub const PROBE_OMEGA: f64 = 0.02;

pub const FREQUENCY_REL_TOL: f64 = 0.03;
pub const LINEAR_RUN_SECONDS: f64 = 600.0;

pub const MASS_DRIFT_TOL: f64 = 1e-10;
pub const ENERGY_DRIFT_TOL: f64 = 1e-6;

/// Orbital distance bound as a multiple of ε.
pub const ORBITAL_FACTOR: f64 = 5.0;
/// Last-quarter ω variation as a fraction of the first quarter.
pub const OMEGA_SETTLING: f64 = 0.1;
/// Frozen envelope ratio |b|(late) / |b|(early).
pub const ENVELOPE_RATIO: f64 = 0.7;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Criterion {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub measured: Value,
    pub tolerance: String,
    pub seconds: f64,
}

impl Criterion {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {:>2} {}: {} (tolerance: {}; {:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.tolerance,
            self.seconds
        )
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema: String,
    pub criteria: Vec<Criterion>,
    pub passed: bool,
}

pub const SCHEMA: &str = "cqnls.acceptance/1";

/// Internal modes shared between checks.
#[derive(Default)]
pub struct Context {
    modes: HashMap<u64, InternalMode>,
}

impl Context {
    pub fn mode(&mut self, omega: f64) -> Result<&InternalMode> {
        let key = omega.to_bits();
        if !self.modes.contains_key(&key) {
            self.modes.insert(key, build_internal_mode(omega)?);
        }
        Ok(&self.modes[&key])
    }
}

fn finish(id: usize, name: &str, start: Instant, tolerance: String, outcome: Result<(bool, Value)>) -> Criterion {
    let (passed, measured) = match outcome {
        Ok(v) => v,
        Err(e) => (false, json!({ "error": e.to_string() })),
    };
    Criterion { id, name: name.into(), passed, measured, tolerance, seconds: start.elapsed().as_secs_f64() }
}

pub fn exact_golden_rule() -> Criterion {
    let t = Instant::now();
    let out = certify_gamma0().map(|v| {
        let expect = RatVec4::basis(0).scale(&num::BigRational::new(32.into(), 3.into()));
        (v == expect && t.elapsed().as_secs_f64() < FAST_SECONDS, json!({ "gamma0_vector": v.to_strings() }))
    });
    finish(1, "exact golden-rule vector", t, format!("exactly [32/3, 0, 0, 0], < {FAST_SECONDS} s"), out)
}

pub fn gamma0_constants() -> Criterion {
    let t = Instant::now();
    let out = moments_by_quadrature(1).map(|m| {
        let (g0, p1c, p1q) = (gamma0_numeric(), p1_closed_form(), m[0].p);
        let ok = (g0 - GAMMA0_TARGET).abs() <= GAMMA0_TOL && (p1q - P1_TARGET).abs() <= P1_TOL && (p1c - P1_TARGET).abs() <= P1_TOL;
        (ok && t.elapsed().as_secs_f64() < FAST_SECONDS, json!({ "gamma0": g0, "p1_closed_form": p1c, "p1_quadrature": p1q }))
    });
    finish(2, "numeric golden-rule constant", t, format!("|Γ₀ - {GAMMA0_TARGET}| ≤ {GAMMA0_TOL}, |p₁ - {P1_TARGET}| ≤ {P1_TOL}, < {FAST_SECONDS} s"), out)
}

pub fn internal_mode_slope(ctx: &mut Context) -> Criterion {
    let t = Instant::now();
    let out = (|| {
        let mut ratios = Vec::new();
        let mut slowest = 0.0f64;
        for w in SLOPE_OMEGAS {
            let s = Instant::now();
            ratios.push(ctx.mode(w)?.alpha / w);
            slowest = slowest.max(s.elapsed().as_secs_f64());
        }
        let extrapolated = richardson3(ratios[0], ratios[1], ratios[2]);
        let rel = (extrapolated / (8.0 / 9.0) - 1.0).abs();
        // α = (8/9)ω + ω²α̃(ω): report α̃ and its slope between neighbouring ω as a smoothness check.
        let tilde: Vec<f64> = SLOPE_OMEGAS.iter().zip(&ratios).map(|(w, r)| (r - 8.0 / 9.0) / w).collect();
        let tilde_slopes: Vec<f64> = (0..2).map(|i| (tilde[i] - tilde[i + 1]) / (SLOPE_OMEGAS[i] - SLOPE_OMEGAS[i + 1])).collect();
        let measured = json!({
            "alpha_over_omega": ratios, "extrapolated": extrapolated, "relative_error": rel, "slowest_solve_s": slowest,
            "alpha_tilde": tilde, "alpha_tilde_slopes": tilde_slopes,
        });
        Ok((rel <= SLOPE_REL_TOL && slowest < SOLVE_SECONDS, measured))
    })();
    finish(3, "internal-mode slope", t, format!("within {}% of 8/9, each solve < {SOLVE_SECONDS} s", SLOPE_REL_TOL * 100.0), out)
}

pub fn method_agreement(ctx: &mut Context) -> Criterion {
    let t = Instant::now();
    let out = (|| {
        let mut rows = Vec::new();
        let mut ok = true;
        for w in AGREEMENT_OMEGAS {
            let (_, c) = compare_with_mode(ctx.mode(w)?)?;
            ok &= c.lambda_gap <= LAMBDA_GAP_TOL && c.w2_correlation >= 1.0 - CORRELATION_TOL;
            rows.push(json!({ "omega": w, "lambda_gap": c.lambda_gap, "correlation": c.w2_correlation }));
        }
        Ok((ok, Value::Array(rows)))
    })();
    finish(4, "Birman-Schwinger vs direct eigensolver", t, format!("|Δλ| ≤ {LAMBDA_GAP_TOL:e}, correlation ≥ 1 - {CORRELATION_TOL:e}"), out)
}

pub fn repulsivity(ctx: &mut Context) -> Criterion {
    let t = Instant::now();
    let out = (|| {
        let grid = Grid::new(K_GRID.0, K_GRID.1)?;
        let mut ratios = Vec::new();
        for w in SLOPE_OMEGAS {
            ratios.push(build_k(ctx.mode(w)?, grid)?.repulsivity_integral() / w);
        }
        let extrapolated = richardson3(ratios[0], ratios[1], ratios[2]);
        let rel = (extrapolated / (32.0 / 9.0) - 1.0).abs();
        let positive = ratios.iter().all(|r| *r > 0.0);
        let ok = rel <= REPULSIVITY_REL_TOL && positive && t.elapsed().as_secs_f64() < REPULSIVITY_SECONDS;
        Ok((ok, json!({ "integral_over_omega": ratios, "extrapolated": extrapolated, "relative_error": rel })))
    })();
    finish(5, "repulsivity integral", t, format!("within {}% of 32/9, all positive, < {REPULSIVITY_SECONDS} s", REPULSIVITY_REL_TOL * 100.0), out)
}

pub fn golden_rule_numeric(ctx: &mut Context) -> Criterion {
    let t = Instant::now();
    let out = (|| {
        let mut ratios = Vec::new();
        for w in SLOPE_OMEGAS {
            let mode = ctx.mode(w)?;
            let pair = solve_g(mode)?;
            ratios.push(gamma_numeric(mode, &pair)?.ratio());
        }
        let extrapolated = richardson3(ratios[0], ratios[1], ratios[2]);
        let rel = (extrapolated / gamma0_numeric() - 1.0).abs();
        let ok = rel <= GAMMA_REL_TOL && t.elapsed().as_secs_f64() < GAMMA_SECONDS;
        Ok((ok, json!({ "gamma_over_omega": ratios, "extrapolated": extrapolated, "relative_error": rel })))
    })();
    finish(6, "golden-rule coefficient", t, format!("within {}% of Γ₀, < {GAMMA_SECONDS} s", GAMMA_REL_TOL * 100.0), out)
}

pub fn factorizations(ctx: &mut Context) -> Criterion {
    let t = Instant::now();
    let out = (|| {
        let w = 0.02;
        let mode = ctx.mode(w)?.clone();
        let (l, acc) = FACTORIZATION_GRID;
        let first = |n| -> Result<(f64, f64)> {
            let b = OperatorBundle::new(w, Grid::new(l, n)?)?.with_accuracy(acc);
            let r = check_conjugation_first(&b, &[GridFn::from_fn(*b.grid(), |y| (-y * y).exp())])?[0];
            Ok((r.conjugation, r.worst()))
        };
        let second = |n| -> Result<f64> {
            let b = OperatorBundle::new(w, Grid::new(l, n)?)?.with_accuracy(acc).with_mode(&mode)?;
            check_conjugation_second(&b, &GridFn::from_fn(*b.grid(), |y| (-0.5 * y * y).exp()))
        };
        let (c1, f1) = (first(FACTORIZATION_POINTS.0)?, first(FACTORIZATION_POINTS.1)?);
        let (c2, f2) = (second(FACTORIZATION_POINTS.0)?, second(FACTORIZATION_POINTS.1)?);
        let (o1, o2) = (observed_order(c1.0, f1.0), observed_order(c2, f2));
        let ok = f1.1 <= FACTORIZATION_TOL && f2 <= FACTORIZATION_TOL && o1 >= FACTORIZATION_ORDER && o2 >= FACTORIZATION_ORDER;
        Ok((ok, json!({ "first_residual": f1.1, "first_order": o1, "second_residual": f2, "second_order": o2 })))
    })();
    finish(7, "factorization identities", t, format!("residual ≤ {FACTORIZATION_TOL:e} at N = 8192, order ≥ {FACTORIZATION_ORDER}"), out)
}

pub fn resonance() -> Criterion {
    let t = Instant::now();
    let out = (|| {
        let b = OperatorBundle::new(0.0, Grid::new(40.0, 8192)?)?;
        let g = *b.grid();
        let r = GridFn::from_fn(g, |y| 1.0 - q0(y).powi(2));
        let e1 = b.apply(OpName::LPlus, &r)?.map(|v| v - 1.0).interior_sup_norm();
        let e2 = b.apply(OpName::LMinus, &GridFn::from_fn(g, |_| 1.0))?.sub(&r)?.interior_sup_norm();
        Ok((e1 <= RESONANCE_TOL && e2 <= RESONANCE_TOL, json!({ "l_plus_error": e1, "l_minus_error": e2 })))
    })();
    finish(8, "threshold resonance at zero frequency", t, format!("interior error ≤ {RESONANCE_TOL:e}"), out)
}

pub fn expansion_error(mode: &InternalMode, ex: &Expansions) -> f64 {
    let g = mode.grid();
    let w = mode.omega;
    (0..g.len())
        .filter(|&j| g.node(j).abs() <= EXPANSION_RADIUS)
        .map(|j| {
            let y = g.node(j);
            ((mode.v1.at(j) - (1.0 - q0(y).powi(2))) / w - ex.r1(y)).abs()
        })
        .fold(0.0, f64::max)
}

pub fn eigenfunction_expansion(ctx: &mut Context) -> Criterion {
    let t = Instant::now();
    let out = (|| {
        let ex = Expansions::new()?;
        let a = expansion_error(ctx.mode(EXPANSION_OMEGAS.0)?, &ex);
        let b = expansion_error(ctx.mode(EXPANSION_OMEGAS.1)?, &ex);
        Ok((a <= EXPANSION_TOL && b < a, json!({ "error": [a, b], "omegas": [EXPANSION_OMEGAS.0, EXPANSION_OMEGAS.1] })))
    })();
    finish(9, "first-order eigenfunction expansion", t, format!("≤ {EXPANSION_TOL} at ω = 0.01 and smaller at ω = 0.005"), out)
}

pub fn virial(ctx: &mut Context) -> Criterion {
    let t = Instant::now();
    let out = (|| {
        let k = build_k(ctx.mode(0.02)?, Grid::new(K_GRID.0, K_GRID.1)?)?;
        let weight = simon_weight(&k);
        let mut worst_gap = 0.0f64;
        let mut min_slack = f64::INFINITY;
        for h in BandLimited::corpus(VIRIAL_SEED, VIRIAL_CORPUS) {
            worst_gap = worst_gap.max(virial_identity_check(&k, &h)?.relative_gap());
            let d = h.sample(*k.grid(), 1);
            let s = simon_inequality_check(&weight, SIMON_C, &d[0], &d[1])?;
            min_slack = min_slack.min(s.slack / s.rhs);
        }
        Ok((worst_gap <= VIRIAL_TOL && min_slack >= 0.0, json!({ "worst_relative_gap": worst_gap, "min_relative_slack": min_slack })))
    })();
    finish(10, "virial identity and weighted inequality", t, format!("gap ≤ {VIRIAL_TOL:e} on {VIRIAL_CORPUS} functions, slack ≥ 0"), out)
}

pub fn uniqueness() -> Criterion {
    let t = Instant::now();
    let out = uniqueness_probe(PROBE_OMEGA).map(|r| {
        let boxes: Vec<Value> = r
            .boxes
            .iter()
            .map(|b| {
                let internal: Vec<f64> = b.pairs.iter().filter(|p| p.class == ModeClass::InternalMode).map(|p| p.lambda).collect();
                json!({ "half_width": b.half_width, "zero_modes": b.zero_count, "sub_threshold": b.sub_threshold_count, "internal_lambda": internal })
            })
            .collect();
        (r.passes(), json!({ "stable": r.stable, "boxes": boxes }))
    });
    finish(11, "uniqueness of the internal mode", t, "one internal mode plus two zero modes, stable under doubling L".into(), out)
}

/// Run configuration for the linear-regime frequency check.
pub fn linear_run_config() -> SimConfig {
    let mut c = SimConfig::default();
    c.initial.omega0 = 0.05;
    c.initial.perturbation = Perturbation::InternalMode { epsilon: 0.02 };
    c.half_width = 1200.0;
    c.points = 4096;
    c.dt = 1e-3;
    c.t_end = 500.0;
    c.output_every = 0.5;
    c.sponge.enabled = true;
    c
}

pub fn conservation_run_config() -> SimConfig {
    let mut c = linear_run_config();
    c.t_end = 200.0;
    c.output_every = 1.0;
    c.sponge.enabled = false;
    c.analysis.enabled = false;
    c
}

/// Long sponge-on run for the damping trend (s ≈ 2000).
///
/// ω₀ sits below 0.1 so the fitted ω, which oscillates by about 1% at this ε, stays where the mode exists.
pub fn damping_run_config() -> SimConfig {
    let mut c = SimConfig::default();
    c.initial.omega0 = 0.09;
    c.initial.perturbation = Perturbation::InternalMode { epsilon: 0.05 };
    c.half_width = 600.0;
    c.points = 4096;
    c.dt = 0.02;
    c.t_end = 22224.0;
    c.output_every = 2.0;
    c.sponge.enabled = true;
    c
}

/// Short runs with other even perturbations for the orbital bound.
pub fn stability_run_configs() -> Vec<(f64, SimConfig)> {
    let base = || {
        let mut c = linear_run_config();
        c.t_end = 200.0;
        c.output_every = 1.0;
        c
    };
    let mut gauss = base();
    gauss.initial.perturbation = Perturbation::Gaussian { epsilon: 0.03, width: 2.0 };
    let mut random = base();
    random.initial.perturbation = Perturbation::RandomEven { epsilon: 0.03, bumps: 4 };
    random.seed = 11;
    vec![(0.03, gauss), (0.03, random)]
}

fn run_summary(c: &SimConfig) -> Result<RunSummary> {
    Ok(dynamics::run(c)?.summary)
}

pub fn linear_regime() -> Criterion {
    let t = Instant::now();
    let out = run_summary(&linear_run_config()).map(|s| {
        let rel = s.b_frequency_rel_error.unwrap_or(f64::INFINITY);
        let ok = rel <= FREQUENCY_REL_TOL && s.failed_frames == 0 && t.elapsed().as_secs_f64() <= LINEAR_RUN_SECONDS;
        (ok, json!({ "b_frequency": s.b_frequency, "lambda": s.lambda0, "relative_error": rel, "s_end": s.s_end, "failed_frames": s.failed_frames,
            "modulation_ratio": s.modulation_ratio }))
    });
    finish(12, "internal-mode oscillation frequency", t, format!("within {}% of λ(ω₀), ≤ {LINEAR_RUN_SECONDS} s", FREQUENCY_REL_TOL * 100.0), out)
}

pub fn conservation() -> Criterion {
    let t = Instant::now();
    let out = run_summary(&conservation_run_config()).map(|s| {
        let ok = s.mass_drift_rel <= MASS_DRIFT_TOL && s.energy_drift_rel <= ENERGY_DRIFT_TOL;
        (ok, json!({ "mass_drift": s.mass_drift_rel, "energy_drift": s.energy_drift_rel, "parity_defect": s.max_parity_defect }))
    });
    finish(13, "conservation without sponge", t, format!("mass ≤ {MASS_DRIFT_TOL:e}, energy ≤ {ENERGY_DRIFT_TOL:e} relative over T = 200"), out)
}

/// Mean |b| per window of 250 in s, and the least-squares slope of 1/|b|² in s after the
/// initial transient. Golden-rule damping d|b|²/ds ≈ -k|b|⁴ makes 1/|b|² grow like k·s, so the
/// slope estimates k and the s at which the envelope ratio would reach the frozen threshold.
fn damping_trend(frames: &[dynamics::FrameRecord]) -> Value {
    let pts: Vec<(f64, f64)> = frames.iter().filter(|f| f.b_abs.is_finite() && f.b_abs > 0.0).map(|f| (f.s, f.b_abs)).collect();
    let s_end = pts.last().map_or(0.0, |p| p.0);
    let windows: Vec<f64> = (0..(s_end / 250.0).ceil() as usize)
        .map(|k| {
            let w: Vec<f64> = pts.iter().filter(|p| p.0 >= 250.0 * k as f64 && p.0 < 250.0 * (k + 1) as f64).map(|p| p.1).collect();
            w.iter().sum::<f64>() / w.len().max(1) as f64
        })
        .collect();
    let fit: Vec<(f64, f64)> = pts.iter().filter(|p| p.0 >= 100.0).map(|p| (p.0, p.1.powi(-2))).collect();
    let n = fit.len() as f64;
    let (ms, mv) = (fit.iter().map(|p| p.0).sum::<f64>() / n, fit.iter().map(|p| p.1).sum::<f64>() / n);
    let cov: f64 = fit.iter().map(|p| (p.0 - ms) * (p.1 - mv)).sum();
    let var: f64 = fit.iter().map(|p| (p.0 - ms).powi(2)).sum();
    let k = cov / var;
    let first = windows.first().copied().unwrap_or(f64::NAN);
    // 1/|b|² has to grow by the factor 1/ratio² from its starting value.
    let s_needed = (ENVELOPE_RATIO.powi(-2) - 1.0) / (first * first * k);
    json!({ "window": 250.0, "mean_b_abs": windows, "inverse_b2_slope": k, "s_to_envelope_threshold": if k > 0.0 { s_needed } else { f64::INFINITY } })
}

pub fn stability() -> Criterion {
    let t = Instant::now();
    let out = (|| {
        let mut ok = true;
        let mut rows = Vec::new();
        for (eps, c) in stability_run_configs() {
            let s = run_summary(&c)?;
            let pass = s.max_orbital_distance < ORBITAL_FACTOR * eps;
            ok &= pass;
            rows.push(json!({ "perturbation": c.initial.perturbation, "epsilon": eps, "max_orbital_distance": s.max_orbital_distance }));
        }
        let c = damping_run_config();
        let eps = match c.initial.perturbation {
            Perturbation::InternalMode { epsilon } => epsilon,
            _ => unreachable!("damping run uses an internal-mode kick"),
        };
        let run = dynamics::run(&c)?;
        let trend = damping_trend(&run.frames);
        let s = run.summary;
        let ratio = s.envelope_ratio().unwrap_or(f64::INFINITY);
        let settle = s.omega_variation_last_quarter / s.omega_variation_first_quarter;
        let orbital = s.max_orbital_distance < ORBITAL_FACTOR * eps;
        ok &= orbital && settle <= OMEGA_SETTLING && ratio <= ENVELOPE_RATIO;
        rows.push(json!({
            "perturbation": c.initial.perturbation, "epsilon": eps, "max_orbital_distance": s.max_orbital_distance,
            "s_end": s.s_end, "envelope_ratio": ratio, "omega_settling": settle,
            "int_b4": s.int_b4, "failed_frames": s.failed_frames, "modulation_ratio": s.modulation_ratio,
            "damping_trend": trend,
        }));
        Ok((ok, Value::Array(rows)))
    })();
    finish(
        14,
        "orbital stability and damping trend",
        t,
        format!("orbital distance < {ORBITAL_FACTOR}ε, late/early ω variation ≤ {OMEGA_SETTLING}, |b| envelope ratio ≤ {ENVELOPE_RATIO}"),
        out,
    )
}

/// Run the selected criteria (all when `only` is empty).
pub fn run_suite(only: &[usize]) -> SuiteReport {
    let mut ctx = Context::default();
    let want = |id: usize| only.is_empty() || only.contains(&id);
    let mut criteria = Vec::new();
    let mut push = |id: usize, f: &mut dyn FnMut(&mut Context) -> Criterion| {
        if want(id) {
            criteria.push(f(&mut ctx));
        }
    };
    push(1, &mut |_| exact_golden_rule());
    push(2, &mut |_| gamma0_constants());
    push(3, &mut internal_mode_slope);
    push(4, &mut method_agreement);
    push(5, &mut repulsivity);
    push(6, &mut golden_rule_numeric);
    push(7, &mut factorizations);
    push(8, &mut |_| resonance());
    push(9, &mut eigenfunction_expansion);
    push(10, &mut virial);
    push(11, &mut |_| uniqueness());
    push(12, &mut |_| linear_regime());
    push(13, &mut |_| conservation());
    push(14, &mut |_| stability());
    let passed = criteria.iter().all(|c| c.passed);
    SuiteReport { schema: SCHEMA.into(), criteria, passed }
}
