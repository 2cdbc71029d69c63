//! The bounded generalized eigenfunctions (g₁, g₂) at frequency 2λ:
//! L₊g₁ = 2λg₂, L₋g₂ = 2λg₁, with g₁ = (S*)²h₁, g₂ = L₊g₁/(2λ), where
//! h₁ = -cos τy + ľ₁ + ľ₂, h₂ = -cos τy + ľ₁ - ľ₂ and (ľ₁, ľ₂) is the fixed
//! point of the integral equations
//!   ľ₁ = -(1/τ)∫₀^y sin(τ(y-s)) f₁(s) ds,   ľ₂ = (1/2c)∫ e^{-c|y-s|} f₂(s) ds,
//!   f₁ = (ω/3)Q⁴(ľ₁ - 2ľ₂ - cos τs),         f₂ = (ω/3)Q⁴(-2ľ₁ + ľ₂ + 2cos τs),
//! with c = sqrt(2 + τ²).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mode::{l_plus, ode_jet2, s_star_sq, InternalMode};
use super::quad::{ExpConv, KernelQuad};
use crate::error::{Error, Result};
use crate::grid::{diff_p, inner, Grid, GridFn, Parity};
use crate::jet::Jet;
use crate::profiles::Soliton;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenOptions {
    /// Support box for the Q⁴-weighted sources.
    pub source_half_width: f64,
    pub source_points: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for GoldenOptions {
    fn default() -> Self {
        GoldenOptions { source_half_width: 14.0, source_points: 1121, max_iterations: 200, tolerance: 1e-10 }
    }
}

/// Pointwise evaluator of h and g with exact derivatives.
#[derive(Clone, Debug)]
pub struct GoldenEval {
    pub soliton: Soliton,
    pub omega: f64,
    pub lambda: f64,
    pub tau: f64,
    pub c: f64,
    quad: KernelQuad,
    f1: Vec<f64>,
    conv2: ExpConv,
    /// ∫₀^∞ cos(τs) f₁ and ∫₀^∞ sin(τs) f₁.
    totals: (f64, f64),
}

impl GoldenEval {
    /// (∫₀^y cos τs f₁, ∫₀^y sin τs f₁).
    fn partial(&self, y: f64) -> (f64, f64) {
        let s = y.abs();
        let (ic, is) = if s >= self.quad.half_width() {
            self.totals
        } else {
            let t = self.tau;
            (
                self.quad.integrate(0.0, s, None, |x| (t * x).cos(), &self.f1),
                self.quad.integrate(0.0, s, None, |x| (t * x).sin(), &self.f1),
            )
        };
        // f₁ even: the cosine moment is odd in y, the sine moment even.
        (y.signum() * ic, is)
    }

    /// (ľ₁, ľ₁', ľ₂, ľ₂').
    fn corrections(&self, y: f64) -> [f64; 4] {
        let t = self.tau;
        let (ic, is) = self.partial(y);
        let (sn, cs) = (t * y).sin_cos();
        let l1 = -(sn * ic - cs * is) / t;
        let d1 = -(cs * ic + sn * is);
        let (v2, d2) = self.conv2.eval(&self.quad, y);
        let k = 0.5 / self.c;
        [l1, d1, k * v2, k * d2]
    }

    /// Jets of the channel functions (-cos τy + ľ₁, ľ₂).
    pub fn z_jets(&self, y: f64) -> [Jet; 2] {
        let t = self.tau;
        let w = self.omega;
        let [l1, d1, l2, d2] = self.corrections(y);
        let (sn, cs) = (t * y).sin_cos();
        let z0 = [-cs + l1, l2];
        let z1 = [t * sn + d1, d2];
        let q4 = self.soliton.q_jet(y).powi(4).scale(-w / 3.0);
        let coupling = [[q4, q4.scale(-2.0)], [q4.scale(-2.0), q4]];
        ode_jet2(z0, z1, [-t * t, self.c * self.c], &coupling, &[Jet::zero(), Jet::zero()])
    }

    pub fn h_jets(&self, y: f64) -> [Jet; 2] {
        let [z1, z2] = self.z_jets(y);
        [z1 + z2, z1 - z2]
    }

    pub fn g_jets(&self, y: f64) -> [Jet; 2] {
        let [h1, _] = self.h_jets(y);
        let g1 = s_star_sq(&self.soliton, &h1, y);
        let g2 = l_plus(&self.soliton, &g1, y).scale(0.5 / self.lambda);
        [g1, g2]
    }

    /// (g₁, g₂, h₁, h₂) at y.
    pub fn values(&self, y: f64) -> [f64; 4] {
        let [h1, h2] = self.h_jets(y);
        let g1 = s_star_sq(&self.soliton, &h1, y);
        let g2 = l_plus(&self.soliton, &g1, y).scale(0.5 / self.lambda);
        [g1.value(), g2.value(), h1.value(), h2.value()]
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct GoldenDiagnostics {
    pub iterations: usize,
    pub last_update: f64,
    /// ‖L₊g₁ - 2λg₂‖ / ‖g₁‖ and ‖L₋g₂ - 2λg₁‖ / ‖g₁‖ on the interior.
    pub residuals: [f64; 2],
    /// |⟨g₁,Q⟩|, |⟨g₂,Λ_ωQ⟩|, |⟨g₁,V₂⟩|, |⟨g₂,V₁⟩|, each over ∫|f||g|.
    pub orthogonality: [f64; 4],
    /// max |h_j + cos τy| / ω.
    pub h_deviation: f64,
}

#[derive(Clone, Debug)]
pub struct GoldenRulePair {
    pub omega: f64,
    pub tau: f64,
    pub g1: GridFn,
    pub g2: GridFn,
    pub h1: GridFn,
    pub h2: GridFn,
    pub eval: GoldenEval,
    pub diagnostics: GoldenDiagnostics,
}

impl GoldenRulePair {
    pub fn grid(&self) -> &Grid {
        self.g1.grid()
    }
}

fn fixed_point(mode: &InternalMode, opts: &GoldenOptions) -> Result<(GoldenEval, usize, f64)> {
    let w = mode.omega;
    let soliton = mode.soliton();
    let lambda = mode.lambda;
    let tau = mode.tau;
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("2λ - 1 must be positive, got tau = {tau}")));
    }
    let c = (2.0 + tau * tau).sqrt();
    let n = opts.source_points | 1;
    let quad = KernelQuad::new(opts.source_half_width, n)?;
    let nodes = quad.nodes().to_vec();
    let mid = n / 2;
    let wq4: Vec<f64> = nodes.iter().map(|&y| w / 3.0 * soliton.q(y).powi(4)).collect();
    let cos_t: Vec<f64> = nodes.iter().map(|&y| (tau * y).cos()).collect();
    let mut l1 = vec![0.0; n];
    let mut l2 = vec![0.0; n];
    let sources = |l1: &[f64], l2: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let f1 = (0..n).map(|j| wq4[j] * (l1[j] - 2.0 * l2[j] - cos_t[j])).collect();
        let f2 = (0..n).map(|j| wq4[j] * (-2.0 * l1[j] + l2[j] + 2.0 * cos_t[j])).collect();
        (f1, f2)
    };
    for it in 1..=opts.max_iterations {
        let (f1, f2) = sources(&l1, &l2);
        // Cumulative sine/cosine moments of f₁ from the origin outward.
        let mut ic = vec![0.0; n];
        let mut is = vec![0.0; n];
        for j in mid..n - 1 {
            let (a, b) = (nodes[j], nodes[j + 1]);
            ic[j + 1] = ic[j] + quad.integrate(a, b, None, |x| (tau * x).cos(), &f1);
            is[j + 1] = is[j] + quad.integrate(a, b, None, |x| (tau * x).sin(), &f1);
        }
        for j in 0..mid {
            ic[j] = -ic[n - 1 - j];
            is[j] = is[n - 1 - j];
        }
        let conv = ExpConv::new(&quad, c, f2);
        let new_l2: Vec<f64> = nodes.par_iter().map(|&y| 0.5 / c * conv.eval(&quad, y).0).collect();
        let new_l1: Vec<f64> = (0..n)
            .map(|j| {
                let (sn, cs) = (tau * nodes[j]).sin_cos();
                -(sn * ic[j] - cs * is[j]) / tau
            })
            .collect();
        let diff = new_l1.iter().zip(&l1).chain(new_l2.iter().zip(&l2)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let size = new_l1.iter().chain(&new_l2).map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
        l1 = new_l1;
        l2 = new_l2;
        let update = diff / size;
        if !update.is_finite() {
            return Err(Error::Convergence("golden-rule fixed point diverged".into()));
        }
        if update <= opts.tolerance {
            let (f1, f2) = sources(&l1, &l2);
            let t = tau;
            let l = opts.source_half_width;
            let totals = (
                quad.integrate(0.0, l, None, |x| (t * x).cos(), &f1),
                quad.integrate(0.0, l, None, |x| (t * x).sin(), &f1),
            );
            let conv2 = ExpConv::new(&quad, c, f2);
            let eval = GoldenEval { soliton, omega: w, lambda, tau, c, quad, f1, conv2, totals };
            return Ok((eval, it, update));
        }
    }
    Err(Error::Convergence(format!("golden-rule fixed point not reached in {} iterations", opts.max_iterations)))
}

/// (g₁, g₂) sampled on the mode's grid.
pub fn solve_g(mode: &InternalMode) -> Result<GoldenRulePair> {
    solve_g_with(mode, &GoldenOptions::default())
}

pub fn solve_g_with(mode: &InternalMode, opts: &GoldenOptions) -> Result<GoldenRulePair> {
    let (eval, iterations, last_update) = fixed_point(mode, opts)?;
    let grid = *mode.grid();
    let vals: Vec<[f64; 4]> = grid.nodes().par_iter().map(|&y| eval.values(y)).collect();
    let field = |k: usize| GridFn::new(grid, vals.iter().map(|v| v[k]).collect()).map(|f| f.with_parity(Parity::Even));
    let mut pair = GoldenRulePair {
        omega: mode.omega,
        tau: eval.tau,
        g1: field(0)?,
        g2: field(1)?,
        h1: field(2)?,
        h2: field(3)?,
        eval,
        diagnostics: GoldenDiagnostics { iterations, last_update, ..Default::default() },
    };
    pair.diagnostics.residuals = residuals(&pair, mode)?;
    pair.diagnostics.orthogonality = orthogonality(&pair, mode)?;
    let cos = GridFn::from_fn(grid, |y| (pair.tau * y).cos());
    let dev = pair.h1.add(&cos)?.sup_norm().max(pair.h2.add(&cos)?.sup_norm());
    pair.diagnostics.h_deviation = dev / mode.omega;
    Ok(pair)
}

fn relative_inner(f: &GridFn, g: &GridFn) -> Result<f64> {
    let num = inner(f, g)?;
    let den = f.zip_with(g, |a: f64, b: f64| (a * b).abs())?.integrate();
    Ok(if den == 0.0 { 0.0 } else { num.abs() / den })
}

fn orthogonality(pair: &GoldenRulePair, mode: &InternalMode) -> Result<[f64; 4]> {
    let s = mode.soliton();
    let g = *mode.grid();
    let q = GridFn::from_fn(g, |y| s.q(y));
    let lq = GridFn::from_fn(g, |y| s.lambda_q(y));
    Ok([
        relative_inner(&pair.g1, &q)?,
        relative_inner(&pair.g2, &lq)?,
        relative_inner(&pair.g1, &mode.v2)?,
        relative_inner(&pair.g2, &mode.v1)?,
    ])
}

fn residuals(pair: &GoldenRulePair, mode: &InternalMode) -> Result<[f64; 2]> {
    let s = mode.soliton();
    let w = mode.omega;
    let g = *mode.grid();
    let two_l = 2.0 * mode.lambda;
    let op = |f: &GridFn, pot: &dyn Fn(f64) -> f64| -> Result<GridFn> {
        GridFn::from_fn(g, pot).mul(f)?.sub(&diff_p(f, 2, 6)?)
    };
    let lp = |y: f64| 1.0 - 3.0 * s.q(y).powi(2) - 5.0 * w * s.q(y).powi(4);
    let lm = |y: f64| 1.0 - s.q(y).powi(2) - w * s.q(y).powi(4);
    let n = pair.g1.interior_l2_norm();
    let r1 = op(&pair.g1, &lp)?.lin_comb(1.0, &pair.g2, -two_l)?.interior_l2_norm() / n;
    let r2 = op(&pair.g2, &lm)?.lin_comb(1.0, &pair.g1, -two_l)?.interior_l2_norm() / n;
    Ok([r1, r2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::build_internal_mode;

    #[test]
    fn leading_order_shape() {
        let mode = build_internal_mode(0.02).unwrap();
        let pair = solve_g(&mode).unwrap();
        let d = &pair.diagnostics;
        assert!(d.residuals[0] < 1e-6 && d.residuals[1] < 1e-6, "{d:?}");
        assert!(d.orthogonality.iter().all(|v| *v < 1e-6), "{d:?}");
        assert!(d.h_deviation < 10.0, "{d:?}");
        let s = mode.soliton();
        let t = pair.tau;
        let mut e2 = 0.0f64;
        let mut e1 = 0.0f64;
        for j in 0..pair.grid().len() {
            let y = pair.grid().node(j);
            if y.abs() <= 5.0 {
                let lead2 = 2.0 * s.xi(y) * (t * y).sin();
                e2 = e2.max((pair.g2.at(j) - lead2).abs());
                e1 = e1.max((pair.g1.at(j) - lead2 - s.q(y).powi(2) * (t * y).cos()).abs());
            }
        }
        assert!(e1 < 10.0 * 0.02 && e2 < 10.0 * 0.02, "{e1} {e2}");
    }
}
