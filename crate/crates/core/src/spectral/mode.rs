//! The internal mode (λ, V₁, V₂) built from the Birman–Schwinger solution:
//! Z = e_u - ωN Y, W₁ = Z₁ + Z₂, W₂ = Z₁ - Z₂, V₁ = (S*)²W₁, V₂ = λ⁻¹L₊V₁.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bs::{BsOptions, BsSolver};
use super::quad::{ExpConv, KernelQuad};
use crate::error::{Error, Result};
use crate::grid::{diff_p, inner, Grid, GridFn, Parity};
use crate::jet::{Jet, JET_LEN};
use crate::profiles::Soliton;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Z → e_u as ω → 0.
    BirmanSchwinger,
    /// Rescaled to agree with another solution at y = 0.
    Matched,
}

/// Taylor propagation of a 2×2 second-order system
/// u_i'' = c2_i u_i + Σ_j a_ij u_j + f_i from values and slopes at a point.
pub fn ode_jet2(u0: [f64; 2], u1: [f64; 2], c2: [f64; 2], a: &[[Jet; 2]; 2], f: &[Jet; 2]) -> [Jet; 2] {
    let mut u = [Jet::zero(), Jet::zero()];
    for i in 0..2 {
        u[i].c[0] = u0[i];
        u[i].c[1] = u1[i];
    }
    for n in 0..JET_LEN - 2 {
        let mut rhs = [0.0; 2];
        for i in 0..2 {
            let mut acc = c2[i] * u[i].c[n] + f[i].c[n];
            for j in 0..2 {
                for k in 0..=n {
                    acc += a[i][j].c[k] * u[j].c[n - k];
                }
            }
            rhs[i] = acc;
        }
        for i in 0..2 {
            u[i].c[n + 2] = rhs[i] / ((n + 1) * (n + 2)) as f64;
        }
    }
    u
}

/// (S*)²f = f'' + 2ξ f' + (Q''/Q) f as a jet.
pub fn s_star_sq(soliton: &Soliton, f: &Jet, y: f64) -> Jet {
    let q2 = soliton.q_jet(y).powi(2);
    let pot = (q2 + (q2 * q2).scale(soliton.omega())).scale(-1.0).add_const(1.0);
    let xi = soliton.xi_jet(y);
    f.deriv().deriv() + (xi * f.deriv()).scale(2.0) + pot * *f
}

/// L₊ f = -f'' + (1 - 3Q² - 5ωQ⁴) f as a jet.
pub fn l_plus(soliton: &Soliton, f: &Jet, y: f64) -> Jet {
    let q2 = soliton.q_jet(y).powi(2);
    let pot = (q2.scale(-3.0) + (q2 * q2).scale(-5.0 * soliton.omega())).add_const(1.0);
    pot * *f - f.deriv().deriv()
}

/// Pointwise evaluator of Z, W and V with exact derivatives.
#[derive(Clone, Debug)]
pub struct ModeEval {
    pub soliton: Soliton,
    pub omega: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub quad: Arc<KernelQuad>,
    conv1: ExpConv,
    conv2: ExpConv,
    scale: f64,
}

impl ModeEval {
    /// Jets of (Z₁, Z₂) at y.
    pub fn z_jets(&self, y: f64) -> [Jet; 2] {
        let w = self.omega;
        let (a, k) = (self.alpha, self.kappa);
        let (v1, d1) = self.conv1.eval(&self.quad, y);
        let (v2, d2) = self.conv2.eval(&self.quad, y);
        let s = self.scale;
        let z0 = [-s * w / (2.0 * a) * v1, -s * w / (2.0 * k) * v2];
        let z1 = [-s * w / (2.0 * a) * d1, -s * w / (2.0 * k) * d2];
        // Z'' = diag(α², κ²) Z + ω P Z, P = -(1/3)Q⁴ [[1, -2], [-2, 1]].
        let q4 = self.soliton.q_jet(y).powi(4).scale(-w / 3.0);
        let coupling = [[q4, q4.scale(-2.0)], [q4.scale(-2.0), q4]];
        ode_jet2(z0, z1, [a * a, k * k], &coupling, &[Jet::zero(), Jet::zero()])
    }

    pub fn w_jets(&self, y: f64) -> [Jet; 2] {
        let [z1, z2] = self.z_jets(y);
        [z1 + z2, z1 - z2]
    }

    pub fn v_jets(&self, y: f64) -> [Jet; 2] {
        let [w1, _] = self.w_jets(y);
        let v1 = s_star_sq(&self.soliton, &w1, y);
        let v2 = l_plus(&self.soliton, &v1, y).scale(1.0 / self.lambda);
        [v1, v2]
    }

    /// Values (Z₁, Z₂, W₁, W₂, V₁, V₂) at y.
    pub fn values(&self, y: f64) -> [f64; 6] {
        let [z1, z2] = self.z_jets(y);
        let w1 = z1 + z2;
        let v1 = s_star_sq(&self.soliton, &w1, y);
        let v2 = l_plus(&self.soliton, &v1, y).scale(1.0 / self.lambda);
        [z1.value(), z2.value(), w1.value(), (z1 - z2).value(), v1.value(), v2.value()]
    }

    fn rescaled(&self, factor: f64) -> Self {
        let mut e = self.clone();
        e.scale *= factor;
        e
    }
}

/// The internal mode sampled on a grid, with its evaluator and diagnostics.
#[derive(Clone, Debug)]
pub struct InternalMode {
    pub omega: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub tau: f64,
    pub z1: GridFn,
    pub z2: GridFn,
    pub w1: GridFn,
    pub w2: GridFn,
    pub v1: GridFn,
    pub v2: GridFn,
    pub normalization: Normalization,
    pub eval: ModeEval,
    pub diagnostics: ModeDiagnostics,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ModeDiagnostics {
    pub s_at_root: f64,
    /// ‖M₊W₁ - λW₂‖ / ‖W₁‖ and ‖M₋W₂ - λW₁‖ / ‖W₁‖ (interior, finite differences).
    pub w_residuals: [f64; 2],
    /// ‖L₊V₁ - λV₂‖ / ‖V₁‖ and ‖L₋V₂ - λV₁‖ / ‖V₁‖.
    pub v_residuals: [f64; 2],
    pub parity_defect: f64,
    pub min_w2: f64,
    /// max over |y| ≤ L/2 of |W_j e^{α|y|} - 1| / ω.
    pub w_envelope_constant: f64,
    /// ⟨V₁, V₂⟩ and ⟨W₁, W₂⟩.
    pub v1v2: f64,
    pub w1w2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeOptions {
    pub bs: BsOptions,
    /// Sampling grid; default half-width max(40, 20/α) at spacing ≤ 0.05.
    pub grid: Option<Grid>,
    pub max_spacing: f64,
    /// Relative tolerance for the eigen-residual checks.
    pub residual_tol: f64,
}

impl Default for ModeOptions {
    fn default() -> Self {
        ModeOptions { bs: BsOptions::default(), grid: None, max_spacing: 0.05, residual_tol: 1e-6 }
    }
}

/// Default half-width for mode sampling: e^{-αL} ≤ e^{-20}.
pub fn default_half_width(alpha: f64) -> f64 {
    (20.0 / alpha).max(40.0)
}

pub fn build_internal_mode(omega: f64) -> Result<InternalMode> {
    build_internal_mode_with(omega, &ModeOptions::default())
}

pub fn build_internal_mode_with(omega: f64, opts: &ModeOptions) -> Result<InternalMode> {
    let solver = BsSolver::new(omega, &opts.bs)?;
    let root = solver.solve_alpha()?;
    let alpha = root.alpha;
    let lambda = 1.0 - alpha * alpha;
    let kappa = (2.0 - alpha * alpha).sqrt();
    let (fine, y1, y2) = solver.refine(&root, opts.bs.refine.max(1))?;
    let eval = ModeEval {
        soliton: solver.soliton,
        omega,
        alpha,
        kappa,
        lambda,
        conv1: ExpConv::new(&fine, alpha, y1),
        conv2: ExpConv::new(&fine, kappa, y2),
        quad: Arc::new(fine),
        scale: 1.0,
    };
    let grid = match opts.grid {
        Some(g) => g,
        None => Grid::with_spacing(default_half_width(alpha), opts.max_spacing)?,
    };
    let mut mode = sample_mode(eval, grid, Normalization::BirmanSchwinger)?;
    mode.diagnostics.s_at_root = root.s;
    check_invariants(&mut mode, opts.residual_tol)?;
    Ok(mode)
}

/// Sample an evaluator on a grid.
pub fn sample_mode(eval: ModeEval, grid: Grid, normalization: Normalization) -> Result<InternalMode> {
    let nodes = grid.nodes();
    let vals: Vec<[f64; 6]> = nodes.par_iter().map(|&y| eval.values(y)).collect();
    let field = |k: usize| GridFn::new(grid, vals.iter().map(|v| v[k]).collect()).map(|f| f.with_parity(Parity::Even));
    let (alpha, lambda, kappa) = (eval.alpha, eval.lambda, eval.kappa);
    Ok(InternalMode {
        omega: eval.omega,
        alpha,
        lambda,
        kappa,
        tau: (2.0 * lambda - 1.0).sqrt(),
        z1: field(0)?,
        z2: field(1)?,
        w1: field(2)?,
        w2: field(3)?,
        v1: field(4)?,
        v2: field(5)?,
        normalization,
        eval,
        diagnostics: ModeDiagnostics::default(),
    })
}

impl InternalMode {
    pub fn grid(&self) -> &Grid {
        self.v1.grid()
    }

    /// Same mode sampled on another grid.
    pub fn resample(&self, grid: Grid) -> Result<InternalMode> {
        let mut m = sample_mode(self.eval.clone(), grid, self.normalization)?;
        m.diagnostics = self.diagnostics.clone();
        Ok(m)
    }

    /// Mode multiplied by a constant.
    pub fn rescaled(&self, factor: f64) -> Result<InternalMode> {
        let mut m = sample_mode(self.eval.rescaled(factor), *self.grid(), Normalization::Matched)?;
        m.diagnostics = self.diagnostics.clone();
        Ok(m)
    }

    pub fn soliton(&self) -> Soliton {
        self.eval.soliton
    }
}

fn check_invariants(mode: &mut InternalMode, tol: f64) -> Result<()> {
    let (a, l, k) = (mode.alpha, mode.lambda, mode.kappa);
    if !(a > 0.0 && a < 1.0 && l > 0.0 && l < 1.0 && k > 1.0 && k <= 2f64.sqrt()) {
        return Err(Error::ModeInvalid(format!("parameters out of range: alpha={a}, lambda={l}, kappa={k}")));
    }
    let d = eigen_residuals(mode)?;
    mode.diagnostics.w_residuals = d.0;
    mode.diagnostics.v_residuals = d.1;
    let fields = [&mode.z1, &mode.z2, &mode.w1, &mode.w2, &mode.v1, &mode.v2];
    mode.diagnostics.parity_defect = fields.iter().map(|f| f.parity_defect()).fold(0.0, f64::max);
    mode.diagnostics.min_w2 = mode.w2.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let g = *mode.grid();
    let half = 0.5 * g.half_width();
    let mut env = 0.0f64;
    for j in 0..g.len() {
        let y = g.node(j);
        if y.abs() <= half {
            let e = (a * y.abs()).exp();
            env = env.max((mode.w1.at(j) * e - 1.0).abs()).max((mode.w2.at(j) * e - 1.0).abs());
        }
    }
    mode.diagnostics.w_envelope_constant = env / mode.omega;
    mode.diagnostics.v1v2 = inner(&mode.v1, &mode.v2)?;
    mode.diagnostics.w1w2 = inner(&mode.w1, &mode.w2)?;
    let worst = d.0.iter().chain(d.1.iter()).cloned().fold(0.0, f64::max);
    if !(worst <= tol) {
        return Err(Error::ModeInvalid(format!("eigen-residual {worst:e} exceeds {tol:e}")));
    }
    if !(mode.diagnostics.min_w2 > 0.0) {
        return Err(Error::ModeInvalid(format!("W2 not positive (min {:e})", mode.diagnostics.min_w2)));
    }
    if mode.diagnostics.parity_defect > 1e-10 {
        return Err(Error::ModeInvalid(format!("parity defect {:e}", mode.diagnostics.parity_defect)));
    }
    Ok(())
}

/// Interior relative residuals of the W and V systems with sixth-order differences.
pub fn eigen_residuals(mode: &InternalMode) -> Result<([f64; 2], [f64; 2])> {
    let w = mode.omega;
    let l = mode.lambda;
    let s = mode.soliton();
    let g = *mode.grid();
    let op = |f: &GridFn, pot: &dyn Fn(f64) -> f64| -> Result<GridFn> {
        let d2 = diff_p(f, 2, 6)?;
        let p = GridFn::from_fn(g, |y| pot(y));
        p.mul(f)?.sub(&d2)
    };
    let m_plus = |y: f64| 1.0 + w / 3.0 * s.q(y).powi(4);
    let m_minus = |y: f64| 1.0 - w * s.q(y).powi(4);
    let l_plus = |y: f64| 1.0 - 3.0 * s.q(y).powi(2) - 5.0 * w * s.q(y).powi(4);
    let l_minus = |y: f64| 1.0 - s.q(y).powi(2) - w * s.q(y).powi(4);
    let rel = |r: GridFn, n: &GridFn| r.interior_l2_norm() / n.interior_l2_norm();
    let wr1 = rel(op(&mode.w1, &m_plus)?.lin_comb(1.0, &mode.w2, -l)?, &mode.w1);
    let wr2 = rel(op(&mode.w2, &m_minus)?.lin_comb(1.0, &mode.w1, -l)?, &mode.w1);
    let vr1 = rel(op(&mode.v1, &l_plus)?.lin_comb(1.0, &mode.v2, -l)?, &mode.v1);
    let vr2 = rel(op(&mode.v2, &l_minus)?.lin_comb(1.0, &mode.v1, -l)?, &mode.v1);
    Ok(([wr1, wr2], [vr1, vr2]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ode_jet_reproduces_exponentials() {
        // u'' = 4u with u(0)=1, u'(0)=2 is e^{2y}.
        let z = [[Jet::zero(), Jet::zero()], [Jet::zero(), Jet::zero()]];
        let u = ode_jet2([1.0, 1.0], [2.0, -1.0], [4.0, 1.0], &z, &[Jet::zero(), Jet::zero()]);
        let e2 = Jet::exp_linear(2.0, 0.0);
        let em = Jet::exp_linear(-1.0, 0.0);
        for k in 0..JET_LEN {
            assert!((u[0].c[k] - e2.c[k]).abs() < 1e-14);
            assert!((u[1].c[k] - em.c[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn mode_at_small_omega() {
        let m = build_internal_mode(0.02).unwrap();
        assert!(m.diagnostics.w_residuals[0] < 1e-6, "{:?}", m.diagnostics);
        assert!(m.lambda < 1.0 && m.lambda > 0.999);
        // W_j ≈ e^{-α|y|}
        assert!(m.diagnostics.w_envelope_constant < 10.0, "{:?}", m.diagnostics);
        // ⟨V₁,V₂⟩ ≈ 1/α and α⟨W₁,W₂⟩ ≈ 1
        assert!((m.diagnostics.v1v2 - 1.0 / m.alpha).abs() < 10.0, "{:?}", m.diagnostics);
        assert!((m.alpha * m.diagnostics.w1w2 - 1.0).abs() < 0.2, "{:?}", m.diagnostics);
    }
}
