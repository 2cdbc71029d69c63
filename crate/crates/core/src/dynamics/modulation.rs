//! Modulation fit Π = (γ, ω) and the decomposition
//! ζ[ψ,Π] - Q_ω = u = v + b₁V₁ + i b₂V₂ on the analysis grid.

use std::f64::consts::PI;

use num::complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::split::{upsample, PhysGrid, SplitStep};
use crate::error::{Error, Result};
use crate::grid::{CGridFn, Grid, GridFn};
use crate::profiles::Soliton;
use crate::spectral::InternalMode;

/// Periodic cubic spline through uniformly spaced samples.
#[derive(Clone, Debug)]
pub struct PeriodicSpline {
    x0: f64,
    h: f64,
    f: Vec<Complex64>,
    m: Vec<Complex64>,
}

impl PeriodicSpline {
    /// Second derivatives from the circulant system
    /// M_{j-1} + 4M_j + M_{j+1} = 6(f_{j+1} - 2f_j + f_{j-1})/h², solved by FFT.
    pub fn new(x0: f64, h: f64, f: Vec<Complex64>) -> Self {
        let n = f.len();
        let mut planner = FftPlanner::new();
        let mut spec = f.clone();
        planner.plan_fft_forward(n).process(&mut spec);
        for (k, z) in spec.iter_mut().enumerate() {
            let c = (2.0 * PI * k as f64 / n as f64).cos();
            *z *= 6.0 * (2.0 * c - 2.0) / (h * h * (4.0 + 2.0 * c)) / n as f64;
        }
        planner.plan_fft_inverse(n).process(&mut spec);
        PeriodicSpline { x0, h, f, m: spec }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let n = self.f.len();
        let r = (x - self.x0) / self.h;
        let j = r.floor();
        let t = r - j;
        let j0 = (j as i64).rem_euclid(n as i64) as usize;
        let j1 = (j0 + 1) % n;
        let s = 1.0 - t;
        self.f[j0] * s + self.f[j1] * t + (self.m[j0] * (s * s * s - s) + self.m[j1] * (t * t * t - t)) * (self.h * self.h / 6.0)
    }
}

/// Υ(γ, ω) = √ω(⟨ψ - e^{iγ}φ_ω, i e^{iγ}∂_ωφ_ω⟩, ⟨ψ - e^{iγ}φ_ω, e^{iγ}φ_ω⟩), which equals
/// (⟨u, iΛ_ωQ_ω⟩, ω⟨u, Q_ω⟩) after the change of variables y = √ω x.
pub fn upsilon(grid: &PhysGrid, psi: &[Complex64], gamma: f64, omega: f64) -> Result<[f64; 2]> {
    let s = Soliton::new(omega)?;
    let rot = Complex64::from_polar(1.0, gamma);
    let (mut a, mut b) = (0.0, 0.0);
    for (j, z) in psi.iter().enumerate() {
        let x = grid.x(j);
        let phi = s.phi(x);
        let diff = z - rot * phi;
        a += (diff * (Complex64::i() * rot * s.dphi_domega(x)).conj()).re;
        b += (diff * (rot * phi).conj()).re;
    }
    let c = omega.sqrt() * grid.dx();
    Ok([c * a, c * b])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub gamma: f64,
    pub omega: f64,
    pub iterations: usize,
    pub residual: f64,
}

pub const FIT_TOL: f64 = 1e-12;
const FIT_MAX_ITER: usize = 50;

fn wrap_angle(g: f64) -> f64 {
    let w = (g + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Newton iteration on Υ = 0. The first step uses the analytic Jacobian
/// -c₀I₂ at the guess; later steps use central differences.
pub fn fit_modulation(grid: &PhysGrid, psi: &[Complex64], guess: (f64, f64)) -> Result<FitResult> {
    let (mut g, mut w) = guess;
    if !(w > 0.0) {
        return Err(Error::Fit(format!("frequency guess must be positive, got {w}")));
    }
    let c0 = Soliton::new(w)?.c_omega();
    let mut r = upsilon(grid, psi, g, w)?;
    let norm = |r: &[f64; 2]| r[0].abs().max(r[1].abs());
    if norm(&r) > 2.0 * c0 * w.sqrt() {
        return Err(Error::Fit(format!("state too far from the guess: |Υ| = {:e}", norm(&r))));
    }
    for it in 0..FIT_MAX_ITER {
        if norm(&r) <= FIT_TOL {
            if !(w > 0.5 * guess.1 && w < 2.0 * guess.1) {
                return Err(Error::Fit(format!("fitted frequency {w:e} left the neighbourhood of the guess {:e}", guess.1)));
            }
            return Ok(FitResult { gamma: wrap_angle(g), omega: w, iterations: it, residual: norm(&r) });
        }
        let jac = if it == 0 {
            [[-c0, 0.0], [0.0, -c0]]
        } else {
            let dg = 1e-6;
            let dw = 1e-6 * w;
            let rg = (upsilon(grid, psi, g + dg, w)?, upsilon(grid, psi, g - dg, w)?);
            let rw = (upsilon(grid, psi, g, w + dw)?, upsilon(grid, psi, g, w - dw)?);
            [
                [(rg.0[0] - rg.1[0]) / (2.0 * dg), (rw.0[0] - rw.1[0]) / (2.0 * dw)],
                [(rg.0[1] - rg.1[1]) / (2.0 * dg), (rw.0[1] - rw.1[1]) / (2.0 * dw)],
            ]
        };
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() < 1e-300 {
            return Err(Error::Fit("singular modulation Jacobian".into()));
        }
        let dgam = (jac[1][1] * r[0] - jac[0][1] * r[1]) / det;
        let dom = (-jac[1][0] * r[0] + jac[0][0] * r[1]) / det;
        g -= dgam;
        // Keep ω positive if a step overshoots.
        w = if w - dom > 0.0 { w - dom } else { 0.5 * w };
        r = upsilon(grid, psi, g, w)?;
    }
    Err(Error::Fit(format!("Newton did not converge in {FIT_MAX_ITER} iterations: |Υ| = {:e}", norm(&r))))
}

/// Diagnostic norms attached to each frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameDiagnostics {
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    pub b_abs: f64,
    pub rho4_v: f64,
    pub rho_v: f64,
    pub nu_u: f64,
    /// |b|⁴ + ‖ρv‖².
    pub m_functional: f64,
    /// inf_γ ‖e^{-iγ}ψ - φ_ω‖_{H¹} at the fitted ω.
    pub orbital_distance: f64,
    /// |⟨u, iΛ_ωQ⟩|, |⟨u, Q⟩| on the analysis grid.
    pub u_orthogonality: [f64; 2],
    /// |⟨v, iΛ_ωQ⟩|, |⟨v, Q⟩|, |⟨v, iV₁⟩|, |⟨v, V₂⟩|.
    pub v_orthogonality: [f64; 4],
    /// ‖u - (v + b₁V₁ + i b₂V₂)‖_∞.
    pub reconstruction: f64,
}

#[derive(Clone, Debug)]
pub struct ModulationFrame {
    pub t: f64,
    pub s: f64,
    pub gamma: f64,
    pub omega: f64,
    pub u: CGridFn,
    pub b1: f64,
    pub b2: f64,
    pub v: CGridFn,
    pub diagnostics: FrameDiagnostics,
}

/// Spectral ×`UPSAMPLE` refinement before the spline keeps interpolation
/// error far below the frame tolerances.
pub const UPSAMPLE: usize = 8;

/// Spline of ψ on the refined periodic grid.
pub fn lab_spline(grid: &PhysGrid, psi: &[Complex64]) -> PeriodicSpline {
    let fine = upsample(psi, UPSAMPLE);
    PeriodicSpline::new(-grid.half_width, grid.dx() / UPSAMPLE as f64, fine)
}

fn real_inner(a: &GridFn, b: &GridFn) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum::<f64>() * a.grid().h()
}

fn weighted_norm(f: &CGridFn, w: impl Fn(f64) -> f64) -> f64 {
    let g = f.grid();
    (f.values().iter().enumerate().map(|(j, z)| (w(g.node(j)) * z.norm()).powi(2)).sum::<f64>() * g.h()).sqrt()
}

/// Decompose a lab state at the fitted Π against a mode sampled on the
/// analysis grid. `max_x` bounds where ψ may be read (the sponge edge).
#[allow(clippy::too_many_arguments)]
pub fn decompose(
    stepper: &mut SplitStep,
    psi: &[Complex64],
    fit: &FitResult,
    mode: &InternalMode,
    omega0: f64,
    max_x: f64,
    t: f64,
    s: f64,
) -> Result<ModulationFrame> {
    let grid: Grid = *mode.grid();
    let lab = *stepper.grid();
    let (gamma, omega) = (fit.gamma, fit.omega);
    let sq = omega.sqrt();
    if grid.half_width() / sq > max_x {
        return Err(Error::Interpolation(format!(
            "analysis grid needs x up to {:.1} but the usable box ends at {max_x:.1}",
            grid.half_width() / sq
        )));
    }
    let sol = Soliton::new(omega)?;
    let spline = lab_spline(&lab, psi);
    let rot = Complex64::from_polar(1.0 / sq, -gamma);
    let u = CGridFn::from_fn(grid, |y| rot * spline.eval(y / sq) - sol.q(y));
    let u1 = u.re();
    let u2 = u.im();
    let v1v2 = real_inner(&mode.v1, &mode.v2);
    let b1 = real_inner(&u1, &mode.v2) / v1v2;
    let b2 = real_inner(&u2, &mode.v1) / v1v2;
    let v1 = u1.lin_comb(1.0, &mode.v1, -b1)?;
    let v2 = u2.lin_comb(1.0, &mode.v2, -b2)?;
    let v = CGridFn::from_parts(&v1, &v2)?;

    let q = GridFn::from_fn(grid, |y| sol.q(y));
    let lq = GridFn::from_fn(grid, |y| sol.lambda_q(y));
    let recon = u
        .values()
        .iter()
        .zip(v.values())
        .enumerate()
        .map(|(j, (uu, vv))| (uu - (vv + Complex64::new(b1 * mode.v1.at(j), b2 * mode.v2.at(j)))).norm())
        .fold(0.0, f64::max);
    let c = stepper.conserved(psi);
    let phi: Vec<Complex64> = (0..lab.points).map(|j| Complex64::new(sol.phi(lab.x(j)), 0.0)).collect();
    let pp = stepper.h1_inner(psi, psi).re;
    let ff = stepper.h1_inner(&phi, &phi).re;
    let pf = stepper.h1_inner(psi, &phi).norm();
    let rho = |y: f64| 1.0 / (omega0 * y / 10.0).cosh();
    let rho_v = weighted_norm(&v, rho);
    let b_abs = b1.hypot(b2);
    let diagnostics = FrameDiagnostics {
        mass: c.mass,
        momentum: c.momentum,
        energy: c.energy,
        b_abs,
        rho4_v: weighted_norm(&v, |y| rho(y).powi(4)),
        rho_v,
        nu_u: weighted_norm(&u, |y| 1.0 / (y / 10.0).cosh()),
        m_functional: b_abs.powi(4) + rho_v * rho_v,
        orbital_distance: (pp + ff - 2.0 * pf).max(0.0).sqrt(),
        u_orthogonality: [real_inner(&u2, &lq).abs(), real_inner(&u1, &q).abs()],
        v_orthogonality: [
            real_inner(&v2, &lq).abs(),
            real_inner(&v1, &q).abs(),
            real_inner(&v2, &mode.v1).abs(),
            real_inner(&v1, &mode.v2).abs(),
        ],
        reconstruction: recon,
    };
    Ok(ModulationFrame { t, s, gamma, omega, u, b1, b2, v, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spline_is_fourth_order() {
        let f = |x: f64| Complex64::new((2.0 * PI * x / 10.0).sin(), (2.0 * PI * x / 5.0).cos());
        let err = |n: usize| {
            let h = 10.0 / n as f64;
            let sp = PeriodicSpline::new(0.0, h, (0..n).map(|j| f(j as f64 * h)).collect());
            (0..997).map(|i| i as f64 * 0.01003 - 3.0).map(|x| (sp.eval(x) - f(x)).norm()).fold(0.0, f64::max)
        };
        let (a, b) = (err(32), err(64));
        assert!((a / b).log2() > 3.7, "{a:e} {b:e}");
    }

    #[test]
    fn fit_recovers_phase_and_frequency() {
        let lab = PhysGrid::new(150.0, 2048).unwrap();
        let (gs, ws) = (0.27, 0.055);
        let s = Soliton::new(ws).unwrap();
        let psi = lab.sample(|x| Complex64::from_polar(s.phi(x), gs));
        let fit = fit_modulation(&lab, &psi, (0.26, 0.0545)).unwrap();
        assert!((fit.gamma - gs).abs() < 1e-10 && (fit.omega - ws).abs() < 1e-10, "{fit:?}");
        let exact = fit_modulation(&lab, &psi, (gs, ws)).unwrap();
        assert_eq!(exact.iterations, 0);
        // A guess far outside the fit neighbourhood is refused, not chased.
        assert!(matches!(fit_modulation(&lab, &psi, (2.0, 0.05)), Err(Error::Fit(_))));
    }
}
