//! The explicit ground states `Q_ω(y) = sqrt(4 / (1 + a_ω cosh 2y))` and their
//! physical-scale versions `φ_ω(x) = √ω Q_ω(√ω x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{diff, Grid, GridFn, Parity};
use crate::jet::Jet;

/// Closed-form ground state at a fixed ω, evaluated pointwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Soliton {
    omega: f64,
    a: f64,
}

impl Soliton {
    pub fn new(omega: f64) -> Result<Self> {
        if !(omega >= 0.0) || !omega.is_finite() {
            return Err(Error::Domain(format!("omega must be finite and >= 0, got {omega}")));
        }
        Ok(Soliton { omega, a: (1.0 + 16.0 * omega / 3.0).sqrt() })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// a_ω = sqrt(1 + 16ω/3).
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Q(y) written with e^{-2|y|} only, so it never overflows.
    pub fn q(&self, y: f64) -> f64 {
        let s = y.abs();
        let t = (-2.0 * s).exp();
        let half_a = 0.5 * self.a;
        2.0 * (-s).exp() / (half_a + t + half_a * t * t).sqrt()
    }

    /// Taylor jet of Q at y.
    pub fn q_jet(&self, y: f64) -> Jet {
        let s = y.abs();
        let e1 = Jet::exp_linear(-1.0, s);
        let t = Jet::exp_linear(-2.0, s);
        let half_a = 0.5 * self.a;
        let g = (t + (t * t).scale(half_a)).add_const(half_a);
        let q = (e1 * g.powf(-0.5)).scale(2.0);
        if y < 0.0 {
            q.reflect(false)
        } else {
            q
        }
    }

    pub fn q_prime(&self, y: f64) -> f64 {
        self.xi(y) * self.q(y)
    }

    /// ξ = Q'/Q = -a sinh 2y / (1 + a cosh 2y), bounded by 1 in modulus.
    pub fn xi(&self, y: f64) -> f64 {
        let t = (-2.0 * y.abs()).exp();
        let a = self.a;
        -y.signum() * a * (1.0 - t * t) / (a * (1.0 + t * t) + 2.0 * t)
    }

    pub fn xi_jet(&self, y: f64) -> Jet {
        let s = y.abs();
        let t = Jet::exp_linear(-2.0, s);
        let t2 = t * t;
        let a = self.a;
        let num = t2.scale(-a).add_const(a);
        let den = (t2.scale(a) + t.scale(2.0)).add_const(a);
        let xi = -num.div(&den);
        if y < 0.0 {
            xi.reflect(true)
        } else {
            xi
        }
    }

    /// Q''/Q = 1 - Q² - ωQ⁴.
    pub fn q2_over_q(&self, y: f64) -> f64 {
        let q2 = self.q(y).powi(2);
        1.0 - q2 - self.omega * q2 * q2
    }

    /// ∂_ω Q_ω = -(4/3) Q / (a (a + sech 2y)).
    pub fn dq_domega(&self, y: f64) -> f64 {
        let t = (-2.0 * y.abs()).exp();
        let sech2y = 2.0 * t / (1.0 + t * t);
        -4.0 / 3.0 * self.q(y) / (self.a * (self.a + sech2y))
    }

    /// Λ_ω Q = ½Q + ½ y Q' + ω ∂_ω Q.
    pub fn lambda_q(&self, y: f64) -> f64 {
        0.5 * self.q(y) + 0.5 * y * self.q_prime(y) + self.omega * self.dq_domega(y)
    }

    /// φ_ω(x) = √ω Q_ω(√ω x).
    pub fn phi(&self, x: f64) -> f64 {
        let r = self.omega.sqrt();
        r * self.q(r * x)
    }

    /// ∂_ω φ_ω(x) = ω^{-1/2} (Λ_ω Q)(√ω x).
    pub fn dphi_domega(&self, x: f64) -> f64 {
        let r = self.omega.sqrt();
        self.lambda_q(r * x) / r
    }

    /// ‖φ_ω‖² = 2√3 arctan(d/(a + 1)) with d = sqrt(16ω/3).
    pub fn mass(&self) -> f64 {
        let d = (16.0 * self.omega / 3.0).sqrt();
        2.0 * 3f64.sqrt() * (d / (self.a + 1.0)).atan()
    }

    /// c_ω = ½ √ω ∂_ω ‖φ_ω‖², which also equals ⟨Q_ω, Λ_ω Q_ω⟩.
    pub fn c_omega(&self) -> f64 {
        let w = self.omega;
        if w == 0.0 {
            return 1.0;
        }
        let d = (16.0 * w / 3.0).sqrt();
        let u = self.a + 1.0;
        let du = 8.0 / (3.0 * self.a);
        let dd = 8.0 / (3.0 * d);
        let x = d / u;
        let dx = (dd * u - d * du) / (u * u);
        let dm = 2.0 * 3f64.sqrt() * dx / (1.0 + x * x);
        0.5 * w.sqrt() * dm
    }
}

/// Q_ω and Q'_ω sampled on a grid, with the physical profile on request.
#[derive(Clone, Debug)]
pub struct SolitonProfile {
    pub omega: f64,
    pub a_omega: f64,
    pub soliton: Soliton,
    pub q: GridFn,
    pub q_prime: GridFn,
    pub phi: Option<GridFn>,
}

pub fn make_profile(omega: f64, grid: Grid) -> Result<SolitonProfile> {
    let soliton = Soliton::new(omega)?;
    let q = GridFn::from_fn(grid, |y| soliton.q(y)).with_parity(Parity::Even);
    let q_prime = GridFn::from_fn(grid, |y| soliton.q_prime(y)).with_parity(Parity::Odd);
    Ok(SolitonProfile { omega, a_omega: soliton.a(), soliton, q, q_prime, phi: None })
}

impl SolitonProfile {
    /// Attach φ_ω sampled on a physical grid.
    pub fn with_phi(mut self, physical: Grid) -> Self {
        let s = self.soliton;
        self.phi = Some(GridFn::from_fn(physical, |x| s.phi(x)).with_parity(Parity::Even));
        self
    }

    pub fn grid(&self) -> &Grid {
        self.q.grid()
    }

    /// Interior sup norm of Q'' - Q + Q³ + ωQ⁵ with a finite-difference Q''.
    pub fn ode_residual(&self) -> Result<f64> {
        let w = self.omega;
        let d2 = diff(&self.q, 2)?;
        let r = d2.zip_with(&self.q, |d, q| d - q + q.powi(3) + w * q.powi(5))?;
        Ok(r.interior_sup_norm())
    }

    /// Interior sup norm of (Q')² - Q² + ½Q⁴ + (ω/3)Q⁶ with a finite-difference Q'.
    pub fn first_integral_residual(&self) -> Result<f64> {
        let w = self.omega;
        let d1 = diff(&self.q, 1)?;
        let r = d1.zip_with(&self.q, |d, q| d * d - q * q + 0.5 * q.powi(4) + w / 3.0 * q.powi(6))?;
        Ok(r.interior_sup_norm())
    }
}

/// E = ∂_ω Q_ω at ω = 0, i.e. -(4/3)Q₀ + (1/3)Q₀³.
pub fn e_correction(grid: Grid) -> GridFn {
    GridFn::from_fn(grid, e0).with_parity(Parity::Even)
}

pub fn e0(y: f64) -> f64 {
    let q = q0(y);
    -4.0 / 3.0 * q + q.powi(3) / 3.0
}

/// Q₀(y) = √2 sech y, overflow safe.
pub fn q0(y: f64) -> f64 {
    let s = y.abs();
    let t = (-2.0 * s).exp();
    2f64.sqrt() * 2.0 * (-s).exp() / (1.0 + t)
}

/// Interior sup norm of (-∂² + 1 - 3Q₀²)E - Q₀⁵.
pub fn e_correction_residual(grid: Grid) -> Result<f64> {
    let e = e_correction(grid);
    let d2 = diff(&e, 2)?;
    let r = GridFn::from_fn(grid, |y| {
        let q = q0(y);
        (1.0 - 3.0 * q * q) * e0(y) - q.powi(5)
    })
    .sub(&d2)?;
    Ok(r.interior_sup_norm())
}

/// ξ_Q = Q'/Q on the profile's grid.
pub fn xi_q(profile: &SolitonProfile) -> GridFn {
    let s = profile.soliton;
    GridFn::from_fn(*profile.grid(), |y| s.xi(y)).with_parity(Parity::Odd)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_special_values() {
        let s = Soliton::new(0.0).unwrap();
        assert_eq!(s.a(), 1.0);
        assert!((s.q(0.0) - 2f64.sqrt()).abs() < 1e-15);
        assert!((Soliton::new(3.0 / 16.0).unwrap().a() - 2f64.sqrt()).abs() < 1e-15);
        assert!(Soliton::new(-1e-3).is_err());
        assert!((e0(0.0) + 2.0 / 3.0 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn matches_textbook_formula_and_never_overflows() {
        let s = Soliton::new(0.05).unwrap();
        for y in [-3.0f64, -0.4, 0.0, 1.1, 7.5] {
            let direct = (4.0 / (1.0 + s.a() * (2.0 * y).cosh())).sqrt();
            assert!((s.q(y) - direct).abs() < 1e-15);
            let xi = -s.a() * (2.0 * y).sinh() / (1.0 + s.a() * (2.0 * y).cosh());
            assert!((s.xi(y) - xi).abs() < 1e-15);
        }
        assert!(s.q(2000.0) >= 0.0 && s.q(2000.0).is_finite());
        assert!((s.xi(2000.0) + 1.0).abs() < 1e-15);
        let r = Soliton::new(0.05).unwrap().xi(35.0);
        // Strictly above -1 in exact arithmetic; equal to -1 after rounding.
        assert!((-1.0..-0.99).contains(&r) || r == -1.0);
    }

    #[test]
    fn jets_agree_with_ode() {
        let s = Soliton::new(0.03).unwrap();
        for y in [-2.3, -0.01, 0.2, 4.0] {
            let q = s.q_jet(y);
            assert!((q.value() - s.q(y)).abs() < 1e-15);
            // Q'' = Q - Q³ - ωQ⁵ and its derivative.
            let rhs = q - q.powi(3) - q.powi(5).scale(0.03);
            for k in 0..6 {
                let lhs = q.nth(k + 2);
                let r = rhs.nth(k);
                assert!((lhs - r).abs() < 1e-10 * (1.0 + r.abs()), "y={y} k={k}");
            }
            let xi = s.xi_jet(y);
            let ratio = q.deriv().div(&q);
            for k in 0..6 {
                assert!((xi.c[k] - ratio.c[k]).abs() < 1e-12, "y={y} k={k}");
            }
        }
    }

    #[test]
    fn omega_derivative_matches_divided_difference() {
        let w = 0.02;
        let s = Soliton::new(w).unwrap();
        let dw = 1e-6;
        let (sp, sm) = (Soliton::new(w + dw).unwrap(), Soliton::new(w - dw).unwrap());
        for y in [0.0, 0.7, -2.5] {
            let fd = (sp.q(y) - sm.q(y)) / (2.0 * dw);
            assert!((fd - s.dq_domega(y)).abs() < 1e-8);
        }
        // E is the ω → 0 limit.
        let z = Soliton::new(0.0).unwrap();
        for y in [0.0, 0.5, 3.0] {
            assert!((z.dq_domega(y) - e0(y)).abs() < 1e-14);
            for d in [1e-3, 1e-4] {
                let fd = (Soliton::new(d).unwrap().q(y) - z.q(y)) / d;
                assert!((fd - e0(y)).abs() < 20.0 * d, "y={y} d={d}");
            }
        }
    }

    #[test]
    fn mass_closed_form_and_monotonicity() {
        for w in [0.005, 0.02, 0.1] {
            let s = Soliton::new(w).unwrap();
            let g = Grid::new(40.0 / w.sqrt(), 16384).unwrap();
            let phi = GridFn::from_fn(g, |x| s.phi(x));
            let m = phi.mul(&phi).unwrap().integrate();
            assert!((m - s.mass()).abs() < 1e-10 * m, "{m} vs {}", s.mass());
            let y = Grid::new(40.0, 8192).unwrap();
            let lq = GridFn::from_fn(y, |v| s.q(v)).mul(&GridFn::from_fn(y, |v| s.lambda_q(v))).unwrap();
            assert!((lq.integrate() - s.c_omega()).abs() < 1e-9);
            assert!(s.c_omega() > 0.0);
        }
        let mut prev = 0.0;
        for k in 1..=20 {
            let m = Soliton::new(0.005 * k as f64).unwrap().mass();
            assert!(m > prev);
            prev = m;
        }
    }

    #[test]
    fn profile_residuals() {
        let g = Grid::new(40.0, 8192).unwrap();
        let p = make_profile(0.01, g).unwrap();
        assert!(p.ode_residual().unwrap() < 1e-6);
        assert!(p.first_integral_residual().unwrap() < 1e-6);
        assert!(p.q.values().iter().all(|&v| v > 0.0));
        assert!(p.q.check_parity(0.0).is_ok());
        assert!(e_correction_residual(g).unwrap() < 1e-6);
        let xi = xi_q(&p);
        assert_eq!(xi.at(g.len() / 2 - 1), -xi.at(g.len() / 2));
        assert!(xi.values().iter().all(|v| v.abs() <= 1.0));
        let z = make_profile(0.0, g).unwrap();
        let t = xi_q(&z);
        for j in (0..g.len()).step_by(97) {
            assert!((t.at(j) + g.node(j).tanh()).abs() < 1e-14);
        }
    }

    #[test]
    fn physical_scaling() {
        let s = Soliton::new(0.09).unwrap();
        let p = make_profile(0.09, Grid::new(20.0, 256).unwrap()).unwrap().with_phi(Grid::new(60.0, 512).unwrap());
        let phi = p.phi.unwrap();
        for j in [0, 100, 256, 400] {
            let x = phi.grid().node(j);
            assert!((phi.at(j) - 0.3 * s.q(0.3 * x)).abs() < 1e-15);
        }
    }
}
