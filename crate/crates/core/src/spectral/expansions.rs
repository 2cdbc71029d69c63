//! First-order ω-expansion profiles at the integrable limit: T₁, T₂, the
//! eigenfunction corrections S₁ = T₁ + T₂, S₂ = T₁ - T₂ of W, and R₁, R₂ of V.

use std::f64::consts::SQRT_2;

use super::quad::{ExpConv, KernelQuad};
use crate::error::Result;
use crate::profiles::q0;

/// ln(Q₀/√8) = -ln(2 cosh y), evaluated without overflow.
pub fn log_q0_over_sqrt8(y: f64) -> f64 {
    let s = y.abs();
    -s - (-2.0 * s).exp().ln_1p()
}

/// Q₀'/Q₀ = -tanh y.
fn xi0(y: f64) -> f64 {
    -y.tanh()
}

/// T₂ = -(√2/6) ∫ e^{-√2|y-z|} Q₀⁴(z) dz, which solves -T₂'' + 2T₂ = -(2/3)Q₀⁴.
#[derive(Clone, Debug)]
pub struct Expansions {
    quad: KernelQuad,
    conv: ExpConv,
}

impl Expansions {
    pub fn new() -> Result<Self> {
        Self::with_resolution(24.0, 1921)
    }

    pub fn with_resolution(half_width: f64, n: usize) -> Result<Self> {
        let quad = KernelQuad::new(half_width, n)?;
        let f = quad.sample(|z| q0(z).powi(4));
        let conv = ExpConv::new(&quad, SQRT_2, f);
        Ok(Expansions { quad, conv })
    }

    pub fn t1(&self, y: f64) -> f64 {
        q0(y).powi(2) / 9.0 + 8.0 / 9.0 * log_q0_over_sqrt8(y)
    }

    /// (T₂, T₂').
    pub fn t2(&self, y: f64) -> (f64, f64) {
        let (v, d) = self.conv.eval(&self.quad, y);
        let k = -SQRT_2 / 6.0;
        (k * v, k * d)
    }

    pub fn s1(&self, y: f64) -> f64 {
        self.t1(y) + self.t2(y).0
    }

    pub fn s2(&self, y: f64) -> f64 {
        self.t1(y) - self.t2(y).0
    }

    /// First-order correction of V₁ around 1 - Q₀².
    pub fn r1(&self, y: f64) -> f64 {
        let q2 = q0(y).powi(2);
        let (t2, dt2) = self.t2(y);
        16.0 / 9.0 + 7.0 / 3.0 * q2 - 5.0 / 3.0 * q2 * q2
            + 8.0 / 9.0 * (1.0 - q2) * log_q0_over_sqrt8(y)
            + (3.0 - q2) * t2
            + 2.0 * xi0(y) * dt2
    }

    /// First-order correction of V₂ around 1.
    pub fn r2(&self, y: f64) -> f64 {
        let q2 = q0(y).powi(2);
        let (t2, dt2) = self.t2(y);
        16.0 / 9.0 - q2 / 3.0 + 4.0 / 9.0 * q2 * q2 + 8.0 / 9.0 * log_q0_over_sqrt8(y) - 3.0 * t2 - 2.0 * xi0(y) * dt2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::e0;

    #[test]
    fn t2_solves_its_ode() {
        let e = Expansions::new().unwrap();
        let h = 1e-3;
        for y in [0.0, 0.4, -1.3, 3.0, 7.5] {
            let d2 = (e.t2(y + h).0 - 2.0 * e.t2(y).0 + e.t2(y - h).0) / (h * h);
            let res = -d2 + 2.0 * e.t2(y).0 + 2.0 / 3.0 * q0(y).powi(4);
            assert!(res.abs() < 1e-5, "y={y}: {res}");
        }
    }

    #[test]
    fn log_form_is_safe() {
        assert!((log_q0_over_sqrt8(0.7) - (q0(0.7) / 8f64.sqrt()).ln()).abs() < 1e-14);
        assert!((log_q0_over_sqrt8(800.0) + 800.0).abs() < 1e-12);
    }

    #[test]
    fn r_functions_are_linked_by_the_l_plus_relation() {
        // R₁ = -R₂'' + R₂ - Q₀²R₂ - 2Q₀E - Q₀⁴
        let e = Expansions::new().unwrap();
        let h = 1e-3;
        for y in [0.0, 0.8, -2.1, 4.0] {
            let d2 = (e.r2(y + h) - 2.0 * e.r2(y) + e.r2(y - h)) / (h * h);
            let q = q0(y);
            let rhs = -d2 + e.r2(y) - q * q * e.r2(y) - 2.0 * q * e0(y) - q.powi(4);
            assert!((e.r1(y) - rhs).abs() < 1e-5, "y={y}: {} vs {rhs}", e.r1(y));
        }
    }
}
