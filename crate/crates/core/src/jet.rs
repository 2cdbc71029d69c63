//! Truncated Taylor series ("jets") for exact pointwise derivatives of the
//! closed-form profiles and of ODE-propagated eigenfunctions.

use std::ops::{Add, Mul, Neg, Sub};

/// Number of stored Taylor coefficients.
pub const JET_LEN: usize = 10;

/// c[k] = f^{(k)}(y0) / k!.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub c: [f64; JET_LEN],
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |a, i| a * i as f64)
}

impl Jet {
    pub fn zero() -> Self {
        Jet { c: [0.0; JET_LEN] }
    }

    pub fn constant(v: f64) -> Self {
        let mut j = Jet::zero();
        j.c[0] = v;
        j
    }

    /// The identity function at y0.
    pub fn variable(y0: f64) -> Self {
        let mut j = Jet::constant(y0);
        j.c[1] = 1.0;
        j
    }

    pub fn from_derivatives(d: &[f64]) -> Self {
        let mut j = Jet::zero();
        for (k, v) in d.iter().enumerate().take(JET_LEN) {
            j.c[k] = v / factorial(k);
        }
        j
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// k-th derivative at the base point.
    pub fn nth(&self, k: usize) -> f64 {
        self.c[k] * factorial(k)
    }

    /// Jet of f' (loses the top coefficient).
    pub fn deriv(&self) -> Self {
        let mut j = Jet::zero();
        for k in 0..JET_LEN - 1 {
            j.c[k] = (k + 1) as f64 * self.c[k + 1];
        }
        j
    }

    /// Jet of g(t) = f(-t) when `self` is the jet of f at s0 and the result is
    /// wanted at -s0: even functions pass `odd = false`.
    pub fn reflect(&self, odd: bool) -> Self {
        let mut j = *self;
        for k in 0..JET_LEN {
            let s = if k % 2 == 1 { -1.0 } else { 1.0 };
            j.c[k] *= if odd { -s } else { s };
        }
        j
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut j = *self;
        j.c.iter_mut().for_each(|v| *v *= a);
        j
    }

    pub fn add_const(&self, a: f64) -> Self {
        let mut j = *self;
        j.c[0] += a;
        j
    }

    /// self^r for a positive leading coefficient.
    pub fn powf(&self, r: f64) -> Self {
        let g = &self.c;
        let mut f = [0.0; JET_LEN];
        f[0] = g[0].powf(r);
        for k in 1..JET_LEN {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += ((r + 1.0) * j as f64 - k as f64) * g[j] * f[k - j];
            }
            f[k] = acc / (k as f64 * g[0]);
        }
        Jet { c: f }
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = Jet::constant(1.0);
        for _ in 0..n {
            out = out * *self;
        }
        out
    }

    pub fn recip(&self) -> Self {
        self.powf(-1.0)
    }

    pub fn div(&self, other: &Jet) -> Self {
        *self * other.recip()
    }

    pub fn exp(&self) -> Self {
        let g = &self.c;
        let mut f = [0.0; JET_LEN];
        f[0] = g[0].exp();
        for k in 1..JET_LEN {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * g[j] * f[k - j];
            }
            f[k] = acc / k as f64;
        }
        Jet { c: f }
    }

    /// e^{a (y0 + t)} as a jet in t, without forming a composite.
    pub fn exp_linear(a: f64, y0: f64) -> Self {
        let mut j = Jet::zero();
        let base = (a * y0).exp();
        let mut term = base;
        for k in 0..JET_LEN {
            j.c[k] = term;
            term *= a / (k + 1) as f64;
        }
        j
    }

    /// cos(τ (y0 + t)).
    pub fn cos_linear(tau: f64, y0: f64) -> Self {
        let (s, c) = (tau * y0).sin_cos();
        let mut j = Jet::zero();
        let mut p = 1.0;
        for k in 0..JET_LEN {
            // k-th derivative of cos(τy) is τ^k cos(τy + kπ/2).
            let d = match k % 4 {
                0 => c,
                1 => -s,
                2 => -c,
                _ => s,
            };
            j.c[k] = p * d / factorial(k);
            p *= tau;
        }
        j
    }

    pub fn sin_linear(tau: f64, y0: f64) -> Self {
        let (s, c) = (tau * y0).sin_cos();
        let mut j = Jet::zero();
        let mut p = 1.0;
        for k in 0..JET_LEN {
            let d = match k % 4 {
                0 => s,
                1 => c,
                2 => -s,
                _ => -c,
            };
            j.c[k] = p * d / factorial(k);
            p *= tau;
        }
        j
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut j = self;
        for k in 0..JET_LEN {
            j.c[k] += o.c[k];
        }
        j
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        let mut j = self;
        for k in 0..JET_LEN {
            j.c[k] -= o.c[k];
        }
        j
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut c = [0.0; JET_LEN];
        for (i, a) in self.c.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for k in 0..JET_LEN - i {
                c[i + k] += a * o.c[k];
            }
        }
        Jet { c }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, a: f64) -> Jet {
        self.scale(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_and_exp_match_closed_forms() {
        let x = Jet::variable(0.7);
        let f = (x * x).add_const(1.0).powf(-0.5);
        // d/dx (1+x²)^{-1/2} = -x (1+x²)^{-3/2}
        let expect = -0.7 * (1.0f64 + 0.49).powf(-1.5);
        assert!((f.nth(1) - expect).abs() < 1e-14);
        let e = x.scale(2.0).exp();
        for k in 0..6 {
            assert!((e.nth(k) - 2f64.powi(k as i32) * 1.4f64.exp()).abs() < 1e-10 * 2f64.powi(k as i32) * 4.1);
        }
        let el = Jet::exp_linear(2.0, 0.7);
        for k in 0..JET_LEN {
            assert!((el.c[k] - e.c[k]).abs() < 1e-12 * e.c[k].abs().max(1.0));
        }
    }

    #[test]
    fn trig_jets() {
        let c = Jet::cos_linear(1.3, 0.4);
        let s = Jet::sin_linear(1.3, 0.4);
        let one = c * c + s * s;
        assert!((one.c[0] - 1.0).abs() < 1e-15);
        for k in 1..JET_LEN {
            assert!(one.c[k].abs() < 1e-13);
        }
        assert!((c.deriv().c[0] + 1.3 * s.c[0]).abs() < 1e-15);
    }

    #[test]
    fn reflection_parity() {
        // f(y) = e^{y}: jet at -0.5 from the jet of e^{-s} at s = 0.5.
        let g = Jet::exp_linear(-1.0, 0.5);
        let f = g.reflect(false);
        let direct = Jet::exp_linear(1.0, -0.5);
        for k in 0..JET_LEN {
            assert!((f.c[k] - direct.c[k]).abs() < 1e-15);
        }
    }
}
