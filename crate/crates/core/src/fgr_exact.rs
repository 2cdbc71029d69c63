//! The Fermi golden rule constant: exact reduction of Γ₀ to p₁ over the
//! rationals, its closed-form value, and the numerical Γ(ω) from the
//! internal mode and the generalized eigenfunctions (g₁, g₂).

use std::fmt;
use std::ops::{Add, Mul};

use num::{BigInt, BigRational, One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{inner, Grid, GridFn};
use crate::profiles::q0;
use crate::spectral::expansions::{log_q0_over_sqrt8, Expansions};
use crate::spectral::golden::GoldenRulePair;
use crate::spectral::InternalMode;

/// c_p p₁ + c_q q₁ + c_r r₁ + c_s s₁ with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatVec4(pub [BigRational; 4]);

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl RatVec4 {
    pub fn zero() -> Self {
        RatVec4(std::array::from_fn(|_| BigRational::zero()))
    }

    pub fn basis(i: usize) -> Self {
        let mut v = Self::zero();
        v.0[i] = BigRational::one();
        v
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        RatVec4(std::array::from_fn(|i| &self.0[i] * c))
    }

    pub fn is_pure_p(&self) -> bool {
        self.0[1..].iter().all(|c| c.is_zero())
    }

    /// Evaluate against numeric values of (p₁, q₁, r₁, s₁).
    pub fn eval(&self, base: [f64; 4]) -> f64 {
        self.0.iter().zip(base).map(|(c, b)| to_f64(c) * b).sum()
    }

    /// Coefficients as "num/den" strings.
    pub fn to_strings(&self) -> [String; 4] {
        std::array::from_fn(|i| self.0[i].to_string())
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    // Both parts stay far below 2^53 in this module.
    let n: f64 = r.numer().to_string().parse().unwrap_or(f64::NAN);
    let d: f64 = r.denom().to_string().parse().unwrap_or(f64::NAN);
    n / d
}

impl Add for &RatVec4 {
    type Output = RatVec4;
    fn add(self, o: &RatVec4) -> RatVec4 {
        RatVec4(std::array::from_fn(|i| &self.0[i] + &o.0[i]))
    }
}

impl Mul<&RatVec4> for &BigRational {
    type Output = RatVec4;
    fn mul(self, v: &RatVec4) -> RatVec4 {
        v.scale(self)
    }
}

impl fmt::Display for RatVec4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.to_strings();
        write!(f, "[{}, {}, {}, {}]", s[0], s[1], s[2], s[3])
    }
}

/// p_k, q_k, r_k, s_k for odd k, indexed by (k - 1) / 2.
#[derive(Clone, Debug)]
pub struct MomentTable {
    pub p: Vec<RatVec4>,
    pub q: Vec<RatVec4>,
    pub r: Vec<RatVec4>,
    pub s: Vec<RatVec4>,
}

impl MomentTable {
    pub fn p(&self, k: usize) -> &RatVec4 {
        &self.p[(k - 1) / 2]
    }
    pub fn q(&self, k: usize) -> &RatVec4 {
        &self.q[(k - 1) / 2]
    }
    pub fn r(&self, k: usize) -> &RatVec4 {
        &self.r[(k - 1) / 2]
    }
    pub fn s(&self, k: usize) -> &RatVec4 {
        &self.s[(k - 1) / 2]
    }
}

/// p_{k+2} from p_k.
pub fn p_step(k: i64, p: &RatVec4) -> RatVec4 {
    p.scale(&rat(2 * (k * k + 1), k * (k + 1)))
}

/// One step of the four recursions. `p_k4` is p_{k+4}.
pub fn recursion_step(k: i64, p: &RatVec4, q: &RatVec4, r: &RatVec4, s: &RatVec4, p_k4: &RatVec4) -> [RatVec4; 4] {
    let k1 = k * (k + 1);
    let p2 = p_step(k, p);
    let q2 = &q.scale(&rat(2 * (k * k + 1), k1)) + &p.scale(&rat(2 * (k * k - 2 * k - 1), k1 * k1));
    let c = rat(2, k1);
    let r_in = &(&r.scale(&rat(k * k - 3, 1)) + &s.scale(&rat(-2 * k, 1))) + &p_k4.scale(&rat(-2, 3));
    let r2 = r_in.scale(&c);
    let cs = rat(2, k1 * (k + 2));
    let s_in = &(&r.scale(&rat(6, 1)) + &s.scale(&rat(k * (k * k + 1), 1))) + &p_k4.scale(&rat(2 * (3 * k + 8), 3 * (k + 4)));
    let s2 = s_in.scale(&cs);
    [p2, q2, r2, s2]
}

/// Moments for k = 1, 3, ..., k_max (odd).
pub fn moment_table(k_max: usize) -> MomentTable {
    let count = (k_max + 1) / 2;
    // p is needed two steps ahead of the other families.
    let mut p = vec![RatVec4::basis(0)];
    for i in 0..count + 1 {
        let k = (2 * i + 1) as i64;
        let next = p_step(k, &p[i]);
        p.push(next);
    }
    let mut q = vec![RatVec4::basis(1)];
    let mut r = vec![RatVec4::basis(2)];
    let mut s = vec![RatVec4::basis(3)];
    for i in 0..count - 1 {
        let k = (2 * i + 1) as i64;
        let [_, q2, r2, s2] = recursion_step(k, &p[i], &q[i], &r[i], &s[i], &p[i + 2]);
        q.push(q2);
        r.push(r2);
        s.push(s2);
    }
    p.truncate(count);
    MomentTable { p, q, r, s }
}

/// One term of the combination: family, index k, coefficient num/den.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Term {
    pub family: char,
    pub k: usize,
    pub num: i64,
    pub den: i64,
}

const fn t(family: char, k: usize, num: i64, den: i64) -> Term {
    Term { family, k, num, den }
}

/// The reduced expression of Γ₀ in the moments.
/// Checksum: the seventeen coefficients sum to 915499/4725.
pub const GAMMA0_TERMS: [Term; 17] = [
    t('p', 1, -80, 9),
    t('p', 3, 372, 9),
    t('p', 5, 2446, 25),
    t('p', 7, -9613, 63),
    t('p', 9, 1312, 27),
    t('q', 1, -128, 9),
    t('q', 3, 128, 3),
    t('q', 5, -2624, 45),
    t('q', 7, 64, 3),
    t('r', 1, -32, 1),
    t('r', 3, -124, 1),
    t('r', 5, 388, 1),
    t('r', 7, -168, 1),
    t('s', 1, 16, 1),
    t('s', 3, 108, 1),
    t('s', 5, 156, 1),
    t('s', 7, -168, 1),
];

pub fn combine(terms: &[Term]) -> RatVec4 {
    let table = moment_table(9);
    terms.iter().fold(RatVec4::zero(), |acc, term| {
        let v = match term.family {
            'p' => table.p(term.k),
            'q' => table.q(term.k),
            'r' => table.r(term.k),
            _ => table.s(term.k),
        };
        &acc + &v.scale(&rat(term.num, term.den))
    })
}

/// Γ₀ over {p₁, q₁, r₁, s₁}.
pub fn gamma0_exact() -> RatVec4 {
    combine(&GAMMA0_TERMS)
}

/// Fails unless Γ₀ = (32/3) p₁ exactly.
pub fn certify_gamma0() -> Result<RatVec4> {
    let v = gamma0_exact();
    let mut expect = RatVec4::zero();
    expect.0[0] = rat(32, 3);
    if v != expect {
        return Err(Error::Certification(format!("gamma0 reduces to {v}, expected [32/3, 0, 0, 0]")));
    }
    Ok(v)
}

/// p₁ = ∫ Q₀ cos y = π√2 / cosh(π/2).
pub fn p1_closed_form() -> f64 {
    std::f64::consts::PI * 2f64.sqrt() / (std::f64::consts::PI / 2.0).cosh()
}

pub fn gamma0_numeric() -> f64 {
    32.0 / 3.0 * p1_closed_form()
}

/// Quadrature values of p_k, q_k, r_k, s_k for one odd k.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MomentValues {
    pub k: usize,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

/// Direct quadrature of the moments on [-40, 40].
pub fn moments_by_quadrature(k_max: usize) -> Result<Vec<MomentValues>> {
    let grid = Grid::new(40.0, 16384)?;
    let ex = Expansions::new()?;
    let t2 = GridFn::from_fn(grid, |y| ex.t2(y).0);
    let mut out = Vec::new();
    for k in (1..=k_max).step_by(2) {
        let ki = k as i32;
        let p = GridFn::from_fn(grid, |y| q0(y).powi(ki) * y.cos()).integrate();
        let q = GridFn::from_fn(grid, |y| q0(y).powi(ki) * log_q0_over_sqrt8(y) * y.cos()).integrate();
        let r = GridFn::from_fn(grid, |y| q0(y).powi(ki) * y.cos()).mul(&t2)?.integrate();
        // Q₀' = -tanh(y) Q₀.
        let s = GridFn::from_fn(grid, |y| -y.tanh() * q0(y).powi(ki) * y.sin()).mul(&t2)?.integrate();
        out.push(MomentValues { k, p, q, r, s });
    }
    Ok(out)
}

/// Largest discrepancy between the quadrature moments and the exact
/// recursion evaluated at the quadrature base values.
pub fn recursion_consistency(k_max: usize) -> Result<f64> {
    let m = moments_by_quadrature(k_max)?;
    let base = [m[0].p, m[0].q, m[0].r, m[0].s];
    let table = moment_table(k_max);
    let mut worst = 0.0f64;
    for v in &m {
        let k = v.k;
        let pairs = [(table.p(k), v.p), (table.q(k), v.q), (table.r(k), v.r), (table.s(k), v.s)];
        for (pred, val) in pairs {
            worst = worst.max((pred.eval(base) - val).abs() / val.abs().max(1.0));
        }
    }
    Ok(worst)
}

/// Γ(ω) in both forms.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GammaValue {
    pub omega: f64,
    /// ∫(G₁^⊤g₁ + G₂^⊥g₂).
    pub gamma: f64,
    /// ∫(G₁g₁ + G₂g₂).
    pub gamma_unprojected: f64,
}

impl GammaValue {
    pub fn ratio(&self) -> f64 {
        self.gamma / self.omega
    }

    pub fn form_gap(&self) -> f64 {
        (self.gamma - self.gamma_unprojected).abs() / self.gamma.abs()
    }
}

pub fn gamma_numeric(mode: &InternalMode, pair: &GoldenRulePair) -> Result<GammaValue> {
    let grid = *mode.grid();
    grid.check_same(pair.grid())?;
    let w = mode.omega;
    let s = mode.soliton();
    let (v1, v2) = (&mode.v1, &mode.v2);
    let q = GridFn::from_fn(grid, |y| s.q(y));
    let q3 = q.map(|x| x * x * x);
    let big_g = v1.mul(v1)?.mul(&q.lin_comb(3.0, &q3, 10.0 * w)?)?;
    let weak = q.lin_comb(1.0, &q3, 2.0 * w)?;
    let big_h = v2.mul(v2)?.mul(&weak)?;
    let g1c = big_g.sub(&big_h)?;
    let g2c = v1.mul(v2)?.mul(&weak)?.scale(2.0);
    let v12 = inner(v1, v2)?;
    let g1_top = g1c.lin_comb(1.0, v2, -inner(&g1c, v1)? / v12)?;
    let g2_perp = g2c.lin_comb(1.0, v1, -inner(&g2c, v2)? / v12)?;
    let gamma = inner(&g1_top, &pair.g1)? + inner(&g2_perp, &pair.g2)?;
    let gamma_unprojected = inner(&g1c, &pair.g1)? + inner(&g2c, &pair.g2)?;
    Ok(GammaValue { omega: w, gamma, gamma_unprojected })
}

/// Three-level Richardson extrapolation for f(ω) = f₀ + aω + bω² from
/// samples at 4h, 2h, h: f₀ ≈ (8f(h) - 6f(2h) + f(4h)) / 3.
pub fn richardson3(f_4h: f64, f_2h: f64, f_h: f64) -> f64 {
    (8.0 * f_h - 6.0 * f_2h + f_4h) / 3.0
}

/// JSON certification report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GammaReport {
    pub gamma0_vector: [String; 4],
    pub certified: bool,
    pub p1_closed_form: f64,
    pub gamma0_numeric: f64,
    pub gamma_numeric: Vec<GammaValue>,
}

pub fn gamma_report(per_omega: Vec<GammaValue>) -> GammaReport {
    let v = gamma0_exact();
    let certified = certify_gamma0().is_ok();
    GammaReport {
        gamma0_vector: v.to_strings(),
        certified,
        p1_closed_form: p1_closed_form(),
        gamma0_numeric: gamma0_numeric(),
        gamma_numeric: per_omega,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_steps() {
        let table = moment_table(3);
        assert_eq!(*table.p(3), RatVec4::basis(0).scale(&rat(2, 1)));
        let mut q3 = RatVec4::zero();
        q3.0[0] = rat(-1, 1);
        q3.0[1] = rat(2, 1);
        assert_eq!(*table.q(3), q3);
    }

    #[test]
    fn p9_chain() {
        // p₃ = 2p₁, p₅ = (10/6)p₃, p₇ = (52/30)p₅, p₉ = (100/56)p₇.
        let expected = rat(2, 1) * rat(10, 6) * rat(52, 30) * rat(100, 56);
        assert_eq!(moment_table(9).p(9).0[0], expected);
        assert!(moment_table(9).p(9).is_pure_p());
    }

    #[test]
    fn certification_passes() {
        let v = certify_gamma0().unwrap();
        assert_eq!(v.to_strings()[0], "32/3");
    }

    #[test]
    fn every_single_mutation_is_detected() {
        for i in 0..GAMMA0_TERMS.len() {
            let mut terms = GAMMA0_TERMS;
            terms[i].num += terms[i].den;
            let v = combine(&terms);
            let expect_pure = GAMMA0_TERMS[i].family == 'p';
            assert_ne!(v, gamma0_exact(), "term {i}");
            assert_eq!(v.is_pure_p(), expect_pure, "term {i}: {v}");
        }
    }

    #[test]
    fn table_checksum() {
        let sum = GAMMA0_TERMS.iter().fold(BigRational::zero(), |a, t| a + rat(t.num, t.den));
        assert_eq!(sum, rat(915499, 4725));
    }

    #[test]
    fn closed_form_values() {
        assert!((p1_closed_form() - 1.770652).abs() < 1e-6);
        assert!((gamma0_numeric() - 18.887).abs() < 1e-3);
    }
}
