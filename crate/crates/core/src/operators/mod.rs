//! Linearized and transformed operators as finite-difference grid actions:
//! L± = -∂² + 1 - (3|1)Q² - (5|1)ωQ⁴, M₊ = -∂² + 1 + (ω/3)Q⁴, M₋ = -∂² + 1 - ωQ⁴,
//! S = ∂ - Q'/Q, S* = -∂ - Q'/Q, 𝒰 = ∂ - W₂'/W₂, Λ, Λ_ω and 𝒦.

pub mod kop;
pub mod testfn;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{diff_p, Grid, GridFn, Parity, DEFAULT_FD_ORDER};
use crate::profiles::{make_profile, SolitonProfile};
use crate::spectral::InternalMode;

pub use kop::{
    build_k, k_jets, k_spectrum_probe, simon_inequality_check, simon_weight, virial_identity_check, virial_potentials, KDiagnostics,
    KOperator, KSpectrumReport, SimonCheck, SpectralPoint, VirialCheck,
};
pub use testfn::BandLimited;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OpName {
    LPlus,
    LMinus,
    MPlus,
    MMinus,
    S,
    SStar,
    U,
    Lambda,
    LambdaOmega,
    K,
}

impl OpName {
    pub const ALL: [OpName; 10] = [
        OpName::LPlus,
        OpName::LMinus,
        OpName::MPlus,
        OpName::MMinus,
        OpName::S,
        OpName::SStar,
        OpName::U,
        OpName::Lambda,
        OpName::LambdaOmega,
        OpName::K,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            OpName::LPlus => "L+",
            OpName::LMinus => "L-",
            OpName::MPlus => "M+",
            OpName::MMinus => "M-",
            OpName::S => "S",
            OpName::SStar => "S*",
            OpName::U => "U",
            OpName::Lambda => "Lambda",
            OpName::LambdaOmega => "Lambda_omega",
            OpName::K => "K",
        }
    }
}

impl fmt::Display for OpName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for OpName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        OpName::ALL.iter().copied().find(|o| o.symbol().eq_ignore_ascii_case(s)).ok_or_else(|| Error::Config(format!("unknown operator '{s}'")))
    }
}

/// Profile-dependent potentials on one grid, plus the optional 𝒦.
#[derive(Clone, Debug)]
pub struct OperatorBundle {
    pub profile: SolitonProfile,
    pub accuracy: usize,
    pub xi: GridFn,
    pub l_plus_pot: GridFn,
    pub l_minus_pot: GridFn,
    pub m_plus_pot: GridFn,
    pub m_minus_pot: GridFn,
    pub k: Option<KOperator>,
}

impl OperatorBundle {
    pub fn new(omega: f64, grid: Grid) -> Result<Self> {
        let profile = make_profile(omega, grid)?;
        let s = profile.soliton;
        let w = omega;
        let q2 = |y: f64| s.q(y).powi(2);
        Ok(OperatorBundle {
            accuracy: DEFAULT_FD_ORDER,
            xi: GridFn::from_fn(grid, |y| s.xi(y)).with_parity(Parity::Odd),
            l_plus_pot: GridFn::from_fn(grid, |y| 1.0 - 3.0 * q2(y) - 5.0 * w * q2(y).powi(2)),
            l_minus_pot: GridFn::from_fn(grid, |y| 1.0 - q2(y) - w * q2(y).powi(2)),
            m_plus_pot: GridFn::from_fn(grid, |y| 1.0 + w / 3.0 * q2(y).powi(2)),
            m_minus_pot: GridFn::from_fn(grid, |y| 1.0 - w * q2(y).powi(2)),
            profile,
            k: None,
        })
    }

    pub fn with_accuracy(mut self, accuracy: usize) -> Self {
        self.accuracy = accuracy;
        self
    }

    /// Attach 𝒦 (and 𝒰) built from the mode on this bundle's grid.
    pub fn with_mode(mut self, mode: &InternalMode) -> Result<Self> {
        if (mode.omega - self.profile.omega).abs() > 1e-15 {
            return Err(Error::Config(format!("mode built at omega = {} but bundle at {}", mode.omega, self.profile.omega)));
        }
        self.k = Some(build_k(mode, *self.grid())?);
        Ok(self)
    }

    pub fn grid(&self) -> &Grid {
        self.profile.grid()
    }

    pub fn omega(&self) -> f64 {
        self.profile.omega
    }

    fn d(&self, f: &GridFn, k: usize) -> Result<GridFn> {
        diff_p(f, k, self.accuracy)
    }

    fn schrodinger(&self, pot: &GridFn, f: &GridFn) -> Result<GridFn> {
        Ok(pot.mul(f)?.sub(&self.d(f, 2)?)?.with_parity(f.parity()))
    }

    fn k_op(&self) -> Result<&KOperator> {
        self.k.as_ref().ok_or_else(|| Error::Config("operator needs an internal mode; build the bundle with_mode".into()))
    }

    pub fn apply(&self, op: OpName, f: &GridFn) -> Result<GridFn> {
        self.grid().check_same(f.grid())?;
        let flip = f.parity().after_derivatives(1);
        match op {
            OpName::LPlus => self.schrodinger(&self.l_plus_pot, f),
            OpName::LMinus => self.schrodinger(&self.l_minus_pot, f),
            OpName::MPlus => self.schrodinger(&self.m_plus_pot, f),
            OpName::MMinus => self.schrodinger(&self.m_minus_pot, f),
            OpName::S => Ok(self.d(f, 1)?.sub(&self.xi.mul(f)?)?.with_parity(flip)),
            OpName::SStar => Ok(self.d(f, 1)?.scale(-1.0).sub(&self.xi.mul(f)?)?.with_parity(flip)),
            OpName::U => {
                let k = self.k_op()?;
                Ok(self.d(f, 1)?.sub(&k.xi_w.mul(f)?)?.with_parity(flip))
            }
            OpName::Lambda => {
                let y = GridFn::from_fn(*self.grid(), |y| y);
                Ok(f.lin_comb(0.5, &y.mul(&self.d(f, 1)?)?, 0.5)?.with_parity(f.parity()))
            }
            OpName::LambdaOmega => {
                // Only defined on Q_ω itself: ω∂_ω needs the whole family.
                let q = &self.profile.q;
                if f.sub(q)?.sup_norm() > 1e-12 * q.sup_norm() {
                    return Err(Error::Config("Lambda_omega acts on Q_omega only".into()));
                }
                let s = self.profile.soliton;
                Ok(GridFn::from_fn(*self.grid(), |y| s.lambda_q(y)).with_parity(Parity::Even))
            }
            OpName::K => {
                let k = self.k_op()?;
                let d4 = self.d(f, 4)?;
                let d2 = self.d(f, 2)?;
                let d1 = self.d(f, 1)?;
                let vals = (0..f.len())
                    .map(|j| d4.at(j) + (k.k2.at(j) - 2.0) * d2.at(j) + k.k1.at(j) * d1.at(j) + (k.k0.at(j) + 1.0) * f.at(j))
                    .collect();
                Ok(GridFn::new(*self.grid(), vals)?.with_parity(f.parity()))
            }
        }
    }

    /// Apply a product of operators right to left: `[A, B, C]` gives ABCf.
    pub fn chain(&self, ops: &[OpName], f: &GridFn) -> Result<GridFn> {
        ops.iter().rev().try_fold(f.clone(), |acc, op| self.apply(*op, &acc))
    }
}

/// Relative interior residuals of the first factorization on one test function.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FirstFactorization {
    /// ‖(S²L₊L₋ - M₊M₋S²)f‖ / ‖f‖.
    pub conjugation: f64,
    /// ‖(SS* - M₊)f‖ / ‖f‖.
    pub ss_star: f64,
    /// ‖(S*S - L₋)f‖ / ‖f‖.
    pub s_star_s: f64,
}

impl FirstFactorization {
    pub fn worst(&self) -> f64 {
        self.conjugation.max(self.ss_star).max(self.s_star_s)
    }
}

fn rel(r: &GridFn, f: &GridFn) -> f64 {
    r.interior_l2_norm() / f.interior_l2_norm()
}

/// S²L₊L₋ = M₊M₋S², SS* = M₊ and S*S = L₋ on each test function.
pub fn check_conjugation_first(bundle: &OperatorBundle, test_fns: &[GridFn]) -> Result<Vec<FirstFactorization>> {
    use OpName::*;
    test_fns
        .iter()
        .map(|f| {
            let lhs = bundle.chain(&[S, S, LPlus, LMinus], f)?;
            let rhs = bundle.chain(&[MPlus, MMinus, S, S], f)?;
            let ss = bundle.chain(&[S, SStar], f)?.sub(&bundle.apply(MPlus, f)?)?;
            let s_s = bundle.chain(&[SStar, S], f)?.sub(&bundle.apply(LMinus, f)?)?;
            Ok(FirstFactorization { conjugation: rel(&lhs.sub(&rhs)?, f), ss_star: rel(&ss, f), s_star_s: rel(&s_s, f) })
        })
        .collect()
}

/// ‖(𝒰M₊M₋ - 𝒦𝒰)f‖ / ‖f‖ on the interior.
pub fn check_conjugation_second(bundle: &OperatorBundle, f: &GridFn) -> Result<f64> {
    use OpName::*;
    let lhs = bundle.chain(&[U, MPlus, MMinus], f)?;
    let rhs = bundle.chain(&[K, U], f)?;
    Ok(rel(&lhs.sub(&rhs)?, f))
}

/// Observed convergence order from residuals at spacing h and h/2.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::q0;

    #[test]
    fn resonance_identities_at_zero() {
        let b = OperatorBundle::new(0.0, Grid::new(40.0, 8192).unwrap()).unwrap();
        let g = *b.grid();
        let r = GridFn::from_fn(g, |y| 1.0 - q0(y).powi(2));
        let lp = b.apply(OpName::LPlus, &r).unwrap();
        assert!(lp.map(|v| v - 1.0).interior_sup_norm() < 1e-6);
        let lm = b.apply(OpName::LMinus, &GridFn::from_fn(g, |_| 1.0)).unwrap();
        assert!(lm.sub(&r).unwrap().interior_sup_norm() < 1e-6);
    }

    #[test]
    fn kernel_identities() {
        let b = OperatorBundle::new(0.02, Grid::new(40.0, 8192).unwrap()).unwrap();
        let q = b.profile.q.clone();
        assert!(b.apply(OpName::LMinus, &q).unwrap().interior_sup_norm() < 1e-6);
        let lq = b.apply(OpName::LambdaOmega, &q).unwrap();
        let lplq = b.apply(OpName::LPlus, &lq).unwrap().add(&q).unwrap();
        assert!(lplq.interior_sup_norm() < 1e-6);
        assert!(b.apply(OpName::LambdaOmega, &q.scale(2.0)).is_err());
        assert!(b.apply(OpName::K, &q).is_err());
        let s_q = b.apply(OpName::S, &q).unwrap();
        assert_eq!(s_q.parity(), Parity::Odd);
    }

    #[test]
    fn first_factorization_converges() {
        let f = |n| {
            let b = OperatorBundle::new(0.02, Grid::new(120.0, n).unwrap()).unwrap().with_accuracy(6);
            let g = *b.grid();
            check_conjugation_first(&b, &[GridFn::from_fn(g, |y| (-y * y).exp())]).unwrap()[0]
        };
        let (c, fine) = (f(4096), f(8192));
        assert!(fine.worst() < 1e-4, "{fine:?}");
        assert!(observed_order(c.conjugation, fine.conjugation) >= 3.0);
    }

    #[test]
    fn second_factorization_converges() {
        let mode = crate::spectral::build_internal_mode(0.02).unwrap();
        let f = |n| {
            let b = OperatorBundle::new(0.02, Grid::new(120.0, n).unwrap()).unwrap().with_accuracy(6).with_mode(&mode).unwrap();
            let g = *b.grid();
            check_conjugation_second(&b, &GridFn::from_fn(g, |y| (-0.5 * y * y).exp())).unwrap()
        };
        let (c, fine) = (f(4096), f(8192));
        assert!(fine < 1e-4, "{fine:e}");
        assert!(observed_order(c, fine) >= 3.0, "{c:e} -> {fine:e}");
    }

    #[test]
    fn names_round_trip() {
        for op in OpName::ALL {
            assert_eq!(op.symbol().parse::<OpName>().unwrap(), op);
        }
    }
}
