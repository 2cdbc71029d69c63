//! The fourth-order operator 𝒦 = ∂⁴ - 2∂² + K₂∂² + K₁∂ + K₀ + 1 obtained by
//! conjugating M₊M₋ with 𝒰 = ∂ - W₂'/W₂, its virial potentials Y₁, Y₀ and
//! the numerical checks built on them.

use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::testfn::BandLimited;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFn, Parity, Stencil};
use crate::jet::Jet;
use crate::spectral::{InternalMode, ModeEval};

/// Jets of (K₂, K₁, K₀) at y.
pub fn k_jets(eval: &ModeEval, y: f64) -> [Jet; 3] {
    let w = eval.omega;
    let l = eval.lambda;
    let [w1, w2] = eval.w_jets(y);
    let inv = w2.recip();
    let d1 = w2.deriv();
    let d2 = d1.deriv();
    let d3 = d2.deriv();
    let d4 = d3.deriv();
    let (r1, r2, r3, r4) = (d1 * inv, d2 * inv, d3 * inv, d4 * inv);
    let a0 = w1 * inv;
    let a1 = w1.deriv() * inv;
    let a2 = w1.deriv().deriv() * inv;
    let q4 = eval.soliton.q_jet(y).powi(4).scale(w / 3.0);
    let dq4 = q4.deriv();
    let r1s = r1 * r1;
    let k2 = (a0.scale(-l) + r2.scale(3.0) - r1s.scale(4.0) - q4).add_const(1.0);
    let k1 = a1.scale(-3.0 * l) + (a0 * r1).scale(3.0 * l) + r3.scale(3.0) - (r1 * r2).scale(11.0) + (r1s * r1).scale(8.0) - dq4;
    let k0 = a2.scale(-2.0 * l) + (a1 * r1).scale(5.0 * l) + r1s.scale(2.0) - (a0 * r1s).scale(3.0 * l) + (a0 * r2).scale(l) - r2
        + r4
        - (r1 * r3).scale(5.0)
        - (r2 * r2).scale(3.0)
        + (r2 * r1s).scale(15.0)
        - (r1s * r1s).scale(8.0)
        - dq4 * r1
        - q4 * r2
        + (q4 * r1s).scale(2.0);
    [k2, k1, k0.add_const(l * l - 1.0)]
}

/// Y₁ = -2K₂ - yK₂' + 2yK₁ and Y₀ = ½(K₂'' - K₁' - 2yK₀').
pub fn virial_potentials(k: &[Jet; 3], y: f64) -> (f64, f64) {
    let [k2, k1, k0] = k;
    let y1 = -2.0 * k2.value() - y * k2.nth(1) + 2.0 * y * k1.value();
    let y0 = 0.5 * (k2.nth(2) - k1.nth(1) - 2.0 * y * k0.nth(1));
    (y1, y0)
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct KDiagnostics {
    /// Smallest C with |K₂| + |K₁| + |K₀| ≤ Cωe^{-(κ-α)|y|} where the envelope exceeds 1e-13.
    pub k_envelope_constant: f64,
    /// Smallest C with |Y₁| + |Y₀| ≤ Cωe^{-|y|} on the same region.
    pub y_envelope_constant: f64,
    /// Largest |K| and |Y| where the envelope is below 1e-13 (round-off floor).
    pub far_field_k: f64,
    pub far_field_y: f64,
    pub sup_k: f64,
}

#[derive(Clone, Debug)]
pub struct KOperator {
    pub omega: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub k2: GridFn,
    pub k1: GridFn,
    pub k0: GridFn,
    pub y1: GridFn,
    pub y0: GridFn,
    /// W₂'/W₂, replaced by -α sgn y where W₂ < 1e-12 W₂(0).
    pub xi_w: GridFn,
    pub diagnostics: KDiagnostics,
}

/// Sample 𝒦 on `grid` from the mode's pointwise evaluator.
pub fn build_k(mode: &InternalMode, grid: Grid) -> Result<KOperator> {
    let eval = &mode.eval;
    let w20 = eval.w_jets(0.0)[1].value();
    let rows: Vec<[f64; 6]> = grid
        .nodes()
        .par_iter()
        .map(|&y| {
            let w2 = eval.w_jets(y)[1];
            let xi = if w2.value() < 1e-12 * w20 { -eval.alpha * y.signum() } else { w2.nth(1) / w2.value() };
            let k = k_jets(eval, y);
            let (y1, y0) = virial_potentials(&k, y);
            [k[0].value(), k[1].value(), k[2].value(), y1, y0, xi]
        })
        .collect();
    if rows.iter().any(|r| r.iter().any(|v| !v.is_finite())) {
        return Err(Error::ModeInvalid("non-finite K coefficients".into()));
    }
    let min_w2 = grid.nodes().par_iter().map(|&y| eval.w_jets(y)[1].value()).reduce(|| f64::INFINITY, f64::min);
    if !(min_w2 > 0.0) {
        return Err(Error::ModeInvalid(format!("W2 not positive on the K grid (min {min_w2:e})")));
    }
    let col = |k: usize, p: Parity| GridFn::new(grid, rows.iter().map(|r| r[k]).collect()).map(|f| f.with_parity(p));
    let mut op = KOperator {
        omega: mode.omega,
        alpha: mode.alpha,
        kappa: mode.kappa,
        lambda: mode.lambda,
        k2: col(0, Parity::Even)?,
        k1: col(1, Parity::Odd)?,
        k0: col(2, Parity::Even)?,
        y1: col(3, Parity::Even)?,
        y0: col(4, Parity::Even)?,
        xi_w: col(5, Parity::Odd)?,
        diagnostics: KDiagnostics::default(),
    };
    op.diagnostics = envelopes(&op);
    Ok(op)
}

fn envelopes(op: &KOperator) -> KDiagnostics {
    let g = *op.k2.grid();
    let w = op.omega;
    let mut d = KDiagnostics::default();
    for j in 0..g.len() {
        let y = g.node(j).abs();
        let k = op.k2.at(j).abs() + op.k1.at(j).abs() + op.k0.at(j).abs();
        let yy = op.y1.at(j).abs() + op.y0.at(j).abs();
        d.sup_k = d.sup_k.max(k);
        let ek = w * (-(op.kappa - op.alpha) * y).exp();
        let ey = w * (-y).exp();
        if ek > 1e-13 {
            d.k_envelope_constant = d.k_envelope_constant.max(k / ek);
        } else {
            d.far_field_k = d.far_field_k.max(k);
        }
        if ey > 1e-13 {
            d.y_envelope_constant = d.y_envelope_constant.max(yy / ey);
        } else {
            d.far_field_y = d.far_field_y.max(yy);
        }
    }
    d
}

impl KOperator {
    pub fn grid(&self) -> &Grid {
        self.k2.grid()
    }

    /// 𝒦h from exact derivatives (h, h', h'', h''', h'''') on the grid.
    pub fn apply_exact(&self, d: &[GridFn]) -> Result<GridFn> {
        let g = *self.grid();
        let vals = (0..g.len())
            .map(|j| {
                d[4].at(j) - 2.0 * d[2].at(j) + self.k2.at(j) * d[2].at(j) + self.k1.at(j) * d[1].at(j) + (self.k0.at(j) + 1.0) * d[0].at(j)
            })
            .collect();
        GridFn::new(g, vals)
    }

    /// ∫Y₀.
    pub fn repulsivity_integral(&self) -> f64 {
        self.y0.integrate()
    }
}

/// Both sides of the virial identity
/// ∫(2yh' + h)𝒦h = 4∫(h'')² + 4∫(h')² + ∫Y₁(h')² + ∫Y₀h².
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct VirialCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl VirialCheck {
    pub fn relative_gap(&self) -> f64 {
        let s = self.lhs.abs() + self.rhs.abs();
        if s == 0.0 {
            0.0
        } else {
            (self.lhs - self.rhs).abs() / s
        }
    }
}

pub fn virial_identity_check(k: &KOperator, h: &BandLimited) -> Result<VirialCheck> {
    let g = *k.grid();
    let d = h.sample(g, 4);
    let kh = k.apply_exact(&d)?;
    let mult = GridFn::from_fn(g, |y| y).mul(&d[1])?.lin_comb(2.0, &d[0], 1.0)?;
    let lhs = mult.mul(&kh)?.integrate();
    let d1sq = d[1].mul(&d[1])?;
    let rhs = 4.0 * d[2].mul(&d[2])?.integrate() + 4.0 * d1sq.integrate() + k.y1.mul(&d1sq)?.integrate() + k.y0.mul(&d[0].mul(&d[0])?)?.integrate();
    Ok(VirialCheck { lhs, rhs })
}

/// Result of the weighted inequality
/// ∫e^{-c|x|}h² ≤ (4/(c∫Y))∫Yh² + (64/(c²(∫Y)²))∫(h')².
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SimonCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

/// `h` and `dh` are h and h' on the grid of `y`.
pub fn simon_inequality_check(y: &GridFn, c: f64, h: &GridFn, dh: &GridFn) -> Result<SimonCheck> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Domain(format!("c must lie in (0, 1), got {c}")));
    }
    let g = *y.grid();
    for j in 0..g.len() {
        if y.at(j).abs() > (-g.node(j).abs()).exp() * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("|Y| exceeds e^{{-|x|}} at x = {}", g.node(j))));
        }
    }
    let iy = y.integrate();
    if !(iy > 0.0) {
        return Err(Error::Domain(format!("integral of Y must be positive, got {iy:e}")));
    }
    let h2 = h.mul(h)?;
    let lhs = GridFn::from_fn(g, |x| (-c * x.abs()).exp()).mul(&h2)?.integrate();
    let rhs = 4.0 / (c * iy) * y.mul(&h2)?.integrate() + 64.0 / (c * c * iy * iy) * dh.mul(dh)?.integrate();
    let slack = rhs - lhs;
    Ok(SimonCheck { lhs, rhs, slack, holds: slack >= -1e-12 * rhs.abs().max(1.0) })
}

/// Y₀ cut to |x| ≤ 20 and scaled so that |Y| ≤ e^{-|x|}.
pub fn simon_weight(k: &KOperator) -> GridFn {
    let g = *k.grid();
    let mut scale = 0.0f64;
    for j in 0..g.len() {
        let x = g.node(j);
        if x.abs() <= 20.0 {
            scale = scale.max(k.y0.at(j).abs() * x.abs().exp());
        }
    }
    let s = if scale > 0.0 { 1.0 / scale } else { 0.0 };
    GridFn::from_fn(g, |x| x).zip_with(&k.y0, |x, v| if x.abs() <= 20.0 { v * s } else { 0.0 }).expect("same grid")
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub re: f64,
    pub im: f64,
    /// Fraction of eigenvector mass in |y| ≤ L/2.
    pub localization: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KSpectrumReport {
    pub half_width: f64,
    pub points: usize,
    /// Eigenvalues with real part below 1, with their localization.
    pub below_threshold: Vec<SpectralPoint>,
    /// Smallest real part in the whole discrete spectrum.
    pub min_real: f64,
    /// Localized eigenvalues (score > 0.9) with real part in [0, 0.99].
    pub localized_count: usize,
}

/// Dense sixth-order discretization of 𝒦 with zero data outside the box.
fn k_matrix(k: &KOperator) -> Result<DMatrix<f64>> {
    let g = *k.grid();
    let n = g.len();
    let h = g.h();
    let s1 = Stencil::new(1, 6)?;
    let s2 = Stencil::new(2, 6)?;
    let s4 = Stencil::new(4, 6)?;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let (k2, k1, k0) = (k.k2.at(i), k.k1.at(i), k.k0.at(i));
        m[(i, i)] += k0 + 1.0;
        let mut put = |st: &Stencil, coef: f64, p: i32| {
            let r = st.radius() as i64;
            for (o, w) in st.central.iter().enumerate() {
                let j = i as i64 + o as i64 - r;
                if j >= 0 && (j as usize) < n {
                    m[(i, j as usize)] += coef * w / h.powi(p);
                }
            }
        };
        put(&s4, 1.0, 4);
        put(&s2, k2 - 2.0, 2);
        put(&s1, k1, 1);
    }
    Ok(m)
}

/// Discrete eigenvalues of 𝒦 below the continuum threshold 1.
pub fn k_spectrum_probe(k: &KOperator) -> Result<KSpectrumReport> {
    let g = *k.grid();
    let m = k_matrix(k)?;
    let eig = m.clone().complex_eigenvalues();
    let min_real = eig.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let n = g.len();
    let mc: DMatrix<Complex<f64>> = m.map(|v| Complex::new(v, 0.0));
    let mut below = Vec::new();
    for z in eig.iter().filter(|z| z.re < 1.0) {
        let shift = *z + Complex::new(1e-9, 1e-9);
        let a = &mc - DMatrix::<Complex<f64>>::identity(n, n) * shift;
        let lu = a.lu();
        let mut v = DVector::<Complex<f64>>::from_element(n, Complex::new(1.0, 0.0));
        for _ in 0..3 {
            v = lu.solve(&v).ok_or_else(|| Error::Singular("inverse iteration".into()))?;
            let nv = v.norm();
            v /= Complex::new(nv, 0.0);
        }
        let total: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        let inside: f64 = (0..n).filter(|&j| g.node(j).abs() <= 0.5 * g.half_width()).map(|j| v[j].norm_sqr()).sum();
        below.push(SpectralPoint { re: z.re, im: z.im, localization: inside / total });
    }
    let localized_count = below.iter().filter(|p| p.localization > 0.9 && p.re >= 0.0 && p.re <= 0.99).count();
    Ok(KSpectrumReport { half_width: g.half_width(), points: n, below_threshold: below, min_real, localized_count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::build_internal_mode;

    #[test]
    fn virial_identity_on_gaussian() {
        let mode = build_internal_mode(0.02).unwrap();
        let k = build_k(&mode, Grid::new(40.0, 4096).unwrap()).unwrap();
        let c = virial_identity_check(&k, &BandLimited::gaussian(1.0 / 2f64.sqrt())).unwrap();
        assert!(c.relative_gap() < 1e-5, "{c:?}");
        assert!(k.repulsivity_integral() > 0.0);
    }

    #[test]
    fn simon_with_exponential_weight() {
        let g = Grid::new(40.0, 4096).unwrap();
        let y = GridFn::from_fn(g, |x| (-x.abs()).exp());
        let h = GridFn::from_fn(g, |x| 1.0 / x.cosh());
        let dh = GridFn::from_fn(g, |x| -x.tanh() / x.cosh());
        let c = simon_inequality_check(&y, 0.5, &h, &dh).unwrap();
        assert!(c.holds && c.slack > 0.0, "{c:?}");
        let z = GridFn::zeros(g);
        let c0 = simon_inequality_check(&y, 0.5, &z, &z).unwrap();
        assert_eq!((c0.lhs, c0.rhs), (0.0, 0.0));
    }
}
