use super::{BandMatrix, GridFn, Stencil, DEFAULT_FD_ORDER};
use crate::error::{Error, Result};

/// Discrete -∂² + c with homogeneous Dirichlet data at ±L. Boundary nodes are
/// pinned to zero; stencil legs that leave the box use odd reflection about
/// the wall node.
fn shifted_matrix(n: usize, h: f64, c: f64, accuracy: usize) -> Result<BandMatrix> {
    let st = Stencil::new(2, accuracy)?;
    let r = st.radius();
    let mut a = BandMatrix::zeros(n, r, r);
    let inv_h2 = 1.0 / (h * h);
    a.set(0, 0, 1.0);
    a.set(n - 1, n - 1, 1.0);
    for i in 1..n - 1 {
        a.add(i, i, c);
        for (o, w) in st.central.iter().enumerate() {
            let m = i as i64 + o as i64 - r as i64;
            let coef = -w * inv_h2;
            if m <= 0 {
                // u_{-m} = -u_{m}; u_0 = 0.
                let mm = (-m) as usize;
                if mm != 0 {
                    a.add(i, mm, -coef);
                }
            } else if m as usize >= n - 1 {
                let over = m as usize - (n - 1);
                if over != 0 {
                    a.add(i, n - 1 - over, -coef);
                }
            } else {
                a.add(i, m as usize, coef);
            }
        }
    }
    Ok(a)
}

/// Solve (-∂² + c) g = rhs with homogeneous Dirichlet conditions.
pub fn solve_shifted(c: f64, rhs: &GridFn) -> Result<GridFn> {
    solve_shifted_p(c, rhs, DEFAULT_FD_ORDER)
}

pub fn solve_shifted_p(c: f64, rhs: &GridFn, accuracy: usize) -> Result<GridFn> {
    if !(c > 0.0) {
        return Err(Error::Singular(format!("shift must be positive, got {c}")));
    }
    let g = *rhs.grid();
    let n = g.len();
    let a = shifted_matrix(n, g.h(), c, accuracy)?;
    let mut b = rhs.values().to_vec();
    b[0] = 0.0;
    b[n - 1] = 0.0;
    let x = a.factor()?.solve(&b);
    Ok(GridFn::new(g, x)?.with_parity(rhs.parity()))
}

/// The discrete operator inverted by [`solve_shifted`].
pub fn apply_shifted(c: f64, f: &GridFn) -> Result<GridFn> {
    let g = *f.grid();
    let a = shifted_matrix(g.len(), g.h(), c, DEFAULT_FD_ORDER)?;
    let mut out = a.mul_vec(f.values());
    let n = out.len();
    out[0] = f.at(0);
    out[n - 1] = f.at(n - 1);
    Ok(GridFn::new(g, out)?.with_parity(f.parity()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{diff, Grid};

    fn sech(x: f64) -> f64 {
        1.0 / x.cosh()
    }

    #[test]
    fn round_trip() {
        let g = Grid::new(30.0, 2048).unwrap();
        let f = GridFn::from_fn(g, sech);
        let rhs = apply_shifted(1.0, &f).unwrap();
        let back = solve_shifted(1.0, &rhs).unwrap();
        let err = back.sub(&f).unwrap().sup_norm();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let g = Grid::new(10.0, 128).unwrap();
        let z = solve_shifted(2.0, &GridFn::zeros(g)).unwrap();
        assert_eq!(z.sup_norm(), 0.0);
        assert!(solve_shifted(0.0, &GridFn::zeros(g)).is_err());
    }

    #[test]
    fn matches_explicit_kernel_convolution() {
        // (-∂² + α²)^{-1} Q0⁴ = (1/2α) ∫ e^{-α|y-z|} Q0⁴(z) dz
        let alpha: f64 = 0.5;
        let g = Grid::new(80.0, 8192).unwrap();
        let q4 = GridFn::from_fn(g, |y| 4.0 * sech(y).powi(4));
        let sol = solve_shifted(alpha * alpha, &q4).unwrap();
        for j in [4096, 4160, 4300, 4700] {
            let y = g.node(j);
            let integrand = |z: f64| (-alpha * (y - z).abs()).exp() * 4.0 * sech(z).powi(4);
            // Split at the kink so that Simpson sees two smooth pieces.
            let exact = (simpson(&integrand, -40.0, y, 20000) + simpson(&integrand, y, 40.0, 20000)) / (2.0 * alpha);
            assert!((sol.at(j) - exact).abs() <= 1e-6 * exact.abs(), "y={y}: {} vs {exact}", sol.at(j));
        }
    }

    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn residual_away_from_boundary() {
        let g = Grid::new(20.0, 1024).unwrap();
        let rhs = GridFn::from_fn(g, |y| (-y * y).exp() * (3.0 * y).cos());
        let sol = solve_shifted(0.7, &rhs).unwrap();
        let back = diff(&sol, 2).unwrap().lin_comb(-1.0, &sol, 0.7).unwrap();
        let r = back.sub(&rhs).unwrap();
        let err = r.sup_norm_within(0.95 * 20.0);
        assert!(err < 1e-9, "{err}");
    }
}
