use super::{GridFn, Scalar};
use crate::error::{Error, Result};

/// Accuracy order used when a caller does not ask for one.
pub const DEFAULT_FD_ORDER: usize = 4;

/// Fornberg's recursion: weights for derivatives 0..=m at `z` from the nodes `x`.
/// Returns `c[k][j]`, the weight of node j in the k-th derivative.
pub fn fornberg(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Finite-difference stencil for the k-th derivative with accuracy order p:
/// centered in the interior, shifted one-sided windows near the ends.
#[derive(Clone, Debug)]
pub struct Stencil {
    pub order: usize,
    pub accuracy: usize,
    /// Centered weights at offsets -r..=r (unit spacing).
    pub central: Vec<f64>,
    /// Rows for the first r nodes: weights over nodes 0..window (unit spacing).
    pub left: Vec<Vec<f64>>,
}

impl Stencil {
    pub fn new(order: usize, accuracy: usize) -> Result<Self> {
        if !(1..=6).contains(&order) {
            return Err(Error::Domain(format!("derivative order {order} not supported")));
        }
        if accuracy < 2 || accuracy % 2 != 0 {
            return Err(Error::Domain(format!("accuracy order must be even and >= 2, got {accuracy}")));
        }
        let r = (order + 1) / 2 + accuracy / 2 - 1;
        let xs: Vec<f64> = (-(r as i64)..=r as i64).map(|o| o as f64).collect();
        let central = fornberg(0.0, &xs, order).swap_remove(order);
        let window = (order + accuracy).max(2 * r + 1);
        let xb: Vec<f64> = (0..window).map(|o| o as f64).collect();
        let left = (0..r).map(|j| fornberg(j as f64, &xb, order).swap_remove(order)).collect();
        Ok(Stencil { order, accuracy, central, left })
    }

    pub fn radius(&self) -> usize {
        self.central.len() / 2
    }

    /// Apply to raw samples with spacing h.
    pub fn apply<T: Scalar>(&self, values: &[T], h: f64) -> Vec<T> {
        let n = values.len();
        let r = self.radius();
        let scale = h.powi(-(self.order as i32));
        let odd = self.order % 2 == 1;
        let mut out = vec![T::zero(); n];
        for j in r..n.saturating_sub(r) {
            let mut acc = T::zero();
            for (o, w) in self.central.iter().enumerate() {
                if *w != 0.0 {
                    acc = acc + values[j + o - r] * *w;
                }
            }
            out[j] = acc * scale;
        }
        for (j, row) in self.left.iter().enumerate() {
            if j >= n {
                break;
            }
            let mut acc_l = T::zero();
            let mut acc_r = T::zero();
            for (o, w) in row.iter().enumerate() {
                acc_l = acc_l + values[o] * *w;
                acc_r = acc_r + values[n - 1 - o] * *w;
            }
            out[j] = acc_l * scale;
            // Mirrored window: odd derivatives flip sign.
            out[n - 1 - j] = if odd { -acc_r * scale } else { acc_r * scale };
        }
        out
    }
}

/// k-th derivative with accuracy order [`DEFAULT_FD_ORDER`].
pub fn diff<T: Scalar>(f: &GridFn<T>, order: usize) -> Result<GridFn<T>> {
    diff_p(f, order, DEFAULT_FD_ORDER)
}

/// k-th derivative with accuracy order p.
pub fn diff_p<T: Scalar>(f: &GridFn<T>, order: usize, accuracy: usize) -> Result<GridFn<T>> {
    let st = Stencil::new(order, accuracy)?;
    let values = st.apply(f.values(), f.grid().h());
    Ok(GridFn::new(*f.grid(), values)?.with_parity(f.parity().after_derivatives(order)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, Parity};

    #[test]
    fn fornberg_reproduces_classic_stencils() {
        let xs = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let c = fornberg(0.0, &xs, 2);
        let d1 = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        let d2 = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
        for j in 0..5 {
            assert!((c[1][j] - d1[j]).abs() < 1e-14);
            assert!((c[2][j] - d2[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_of_sine_is_fourth_order() {
        let mut errs = vec![];
        for n in [256, 512] {
            let g = Grid::new(10.0, n).unwrap();
            let f = GridFn::from_fn(g, f64::sin);
            let d = diff(&f, 1).unwrap();
            let e = (0..n).map(|j| (d.at(j) - g.node(j).cos()).abs()).fold(0.0, f64::max);
            errs.push(e);
        }
        assert!(errs[0] / errs[1] > 12.0, "{errs:?}");
        assert!(errs[1] < 1e-5);
    }

    #[test]
    fn constants_have_zero_derivatives() {
        let g = Grid::new(5.0, 64).unwrap();
        let f = GridFn::from_fn(g, |_| 3.25);
        for k in 1..=4 {
            let d = diff(&f, k).unwrap();
            assert!(d.sup_norm() < 1e-9, "order {k}: {}", d.sup_norm());
        }
    }

    #[test]
    fn second_derivative_of_soliton() {
        let g = Grid::new(40.0, 4096).unwrap();
        let q = GridFn::from_fn(g, |y| 2f64.sqrt() / y.cosh());
        let d2 = diff(&q, 2).unwrap();
        let err = (0..g.len())
            .filter(|&j| g.node(j).abs() <= 35.0)
            .map(|j| {
                let v = q.at(j);
                (d2.at(j) - (v - v.powi(3))).abs()
            })
            .fold(0.0, f64::max);
        assert!(err < 5.0 * g.h().powi(4), "{err}");
    }

    #[test]
    fn parity_of_derivatives() {
        let g = Grid::new(8.0, 128).unwrap();
        let f = GridFn::from_fn(g, |y| (-y * y).exp()).with_parity(Parity::Even);
        let d1 = diff(&f, 1).unwrap();
        assert_eq!(d1.parity(), Parity::Odd);
        assert!(d1.check_parity(1e-12).is_ok());
        let d3 = diff(&f, 3).unwrap();
        assert!(d3.check_parity(1e-9).is_ok());
    }

    #[test]
    fn boundary_rows_are_accurate() {
        let g = Grid::new(1.0, 64).unwrap();
        let f = GridFn::from_fn(g, |y| (2.0 * y).exp());
        for k in 1..=4 {
            let d = diff_p(&f, k, 4).unwrap();
            for j in [0, 1, 62, 63] {
                let exact = 2f64.powi(k as i32) * (2.0 * g.node(j)).exp();
                assert!((d.at(j) - exact).abs() / exact < 5e-3, "k={k} j={j}");
            }
        }
    }
}
