//! Uniform truncated-line grid, sampled functions and the calculus kernel
//! (trapezoid quadrature, finite differences, banded resolvents).

mod banded;
mod fd;
mod resolvent;

pub use banded::{BandLu, BandMatrix, Inertia};
pub use fd::{diff, diff_p, fornberg, Stencil, DEFAULT_FD_ORDER};
pub use resolvent::{apply_shifted, solve_shifted, solve_shifted_p};

use crate::error::{Error, Result};
use num::complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

/// Fraction of the half-width excluded on each side by interior norms.
pub const INTERIOR_MARGIN: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_width: f64,
    n: usize,
}

impl Grid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::Domain(format!("grid half-width must be positive, got {half_width}")));
        }
        if n < 16 || n % 2 != 0 {
            return Err(Error::Domain(format!("grid size must be even and >= 16, got {n}")));
        }
        Ok(Grid { half_width, n })
    }

    /// Smallest even grid on [-L, L] whose spacing does not exceed `h_max`.
    pub fn with_spacing(half_width: f64, h_max: f64) -> Result<Self> {
        if !(h_max > 0.0) {
            return Err(Error::Domain(format!("spacing must be positive, got {h_max}")));
        }
        let mut n = (2.0 * half_width / h_max).ceil() as usize + 1;
        n = n.max(16);
        if n % 2 == 1 {
            n += 1;
        }
        Grid::new(half_width, n)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }

    /// Node y_j = -L + j h, computed as an odd multiple of h/2 so that
    /// y_j = -y_{N-1-j} holds bit for bit.
    pub fn node(&self, j: usize) -> f64 {
        let k = 2.0 * j as f64 - (self.n - 1) as f64;
        k * (self.half_width / (self.n - 1) as f64)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Index of the mirror node.
    pub fn mirror(&self, j: usize) -> usize {
        self.n - 1 - j
    }

    pub fn in_interior(&self, j: usize, margin: f64) -> bool {
        self.node(j).abs() <= (1.0 - margin) * self.half_width + 1e-12 * self.half_width
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "(L = {}, N = {}) vs (L = {}, N = {})",
                self.half_width, self.n, other.half_width, other.n
            )));
        }
        Ok(())
    }

    /// Trapezoid rule applied to raw samples.
    pub fn trapezoid<T: Scalar>(&self, values: &[T]) -> T {
        let n = values.len();
        let mut acc = T::zero();
        for v in &values[1..n - 1] {
            acc = acc + *v;
        }
        acc = acc + (values[0] + values[n - 1]) * 0.5;
        acc * self.h()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl Parity {
    /// Parity after applying k derivatives.
    pub fn after_derivatives(self, k: usize) -> Parity {
        match (self, k % 2) {
            (Parity::None, _) => Parity::None,
            (p, 0) => p,
            (Parity::Even, _) => Parity::Odd,
            (Parity::Odd, _) => Parity::Even,
        }
    }

    pub fn times(self, other: Parity) -> Parity {
        match (self, other) {
            (Parity::None, _) | (_, Parity::None) => Parity::None,
            (a, b) if a == b => Parity::Even,
            _ => Parity::Odd,
        }
    }
}

/// Field of values a [`GridFn`] may hold.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn from_real(x: f64) -> Self;
    /// Re(a conj(b)).
    fn re_dot(self, other: Self) -> f64;
    fn modulus(self) -> f64;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn re_dot(self, other: Self) -> f64 {
        self * other
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn re_dot(self, other: Self) -> f64 {
        self.re * other.re + self.im * other.im
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// A function sampled on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFn<T: Scalar = f64> {
    grid: Grid,
    values: Vec<T>,
    parity: Parity,
}

pub type CGridFn = GridFn<Complex64>;

impl<T: Scalar> GridFn<T> {
    pub fn new(grid: Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(GridFn { grid, values, parity: Parity::None })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> T) -> Self {
        let values = (0..grid.len()).map(|j| f(grid.node(j))).collect();
        GridFn { grid, values, parity: Parity::None }
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFn { grid, values: vec![T::zero(); grid.len()], parity: Parity::None }
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = parity;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, j: usize) -> T {
        self.values[j]
    }

    /// Largest violation of the declared parity, 0 for untagged functions.
    pub fn parity_defect(&self) -> f64 {
        let n = self.values.len();
        let sign = match self.parity {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
            Parity::None => return 0.0,
        };
        (0..n / 2)
            .map(|j| (self.values[j] - self.values[n - 1 - j] * sign).modulus())
            .fold(0.0, f64::max)
    }

    pub fn check_parity(&self, tol: f64) -> Result<()> {
        let d = self.parity_defect();
        if d > tol {
            return Err(Error::Domain(format!("parity {:?} violated by {d:e}", self.parity)));
        }
        Ok(())
    }

    /// f(-y).
    pub fn reflect(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        GridFn { grid: self.grid, values, parity: self.parity }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> GridFn<U> {
        GridFn { grid: self.grid, values: self.values.iter().map(|v| f(*v)).collect(), parity: Parity::None }
    }

    pub fn map_with_y(&self, f: impl Fn(f64, T) -> T) -> Self {
        let values = self.values.iter().enumerate().map(|(j, v)| f(self.grid.node(j), *v)).collect();
        GridFn { grid: self.grid, values, parity: Parity::None }
    }

    pub fn zip_with<U: Scalar, V: Scalar>(&self, other: &GridFn<U>, f: impl Fn(T, U) -> V) -> Result<GridFn<V>> {
        self.grid.check_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(GridFn { grid: self.grid, values, parity: Parity::None })
    }

    pub fn scale(&self, c: f64) -> Self {
        GridFn { grid: self.grid, values: self.values.iter().map(|v| *v * c).collect(), parity: self.parity }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.zip_with(other, |a, b| a + b)?;
        out.parity = if self.parity == other.parity { self.parity } else { Parity::None };
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.zip_with(other, |a, b| a - b)?;
        out.parity = if self.parity == other.parity { self.parity } else { Parity::None };
        Ok(out)
    }

    /// a·self + b·other.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        let mut out = self.zip_with(other, |x, y| x * a + y * b)?;
        out.parity = if self.parity == other.parity { self.parity } else { Parity::None };
        Ok(out)
    }

    /// Pointwise product with a real function.
    pub fn mul_real(&self, w: &GridFn<f64>) -> Result<Self> {
        let mut out = self.zip_with(w, |a, b| a * b)?;
        out.parity = self.parity.times(w.parity);
        Ok(out)
    }

    pub fn integrate(&self) -> T {
        self.grid.trapezoid(&self.values)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }

    /// Sup norm over |y| <= r.
    pub fn sup_norm_within(&self, r: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(j, _)| self.grid.node(*j).abs() <= r)
            .map(|(_, v)| v.modulus())
            .fold(0.0, f64::max)
    }

    /// Sup norm excluding the outer [`INTERIOR_MARGIN`] of the box.
    pub fn interior_sup_norm(&self) -> f64 {
        self.sup_norm_within((1.0 - INTERIOR_MARGIN) * self.grid.half_width())
    }

    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v.re_dot(*v)).collect();
        self.grid.trapezoid(&sq).max(0.0).sqrt()
    }

    /// L² norm over |y| <= (1 - INTERIOR_MARGIN) L, by trapezoid on the retained nodes.
    pub fn interior_l2_norm(&self) -> f64 {
        let r = (1.0 - INTERIOR_MARGIN) * self.grid.half_width();
        let h = self.grid.h();
        let mut acc = 0.0;
        for (j, v) in self.values.iter().enumerate() {
            if self.grid.node(j).abs() <= r {
                acc += v.re_dot(*v);
            }
        }
        (acc * h).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

impl GridFn<f64> {
    pub fn to_complex(&self) -> CGridFn {
        GridFn {
            grid: self.grid,
            values: self.values.iter().map(|v| Complex64::new(*v, 0.0)).collect(),
            parity: self.parity,
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.mul_real(other)
    }
}

impl CGridFn {
    pub fn re(&self) -> GridFn<f64> {
        GridFn { grid: self.grid, values: self.values.iter().map(|v| v.re).collect(), parity: self.parity }
    }

    pub fn im(&self) -> GridFn<f64> {
        GridFn { grid: self.grid, values: self.values.iter().map(|v| v.im).collect(), parity: self.parity }
    }

    pub fn from_parts(re: &GridFn<f64>, im: &GridFn<f64>) -> Result<Self> {
        let mut out = re.zip_with(im, Complex64::new)?;
        out.parity = if re.parity == im.parity { re.parity } else { Parity::None };
        Ok(out)
    }
}

/// ⟨f, g⟩ = Re ∫ f ḡ.
pub fn inner<T: Scalar>(f: &GridFn<T>, g: &GridFn<T>) -> Result<f64> {
    f.grid.check_same(&g.grid)?;
    let prod: Vec<f64> = f.values.iter().zip(&g.values).map(|(a, b)| a.re_dot(*b)).collect();
    Ok(f.grid.trapezoid(&prod))
}

/// ∫ f over the grid.
pub fn integrate<T: Scalar>(f: &GridFn<T>) -> T {
    f.integrate()
}

/// Normalized correlation |⟨f, g⟩| / (‖f‖ ‖g‖).
pub fn correlation(f: &GridFn, g: &GridFn) -> Result<f64> {
    let fg = inner(f, g)?;
    let ff = inner(f, f)?;
    let gg = inner(g, g)?;
    if ff == 0.0 || gg == 0.0 {
        return Ok(0.0);
    }
    Ok(fg.abs() / (ff.sqrt() * gg.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sech(x: f64) -> f64 {
        1.0 / x.cosh()
    }

    #[test]
    fn nodes_are_mirror_symmetric() {
        let g = Grid::new(40.0, 4096).unwrap();
        for j in 0..g.len() {
            assert_eq!(g.node(j), -g.node(g.mirror(j)));
        }
        assert!((g.node(0) + 40.0).abs() < 1e-12);
        assert!((g.node(4095) - 40.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(1.0, 15).is_err());
        assert!(Grid::new(1.0, 17).is_err());
        assert!(Grid::new(-1.0, 32).is_err());
    }

    #[test]
    fn trapezoid_on_sech_squared() {
        let g = Grid::new(40.0, 4096).unwrap();
        let f = GridFn::from_fn(g, |y| sech(y).powi(2));
        assert!((f.integrate() - 2.0).abs() < 1e-10);
        let q4 = GridFn::from_fn(g, |y| 4.0 * sech(y).powi(4));
        assert!((q4.integrate() - 16.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn inner_products() {
        let g = Grid::new(20.0, 1024).unwrap();
        let q = GridFn::from_fn(g, |y| 2f64.sqrt() * sech(y));
        assert!((inner(&q, &q).unwrap() - 4.0).abs() < 1e-9);
        let odd = GridFn::from_fn(g, |y| y * sech(y));
        assert!(inner(&q, &odd).unwrap().abs() < 1e-13);
        let c = q.to_complex();
        let ic = c.map(|z| z * Complex64::i());
        assert_eq!(inner(&ic, &c).unwrap(), 0.0);
        let other = GridFn::<f64>::zeros(Grid::new(20.0, 512).unwrap());
        assert!(inner(&q, &other).is_err());
    }

    #[test]
    fn trapezoid_exact_for_linear_data() {
        let g = Grid::new(3.0, 16).unwrap();
        let f = GridFn::from_fn(g, |y| 2.0 * y + 1.5);
        assert!((f.integrate() - 9.0).abs() < 1e-13);
    }

    #[test]
    fn parity_tags() {
        let g = Grid::new(10.0, 64).unwrap();
        let f = GridFn::from_fn(g, |y| y.cos()).with_parity(Parity::Even);
        assert!(f.check_parity(1e-15).is_ok());
        let bad = GridFn::from_fn(g, |y| y.cos() + 0.1 * y).with_parity(Parity::Even);
        assert!(bad.check_parity(1e-3).is_err());
        assert_eq!(Parity::Even.after_derivatives(1), Parity::Odd);
        assert_eq!(Parity::Odd.times(Parity::Odd), Parity::Even);
    }
}
