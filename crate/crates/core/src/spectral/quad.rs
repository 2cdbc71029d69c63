//! Product integration on a uniform node set: ∫ k(z) f(z) dz where f is known
//! at the nodes (local degree-5 Lagrange interpolation) and k is evaluated
//! exactly at Gauss–Legendre points, with panels split at kernel kinks.

use crate::error::{Error, Result};

const GL_X: [f64; 6] = [
    -0.932_469_514_203_152_1,
    -0.661_209_386_466_264_5,
    -0.238_619_186_083_196_9,
    0.238_619_186_083_196_9,
    0.661_209_386_466_264_5,
    0.932_469_514_203_152_1,
];
const GL_W: [f64; 6] = [
    0.171_324_492_379_170_4,
    0.360_761_573_048_138_6,
    0.467_913_934_572_691_0,
    0.467_913_934_572_691_0,
    0.360_761_573_048_138_6,
    0.171_324_492_379_170_4,
];
const P: usize = 6;

#[derive(Clone, Debug)]
pub struct KernelQuad {
    nodes: Vec<f64>,
    h: f64,
    half_width: f64,
}

impl KernelQuad {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if n < 2 * P || !(half_width > 0.0) {
            return Err(Error::Domain(format!("kernel grid needs n >= {} and L > 0", 2 * P)));
        }
        let h = 2.0 * half_width / (n - 1) as f64;
        let nodes = (0..n).map(|j| -half_width + j as f64 * h).collect();
        Ok(KernelQuad { nodes, h, half_width })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&z| f(z)).collect()
    }

    /// Calls `visit(x, w, start, lagrange)` for every quadrature point of
    /// ∫_a^b, splitting at `split` when it falls strictly inside a panel.
    pub fn for_each_point(&self, a: f64, b: f64, split: Option<f64>, mut visit: impl FnMut(f64, f64, usize, &[f64; P])) {
        let n = self.nodes.len();
        let lo = a.max(-self.half_width);
        let hi = b.min(self.half_width);
        if !(hi > lo) {
            return;
        }
        let m0 = (((lo + self.half_width) / self.h).floor() as usize).min(n - 2);
        let m1 = (((hi + self.half_width) / self.h).ceil() as usize).clamp(1, n - 1);
        let tiny = 1e-12 * self.h;
        for m in m0..m1 {
            let (z0, z1) = (self.nodes[m], self.nodes[m + 1]);
            let u = z0.max(lo);
            let v = z1.min(hi);
            if v - u <= tiny {
                continue;
            }
            let start = (m as i64 - (P as i64) / 2 + 1).clamp(0, (n - P) as i64) as usize;
            let mut pieces = [(u, v), (0.0, 0.0)];
            let mut count = 1;
            if let Some(s) = split {
                if s - u > tiny && v - s > tiny {
                    pieces = [(u, s), (s, v)];
                    count = 2;
                }
            }
            for &(pa, pb) in &pieces[..count] {
                let half = 0.5 * (pb - pa);
                for g in 0..P {
                    let x = pa + half * (GL_X[g] + 1.0);
                    let lag = self.lagrange(x, start);
                    visit(x, half * GL_W[g], start, &lag);
                }
            }
        }
    }

    fn lagrange(&self, x: f64, start: usize) -> [f64; P] {
        let s = (x - self.nodes[start]) / self.h;
        let mut out = [1.0; P];
        for (k, o) in out.iter_mut().enumerate() {
            for l in 0..P {
                if l != k {
                    *o *= (s - l as f64) / (k as f64 - l as f64);
                }
            }
        }
        out
    }

    /// ∫_a^b k(z) f(z) dz.
    pub fn integrate(&self, a: f64, b: f64, split: Option<f64>, k: impl Fn(f64) -> f64, f: &[f64]) -> f64 {
        let mut acc = 0.0;
        self.for_each_point(a, b, split, |x, w, st, lag| {
            let fx: f64 = lag.iter().zip(&f[st..st + P]).map(|(l, v)| l * v).sum();
            acc += w * k(x) * fx;
        });
        acc
    }

    /// Row of weights r with Σ r_j f_j = ∫_a^b k(z) f(z) dz.
    pub fn weights(&self, a: f64, b: f64, split: Option<f64>, k: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut row = vec![0.0; self.nodes.len()];
        self.for_each_point(a, b, split, |x, w, st, lag| {
            let kw = w * k(x);
            for (j, l) in lag.iter().enumerate() {
                row[st + j] += kw * l;
            }
        });
        row
    }

    /// Plain quadrature weights over the whole box.
    pub fn total_weights(&self) -> Vec<f64> {
        self.weights(-self.half_width, self.half_width, None, |_| 1.0)
    }
}

/// ∫ e^{-c|y-z|} f(z) dz and its y-derivative for node data f. Left and right
/// sweeps are accumulated node to node, so an evaluation touches one panel;
/// beyond the box the sweeps decay as pure exponentials.
#[derive(Clone, Debug)]
pub struct ExpConv {
    pub c: f64,
    pub f: Vec<f64>,
    /// ∫_{-L}^{y_m} e^{-c(y_m - z)} f and ∫_{y_m}^{L} e^{-c(z - y_m)} f.
    left: Vec<f64>,
    right: Vec<f64>,
}

impl ExpConv {
    pub fn new(quad: &KernelQuad, c: f64, f: Vec<f64>) -> Self {
        let n = quad.len();
        let h = quad.h;
        let decay = (-c * h).exp();
        let nodes = &quad.nodes;
        let mut left = vec![0.0; n];
        let mut right = vec![0.0; n];
        for m in 0..n - 1 {
            let b = nodes[m + 1];
            left[m + 1] = decay * left[m] + quad.integrate(nodes[m], b, None, |z| (-c * (b - z)).exp(), &f);
        }
        for m in (0..n - 1).rev() {
            let a = nodes[m];
            right[m] = decay * right[m + 1] + quad.integrate(a, nodes[m + 1], None, |z| (-c * (z - a)).exp(), &f);
        }
        ExpConv { c, f, left, right }
    }

    /// (value, derivative) at y.
    pub fn eval(&self, quad: &KernelQuad, y: f64) -> (f64, f64) {
        let c = self.c;
        let l = quad.half_width();
        let n = quad.len();
        if y >= l {
            let v = (-c * (y - l)).exp() * self.left[n - 1];
            return (v, -c * v);
        }
        if y <= -l {
            let v = (c * (y + l)).exp() * self.right[0];
            return (v, c * v);
        }
        let m = (((y + l) / quad.h).floor() as usize).min(n - 2);
        let (a, b) = (quad.nodes[m], quad.nodes[m + 1]);
        let lv = (-c * (y - a)).exp() * self.left[m] + quad.integrate(a, y, None, |z| (-c * (y - z)).exp(), &self.f);
        let rv = (-c * (b - y)).exp() * self.right[m + 1] + quad.integrate(y, b, None, |z| (-c * (z - y)).exp(), &self.f);
        (lv + rv, c * (rv - lv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let q = KernelQuad::new(3.0, 31).unwrap();
        let f = q.sample(|z| z.powi(5) - 2.0 * z * z + 1.0);
        // ∫_{-1.3}^{2.2} of the quintic.
        let prim = |z: f64| z.powi(6) / 6.0 - 2.0 * z.powi(3) / 3.0 + z;
        let got = q.integrate(-1.3, 2.2, Some(0.41), |_| 1.0, &f);
        assert!((got - (prim(2.2) - prim(-1.3))).abs() < 1e-12);
        let w = q.weights(-1.3, 2.2, None, |_| 1.0);
        let via_w: f64 = w.iter().zip(&f).map(|(a, b)| a * b).sum();
        assert!((via_w - got).abs() < 1e-12);
    }

    #[test]
    fn exp_convolution_of_gaussian() {
        // ∫ e^{-|y-z|} e^{-z²} dz = (√π/2) e^{1/4} [e^{-y} erfc(1/2 - y) + e^{y} erfc(1/2 + y)]
        let q = KernelQuad::new(10.0, 401).unwrap();
        let conv = ExpConv::new(&q, 1.0, q.sample(|z| (-z * z).exp()));
        for y in [0.0f64, 0.37, -1.2, 4.0, 15.0, -22.0] {
            let exact = 0.5 * std::f64::consts::PI.sqrt() * 0.25f64.exp() * ((-y).exp() * erfc(0.5 - y) + y.exp() * erfc(0.5 + y));
            let (v, _) = conv.eval(&q, y);
            assert!((v - exact).abs() < 1e-8 * exact.abs() + 1e-14, "y={y}: {v} vs {exact}");
        }
        // derivative by central differences
        let (_, d) = conv.eval(&q, 0.8);
        let e = 1e-5;
        let fd = (conv.eval(&q, 0.8 + e).0 - conv.eval(&q, 0.8 - e).0) / (2.0 * e);
        assert!((d - fd).abs() < 1e-8);
    }

    fn erfc(x: f64) -> f64 {
        // Continued-fraction free reference: composite Simpson on the defining integral.
        if x >= 0.0 {
            let n = 20000;
            let b = x + 12.0;
            let h = (b - x) / n as f64;
            let f = |t: f64| (-t * t).exp();
            let mut s = f(x) + f(b);
            for i in 1..n {
                s += f(x + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0 * 2.0 / std::f64::consts::PI.sqrt()
        } else {
            2.0 - erfc(-x)
        }
    }
}
