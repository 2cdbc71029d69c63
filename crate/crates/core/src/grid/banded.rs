use crate::error::{Error, Result};

/// Square banded matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    // Row-major, row i holds columns i-kl ..= i+ku.
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        BandMatrix { n, kl, ku, data: vec![0.0; n * (kl + ku + 1)] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.n || j >= self.n {
            return None;
        }
        let d = j as i64 - i as i64;
        if d < -(self.kl as i64) || d > self.ku as i64 {
            return None;
        }
        Some(i * (self.kl + self.ku + 1) + (d + self.kl as i64) as usize)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Adds `v` to entry (i, j); panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).unwrap_or_else(|| panic!("({i}, {j}) outside band"));
        self.data[s] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).unwrap_or_else(|| panic!("({i}, {j}) outside band"));
        self.data[s] = v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut acc = 0.0;
            for j in lo..=hi {
                acc += self.get(i, j) * x[j];
            }
            *yi = acc;
        }
        y
    }

    /// LU factorization with partial pivoting.
    pub fn factor(&self) -> Result<BandLu> {
        BandLu::new(self)
    }

    /// Sylvester inertia of a symmetric band matrix from an unpivoted LDLᵀ
    /// sweep: (negative, zero, positive) pivot counts. Only the lower band is
    /// read. Pivots below `1e-14·max|a|` count as zero.
    pub fn inertia(&self) -> Result<Inertia> {
        if self.kl != self.ku {
            return Err(Error::Domain("inertia needs a symmetric band layout".into()));
        }
        let (n, k) = (self.n, self.kl);
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = 1e-14 * scale;
        let mut l = vec![0.0; n * k.max(1)];
        let mut d = vec![0.0; n];
        // l[i*k + (i - j - 1)] = L[i][j] for j in i-k..i
        let lij = |l: &[f64], i: usize, j: usize| l[i * k + (i - j - 1)];
        let mut out = Inertia::default();
        for i in 0..n {
            let lo = i.saturating_sub(k);
            for j in lo..i {
                let mut acc = self.get(i, j);
                for m in j.saturating_sub(k).max(lo)..j {
                    acc -= lij(&l, i, m) * lij(&l, j, m) * d[m];
                }
                l[i * k + (i - j - 1)] = if d[j] == 0.0 { 0.0 } else { acc / d[j] };
            }
            let mut di = self.get(i, i);
            for m in lo..i {
                di -= lij(&l, i, m).powi(2) * d[m];
            }
            if !di.is_finite() {
                return Err(Error::Singular(format!("non-finite pivot at row {i}")));
            }
            if di.abs() <= tiny {
                out.zero += 1;
                di = 0.0;
            } else if di < 0.0 {
                out.negative += 1;
            } else {
                out.positive += 1;
            }
            d[i] = di;
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

/// LU factors of a [`BandMatrix`] (row pivoting within the lower band).
#[derive(Clone, Debug)]
pub struct BandLu {
    n: usize,
    kl: usize,
    // U rows: row i holds columns i-kl ..= i+ku+kl (width 2kl+ku+1).
    u: Vec<f64>,
    width: usize,
    mult: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    fn new(a: &BandMatrix) -> Result<Self> {
        let (n, kl, ku) = (a.n, a.kl, a.ku);
        let width = 2 * kl + ku + 1;
        let mut u = vec![0.0; n * width];
        let idx = |i: usize, j: usize| i * width + (j + kl - i);
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n - 1);
            for j in lo..=hi {
                u[idx(i, j)] = a.get(i, j);
            }
        }
        let mut mult = vec![0.0; n * kl.max(1)];
        let mut piv = vec![0; n];
        let scale = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = u[idx(k, k)].abs();
            for i in k + 1..=last {
                let v = u[idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= 1e-300 * scale || !best.is_finite() {
                return Err(Error::Singular(format!("zero pivot at row {k} of {n}")));
            }
            piv[k] = p;
            let jmax = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    u.swap(idx(k, j), idx(p, j));
                }
            }
            let pivot = u[idx(k, k)];
            for i in k + 1..=last {
                let l = u[idx(i, k)] / pivot;
                mult[k * kl + (i - k - 1)] = l;
                if l != 0.0 {
                    for j in k + 1..=jmax {
                        u[idx(i, j)] -= l * u[idx(k, j)];
                    }
                }
            }
        }
        Ok(BandLu { n, kl, u, width, mult, piv })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, kl) = (self.n, self.kl);
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let last = (k + kl).min(n - 1);
            for i in k + 1..=last {
                x[i] -= self.mult[k * kl + (i - k - 1)] * x[k];
            }
        }
        let ku_eff = self.width - 1 - kl;
        for k in (0..n).rev() {
            let jmax = (k + ku_eff).min(n - 1);
            let mut acc = x[k];
            for j in k + 1..=jmax {
                acc -= self.u[k * self.width + (j + kl - k)] * x[j];
            }
            x[k] = acc / self.u[k * self.width + kl];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal_system() {
        let n = 50;
        let mut a = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            a.set(i, i, 2.5);
            if i > 0 {
                a.set(i, i - 1, -1.0);
            }
            if i + 1 < n {
                a.set(i, i + 1, -1.0);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.mul_vec(&x);
        let sol = a.factor().unwrap().solve(&b);
        for i in 0..n {
            assert!((sol[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn pivots_on_indefinite_band() {
        let n = 40;
        let mut a = BandMatrix::zeros(n, 2, 3);
        for i in 0..n {
            for j in i.saturating_sub(2)..=(i + 3).min(n - 1) {
                let v = ((i * 7 + j * 13) % 11) as f64 - 5.0;
                a.set(i, j, v);
            }
            // Zero diagonal forces row exchanges.
            a.set(i, i, if i % 3 == 0 { 0.0 } else { 1.0 });
        }
        let x: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 / 7.0).collect();
        let b = a.mul_vec(&x);
        let sol = a.factor().unwrap().solve(&b);
        let r = a.mul_vec(&sol);
        for i in 0..n {
            assert!((r[i] - b[i]).abs() < 1e-9 * (1.0 + b[i].abs()));
        }
    }

    #[test]
    fn inertia_counts_shifted_laplacian() {
        // Dirichlet -∂² on n interior points has eigenvalues 2 - 2cos(jπ/(n+1)).
        let n = 30;
        let shift = 1.3;
        let mut a = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            a.set(i, i, 2.0 - shift);
            if i > 0 {
                a.set(i, i - 1, -1.0);
                a.set(i - 1, i, -1.0);
            }
        }
        let below = (1..=n).filter(|j| 2.0 - 2.0 * (*j as f64 * std::f64::consts::PI / (n + 1) as f64).cos() < shift).count();
        let inertia = a.inertia().unwrap();
        assert_eq!(inertia.negative, below);
        assert_eq!(inertia.negative + inertia.positive, n);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = BandMatrix::zeros(8, 1, 1);
        assert!(a.factor().is_err());
    }
}
