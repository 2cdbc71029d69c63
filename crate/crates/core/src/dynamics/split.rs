//! Strang split-step Fourier integrator for
//! iψ_t + ψ_xx + |ψ|²ψ + |ψ|⁴ψ = 0 on a periodic box [-L, L).

use std::f64::consts::PI;
use std::sync::Arc;

use num::complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic lab grid x_j = -L + j·dx, j = 0..N, with dx = 2L/N.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysGrid {
    pub half_width: f64,
    pub points: usize,
}

impl PhysGrid {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Domain(format!("box half-width must be positive, got {half_width}")));
        }
        if points < 16 || !points.is_power_of_two() {
            return Err(Error::Domain(format!("N_x must be a power of two >= 16, got {points}")));
        }
        Ok(PhysGrid { half_width, points })
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.x(j)).collect()
    }

    /// Index of -x_j on the periodic grid.
    pub fn mirror(&self, j: usize) -> usize {
        (self.points - j) % self.points
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.points as i64;
        let dk = PI / self.half_width;
        (0..n).map(|m| if m < n / 2 { m as f64 * dk } else { (m - n) as f64 * dk }).collect()
    }

    pub fn k_max(&self) -> f64 {
        PI / self.dx()
    }

    pub fn sample(&self, f: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        (0..self.points).map(|j| f(self.x(j))).collect()
    }
}

/// Smooth absorbing layer over the outer `width_fraction` of the box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpongeConfig {
    pub enabled: bool,
    pub width_fraction: f64,
    /// Peak damping rate (per unit time) at the box edge.
    pub strength: f64,
}

impl Default for SpongeConfig {
    fn default() -> Self {
        SpongeConfig { enabled: false, width_fraction: 0.15, strength: 1.0 }
    }
}

impl SpongeConfig {
    /// Damping rate σ(x): sin² ramp from 0 at the layer start to `strength` at |x| = L.
    pub fn rate(&self, grid: &PhysGrid, x: f64) -> f64 {
        if !self.enabled {
            return 0.0;
        }
        let start = (1.0 - self.width_fraction) * grid.half_width;
        let d = x.abs() - start;
        if d <= 0.0 {
            return 0.0;
        }
        let r = (d / (grid.half_width - start)).min(1.0);
        self.strength * (0.5 * PI * r).sin().powi(2)
    }

    /// First x where the layer is active.
    pub fn inner_edge(&self, grid: &PhysGrid) -> f64 {
        if self.enabled {
            (1.0 - self.width_fraction) * grid.half_width
        } else {
            grid.half_width
        }
    }
}

/// Mass, momentum and energy of a lab-frame state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Conserved {
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
}

pub struct SplitStep {
    grid: PhysGrid,
    dt: f64,
    nonlinear: bool,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
    linear: Vec<Complex64>,
    sponge: Option<Vec<f64>>,
    scratch: Vec<Complex64>,
}

impl SplitStep {
    pub fn new(grid: PhysGrid, dt: f64, nonlinear: bool, sponge: SpongeConfig) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("dt must be positive, got {dt}")));
        }
        let mut planner = FftPlanner::new();
        let n = grid.points;
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let k = grid.wavenumbers();
        let inv_n = 1.0 / n as f64;
        let linear = k.iter().map(|k| Complex64::from_polar(inv_n, -k * k * dt)).collect();
        let sponge = sponge.enabled.then(|| grid.nodes().iter().map(|&x| (-sponge.rate(&grid, x) * dt).exp()).collect());
        let scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len().max(ifft.get_inplace_scratch_len())];
        Ok(SplitStep { grid, dt, nonlinear, fft, ifft, k, linear, sponge, scratch })
    }

    pub fn grid(&self) -> &PhysGrid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn half_nonlinear(&self, psi: &mut [Complex64]) {
        if !self.nonlinear {
            return;
        }
        let h = 0.5 * self.dt;
        for z in psi.iter_mut() {
            let a = z.norm_sqr();
            *z *= Complex64::from_polar(1.0, h * (a + a * a));
        }
    }

    /// One Strang step: half nonlinear rotation, exact linear flow, half
    /// rotation, then the sponge multiplier.
    pub fn step(&mut self, psi: &mut [Complex64]) {
        self.half_nonlinear(psi);
        self.fft.process_with_scratch(psi, &mut self.scratch);
        for (z, m) in psi.iter_mut().zip(&self.linear) {
            *z *= m;
        }
        self.ifft.process_with_scratch(psi, &mut self.scratch);
        self.half_nonlinear(psi);
        if let Some(s) = &self.sponge {
            for (z, m) in psi.iter_mut().zip(s) {
                *z *= m;
            }
        }
    }

    /// Advance `steps` steps; checks for non-finite values at the end.
    pub fn advance(&mut self, psi: &mut [Complex64], steps: usize, t: f64) -> Result<()> {
        for _ in 0..steps {
            self.step(psi);
        }
        if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Blowup { t: t + steps as f64 * self.dt });
        }
        Ok(())
    }

    /// Spectral derivative ψ_x.
    pub fn derivative(&mut self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut d = psi.to_vec();
        self.fft.process_with_scratch(&mut d, &mut self.scratch);
        let inv_n = 1.0 / self.grid.points as f64;
        let nyq = self.grid.points / 2;
        for (m, (z, k)) in d.iter_mut().zip(&self.k).enumerate() {
            *z *= if m == nyq { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, k * inv_n) };
        }
        self.ifft.process_with_scratch(&mut d, &mut self.scratch);
        d
    }

    pub fn conserved(&mut self, psi: &[Complex64]) -> Conserved {
        let dx = self.grid.dx();
        let dpsi = self.derivative(psi);
        let mut c = Conserved::default();
        for (z, dz) in psi.iter().zip(&dpsi) {
            let a = z.norm_sqr();
            c.mass += a;
            c.momentum += (z * dz.conj()).im;
            c.energy += 0.5 * dz.norm_sqr() - 0.25 * a * a - a * a * a / 6.0;
        }
        c.mass *= dx;
        c.momentum *= dx;
        c.energy *= dx;
        c
    }

    /// H¹ inner product Re∫(f ḡ + f' ḡ').
    pub fn h1_inner(&mut self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        let df = self.derivative(f);
        let dg = self.derivative(g);
        let dx = self.grid.dx();
        f.iter().zip(g).zip(df.iter().zip(&dg)).map(|((a, b), (da, db))| a * b.conj() + da * db.conj()).sum::<Complex64>() * dx
    }
}

/// max_j |ψ(x_j) - ψ(-x_j)|.
pub fn parity_defect(grid: &PhysGrid, psi: &[Complex64]) -> f64 {
    (0..grid.points).map(|j| (psi[j] - psi[grid.mirror(j)]).norm()).fold(0.0, f64::max)
}

/// Trigonometric interpolation onto a grid `factor` times finer (same box).
pub fn upsample(psi: &[Complex64], factor: usize) -> Vec<Complex64> {
    let n = psi.len();
    let m = n * factor;
    let mut planner = FftPlanner::new();
    let mut spec = psi.to_vec();
    planner.plan_fft_forward(n).process(&mut spec);
    let mut fine = vec![Complex64::new(0.0, 0.0); m];
    let half = n / 2;
    for (i, z) in spec.iter().enumerate() {
        let scaled = z / n as f64;
        if i < half {
            fine[i] = scaled;
        } else if i > half {
            fine[m - (n - i)] = scaled;
        } else {
            // Split the Nyquist mode symmetrically.
            fine[half] = 0.5 * scaled;
            fine[m - half] = 0.5 * scaled;
        }
    }
    planner.plan_fft_inverse(m).process(&mut fine);
    fine
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::Soliton;

    #[test]
    fn free_gaussian_variance_law() {
        // ψ₀ = e^{-x²/(2s²)}: ⟨x²⟩(t) = s²/2 + 2t²/s² for iψ_t + ψ_xx = 0.
        let g = PhysGrid::new(60.0, 2048).unwrap();
        let s = 1.5f64;
        let mut psi = g.sample(|x| Complex64::new((-x * x / (2.0 * s * s)).exp(), 0.0));
        let mut st = SplitStep::new(g, 1e-2, false, SpongeConfig::default()).unwrap();
        st.advance(&mut psi, 300, 0.0).unwrap();
        let t = 3.0;
        let (m2, m0) = g.nodes().iter().zip(&psi).fold((0.0, 0.0), |(a, b), (x, z)| (a + x * x * z.norm_sqr(), b + z.norm_sqr()));
        let want = s * s / 2.0 + 2.0 * t * t / (s * s);
        assert!((m2 / m0 - want).abs() < 1e-8 * want, "{} vs {want}", m2 / m0);
    }

    #[test]
    fn standing_wave_returns_after_one_period() {
        let w = 0.25;
        let sol = Soliton::new(w).unwrap();
        let g = PhysGrid::new(64.0, 1024).unwrap();
        let phi = g.sample(|x| Complex64::new(sol.phi(x), 0.0));
        let mut psi = phi.clone();
        let dt = 1e-3;
        let steps = (2.0 * PI / w / dt).round() as usize;
        let mut st = SplitStep::new(g, dt, true, SpongeConfig::default()).unwrap();
        st.advance(&mut psi, steps, 0.0).unwrap();
        // inf over γ of ‖e^{-iγ}ψ - φ‖_{H¹}.
        let pp = st.h1_inner(&psi, &psi).re;
        let ff = st.h1_inner(&phi, &phi).re;
        let pf = st.h1_inner(&psi, &phi).norm();
        let dist = (pp + ff - 2.0 * pf).max(0.0).sqrt() / ff.sqrt();
        assert!(dist < 1e-6, "{dist:e}");
    }

    #[test]
    fn upsampling_reproduces_band_limited_data() {
        let g = PhysGrid::new(20.0, 256).unwrap();
        let f = |x: f64| Complex64::new((-x * x / 4.0).exp(), 0.3 * (-x * x / 2.0).exp() * x);
        let fine = upsample(&g.sample(f), 4);
        let fg = PhysGrid::new(20.0, 1024).unwrap();
        let err = fine.iter().enumerate().map(|(j, z)| (z - f(fg.x(j))).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err:e}");
    }
}
