//! Time-series post-processing: oscillation frequency, envelope windows and
//! running integrals in s-time.

use std::f64::consts::PI;

use num::complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Linear resample of (s, f) onto `n` uniform points over [s₀, s_end].
pub fn resample_uniform(s: &[f64], f: &[f64], n: usize) -> Result<(f64, Vec<f64>)> {
    if s.len() != f.len() || s.len() < 4 || n < 4 {
        return Err(Error::Domain("need at least four samples to resample".into()));
    }
    if s.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("sample times must increase strictly".into()));
    }
    let (a, b) = (s[0], s[s.len() - 1]);
    let ds = (b - a) / (n - 1) as f64;
    let mut k = 0;
    let out = (0..n)
        .map(|i| {
            let x = a + i as f64 * ds;
            while k + 2 < s.len() && s[k + 1] < x {
                k += 1;
            }
            let t = ((x - s[k]) / (s[k + 1] - s[k])).clamp(0.0, 1.0);
            f[k] + t * (f[k + 1] - f[k])
        })
        .collect();
    Ok((ds, out))
}

/// Angular frequency of the dominant oscillation of f(s): Hann window,
/// ×8 zero padding, DFT peak refined by a parabola through the log
/// magnitudes of the three bins around it. The mean is removed first.
pub fn peak_frequency(s: &[f64], f: &[f64]) -> Result<f64> {
    let n = s.len().next_power_of_two();
    let (ds, g) = resample_uniform(s, f, n)?;
    let mean = g.iter().sum::<f64>() / n as f64;
    let m = 8 * n;
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (i, v) in g.iter().enumerate() {
        let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos();
        buf[i] = Complex64::new((v - mean) * w, 0.0);
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let mags: Vec<f64> = buf[..m / 2].iter().map(|z| z.norm()).collect();
    let (peak, _) = mags.iter().enumerate().skip(1).take(m / 2 - 2).fold((1, 0.0), |(bi, bv), (i, v)| if *v > bv { (i, *v) } else { (bi, bv) });
    let (l, c, r) = (mags[peak - 1].max(1e-300).ln(), mags[peak].max(1e-300).ln(), mags[peak + 1].max(1e-300).ln());
    let denom = l - 2.0 * c + r;
    let shift = if denom.abs() > 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
    Ok(2.0 * PI * (peak as f64 + shift) / (m as f64 * ds))
}

/// Trapezoid ∫f ds over the (possibly non-uniform) samples.
pub fn trapezoid(s: &[f64], f: &[f64]) -> f64 {
    s.windows(2).zip(f.windows(2)).map(|(ss, ff)| 0.5 * (ss[1] - ss[0]) * (ff[0] + ff[1])).sum()
}

/// Mean of f over samples with s in [a, b].
pub fn window_mean(s: &[f64], f: &[f64], a: f64, b: f64) -> Option<f64> {
    let (sum, count) = s.iter().zip(f).filter(|(x, _)| **x >= a && **x <= b).fold((0.0, 0usize), |(acc, c), (_, v)| (acc + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Total variation Σ|f_{i+1} - f_i| over samples with s in [a, b].
pub fn window_variation(s: &[f64], f: &[f64], a: f64, b: f64) -> f64 {
    let idx: Vec<usize> = (0..s.len()).filter(|&i| s[i] >= a && s[i] <= b).collect();
    idx.windows(2).map(|w| (f[w[1]] - f[w[0]]).abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_of_a_few_periods() {
        // Four periods on a slightly non-uniform clock.
        let lam = 0.9987;
        let s: Vec<f64> = (0..600).map(|i| i as f64 * 0.042 + 1e-3 * (i as f64 * 0.1).sin()).collect();
        let f: Vec<f64> = s.iter().map(|t| 0.02 * (lam * t + 0.3).sin() + 1e-3).collect();
        let w = peak_frequency(&s, &f).unwrap();
        assert!((w / lam - 1.0).abs() < 0.01, "{w}");
    }

    #[test]
    fn trapezoid_is_exact_for_lines() {
        let s = [0.0, 0.5, 2.0, 3.0];
        let f: Vec<f64> = s.iter().map(|x| 2.0 * x + 1.0).collect();
        assert!((trapezoid(&s, &f) - 12.0).abs() < 1e-14);
    }
}
