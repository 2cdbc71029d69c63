//! Smooth, effectively band-limited test functions with exact derivatives:
//! sums of modulated Gaussians drawn from a seeded generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Grid, GridFn};
use crate::jet::Jet;

#[derive(Clone, Copy, Debug)]
struct Bump {
    amp: f64,
    center: f64,
    width: f64,
    freq: f64,
    phase: f64,
}

#[derive(Clone, Debug)]
pub struct BandLimited {
    bumps: Vec<Bump>,
}

impl BandLimited {
    /// e^{-y²/(2s²)}.
    pub fn gaussian(width: f64) -> Self {
        BandLimited { bumps: vec![Bump { amp: 1.0, center: 0.0, width, freq: 0.0, phase: 0.0 }] }
    }

    /// Between one and four bumps centred in [-4, 4] with widths in
    /// [0.6, 2] and carrier frequencies up to 2.5.
    pub fn random(rng: &mut impl Rng) -> Self {
        let count = rng.gen_range(1..=4);
        let bumps = (0..count)
            .map(|_| Bump {
                amp: rng.gen_range(-1.0..1.0),
                center: rng.gen_range(-4.0..4.0),
                width: rng.gen_range(0.6..2.0),
                freq: rng.gen_range(0.0..2.5),
                phase: rng.gen_range(0.0..std::f64::consts::TAU),
            })
            .collect();
        BandLimited { bumps }
    }

    /// A reproducible corpus of `count` functions.
    pub fn corpus(seed: u64, count: usize) -> Vec<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| Self::random(&mut rng)).collect()
    }

    pub fn jet(&self, y: f64) -> Jet {
        let mut out = Jet::zero();
        for b in &self.bumps {
            let mut arg = Jet::variable(y).add_const(-b.center);
            arg = (arg * arg).scale(-0.5 / (b.width * b.width));
            let env = arg.exp();
            let (sp, cp) = b.phase.sin_cos();
            // cos(ky + φ) = cos φ cos ky - sin φ sin ky
            let carrier = Jet::cos_linear(b.freq, y).scale(cp) - Jet::sin_linear(b.freq, y).scale(sp);
            out = out + (env * carrier).scale(b.amp);
        }
        out
    }

    /// Derivatives 0..=k sampled on a grid.
    pub fn sample(&self, grid: Grid, k: usize) -> Vec<GridFn> {
        let jets: Vec<Jet> = grid.nodes().iter().map(|&y| self.jet(y)).collect();
        (0..=k).map(|d| GridFn::new(grid, jets.iter().map(|j| j.nth(d)).collect()).expect("grid length")).collect()
    }
}
