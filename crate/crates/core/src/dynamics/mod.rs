//! Time-domain simulation of even solutions near a solitary wave, with
//! per-frame modulation fit and internal-mode decomposition.

pub mod analysis;
pub mod modulation;
pub mod split;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::profiles::Soliton;
use crate::spectral::{build_internal_mode, InternalMode};

pub use analysis::{peak_frequency, trapezoid, window_mean, window_variation};
pub use modulation::{decompose, fit_modulation, upsilon, FitResult, FrameDiagnostics, ModulationFrame, PeriodicSpline, FIT_TOL};
pub use split::{parity_defect, upsample, Conserved, PhysGrid, SplitStep, SpongeConfig};

/// Largest allowed dt·k_max²: the fastest Fourier mode turns by less than π per step.
pub const STABILITY_BOUND: f64 = std::f64::consts::PI;

/// Modes are built on the lattice ω = ω₀ e^{k·step}; the nearest lattice
/// point is within a relative 1e-3 of any fitted ω.
pub const MODE_LATTICE_STEP: f64 = 2e-3;

/// Lattice modes kept in memory at once.
const MODE_CACHE_CAPACITY: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    None,
    /// ε(V₁ + iV₂) added to Q in rescaled variables.
    InternalMode { epsilon: f64 },
    /// ε e^{-y²/(2w²)} added to Q in rescaled variables.
    Gaussian { epsilon: f64, width: f64 },
    /// Start from φ_{ω₀+δ}; the fit still starts at ω₀.
    OmegaShift { delta: f64 },
    /// Seeded sum of even complex Gaussians with sup-norm ε (rescaled variables).
    RandomEven { epsilon: f64, bumps: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InitialCondition {
    pub omega0: f64,
    pub gamma0: f64,
    pub perturbation: Perturbation,
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition { omega0: 0.05, gamma0: 0.0, perturbation: Perturbation::InternalMode { epsilon: 0.02 } }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    /// Decompose each frame against the internal mode.
    pub enabled: bool,
    /// Spacing of the y-grid.
    pub spacing: f64,
    /// Half-width of the y-grid; None fits it inside the sponge-free region.
    pub half_width: Option<f64>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { enabled: true, spacing: 0.05, half_width: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    pub jsonl: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub snapshot_dir: Option<PathBuf>,
    /// Write a snapshot every this many frames (0 disables).
    pub snapshot_every: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub half_width: f64,
    pub points: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Lab time between frames.
    pub output_every: f64,
    pub initial: InitialCondition,
    pub sponge: SpongeConfig,
    pub analysis: AnalysisConfig,
    /// Disable to integrate the free Schrödinger equation.
    pub nonlinear: bool,
    pub seed: u64,
    pub output: OutputConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            half_width: 1200.0,
            points: 4096,
            dt: 1e-3,
            t_end: 500.0,
            output_every: 1.0,
            initial: InitialCondition::default(),
            sponge: SpongeConfig::default(),
            analysis: AnalysisConfig::default(),
            nonlinear: true,
            seed: 0,
            output: OutputConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: SimConfig = serde_json::from_str(&text).map_err(|e| Error::Config(format!("bad config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<PhysGrid> {
        PhysGrid::new(self.half_width, self.points)
    }

    pub fn steps_per_frame(&self) -> usize {
        ((self.output_every / self.dt).round() as usize).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.grid().map_err(|e| Error::Config(e.to_string()))?;
        let w = self.initial.omega0;
        if !(w > 0.0 && w <= 0.1) {
            return Err(Error::Config(format!("omega0 must lie in (0, 0.1], got {w}")));
        }
        if !(self.dt > 0.0 && self.t_end > 0.0 && self.output_every >= self.dt) {
            return Err(Error::Config("need dt > 0, t_end > 0 and output_every >= dt".into()));
        }
        let stab = self.dt * g.k_max().powi(2);
        if stab > STABILITY_BOUND {
            return Err(Error::Config(format!("dt·k_max² = {stab:.3} exceeds the splitting bound {STABILITY_BOUND:.3}")));
        }
        if !(0.0..1.0).contains(&self.sponge.width_fraction) {
            return Err(Error::Config("sponge width_fraction must lie in [0, 1)".into()));
        }
        if let Perturbation::OmegaShift { delta } = self.initial.perturbation {
            if !(w + delta > 0.0) {
                return Err(Error::Config("omega shift makes the frequency non-positive".into()));
            }
        }
        Ok(())
    }

    /// y-grid for the decomposition.
    pub fn analysis_grid(&self, alpha: f64) -> Result<Grid> {
        let g = self.grid()?;
        let usable = 0.95 * self.initial.omega0.sqrt() * self.sponge.inner_edge(&g);
        let l = self.analysis.half_width.unwrap_or_else(|| crate::spectral::mode::default_half_width(alpha).min(usable));
        Grid::with_spacing(l, self.analysis.spacing)
    }
}

/// ψ(0, x) = e^{iγ₀}√ω₀ (Q + perturbation)(√ω₀ x), or φ_{ω₀+δ} for a frequency shift.
pub fn initial_state(config: &SimConfig, mode: Option<&InternalMode>) -> Result<Vec<Complex64>> {
    let g = config.grid()?;
    let w = config.initial.omega0;
    let sq = w.sqrt();
    let sol = Soliton::new(w)?;
    let rot = Complex64::from_polar(sq, config.initial.gamma0);
    let psi = match &config.initial.perturbation {
        Perturbation::None => g.sample(|x| rot * sol.q(sq * x)),
        Perturbation::InternalMode { epsilon } => {
            let m = mode.ok_or_else(|| Error::Config("internal-mode kick needs the mode".into()))?;
            g.sample(|x| {
                let v = m.eval.v_jets(sq * x);
                rot * (Complex64::new(sol.q(sq * x) + epsilon * v[0].nth(0), epsilon * v[1].nth(0)))
            })
        }
        Perturbation::Gaussian { epsilon, width } => g.sample(|x| {
            let y = sq * x;
            rot * (sol.q(y) + epsilon * (-y * y / (2.0 * width * width)).exp())
        }),
        Perturbation::OmegaShift { delta } => {
            let s2 = Soliton::new(w + delta)?;
            g.sample(|x| Complex64::from_polar(s2.phi(x), config.initial.gamma0))
        }
        Perturbation::RandomEven { epsilon, bumps } => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let parts: Vec<(Complex64, f64, f64)> = (0..(*bumps).max(1))
                .map(|_| {
                    let amp = Complex64::from_polar(rng.gen_range(0.2..1.0), rng.gen_range(0.0..std::f64::consts::TAU));
                    (amp, rng.gen_range(0.0..3.0), rng.gen_range(0.5..3.0))
                })
                .collect();
            let bump = |y: f64| -> Complex64 {
                parts
                    .iter()
                    .map(|(a, c, s)| a * ((-(y - c).powi(2) / (2.0 * s * s)).exp() + (-(y + c).powi(2) / (2.0 * s * s)).exp()))
                    .sum()
            };
            let ys = Grid::with_spacing(12.0, 0.01)?;
            let sup = ys.nodes().iter().map(|y| bump(*y).norm()).fold(0.0, f64::max);
            g.sample(|x| {
                let y = sq * x;
                rot * (sol.q(y) + bump(y) * (epsilon / sup))
            })
        }
    };
    Ok(psi)
}

/// One output frame, scalars only (JSONL and CSV rows).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub index: usize,
    pub t: f64,
    pub s: f64,
    pub gamma: f64,
    pub omega: f64,
    pub fit_ok: bool,
    pub fit_iterations: usize,
    pub analyzed: bool,
    pub b1: f64,
    pub b2: f64,
    pub b_abs: f64,
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    pub rho4_v: f64,
    pub rho_v: f64,
    pub nu_u: f64,
    pub m_functional: f64,
    pub orbital_distance: f64,
    pub u_orth_lambda_q: f64,
    pub u_orth_q: f64,
    pub v_orth_lambda_q: f64,
    pub v_orth_q: f64,
    pub v_orth_v1: f64,
    pub v_orth_v2: f64,
    pub reconstruction: f64,
    pub parity_defect: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub frames: usize,
    pub failed_frames: usize,
    pub mode_rebuilds: usize,
    pub t_end: f64,
    pub s_end: f64,
    pub omega0: f64,
    pub lambda0: Option<f64>,
    /// Angular frequency of b₁(s).
    pub b_frequency: Option<f64>,
    pub b_frequency_rel_error: Option<f64>,
    /// Mean |b| over the first and last quarter of the s-range.
    pub b_envelope_first: Option<f64>,
    pub b_envelope_last: Option<f64>,
    pub omega_max_drift: f64,
    pub omega_variation_first_quarter: f64,
    pub omega_variation_last_quarter: f64,
    pub int_b4: f64,
    pub int_rho4_v2: f64,
    pub max_orbital_distance: f64,
    pub mass_drift_rel: f64,
    pub energy_drift_rel: f64,
    pub max_parity_defect: f64,
    pub max_orthogonality: f64,
    pub max_reconstruction: f64,
    /// Largest (|γ' - 1| + |ω'/ω|) / ‖νu‖² over analyzed frames (derivatives in s).
    pub modulation_ratio: Option<f64>,
}

impl RunSummary {
    pub fn envelope_ratio(&self) -> Option<f64> {
        Some(self.b_envelope_last? / self.b_envelope_first?)
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub frames: Vec<FrameRecord>,
    pub summary: RunSummary,
    pub final_psi: Vec<Complex64>,
    pub last_frame: Option<ModulationFrame>,
}

struct ModeCache {
    grid: Grid,
    omega0: f64,
    key: i64,
    mode: InternalMode,
    lattice: HashMap<i64, InternalMode>,
    rebuilds: usize,
}

impl ModeCache {
    fn new(omega: f64, config: &SimConfig) -> Result<Self> {
        let base = build_internal_mode(omega)?;
        let grid = config.analysis_grid(base.alpha)?;
        let mode = base.resample(grid)?;
        Ok(ModeCache { grid, omega0: omega, key: 0, mode, lattice: HashMap::new(), rebuilds: 0 })
    }

    /// Mode at the lattice point nearest to `omega`. An oscillating ω revisits
    /// a few lattice points, so each is built once.
    fn at(&mut self, omega: f64) -> Result<&InternalMode> {
        let key = ((omega / self.omega0).ln() / MODE_LATTICE_STEP).round() as i64;
        if key != self.key {
            let mode = match self.lattice.remove(&key) {
                Some(m) => m,
                None => {
                    self.rebuilds += 1;
                    let w = self.omega0 * (key as f64 * MODE_LATTICE_STEP).exp();
                    build_internal_mode(w)?.resample(self.grid)?
                }
            };
            let old = std::mem::replace(&mut self.mode, mode);
            self.lattice.insert(self.key, old);
            self.key = key;
            if self.lattice.len() > MODE_CACHE_CAPACITY {
                let far = *self.lattice.keys().max_by_key(|k| (*k - key).abs()).expect("non-empty");
                self.lattice.remove(&far);
            }
        }
        Ok(&self.mode)
    }
}

fn write_snapshot(dir: &Path, index: usize, grid: &PhysGrid, t: f64, psi: &[Complex64]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(File::create(dir.join(format!("snapshot_{index:06}.bin")))?);
    w.write_all(&(grid.points as u64).to_le_bytes())?;
    w.write_all(&grid.half_width.to_le_bytes())?;
    w.write_all(&t.to_le_bytes())?;
    for z in psi {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Read a snapshot written by [`run`]: (N_x, L_x, t, ψ).
pub fn read_snapshot(path: &Path) -> Result<(usize, f64, f64, Vec<Complex64>)> {
    let bytes = std::fs::read(path)?;
    let f = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
    if bytes.len() < 24 {
        return Err(Error::Config(format!("{} is not a snapshot", path.display())));
    }
    let n = u64::from_le_bytes(bytes[0..8].try_into().expect("8 bytes")) as usize;
    if bytes.len() != 24 + 16 * n {
        return Err(Error::Config(format!("{} has the wrong length", path.display())));
    }
    let psi = (0..n).map(|j| Complex64::new(f(24 + 16 * j), f(32 + 16 * j))).collect();
    Ok((n, f(8), f(16), psi))
}

pub fn write_jsonl(frames: &[FrameRecord], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for fr in frames {
        serde_json::to_writer(&mut w, fr)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(frames: &[FrameRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    for fr in frames {
        w.serialize(fr).map_err(|e| Error::Config(format!("csv write failed: {e}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Integrate to `t_end`, fitting and decomposing at every frame.
pub fn run(config: &SimConfig) -> Result<RunOutput> {
    config.validate()?;
    let grid = config.grid()?;
    let w0 = config.initial.omega0;
    let needs_mode = config.analysis.enabled || matches!(config.initial.perturbation, Perturbation::InternalMode { .. });
    let mut cache = if needs_mode { Some(ModeCache::new(w0, config)?) } else { None };
    let lambda0 = cache.as_ref().map(|c| c.mode.lambda);
    let mut psi = initial_state(config, cache.as_ref().map(|c| &c.mode))?;
    let mut stepper = SplitStep::new(grid, config.dt, config.nonlinear, config.sponge)?;
    let max_x = config.sponge.inner_edge(&grid);
    let per_frame = config.steps_per_frame();
    let n_frames = (config.t_end / (per_frame as f64 * config.dt)).round() as usize;

    let mut jsonl = match &config.output.jsonl {
        Some(p) => Some(BufWriter::new(File::create(p)?)),
        None => None,
    };
    let mut frames = Vec::with_capacity(n_frames + 1);
    let mut last_frame = None;
    let mut pi = (config.initial.gamma0, w0);
    let (mut t, mut s) = (0.0, 0.0);
    let mut prev_omega = w0;
    for index in 0..=n_frames {
        if index > 0 {
            stepper.advance(&mut psi, per_frame, t)?;
            t = index as f64 * per_frame as f64 * config.dt;
        }
        let mut rec = FrameRecord { index, t, parity_defect: parity_defect(&grid, &psi), ..Default::default() };
        let c = stepper.conserved(&psi);
        rec.mass = c.mass;
        rec.momentum = c.momentum;
        rec.energy = c.energy;
        let guess = (align_phase(&grid, &psi, pi.1).unwrap_or(pi.0), pi.1);
        match fit_modulation(&grid, &psi, guess) {
            Ok(fit) => {
                pi = (fit.gamma, fit.omega);
                rec.fit_ok = true;
                rec.fit_iterations = fit.iterations;
                if index > 0 {
                    s += 0.5 * (prev_omega + fit.omega) * per_frame as f64 * config.dt;
                }
                prev_omega = fit.omega;
                rec.s = s;
                rec.gamma = fit.gamma;
                rec.omega = fit.omega;
                let analysis = match (&mut cache, config.analysis.enabled) {
                    (Some(cache), true) => Some(cache.at(fit.omega).and_then(|m| decompose(&mut stepper, &psi, &fit, m, w0, max_x, t, s))),
                    _ => None,
                };
                match analysis {
                    Some(Ok(frame)) => {
                        let d = frame.diagnostics;
                        rec.analyzed = true;
                        rec.b1 = frame.b1;
                        rec.b2 = frame.b2;
                        rec.b_abs = d.b_abs;
                        rec.rho4_v = d.rho4_v;
                        rec.rho_v = d.rho_v;
                        rec.nu_u = d.nu_u;
                        rec.m_functional = d.m_functional;
                        rec.orbital_distance = d.orbital_distance;
                        rec.u_orth_lambda_q = d.u_orthogonality[0];
                        rec.u_orth_q = d.u_orthogonality[1];
                        rec.v_orth_lambda_q = d.v_orthogonality[0];
                        rec.v_orth_q = d.v_orthogonality[1];
                        rec.v_orth_v1 = d.v_orthogonality[2];
                        rec.v_orth_v2 = d.v_orthogonality[3];
                        rec.reconstruction = d.reconstruction;
                        last_frame = Some(frame);
                    }
                    Some(Err(e)) => rec.error = Some(e.to_string()),
                    None => {
                        let sol = Soliton::new(fit.omega)?;
                        let phi: Vec<Complex64> = (0..grid.points).map(|j| Complex64::new(sol.phi(grid.x(j)), 0.0)).collect();
                        let pp = stepper.h1_inner(&psi, &psi).re;
                        let ff = stepper.h1_inner(&phi, &phi).re;
                        let pf = stepper.h1_inner(&psi, &phi).norm();
                        rec.orbital_distance = (pp + ff - 2.0 * pf).max(0.0).sqrt();
                    }
                }
            }
            Err(e) => {
                // Keep the previous Π and flag the frame.
                if index > 0 {
                    s += prev_omega * per_frame as f64 * config.dt;
                }
                rec.s = s;
                rec.gamma = pi.0;
                rec.omega = pi.1;
                rec.error = Some(e.to_string());
            }
        }
        if let Some(w) = jsonl.as_mut() {
            serde_json::to_writer(&mut *w, &rec)?;
            w.write_all(b"\n")?;
        }
        if let (Some(dir), k) = (&config.output.snapshot_dir, config.output.snapshot_every) {
            if k > 0 && index % k == 0 {
                write_snapshot(dir, index, &grid, t, &psi)?;
            }
        }
        frames.push(rec);
    }
    if let Some(mut w) = jsonl {
        w.flush()?;
    }
    if let Some(p) = &config.output.csv {
        write_csv(&frames, p)?;
    }
    let mut summary = summarize(&frames, w0, lambda0);
    summary.mode_rebuilds = cache.as_ref().map_or(0, |c| c.rebuilds);
    Ok(RunOutput { frames, summary, final_psi: psi, last_frame })
}

/// arg⟨ψ, φ_ω⟩: the phase that best aligns ψ with the soliton at ω.
pub fn align_phase(grid: &PhysGrid, psi: &[Complex64], omega: f64) -> Result<f64> {
    let sol = Soliton::new(omega)?;
    let z: Complex64 = psi.iter().enumerate().map(|(j, z)| z * sol.phi(grid.x(j))).sum();
    Ok(z.arg())
}

pub fn summarize(frames: &[FrameRecord], omega0: f64, lambda0: Option<f64>) -> RunSummary {
    let ok: Vec<&FrameRecord> = frames.iter().filter(|f| f.fit_ok).collect();
    let analyzed: Vec<&FrameRecord> = ok.iter().copied().filter(|f| f.analyzed).collect();
    let s: Vec<f64> = ok.iter().map(|f| f.s).collect();
    let om: Vec<f64> = ok.iter().map(|f| f.omega).collect();
    let s_end = s.last().copied().unwrap_or(0.0);
    let (m0, e0) = frames.first().map_or((1.0, 1.0), |f| (f.mass, f.energy));
    let mut sum = RunSummary {
        frames: frames.len(),
        failed_frames: frames.iter().filter(|f| f.error.is_some()).count(),
        t_end: frames.last().map_or(0.0, |f| f.t),
        s_end,
        omega0,
        lambda0,
        omega_max_drift: om.iter().map(|w| (w - omega0).abs()).fold(0.0, f64::max),
        omega_variation_first_quarter: window_variation(&s, &om, 0.0, 0.25 * s_end),
        omega_variation_last_quarter: window_variation(&s, &om, 0.75 * s_end, s_end),
        max_orbital_distance: frames.iter().map(|f| f.orbital_distance).fold(0.0, f64::max),
        mass_drift_rel: frames.iter().map(|f| ((f.mass - m0) / m0).abs()).fold(0.0, f64::max),
        energy_drift_rel: frames.iter().map(|f| ((f.energy - e0) / e0).abs()).fold(0.0, f64::max),
        max_parity_defect: frames.iter().map(|f| f.parity_defect).fold(0.0, f64::max),
        ..Default::default()
    };
    if analyzed.len() >= 8 {
        let sa: Vec<f64> = analyzed.iter().map(|f| f.s).collect();
        let b1: Vec<f64> = analyzed.iter().map(|f| f.b1).collect();
        let babs: Vec<f64> = analyzed.iter().map(|f| f.b_abs).collect();
        let b4: Vec<f64> = babs.iter().map(|b| b.powi(4)).collect();
        let r4: Vec<f64> = analyzed.iter().map(|f| f.rho4_v.powi(2)).collect();
        sum.b_frequency = peak_frequency(&sa, &b1).ok();
        if let (Some(f), Some(l)) = (sum.b_frequency, lambda0) {
            sum.b_frequency_rel_error = Some((f / l - 1.0).abs());
        }
        let end = *sa.last().expect("non-empty");
        sum.b_envelope_first = window_mean(&sa, &babs, sa[0], 0.25 * end);
        sum.b_envelope_last = window_mean(&sa, &babs, 0.75 * end, end);
        sum.int_b4 = trapezoid(&sa, &b4);
        sum.int_rho4_v2 = trapezoid(&sa, &r4);
        sum.max_orthogonality = analyzed
            .iter()
            .map(|f| [f.u_orth_lambda_q, f.u_orth_q, f.v_orth_lambda_q, f.v_orth_q, f.v_orth_v1, f.v_orth_v2].into_iter().fold(0.0, f64::max))
            .fold(0.0, f64::max);
        sum.max_reconstruction = analyzed.iter().map(|f| f.reconstruction).fold(0.0, f64::max);
        sum.modulation_ratio = modulation_ratio(&analyzed);
    }
    sum
}

/// Central differences of the fitted (γ, ω) against ‖νu‖², on consecutive analyzed frames.
fn modulation_ratio(frames: &[&FrameRecord]) -> Option<f64> {
    use std::f64::consts::{PI, TAU};
    frames
        .windows(3)
        .filter(|w| w[0].index + 2 == w[2].index && w[1].nu_u > 0.0)
        .map(|w| {
            let ds = w[2].s - w[0].s;
            let dg = (w[2].gamma - w[0].gamma + PI).rem_euclid(TAU) - PI;
            let m = (dg / ds - 1.0).abs() + ((w[2].omega - w[0].omega) / ds / w[1].omega).abs();
            m / (w[1].nu_u * w[1].nu_u)
        })
        .reduce(f64::max)
}
