//! Command-line front end. Every subcommand writes a JSON report (or CSV
//! where a table makes sense) to `--out` or stdout.
//!
//! Exit codes: 0 on success, 1 when a certification fails, 2 on usage or
//! configuration errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::acceptance::{self, run_suite};
use crate::dynamics::{self, SimConfig};
use crate::error::{Error, Result};
use crate::fgr_exact::{certify_gamma0, gamma0_exact, gamma0_numeric, gamma_numeric, p1_closed_form};
use crate::grid::{Grid, GridFn};
use crate::operators::{build_k, check_conjugation_first, check_conjugation_second, observed_order, OpName, OperatorBundle};
use crate::profiles::{make_profile, q0};
use crate::spectral::{build_internal_mode, build_internal_mode_with, compare_with_mode, solve_g, ModeOptions};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CERTIFICATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "cqnls", version, about = "Solitary waves of the cubic-quintic NLS: spectra, golden-rule constants and dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Soliton frequency ω.
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    /// Half-width of the computational grid.
    #[arg(long = "grid-L", global = true)]
    pub grid_l: Option<f64>,
    /// Number of grid points.
    #[arg(long = "grid-N", global = true)]
    pub grid_n: Option<usize>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the ground state Q_ω and report its residuals.
    Profile,
    /// Internal mode: α, λ, residuals and the direct-solver cross-check.
    Spectrum,
    /// Golden-rule constant: exact certification and, unless --exact, Γ(ω).
    GoldenRule {
        #[arg(long)]
        exact: bool,
    },
    /// ∫Y₀ of the transformed operator.
    Repulsivity,
    /// Factorization and resonance identities on test functions.
    OperatorsCheck,
    /// Run a simulation described by --config.
    Simulate {
        /// Also write a plotting script next to the CSV output.
        #[arg(long)]
        plot: bool,
    },
    /// Run the acceptance suite.
    VerifyAll {
        /// Comma-separated criterion numbers (all when omitted).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

struct Outcome {
    report: Value,
    certified: bool,
}

fn versioned(kind: &str, mut v: Value) -> Value {
    if let Value::Object(map) = &mut v {
        map.insert("schema".into(), json!(format!("cqnls.{kind}/{SCHEMA_VERSION}")));
    }
    v
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).unwrap_or(Value::Null)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                s.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn write_json(out: Option<&Path>, v: &Value) -> Result<()> {
    write_output(out, &serde_json::to_string_pretty(v)?)
}

fn omega_or(cli: &Cli, default: f64) -> Result<f64> {
    let w = cli.omega.unwrap_or(default);
    if !(w > 0.0 && w <= 0.1) {
        return Err(Error::Config(format!("--omega must lie in (0, 0.1], got {w}")));
    }
    Ok(w)
}

fn grid_or(cli: &Cli, l: f64, n: usize) -> Result<Grid> {
    Grid::new(cli.grid_l.unwrap_or(l), cli.grid_n.unwrap_or(n)).map_err(|e| Error::Config(e.to_string()))
}

fn profile(cli: &Cli) -> Result<Outcome> {
    let w = cli.omega.unwrap_or(0.02);
    if !(w >= 0.0) {
        return Err(Error::Config(format!("--omega must be non-negative, got {w}")));
    }
    let p = make_profile(w, grid_or(cli, 40.0, 4096)?)?;
    let ode = p.ode_residual()?;
    let first = p.first_integral_residual()?;
    if cli.format == Format::Csv {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["y", "q", "q_prime"]).map_err(csv_err)?;
        for j in 0..p.grid().len() {
            wtr.write_record([p.grid().node(j), p.q.at(j), p.q_prime.at(j)].iter().map(|v| format!("{v:.17e}"))).map_err(csv_err)?;
        }
        let bytes = wtr.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        write_output(cli.out.as_deref(), &String::from_utf8_lossy(&bytes))?;
        return Ok(Outcome { report: Value::Null, certified: true });
    }
    let report = json!({
        "omega": w, "a_omega": p.a_omega, "mass": p.soliton.mass(), "c_omega": p.soliton.c_omega(),
        "q_at_zero": p.soliton.q(0.0), "ode_residual": ode, "first_integral_residual": first,
        "half_width": p.grid().half_width(), "points": p.grid().len(),
    });
    Ok(Outcome { report: versioned("profile", report), certified: true })
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

fn spectrum(cli: &Cli) -> Result<Outcome> {
    let w = omega_or(cli, 0.02)?;
    let mode = match (cli.grid_l, cli.grid_n) {
        (None, None) => build_internal_mode(w),
        _ => {
            let alpha_guess = 0.85 * w;
            let l = cli.grid_l.unwrap_or_else(|| crate::spectral::mode::default_half_width(alpha_guess));
            let opts = ModeOptions { grid: Some(Grid::new(l, cli.grid_n.unwrap_or((((2.0 * l / 0.05) as usize) + 1) & !1))?), ..ModeOptions::default() };
            build_internal_mode_with(w, &opts)
        }
    };
    // A failed invariant check is a certification failure, not a usage error.
    let mode = match mode {
        Ok(m) => m,
        Err(e @ Error::ModeInvalid(_)) => {
            return Ok(Outcome { report: versioned("spectrum", json!({ "omega": w, "failed_invariant": e.to_string() })), certified: false })
        }
        Err(e) => return Err(e),
    };
    let (_, cmp) = compare_with_mode(&mode)?;
    let report = json!({
        "omega": w, "alpha": mode.alpha, "alpha_over_omega": mode.alpha / w, "lambda": mode.lambda,
        "kappa": mode.kappa, "tau": mode.tau, "diagnostics": to_value(&mode.diagnostics), "direct_check": to_value(&cmp),
    });
    let certified = cmp.lambda_gap <= acceptance::LAMBDA_GAP_TOL;
    Ok(Outcome { report: versioned("spectrum", report), certified })
}

fn golden_rule(cli: &Cli, exact: bool) -> Result<Outcome> {
    let v = gamma0_exact();
    let certified = certify_gamma0().is_ok();
    let mut report = json!({
        "gamma0_vector": v.to_strings(), "basis": ["p1", "q1", "r1", "s1"], "certified": certified,
        "p1_closed_form": p1_closed_form(), "gamma0_numeric": gamma0_numeric(),
    });
    if !exact {
        let w = omega_or(cli, 0.02)?;
        let mode = build_internal_mode(w)?;
        let pair = solve_g(&mode)?;
        let g = gamma_numeric(&mode, &pair)?;
        report["gamma"] = json!({ "omega": w, "gamma": g.gamma, "gamma_over_omega": g.ratio(), "form_gap": g.form_gap(), "diagnostics": to_value(&pair.diagnostics) });
    }
    Ok(Outcome { report: versioned("golden-rule", report), certified })
}

fn repulsivity(cli: &Cli) -> Result<Outcome> {
    let w = omega_or(cli, 0.02)?;
    let mode = build_internal_mode(w)?;
    let k = build_k(&mode, grid_or(cli, acceptance::K_GRID.0, acceptance::K_GRID.1)?)?;
    let i = k.repulsivity_integral();
    let report = json!({ "omega": w, "integral_y0": i, "integral_over_omega": i / w, "target_over_omega": 32.0 / 9.0, "diagnostics": to_value(&k.diagnostics) });
    Ok(Outcome { report: versioned("repulsivity", report), certified: i > 0.0 })
}

fn operators_check(cli: &Cli) -> Result<Outcome> {
    let w = omega_or(cli, 0.02)?;
    let (l, acc) = acceptance::FACTORIZATION_GRID;
    let l = cli.grid_l.unwrap_or(l);
    let fine = cli.grid_n.unwrap_or(acceptance::FACTORIZATION_POINTS.1);
    let mode = build_internal_mode(w)?;
    let first = |n| -> Result<_> {
        let b = OperatorBundle::new(w, Grid::new(l, n)?)?.with_accuracy(acc);
        Ok(check_conjugation_first(&b, &[GridFn::from_fn(*b.grid(), |y| (-y * y).exp())])?[0])
    };
    let second = |n| -> Result<f64> {
        let b = OperatorBundle::new(w, Grid::new(l, n)?)?.with_accuracy(acc).with_mode(&mode)?;
        check_conjugation_second(&b, &GridFn::from_fn(*b.grid(), |y| (-0.5 * y * y).exp()))
    };
    let (f1c, f1) = (first(fine / 2)?, first(fine)?);
    let (f2c, f2) = (second(fine / 2)?, second(fine)?);
    let b0 = OperatorBundle::new(0.0, Grid::new(40.0, 8192)?)?;
    let g0 = *b0.grid();
    let r = GridFn::from_fn(g0, |y| 1.0 - q0(y).powi(2));
    let res_plus = b0.apply(OpName::LPlus, &r)?.map(|v| v - 1.0).interior_sup_norm();
    let res_minus = b0.apply(OpName::LMinus, &GridFn::from_fn(g0, |_| 1.0))?.sub(&r)?.interior_sup_norm();
    let (o1, o2) = (observed_order(f1c.conjugation, f1.conjugation), observed_order(f2c, f2));
    let certified = f1.worst() <= acceptance::FACTORIZATION_TOL
        && f2 <= acceptance::FACTORIZATION_TOL
        && res_plus <= acceptance::RESONANCE_TOL
        && res_minus <= acceptance::RESONANCE_TOL;
    let report = json!({
        "omega": w, "half_width": l, "points": fine,
        "first_factorization": to_value(&f1), "first_order": o1,
        "second_factorization": f2, "second_order": o2,
        "resonance": { "l_plus": res_plus, "l_minus": res_minus },
        "tolerance": acceptance::FACTORIZATION_TOL,
    });
    Ok(Outcome { report: versioned("operators-check", report), certified })
}

/// Self-contained matplotlib script for a frame CSV.
pub fn plot_script(csv_name: &str) -> String {
    format!(
        r#"import csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("{csv_name}")))
col = lambda k: [float(r[k]) for r in rows if r["fit_ok"] == "true"]
s = col("s")
fig, ax = plt.subplots(3, 1, sharex=True, figsize=(8, 9))
ax[0].plot(s, col("b1"), label="b1")
ax[0].plot(s, col("b2"), label="b2")
ax[0].plot(s, col("b_abs"), "k", lw=0.8, label="|b|")
ax[0].legend()
ax[1].plot(s, col("omega"))
ax[1].set_ylabel("omega")
ax[2].semilogy(s, col("orbital_distance"))
ax[2].set_ylabel("orbital distance")
ax[2].set_xlabel("s")
fig.tight_layout()
fig.savefig("{csv_name}.png", dpi=150)
"#
    )
}

fn simulate(cli: &Cli, plot: bool) -> Result<Outcome> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config("simulate needs --config <file>".into()))?;
    let mut config = SimConfig::from_json_file(path)?;
    if let Some(w) = cli.omega {
        config.initial.omega0 = w;
    }
    if let Some(l) = cli.grid_l {
        config.half_width = l;
    }
    if let Some(n) = cli.grid_n {
        config.points = n;
    }
    if cli.format == Format::Csv && config.output.csv.is_none() {
        let out = cli.out.clone().ok_or_else(|| Error::Config("--format csv needs --out".into()))?;
        config.output.csv = Some(out);
    }
    config.validate()?;
    let out = dynamics::run(&config)?;
    if plot {
        let csv = config.output.csv.as_ref().ok_or_else(|| Error::Config("--plot needs CSV output".into()))?;
        let name = csv.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        std::fs::write(csv.with_extension("plot.py"), plot_script(&name))?;
    }
    let report = json!({ "config": to_value(&config), "summary": to_value(&out.summary) });
    Ok(Outcome { report: versioned("simulate", report), certified: true })
}

fn verify_all(only: &[usize]) -> Outcome {
    let suite = run_suite(only);
    for c in &suite.criteria {
        eprintln!("{}", c.line());
    }
    Outcome { certified: suite.passed, report: to_value(&suite) }
}

fn configure_threads() {
    if let Some(n) = std::env::var("CQNLS_THREADS").ok().and_then(|s| s.parse::<usize>().ok()).filter(|n| *n > 0) {
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    configure_threads();
    let result = match &cli.command {
        Command::Profile => profile(&cli),
        Command::Spectrum => spectrum(&cli),
        Command::GoldenRule { exact } => golden_rule(&cli, *exact),
        Command::Repulsivity => repulsivity(&cli),
        Command::OperatorsCheck => operators_check(&cli),
        Command::Simulate { plot } => simulate(&cli, *plot),
        Command::VerifyAll { only } => Ok(verify_all(only)),
    };
    match result {
        Ok(o) => {
            if !o.report.is_null() {
                // In CSV mode --out holds the frame table; the summary goes to stdout.
                let json_out = match (&cli.command, cli.format) {
                    (Command::Simulate { .. }, Format::Csv) => None,
                    _ => cli.out.as_deref(),
                };
                if let Err(e) = write_json(json_out, &o.report) {
                    eprintln!("error: {e}");
                    return EXIT_USAGE;
                }
            }
            if o.certified {
                EXIT_OK
            } else {
                eprintln!("certification failed; see the report");
                EXIT_CERTIFICATION
            }
        }
        Err(e @ (Error::Config(_) | Error::Domain(_) | Error::Io(_) | Error::Json(_))) => {
            eprintln!("usage error: {e}");
            eprintln!("run `cqnls --help` for usage");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CERTIFICATION
        }
    }
}
