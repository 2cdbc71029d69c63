//! C ABI over the cqnls library.
//!
//! Every fallible function returns a [`CqnlsStatus`]. On failure the message
//! is kept per thread and can be read with [`cqnls_last_error`]. Objects are
//! handed out as opaque pointers and must be released with the matching
//! `_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cqnls::dynamics::{self, RunOutput, SimConfig};
use cqnls::error::Error;
use cqnls::fgr_exact;
use cqnls::profiles::Soliton;
use cqnls::spectral::{self, InternalMode};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CqnlsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    NoConvergence = 4,
    Singular = 5,
    ModeInvalid = 6,
    Config = 7,
    Io = 8,
    Certification = 9,
    Numerical = 10,
    Panic = 99,
}

/// Soliton profile Q_ω(y) in rescaled variables.
pub struct CqnlsSoliton(Soliton);

/// Internal mode of the linearization at one ω.
pub struct CqnlsMode(InternalMode);

/// Finished split-step run.
pub struct CqnlsRun(RunOutput);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn status_of(err: &Error) -> CqnlsStatus {
    match err {
        Error::Domain(_) | Error::GridMismatch(_) | Error::Interpolation(_) => CqnlsStatus::Domain,
        Error::Convergence(_) | Error::RootNotFound { .. } | Error::Fit(_) => CqnlsStatus::NoConvergence,
        Error::Singular(_) | Error::Inconsistent(_) => CqnlsStatus::Singular,
        Error::ModeInvalid(_) => CqnlsStatus::ModeInvalid,
        Error::Config(_) | Error::Json(_) => CqnlsStatus::Config,
        Error::Io(_) => CqnlsStatus::Io,
        Error::Certification(_) => CqnlsStatus::Certification,
        Error::Blowup { .. } => CqnlsStatus::Numerical,
    }
}

/// Runs `f`, records any error or panic, and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), CqnlsStatus>) -> CqnlsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CqnlsStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            CqnlsStatus::Panic
        }
    }
}

fn lift<T>(r: cqnls::error::Result<T>) -> Result<T, CqnlsStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, CqnlsStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        return Err(CqnlsStatus::NullPointer);
    }
    Ok(unsafe { &*p })
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<(), CqnlsStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        return Err(CqnlsStatus::NullPointer);
    }
    Ok(())
}

/// Message of the last failed call on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cqnls_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Clears the per-thread error message.
#[no_mangle]
pub extern "C" fn cqnls_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cqnls_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn cqnls_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn export_string(s: String, out: *mut *mut c_char) -> Result<(), CqnlsStatus> {
    let c = CString::new(s).map_err(|_| {
        set_error("string contains NUL");
        CqnlsStatus::InvalidArgument
    })?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Builds the soliton at frequency `omega` >= 0.
#[no_mangle]
pub unsafe extern "C" fn cqnls_soliton_new(omega: f64, out: *mut *mut CqnlsSoliton) -> CqnlsStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let s = lift(Soliton::new(omega))?;
        *out = Box::into_raw(Box::new(CqnlsSoliton(s)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cqnls_soliton_free(s: *mut CqnlsSoliton) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Evaluates Q_ω at `n` points.
#[no_mangle]
pub unsafe extern "C" fn cqnls_soliton_eval(s: *const CqnlsSoliton, y: *const f64, n: usize, out: *mut f64) -> CqnlsStatus {
    guard(|| {
        let s = non_null(s, "soliton")?;
        if n == 0 {
            return Ok(());
        }
        non_null(y, "y")?;
        out_ptr(out, "out")?;
        let ys = std::slice::from_raw_parts(y, n);
        let dst = std::slice::from_raw_parts_mut(out, n);
        for (d, &v) in dst.iter_mut().zip(ys) {
            *d = s.0.q(v);
        }
        Ok(())
    })
}

/// Physical mass ‖φ_ω‖².
#[no_mangle]
pub unsafe extern "C" fn cqnls_soliton_mass(s: *const CqnlsSoliton, out: *mut f64) -> CqnlsStatus {
    guard(|| {
        let s = non_null(s, "soliton")?;
        out_ptr(out, "out")?;
        *out = s.0.mass();
        Ok(())
    })
}

/// Builds the internal mode at frequency `omega`.
#[no_mangle]
pub unsafe extern "C" fn cqnls_mode_build(omega: f64, out: *mut *mut CqnlsMode) -> CqnlsStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let m = lift(spectral::build_internal_mode(omega))?;
        *out = Box::into_raw(Box::new(CqnlsMode(m)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cqnls_mode_free(m: *mut CqnlsMode) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Scalar data of a mode in rescaled units: ω, α, λ = 1 - α², and κ.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct CqnlsModeInfo {
    pub omega: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub kappa: f64,
    /// Number of grid samples per component.
    pub len: usize,
    pub half_width: f64,
}

#[no_mangle]
pub unsafe extern "C" fn cqnls_mode_info(m: *const CqnlsMode, out: *mut CqnlsModeInfo) -> CqnlsStatus {
    guard(|| {
        let m = &non_null(m, "mode")?.0;
        out_ptr(out, "out")?;
        *out = CqnlsModeInfo {
            omega: m.omega,
            alpha: m.alpha,
            lambda: m.lambda,
            kappa: m.kappa,
            len: m.grid().len(),
            half_width: m.grid().half_width(),
        };
        Ok(())
    })
}

/// Which sampled component [`cqnls_mode_samples`] copies out.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CqnlsComponent {
    Nodes = 0,
    V1 = 1,
    V2 = 2,
    W1 = 3,
    W2 = 4,
}

/// Copies one component into `out`, which must hold `len` doubles
/// (see [`CqnlsModeInfo::len`]).
#[no_mangle]
pub unsafe extern "C" fn cqnls_mode_samples(m: *const CqnlsMode, which: CqnlsComponent, out: *mut f64, len: usize) -> CqnlsStatus {
    guard(|| {
        let m = &non_null(m, "mode")?.0;
        out_ptr(out, "out")?;
        let g = *m.grid();
        if len != g.len() {
            set_error(format!("buffer holds {len} values, mode has {}", g.len()));
            return Err(CqnlsStatus::InvalidArgument);
        }
        let dst = std::slice::from_raw_parts_mut(out, len);
        let src = match which {
            CqnlsComponent::Nodes => {
                for (j, d) in dst.iter_mut().enumerate() {
                    *d = g.node(j);
                }
                return Ok(());
            }
            CqnlsComponent::V1 => &m.v1,
            CqnlsComponent::V2 => &m.v2,
            CqnlsComponent::W1 => &m.w1,
            CqnlsComponent::W2 => &m.w2,
        };
        for (j, d) in dst.iter_mut().enumerate() {
            *d = src.at(j);
        }
        Ok(())
    })
}

/// Golden-rule constant Γ(ω) for a built mode, in the projected form.
#[no_mangle]
pub unsafe extern "C" fn cqnls_mode_gamma(m: *const CqnlsMode, out: *mut f64) -> CqnlsStatus {
    guard(|| {
        let m = &non_null(m, "mode")?.0;
        out_ptr(out, "out")?;
        let pair = lift(spectral::solve_g(m))?;
        *out = lift(fgr_exact::gamma_numeric(m, &pair))?.gamma;
        Ok(())
    })
}

/// Checks in exact arithmetic that Γ₀ = (32/3) p₁ and writes its value.
/// Returns `Certification` if the reduction does not hold.
#[no_mangle]
pub unsafe extern "C" fn cqnls_gamma0_certify(out: *mut f64) -> CqnlsStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let v = lift(fgr_exact::certify_gamma0())?;
        *out = v.eval([fgr_exact::p1_closed_form(), 0.0, 0.0, 0.0]);
        Ok(())
    })
}

/// Runs a simulation described by a JSON config (same schema as the CLI).
/// Fields left out take their default values.
#[no_mangle]
pub unsafe extern "C" fn cqnls_run_from_json(config_json: *const c_char, out: *mut *mut CqnlsRun) -> CqnlsStatus {
    guard(|| {
        non_null(config_json, "config_json")?;
        out_ptr(out, "out")?;
        let text = CStr::from_ptr(config_json).to_str().map_err(|_| {
            set_error("config is not UTF-8");
            CqnlsStatus::InvalidArgument
        })?;
        let config: SimConfig = lift(serde_json::from_str(text).map_err(Error::from))?;
        let r = lift(dynamics::run(&config))?;
        *out = Box::into_raw(Box::new(CqnlsRun(r)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cqnls_run_free(r: *mut CqnlsRun) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Number of recorded frames.
#[no_mangle]
pub unsafe extern "C" fn cqnls_run_frame_count(r: *const CqnlsRun, out: *mut usize) -> CqnlsStatus {
    guard(|| {
        let r = &non_null(r, "run")?.0;
        out_ptr(out, "out")?;
        *out = r.frames.len();
        Ok(())
    })
}

/// Run summary as a JSON string; free it with [`cqnls_string_free`].
#[no_mangle]
pub unsafe extern "C" fn cqnls_run_summary_json(r: *const CqnlsRun, out: *mut *mut c_char) -> CqnlsStatus {
    guard(|| {
        let r = &non_null(r, "run")?.0;
        out_ptr(out, "out")?;
        let s = lift(serde_json::to_string(&r.summary).map_err(Error::from))?;
        export_string(s, out)
    })
}

/// All frame records as a JSON array; free it with [`cqnls_string_free`].
#[no_mangle]
pub unsafe extern "C" fn cqnls_run_frames_json(r: *const CqnlsRun, out: *mut *mut c_char) -> CqnlsStatus {
    guard(|| {
        let r = &non_null(r, "run")?.0;
        out_ptr(out, "out")?;
        let s = lift(serde_json::to_string(&r.frames).map_err(Error::from))?;
        export_string(s, out)
    })
}
