use std::ffi::{CStr, CString};
use std::ptr;

use cqnls_ffi::*;

fn last_error() -> String {
    let p = cqnls_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn soliton_round_trip() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(cqnls_soliton_new(0.05, &mut s), CqnlsStatus::Ok);
        let ys = [0.0, 1.0, -1.0, 5.0];
        let mut q = [0.0; 4];
        assert_eq!(cqnls_soliton_eval(s, ys.as_ptr(), ys.len(), q.as_mut_ptr()), CqnlsStatus::Ok);
        let rust = cqnls::profiles::Soliton::new(0.05).unwrap();
        for (y, v) in ys.iter().zip(q) {
            assert_eq!(v, rust.q(*y));
        }
        assert_eq!(q[1], q[2]);
        let mut m = 0.0;
        assert_eq!(cqnls_soliton_mass(s, &mut m), CqnlsStatus::Ok);
        assert!(m > 0.0);
        cqnls_soliton_free(s);
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(cqnls_soliton_new(-1.0, &mut s), CqnlsStatus::Domain);
        assert!(s.is_null());
        assert!(last_error().contains("omega"));

        assert_eq!(cqnls_soliton_new(0.05, ptr::null_mut()), CqnlsStatus::NullPointer);
        assert_eq!(cqnls_soliton_mass(ptr::null(), &mut 0.0), CqnlsStatus::NullPointer);
        assert!(last_error().contains("soliton"));

        cqnls_clear_error();
        assert!(cqnls_last_error().is_null());

        let bad = CString::new("{\"dt\": \"fast\"}").unwrap();
        let mut r = ptr::null_mut();
        assert_eq!(cqnls_run_from_json(bad.as_ptr(), &mut r), CqnlsStatus::Config);
        assert!(r.is_null());

        // Freeing null is a no-op.
        cqnls_soliton_free(ptr::null_mut());
        cqnls_mode_free(ptr::null_mut());
        cqnls_run_free(ptr::null_mut());
        cqnls_string_free(ptr::null_mut());
    }
}

#[test]
fn gamma0_is_certified() {
    let mut g = 0.0;
    assert_eq!(unsafe { cqnls_gamma0_certify(&mut g) }, CqnlsStatus::Ok);
    let p1 = std::f64::consts::PI * 2f64.sqrt() / (std::f64::consts::PI / 2.0).cosh();
    assert!((g - 32.0 / 3.0 * p1).abs() < 1e-12);
}

#[test]
fn mode_handle_exposes_samples() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(cqnls_mode_build(0.04, &mut m), CqnlsStatus::Ok, "{}", last_error());
        let mut info = CqnlsModeInfo::default();
        assert_eq!(cqnls_mode_info(m, &mut info), CqnlsStatus::Ok);
        assert!(info.lambda > 0.0 && info.lambda < 1.0);
        assert!((info.lambda - (1.0 - info.alpha * info.alpha)).abs() < 1e-12);

        let mut ys = vec![0.0; info.len];
        let mut v1 = vec![0.0; info.len];
        assert_eq!(cqnls_mode_samples(m, CqnlsComponent::Nodes, ys.as_mut_ptr(), info.len), CqnlsStatus::Ok);
        assert_eq!(cqnls_mode_samples(m, CqnlsComponent::V1, v1.as_mut_ptr(), info.len), CqnlsStatus::Ok);
        assert!((ys[0] + info.half_width).abs() < 1e-12);
        assert!((ys[info.len - 1] - info.half_width).abs() < 1e-12);
        assert!((v1[0] - v1[info.len - 1]).abs() <= 1e-10 * v1.iter().fold(0.0f64, |a, b| a.max(b.abs())));

        let mut short = vec![0.0; 3];
        assert_eq!(cqnls_mode_samples(m, CqnlsComponent::V2, short.as_mut_ptr(), 3), CqnlsStatus::InvalidArgument);
        cqnls_mode_free(m);
    }
}

#[test]
fn simulation_from_json() {
    let cfg = CString::new(
        r#"{"half_width": 100, "points": 512, "dt": 0.01, "t_end": 2, "output_every": 0.5,
            "initial": {"omega0": 0.1, "perturbation": {"kind": "none"}},
            "sponge": {"enabled": false}, "analysis": {"enabled": false}}"#,
    )
    .unwrap();
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(cqnls_run_from_json(cfg.as_ptr(), &mut r), CqnlsStatus::Ok, "{}", last_error());
        let mut n = 0usize;
        assert_eq!(cqnls_run_frame_count(r, &mut n), CqnlsStatus::Ok);
        assert_eq!(n, 5);
        let mut s = ptr::null_mut();
        assert_eq!(cqnls_run_summary_json(r, &mut s), CqnlsStatus::Ok);
        let summary: serde_json::Value = serde_json::from_str(CStr::from_ptr(s).to_str().unwrap()).unwrap();
        cqnls_string_free(s);
        assert!(summary["mass_drift_rel"].as_f64().unwrap() < 1e-12);
        let mut f = ptr::null_mut();
        assert_eq!(cqnls_run_frames_json(r, &mut f), CqnlsStatus::Ok);
        let frames: serde_json::Value = serde_json::from_str(CStr::from_ptr(f).to_str().unwrap()).unwrap();
        cqnls_string_free(f);
        assert_eq!(frames.as_array().unwrap().len(), n);
        cqnls_run_free(r);
    }
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { CStr::from_ptr(cqnls_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
