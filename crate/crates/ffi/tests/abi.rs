use std::ffi::{CStr, CString};
use std::ptr;

use fran_sdcp_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(fs_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

struct Handle(*mut FsModel);

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { fs_model_free(self.0) }
    }
}

fn reference() -> Handle {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { fs_model_new_reference(&mut m) }, FsStatus::Ok);
    assert!(!m.is_null());
    Handle(m)
}

#[test]
fn reference_model_values() {
    let h = reference();
    let mut stp = 0.0;
    let mut rate = 0.0;
    unsafe {
        assert_eq!(fs_stp(h.0, &mut stp), FsStatus::Ok);
        assert_eq!(fs_uplink_rate(h.0, &mut rate), FsStatus::Ok);
    }
    assert!((stp - 0.48709893978).abs() < 1e-9, "{stp}");
    assert!(rate > 0.0);
    assert_eq!(last_error(), "");

    let (mut local, mut sd_local) = (0.0, 0.0);
    unsafe {
        assert_eq!(fs_step(h.0, FsMode::Local, 0.0, &mut local), FsStatus::Ok);
        assert_eq!(fs_sdcp(h.0, FsMode::Local, 0.0, &mut sd_local), FsStatus::Ok);
    }
    assert!((0.0..=1.0).contains(&local));
    assert!((sd_local - stp * local).abs() < 1e-15);
}

#[test]
fn matches_library() {
    let h = reference();
    let cfg = fran_sdcp::config::ExperimentConfig::default();
    let an = fran_sdcp::sdcp::SdcpAnalysis::new(cfg.network, cfg.tau, cfg.analysis_options()).unwrap();
    let want = an
        .sdcp(fran_sdcp::model::CompressionMode::Hybrid(0.3), &cfg.task, &cfg.hardware)
        .unwrap();
    let mut got = 0.0;
    assert_eq!(unsafe { fs_sdcp(h.0, FsMode::Hybrid, 0.3, &mut got) }, FsStatus::Ok);
    assert_eq!(got.to_bits(), want.to_bits());
}

#[test]
fn threshold_update_lowers_stp() {
    let h = reference();
    let (mut a, mut b) = (0.0, 0.0);
    unsafe {
        fs_stp(h.0, &mut a);
        assert_eq!(fs_model_set_threshold_db(h.0, 3.0), FsStatus::Ok);
        fs_stp(h.0, &mut b);
    }
    assert!((b - 0.36382748).abs() < 1e-7, "{b}");
    assert!(b < a);
}

#[test]
fn optimizer_and_setters() {
    let h = reference();
    let (mut beta, mut best) = (f64::NAN, f64::NAN);
    unsafe {
        assert_eq!(fs_model_set_backhaul(h.0, 20e6), FsStatus::Ok);
        assert_eq!(fs_model_set_task_rate(h.0, 300.0), FsStatus::Ok);
        assert_eq!(fs_model_set_target_latency(h.0, 5e-3), FsStatus::Ok);
        assert_eq!(fs_optimize_beta(h.0, &mut beta, &mut best), FsStatus::Ok);
    }
    assert!((0.0..=1.0).contains(&beta));
    for b in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let mut v = 0.0;
        unsafe { fs_sdcp(h.0, FsMode::Hybrid, b, &mut v) };
        assert!(best >= v - 1e-12);
    }
}

#[test]
fn error_codes() {
    let h = reference();
    let mut v = 0.0;
    unsafe {
        assert_eq!(fs_stp(ptr::null(), &mut v), FsStatus::NullPointer);
        assert!(last_error().contains("null"));
        assert_eq!(fs_stp(h.0, ptr::null_mut()), FsStatus::NullPointer);
        assert_eq!(fs_sdcp(h.0, FsMode::Hybrid, 1.5, &mut v), FsStatus::Domain);
        assert!(!last_error().is_empty());
        assert_eq!(fs_model_set_target_latency(h.0, -1.0), FsStatus::Domain);
        assert_eq!(fs_mg1_sojourn_pdf(10.0, 5.0, 5.0, 0.1, &mut v), FsStatus::Stability);
        assert_eq!(fs_model_set_threshold_db(ptr::null_mut(), 0.0), FsStatus::NullPointer);
        assert_eq!(fs_optimize_beta(h.0, &mut v, ptr::null_mut()), FsStatus::NullPointer);
    }
    // A failed setter leaves the model usable.
    assert_eq!(unsafe { fs_stp(h.0, &mut v) }, FsStatus::Ok);
    assert_eq!(last_error(), "");
}

#[test]
fn json_models() {
    let good = CString::new(r#"{"tau": {"db": 3.0}, "hardware": {"backhaul_capacity": 2e7}}"#).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { fs_model_new_from_json(good.as_ptr(), &mut m) }, FsStatus::Ok);
    let h = Handle(m);
    let mut stp = 0.0;
    unsafe { fs_stp(h.0, &mut stp) };
    assert!((stp - 0.36382748).abs() < 1e-7);

    let bad = CString::new(r#"{"gamma_ratio": 0.5}"#).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { fs_model_new_from_json(bad.as_ptr(), &mut m) },
        FsStatus::Config
    );
    assert!(m.is_null());
    assert!(last_error().contains("gamma_ratio"));
    assert_eq!(
        unsafe { fs_model_new_from_json(ptr::null(), &mut m) },
        FsStatus::NullPointer
    );
    unsafe { fs_model_free(ptr::null_mut()) };
}

#[test]
fn queue_functions() {
    let (mut cdf, mut pdf, mut lt) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(fs_mg1_sojourn_cdf(1.0, 5.0, 3.0, 50.0, &mut cdf), FsStatus::Ok);
        assert_eq!(fs_mg1_sojourn_pdf(1.0, 5.0, 3.0, 0.5, &mut pdf), FsStatus::Ok);
        assert_eq!(fs_mg1_sojourn_laplace(1.0, 5.0, 3.0, 0.0, &mut lt), FsStatus::Ok);
    }
    assert!((cdf - 1.0).abs() < 1e-9);
    assert!(pdf > 0.0);
    assert!((lt - 1.0).abs() < 1e-12);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(fs_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/fran_sdcp.h")).unwrap();
    for name in [
        "fs_model_new_reference",
        "fs_model_new_from_json",
        "fs_model_free",
        "fs_model_set_threshold_db",
        "fs_model_set_target_latency",
        "fs_model_set_task_rate",
        "fs_model_set_backhaul",
        "fs_stp",
        "fs_stp_exact",
        "fs_uplink_rate",
        "fs_step",
        "fs_sdcp",
        "fs_optimize_beta",
        "fs_mg1_sojourn_pdf",
        "fs_mg1_sojourn_cdf",
        "fs_mg1_sojourn_laplace",
        "fs_last_error_message",
        "fs_version",
        "typedef struct FsModel FsModel",
        "FS_STATUS_NULL_POINTER = 1",
        "FS_STATUS_PANIC = 7",
        "FS_MODE_HYBRID = 2",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
    assert!(header.contains("#ifndef FRAN_SDCP_H"));
}
