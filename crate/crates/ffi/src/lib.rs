//! C interface to `fran_sdcp`.
//!
//! Every fallible function returns an [`FsStatus`] and writes its result
//! through an out-pointer. After a failure, `fs_last_error_message` returns a
//! description owned by the library and valid until the next call on the
//! same thread. Models are opaque handles created by `fs_model_new_*` and
//! released with `fs_model_free`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fran_sdcp::config::{parse_config, ConfigError, ExperimentConfig};
use fran_sdcp::model::CompressionMode;
use fran_sdcp::queueing::{mg1_sojourn_cdf, mg1_sojourn_laplace, mg1_sojourn_pdf, Mg1Fap};
use fran_sdcp::sdcp::SdcpAnalysis;
use fran_sdcp::stp::{stp_exact, SirThreshold};
use fran_sdcp::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    NonConvergence = 3,
    Stability = 4,
    Numerical = 5,
    Config = 6,
    Panic = 7,
}

/// Compression mode selector; `beta` arguments are read only for `Hybrid`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsMode {
    Local = 0,
    Edge = 1,
    Hybrid = 2,
}

/// Opaque model: configuration plus the cached threshold-dependent terms.
pub struct FsModel {
    config: ExperimentConfig,
    analysis: SdcpAnalysis,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = clean);
}

fn status_of(e: &Error) -> FsStatus {
    match e {
        Error::Domain(_) => FsStatus::Domain,
        Error::NonConvergence { .. } => FsStatus::NonConvergence,
        Error::Stability(_) => FsStatus::Stability,
        Error::NumericalInconsistency(_) => FsStatus::Numerical,
    }
}

enum Failure {
    Status(FsStatus, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Status(status_of(&e), e.to_string())
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Status(FsStatus::Config, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(FsStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> FsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            FsStatus::Ok
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            FsStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn model_ref<'a>(model: *const FsModel) -> Result<&'a FsModel, Failure> {
    model.as_ref().ok_or_else(|| null("model"))
}

unsafe fn model_mut<'a>(model: *mut FsModel) -> Result<&'a mut FsModel, Failure> {
    model.as_mut().ok_or_else(|| null("model"))
}

fn build(config: ExperimentConfig) -> Result<Box<FsModel>, Failure> {
    let analysis = SdcpAnalysis::new(config.network, config.tau, config.analysis_options())?;
    Ok(Box::new(FsModel { config, analysis }))
}

fn mode_of(mode: FsMode, beta: f64) -> Result<CompressionMode, Failure> {
    Ok(match mode {
        FsMode::Local => CompressionMode::Local,
        FsMode::Edge => CompressionMode::Edge,
        FsMode::Hybrid => CompressionMode::hybrid(beta)?,
    })
}

/// Model with the reference parameters.
#[no_mangle]
pub unsafe extern "C" fn fs_model_new_reference(out: *mut *mut FsModel) -> FsStatus {
    guard(|| {
        let m = build(ExperimentConfig::default())?;
        write(out, Box::into_raw(m), "out")
    })
}

/// Model from a JSON configuration document (UTF-8, NUL-terminated).
#[no_mangle]
pub unsafe extern "C" fn fs_model_new_from_json(json: *const c_char, out: *mut *mut FsModel) -> FsStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure::Status(FsStatus::Config, format!("config is not UTF-8: {e}")))?;
        let m = build(parse_config(text)?)?;
        write(out, Box::into_raw(m), "out")
    })
}

/// Releases a model. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fs_model_free(model: *mut FsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Sets the SIR threshold in dB and refreshes the cached STP and rate.
#[no_mangle]
pub unsafe extern "C" fn fs_model_set_threshold_db(model: *mut FsModel, tau_db: f64) -> FsStatus {
    guard(|| {
        let m = model_mut(model)?;
        let tau = SirThreshold::from_db(tau_db)?;
        let analysis = SdcpAnalysis::new(m.config.network, tau, m.config.analysis_options())?;
        m.config.tau = tau;
        m.analysis = analysis;
        Ok(())
    })
}

/// Sets the end-to-end latency target in seconds.
#[no_mangle]
pub unsafe extern "C" fn fs_model_set_target_latency(model: *mut FsModel, seconds: f64) -> FsStatus {
    guard(|| {
        let m = model_mut(model)?;
        let mut task = m.config.task;
        task.target_latency = seconds;
        task.validate()?;
        m.config.task = task;
        Ok(())
    })
}

/// Sets the per-UE task generation rate in tasks/s.
#[no_mangle]
pub unsafe extern "C" fn fs_model_set_task_rate(model: *mut FsModel, tasks_per_second: f64) -> FsStatus {
    guard(|| {
        let m = model_mut(model)?;
        let mut task = m.config.task;
        task.gen_rate = tasks_per_second;
        task.validate()?;
        m.config.task = task;
        Ok(())
    })
}

/// Sets the backhaul capacity in bit/s.
#[no_mangle]
pub unsafe extern "C" fn fs_model_set_backhaul(model: *mut FsModel, bits_per_second: f64) -> FsStatus {
    guard(|| {
        let m = model_mut(model)?;
        let mut hw = m.config.hardware;
        hw.backhaul_capacity = bits_per_second;
        hw.validate()?;
        m.config.hardware = hw;
        Ok(())
    })
}

/// Closed-form successful transmission probability.
#[no_mangle]
pub unsafe extern "C" fn fs_stp(model: *const FsModel, out: *mut f64) -> FsStatus {
    guard(|| {
        let m = model_ref(model)?;
        write(out, m.analysis.stp(), "out")
    })
}

/// Successful transmission probability by nested quadrature. Slow.
#[no_mangle]
pub unsafe extern "C" fn fs_stp_exact(model: *const FsModel, out: *mut f64) -> FsStatus {
    guard(|| {
        let m = model_ref(model)?;
        let v = stp_exact(m.config.tau, &m.config.network, &m.config.quadrature)?;
        write(out, v, "out")
    })
}

/// Average uplink rate in bit/s.
#[no_mangle]
pub unsafe extern "C" fn fs_uplink_rate(model: *const FsModel, out: *mut f64) -> FsStatus {
    guard(|| {
        let m = model_ref(model)?;
        write(out, m.analysis.uplink_rate(), "out")
    })
}

/// Successful task execution probability.
#[no_mangle]
pub unsafe extern "C" fn fs_step(model: *const FsModel, mode: FsMode, beta: f64, out: *mut f64) -> FsStatus {
    guard(|| {
        let m = model_ref(model)?;
        let b = m
            .analysis
            .evaluate(mode_of(mode, beta)?, &m.config.task, &m.config.hardware)?;
        write(out, b.step, "out")
    })
}

/// Successful data compression probability.
#[no_mangle]
pub unsafe extern "C" fn fs_sdcp(model: *const FsModel, mode: FsMode, beta: f64, out: *mut f64) -> FsStatus {
    guard(|| {
        let m = model_ref(model)?;
        let b = m
            .analysis
            .evaluate(mode_of(mode, beta)?, &m.config.task, &m.config.hardware)?;
        write(out, b.sdcp, "out")
    })
}

/// Offloading ratio maximising the hybrid SDCP, and the maximum.
#[no_mangle]
pub unsafe extern "C" fn fs_optimize_beta(model: *const FsModel, beta_out: *mut f64, sdcp_out: *mut f64) -> FsStatus {
    guard(|| {
        let m = model_ref(model)?;
        if beta_out.is_null() || sdcp_out.is_null() {
            return Err(null("output"));
        }
        let best = m
            .analysis
            .optimize_beta(&m.config.task, &m.config.hardware, &m.config.beta_search)?;
        write(beta_out, best.beta, "beta_out")?;
        write(sdcp_out, best.sdcp, "sdcp_out")
    })
}

fn fap(lambda: f64, mu_dd: f64, mu_cp: f64) -> Result<Mg1Fap, Failure> {
    Ok(Mg1Fap::new(lambda, mu_dd, mu_cp)?)
}

/// Density of the access-point sojourn time at `t` seconds.
#[no_mangle]
pub unsafe extern "C" fn fs_mg1_sojourn_pdf(lambda: f64, mu_dd: f64, mu_cp: f64, t: f64, out: *mut f64) -> FsStatus {
    guard(|| write(out, mg1_sojourn_pdf(&fap(lambda, mu_dd, mu_cp)?, t)?, "out"))
}

/// Distribution function of the access-point sojourn time.
#[no_mangle]
pub unsafe extern "C" fn fs_mg1_sojourn_cdf(lambda: f64, mu_dd: f64, mu_cp: f64, t: f64, out: *mut f64) -> FsStatus {
    guard(|| write(out, mg1_sojourn_cdf(&fap(lambda, mu_dd, mu_cp)?, t)?, "out"))
}

/// Laplace transform of the access-point sojourn density at `s >= 0`.
#[no_mangle]
pub unsafe extern "C" fn fs_mg1_sojourn_laplace(
    lambda: f64,
    mu_dd: f64,
    mu_cp: f64,
    s: f64,
    out: *mut f64,
) -> FsStatus {
    guard(|| write(out, mg1_sojourn_laplace(&fap(lambda, mu_dd, mu_cp)?, s)?, "out"))
}

/// Message of the last failed call on this thread; empty after a success.
#[no_mangle]
pub extern "C" fn fs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn fs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
