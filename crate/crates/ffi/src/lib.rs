//! C interface to `qlmass`.
//!
//! Scenarios and reports are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns a
//! [`QlmStatus`]; the message of the last failure on the calling thread is
//! available from [`qlm_last_error`]. Strings returned by the library are
//! released with [`qlm_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use qlmass::pipeline::{run_pipeline, PipelineOutput, Scenario};
use qlmass::qlm::{lemma6_margin, schwarzschild_mass, Lemma6Sample};
use qlmass::{Error, ErrorKind};

/// Result codes. The first four match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QlmStatus {
    Ok = 0,
    /// An asserted inequality failed beyond its slack.
    Violation = 1,
    /// Malformed input or data outside the operation's domain.
    Input = 2,
    /// A solver did not converge.
    Nonconvergence = 3,
    /// A required pointer argument was null.
    NullArgument = 4,
    /// The report does not hold the requested value because an earlier
    /// stage failed.
    Unavailable = 5,
    /// The library panicked; the handle arguments are left untouched.
    Internal = 6,
}

impl From<ErrorKind> for QlmStatus {
    fn from(kind: ErrorKind) -> Self {
        match kind {
            ErrorKind::Violation => QlmStatus::Violation,
            ErrorKind::Input => QlmStatus::Input,
            ErrorKind::Nonconvergence => QlmStatus::Nonconvergence,
        }
    }
}

/// Opaque scenario handle.
pub struct QlmScenario(Scenario);

/// Opaque handle to a pipeline run: the report and, when the flow ran, its
/// CSV table.
pub struct QlmReport(PipelineOutput);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(e: &Error) -> QlmStatus {
    set_error(e.to_string());
    e.kind().into()
}

fn guard(f: impl FnOnce() -> QlmStatus) -> QlmStatus {
    clear_error();
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| {
        set_error("internal error: panic in qlmass");
        QlmStatus::Internal
    })
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, QlmStatus> {
    if s.is_null() {
        set_error("null string argument");
        return Err(QlmStatus::NullArgument);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        QlmStatus::Input
    })
}

fn to_c_string(s: &str) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qlm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn qlm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a scenario from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlm_scenario_from_json(json: *const c_char, out: *mut *mut QlmScenario) -> QlmStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return QlmStatus::NullArgument;
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Scenario::from_json(text) {
            Ok(sc) => {
                *out = Box::into_raw(Box::new(QlmScenario(sc)));
                QlmStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Reads a scenario file; a data file it names is resolved relative to it.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlm_scenario_load(path: *const c_char, out: *mut *mut QlmScenario) -> QlmStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return QlmStatus::NullArgument;
        }
        let path = match read_str(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match Scenario::load(Path::new(path)) {
            Ok(sc) => {
                *out = Box::into_raw(Box::new(QlmScenario(sc)));
                QlmStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Overrides the seed of a perturbed data preset.
///
/// # Safety
/// `scenario` must come from this library and not yet be freed.
#[no_mangle]
pub unsafe extern "C" fn qlm_scenario_set_seed(scenario: *mut QlmScenario, seed: u64) -> QlmStatus {
    guard(|| match scenario.as_mut() {
        Some(sc) => {
            sc.0.seed = Some(seed);
            QlmStatus::Ok
        }
        None => {
            set_error("null scenario");
            QlmStatus::NullArgument
        }
    })
}

/// # Safety
/// `scenario` must be null or come from this library and not yet be freed.
#[no_mangle]
pub unsafe extern "C" fn qlm_scenario_free(scenario: *mut QlmScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs the pipeline. A report handle is produced even when a stage fails;
/// the return value is then that failure's status and the report records
/// the stage.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlm_run_pipeline(scenario: *const QlmScenario, out: *mut *mut QlmReport) -> QlmStatus {
    guard(|| {
        let Some(sc) = scenario.as_ref() else {
            set_error("null scenario");
            return QlmStatus::NullArgument;
        };
        if out.is_null() {
            set_error("null output pointer");
            return QlmStatus::NullArgument;
        }
        let output = run_pipeline(&sc.0);
        let status = match &output.report.failure {
            None => QlmStatus::Ok,
            Some(f) => {
                set_error(format!("stage {:?} failed: {}", f.stage, f.message));
                f.kind.into()
            }
        };
        *out = Box::into_raw(Box::new(QlmReport(output)));
        status
    })
}

/// Command-line exit code of the run, or -1 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qlm_report_exit_code(report: *const QlmReport) -> i32 {
    report.as_ref().map_or(-1, |r| r.0.report.exit_code())
}

unsafe fn report_value(
    report: *const QlmReport,
    out: *mut f64,
    name: &str,
    pick: impl FnOnce(&PipelineOutput) -> Option<f64>,
) -> QlmStatus {
    guard(|| {
        let (Some(r), false) = (report.as_ref(), out.is_null()) else {
            set_error("null argument");
            return QlmStatus::NullArgument;
        };
        match pick(&r.0) {
            Some(v) => {
                *out = v;
                QlmStatus::Ok
            }
            None => {
                set_error(format!("{name} is not available in this report"));
                QlmStatus::Unavailable
            }
        }
    })
}

/// Quasi-local energy `E` of the boundary.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlm_report_energy(report: *const QlmReport, out: *mut f64) -> QlmStatus {
    report_value(report, out, "E", |o| o.report.energy)
}

/// Mass aspect `m(0)` at the start of the flow.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlm_report_m0(report: *const QlmReport, out: *mut f64) -> QlmStatus {
    report_value(report, out, "m0", |o| o.report.m0)
}

/// Limit `m_∞` of the mass aspect.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlm_report_m_inf(report: *const QlmReport, out: *mut f64) -> QlmStatus {
    report_value(report, out, "m_inf", |o| o.report.m_inf)
}

/// Report as pretty-printed JSON; release with [`qlm_string_free`].
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qlm_report_json(report: *const QlmReport) -> *mut c_char {
    report
        .as_ref()
        .map_or(ptr::null_mut(), |r| to_c_string(&r.0.report.to_json()))
}

/// Flow table as CSV, or null if the flow did not run; release with
/// [`qlm_string_free`].
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qlm_report_flow_csv(report: *const QlmReport) -> *mut c_char {
    report
        .as_ref()
        .and_then(|r| r.0.flow_csv.as_deref())
        .map_or(ptr::null_mut(), to_c_string)
}

/// # Safety
/// `report` must be null or come from this library and not yet be freed.
#[no_mangle]
pub unsafe extern "C" fn qlm_report_free(report: *mut QlmReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qlm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Energy `r(1 - √(1 - 2M/r))/G` of the round sphere of areal radius `r`
/// in the Schwarzschild slice of mass `M`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlm_schwarzschild_mass(mass: f64, r: f64, gravity: f64, out: *mut f64) -> QlmStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return QlmStatus::NullArgument;
        }
        match schwarzschild_mass(mass, r, gravity) {
            Ok(v) => {
                *out = v;
                QlmStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Margin `(H - c4 P)/c3 - √max(H² - P², 0)` of the pointwise boundary
/// inequality, with `c4 = ±√(1 - c3²)` signed by `sign`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlm_boundary_margin(h: f64, p: f64, c3: f64, sign: f64, out: *mut f64) -> QlmStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return QlmStatus::NullArgument;
        }
        match Lemma6Sample::new(h, p, c3, sign) {
            Ok(s) => {
                *out = lemma6_margin(&s);
                QlmStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}
