//! C ABI over `jetgeom`.
//!
//! Every function returns an [`MlgStatus`]. On failure a message is kept per
//! thread and can be read with [`mlg_last_error_message`]. Strings handed out
//! by the library must be released with [`mlg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use jetgeom::connection::{GeometryError, GeometryOptions};
use jetgeom::linalg::{invert_symmetric, LinalgError};
use jetgeom::report::{point_report, verify, What};
use jetgeom::sampling::{sample_points, SampleBox};
use jetgeom::scenario::{load_scenario, JetPoint, Scenario, ScenarioError};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Scenario = 4,
    Evaluation = 5,
    Singular = 6,
    Io = 7,
    Panic = 8,
}

/// Opaque scenario handle.
pub struct MlgScenario {
    inner: Scenario,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(MlgStatus, String);

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        let code = match e {
            ScenarioError::Io(_) => MlgStatus::Io,
            ScenarioError::Document(_) | ScenarioError::Expr { .. } => MlgStatus::Parse,
            _ => MlgStatus::Scenario,
        };
        Failure(code, e.to_string())
    }
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        let code = match e {
            GeometryError::Singular { .. } | GeometryError::NotRegular { .. } => MlgStatus::Singular,
            _ => MlgStatus::Evaluation,
        };
        Failure(code, e.to_string())
    }
}

impl From<LinalgError> for Failure {
    fn from(e: LinalgError) -> Self {
        let code = match e {
            LinalgError::Singular | LinalgError::IllConditioned(_) => MlgStatus::Singular,
            _ => MlgStatus::Evaluation,
        };
        Failure(code, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MlgStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MlgStatus::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            MlgStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(MlgStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(MlgStatus::InvalidUtf8, format!("`{what}`: {e}")))
}

unsafe fn scenario_ref<'a>(s: *const MlgScenario) -> Result<&'a Scenario, Failure> {
    s.as_ref().map(|h| &h.inner).ok_or_else(|| null("scenario"))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|e| Failure(MlgStatus::Evaluation, e.to_string()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn emit_scenario(out: *mut *mut MlgScenario, s: Scenario) {
    *out = Box::into_raw(Box::new(MlgScenario { inner: s }));
}

/// Parses a TOML scenario document.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mlg_scenario_from_str(toml: *const c_char, out: *mut *mut MlgScenario) -> MlgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = read_str(toml, "toml")?;
        emit_scenario(out, Scenario::from_toml_str(text)?);
        Ok(())
    })
}

/// Loads a TOML scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mlg_scenario_from_file(path: *const c_char, out: *mut *mut MlgScenario) -> MlgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let p = read_str(path, "path")?;
        emit_scenario(out, load_scenario(Path::new(p))?);
        Ok(())
    })
}

/// Releases a scenario. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mlg_scenario_free(s: *mut MlgScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Writes `p = dim T` and `n = dim M`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mlg_dims(s: *const MlgScenario, p: *mut usize, n: *mut usize) -> MlgStatus {
    guard(|| {
        let sc = scenario_ref(s)?;
        if p.is_null() || n.is_null() {
            return Err(null("p/n"));
        }
        *p = sc.dims.p;
        *n = sc.dims.n;
        Ok(())
    })
}

fn parse_what(w: &str) -> Result<Vec<What>, Failure> {
    if w == "all" {
        return Ok(What::ALL.to_vec());
    }
    <What as clap::ValueEnum>::from_str(w, true).map(|x| vec![x]).map_err(|_| {
        Failure(MlgStatus::Parse, format!("unknown section `{w}`; expected connection, torsion, curvature, maxwell, einstein, conserve or all"))
    })
}

/// JSON geometry report at one point.
///
/// `coords` holds `p + n + n·p` values: `t^α`, then `x^i`, then `x^i_α` with
/// `α` varying fastest. `what` is a section name or `"all"`. A non-positive
/// `tol` selects the scenario tolerance.
///
/// # Safety
/// `coords` must point to `len` doubles; strings must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mlg_geometry_report(
    s: *const MlgScenario,
    what: *const c_char,
    coords: *const f64,
    len: usize,
    tol: f64,
    out: *mut *mut c_char,
) -> MlgStatus {
    guard(|| {
        let sc = scenario_ref(s)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let whats = parse_what(read_str(what, "what")?)?;
        if coords.is_null() {
            return Err(null("coords"));
        }
        let d = sc.dims;
        if len != d.nvars() {
            return Err(Failure(MlgStatus::Evaluation, format!("expected {} coordinates, got {len}", d.nvars())));
        }
        let c = std::slice::from_raw_parts(coords, len);
        let at = JetPoint::new(
            c[..d.p].to_vec(),
            c[d.p..d.p + d.n].to_vec(),
            (0..d.n).map(|i| (0..d.p).map(|a| c[d.v(i, a)]).collect()).collect(),
        );
        let tol = if tol > 0.0 { tol } else { sc.tol };
        let r = point_report(sc, &at, &whats, tol, &GeometryOptions::default())?;
        write_string(out, serde_json::to_string(&r).map_err(|e| Failure(MlgStatus::Evaluation, e.to_string()))?)
    })
}

/// Runs the verification suite on `count` seeded random points in `[-1, 1]`.
///
/// `pass` receives 1 when every class passes. `out` receives the JSON suite
/// summary and may be null.
///
/// # Safety
/// `pass` must be writable; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn mlg_verify(
    s: *const MlgScenario,
    count: usize,
    seed: u64,
    tol: f64,
    pass: *mut c_int,
    out: *mut *mut c_char,
) -> MlgStatus {
    guard(|| {
        let sc = scenario_ref(s)?;
        if pass.is_null() {
            return Err(null("pass"));
        }
        let pts = sample_points(sc, count, seed, SampleBox::default()).map_err(|e| Failure(MlgStatus::Evaluation, e.to_string()))?;
        let tol = if tol > 0.0 { tol } else { sc.tol };
        let r = verify(sc, &pts, tol, &GeometryOptions::default())?;
        *pass = c_int::from(r.pass);
        if !out.is_null() {
            write_string(out, serde_json::to_string(&r).map_err(|e| Failure(MlgStatus::Evaluation, e.to_string()))?)?;
        }
        Ok(())
    })
}

/// Inverts a symmetric `k×k` row-major matrix into `out`.
///
/// # Safety
/// `m` and `out` must each hold `k·k` doubles.
#[no_mangle]
pub unsafe extern "C" fn mlg_invert_symmetric(m: *const f64, k: usize, out: *mut f64) -> MlgStatus {
    guard(|| {
        if m.is_null() || out.is_null() {
            return Err(null("m/out"));
        }
        let src = std::slice::from_raw_parts(m, k * k);
        let rows: Vec<Vec<f64>> = src.chunks(k.max(1)).take(k).map(<[f64]>::to_vec).collect();
        let inv = invert_symmetric(&rows)?;
        let dst = std::slice::from_raw_parts_mut(out, k * k);
        for (i, row) in inv.iter().enumerate() {
            dst[i * k..(i + 1) * k].copy_from_slice(row);
        }
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mlg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failure on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn mlg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
