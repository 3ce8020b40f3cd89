//! C interface to the Lyapunov search.
//!
//! Objects cross the boundary as opaque handles (`PwaPartition`,
//! `PwaResult`) that the caller releases with the matching `*_free`
//! function. Fallible calls return a [`PwaStatus`]; on failure the message
//! is available from [`pwa_last_error`] until the next failing call on the
//! same thread. Strings returned by the library are freed with
//! [`pwa_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use thiserror::Error;

use pwa_lyap::engine::{analyze, AnalysisResult, AnalysisStatus, EngineError};
use pwa_lyap::io::{self, CertificateFile, IoError};
use pwa_lyap::lyapunov::SearchConfig;
use pwa_lyap::model::validate_partition;
use pwa_lyap::{Partition, Strategy};

/// Return code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PwaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    InvalidPartition = 5,
    Solver = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PwaStrategy {
    Naive = 0,
    LyapunovBased = 1,
    VectorField = 2,
}

/// Search parameters; start from [`pwa_config_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct PwaConfig {
    pub eps1: f64,
    pub eps2: f64,
    pub zero_tolerance: f64,
    pub timeout_seconds: f64,
    pub seed: u64,
}

/// A partition with its per-cell dynamics.
pub struct PwaPartition(Partition);

/// Outcome of [`pwa_analyze`].
pub struct PwaResult {
    result: AnalysisResult,
    config: SearchConfig,
}

#[derive(Debug, Error)]
enum FfiError {
    #[error("null pointer passed as `{0}`")]
    Null(&'static str),
    #[error("{0}")]
    Argument(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("{0}")]
    Panic(String),
}

impl FfiError {
    fn status(&self) -> PwaStatus {
        match self {
            FfiError::Null(_) => PwaStatus::NullPointer,
            FfiError::Argument(_) => PwaStatus::InvalidArgument,
            FfiError::Io(IoError::Parse { .. } | IoError::Invalid { .. } | IoError::DimensionUnsupported(_)) => PwaStatus::Parse,
            FfiError::Io(_) => PwaStatus::Io,
            FfiError::Engine(EngineError::InvalidPartition(_)) => PwaStatus::InvalidPartition,
            FfiError::Engine(_) => PwaStatus::Solver,
            FfiError::Panic(_) => PwaStatus::Panic,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, turning errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), FfiError>) -> PwaStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|payload| {
        let msg = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".into());
        Err(FfiError::Panic(msg))
    });
    match outcome {
        Ok(()) => PwaStatus::Ok,
        Err(e) => {
            let status = e.status();
            set_last_error(e.to_string());
            status
        }
    }
}

unsafe fn str_arg<'a>(s: *const c_char, name: &'static str) -> Result<&'a str, FfiError> {
    if s.is_null() {
        return Err(FfiError::Null(name));
    }
    CStr::from_ptr(s).to_str().map_err(|_| FfiError::Argument(format!("`{name}` is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, FfiError> {
    p.as_ref().ok_or(FfiError::Null(name))
}

fn out_arg<T>(out: *mut T, name: &'static str) -> Result<&'static mut T, FfiError> {
    // SAFETY: the caller promises `out` is valid for writes when non-null
    unsafe { out.as_mut() }.ok_or(FfiError::Null(name))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pwa_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pwa_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn pwa_config_default() -> PwaConfig {
    let d = SearchConfig::default();
    PwaConfig { eps1: d.eps1, eps2: d.eps2, zero_tolerance: d.zero_tolerance, timeout_seconds: d.timeout_seconds, seed: d.seed }
}

/// Loads a partition from a JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pwa_partition_load(path: *const c_char, out: *mut *mut PwaPartition) -> PwaStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let p = io::load_partition(Path::new(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(PwaPartition(p)));
        Ok(())
    })
}

/// Parses a partition from a JSON string.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pwa_partition_parse(json: *const c_char, out: *mut *mut PwaPartition) -> PwaStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let p = io::parse_partition(str_arg(json, "json")?, "<string>")?;
        *out = Box::into_raw(Box::new(PwaPartition(p)));
        Ok(())
    })
}

/// Writes one of the built-in benchmarks ("flower", "canonical_4d",
/// "mpc_plant_4d") to `out`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pwa_partition_benchmark(name: *const c_char, out: *mut *mut PwaPartition) -> PwaStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let name = str_arg(name, "name")?;
        let p = pwa_lyap::benchmarks::shipped_benchmarks()
            .into_iter()
            .find(|(n, _)| *n == name)
            .map(|(_, p)| p)
            .ok_or_else(|| FfiError::Argument(format!("unknown benchmark `{name}`")))?;
        *out = Box::into_raw(Box::new(PwaPartition(p)));
        Ok(())
    })
}

/// # Safety
/// `p` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn pwa_partition_free(p: *mut PwaPartition) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// State dimension, or 0 for NULL.
///
/// # Safety
/// `p` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pwa_partition_dim(p: *const PwaPartition) -> usize {
    p.as_ref().map_or(0, |p| p.0.dim())
}

/// # Safety
/// `p` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pwa_partition_num_cells(p: *const PwaPartition) -> usize {
    p.as_ref().map_or(0, |p| p.0.num_cells())
}

/// # Safety
/// `p` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pwa_partition_num_vertices(p: *const PwaPartition) -> usize {
    p.as_ref().map_or(0, |p| p.0.vertices().len())
}

/// Number of well-formedness violations (0 means the partition is valid).
///
/// # Safety
/// `p` must be a live handle and `count` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pwa_partition_validate(p: *const PwaPartition, count: *mut usize) -> PwaStatus {
    guard(|| {
        let p = ref_arg(p, "partition")?;
        *out_arg(count, "count")? = validate_partition(&p.0).len();
        Ok(())
    })
}

/// Runs the search. A timed-out search still succeeds; query its status
/// with [`pwa_result_is_valid`].
///
/// # Safety
/// `p` must be a live handle, `config` NULL (defaults) or valid, and `out`
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pwa_analyze(
    p: *const PwaPartition,
    strategy: PwaStrategy,
    config: *const PwaConfig,
    out: *mut *mut PwaResult,
) -> PwaStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let p = ref_arg(p, "partition")?;
        let c = config.as_ref().copied().unwrap_or_else(|| pwa_config_default());
        let config = SearchConfig {
            eps1: c.eps1,
            eps2: c.eps2,
            zero_tolerance: c.zero_tolerance,
            timeout_seconds: c.timeout_seconds,
            seed: c.seed,
            ..SearchConfig::default()
        };
        let strategy = match strategy {
            PwaStrategy::Naive => Strategy::Naive,
            PwaStrategy::LyapunovBased => Strategy::LyapunovBased,
            PwaStrategy::VectorField => Strategy::VectorField,
        };
        let result = analyze(&p.0, strategy, &config)?;
        *out = Box::into_raw(Box::new(PwaResult { result, config }));
        Ok(())
    })
}

/// # Safety
/// `r` must come from [`pwa_analyze`] and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn pwa_result_free(r: *mut PwaResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// 1 if a certified Lyapunov function was found, 0 otherwise (and for NULL).
///
/// # Safety
/// `r` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pwa_result_is_valid(r: *const PwaResult) -> i32 {
    r.as_ref().map_or(0, |r| (r.result.status == AnalysisStatus::Valid) as i32)
}

/// # Safety
/// `r` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pwa_result_iterations(r: *const PwaResult) -> usize {
    r.as_ref().map_or(0, |r| r.result.iterations())
}

/// Cells of the final partition.
///
/// # Safety
/// `r` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pwa_result_num_cells(r: *const PwaResult) -> usize {
    r.as_ref().map_or(0, |r| r.result.final_cells())
}

/// Wall-clock seconds spent in the search.
///
/// # Safety
/// `r` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pwa_result_elapsed(r: *const PwaResult) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.result.elapsed)
}

/// Final partition as a new handle.
///
/// # Safety
/// `r` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pwa_result_partition(r: *const PwaResult, out: *mut *mut PwaPartition) -> PwaStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let r = ref_arg(r, "result")?;
        *out = Box::into_raw(Box::new(PwaPartition(r.result.partition.clone())));
        Ok(())
    })
}

/// Evaluates `V(x)` for a point `x` of length `dim`. Fails when the search
/// produced no candidate or `x` lies outside the domain.
///
/// # Safety
/// `r` must be a live handle, `x` point to `dim` doubles and `value` be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pwa_result_value(r: *const PwaResult, x: *const f64, dim: usize, value: *mut f64) -> PwaStatus {
    guard(|| {
        let r = ref_arg(r, "result")?;
        if x.is_null() {
            return Err(FfiError::Null("x"));
        }
        let value = out_arg(value, "value")?;
        let p = &r.result.partition;
        if dim != p.dim() {
            return Err(FfiError::Argument(format!("point has dimension {dim}, partition has {}", p.dim())));
        }
        let x = std::slice::from_raw_parts(x, dim);
        let cand = r.result.candidate.as_ref().ok_or_else(|| FfiError::Argument("search produced no candidate".into()))?;
        let cell = p
            .cells()
            .iter()
            .find(|c| pwa_lyap::geometry::contains_point(&p.cell_coords(c), x))
            .ok_or_else(|| FfiError::Argument("point lies outside the partition".into()))?;
        *value = cand.value(cell.id, x).expect("candidate covers every cell");
        Ok(())
    })
}

/// The certificate as a JSON string; release it with [`pwa_string_free`].
///
/// # Safety
/// `r` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pwa_result_certificate_json(r: *const PwaResult, out: *mut *mut c_char) -> PwaStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let r = ref_arg(r, "result")?;
        let cert = CertificateFile::from_result(&r.result, &r.config);
        let text = serde_json::to_string_pretty(&cert).expect("certificate serializes");
        *out = into_c_string(text);
        Ok(())
    })
}

/// Writes `<stem>.final.json` and `<stem>.certificate.json` into `dir`.
///
/// # Safety
/// `r` must be a live handle; `dir` and `stem` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn pwa_result_save(r: *const PwaResult, dir: *const c_char, stem: *const c_char) -> PwaStatus {
    guard(|| {
        let r = ref_arg(r, "result")?;
        let dir = Path::new(str_arg(dir, "dir")?);
        let stem = str_arg(stem, "stem")?;
        io::save_partition(&r.result.partition, &dir.join(format!("{stem}.final.json")))?;
        io::save_certificate(&CertificateFile::from_result(&r.result, &r.config), &dir.join(format!("{stem}.certificate.json")))?;
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn pwa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
