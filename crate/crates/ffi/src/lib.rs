//! C interface to `cluster_seeds`.
//!
//! Seeds and exploration reports are opaque heap handles. Every fallible call
//! returns a [`CsStatus`]; the message of the last failure on the calling
//! thread is available from [`cs_last_error_message`]. Vertex numbers and
//! permutation images are one-based, as on the command line.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::c_char;

use cluster_seeds::explore::{self, ExplorationReport, ExploreOptions, Status};
use cluster_seeds::io::{self, SeedJson};
use cluster_seeds::laurent::LaurentError;
use cluster_seeds::perm::Perm;
use cluster_seeds::quiver::QuiverError;
use cluster_seeds::seed::{LabelledSeed, Limits, SeedError};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownPreset = 3,
    OutOfRange = 4,
    FrozenVertex = 5,
    LimitExceeded = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CsLevel {
    Seed = 0,
    Quiver = 1,
}

/// Opaque labelled seed.
pub struct CsSeed {
    inner: LabelledSeed,
}

/// Opaque exploration report.
pub struct CsReport {
    inner: ExplorationReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn fail(status: CsStatus, message: impl std::fmt::Display) -> CsStatus {
    let text = CString::new(message.to_string().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
    status
}

fn seed_status(e: &SeedError) -> CsStatus {
    match e {
        SeedError::Quiver(QuiverError::VertexOutOfRange(..)) => CsStatus::OutOfRange,
        SeedError::Quiver(QuiverError::FrozenVertex(_)) | SeedError::Quiver(QuiverError::MovesFrozen(_)) => {
            CsStatus::FrozenVertex
        }
        SeedError::Quiver(QuiverError::Overflow(_)) | SeedError::Laurent(LaurentError::TermLimit { .. }) => {
            CsStatus::LimitExceeded
        }
        _ => CsStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> CsStatus) -> CsStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(CsStatus::Panic, "internal panic"))
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, CsStatus> {
    if s.is_null() {
        return Err(fail(CsStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(CsStatus::InvalidArgument, "string is not UTF-8"))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

fn put_seed(out: *mut *mut CsSeed, seed: LabelledSeed) -> CsStatus {
    // SAFETY: callers check `out` for null first.
    unsafe { *out = Box::into_raw(Box::new(CsSeed { inner: seed })) };
    CsStatus::Ok
}

/// Creates the initial seed of a built-in quiver such as `"A3"`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_seed_from_preset(name: *const c_char, out: *mut *mut CsSeed) -> CsStatus {
    guard(|| {
        if out.is_null() {
            return fail(CsStatus::NullPointer, "null output pointer");
        }
        let name = match read_str(name) {
            Ok(s) => s,
            Err(st) => return st,
        };
        match io::preset(name) {
            Some(q) => put_seed(out, LabelledSeed::initial(q)),
            None => fail(CsStatus::UnknownPreset, format!("unknown preset {name:?}")),
        }
    })
}

/// Parses a quiver or seed in the JSON format used by the command line.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_seed_from_json(json: *const c_char, out: *mut *mut CsSeed) -> CsStatus {
    guard(|| {
        if out.is_null() {
            return fail(CsStatus::NullPointer, "null output pointer");
        }
        let text = match read_str(json) {
            Ok(s) => s,
            Err(st) => return st,
        };
        match io::parse_json(text) {
            Ok(s) => put_seed(out, s),
            Err(e) => fail(CsStatus::InvalidArgument, e),
        }
    })
}

/// Number of vertices, or 0 for a null handle.
///
/// # Safety
/// `seed` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_seed_rank(seed: *const CsSeed) -> usize {
    seed.as_ref().map_or(0, |s| s.inner.rank())
}

/// Mutates `seed` in place at the one-based `vertex`.
///
/// # Safety
/// `seed` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_seed_mutate(seed: *mut CsSeed, vertex: usize) -> CsStatus {
    guard(|| {
        let Some(s) = seed.as_mut() else {
            return fail(CsStatus::NullPointer, "null seed");
        };
        if vertex == 0 || vertex > s.inner.rank() {
            return fail(CsStatus::OutOfRange, format!("vertex {vertex} out of range 1..={}", s.inner.rank()));
        }
        match s.inner.mutate_limited(vertex - 1, Limits::default()) {
            Ok(t) => {
                s.inner = t;
                CsStatus::Ok
            }
            Err(e) => fail(seed_status(&e), e),
        }
    })
}

/// Relabels `seed` in place by the permutation with one-based `images[0..len]`.
///
/// # Safety
/// `seed` must be null or a live handle; `images` must point to `len` values.
#[no_mangle]
pub unsafe extern "C" fn cs_seed_permute(seed: *mut CsSeed, images: *const usize, len: usize) -> CsStatus {
    guard(|| {
        let Some(s) = seed.as_mut() else {
            return fail(CsStatus::NullPointer, "null seed");
        };
        if images.is_null() {
            return fail(CsStatus::NullPointer, "null permutation");
        }
        let raw = std::slice::from_raw_parts(images, len);
        if len != s.inner.rank() || raw.contains(&0) {
            return fail(CsStatus::InvalidArgument, format!("expected {} one-based images", s.inner.rank()));
        }
        let p = match Perm::from_images(raw.iter().map(|i| i - 1).collect()) {
            Ok(p) => p,
            Err(e) => return fail(CsStatus::InvalidArgument, e),
        };
        match s.inner.permute(&p) {
            Ok(t) => {
                s.inner = t;
                CsStatus::Ok
            }
            Err(e) => fail(seed_status(&e), e),
        }
    })
}

/// Whether two handles hold equal labelled seeds.
///
/// # Safety
/// Both arguments must be null or live handles.
#[no_mangle]
pub unsafe extern "C" fn cs_seed_equal(a: *const CsSeed, b: *const CsSeed) -> bool {
    match (a.as_ref(), b.as_ref()) {
        (Some(a), Some(b)) => a.inner == b.inner,
        _ => false,
    }
}

/// `(quiver, (x1, ...))` as a new string; free with [`cs_string_free`].
///
/// # Safety
/// `seed` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_seed_render(seed: *const CsSeed) -> *mut c_char {
    seed.as_ref().map_or(ptr::null_mut(), |s| into_c_string(s.inner.render()))
}

/// The seed as JSON; free with [`cs_string_free`].
///
/// # Safety
/// `seed` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_seed_json(seed: *const CsSeed) -> *mut c_char {
    seed.as_ref().map_or(ptr::null_mut(), |s| {
        serde_json::to_string(&SeedJson::from_seed(&s.inner)).map_or(ptr::null_mut(), into_c_string)
    })
}

/// # Safety
/// `seed` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_seed_free(seed: *mut CsSeed) {
    if !seed.is_null() {
        drop(Box::from_raw(seed));
    }
}

/// Explores the class of `seed` up to `budget` members.
///
/// # Safety
/// `seed` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_explore(seed: *const CsSeed, budget: usize, level: CsLevel, out: *mut *mut CsReport) -> CsStatus {
    guard(|| {
        let Some(s) = seed.as_ref() else {
            return fail(CsStatus::NullPointer, "null seed");
        };
        if out.is_null() {
            return fail(CsStatus::NullPointer, "null output pointer");
        }
        let opts = ExploreOptions::with_budget(budget);
        let report = match level {
            CsLevel::Seed => explore::explore_seeds(&s.inner, opts).map(|e| e.report()),
            CsLevel::Quiver => explore::explore_quivers(s.inner.quiver(), opts).map(|e| e.report()),
        };
        match report {
            Ok(r) => {
                *out = Box::into_raw(Box::new(CsReport { inner: r }));
                CsStatus::Ok
            }
            Err(e) => fail(CsStatus::InvalidArgument, e),
        }
    })
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_report_seed_count(report: *const CsReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.seed_count)
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_report_is_closed(report: *const CsReport) -> bool {
    report.as_ref().is_some_and(|r| r.inner.status == Status::Closed)
}

/// The full report as JSON; free with [`cs_string_free`].
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_report_json(report: *const CsReport) -> *mut c_char {
    report
        .as_ref()
        .map_or(ptr::null_mut(), |r| serde_json::to_string(&r.inner).map_or(ptr::null_mut(), into_c_string))
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_report_free(report: *mut CsReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or null. The pointer is
/// owned by the library and valid until the next failing call.
#[no_mangle]
pub extern "C" fn cs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
