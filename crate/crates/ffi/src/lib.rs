//! C ABI over `delone_core`.
//!
//! Every fallible call returns a [`DeloneStatus`]; on failure the message is
//! available from [`delone_last_error`] on the same thread. Handles are opaque
//! and must be released with the matching `*_free` function. Panics never cross
//! the boundary; they surface as `DELONE_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use delone_core::atlas::compute_atlas;
use delone_core::contfrac::ContinuedFraction;
use delone_core::pointset::{read_point_set, AnyPointSet};
use delone_core::repetitivity::repetitivity_function;
use delone_core::{Error, ExactPointSet, PointCloud, PointSetSource, Region};

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeloneStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Malformed JSON or a document that does not match the expected shape.
    Parse = 3,
    /// The window or work budget is too small for the request.
    Budget = 4,
    InsufficientData = 5,
    /// A continued fraction ran out of terms, or the geometry is degenerate.
    Numeric = 6,
    /// The caller's output buffer is too short.
    BufferTooSmall = 7,
    Internal = 8,
}

/// A finite window of a point set (exact or imported).
pub struct DeloneSet {
    inner: AnyPointSet,
}

/// Repetitivity bracket `m_lower <= M(T) <= m_upper` with the patch-class count found.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct DeloneBracket {
    pub t: f64,
    pub m_lower: f64,
    pub m_upper: f64,
    pub n_lower: usize,
    pub flagged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(DeloneStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidArgument(_) => DeloneStatus::InvalidArgument,
            Error::Schema(_) | Error::Json(_) => DeloneStatus::Parse,
            Error::InsufficientData(_) => DeloneStatus::InsufficientData,
            Error::WindowTooSmall(_)
            | Error::WindowIncomplete(_)
            | Error::InsufficientWindow(_)
            | Error::ResourceLimit(_)
            | Error::BudgetExhausted(_) => DeloneStatus::Budget,
            Error::NeedsMoreTerms(_) | Error::DegenerateGeometry(_) => DeloneStatus::Numeric,
            Error::Io(_) => DeloneStatus::Internal,
        };
        Fail(status, e.to_string())
    }
}

fn fail(status: DeloneStatus, msg: impl Into<String>) -> Fail {
    Fail(status, msg.into())
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DeloneStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DeloneStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            DeloneStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(fail(DeloneStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        fail(
            DeloneStatus::InvalidArgument,
            format!("{what} is not UTF-8"),
        )
    })
}

unsafe fn set_arg<'a>(p: *const DeloneSet) -> Result<&'a DeloneSet, Fail> {
    p.as_ref()
        .ok_or_else(|| fail(DeloneStatus::NullPointer, "set handle is null"))
}

fn exact(set: &DeloneSet) -> Result<&ExactPointSet, Fail> {
    match &set.inner {
        AnyPointSet::Exact(s) => Ok(s),
        AnyPointSet::Float(_) => Err(fail(
            DeloneStatus::InvalidArgument,
            "this analysis needs an exact (address-carrying) set",
        )),
    }
}

fn out_arg<T>(p: *mut T) -> Result<(), Fail> {
    if p.is_null() {
        Err(fail(DeloneStatus::NullPointer, "output pointer is null"))
    } else {
        Ok(())
    }
}

fn into_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| fail(DeloneStatus::Internal, "string contains a nul byte"))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn delone_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Materializes the set described by `descriptor_json` (a generator descriptor
/// such as `{"construction": "integer-lattice", "n": 2}`) in the cube
/// `[-half_side, half_side]^n`.
///
/// # Safety
/// `descriptor_json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn delone_set_generate(
    descriptor_json: *const c_char,
    half_side: f64,
    out: *mut *mut DeloneSet,
) -> DeloneStatus {
    guard(|| {
        out_arg(out)?;
        let text = str_arg(descriptor_json, "descriptor")?;
        let source: PointSetSource = serde_json::from_str(text).map_err(Error::from)?;
        let region = Region::centered_cube(source.dimension(), half_side)?;
        let set = source.materialize(&region)?;
        *out = Box::into_raw(Box::new(DeloneSet {
            inner: AnyPointSet::Exact(set),
        }));
        Ok(())
    })
}

/// Reads a point-set document (exact or float) as written by [`delone_set_to_json`].
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn delone_set_from_json(
    json: *const c_char,
    out: *mut *mut DeloneSet,
) -> DeloneStatus {
    guard(|| {
        out_arg(out)?;
        let inner = read_point_set(str_arg(json, "document")?)?;
        *out = Box::into_raw(Box::new(DeloneSet { inner }));
        Ok(())
    })
}

/// # Safety
/// `set` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn delone_set_free(set: *mut DeloneSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

fn cloud(set: &DeloneSet) -> &dyn PointCloud {
    match &set.inner {
        AnyPointSet::Exact(s) => s,
        AnyPointSet::Float(s) => s,
    }
}

/// Number of points; 0 for a null handle.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn delone_set_len(set: *const DeloneSet) -> usize {
    set.as_ref().map_or(0, |s| cloud(s).len())
}

/// Ambient dimension; 0 for a null handle.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn delone_set_dimension(set: *const DeloneSet) -> usize {
    set.as_ref().map_or(0, |s| cloud(s).dimension())
}

/// Copies row-major coordinates into `buf`, which must hold `len * dimension` doubles.
///
/// # Safety
/// `buf` must be valid for `buf_len` writes.
#[no_mangle]
pub unsafe extern "C" fn delone_set_positions(
    set: *const DeloneSet,
    buf: *mut f64,
    buf_len: usize,
) -> DeloneStatus {
    guard(|| {
        let pos = cloud(set_arg(set)?).flat_positions();
        out_arg(buf)?;
        if buf_len < pos.len() {
            return Err(fail(
                DeloneStatus::BufferTooSmall,
                format!("need {} doubles, got {buf_len}", pos.len()),
            ));
        }
        ptr::copy_nonoverlapping(pos.as_ptr(), buf, pos.len());
        Ok(())
    })
}

/// Serializes the set; release the string with [`delone_string_free`].
///
/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn delone_set_to_json(
    set: *const DeloneSet,
    out: *mut *mut c_char,
) -> DeloneStatus {
    guard(|| {
        out_arg(out)?;
        let doc = match &set_arg(set)?.inner {
            AnyPointSet::Exact(s) => s.to_document(),
            AnyPointSet::Float(s) => s.to_document(),
        };
        *out = into_c_string(serde_json::to_string(&doc).map_err(Error::from)?)?;
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn delone_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Number of `T`-patch classes among points whose `T`-ball lies in the window.
/// `flagged` (optional) reports distances within tolerance of `T`.
///
/// # Safety
/// `set` must be a live handle; `count` must be writable; `flagged` may be null.
#[no_mangle]
pub unsafe extern "C" fn delone_atlas_count(
    set: *const DeloneSet,
    t: f64,
    count: *mut usize,
    flagged: *mut bool,
) -> DeloneStatus {
    guard(|| {
        out_arg(count)?;
        let atlas = compute_atlas(exact(set_arg(set)?)?, t)?;
        *count = atlas.count();
        if !flagged.is_null() {
            *flagged = atlas.is_flagged();
        }
        Ok(())
    })
}

/// Certified bracket on the repetitivity function at radius `t`, using the default resolution.
///
/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn delone_repetitivity(
    set: *const DeloneSet,
    t: f64,
    out: *mut DeloneBracket,
) -> DeloneStatus {
    guard(|| {
        out_arg(out)?;
        let r = repetitivity_function(exact(set_arg(set)?)?, t, None)?;
        *out = DeloneBracket {
            t: r.t,
            m_lower: r.m_lower,
            m_upper: r.m_upper,
            n_lower: r.n_lower,
            flagged: r.flagged,
        };
        Ok(())
    })
}

/// Recurrence function of the Sturmian word with slope `alpha`, as a decimal
/// string (it can exceed 64 bits). `alpha` uses the same syntax as the CLI,
/// e.g. `golden` or `cf:1,2,[3]`.
///
/// # Safety
/// `alpha` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn delone_recurrence_formula(
    alpha: *const c_char,
    l: u64,
    out: *mut *mut c_char,
) -> DeloneStatus {
    guard(|| {
        out_arg(out)?;
        let cf: ContinuedFraction = str_arg(alpha, "alpha")?.parse()?;
        *out = into_c_string(cf.recurrence_formula(l)?.to_string())?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        unsafe {
            CStr::from_ptr(delone_last_error())
                .to_string_lossy()
                .into_owned()
        }
    }

    #[test]
    fn status_and_message_for_bad_descriptor() {
        let mut h = ptr::null_mut();
        let d = CString::new(r#"{"construction": "nope"}"#).unwrap();
        let s = unsafe { delone_set_generate(d.as_ptr(), 3.0, &mut h) };
        assert_eq!(s, DeloneStatus::Parse);
        assert!(h.is_null());
        assert!(last_error().contains("nope"));
    }

    #[test]
    fn success_clears_last_error() {
        let a = CString::new("").unwrap();
        let mut out = ptr::null_mut();
        unsafe {
            assert_ne!(
                delone_recurrence_formula(a.as_ptr(), 1, &mut out),
                DeloneStatus::Ok
            );
            assert!(!delone_last_error().is_null());
            let g = CString::new("golden").unwrap();
            assert_eq!(
                delone_recurrence_formula(g.as_ptr(), 1, &mut out),
                DeloneStatus::Ok
            );
            assert!(delone_last_error().is_null());
            delone_string_free(out);
        }
    }
}
