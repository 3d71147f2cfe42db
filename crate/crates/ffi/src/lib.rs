//! C ABI over `superp2`.
//!
//! Every entry point returns an [`Sp2Status`]. Outputs go through pointer
//! arguments and are written only on success. On failure a message is kept
//! per thread and can be read with [`sp2_last_error`]. Strings handed out by
//! this library must be released with [`sp2_string_free`], and handles with
//! their matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use superp2::atlas::{extract_omega, verify_cocycle, Atlas};
use superp2::cli::{self, CliError};
use superp2::cohomology::{self, SheafExpr};
use superp2::grassmannian::{GrassDescriptor, GrassError, Grassmannian};
use superp2::p2family::{self, FamilyParams, P2Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sp2Status {
    Ok = 0,
    /// A verification ran and reported a failure.
    CheckFailed = 1,
    /// Bad arguments: malformed rational, descriptor, expression, flags.
    Usage = 2,
    CapExceeded = 3,
    NullPointer = 4,
    InvalidUtf8 = 5,
    /// Computation error or caught panic.
    Internal = 6,
}

/// The P2 family at a fixed or formal lambda.
pub struct Sp2Family {
    params: FamilyParams,
    atlas: Atlas,
}

/// A super Grassmannian with all big cells built.
pub struct Sp2Grassmannian {
    inner: Grassmannian,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Fail(Sp2Status, String);

impl From<CliError> for Fail {
    fn from(e: CliError) -> Self {
        let s = match e {
            CliError::Usage(_) => Sp2Status::Usage,
            CliError::Cap(_) => Sp2Status::CapExceeded,
            CliError::Failed(_) => Sp2Status::Internal,
        };
        Fail(s, e.to_string())
    }
}

impl From<GrassError> for Fail {
    fn from(e: GrassError) -> Self {
        let s = match e {
            GrassError::CapExceeded { .. } => Sp2Status::CapExceeded,
            GrassError::Invalid(_) => Sp2Status::Usage,
            _ => Sp2Status::Internal,
        };
        Fail(s, e.to_string())
    }
}

impl From<P2Error> for Fail {
    fn from(e: P2Error) -> Self {
        let s = match e {
            P2Error::NeedsLambda(_) | P2Error::Invalid(_) => Sp2Status::Usage,
            _ => Sp2Status::Internal,
        };
        Fail(s, e.to_string())
    }
}

fn internal(e: impl std::fmt::Display) -> Fail {
    Fail(Sp2Status::Internal, e.to_string())
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> Sp2Status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            Sp2Status::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("panic inside superp2");
            Sp2Status::Internal
        }
    }
}

fn nonnull<T>(p: *const T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail(Sp2Status::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    nonnull(p, what)?;
    CStr::from_ptr(p).to_str().map_err(|_| Fail(Sp2Status::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize")
}

fn into_c(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s).map(CString::into_raw).map_err(internal)
}

/// Message for the last failing call on this thread; empty after a success.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn sp2_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` is null or a string returned by this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn sp2_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Run a command line (without the program name) and return its JSON report.
/// The report is written even when a check fails, in which case the status
/// is `CheckFailed`.
///
/// # Safety
/// `argv` points to `argc` valid NUL-terminated strings; `out_json` is a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp2_run(argc: usize, argv: *const *const c_char, out_json: *mut *mut c_char) -> Sp2Status {
    let mut failed = false;
    let st = guard(|| {
        nonnull(out_json, "out_json")?;
        if argc > 0 {
            nonnull(argv, "argv")?;
        }
        let args =
            (0..argc).map(|k| read_str(*argv.add(k), "argument").map(str::to_owned)).collect::<Result<Vec<_>, _>>()?;
        let (report, _) = cli::run_args(args)?;
        failed = report.failed();
        *out_json = into_c(pretty(&report.to_json()))?;
        Ok(())
    });
    if st == Sp2Status::Ok && failed {
        set_error("a check failed; see the report");
        return Sp2Status::CheckFailed;
    }
    st
}

/// Build the family. `lambda` is an exact rational such as `"-3/2"`, or null
/// for a formal parameter.
///
/// # Safety
/// `lambda` is null or a valid string; `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp2_family_new(lambda: *const c_char, out: *mut *mut Sp2Family) -> Sp2Status {
    guard(|| {
        nonnull(out, "out")?;
        let params = if lambda.is_null() {
            FamilyParams::formal()
        } else {
            FamilyParams::at(cli::parse_lambda(read_str(lambda, "lambda")?)?)
        };
        let atlas = p2family::build_family_atlas(&params)?;
        *out = Box::into_raw(Box::new(Sp2Family { params, atlas }));
        Ok(())
    })
}

/// # Safety
/// `h` is null or a handle from [`sp2_family_new`] that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn sp2_family_free(h: *mut Sp2Family) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` is a live family handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp2_family_cocycle_ok(h: *const Sp2Family, out: *mut bool) -> Sp2Status {
    guard(|| {
        nonnull(h, "family")?;
        nonnull(out, "out")?;
        *out = verify_cocycle(&(*h).atlas).passed();
        Ok(())
    })
}

/// Whether the odd-odd cochain of the atlas is nonzero (the family is
/// non-split exactly when it is).
///
/// # Safety
/// `h` is a live family handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp2_family_omega_nonzero(h: *const Sp2Family, out: *mut bool) -> Sp2Status {
    guard(|| {
        nonnull(h, "family")?;
        nonnull(out, "out")?;
        *out = !extract_omega(&(*h).atlas).map_err(internal)?.is_zero();
        Ok(())
    })
}

/// Atlas as JSON; free with [`sp2_string_free`].
///
/// # Safety
/// `h` is a live family handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp2_family_atlas_json(h: *const Sp2Family, out_json: *mut *mut c_char) -> Sp2Status {
    guard(|| {
        nonnull(h, "family")?;
        nonnull(out_json, "out_json")?;
        *out_json = into_c(pretty(&(*h).atlas.to_json()))?;
        Ok(())
    })
}

/// Dimension of the solved space of global vector fields. Needs a numeric
/// lambda.
///
/// # Safety
/// `h` is a live family handle; `even` and `odd` are valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sp2_family_sections_dims(
    h: *const Sp2Family,
    degree_bound: u32,
    even: *mut usize,
    odd: *mut usize,
) -> Sp2Status {
    guard(|| {
        nonnull(h, "family")?;
        nonnull(even, "even")?;
        nonnull(odd, "odd")?;
        let (e, o) = p2family::solve_global_sections(&(*h).params, degree_bound)?.dims();
        *even = e;
        *odd = o;
        Ok(())
    })
}

/// # Safety
/// `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp2_grass_new(
    d0: usize,
    d1: usize,
    n: usize,
    m: usize,
    cap: usize,
    out: *mut *mut Sp2Grassmannian,
) -> Sp2Status {
    guard(|| {
        nonnull(out, "out")?;
        let inner = Grassmannian::new(GrassDescriptor::new(d0, d1, n, m)?, cap)?;
        *out = Box::into_raw(Box::new(Sp2Grassmannian { inner }));
        Ok(())
    })
}

/// # Safety
/// `h` is null or a handle from [`sp2_grass_new`] that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn sp2_grass_free(h: *mut Sp2Grassmannian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` is a live handle; `cells`, `even_dim` and `odd_dim` are valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sp2_grass_info(
    h: *const Sp2Grassmannian,
    cells: *mut usize,
    even_dim: *mut usize,
    odd_dim: *mut usize,
) -> Sp2Status {
    guard(|| {
        nonnull(h, "grassmannian")?;
        nonnull(cells, "cells")?;
        nonnull(even_dim, "even_dim")?;
        nonnull(odd_dim, "odd_dim")?;
        let g = &(*h).inner;
        let (e, o) = g.desc.dimension();
        *cells = g.cells.len();
        *even_dim = e;
        *odd_dim = o;
        Ok(())
    })
}

/// Check the cocycle condition on every triple of cells.
///
/// # Safety
/// `h` is a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp2_grass_cocycle_ok(h: *const Sp2Grassmannian, out: *mut bool) -> Sp2Status {
    guard(|| {
        nonnull(h, "grassmannian")?;
        nonnull(out, "out")?;
        let a = (*h).inner.build_atlas()?;
        *out = verify_cocycle(&a).passed();
        Ok(())
    })
}

/// `h^q` of a sheaf expression such as `"T(-3) on P2"`.
///
/// # Safety
/// `expr` is a valid string; `even` and `odd` are valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sp2_cohomology(expr: *const c_char, q: usize, even: *mut usize, odd: *mut usize) -> Sp2Status {
    guard(|| {
        nonnull(even, "even")?;
        nonnull(odd, "odd")?;
        let e = SheafExpr::parse(read_str(expr, "expr")?).map_err(|e| Fail(Sp2Status::Usage, e.to_string()))?;
        let d = cohomology::eval_sheaf(&e, q).map_err(|e| match e {
            cohomology::CohomError::QOutOfRange { .. } => Fail(Sp2Status::Usage, e.to_string()),
            e => internal(e),
        })?;
        *even = d.even;
        *odd = d.odd;
        Ok(())
    })
}
