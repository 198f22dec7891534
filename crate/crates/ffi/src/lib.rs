//! C ABI over `bdalg`.
//!
//! Handles are opaque and owned by the caller once returned; free them with
//! the matching `*_free`. Every fallible call returns a [`BdalgStatus`] and,
//! on failure, leaves a message readable through
//! [`bdalg_last_error_message`] on the same thread.
//!
//! Points and generator lists are passed as row-major `int64_t` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bdalg::lattice_cone::{
    hilbert_basis_intersection, FgMonoid, LatticePoint, RationalCone, RationalPoint,
};
use bdalg::scenario::{self, Overrides, ScenarioError};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BdalgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    /// Scenario text is not JSON.
    Parse = 4,
    /// Scenario JSON does not match the schema.
    Schema = 5,
    Operation = 6,
    /// A coordinate does not fit in `int64_t`.
    Overflow = 7,
    OutOfRange = 8,
    Panic = 9,
}

/// Finitely generated submonoid of N^r.
pub struct BdalgMonoid {
    inner: FgMonoid,
}

/// Rational polyhedral cone in R^r.
pub struct BdalgCone {
    inner: RationalCone,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(msg).unwrap()));
}

fn fail(status: BdalgStatus, msg: impl Into<String>) -> BdalgStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> BdalgStatus) -> BdalgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            fail(BdalgStatus::Panic, msg)
        }
    }
}

fn core_error(e: bdalg::Error) -> BdalgStatus {
    let status = match e {
        bdalg::Error::Overflow(_) => BdalgStatus::Overflow,
        bdalg::Error::InvalidInput(_)
        | bdalg::Error::DimensionMismatch { .. }
        | bdalg::Error::NotStronglyConvex
        | bdalg::Error::Parse(_) => BdalgStatus::InvalidInput,
        _ => BdalgStatus::Operation,
    };
    fail(status, e.to_string())
}

unsafe fn rows<'a>(
    data: *const i64,
    count: usize,
    dim: usize,
) -> Result<Vec<&'a [i64]>, BdalgStatus> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if data.is_null() {
        return Err(fail(BdalgStatus::NullPointer, "coordinate array is null"));
    }
    let len = count
        .checked_mul(dim)
        .ok_or_else(|| fail(BdalgStatus::InvalidInput, "array length overflows"))?;
    let flat = std::slice::from_raw_parts(data, len);
    Ok(flat.chunks(dim.max(1)).take(count).collect())
}

unsafe fn point(data: *const i64, dim: usize) -> Result<LatticePoint, BdalgStatus> {
    if dim == 0 {
        return Ok(LatticePoint::zero(0));
    }
    if data.is_null() {
        return Err(fail(BdalgStatus::NullPointer, "point is null"));
    }
    Ok(LatticePoint::from_i64s(std::slice::from_raw_parts(
        data, dim,
    )))
}

macro_rules! nonnull {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(BdalgStatus::NullPointer, concat!(stringify!($p), " is null"));
        })+
    };
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bdalg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bdalg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Monoid generated by `count` points of N^`dim`.
///
/// # Safety
/// `generators` points to `count * dim` readable values; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bdalg_monoid_new(
    dim: usize,
    generators: *const i64,
    count: usize,
    out: *mut *mut BdalgMonoid,
) -> BdalgStatus {
    nonnull!(out);
    guard(|| {
        let rows = match rows(generators, count, dim) {
            Ok(r) => r,
            Err(s) => return s,
        };
        let gens = rows.into_iter().map(LatticePoint::from_i64s).collect();
        match FgMonoid::new(dim, gens) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(BdalgMonoid { inner: m }));
                BdalgStatus::Ok
            }
            Err(e) => core_error(e),
        }
    })
}

/// # Safety
/// `m` is NULL or came from this library and has not been freed.
#[no_mangle]
pub unsafe extern "C" fn bdalg_monoid_free(m: *mut BdalgMonoid) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn bdalg_monoid_dim(m: *const BdalgMonoid) -> usize {
    m.as_ref().map_or(0, |m| m.inner.dim())
}

/// # Safety
/// `m` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn bdalg_monoid_generator_count(m: *const BdalgMonoid) -> usize {
    m.as_ref().map_or(0, |m| m.inner.generators().len())
}

/// Copies generator `index` into `out` (`dim` values).
///
/// # Safety
/// `m` is a live handle; `out` has room for `dim` values.
#[no_mangle]
pub unsafe extern "C" fn bdalg_monoid_generator(
    m: *const BdalgMonoid,
    index: usize,
    out: *mut i64,
) -> BdalgStatus {
    nonnull!(m, out);
    guard(|| {
        let m = &(*m).inner;
        let Some(g) = m.generators().get(index) else {
            return fail(
                BdalgStatus::OutOfRange,
                format!("generator {index} of {}", m.generators().len()),
            );
        };
        match g.to_i64s() {
            Ok(c) => {
                std::slice::from_raw_parts_mut(out, c.len()).copy_from_slice(&c);
                BdalgStatus::Ok
            }
            Err(e) => core_error(e),
        }
    })
}

/// Whether `p` (`dim` values) lies in the monoid.
///
/// # Safety
/// `m` is a live handle; `p` has `dim` values; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bdalg_monoid_contains(
    m: *const BdalgMonoid,
    p: *const i64,
    out: *mut bool,
) -> BdalgStatus {
    nonnull!(m, out);
    guard(|| {
        let m = &(*m).inner;
        let p = match point(p, m.dim()) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match m.contains(&p) {
            Ok(b) => {
                *out = b;
                BdalgStatus::Ok
            }
            Err(e) => core_error(e),
        }
    })
}

/// Cone spanned by `count` integer rays in R^`dim`.
///
/// # Safety
/// `rays` points to `count * dim` readable values; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bdalg_cone_new(
    dim: usize,
    rays: *const i64,
    count: usize,
    out: *mut *mut BdalgCone,
) -> BdalgStatus {
    nonnull!(out);
    guard(|| {
        let rows = match rows(rays, count, dim) {
            Ok(r) => r,
            Err(s) => return s,
        };
        let gens = rows.into_iter().map(RationalPoint::from_i64s).collect();
        match RationalCone::new(dim, gens) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(BdalgCone { inner: c }));
                BdalgStatus::Ok
            }
            Err(e) => core_error(e),
        }
    })
}

/// # Safety
/// `c` is NULL or came from this library and has not been freed.
#[no_mangle]
pub unsafe extern "C" fn bdalg_cone_free(c: *mut BdalgCone) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Whether the integer point `p` lies in the cone.
///
/// # Safety
/// `c` is a live handle; `p` has `dim` values; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bdalg_cone_contains(
    c: *const BdalgCone,
    p: *const i64,
    out: *mut bool,
) -> BdalgStatus {
    nonnull!(c, out);
    guard(|| {
        let c = &(*c).inner;
        let p = match point(p, c.dim()) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match c.contains_lattice(&p) {
            Ok(b) => {
                *out = b;
                BdalgStatus::Ok
            }
            Err(e) => core_error(e),
        }
    })
}

/// Hilbert basis of S ∩ C as a new monoid handle.
///
/// # Safety
/// `s` and `c` are live handles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bdalg_hilbert_basis(
    s: *const BdalgMonoid,
    c: *const BdalgCone,
    out: *mut *mut BdalgMonoid,
) -> BdalgStatus {
    nonnull!(s, c, out);
    guard(
        || match hilbert_basis_intersection(&(*s).inner, &(*c).inner) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(BdalgMonoid { inner: m }));
                BdalgStatus::Ok
            }
            Err(e) => core_error(e),
        },
    )
}

/// Runs a scenario document and returns its JSON report.
///
/// On `BDALG_STATUS_OK`, `*report` owns a NUL-terminated string (free with
/// [`bdalg_string_free`]) and `*exit_code` is the verdict code the CLI would
/// return: 0 pass, 2 fail, 3 inconclusive. On failure `*exit_code` carries
/// the CLI's error code (64, 65 or 70) and `*report` is NULL.
///
/// # Safety
/// `json` is a NUL-terminated string; `report` and `exit_code` are writable.
#[no_mangle]
pub unsafe extern "C" fn bdalg_run_scenario_json(
    json: *const c_char,
    report: *mut *mut c_char,
    exit_code: *mut i32,
) -> BdalgStatus {
    nonnull!(json, report, exit_code);
    *report = ptr::null_mut();
    guard(|| {
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            return fail(BdalgStatus::InvalidUtf8, "scenario is not UTF-8");
        };
        match scenario::run_str(text, &Overrides::default()) {
            Ok(outcome) => {
                *exit_code = outcome.report.exit_code;
                *report = CString::new(outcome.report.to_json()).unwrap().into_raw();
                BdalgStatus::Ok
            }
            Err(e) => {
                *exit_code = e.exit_code();
                let status = match e {
                    ScenarioError::Parse { .. } => BdalgStatus::Parse,
                    ScenarioError::Schema(_) => BdalgStatus::Schema,
                    ScenarioError::Io(_) | ScenarioError::Operation(_) => BdalgStatus::Operation,
                };
                fail(status, e.to_string())
            }
        }
    })
}

/// # Safety
/// `s` is NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bdalg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
