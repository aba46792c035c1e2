//! C ABI for `normone`.
//!
//! Objects are opaque handles owned by the caller and released with the
//! matching `_free` function. Every fallible call returns a
//! [`NormoneStatus`]; on failure [`normone_last_error`] describes the cause.
//! Strings returned through out-parameters are heap allocated and must be
//! released with [`normone_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use normone::cohomology::reports_from_json;
use normone::construction::{generate, ChainResult, GenerateOptions, Strategy, Verification};
use normone::ring_instances::{check_numeric, random_instance, InstanceKind};
use normone::{monomial_count, CountMode, Error, Poly, SubgroupSpec};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormoneStatus {
    Ok = 0,
    /// A parameter is out of range or inconsistent.
    InvalidArgument = 1,
    /// An input document or string could not be parsed.
    Parse = 2,
    /// A mathematical precondition failed.
    Precondition = 3,
    /// A required pointer was null.
    NullPointer = 4,
    /// An exact integer computation overflowed its fixed-width bound.
    Overflow = 5,
    /// An internal panic was caught at the boundary.
    Panic = 6,
}

/// A polynomial in the shifts `σ^j(x)`.
pub struct NormonePoly(Poly);

/// A generated chain of lift steps.
pub struct NormoneChain(ChainResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: NormoneStatus, msg: impl Into<String>) -> NormoneStatus {
    set_error(msg);
    status
}

impl From<&Error> for NormoneStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parse { .. } => NormoneStatus::Parse,
            Error::Precondition { .. } => NormoneStatus::Precondition,
            Error::Overflow(_) => NormoneStatus::Overflow,
            Error::NotPrime(_) | Error::Parameter(_) | Error::ContextMismatch(..) => NormoneStatus::InvalidArgument,
        }
    }
}

type Outcome = Result<(), NormoneStatus>;

fn lib_err(e: Error) -> NormoneStatus {
    fail((&e).into(), e.to_string())
}

/// Runs `f`, converting panics into [`NormoneStatus::Panic`].
fn guard(f: impl FnOnce() -> Outcome) -> NormoneStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NormoneStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(NormoneStatus::Panic, format!("panic: {msg}"))
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, NormoneStatus> {
    p.as_ref().ok_or_else(|| fail(NormoneStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, NormoneStatus> {
    p.as_mut().ok_or_else(|| fail(NormoneStatus::NullPointer, format!("{what} is null")))
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, NormoneStatus> {
    if s.is_null() {
        return Err(fail(NormoneStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(NormoneStatus::Parse, format!("{what} is not UTF-8")))
}

fn into_c_string(s: String) -> Result<*mut c_char, NormoneStatus> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| fail(NormoneStatus::InvalidArgument, "string contains a NUL byte"))
}

/// The message for the last failed call on this thread, or null. Release
/// with [`normone_string_free`].
#[no_mangle]
pub extern "C" fn normone_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |m| m.clone().into_raw()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn normone_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds the norm-one element for `Z/p^n`.
///
/// `strategy` is `"unit"`, `"doubling"`, or a list such as `"2:1,4:2"`;
/// null means doubling. With `verify` set, every step is certified.
///
/// # Safety
/// `strategy` is null or a NUL-terminated string; `out_chain` is writable.
#[no_mangle]
pub unsafe extern "C" fn normone_generate(
    p: u32,
    n: u32,
    strategy: *const c_char,
    verify: bool,
    out_chain: *mut *mut NormoneChain,
) -> NormoneStatus {
    guard(|| {
        let slot = out(out_chain, "out_chain")?;
        let strategy = if strategy.is_null() {
            Strategy::Doubling
        } else {
            read_str(strategy, "strategy")?.parse().map_err(lib_err)?
        };
        let verify = if verify { Verification::On } else { Verification::Off };
        let chain = generate(p, n, &strategy, GenerateOptions::with_verification(verify)).map_err(lib_err)?;
        *slot = Box::into_raw(Box::new(NormoneChain(chain)));
        Ok(())
    })
}

/// # Safety
/// `chain` is null or a handle from [`normone_generate`], freed once.
#[no_mangle]
pub unsafe extern "C" fn normone_chain_free(chain: *mut NormoneChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Number of lift steps in the chain.
///
/// # Safety
/// Pointers are valid.
#[no_mangle]
pub unsafe extern "C" fn normone_chain_step_count(chain: *const NormoneChain, out_count: *mut usize) -> NormoneStatus {
    guard(|| {
        *out(out_count, "out_count")? = deref(chain, "chain")?.0.steps.len();
        Ok(())
    })
}

/// Whether every step passed its certificate (false when verification was off).
///
/// # Safety
/// Pointers are valid.
#[no_mangle]
pub unsafe extern "C" fn normone_chain_certified(chain: *const NormoneChain, out_ok: *mut bool) -> NormoneStatus {
    guard(|| {
        *out(out_ok, "out_ok")? = deref(chain, "chain")?.0.certified();
        Ok(())
    })
}

/// The final element over the base generators. Fails with
/// `InvalidArgument` when the chain was too large to expand.
///
/// # Safety
/// Pointers are valid.
#[no_mangle]
pub unsafe extern "C" fn normone_chain_final(chain: *const NormoneChain, out_poly: *mut *mut NormonePoly) -> NormoneStatus {
    guard(|| {
        let slot = out(out_poly, "out_poly")?;
        let f = deref(chain, "chain")?
            .0
            .final_poly
            .clone()
            .ok_or_else(|| fail(NormoneStatus::InvalidArgument, "final element was not expanded"))?;
        *slot = Box::into_raw(Box::new(NormonePoly(f)));
        Ok(())
    })
}

/// The chain document `{"p", "n", "strategy", "steps", "final"}`.
///
/// # Safety
/// Pointers are valid.
#[no_mangle]
pub unsafe extern "C" fn normone_chain_to_json(chain: *const NormoneChain, out_json: *mut *mut c_char) -> NormoneStatus {
    guard(|| {
        let slot = out(out_json, "out_json")?;
        *slot = into_c_string(deref(chain, "chain")?.0.to_document(true).to_json())?;
        Ok(())
    })
}

/// Parses a polynomial document `{"p", "n", "terms": [{"c", "w"}]}`.
///
/// # Safety
/// `json` is NUL-terminated; `out_poly` is writable.
#[no_mangle]
pub unsafe extern "C" fn normone_poly_from_json(json: *const c_char, out_poly: *mut *mut NormonePoly) -> NormoneStatus {
    guard(|| {
        let slot = out(out_poly, "out_poly")?;
        let poly = Poly::from_json(read_str(json, "json")?).map_err(lib_err)?;
        *slot = Box::into_raw(Box::new(NormonePoly(poly)));
        Ok(())
    })
}

/// # Safety
/// `poly` is null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn normone_poly_free(poly: *mut NormonePoly) {
    if !poly.is_null() {
        drop(Box::from_raw(poly));
    }
}

unsafe fn poly_string(poly: *const NormonePoly, out_str: *mut *mut c_char, f: fn(&Poly) -> String) -> NormoneStatus {
    guard(|| {
        let slot = out(out_str, "out_str")?;
        *slot = into_c_string(f(&deref(poly, "poly")?.0))?;
        Ok(())
    })
}

/// # Safety
/// Pointers are valid.
#[no_mangle]
pub unsafe extern "C" fn normone_poly_to_json(poly: *const NormonePoly, out_str: *mut *mut c_char) -> NormoneStatus {
    poly_string(poly, out_str, Poly::to_json)
}

/// # Safety
/// Pointers are valid.
#[no_mangle]
pub unsafe extern "C" fn normone_poly_to_text(poly: *const NormonePoly, out_str: *mut *mut c_char) -> NormoneStatus {
    poly_string(poly, out_str, Poly::to_text)
}

/// # Safety
/// Pointers are valid.
#[no_mangle]
pub unsafe extern "C" fn normone_poly_to_latex(poly: *const NormonePoly, out_str: *mut *mut c_char) -> NormoneStatus {
    poly_string(poly, out_str, Poly::to_latex)
}

/// Whether `N_{G_m}(poly) = 1` modulo the elementary relations.
///
/// # Safety
/// Pointers are valid.
#[no_mangle]
pub unsafe extern "C" fn normone_poly_is_norm_one(poly: *const NormonePoly, m: u32, out_ok: *mut bool) -> NormoneStatus {
    guard(|| {
        let slot = out(out_ok, "out_ok")?;
        let poly = &deref(poly, "poly")?.0;
        let h = SubgroupSpec::new(poly.ctx(), m).map_err(lib_err)?;
        *slot = normone::is_norm_one(poly, &h).map_err(lib_err)?;
        Ok(())
    })
}

/// Number of monomials, after the normal form when `reduced` is set.
///
/// # Safety
/// Pointers are valid.
#[no_mangle]
pub unsafe extern "C" fn normone_poly_monomial_count(
    poly: *const NormonePoly,
    reduced: bool,
    out_count: *mut usize,
) -> NormoneStatus {
    guard(|| {
        let mode = if reduced { CountMode::Reduced } else { CountMode::Expanded };
        *out(out_count, "out_count")? = monomial_count(&deref(poly, "poly")?.0, mode);
        Ok(())
    })
}

/// Evaluates `N_{G_m}(poly)` on a seeded ring of `dim × dim` integer matrix
/// valued functions (`dim = 0` means integers) and reports whether it is 1.
///
/// # Safety
/// Pointers are valid.
#[no_mangle]
pub unsafe extern "C" fn normone_poly_check_numeric(
    poly: *const NormonePoly,
    dim: usize,
    seed: u64,
    m: u32,
    out_ok: *mut bool,
) -> NormoneStatus {
    guard(|| {
        let slot = out(out_ok, "out_ok")?;
        let poly = &deref(poly, "poly")?.0;
        let kind = if dim == 0 { InstanceKind::Scalar } else { InstanceKind::Matrix(dim) };
        let inst = random_instance(poly.ctx(), kind, seed).map_err(lib_err)?;
        let h = SubgroupSpec::new(poly.ctx(), m).map_err(lib_err)?;
        *slot = check_numeric(poly, &inst, &h).map_err(lib_err)?;
        Ok(())
    })
}

/// Tate cohomology of the lattices in `{"actions": [{"name", "order", "matrix"}]}`,
/// returned as a JSON array of `{"name", "order", "dim", "h1", "h2"}`.
///
/// # Safety
/// `json` is NUL-terminated; `out_json` is writable.
#[no_mangle]
pub unsafe extern "C" fn normone_cohomology(json: *const c_char, out_json: *mut *mut c_char) -> NormoneStatus {
    guard(|| {
        let slot = out(out_json, "out_json")?;
        let reports = reports_from_json(read_str(json, "json")?).map_err(lib_err)?;
        *slot = into_c_string(serde_json::to_string(&reports).expect("reports serialize"))?;
        Ok(())
    })
}
