//! C interface to the quantizer.
//!
//! Every entry point returns a [`CqStatus`]. Strings handed out by the
//! library must be released with [`cq_string_free`]; the message of the
//! last failure on the calling thread is available from [`cq_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use confquant::algebra::{ConformalAlgebra, Signature};
use confquant::io::{OperatorFile, ParsedProblem, ProblemFile};
use confquant::quantizer::{Quantizer, QuantizerError};
use confquant::spectral::{critical_table, distinct_criticals, EigenvalueTable};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CqStatus {
    Ok = 0,
    NullPointer = 1,
    Parse = 2,
    Critical = 3,
    Degree = 4,
    Invalid = 5,
    Panic = 6,
}

/// Opaque quantizer bound to one signature.
pub struct CqQuantizer {
    inner: Quantizer,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(CqStatus, String);

fn set_error(msg: Option<String>) {
    let c = msg.map(|m| CString::new(m.replace('\0', " ")).expect("no interior nul"));
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard<F>(f: F) -> CqStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => (CqStatus::Ok, None),
        Ok(Err(Failure(status, msg))) => (status, Some(msg)),
        Err(_) => (CqStatus::Panic, Some("internal panic".into())),
    };
    set_error(msg);
    status
}

fn null(what: &str) -> Failure {
    Failure(CqStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(CqStatus::Parse, format!("{what} is not valid UTF-8")))
}

unsafe fn write_string(out: *mut *mut c_char, text: String) -> Result<(), Failure> {
    let c = CString::new(text).map_err(|_| Failure(CqStatus::Invalid, "output contains a nul byte".into()))?;
    *out = c.into_raw();
    Ok(())
}

fn quantizer_failure(e: QuantizerError) -> Failure {
    let status = match e {
        QuantizerError::Critical { .. } => CqStatus::Critical,
        QuantizerError::DegreeTooHigh { .. } => CqStatus::Degree,
        _ => CqStatus::Invalid,
    };
    let msg = match e.critical_witness() {
        Some(w) => format!("critical value {w}"),
        None => e.to_string(),
    };
    Failure(status, msg)
}

unsafe fn load<'a>(
    q: *const CqQuantizer,
    problem_json: *const c_char,
) -> Result<(&'a Quantizer, ParsedProblem), Failure> {
    let q = q.as_ref().ok_or_else(|| null("quantizer"))?;
    let text = read_str(problem_json, "problem")?;
    let parsed = ProblemFile::from_json(text)
        .and_then(|f| f.parse())
        .map_err(|e| Failure(CqStatus::Parse, e.to_string()))?;
    if parsed.signature != q.inner.signature() {
        return Err(Failure(
            CqStatus::Invalid,
            format!("problem signature {} differs from the quantizer's {}", parsed.signature, q.inner.signature()),
        ));
    }
    Ok((&q.inner, parsed))
}

/// Creates a quantizer for signature `(p, q)` with the default degree cap.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cq_quantizer_new(p: u32, q: u32, out: *mut *mut CqQuantizer) -> CqStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let sig = Signature::new(p as usize, q as usize).map_err(|e| Failure(CqStatus::Invalid, e.to_string()))?;
        let inner = Quantizer::new(sig).map_err(quantizer_failure)?;
        *out = Box::into_raw(Box::new(CqQuantizer { inner }));
        Ok(())
    })
}

/// Releases a quantizer. Null is ignored.
///
/// # Safety
/// `q` must come from [`cq_quantizer_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cq_quantizer_free(q: *mut CqQuantizer) {
    if !q.is_null() {
        drop(Box::from_raw(q));
    }
}

/// Quantizes a problem given as JSON and writes the operator as JSON.
///
/// # Safety
/// `q` must be a live handle, `problem_json` a nul-terminated string and
/// `out_json` a valid pointer. The result must be freed with [`cq_string_free`].
#[no_mangle]
pub unsafe extern "C" fn cq_quantize(
    q: *const CqQuantizer,
    problem_json: *const c_char,
    out_json: *mut *mut c_char,
) -> CqStatus {
    guard(|| {
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        let (quantizer, parsed) = load(q, problem_json)?;
        let problem = quantizer.problem(parsed.lambda, parsed.mu, parsed.symbol).map_err(quantizer_failure)?;
        let op = quantizer.quantize(&problem).map_err(quantizer_failure)?;
        write_string(out_json, OperatorFile::from_operator(&op).to_json())
    })
}

/// Checks equivariance for every basis generator and stores the number of
/// nonzero residuals in `nonzero`.
///
/// # Safety
/// Same requirements as [`cq_quantize`]; `nonzero` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cq_verify(q: *const CqQuantizer, problem_json: *const c_char, nonzero: *mut u32) -> CqStatus {
    guard(|| {
        if nonzero.is_null() {
            return Err(null("nonzero"));
        }
        let (quantizer, parsed) = load(q, problem_json)?;
        let problem = quantizer.problem(parsed.lambda, parsed.mu, parsed.symbol).map_err(quantizer_failure)?;
        let mut count = 0u32;
        for h in quantizer.algebra().basis() {
            if !quantizer.verify_equivariance(&problem, h).map_err(quantizer_failure)?.is_zero() {
                count += 1;
            }
        }
        *nonzero = count;
        Ok(())
    })
}

/// Distinct critical shift values up to degree `kmax`, as a JSON array of
/// strings like `"delta=1 from (1,0)->(0,0)"`.
///
/// # Safety
/// `q` must be a live handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cq_criticals(q: *const CqQuantizer, kmax: u32, out_json: *mut *mut c_char) -> CqStatus {
    guard(|| {
        let q = q.as_ref().ok_or_else(|| null("quantizer"))?;
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        let alg = ConformalAlgebra::new(q.inner.signature());
        let table = EigenvalueTable::build(&alg, kmax).map_err(|e| Failure(CqStatus::Invalid, e.to_string()))?;
        let lines: Vec<String> = distinct_criticals(&critical_table(&table, kmax)).iter().map(|c| c.to_string()).collect();
        let text = serde_json::to_string(&lines).map_err(|e| Failure(CqStatus::Invalid, e.to_string()))?;
        write_string(out_json, text)
    })
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or null after a
/// success. Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn cq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
