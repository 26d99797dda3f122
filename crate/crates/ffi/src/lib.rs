//! C ABI for the orbit-schedule library: opaque handles, integer error
//! codes, JSON bridging, and a thread-local error message. The matching
//! header lives in `include/omegalab.h`.
//!
//! Conventions:
//! - Every fallible function returns an `int32_t` status, `0` on success.
//! - Out-parameters are written only on success.
//! - Strings returned through out-parameters are owned by the library and
//!   must be released with `omegalab_string_free`.
//! - Handles must be released with their matching `_free` function.
//! - `omegalab_last_error` describes the most recent failure on the calling
//!   thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::os::raw::c_int;
use std::str::FromStr;

use omegalab::limitset::{classify_case, CaseLabel};
use omegalab::report::Envelope;
use omegalab::schedule::BlockSchedule;
use omegalab::synthesis::{
    realize_case, verify_certificate, Certificate, RealizeOptions, RecurrenceMode,
};
use omegalab::Error;

/// Status codes mirrored in the header.
pub const OMEGALAB_OK: c_int = 0;
pub const OMEGALAB_ERR_NULL_ARGUMENT: c_int = -1;
pub const OMEGALAB_ERR_INVALID_UTF8: c_int = -2;
pub const OMEGALAB_ERR_BAD_INPUT: c_int = -3;
pub const OMEGALAB_ERR_UNSUPPORTED: c_int = -4;
pub const OMEGALAB_ERR_SYNDETIC_CENTER: c_int = -5;
pub const OMEGALAB_ERR_CERTIFICATE: c_int = -6;
pub const OMEGALAB_ERR_BUFFER_TOO_SMALL: c_int = -7;
pub const OMEGALAB_ERR_PANIC: c_int = -8;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let cleaned: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(cleaned).unwrap_or_default();
    });
}

fn code_for(err: &Error) -> c_int {
    match err {
        Error::SyndeticCenterNonEmpty => OMEGALAB_ERR_SYNDETIC_CENTER,
        Error::UnsupportedSchedule(_) | Error::UnsupportedPattern(_) | Error::Indeterminate(_) => {
            OMEGALAB_ERR_UNSUPPORTED
        }
        _ => OMEGALAB_ERR_BAD_INPUT,
    }
}

fn catch<F: FnOnce() -> c_int + std::panic::UnwindSafe>(f: F) -> c_int {
    match std::panic::catch_unwind(f) {
        Ok(code) => code,
        Err(_) => {
            set_error("internal panic");
            OMEGALAB_ERR_PANIC
        }
    }
}

/// Opaque schedule handle.
pub struct OmegalabSchedule(BlockSchedule);

/// Opaque certificate handle.
pub struct OmegalabCertificate(Certificate);

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Result<&'a str, c_int> {
    if ptr.is_null() {
        set_error("null argument");
        return Err(OMEGALAB_ERR_NULL_ARGUMENT);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        OMEGALAB_ERR_INVALID_UTF8
    })
}

fn string_out(s: String, out: *mut *mut c_char) -> c_int {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            OMEGALAB_OK
        }
        Err(_) => {
            set_error("output contained an interior NUL");
            OMEGALAB_ERR_BAD_INPUT
        }
    }
}

/// Library version as a static NUL-terminated string; never free it.
#[no_mangle]
pub extern "C" fn omegalab_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Message of the most recent error on this thread; owned by the library.
#[no_mangle]
pub extern "C" fn omegalab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Frees a string returned through an out-parameter.
///
/// # Safety
/// `ptr` must come from this library and not have been freed before.
#[no_mangle]
pub unsafe extern "C" fn omegalab_string_free(ptr: *mut c_char) {
    if !ptr.is_null() {
        drop(CString::from_raw(ptr));
    }
}

/// Builds a schedule realizing the case `label` (e.g. "4" or "3'"), writing
/// schedule and certificate handles. `nonrecurrent` selects the mode:
/// nonzero for a nonrecurrent witness, zero for a recurrent nontransitive
/// one (unprimed labels only).
///
/// # Safety
/// `label`, `out_schedule` and `out_certificate` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn omegalab_realize_case(
    label: *const c_char,
    nonrecurrent: c_int,
    ambient: u32,
    seed: u64,
    out_schedule: *mut *mut OmegalabSchedule,
    out_certificate: *mut *mut OmegalabCertificate,
) -> c_int {
    if out_schedule.is_null() || out_certificate.is_null() {
        set_error("null out-parameter");
        return OMEGALAB_ERR_NULL_ARGUMENT;
    }
    let label = match cstr_arg(label) {
        Ok(s) => s.to_owned(),
        Err(code) => return code,
    };
    let out_schedule = out_schedule as usize;
    let out_certificate = out_certificate as usize;
    catch(move || {
        let parsed = match CaseLabel::from_str(&label) {
            Ok(l) => l,
            Err(e) => {
                set_error(&e.to_string());
                return OMEGALAB_ERR_BAD_INPUT;
            }
        };
        let opts = RealizeOptions {
            ambient: ambient as usize,
            mode: if nonrecurrent != 0 {
                RecurrenceMode::NonRecurrent
            } else {
                RecurrenceMode::RecurrentNonTransitive
            },
            seed,
            ..RealizeOptions::default()
        };
        match realize_case(parsed, opts) {
            Ok((schedule, cert)) => {
                let sp = out_schedule as *mut *mut OmegalabSchedule;
                let cp = out_certificate as *mut *mut OmegalabCertificate;
                *sp = Box::into_raw(Box::new(OmegalabSchedule(schedule)));
                *cp = Box::into_raw(Box::new(OmegalabCertificate(cert)));
                OMEGALAB_OK
            }
            Err(e) => {
                set_error(&e.to_string());
                code_for(&e)
            }
        }
    })
}

/// Parses a schedule from its versioned JSON document.
///
/// # Safety
/// `json` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn omegalab_schedule_from_json(
    json: *const c_char,
    out: *mut *mut OmegalabSchedule,
) -> c_int {
    if out.is_null() {
        set_error("null out-parameter");
        return OMEGALAB_ERR_NULL_ARGUMENT;
    }
    let text = match cstr_arg(json) {
        Ok(s) => s.to_owned(),
        Err(code) => return code,
    };
    let out = out as usize;
    catch(
        move || match serde_json::from_str::<Envelope<BlockSchedule>>(&text) {
            Ok(env) => {
                *(out as *mut *mut OmegalabSchedule) =
                    Box::into_raw(Box::new(OmegalabSchedule(env.payload)));
                OMEGALAB_OK
            }
            Err(e) => {
                set_error(&e.to_string());
                OMEGALAB_ERR_BAD_INPUT
            }
        },
    )
}

/// Serializes a schedule into its versioned JSON document.
///
/// # Safety
/// `handle` must be a live schedule handle; `out_json` must be valid.
#[no_mangle]
pub unsafe extern "C" fn omegalab_schedule_to_json(
    handle: *const OmegalabSchedule,
    out_json: *mut *mut c_char,
) -> c_int {
    if handle.is_null() || out_json.is_null() {
        set_error("null argument");
        return OMEGALAB_ERR_NULL_ARGUMENT;
    }
    let schedule = &(*handle).0;
    match Envelope::new("schedule", schedule.clone()).to_json() {
        Ok(s) => string_out(s, out_json),
        Err(e) => {
            set_error(&e.to_string());
            OMEGALAB_ERR_BAD_INPUT
        }
    }
}

/// Materializes the first `len` symbols of the schedule's point into `buf`
/// (one symbol id per byte).
///
/// # Safety
/// `handle` must be live; `buf` must point to at least `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn omegalab_schedule_prefix(
    handle: *const OmegalabSchedule,
    len: usize,
    buf: *mut u8,
) -> c_int {
    if handle.is_null() || buf.is_null() {
        set_error("null argument");
        return OMEGALAB_ERR_NULL_ARGUMENT;
    }
    let schedule = (*handle).0.clone();
    let buf = buf as usize;
    catch(move || match schedule.prefix(len) {
        Ok(word) => {
            let buf = buf as *mut u8;
            for (i, s) in word.symbols().iter().enumerate() {
                *buf.add(i) = s.0;
            }
            OMEGALAB_OK
        }
        Err(e) => {
            set_error(&e.to_string());
            code_for(&e)
        }
    })
}

/// Classifies the schedule; writes the NUL-terminated label (e.g. "4'")
/// into `buf`.
///
/// # Safety
/// `handle` must be live; `buf` must hold at least `buf_len` bytes, with
/// `buf_len >= 4`.
#[no_mangle]
pub unsafe extern "C" fn omegalab_classify(
    handle: *const OmegalabSchedule,
    buf: *mut c_char,
    buf_len: usize,
) -> c_int {
    if handle.is_null() || buf.is_null() {
        set_error("null argument");
        return OMEGALAB_ERR_NULL_ARGUMENT;
    }
    let schedule = (*handle).0.clone();
    let buf = buf as usize;
    catch(move || match classify_case(&schedule, 2) {
        Ok((label, _)) => {
            let text = label.to_string();
            if text.len() + 1 > buf_len {
                set_error("label buffer too small");
                return OMEGALAB_ERR_BUFFER_TOO_SMALL;
            }
            let buf = buf as *mut c_char;
            for (i, b) in text.bytes().enumerate() {
                *buf.add(i) = b as c_char;
            }
            *buf.add(text.len()) = 0;
            OMEGALAB_OK
        }
        Err(e) => {
            set_error(&e.to_string());
            code_for(&e)
        }
    })
}

/// Serializes a certificate into its versioned JSON document.
///
/// # Safety
/// `handle` must be a live certificate handle; `out_json` must be valid.
#[no_mangle]
pub unsafe extern "C" fn omegalab_certificate_to_json(
    handle: *const OmegalabCertificate,
    out_json: *mut *mut c_char,
) -> c_int {
    if handle.is_null() || out_json.is_null() {
        set_error("null argument");
        return OMEGALAB_ERR_NULL_ARGUMENT;
    }
    let cert = &(*handle).0;
    match Envelope::new("certificate", cert.clone()).to_json() {
        Ok(s) => string_out(s, out_json),
        Err(e) => {
            set_error(&e.to_string());
            OMEGALAB_ERR_BAD_INPUT
        }
    }
}

/// Parses a certificate from its versioned JSON document.
///
/// # Safety
/// `json` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn omegalab_certificate_from_json(
    json: *const c_char,
    out: *mut *mut OmegalabCertificate,
) -> c_int {
    if out.is_null() {
        set_error("null out-parameter");
        return OMEGALAB_ERR_NULL_ARGUMENT;
    }
    let text = match cstr_arg(json) {
        Ok(s) => s.to_owned(),
        Err(code) => return code,
    };
    let out = out as usize;
    catch(
        move || match serde_json::from_str::<Envelope<Certificate>>(&text) {
            Ok(env) => {
                *(out as *mut *mut OmegalabCertificate) =
                    Box::into_raw(Box::new(OmegalabCertificate(env.payload)));
                OMEGALAB_OK
            }
            Err(e) => {
                set_error(&e.to_string());
                OMEGALAB_ERR_BAD_INPUT
            }
        },
    )
}

/// Re-validates a certificate against a schedule: `0` when every sub-claim
/// verifies, `OMEGALAB_ERR_CERTIFICATE` otherwise.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn omegalab_verify(
    schedule: *const OmegalabSchedule,
    certificate: *const OmegalabCertificate,
) -> c_int {
    if schedule.is_null() || certificate.is_null() {
        set_error("null argument");
        return OMEGALAB_ERR_NULL_ARGUMENT;
    }
    let s = (*schedule).0.clone();
    let c = (*certificate).0.clone();
    catch(move || match verify_certificate(&s, &c) {
        Ok(()) => OMEGALAB_OK,
        Err(e) => {
            set_error(&e.to_string());
            OMEGALAB_ERR_CERTIFICATE
        }
    })
}

/// Frees a schedule handle.
///
/// # Safety
/// `handle` must come from this library and not have been freed before.
#[no_mangle]
pub unsafe extern "C" fn omegalab_schedule_free(handle: *mut OmegalabSchedule) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Frees a certificate handle.
///
/// # Safety
/// `handle` must come from this library and not have been freed before.
#[no_mangle]
pub unsafe extern "C" fn omegalab_certificate_free(handle: *mut OmegalabCertificate) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}
