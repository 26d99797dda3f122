//! Exercises the C ABI through its exported functions: the realize /
//! classify / verify lifecycle, JSON bridging, prefix materialization,
//! buffer and error-path behaviour.

use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::ptr;

use omegalab_ffi::*;

#[test]
fn version_is_nonempty() {
    let v = unsafe { CStr::from_ptr(omegalab_version()) };
    assert!(!v.to_str().unwrap().is_empty());
}

#[test]
fn realize_classify_verify_lifecycle() {
    let label = CString::new("4'").unwrap();
    let mut schedule: *mut OmegalabSchedule = ptr::null_mut();
    let mut cert: *mut OmegalabCertificate = ptr::null_mut();
    let code = unsafe { omegalab_realize_case(label.as_ptr(), 1, 3, 7, &mut schedule, &mut cert) };
    assert_eq!(code, OMEGALAB_OK, "{}", last_error());
    assert!(!schedule.is_null() && !cert.is_null());

    // Classify round-trips the label.
    let mut buf = [0 as c_char; 8];
    let code = unsafe { omegalab_classify(schedule, buf.as_mut_ptr(), buf.len()) };
    assert_eq!(code, OMEGALAB_OK, "{}", last_error());
    let found = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    assert_eq!(found, "4'");

    // Verify accepts the pair.
    assert_eq!(unsafe { omegalab_verify(schedule, cert) }, OMEGALAB_OK);

    // Prefix materialization: the nonrecurrent witness starts with the tag
    // twice (primed labels reserve the doubled tag).
    let mut prefix = [0u8; 16];
    let code = unsafe { omegalab_schedule_prefix(schedule, prefix.len(), prefix.as_mut_ptr()) };
    assert_eq!(code, OMEGALAB_OK, "{}", last_error());
    assert_eq!(&prefix[..2], &[2, 2]);

    // JSON round-trip preserves classification.
    let mut json: *mut c_char = ptr::null_mut();
    assert_eq!(
        unsafe { omegalab_schedule_to_json(schedule, &mut json) },
        OMEGALAB_OK
    );
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    assert!(text.contains("\"format\": 1"));
    let mut reparsed: *mut OmegalabSchedule = ptr::null_mut();
    let ctext = CString::new(text).unwrap();
    assert_eq!(
        unsafe { omegalab_schedule_from_json(ctext.as_ptr(), &mut reparsed) },
        OMEGALAB_OK
    );
    assert_eq!(unsafe { omegalab_verify(reparsed, cert) }, OMEGALAB_OK);

    unsafe {
        omegalab_string_free(json);
        omegalab_schedule_free(reparsed);
        omegalab_schedule_free(schedule);
        omegalab_certificate_free(cert);
    }
}

#[test]
fn error_paths_set_codes_and_messages() {
    // Null arguments.
    let code =
        unsafe { omegalab_realize_case(ptr::null(), 1, 3, 0, ptr::null_mut(), ptr::null_mut()) };
    assert_eq!(code, OMEGALAB_ERR_NULL_ARGUMENT);

    // Bad label.
    let label = CString::new("9").unwrap();
    let mut schedule: *mut OmegalabSchedule = ptr::null_mut();
    let mut cert: *mut OmegalabCertificate = ptr::null_mut();
    let code = unsafe { omegalab_realize_case(label.as_ptr(), 1, 3, 0, &mut schedule, &mut cert) };
    assert_eq!(code, OMEGALAB_ERR_BAD_INPUT);
    assert!(last_error().contains("case index"));

    // Primed label in recurrent mode is rejected.
    let label = CString::new("2'").unwrap();
    let code = unsafe { omegalab_realize_case(label.as_ptr(), 0, 3, 0, &mut schedule, &mut cert) };
    assert_eq!(code, OMEGALAB_ERR_BAD_INPUT);

    // Ambient too small.
    let label = CString::new("1").unwrap();
    let code = unsafe { omegalab_realize_case(label.as_ptr(), 1, 2, 0, &mut schedule, &mut cert) };
    assert_eq!(code, OMEGALAB_ERR_BAD_INPUT);
    assert!(last_error().contains("alphabet"));

    // Malformed JSON.
    let bad = CString::new("{not json").unwrap();
    let mut out: *mut OmegalabSchedule = ptr::null_mut();
    assert_eq!(
        unsafe { omegalab_schedule_from_json(bad.as_ptr(), &mut out) },
        OMEGALAB_ERR_BAD_INPUT
    );
}

#[test]
fn classify_rejects_almost_periodic_orbits() {
    // Build a periodic schedule through JSON and classify: the syndetic
    // center is nonempty, which maps to its own status code.
    let periodic = omegalab::schedule::BlockSchedule::eventually_periodic(
        omegalab::shift::SftDescr::full(2),
        omegalab::shift::Word::empty(),
        omegalab::shift::Word::parse("01").unwrap(),
        0,
    )
    .unwrap();
    let json = omegalab::report::Envelope::new("schedule", periodic)
        .to_json()
        .unwrap();
    let cjson = CString::new(json).unwrap();
    let mut handle: *mut OmegalabSchedule = ptr::null_mut();
    assert_eq!(
        unsafe { omegalab_schedule_from_json(cjson.as_ptr(), &mut handle) },
        OMEGALAB_OK
    );
    let mut buf = [0 as c_char; 8];
    let code = unsafe { omegalab_classify(handle, buf.as_mut_ptr(), buf.len()) };
    assert_eq!(code, OMEGALAB_ERR_SYNDETIC_CENTER);
    unsafe { omegalab_schedule_free(handle) };
}

#[test]
fn small_buffer_reports_cleanly() {
    let label = CString::new("1").unwrap();
    let mut schedule: *mut OmegalabSchedule = ptr::null_mut();
    let mut cert: *mut OmegalabCertificate = ptr::null_mut();
    assert_eq!(
        unsafe { omegalab_realize_case(label.as_ptr(), 1, 3, 0, &mut schedule, &mut cert) },
        OMEGALAB_OK
    );
    let mut tiny = [0 as c_char; 1];
    let code = unsafe { omegalab_classify(schedule, tiny.as_mut_ptr(), tiny.len()) };
    assert_eq!(code, OMEGALAB_ERR_BUFFER_TOO_SMALL);
    unsafe {
        omegalab_schedule_free(schedule);
        omegalab_certificate_free(cert);
    }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(omegalab_last_error()) }
        .to_str()
        .unwrap_or("")
        .to_owned()
}
