//! Drive the C ABI end to end from Rust, the way a foreign binding would.

use std::ffi::{CStr, CString};
use std::ptr;

use polygroupoid_capi::*;

fn build(n: usize, group: &str, vertices: usize) -> *mut PgxStructure {
    let spec = CString::new(group).unwrap();
    let mut handle: *mut PgxStructure = ptr::null_mut();
    let status = unsafe { pgx_build_standard(n, spec.as_ptr(), vertices, &mut handle) };
    assert!(status == PgxStatus::Ok);
    assert!(!handle.is_null());
    handle
}

#[test]
fn build_serialize_parse_round_trip() {
    let h = build(2, "3", 4);
    unsafe {
        assert_eq!(pgx_arity(h), 2);
        assert_eq!(pgx_vertex_count(h), 4);
        assert_eq!(pgx_group_order(h), 3);

        let mut text: *mut std::ffi::c_char = ptr::null_mut();
        assert!(pgx_serialize(h, &mut text) == PgxStatus::Ok);
        let as_str = CStr::from_ptr(text).to_str().unwrap().to_string();
        assert!(as_str.starts_with("pgx 1\nn 2\ngroup 3\n"));

        let mut back: *mut PgxStructure = ptr::null_mut();
        let c = CString::new(as_str).unwrap();
        assert!(pgx_parse(c.as_ptr(), &mut back) == PgxStatus::Ok);
        assert_eq!(pgx_vertex_count(back), 4);

        pgx_string_free(text);
        pgx_structure_free(back);
        pgx_structure_free(h);
    }
}

#[test]
fn axioms_and_defect_through_the_abi() {
    let h = build(2, "2", 4);
    unsafe {
        let mut all_pass = false;
        let mut report: *mut std::ffi::c_char = ptr::null_mut();
        assert!(pgx_check_axioms(h, &mut all_pass, &mut report) == PgxStatus::Ok);
        assert!(all_pass);
        let text = CStr::from_ptr(report).to_str().unwrap();
        assert!(text.contains("associative pass"));
        pgx_string_free(report);

        let mut defect: *mut std::ffi::c_char = ptr::null_mut();
        assert!(pgx_structure_defect(h, &mut defect) == PgxStatus::Ok);
        assert_eq!(CStr::from_ptr(defect).to_str().unwrap(), "0");
        pgx_string_free(defect);
        pgx_structure_free(h);
    }
}

#[test]
fn twist_iso_census_recovery() {
    let h = build(2, "2", 3);
    unsafe {
        let g = CString::new("1").unwrap();
        let mut twisted: *mut PgxStructure = ptr::null_mut();
        assert!(pgx_twist(h, g.as_ptr(), &mut twisted) == PgxStatus::Ok);

        let mut order = 0u64;
        let mut verified = false;
        assert!(pgx_automorphism_order(h, 10_000_000, &mut order, &mut verified) == PgxStatus::Ok);
        assert_eq!(order, 24);
        assert!(verified);

        let h4 = build(2, "2", 4);
        let mut rec_order = 0u64;
        assert!(pgx_recovered_group_order(h4, &mut rec_order) == PgxStatus::Ok);
        assert_eq!(rec_order, 2);

        let other = build(2, "2", 3);
        let mut iso = false;
        assert!(pgx_is_isomorphic(h, other, &mut iso) == PgxStatus::Ok);
        assert!(iso);

        pgx_structure_free(twisted);
        pgx_structure_free(other);
        pgx_structure_free(h4);
        pgx_structure_free(h);
    }
}

#[test]
fn errors_set_messages_and_statuses() {
    unsafe {
        let mut handle: *mut PgxStructure = ptr::null_mut();
        let bad = CString::new("pgx 9\n").unwrap();
        assert!(pgx_parse(bad.as_ptr(), &mut handle) == PgxStatus::Parse);
        let msg = pgx_last_error_message();
        assert!(!msg.is_null());
        let text = CStr::from_ptr(msg).to_str().unwrap();
        assert!(text.contains("line 1"));
        pgx_string_free(msg);

        let spec = CString::new("1").unwrap();
        assert!(pgx_build_standard(2, spec.as_ptr(), 4, &mut handle) == PgxStatus::Structural);
        assert!(pgx_build_standard(2, ptr::null(), 4, &mut handle) == PgxStatus::NullArgument);
    }
}
