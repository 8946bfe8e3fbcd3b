use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use stratsim_ffi::*;

fn scenario(name: &str) -> *mut StratsimInstance {
    let name = CString::new(name).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { stratsim_instance_from_scenario(name.as_ptr(), &mut h) }, StratsimStatus::Ok);
    assert!(!h.is_null());
    h
}

fn last_error() -> String {
    let p = stratsim_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn stable_set_of_naive_user_is_the_full_engagement_model() {
    let h = scenario("s1");
    assert_eq!(unsafe { stratsim_instance_n_models(h) }, 3);
    let mut ids = [usize::MAX; 3];
    let mut len = 0;
    assert_eq!(unsafe { stratsim_stable_set(h, ids.as_mut_ptr(), ids.len(), &mut len) }, StratsimStatus::Ok);
    assert_eq!(&ids[..len], &[2]);
    unsafe { stratsim_instance_free(h) };
}

#[test]
fn small_buffer_reports_required_length() {
    let h = scenario("s1");
    let mut len = 0;
    let status = unsafe { stratsim_simulate(h, 0, 50, ptr::null_mut(), 0, &mut len) };
    assert_eq!(status, StratsimStatus::BufferTooSmall);
    assert_eq!(len, 3);
    assert!(last_error().contains("need 3"));
    unsafe { stratsim_instance_free(h) };
}

#[test]
fn simulate_is_deterministic_and_normalized() {
    let h = scenario("s1");
    let run = || {
        let mut b = [0.0f64; 3];
        let mut len = 0;
        assert_eq!(unsafe { stratsim_simulate(h, 11, 500, b.as_mut_ptr(), 3, &mut len) }, StratsimStatus::Ok);
        b
    };
    let (a, b) = (run(), run());
    assert_eq!(a.map(f64::to_bits), b.map(f64::to_bits));
    assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(a[2] > 0.99);
    unsafe { stratsim_instance_free(h) };
}

#[test]
fn trust_audit_matches_engine() {
    let h = scenario("s1");
    let mut r = StratsimTrustReport::default();
    assert_eq!(unsafe { stratsim_trust_audit(h, &mut r) }, StratsimStatus::Ok);
    assert!((r.strategic_value - 0.7125).abs() < 1e-12);
    assert!((r.naive_value - 0.625).abs() < 1e-12);
    assert!((r.strategization_gap - 0.0875).abs() < 1e-12);
    assert_eq!(r.trustworthy, 0);
    unsafe { stratsim_instance_free(h) };
}

#[test]
fn solve_returns_parseable_json() {
    let h = scenario("s1");
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { stratsim_solve_json(h, &mut s) }, StratsimStatus::Ok);
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { stratsim_string_free(s) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["worst_case_user_payoff"].as_f64().unwrap(), 0.7125);
    assert_eq!(v["stable_set"]["survivors"], serde_json::json!([0]));
    unsafe { stratsim_instance_free(h) };
}

#[test]
fn config_text_builds_an_instance() {
    let text = CString::new("[instance]\nsource = \"scenario\"\nname = \"prop5-after\"\n").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { stratsim_instance_from_config(text.as_ptr(), &mut h) }, StratsimStatus::Ok);
    assert_eq!(unsafe { stratsim_instance_n_models(h) }, 4);
    unsafe { stratsim_instance_free(h) };
}

#[test]
fn errors_map_to_status_codes() {
    let mut h = ptr::null_mut();
    let bad = CString::new("s9").unwrap();
    assert_eq!(unsafe { stratsim_instance_from_scenario(bad.as_ptr(), &mut h) }, StratsimStatus::Config);
    assert!(h.is_null());
    assert!(last_error().contains("unknown scenario"));

    let junk = CString::new("[instance]\nsource = \"nowhere\"\n").unwrap();
    assert_eq!(unsafe { stratsim_instance_from_config(junk.as_ptr(), &mut h) }, StratsimStatus::Config);

    assert_eq!(unsafe { stratsim_instance_from_scenario(ptr::null(), &mut h) }, StratsimStatus::NullPointer);
    let mut len = 0;
    assert_eq!(unsafe { stratsim_stable_set(ptr::null(), ptr::null_mut(), 0, &mut len) }, StratsimStatus::NullPointer);
    assert_eq!(unsafe { stratsim_instance_n_models(ptr::null()) }, 0);
    unsafe { stratsim_instance_free(ptr::null_mut()) };
    unsafe { stratsim_string_free(ptr::null_mut()) };
}

#[test]
fn success_clears_last_error() {
    let bad = CString::new("nope").unwrap();
    let mut h = ptr::null_mut();
    unsafe { stratsim_instance_from_scenario(bad.as_ptr(), &mut h) };
    assert!(!stratsim_last_error().is_null());
    let h = scenario("s1");
    assert!(stratsim_last_error().is_null());
    unsafe { stratsim_instance_free(h) };
}

#[test]
fn header_is_generated_and_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/stratsim.h");
    let text = std::fs::read_to_string(header).unwrap();
    for sym in ["stratsim_instance_from_scenario", "stratsim_trust_audit", "STRATSIM_STATUS_BUFFER_TOO_SMALL", "typedef struct StratsimInstance StratsimInstance"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    // Skipped when no C compiler is on PATH.
    if let Ok(out) = Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c", header]).output() {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
