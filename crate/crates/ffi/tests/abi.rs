//! Exercises the exported functions the way a C caller would.

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use peal_ffi::*;

const FIG1: &str = include_str!("../../core/deals/fig1_desk.json");

fn last_error() -> String {
    let p = peal_last_error();
    assert!(!p.is_null(), "expected an error message");
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    peal_string_free(s);
    out
}

fn parse(json: &str) -> (PealStatus, *mut PealDeal) {
    let text = CString::new(json).unwrap();
    let mut deal = ptr::null_mut();
    let status = unsafe { peal_deal_parse(text.as_ptr(), &mut deal) };
    (status, deal)
}

fn run(deal: *const PealDeal, scenarios: usize, seed: i64) -> *mut PealRun {
    let mut run = ptr::null_mut();
    let status = unsafe { peal_run(deal, scenarios, seed, 0.0, &mut run) };
    assert_eq!(status, PealStatus::Ok, "{}", last_error());
    assert!(peal_last_error().is_null());
    run
}

#[test]
fn version_matches_the_engine() {
    let v = unsafe { CStr::from_ptr(peal_version()) }.to_str().unwrap();
    assert_eq!(v, peal::deal_service::runs::ENGINE_VERSION);
}

#[test]
fn null_arguments_are_reported() {
    let mut deal = ptr::null_mut();
    assert_eq!(unsafe { peal_deal_parse(ptr::null(), &mut deal) }, PealStatus::NullArgument);
    assert!(deal.is_null());
    assert!(last_error().contains("null"));
    let text = CString::new(FIG1).unwrap();
    assert_eq!(unsafe { peal_deal_parse(text.as_ptr(), ptr::null_mut()) }, PealStatus::NullArgument);
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { peal_run(ptr::null(), 10, 1, 0.0, &mut run) }, PealStatus::NullArgument);
    assert!(run.is_null());
    let mut n = 0usize;
    assert_eq!(unsafe { peal_deal_exposure_count(ptr::null(), &mut n) }, PealStatus::NullArgument);
    unsafe {
        peal_deal_free(ptr::null_mut());
        peal_run_free(ptr::null_mut());
        peal_string_free(ptr::null_mut());
    }
}

#[test]
fn invalid_utf8_is_rejected() {
    let bytes = CString::new(vec![b'{', 0xff, b'}']).unwrap();
    let mut deal = ptr::null_mut();
    assert_eq!(unsafe { peal_deal_parse(bytes.as_ptr(), &mut deal) }, PealStatus::InvalidUtf8);
    assert!(deal.is_null());
}

#[test]
fn invalid_deal_carries_the_violation() {
    let mut file: serde_json::Value = serde_json::from_str(FIG1).unwrap();
    file["design"]["v"][2] = serde_json::json!(0.85);
    let (status, deal) = parse(&file.to_string());
    assert_eq!(status, PealStatus::InvalidDeal);
    assert!(deal.is_null());
    assert!(last_error().contains("HC3"), "{}", last_error());

    let (status, _) = parse("not json");
    assert_eq!(status, PealStatus::InvalidDeal);
}

#[test]
fn deal_handle_exposes_its_shape_and_compliance() {
    let (status, deal) = parse(FIG1);
    assert_eq!(status, PealStatus::Ok);
    let mut n = 0usize;
    assert_eq!(unsafe { peal_deal_exposure_count(deal, &mut n) }, PealStatus::Ok);
    let expected = peal::deal_service::parse_deal_str(FIG1).unwrap().deal.exposure_count();
    assert_eq!(n, expected);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { peal_deal_compliance_json(deal, &mut s) }, PealStatus::Ok);
    let text = unsafe { take(s) };
    assert!(serde_json::from_str::<serde_json::Value>(&text).unwrap().is_array());
    unsafe { peal_deal_free(deal) };
}

#[test]
fn runs_are_reproducible_and_serve_reports() {
    let (_, deal) = parse(FIG1);
    let a = run(deal, 200, 7);
    let b = run(deal, 200, 7);
    let c = run(deal, 200, 8);
    let id = |r| {
        let mut s = ptr::null_mut();
        assert_eq!(unsafe { peal_run_id(r, &mut s) }, PealStatus::Ok);
        unsafe { take(s) }
    };
    let (ia, ib, ic) = (id(a), id(b), id(c));
    assert_eq!(ia.len(), 16);
    assert_eq!(ia, ib);
    assert_ne!(ia, ic);

    let report = |r, name: &str| {
        let name = CString::new(name).unwrap();
        let mut s = ptr::null_mut();
        let status = unsafe { peal_run_report(r, name.as_ptr(), &mut s) };
        (status, if s.is_null() { String::new() } else { unsafe { take(s) } })
    };
    let (status, features) = report(a, "features.json");
    assert_eq!(status, PealStatus::Ok);
    assert_eq!(features, report(b, "features.json").1);
    let v: serde_json::Value = serde_json::from_str(&features).unwrap();
    assert!(v.is_object());
    let (_, csv) = report(a, "tranching.csv");
    assert!(csv.lines().count() > 1);

    let (status, compliance) = report(a, "compliance.json");
    assert_eq!(status, PealStatus::Ok);
    let pass = serde_json::from_str::<serde_json::Value>(&compliance).unwrap()["pass"].as_bool().unwrap();
    let mut compliant = !pass;
    assert_eq!(unsafe { peal_run_compliant(a, &mut compliant) }, PealStatus::Ok);
    assert_eq!(compliant, pass);

    let (status, _) = report(a, "blocks.csv");
    assert_eq!(status, PealStatus::NotFound);
    assert!(last_error().contains("features.json"));

    unsafe {
        peal_run_free(a);
        peal_run_free(b);
        peal_run_free(c);
        peal_deal_free(deal);
    }
}
