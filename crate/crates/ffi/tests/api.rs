use std::ffi::{CStr, CString};
use std::ptr;

use qiup_ffi::*;

fn preset(name: &str) -> *mut QiupScenario {
    let name = CString::new(name).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { qiup_scenario_from_preset(name.as_ptr(), &mut h) }, QiupStatus::Ok);
    assert!(!h.is_null());
    h
}

fn last_error() -> String {
    let p = qiup_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn closed_form_and_trace_agree() {
    let (mut a, mut b, mut c, mut d) = (0.0, 0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(qiup_closed_form(0.5, 1.0, 0.0, 0.2, 1.0, &mut a, &mut b), QiupStatus::Ok);
        assert_eq!(qiup_detection_probabilities(0.5, 1.0, 0.2, 0, &mut c, &mut d), QiupStatus::Ok);
    }
    assert!((a - c).abs() < 1e-12 && (b - d).abs() < 1e-12);
    assert!((a - 0.5 * (1.0 + 0.5 * 1.2f64.cos())).abs() < 1e-12);
    unsafe {
        assert_eq!(qiup_detection_probabilities(0.5, 1.0, 0.2, 1, &mut c, &mut d), QiupStatus::Ok);
    }
    assert!((c - 0.5).abs() < 1e-12 && (d - 0.5).abs() < 1e-12);
}

#[test]
fn argument_errors_set_status_and_message() {
    let mut p = 0.0;
    let status = unsafe { qiup_closed_form(1.5, 0.0, 0.0, 0.0, 1.0, &mut p, &mut p) };
    assert_eq!(status, QiupStatus::OutOfRange);
    assert!(last_error().contains("out of range"));

    let status = unsafe { qiup_closed_form(0.5, 0.0, 0.0, 0.0, 1.0, ptr::null_mut(), &mut p) };
    assert_eq!(status, QiupStatus::NullPointer);

    let name = CString::new("nope").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { qiup_scenario_from_preset(name.as_ptr(), &mut h) }, QiupStatus::InvalidScenario);
    assert!(h.is_null());
    assert!(last_error().contains("nope"));

    let bad = [0xffu8, 0];
    assert_eq!(unsafe { qiup_scenario_from_preset(bad.as_ptr().cast(), &mut h) }, QiupStatus::InvalidUtf8);
}

#[test]
fn setters_validate() {
    let h = preset("no_object");
    unsafe {
        assert_eq!(qiup_scenario_set_setup_visibility(h, 0.5), QiupStatus::Ok);
        let mut v = 0.0;
        assert_eq!(qiup_scenario_effective_visibility(h, &mut v), QiupStatus::Ok);
        assert_eq!(v, 0.5);
        // rejected values leave the scenario untouched
        assert_eq!(qiup_scenario_set_setup_visibility(h, 2.0), QiupStatus::InvalidScenario);
        assert_eq!(qiup_scenario_effective_visibility(h, &mut v), QiupStatus::Ok);
        assert_eq!(v, 0.5);
        assert_eq!(qiup_scenario_set_pump_power(h, -1.0), QiupStatus::InvalidScenario);
        assert_eq!(qiup_scenario_set_idler_efficiency(h, 0.3), QiupStatus::Ok);
        assert_eq!(qiup_scenario_set_path_mismatch(h, 0.1), QiupStatus::Ok);
        assert_eq!(qiup_scenario_set_pump_phase(h, 0.4), QiupStatus::Ok);
        assert_eq!(qiup_scenario_set_peak_photons(h, 10.0), QiupStatus::Ok);
        assert_eq!(qiup_scenario_set_blocked(h, 1), QiupStatus::Ok);
        qiup_scenario_free(h);
        qiup_scenario_free(ptr::null_mut());
    }
}

#[test]
fn json_round_trip() {
    let h = preset("silicon_cat");
    let mut needed = 0usize;
    unsafe {
        assert_eq!(qiup_scenario_to_json(h, ptr::null_mut(), 0, &mut needed), QiupStatus::Ok);
        let mut small = vec![0 as std::ffi::c_char; 4];
        assert_eq!(qiup_scenario_to_json(h, small.as_mut_ptr(), 4, &mut needed), QiupStatus::BufferTooSmall);
        let mut buf = vec![0 as std::ffi::c_char; needed];
        assert_eq!(qiup_scenario_to_json(h, buf.as_mut_ptr(), needed, &mut needed), QiupStatus::Ok);
        let mut h2 = ptr::null_mut();
        assert_eq!(qiup_scenario_from_json(buf.as_ptr(), &mut h2), QiupStatus::Ok);
        let mut again = vec![0 as std::ffi::c_char; needed];
        assert_eq!(qiup_scenario_to_json(h2, again.as_mut_ptr(), needed, &mut needed), QiupStatus::Ok);
        assert_eq!(buf, again);
        let junk = CString::new("{\"name\": 3}").unwrap();
        let mut h3 = ptr::null_mut();
        assert_eq!(qiup_scenario_from_json(junk.as_ptr(), &mut h3), QiupStatus::InvalidScenario);
        qiup_scenario_free(h);
        qiup_scenario_free(h2);
    }
}

#[test]
fn simulate_matches_expectation_when_noiseless() {
    let h = preset("cardboard_cutout");
    unsafe {
        assert_eq!(qiup_scenario_set_noiseless(h, 1), QiupStatus::Ok);
        let (mut rows, mut cols) = (0, 0);
        assert_eq!(qiup_scenario_shape(h, &mut rows, &mut cols), QiupStatus::Ok);
        let n = rows * cols;
        let mut frames = ptr::null_mut();
        assert_eq!(qiup_simulate(h, &mut frames), QiupStatus::Ok);
        let (mut fr, mut fc) = (0, 0);
        assert_eq!(qiup_frames_shape(frames, &mut fr, &mut fc), QiupStatus::Ok);
        assert_eq!((fr, fc), (rows, cols));
        let mut g = vec![0u32; n];
        let mut hh = vec![0u32; n];
        assert_eq!(qiup_frames_copy(frames, QiupPort::G, g.as_mut_ptr(), n), QiupStatus::Ok);
        assert_eq!(qiup_frames_copy(frames, QiupPort::H, hh.as_mut_ptr(), n), QiupStatus::Ok);
        assert_eq!(qiup_frames_copy(frames, QiupPort::H, hh.as_mut_ptr(), n - 1), QiupStatus::BufferTooSmall);
        let mut mg = vec![0.0; n];
        let mut mh = vec![0.0; n];
        assert_eq!(qiup_expected_frames(h, 0.0, mg.as_mut_ptr(), mh.as_mut_ptr(), n), QiupStatus::Ok);
        assert!(g.iter().zip(&mg).all(|(&c, &m)| c == m.round() as u32));
        assert!(hh.iter().zip(&mh).all(|(&c, &m)| c == m.round() as u32));
        qiup_frames_free(frames);
        qiup_scenario_free(h);
    }
}

#[test]
fn scan_and_fit() {
    let h = preset("no_object");
    unsafe {
        qiup_scenario_set_noiseless(h, 1);
        let mut phis = vec![0.0; 24];
        let mut counts = vec![0.0; 24];
        assert_eq!(qiup_phase_scan(h, 24, 1.0, phis.as_mut_ptr(), counts.as_mut_ptr()), QiupStatus::Ok);
        let mut fit = QiupFit::default();
        assert_eq!(qiup_fit_fringe(phis.as_ptr(), counts.as_ptr(), 24, &mut fit), QiupStatus::Ok);
        assert!((fit.visibility - 0.77).abs() < 1e-9);
        assert_eq!(fit.unphysical, 0);
        assert_eq!(qiup_phase_scan(h, 4, 1.0, phis.as_mut_ptr(), counts.as_mut_ptr()), QiupStatus::OutOfRange);
        assert_eq!(qiup_fit_fringe(phis.as_ptr(), counts.as_ptr(), 3, &mut fit), QiupStatus::OutOfRange);
        qiup_scenario_free(h);
    }
}

#[test]
fn design_etch() {
    let mut d = 0.0;
    let silicon = CString::new("silicon").unwrap();
    assert_eq!(unsafe { qiup_design_etch(silicon.as_ptr(), std::f64::consts::PI, 1550.0, &mut d) }, QiupStatus::Ok);
    assert!((d - 312.5).abs() < 1e-9);
    let glass = CString::new("unobtainium").unwrap();
    assert_eq!(unsafe { qiup_design_etch(glass.as_ptr(), 1.0, 1550.0, &mut d) }, QiupStatus::InvalidScenario);
    assert_eq!(unsafe { qiup_design_etch(silicon.as_ptr(), 1.0, 800.0, &mut d) }, QiupStatus::OutOfRange);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(qiup_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
