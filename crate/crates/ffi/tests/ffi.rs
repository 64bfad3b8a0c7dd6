use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use netsense_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ns_last_error_message()) }.to_string_lossy().into_owned()
}

const EXAMPLE2: &str = r#"{"bounds": [-10, -10, 10, 10],
  "anchors": [{"id": "bs1", "kind": "bs", "x": -3.5, "y": 0},
              {"id": "bs2", "kind": "bs", "x": 5, "y": 0},
              {"id": "bs3", "kind": "bs", "x": 0, "y": -4.5}],
  "targets": [{"id": "t1", "x": 3, "y": 2, "rcs_dbsm": -10},
              {"id": "t2", "x": -3, "y": -3, "rcs_dbsm": -10}]}"#;

#[test]
fn link_budget_round_trip() {
    unsafe {
        let mut params = std::mem::zeroed::<NsLinkBudgetParams>();
        assert_eq!(ns_link_budget_params_default(&mut params), NsStatus::Ok);
        params.rcs_dbsm = 15.0;
        let mut budget = ptr::null_mut();
        assert_eq!(ns_link_budget_new(&params, &mut budget), NsStatus::Ok);
        let mut range = 0.0;
        assert_eq!(ns_link_budget_max_range(budget, 10.0, &mut range), NsStatus::Ok);
        assert!((range - 1744.0).abs() / 1744.0 < 0.01);
        let mut snr = 0.0;
        assert_eq!(ns_link_budget_snr_db(budget, range, &mut snr), NsStatus::Ok);
        assert!((snr - 10.0).abs() < 1e-9);
        assert_eq!(ns_link_budget_snr_db(budget, -1.0, &mut snr), NsStatus::Domain);
        assert!(!last_error().is_empty());
        ns_link_budget_free(budget);

        params.bandwidth_hz = 0.0;
        let mut bad = ptr::null_mut();
        assert_ne!(ns_link_budget_new(&params, &mut bad), NsStatus::Ok);
        assert!(bad.is_null());

        let mut g = 0.0;
        assert_eq!(ns_guard_interval(150.0, &mut g), NsStatus::Ok);
        assert!((g - 1e-6).abs() < 1e-9);
    }
}

#[test]
fn association_through_handles() {
    unsafe {
        let json = CString::new(EXAMPLE2).unwrap();
        let mut scene = ptr::null_mut();
        assert_eq!(ns_scene_from_json(json.as_ptr(), &mut scene), NsStatus::Ok);
        let (mut m, mut i, mut k, mut v) = (0, 0, 0, 1);
        assert_eq!(ns_scene_counts(scene, &mut m, &mut i, &mut k), NsStatus::Ok);
        assert_eq!((m, i, k), (3, 0, 2));
        assert_eq!(ns_scene_validate(scene, &mut v), NsStatus::Ok);
        assert_eq!(v, 0);

        let mut report = ptr::null_mut();
        assert_eq!(ns_associate_scene(scene, 1e-6, 1e-3, &mut report), NsStatus::Ok);
        let (mut n, mut nt, mut ng) = (0, 0, 9);
        assert_eq!(ns_ghost_report_num_solutions(report, &mut n), NsStatus::Ok);
        assert_eq!(ns_ghost_report_num_targets(report, &mut nt), NsStatus::Ok);
        assert_eq!(ns_ghost_report_num_ghosts(report, &mut ng), NsStatus::Ok);
        assert_eq!((n, nt, ng), (1, 2, 0));
        let mut p = NsPoint { x: 0.0, y: 0.0 };
        let mut found = Vec::new();
        for t in 0..2 {
            assert_eq!(ns_ghost_report_position(report, 0, t, &mut p), NsStatus::Ok);
            found.push((p.x, p.y));
        }
        assert!(found.iter().any(|&(x, y)| (x - 3.0).abs() < 1e-6 && (y - 2.0).abs() < 1e-6));
        assert_eq!(ns_ghost_report_position(report, 1, 0, &mut p), NsStatus::OutOfRange);

        let mut text = ptr::null_mut();
        assert_eq!(ns_ghost_report_to_json(report, &mut text), NsStatus::Ok);
        let parsed = CStr::from_ptr(text).to_str().unwrap().to_owned();
        assert!(parsed.contains("feasible_solutions"));
        ns_string_free(text);
        ns_ghost_report_free(report);
        ns_scene_free(scene);
    }
}

#[test]
fn raw_profiles_example1() {
    let anchors = [NsPoint { x: -3.5, y: 0.0 }, NsPoint { x: 5.0, y: 0.0 }, NsPoint { x: 0.0, y: -4.5 }];
    let targets = [(3.0f64, 3.0f64), (-3.0, -3.0)];
    let mut distances = Vec::new();
    for a in &anchors {
        for t in targets.iter().rev() {
            distances.push((a.x - t.0).hypot(a.y - t.1));
        }
    }
    unsafe {
        let mut report = ptr::null_mut();
        assert_eq!(ns_associate(anchors.as_ptr(), 3, distances.as_ptr(), 2, 1e-6, &mut report), NsStatus::Ok);
        let mut n = 0;
        ns_ghost_report_num_solutions(report, &mut n);
        assert_eq!(n, 2);
        ns_ghost_report_free(report);

        assert_eq!(
            ns_associate(anchors.as_ptr(), 2, distances.as_ptr(), 2, 1e-6, &mut report),
            NsStatus::Geometry
        );
    }
}

#[test]
fn waveform_handles() {
    unsafe {
        let mut zc = ptr::null_mut();
        assert_eq!(ns_zadoff_chu(63, 25, &mut zc), NsStatus::Ok);
        let mut len = 0;
        ns_sequence_len(zc, &mut len);
        assert_eq!(len, 63);
        let (mut re, mut im) = (vec![0.0; 63], vec![0.0; 63]);
        assert_eq!(ns_sequence_samples(zc, re.as_mut_ptr(), im.as_mut_ptr(), 63), NsStatus::Ok);
        assert!(re.iter().zip(&im).all(|(a, b)| (a.hypot(*b) - 1.0).abs() < 1e-12));

        let mut surface = ptr::null_mut();
        assert_eq!(ns_ambiguity(zc, 1, NS_AMBIGUITY_CYCLIC, &mut surface), NsStatus::Ok);
        let (mut d, mut v) = (0, 0);
        ns_surface_dims(surface, &mut d, &mut v);
        assert_eq!((d, v), (63, 1));
        let mut origin = 0.0;
        ns_surface_get(surface, 0, 0, &mut origin);
        assert_eq!(origin, 1.0);
        let (mut psl, mut isl) = (0.0, 0.0);
        assert_eq!(ns_surface_sidelobes(surface, 1, 1, &mut psl, &mut isl), NsStatus::Ok);
        assert!(psl <= -200.0);
        assert_eq!(ns_surface_get(surface, 63, 0, &mut origin), NsStatus::OutOfRange);
        ns_surface_free(surface);

        let mut bad = ptr::null_mut();
        assert_eq!(ns_ambiguity(zc, 1, 7, &mut bad), NsStatus::Parameter);
        ns_sequence_free(zc);

        assert_eq!(ns_zadoff_chu(64, 2, &mut zc), NsStatus::Parameter);
        assert!(last_error().contains("gcd"));
        let mut ofdm = ptr::null_mut();
        assert_eq!(ns_ofdm_symbol(64, 16, 1, &mut ofdm), NsStatus::Ok);
        ns_sequence_len(ofdm, &mut len);
        assert_eq!(len, 80);
        ns_sequence_free(ofdm);
    }
}

#[test]
fn localization_and_irs() {
    unsafe {
        let anchors = [NsPoint { x: -3.5, y: 0.0 }, NsPoint { x: 5.0, y: 0.0 }, NsPoint { x: 0.0, y: -4.5 }];
        let d = [51.25f64.sqrt(), 13f64.sqrt(), 65.25f64.sqrt()];
        let mut p = NsPoint { x: 0.0, y: 0.0 };
        let mut res = -1.0;
        assert_eq!(ns_trilaterate(anchors.as_ptr(), d.as_ptr(), 3, &mut p, &mut res), NsStatus::Ok);
        assert!((p.x - 3.0).abs() < 1e-6 && (p.y - 3.0).abs() < 1e-6 && res < 1e-6);
        assert_eq!(ns_trilaterate(anchors.as_ptr(), d.as_ptr(), 3, &mut p, ptr::null_mut()), NsStatus::Ok);

        let mut l2 = 0.0;
        let (bs, irs) = (NsPoint { x: 0.0, y: 0.0 }, NsPoint { x: 4.0, y: 0.0 });
        assert_eq!(ns_irs_target_distance(bs, irs, 6.0, 12.0, &mut l2), NsStatus::Ok);
        assert!((l2 - 5.0).abs() < 1e-12);
        assert_eq!(ns_irs_target_distance(bs, irs, 6.0, 5.0, &mut l2), NsStatus::Inconsistent);

        let mut fraction = 1.0;
        assert_eq!(ns_ghost_probability(50, 3, 2, 300.0, 1e-4, 3, &mut fraction), NsStatus::Ok);
        assert!(fraction <= 0.1);
    }
}

#[test]
fn null_and_bad_inputs_are_reported() {
    unsafe {
        let mut scene = ptr::null_mut();
        assert_eq!(ns_scene_from_json(ptr::null(), &mut scene), NsStatus::NullPointer);
        assert!(last_error().contains("json"));
        let bad = CString::new("{not json").unwrap();
        assert_eq!(ns_scene_from_json(bad.as_ptr(), &mut scene), NsStatus::Parse);
        let utf = [0xffu8, 0xfe, 0];
        assert_eq!(ns_scene_from_json(utf.as_ptr().cast(), &mut scene), NsStatus::InvalidUtf8);
        let missing = CString::new("/nonexistent/scene.json").unwrap();
        assert_eq!(ns_scene_load(missing.as_ptr(), &mut scene), NsStatus::Io);
        assert!(scene.is_null());
        let mut n = 0;
        assert_eq!(ns_ghost_report_num_solutions(ptr::null(), &mut n), NsStatus::NullPointer);
        ns_scene_free(ptr::null_mut());
        ns_string_free(ptr::null_mut());
        let mut g = 0.0;
        assert_eq!(ns_guard_interval(1.0, &mut g), NsStatus::Ok);
        assert!(last_error().is_empty());
        assert!(!CStr::from_ptr(ns_version()).to_bytes().is_empty());
    }
}

#[test]
fn header_declares_the_api() {
    let header =
        std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/netsense.h"))
            .unwrap();
    for name in [
        "NS_STATUS_OK",
        "typedef struct NsScene NsScene;",
        "ns_associate_scene",
        "ns_ambiguity",
        "ns_last_error_message",
        "ns_string_free",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

/// Compiles the C smoke program against the header and static library.
#[test]
fn c_program_links_and_runs() {
    let Ok(exe) = std::env::current_exe() else { return };
    let profile_dir = exe.parent().and_then(|p| p.parent()).unwrap();
    let lib = profile_dir.join("libnetsense_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
