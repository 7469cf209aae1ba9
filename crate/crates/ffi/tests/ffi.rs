use std::ffi::{CStr, CString};
use std::ptr;

use tokenscreen_ffi::*;

fn preset() -> *mut TsScenario {
    let mut sc = ptr::null_mut();
    let name = CString::new("uniform-example").unwrap();
    assert_eq!(unsafe { ts_scenario_preset(name.as_ptr(), 0.0, 0.0, &mut sc) }, TsStatus::Ok);
    sc
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ts_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn package_menu_round_trip() {
    let sc = preset();
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(ts_package_menu_new(sc, &mut m), TsStatus::Ok);
        let (mut ex, mut ft) = (0.0, 0.0);
        assert_eq!(ts_package_menu_thresholds(m, &mut ex, &mut ft), TsStatus::Ok);
        assert!((ex - 1.0 / 3.0).abs() < 1e-12 && (ft - 2.0 / 3.0).abs() < 1e-12);
        let mut it = TsMenuItem::default();
        assert_eq!(ts_package_menu_item(m, 1.0, &mut it), TsStatus::Ok);
        assert!((it.quality - 8.0).abs() < 1e-9 && it.tasks == 0.0);
        let mut t = TsTariff::default();
        assert_eq!(ts_package_menu_tariff(m, 1.0, &mut t), TsStatus::Ok);
        assert!(t.offered && (t.p0 - 17.0 / 24.0).abs() < 1e-9);
        assert_eq!(ts_package_menu_tariff(m, 0.2, &mut t), TsStatus::Ok);
        assert!(!t.offered);
        let mut r = TsRevenue::default();
        assert_eq!(ts_package_menu_revenue(m, 1e-9, &mut r), TsStatus::Ok);
        assert!((r.revenue - 139.0 / 540.0).abs() < 1e-7);
        ts_package_menu_free(m);
        ts_scenario_free(sc);
    }
}

#[test]
fn allocation_menu_round_trip() {
    let sc = preset();
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(ts_allocation_menu_new(sc, true, &mut m), TsStatus::Ok);
        let mut it = TsMenuItem::default();
        assert_eq!(ts_allocation_menu_item(m, 0.6, 1.0, &mut it), TsStatus::Ok);
        assert!((it.quality - 0.4).abs() < 1e-12 && it.tasks == 1.0);
        let mut t = TsTariff::default();
        assert_eq!(ts_allocation_menu_tariff(m, 0.6, 1.0, &mut t), TsStatus::Ok);
        assert!(t.offered && t.task_cap == 1.0);
        let mut r = TsRevenue::default();
        assert_eq!(ts_allocation_menu_revenue(m, 1e-8, &mut r), TsStatus::Ok);
        assert!((r.profit - 97.0 / 960.0).abs() < 1e-6);
        ts_allocation_menu_free(m);
        ts_scenario_free(sc);
    }
}

#[test]
fn errors_are_reported() {
    let mut sc = ptr::null_mut();
    let bad = CString::new(r#"{"production": {}}"#).unwrap();
    assert_eq!(
        unsafe { ts_scenario_from_json(bad.as_ptr(), &mut sc) },
        TsStatus::InvalidArgument
    );
    assert!(sc.is_null());
    assert!(!last_error().is_empty());

    let name = CString::new("uniform-symmetric").unwrap();
    assert_eq!(
        unsafe { ts_scenario_preset(name.as_ptr(), 0.4, 0.1, &mut sc) },
        TsStatus::InvalidArgument
    );
    assert!(last_error().contains("rho"));

    let sc = preset();
    let mut out = TsCost::default();
    assert_eq!(
        unsafe { ts_cost(sc, TsCostKind::Contractible, -1.0, 1.0, &mut out) },
        TsStatus::InvalidArgument
    );
    assert_eq!(unsafe { ts_cost(ptr::null(), TsCostKind::Package, 1.0, 1.0, &mut out) }, TsStatus::NullPointer);
    unsafe { ts_scenario_free(sc) };
}

#[test]
fn scenario_json_and_hash() {
    let sc = preset();
    let mut buf = [0 as std::ffi::c_char; 65];
    unsafe {
        assert_eq!(ts_scenario_hash(sc, buf.as_mut_ptr(), buf.len()), TsStatus::Ok);
        let h = CStr::from_ptr(buf.as_ptr()).to_str().unwrap().to_string();
        assert_eq!(h.len(), 64);
        assert_eq!(ts_scenario_hash(sc, buf.as_mut_ptr(), 10), TsStatus::InvalidArgument);

        let mut e = TsEfficient::default();
        assert_eq!(ts_efficient_value_scale(sc, 1.0, 1.0, &mut e), TsStatus::Ok);
        assert!((e.z - 15.0).abs() < 1e-9 && (e.surplus - 2.125).abs() < 1e-12);
        ts_scenario_free(sc);
        assert!(!CStr::from_ptr(ts_version()).to_bytes().is_empty());
    }
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/tokenscreen.h")).unwrap();
    for f in [
        "ts_scenario_from_json",
        "ts_scenario_preset",
        "ts_package_menu_new",
        "ts_allocation_menu_tariff",
        "ts_last_error_message",
        "typedef struct TsScenario TsScenario;",
        "TS_STATUS_NO_CONVERGENCE = 4",
    ] {
        assert!(h.contains(f), "header lacks {f}");
    }
}

/// Builds tests/c/smoke.c against the static library when a C compiler is present.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|p| p.parent()).unwrap();
    let lib = profile_dir.join("libtokenscreen_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || std::process::Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no static library at {} or no C compiler", lib.display());
        return;
    }
    let dir = env!("CARGO_MANIFEST_DIR");
    let out = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ts_smoke");
    let status = std::process::Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&out)
        .arg(format!("{dir}/tests/c/smoke.c"))
        .arg(format!("-I{dir}/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success());
    let run = std::process::Command::new(&out).output().unwrap();
    let text = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "{text}");
    assert!(text.contains("revenue 0.2574074"), "{text}");
}
