use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use arbiter_core::arbitration::{alpha, ArbitrationParams, BaselineShape, PolicyKind};
use arbiter_core::uncertainty::{conf_au, conf_in, encounter_prob, ConfidenceParams};
use arbiter_ffi::*;

const PARAMS: ArbiterConfidence = ArbiterConfidence { range_d: 0.4, a_min: 0.8, gamma: 0.25 };

fn core_params() -> ConfidenceParams {
    ConfidenceParams::new(PARAMS.range_d, PARAMS.a_min, PARAMS.gamma).unwrap()
}

fn last_error() -> String {
    let p = arbiter_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn scalar_wrappers_match_core() {
    let p = core_params();
    for &(d, s) in &[(0.0, 0.0), (0.1, 0.05), (0.3, 0.2), (0.5, 0.1)] {
        let mut v = f64::NAN;
        assert_eq!(unsafe { arbiter_conf_in(d, s, PARAMS, &mut v) }, ArbiterStatus::Ok);
        assert_eq!(v, conf_in(d, s, &p));
        assert_eq!(unsafe { arbiter_conf_au(d, s, PARAMS, &mut v) }, ArbiterStatus::Ok);
        assert_eq!(v, conf_au(d, s, &p));
        assert_eq!(unsafe { arbiter_encounter_prob(d, s.max(0.01), &mut v) }, ArbiterStatus::Ok);
        assert_eq!(v, encounter_prob(d, s.max(0.01)).unwrap());
        let ap = ArbitrationParams { confidence: p, baseline: BaselineShape::default() };
        for (code, policy) in [(0, PolicyKind::Positive), (1, PolicyKind::Negative), (2, PolicyKind::BellShaped)] {
            assert_eq!(unsafe { arbiter_alpha(code, d, s, s, PARAMS, &mut v) }, ArbiterStatus::Ok);
            assert_eq!(v, alpha(policy, d, s, s, &ap).alpha);
        }
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut v = 0.0;
    let bad = ArbiterConfidence { range_d: -1.0, ..PARAMS };
    assert_eq!(unsafe { arbiter_conf_in(0.1, 0.0, bad, &mut v) }, ArbiterStatus::InvalidArgument);
    assert!(last_error().contains("range_d"));
    assert_eq!(unsafe { arbiter_conf_in(0.1, 0.0, PARAMS, ptr::null_mut()) }, ArbiterStatus::NullPointer);
    assert_eq!(unsafe { arbiter_alpha(9, 0.1, 0.0, 0.0, PARAMS, &mut v) }, ArbiterStatus::InvalidArgument);
    assert_eq!(unsafe { arbiter_conf_au(f64::NAN, 0.0, PARAMS, &mut v) }, ArbiterStatus::InvalidArgument);
    let mut m = ArbiterVec3::default();
    let x = ArbiterVec3 { x: 1.0, y: 0.0, z: 0.0 };
    assert_eq!(unsafe { arbiter_blend(x, x, 1.5, &mut m) }, ArbiterStatus::InvalidArgument);
    assert_eq!(unsafe { arbiter_blend(x, ArbiterVec3::default(), 0.25, &mut m) }, ArbiterStatus::Ok);
    assert_eq!(m, ArbiterVec3 { x: 0.75, y: 0.0, z: 0.0 });
}

#[test]
fn mann_whitney_wrapper() {
    let (a, b) = ([1.0, 2.0], [3.0, 4.0]);
    let mut t = ArbiterUTest::default();
    let st = unsafe { arbiter_mann_whitney(a.as_ptr(), 2, b.as_ptr(), 2, 0.001, 0.01, &mut t) };
    assert_eq!(st, ArbiterStatus::Ok);
    assert_eq!((t.u, t.exact, t.significance), (0.0, 1, 0));
    assert!((t.p - 1.0 / 3.0).abs() < 1e-12);
    let st = unsafe { arbiter_mann_whitney(ptr::null(), 0, b.as_ptr(), 2, 0.001, 0.01, &mut t) };
    assert_eq!(st, ArbiterStatus::EmptySample);
    let st = unsafe { arbiter_mann_whitney(ptr::null(), 3, b.as_ptr(), 2, 0.001, 0.01, &mut t) };
    assert_eq!(st, ArbiterStatus::NullPointer);
}

#[test]
fn session_runs_to_termination() {
    let mut s: *mut ArbiterSession = ptr::null_mut();
    let st = unsafe { arbiter_session_new(ptr::null(), ArbiterPolicy::Bell as i32, 0, 0, 0, 7, &mut s) };
    assert_eq!(st, ArbiterStatus::Ok);
    let mut step = ArbiterStep::default();
    let input = ArbiterVec3 { x: 0.0, y: 0.0, z: 0.0 };
    let mut n = 0;
    loop {
        let st = unsafe { arbiter_session_step(s, input, &mut step) };
        if st == ArbiterStatus::Terminated {
            break;
        }
        assert_eq!(st, ArbiterStatus::Ok);
        n += 1;
        assert!(n < 10_000);
    }
    assert_ne!(step.outcome, ArbiterOutcome::Running as i32);
    assert_eq!(unsafe { arbiter_session_steps(s) }, n);
    unsafe { arbiter_session_free(s) };
    unsafe { arbiter_session_free(ptr::null_mut()) };
}

#[test]
fn session_rejects_bad_config_and_levels() {
    let mut s: *mut ArbiterSession = ptr::null_mut();
    let cfg = CString::new("[sim]\nbogus = 1\n").unwrap();
    assert_eq!(unsafe { arbiter_session_new(cfg.as_ptr(), 2, 0, 0, 0, 1, &mut s) }, ArbiterStatus::Config);
    assert!(last_error().contains("bogus"));
    assert_eq!(unsafe { arbiter_session_new(ptr::null(), 2, 0, 7, 0, 1, &mut s) }, ArbiterStatus::InvalidArgument);
    assert!(s.is_null());
    let st = unsafe { arbiter_session_step(ptr::null_mut(), ArbiterVec3::default(), ptr::null_mut()) };
    assert_eq!(st, ArbiterStatus::NullPointer);
}

/// Compile and run a C program against the generated header and static library.
#[test]
fn c_smoke_program() {
    let Ok(cc) = which_cc() else {
        eprintln!("skipping: no C compiler");
        return;
    };
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test-binary>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libarbiter_ffi.a");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("arbiter_smoke");
    let status = Command::new(cc)
        .arg(crate_dir.join("tests/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C smoke program failed to build");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
