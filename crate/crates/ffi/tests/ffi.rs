use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use logsp_ffi::*;

fn params(gamma: f64, a: f64, p: f64, c: f64) -> LogspParams {
    LogspParams { gamma, a, p, c }
}

fn last_error() -> String {
    let msg = logsp_last_error();
    assert!(!msg.is_null());
    unsafe { CStr::from_ptr(msg) }.to_string_lossy().into_owned()
}

#[test]
fn classify_and_names() {
    let mut tag = LogspRegime::OpenUnknown;
    let st = unsafe { logsp_classify(&params(1.0, 1.0, 3.0, 1.0), &mut tag) };
    assert_eq!(st, LogspStatus::Ok);
    assert_eq!(tag, LogspRegime::GlobalMin);
    let name = unsafe { CStr::from_ptr(logsp_regime_name(tag)) };
    assert_eq!(name.to_str().unwrap(), "GlobalMin");

    let st = unsafe { logsp_classify(&params(-1.0, -1.0, 3.0, 1.0), &mut tag) };
    assert_eq!(st, LogspStatus::Ok);
    assert_eq!(tag, LogspRegime::NoCriticalPoint);
}

#[test]
fn invalid_arguments_set_last_error() {
    let mut tag = LogspRegime::OpenUnknown;
    let st = unsafe { logsp_classify(&params(1.0, 1.0, 2.0, 1.0), &mut tag) };
    assert_eq!(st, LogspStatus::InvalidArgument);
    assert!(last_error().contains("p must exceed 2"));

    let st = unsafe { logsp_classify(ptr::null(), &mut tag) };
    assert_eq!(st, LogspStatus::NullPointer);

    let mut field = ptr::null_mut();
    let st = unsafe { logsp_field_gaussian(100, 20.0, 1.0, 1.0, &mut field) };
    assert_eq!(st, LogspStatus::InvalidArgument);
    assert!(field.is_null());
}

#[test]
fn fiber_points_match_closed_form() {
    let mut pts = [LogspFiberPoint { s: 0.0, branch: LogspBranch::Zero, g: 0.0, gpp: 0.0 }; 2];
    let mut count = 0;
    let st = unsafe { logsp_fiber_points(&params(1.0, 1.0, 6.0, 1.0), 1.0, 1.0, 0.0, pts.as_mut_ptr(), 2, &mut count) };
    assert_eq!(st, LogspStatus::Ok);
    assert_eq!(count, 2);
    let d = (1.0f64 / 3.0).sqrt();
    assert!((pts[0].s - (0.75 * (1.0 - d)).sqrt()).abs() < 1e-10);
    assert!((pts[1].s - (0.75 * (1.0 + d)).sqrt()).abs() < 1e-10);
    assert_eq!(pts[0].branch, LogspBranch::Plus);
    assert_eq!(pts[1].branch, LogspBranch::Minus);
}

#[test]
fn field_roundtrip_and_energy() {
    let mut field = ptr::null_mut();
    assert_eq!(unsafe { logsp_field_gaussian(128, 20.0, 1.0, 2.0, &mut field) }, LogspStatus::Ok);
    let mut e = LogspEnergy::default();
    assert_eq!(unsafe { logsp_energy(field, &params(1.0, 1.0, 3.0, 2.0), &mut e) }, LogspStatus::Ok);
    assert!((e.mass - 2.0).abs() < 1e-12);
    assert!((e.kinetic - 2.0).abs() < 1e-3);
    assert!((e.interaction - (e.v1 - e.v2)).abs() < 1e-10);

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("u.lpf").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { logsp_field_save(field, path.as_ptr()) }, LogspStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { logsp_field_load(path.as_ptr(), &mut back) }, LogspStatus::Ok);
    let (mut n, mut extent) = (0, 0.0);
    assert_eq!(unsafe { logsp_field_grid(back, &mut n, &mut extent) }, LogspStatus::Ok);
    assert_eq!((n, extent), (128, 20.0));
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n * n];
    assert_eq!(unsafe { logsp_field_values(field, a.as_mut_ptr(), a.len()) }, LogspStatus::Ok);
    assert_eq!(unsafe { logsp_field_values(back, b.as_mut_ptr(), b.len()) }, LogspStatus::Ok);
    assert_eq!(a, b);
    assert_eq!(unsafe { logsp_field_values(back, b.as_mut_ptr(), 3) }, LogspStatus::InvalidArgument);

    let missing = CString::new(dir.path().join("missing.lpf").to_str().unwrap()).unwrap();
    let mut none = ptr::null_mut();
    assert_eq!(unsafe { logsp_field_load(missing.as_ptr(), &mut none) }, LogspStatus::Io);
    unsafe {
        logsp_field_free(field);
        logsp_field_free(back);
        logsp_field_free(ptr::null_mut());
    }
}

#[test]
fn solve_and_refuse() {
    let mut report = ptr::null_mut();
    let st = unsafe { logsp_solve(&params(-1.0, -1.0, 3.0, 1.0), 64, 20.0, LogspMethod::GlobalMinimize, LogspBranch::Plus, 0, &mut report) };
    assert_eq!(st, LogspStatus::RegimeRefusal);
    assert!(report.is_null());
    assert!(last_error().contains("NoCriticalPoint"));

    let st = unsafe { logsp_solve(&params(1.0, 0.0, 3.0, 1.0), 128, 48.0, LogspMethod::GlobalMinimize, LogspBranch::Plus, 0, &mut report) };
    assert_eq!(st, LogspStatus::Ok, "{}", last_error());
    let mut res = LogspResiduals::default();
    let mut e = LogspEnergy::default();
    unsafe {
        assert_eq!(logsp_report_residuals(report, &mut res), LogspStatus::Ok);
        assert_eq!(logsp_report_energy(report, &mut e), LogspStatus::Ok);
    }
    assert!(res.converged);
    assert!(res.el_residual < 1e-4 && res.q_residual < 1e-4);
    assert!((e.mass - 1.0).abs() < 1e-10);
    let mut field = ptr::null_mut();
    assert_eq!(unsafe { logsp_report_field(report, &mut field) }, LogspStatus::Ok);
    unsafe {
        logsp_field_free(field);
        logsp_report_free(report);
    }
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/logsp.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["logsp_last_error", "logsp_classify", "logsp_solve", "logsp_field_free", "LOGSP_STATUS_OK"] {
        assert!(text.contains(name), "header lacks {name}");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"logsp.h\"\nint main(void) { LogspParams p = {1, 1, 3, 1}; LogspRegime t; return logsp_classify(&p, &t) == LOGSP_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
        .expect("C compiler available");
    assert!(status.success());
}
