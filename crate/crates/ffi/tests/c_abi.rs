#![allow(clippy::excessive_precision)]

use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use quicktail_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    unsafe {
        qt_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(qt_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn scalar_functions() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(qt_mu(3, &mut v), QtStatus::Ok);
        assert!((v - 8.0 / 3.0).abs() < 1e-14);
        assert_eq!(qt_solve_w(std::f64::consts::E.powi(2), &mut v), QtStatus::Ok);
        assert!((v - 2.0).abs() < 1e-12);
        assert_eq!(qt_new_upper_f(20.0, 0.0, &mut v), QtStatus::Ok);
        assert!((v + 58.777_529_120_739_438).abs() < 1e-9);
        assert_eq!(qt_delta_gain(1e6, 0.0, &mut v), QtStatus::Ok);
        assert!((v / 5.387_577_699_485_035_4e-4 - 1.0).abs() < 1e-9);
        assert_eq!(qt_j(-1.0, &mut v), QtStatus::Domain);
        assert_eq!(qt_mu(3, ptr::null_mut()), QtStatus::NullPointer);
    }
    assert!(last_error().contains("out is null"));
}

#[test]
fn error_messages_are_per_call() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(qt_solve_w(1.0, &mut v), QtStatus::Domain);
    }
    let msg = last_error();
    assert!(msg.contains("x = 1"), "{msg}");
    let mut tiny = [0 as std::ffi::c_char; 4];
    let full = unsafe { qt_last_error(tiny.as_mut_ptr(), tiny.len()) };
    assert_eq!(full, msg.len());
    assert_eq!(tiny[3], 0);
}

#[test]
fn lambda_ratio_signs() {
    let (mut m, mut p, mut err) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(qt_lambda_ratio(8.0, QtVariant::Minus, 1e-12, &mut m, &mut err), QtStatus::Ok);
        assert_eq!(qt_lambda_ratio(8.0, QtVariant::Plus, 1e-12, &mut p, ptr::null_mut()), QtStatus::Ok);
        assert_eq!(qt_lambda_ratio(2.0, QtVariant::Plus, 1e-12, &mut p, ptr::null_mut()), QtStatus::Domain);
    }
    assert!(m < 0.0 && p > 0.0 && err <= 1e-9);
}

#[test]
fn pmf_handle_lifecycle() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(qt_pmf_new(10, QtMode::Rational, &mut h), QtStatus::Ok);
        let (mut off, mut len) = (0u64, 0usize);
        assert_eq!(qt_pmf_support(h, &mut off, &mut len), QtStatus::Ok);
        assert_eq!(off + len as u64 - 1, 45);
        let mut probs = vec![0.0; len];
        assert_eq!(qt_pmf_probs(h, probs.as_mut_ptr(), len), QtStatus::Ok);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let (mut mean, mut var) = (0.0, 0.0);
        assert_eq!(qt_pmf_moments(h, &mut mean, &mut var), QtStatus::Ok);
        assert!((mean - 30791.0 / 1260.0).abs() < 1e-12);
        let mut tail = 0.0;
        assert_eq!(qt_pmf_tail(h, QtDenom::N, -100.0, true, &mut tail), QtStatus::Ok);
        assert!((tail - 1.0).abs() < 1e-14);

        let mut g = ptr::null_mut();
        assert_eq!(qt_pmf_new(20, QtMode::Float, &mut g), QtStatus::Ok);
        let mut d = 0.0;
        assert_eq!(qt_pmf_ks_distance(h, g, QtDenom::N, &mut d), QtStatus::Ok);
        assert!(d > 0.0 && d < 0.5);
        qt_pmf_free(h);
        qt_pmf_free(g);
        qt_pmf_free(ptr::null_mut());

        let mut none = ptr::null_mut();
        assert_eq!(qt_pmf_new(31, QtMode::Rational, &mut none), QtStatus::SizeCap);
        assert!(none.is_null());
        assert_eq!(qt_pmf_support(ptr::null(), &mut off, &mut len), QtStatus::NullPointer);
    }
}

#[test]
fn psi_table_handle() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(qt_psi_new(4.0, 64, 1e-9, 50, &mut h), QtStatus::Ok);
        let mut len = 0;
        assert_eq!(qt_psi_len(h, &mut len), QtStatus::Ok);
        assert_eq!(len, 64);
        let mut t = vec![0.0; len];
        let mut l = vec![0.0; len];
        assert_eq!(qt_psi_values(h, t.as_mut_ptr(), l.as_mut_ptr(), len), QtStatus::Ok);
        assert_eq!(t[0], 0.0);
        assert_eq!(l[0], 0.0);
        let mut v = 0.0;
        assert_eq!(qt_psi_eval(h, 1.0, &mut v), QtStatus::Ok);
        assert!(v > 0.0);
        assert_eq!(qt_psi_eval(h, 5.0, &mut v), QtStatus::Domain);
        assert_eq!(qt_psi_fit_slack(h, 1.0, &mut v), QtStatus::Ok);
        assert!(v.is_finite());
        qt_psi_free(h);

        let mut u = ptr::null_mut();
        assert_eq!(qt_psi_new(4.0, 64, 1e-300, 1, &mut u), QtStatus::Convergence);
        assert!(!u.is_null());
        qt_psi_free(u);
    }
}

#[test]
fn sample_matches_library() {
    let xs = [0.5, 1.0];
    let mut counts = [0u64; 2];
    let mut s = QtSampleSummary::default();
    unsafe {
        assert_eq!(qt_sample(100, 2000, 7, xs.as_ptr(), counts.as_mut_ptr(), 2, &mut s), QtStatus::Ok);
        assert_eq!(qt_sample(100, 0, 7, ptr::null(), ptr::null_mut(), 0, &mut s), QtStatus::Invalid);
    }
    let b = quicktail::sampler::sample_batch(100, 2000, 7, &xs).unwrap();
    assert_eq!(s.mean.to_bits(), b.mean.to_bits());
    assert_eq!(counts[0], b.tail_counts[0].count);
}

fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_static_library() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libquicktail_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let bin = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("qt_smoke");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&bin)
        .arg(dir.join("tests/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl"])
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
