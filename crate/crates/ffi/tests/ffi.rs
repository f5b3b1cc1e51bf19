// SPDX-License-Identifier: Apache-2.0

use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use sqnl_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(sqnl_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn generator(width: u32, len: u64, mode: SqnlMode, alpha: i64) -> *mut SqnlGenerator {
    let mut gen = ptr::null_mut();
    let status = unsafe { sqnl_generator_new(width, len, mode, alpha, &mut gen) };
    assert_eq!(status, SqnlStatus::Ok, "{}", last_error());
    gen
}

#[test]
fn generator_round_trip() {
    let gen = generator(8, 128, SqnlMode::Gated, 0);
    let mut out = 0i64;
    unsafe {
        assert_eq!(
            sqnl_generator_eval(gen, 40, true, 40, &mut out),
            SqnlStatus::Ok
        );
        assert_eq!(out, 24);
        assert_eq!(
            sqnl_generator_eval(gen, 40, false, 0, &mut out),
            SqnlStatus::InvalidArgument
        );
        assert!(last_error().contains("scaling level"));
        assert_eq!(
            sqnl_generator_eval(gen, 40, true, 65, &mut out),
            SqnlStatus::OutOfRange
        );
        assert_eq!(
            sqnl_generator_eval(gen, 200, true, 40, &mut out),
            SqnlStatus::OutOfRange
        );
        sqnl_generator_free(gen);
    }
}

#[test]
fn generator_map_buffer_protocol() {
    let gen = generator(8, 8, SqnlMode::LogSqnl, 0);
    let mut written = 0usize;
    unsafe {
        let status = sqnl_generator_map(gen, false, 0, ptr::null_mut(), 0, &mut written);
        assert_eq!(status, SqnlStatus::BufferTooSmall);
        assert_eq!(written, 256);
        let mut buf = vec![-1i64; written];
        let status = sqnl_generator_map(gen, false, 0, buf.as_mut_ptr(), buf.len(), &mut written);
        assert_eq!(status, SqnlStatus::Ok);
        assert_eq!(buf[128], 32);
        assert!(buf.iter().all(|v| (0..=64).contains(v)));
        sqnl_generator_free(gen);
    }
}

#[test]
fn invalid_configs_and_nulls() {
    let mut gen = ptr::null_mut();
    unsafe {
        assert_eq!(
            sqnl_generator_new(8, 6, SqnlMode::Symmetric, 0, &mut gen),
            SqnlStatus::InvalidArgument
        );
        assert!(gen.is_null());
        assert_eq!(
            sqnl_generator_new(8, 8, SqnlMode::Asymmetric, 100, &mut gen),
            SqnlStatus::OutOfRange
        );
        assert_eq!(
            sqnl_generator_new(8, 8, SqnlMode::Symmetric, 0, ptr::null_mut()),
            SqnlStatus::NullPointer
        );
        let mut out = 0i64;
        assert_eq!(
            sqnl_generator_eval(ptr::null(), 0, false, 0, &mut out),
            SqnlStatus::NullPointer
        );
        sqnl_generator_free(ptr::null_mut());
        sqnl_lstm_free(ptr::null_mut());
    }
    let msg = unsafe { CStr::from_ptr(sqnl_status_message(SqnlStatus::BufferTooSmall)) };
    assert_eq!(msg.to_str().unwrap(), "output buffer too small");
}

#[test]
fn activations_and_costs() {
    let mut y = 0.0;
    unsafe {
        assert_eq!(
            sqnl_activate(SqnlActivation::Sqnl, 1.0, &mut y),
            SqnlStatus::Ok
        );
        assert_eq!(y, 0.75);
        assert_eq!(
            sqnl_derivative(SqnlActivation::SqReu, -2.0, &mut y),
            SqnlStatus::Ok
        );
        assert_eq!(y, -1.0);
        assert_eq!(
            sqnl_activate(SqnlActivation::Sqnl, f64::NAN, &mut y),
            SqnlStatus::InvalidArgument
        );

        let mut gates = 0u64;
        let kind = CString::new("lut_two_sided").unwrap();
        assert_eq!(
            sqnl_gate_cost(kind.as_ptr(), 12, &mut gates),
            SqnlStatus::Ok
        );
        assert_eq!(gates, 147_420);
        let kind = CString::new("booth_multiplier").unwrap();
        assert_eq!(
            sqnl_gate_cost(kind.as_ptr(), 10, &mut gates),
            SqnlStatus::Unsupported
        );

        let (mut num, mut den) = (0i64, 0i64);
        assert_eq!(
            sqnl_gated_exact(8, 64, 40, &mut num, &mut den),
            SqnlStatus::Ok
        );
        assert_eq!((num, den), (135, 4));
    }
}

fn fixture(name: &str) -> CString {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name);
    CString::new(std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn lstm_handle() {
    let mut lstm = ptr::null_mut();
    unsafe {
        assert_eq!(
            sqnl_lstm_from_json(fixture("zero.json").as_ptr(), &mut lstm),
            SqnlStatus::Ok
        );
        let x = [0i64, 0];
        let mut h = [7i64; 4];
        let mut c = [7i64; 4];
        assert_eq!(
            sqnl_lstm_step(lstm, x.as_ptr(), 2, h.as_mut_ptr(), c.as_mut_ptr(), 4),
            SqnlStatus::Ok
        );
        assert_eq!(h, [0; 4]);
        assert_eq!(c, [0; 4]);
        assert_eq!(
            sqnl_lstm_step(lstm, x.as_ptr(), 1, h.as_mut_ptr(), ptr::null_mut(), 4),
            SqnlStatus::DimensionMismatch
        );
        sqnl_lstm_free(lstm);

        let mut bad = ptr::null_mut();
        assert_eq!(
            sqnl_lstm_from_json(fixture("mismatched.json").as_ptr(), &mut bad),
            SqnlStatus::DimensionMismatch
        );
        let junk = CString::new("{not json").unwrap();
        assert_eq!(
            sqnl_lstm_from_json(junk.as_ptr(), &mut bad),
            SqnlStatus::ParseError
        );
        assert!(bad.is_null());
    }
}

#[test]
fn header_declares_the_api() {
    let header =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/sqnl.h"))
            .unwrap();
    for name in [
        "sqnl_generator_new",
        "sqnl_generator_eval",
        "sqnl_generator_map",
        "sqnl_generator_free",
        "sqnl_activate",
        "sqnl_derivative",
        "sqnl_gate_cost",
        "sqnl_gated_exact",
        "sqnl_lstm_from_json",
        "sqnl_lstm_step",
        "sqnl_lstm_free",
        "sqnl_status_message",
        "sqnl_last_error",
        "typedef struct SqnlGenerator SqnlGenerator;",
        "SQNL_STATUS_OK = 0",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

fn static_lib() -> Option<PathBuf> {
    let deps = std::env::current_exe().ok()?.parent()?.to_path_buf();
    let lib = deps.parent()?.join("libsqnl_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn c_program_links_against_header() {
    let Some(lib) = static_lib() else {
        eprintln!("static library not found, skipping");
        return;
    };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler, skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include "sqnl.h"
#include <stdio.h>
int main(void) {
    SqnlGenerator *gen = NULL;
    if (sqnl_generator_new(8, 128, SQNL_MODE_GATED, 0, &gen) != SQNL_STATUS_OK) return 1;
    int64_t out = 0;
    if (sqnl_generator_eval(gen, 40, true, 40, &out) != SQNL_STATUS_OK) return 2;
    sqnl_generator_free(gen);
    double y = 0;
    sqnl_activate(SQNL_ACTIVATION_SQNL, 1.0, &y);
    printf("%lld %.2f\n", (long long)out, y);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("smoke");
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "24 0.75\n");
}
