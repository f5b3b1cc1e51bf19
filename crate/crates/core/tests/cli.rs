// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sqnl::goldens::brute_force_eq1;
use sqnl::{GeneratorConfig, GeneratorMode};

fn sqnl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqnl"))
        .args(args)
        .env_remove("SQNL_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn deviate_small_width_matches_brute_force() {
    let out = sqnl(&["deviate", "--r", "4", "--n", "8"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let cfg = GeneratorConfig::new(4, 8, GeneratorMode::Symmetric).unwrap();
    let body = stdout(&out);
    let mut lines = body.lines();
    assert_eq!(
        lines.next(),
        Some("n,average,ideal,deviation,lsb_deviation,output_error")
    );
    let mut rows = 0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let n: i64 = cols[0].parse().unwrap();
        let exact = brute_force_eq1(n, &cfg, None).unwrap();
        let average: f64 = cols[1].parse().unwrap();
        assert_eq!(
            average,
            *exact.numer() as f64 / *exact.denom() as f64,
            "n={n}"
        );
        rows += 1;
    }
    assert_eq!(rows, 16);
}

#[test]
fn deviate_writes_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let hist = dir.path().join("hist.csv");
    let out = sqnl(&[
        "deviate",
        "--r",
        "8",
        "--n",
        "8",
        "--bins",
        "8",
        "--hist-out",
        hist.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(hist).unwrap();
    let total: u64 = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 256);
}

#[test]
fn output_is_deterministic_and_honours_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_sqnl"))
            .args(["fit", "--seed", "3", "--oversample", "256", "--out", name])
            .env("SQNL_OUT_DIR", dir.path())
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
        std::fs::read(dir.path().join(name)).unwrap()
    };
    let a = run("a.csv");
    let b = run("b.csv");
    assert_eq!(a, b);
    assert!(String::from_utf8(a)
        .unwrap()
        .starts_with("a,b,rmse,iterations,converged\n"));
}

#[test]
fn estimate_from_bom_file() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, r#"{"label": "none", "items": []}"#).unwrap();
    let out = sqnl(&["estimate", "--bom", empty.to_str().unwrap()]);
    assert_eq!(stdout(&out), "label,gates\nnone,0\n");

    let bom = dir.path().join("bom.json");
    std::fs::write(
        &bom,
        r#"{"label": "mix", "items": [
            {"kind": "booth_multiplier", "width": 8, "count": 1},
            {"kind": "adder", "width": 9, "count": 1}]}"#,
    )
    .unwrap();
    let out = sqnl(&[
        "estimate",
        "--bom",
        bom.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(rows[0]["gates"], 835);
}

#[test]
fn lstm_fixtures() {
    let zero = fixture("zero.json");
    let out = sqnl(&["lstm", "--fixture", zero.to_str().unwrap(), "--steps", "1"]);
    assert!(out.status.success());
    assert!(stdout(&out).lines().skip(1).all(|l| l.ends_with(",0,0")));

    let rand = fixture("rand.json");
    let out = sqnl(&[
        "lstm",
        "--fixture",
        rand.to_str().unwrap(),
        "--steps",
        "100",
        "--compare-float",
    ]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("divergence_lsb="), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 401);

    let bad = fixture("mismatched.json");
    let out = sqnl(&["lstm", "--fixture", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("dimension mismatch"));
}

#[test]
fn exit_codes() {
    assert_eq!(sqnl(&[]).status.code(), Some(2));
    assert_eq!(
        sqnl(&["map", "--r", "8", "--n", "8", "--nope"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        sqnl(&["map", "--r", "30", "--n", "8"]).status.code(),
        Some(3)
    );
    assert_eq!(sqnl(&["fit", "--oversample", "1"]).status.code(), Some(3));
    let help = sqnl(&["lstm", "--help"]);
    assert!(help.status.success());
    for flag in [
        "--fixture",
        "--steps",
        "--compare-float",
        "--format",
        "--out",
    ] {
        assert!(stdout(&help).contains(flag), "{flag}");
    }
}
