//! Golden reports for every command at q = 2, schema round trips, and exit
//! codes of the installed binary.

use std::path::PathBuf;
use std::process::Command;

use serde::de::DeserializeOwned;
use serde_json::Value;

use ffrunner::cli::{self, ExtremalReport, IrreduciblesReport, LonelinessReport, WithModulus};
use ffrunner::covering::CoverageResult;
use ffrunner::sunflower::SunflowerJson;
use ffrunner::verify::{MinCoverResult, SuiteReport};

fn golden(name: &str) -> Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap()
}

fn run(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let code = cli::run(
        std::iter::once("ffrunner").chain(args.iter().copied()),
        &mut out,
    );
    (code, String::from_utf8(out).unwrap())
}

/// Runs twice, checks identical output and exit 0, and returns the report
/// without its timings.
fn report(args: &[&str]) -> Value {
    let (code, first) = run(args);
    assert_eq!(code, 0, "{args:?}");
    let (_, second) = run(args);
    let mut a: Value = serde_json::from_str(&first).unwrap();
    let mut b: Value = serde_json::from_str(&second).unwrap();
    if let Some(obj) = a.as_object_mut() {
        obj.remove("timings");
    }
    if let Some(obj) = b.as_object_mut() {
        obj.remove("timings");
    }
    assert_eq!(a, b, "{args:?} is not deterministic");
    if !first.contains("\"timings\"") {
        assert_eq!(first, second);
    }
    a
}

fn round_trip<T: DeserializeOwned + serde::Serialize>(v: &Value) {
    let typed: T = serde_json::from_value(v.clone()).unwrap();
    assert_eq!(serde_json::to_value(&typed).unwrap(), *v);
}

#[test]
fn loneliness_golden() {
    let v = report(&["loneliness", "--q", "2", "--speeds", "[1],[0,1],[1,1]"]);
    assert_eq!(v, golden("loneliness.json"));
    round_trip::<LonelinessReport>(&v);
}

#[test]
fn covers_golden() {
    let v = report(&["covers", "--q", "2", "--k", "1", "--speeds", "[1]"]);
    assert_eq!(v, golden("covers.json"));
    round_trip::<CoverageResult>(&v);
}

#[test]
fn min_cover_golden() {
    let v = report(&["min-cover", "--q", "2", "--k", "2", "--max-deg", "2"]);
    assert_eq!(v, golden("min_cover.json"));
    round_trip::<WithModulus<MinCoverResult>>(&v);
}

#[test]
fn sunflowers_golden() {
    let v = report(&[
        "sunflowers",
        "--q",
        "2",
        "--speeds",
        "1,T,T+1,T^2,T^2+1,T^2+T,T^2+T+1",
    ]);
    assert_eq!(v, golden("sunflowers.json"));
    round_trip::<WithModulus<SunflowerJson>>(&v);
}

#[test]
fn gen_extremal_golden() {
    let v = report(&["gen-extremal", "--q", "2", "--k", "2"]);
    assert_eq!(v, golden("gen_extremal.json"));
    round_trip::<ExtremalReport>(&v);
}

#[test]
fn irreducibles_golden() {
    let v = report(&["irreducibles", "--q", "2", "--m", "4", "--list"]);
    assert_eq!(v, golden("irreducibles.json"));
    round_trip::<IrreduciblesReport>(&v);
}

#[test]
fn verify_golden() {
    let v = report(&["verify", "--suite", "extremal-family", "--q", "2"]);
    assert_eq!(v, golden("verify_extremal_family.json"));
    let (_, text) = run(&["verify", "--suite", "extremal-family"]);
    let typed: SuiteReport = serde_json::from_str(&text).unwrap();
    assert!(typed.pass);
    assert!(!typed.timings.is_empty());
}

#[test]
fn speeds_file_matches_inline() {
    let dir = std::env::temp_dir().join(format!("ffrunner-golden-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("speeds.json");
    std::fs::write(&path, "[[1],[0,1],[1,1]]").unwrap();
    let v = report(&[
        "loneliness",
        "--q",
        "2",
        "--speeds-file",
        path.to_str().unwrap(),
    ]);
    assert_eq!(v, golden("loneliness.json"));
    std::fs::remove_dir_all(&dir).unwrap();
}

fn binary(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ffrunner"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
    )
}

#[test]
fn binary_exit_codes() {
    let (code, text) = binary(&["covers", "--q", "2", "--k", "1", "--speeds", "[1]"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v, golden("covers.json"));
    assert_eq!(binary(&["covers", "--q", "2"]).0, 2);
    assert_eq!(binary(&["loneliness", "--q", "2", "--speeds", "[0]"]).0, 2);
    assert_eq!(binary(&["loneliness", "--q", "2", "--speeds", "T^x"]).0, 2);
    assert_eq!(
        binary(&[
            "covers",
            "--q",
            "2",
            "--k",
            "3",
            "--speeds",
            "[1]",
            "--bitmap-cap",
            "4"
        ])
        .0,
        3
    );
    assert_eq!(
        binary(&[
            "min-cover",
            "--q",
            "3",
            "--k",
            "2",
            "--max-deg",
            "2",
            "--node-cap",
            "2"
        ])
        .0,
        3
    );
}

#[test]
fn caps_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_ffrunner"))
        .args(["covers", "--q", "2", "--k", "3", "--speeds", "[1]"])
        .env("FFRUNNER_BITMAP_CAP", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}
