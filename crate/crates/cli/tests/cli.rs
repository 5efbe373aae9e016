use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use solk_core::ktheory::{full_report, KTheoryReport, ReportOptions};
use solk_core::presentation::parse_presentation;

fn corpus(name: &str) -> String {
    let p: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name);
    p.to_string_lossy().into_owned()
}

fn solk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solk"))
        .args(args)
        .env_remove("SOLK_PRECISION")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON on stdout")
}

#[test]
fn check_exit_codes() {
    assert_eq!(code(&solk(&["check", &corpus("fib.sol")])), 0);
    let o = solk(&["check", &corpus("nonorientable.sol")]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("parity witness: a[2] = ~b, b[1] = a"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not orientable"));
    assert_eq!(code(&solk(&["check", "/nonexistent/x.sol"])), 1);
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(code(&solk(&["frobnicate"])), 1);
    assert_eq!(code(&solk(&["check"])), 1);
    assert_eq!(
        code(&solk(&["check", &corpus("fib.sol"), "--precision", "-1"])),
        1
    );
    assert_eq!(
        code(&solk(&["check", &corpus("fib.sol"), "--bound", "0"])),
        1
    );
    assert_eq!(code(&solk(&["--help"])), 0);
}

#[test]
fn parse_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.sol");
    std::fs::write(&bad, "edges: a b\na -> a c\nb -> a\n").unwrap();
    let o = solk(&["check", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains(":2:"));
}

#[test]
fn ktheory_json_for_circle_coverings() {
    let o = solk(&["ktheory", &corpus("power2.sol"), "--json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        json(&o)["Ru"]["K0"],
        serde_json::json!({"free_rank": 1, "torsion": []})
    );
    let o = solk(&["ktheory", &corpus("power3.sol"), "--json"]);
    assert_eq!(json(&o)["Ru"]["K0"]["torsion"], serde_json::json!([2]));
    assert_eq!(json(&o)["U"]["K0"]["notation"], "Z[1/3]");
}

#[test]
fn ktheory_json_round_trips_and_matches_the_library() {
    let o = solk(&["ktheory", &corpus("fib.sol"), "--json"]);
    assert_eq!(code(&o), 0);
    let parsed: KTheoryReport = serde_json::from_slice(&o.stdout).unwrap();
    let p = parse_presentation(&std::fs::read_to_string(corpus("fib.sol")).unwrap()).unwrap();
    assert_eq!(parsed, full_report(&p, &ReportOptions::default()));
    assert_eq!(parsed.duality_check, Some(true));
    for g in ["Ru", "Rs"] {
        for k in ["K0", "K1"] {
            assert_eq!(
                json(&o)[g][k],
                serde_json::json!({"free_rank": 1, "torsion": []})
            );
        }
    }
    // emit(parse(emit(r))) is byte-identical
    let again = serde_json::to_string_pretty(&parsed).unwrap() + "\n";
    assert_eq!(again, stdout(&o));
}

#[test]
fn gate_failure_still_reports() {
    let o = solk(&["ktheory", &corpus("identity.sol"), "--json"]);
    assert_eq!(code(&o), 2);
    let v = json(&o);
    assert_eq!(v["axioms"]["expanding"], false);
    assert!(v["Ru"].is_null());
}

#[test]
fn state_values() {
    let o = solk(&[
        "state",
        &corpus("power2.sol"),
        "1",
        "--stage",
        "3",
        "--json",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["exact"], "1/8");
    let o = solk(&["state", &corpus("fib.sol"), "0,0", "--json"]);
    assert_eq!(json(&o)["state"]["lo"], json(&o)["state"]["hi"]);
    assert_eq!(json(&o)["positivity"]["value"], "zero");
    let o = solk(&["state", &corpus("fib.sol"), "1,0"]);
    assert!(stdout(&o).starts_with("state:      0.6180339887498948482"));
    assert_eq!(code(&solk(&["state", &corpus("fib.sol"), "1,0,0"])), 1);
    assert_eq!(code(&solk(&["state", &corpus("reducible.sol"), "1,0"])), 2);
}

#[test]
fn precision_from_environment_and_flag() {
    let width = |o: &Output| {
        let v = json(o);
        let r = solk_core::spectral::parse_rational(v["perron"]["lambda"]["hi"].as_str().unwrap())
            .unwrap()
            - solk_core::spectral::parse_rational(v["perron"]["lambda"]["lo"].as_str().unwrap())
                .unwrap();
        solk_core::spectral::rational_to_f64(&r)
    };
    let env = Command::new(env!("CARGO_BIN_EXE_solk"))
        .args(["perron", &corpus("fib.sol"), "--json"])
        .env("SOLK_PRECISION", "1e-6")
        .output()
        .unwrap();
    let w_env = width(&env);
    assert!(w_env <= 1e-6 && w_env > 1e-30);
    let flag = solk(&[
        "perron",
        &corpus("fib.sol"),
        "--json",
        "--precision",
        "1/1000000000000",
    ]);
    assert!(width(&flag) <= 1e-12);
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["ktheory", "FILE"],
        vec![
            "smale",
            "FILE",
            "--samples",
            "50",
            "--depth",
            "15",
            "--seed",
            "9",
        ],
        vec!["oracle", "bracket", "FILE", "--count", "5"],
    ] {
        let args: Vec<String> = args
            .iter()
            .map(|a| {
                if *a == "FILE" {
                    corpus("fib.sol")
                } else {
                    a.to_string()
                }
            })
            .collect();
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = solk(&args);
        let b = solk(&args);
        assert_eq!(code(&a), 0, "{args:?}");
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn smale_json_report() {
    let o = solk(&[
        "smale",
        &corpus("fib.sol"),
        "--samples",
        "40",
        "--depth",
        "20",
        "--json",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["passes"], true);
    assert_eq!(v["depth"], 20);
    assert_eq!(code(&solk(&["smale", &corpus("folding.sol")])), 2);
}

#[test]
fn oracle_subjects() {
    let o = solk(&["oracle", "snf", "--seed", "7"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("snf: agree (100 cases"));
    let o = solk(&["oracle", "cokernel", "[[3]]", "--json"]);
    assert_eq!(json(&o)["status"], "agree");
    assert!(stdout(&o).contains("Z/2"));
    let o = solk(&["oracle", "positivity", "[[2,1],[1,1]]"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("decided 1000 of 1000"));
    let o = solk(&["oracle", "orientability", &corpus("nonorientable.sol")]);
    assert_eq!(code(&o), 0);
    // singular I - M: nothing to enumerate
    let o = solk(&["oracle", "cokernel", &corpus("identity.sol"), "--json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["status"], "oracle exhausted");
    assert_eq!(code(&solk(&["oracle", "bracket"])), 1);
}

#[test]
fn corpus_directory_runner() {
    let dir = corpus("");
    let o = solk(&["ktheory", &dir, "--json"]);
    assert_eq!(code(&o), 2);
    let items = json(&o);
    let items = items.as_array().unwrap();
    assert_eq!(items.len(), 14);
    let fib = items
        .iter()
        .find(|i| i["file"].as_str().unwrap().ends_with("fib.sol"))
        .unwrap();
    assert_eq!(fib["report"]["duality_check"], true);
    let o = solk(&["check", &dir]);
    assert!(stdout(&o).contains("== "));
}
