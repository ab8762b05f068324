use std::io::Write;
use std::process::{Command, Output};

use selflink_cli::report::{Body, Report, SCHEMA_VERSION};

fn selflink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selflink"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json_report(o: &Output) -> Report {
    serde_json::from_slice(&o.stdout).expect("stdout is a report")
}

fn spec_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn intersection_selflink_report_round_trips() {
    let o = selflink(&[
        "selflink",
        "preset:example1?A=1.3",
        "--bundle",
        "orthogonal",
        "--method",
        "intersection",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json_report(&o);
    assert_eq!(report.schema_version, SCHEMA_VERSION);
    assert_eq!(report.command, "selflink");
    assert!(report.pass);
    let Body::Invariant { outcomes, .. } = &report.body else {
        panic!("expected an invariant body");
    };
    assert_eq!(outcomes[0].result.as_ref().unwrap().value, 0);
    // serializing the parsed report reproduces the same document
    let again: Report = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(again, report);
}

#[test]
fn hopf_pair_from_files() {
    let a = spec_file(r#"{"dim": 3, "coords": [{"cos": {"1": 1.0}}, {"sin": {"1": 1.0}}, {}]}"#);
    let b = spec_file(
        r#"{"dim": 3, "coords": [{"const": 1.0, "cos": {"1": 1.0}}, {}, {"sin": {"1": 1.0}}]}"#,
    );
    let (pa, pb) = (a.path().to_str().unwrap(), b.path().to_str().unwrap());
    let o = selflink(&[
        "linking", pa, pb, "--method", "both", "--grid", "128", "--format", "json",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let Body::Invariant { outcomes, .. } = json_report(&o).body else {
        panic!("expected an invariant body");
    };
    assert_eq!(outcomes.len(), 2);
    for m in &outcomes {
        assert_eq!(m.result.as_ref().unwrap().value, -1, "{}", m.method);
    }
}

#[test]
fn preset_spec_file_matches_the_preset_argument() {
    let f = spec_file(r#"{"preset": "example2", "A": 1.6}"#);
    let path = f.path().to_str().unwrap();
    let run = |curve: &str| {
        let o = selflink(&[
            "selflink",
            curve,
            "--method",
            "intersection",
            "--format",
            "json",
        ]);
        assert_eq!(code(&o), 0);
        let Body::Invariant { outcomes, .. } = json_report(&o).body else {
            panic!("expected an invariant body");
        };
        outcomes[0].result.as_ref().unwrap().value
    };
    assert_eq!(run(path), 3);
    assert_eq!(run("preset:example2?A=1.6"), 3);
}

#[test]
fn malformed_spec_exits_with_an_input_error() {
    let f = spec_file("{\"dim\": 3,\n \"coords\": [");
    let o = selflink(&["check", f.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn unknown_fields_and_presets_are_input_errors() {
    let f = spec_file(r#"{"dim": 3, "coords": [{}, {}, {}], "extra": 1}"#);
    assert_eq!(code(&selflink(&["check", f.path().to_str().unwrap()])), 2);
    assert_eq!(code(&selflink(&["check", "preset:nonesuch?A=1"])), 2);
    assert_eq!(code(&selflink(&["check", "preset:example1"])), 2);
    assert_eq!(code(&selflink(&["check", "/no/such/file.json"])), 2);
}

#[test]
fn out_of_range_settings_are_argument_errors() {
    assert_eq!(
        code(&selflink(&[
            "selflink",
            "preset:example1?A=1",
            "--grid",
            "100"
        ])),
        2
    );
    assert_eq!(
        code(&selflink(&[
            "selflink",
            "preset:example1?A=1",
            "--tol",
            "0.7"
        ])),
        2
    );
    assert_eq!(
        code(&selflink(&[
            "selflink",
            "preset:example1?A=1",
            "--seeds",
            "8"
        ])),
        2
    );
    assert_eq!(code(&selflink(&["frobnicate"])), 2);
}

#[test]
fn check_passes_on_a_preset_and_fails_on_a_flat_curve() {
    let o = selflink(&["check", "preset:example1?A=1", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(json_report(&o).pass);

    // a circle in R⁴ has no second curvature, so the orthogonal bundle is undefined
    let flat =
        spec_file(r#"{"dim": 4, "coords": [{"cos": {"1": 1.0}}, {"sin": {"1": 1.0}}, {}, {}]}"#);
    let o = selflink(&["check", flat.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn intersection_method_needs_a_frenet_bundle() {
    let o = selflink(&[
        "selflink",
        "preset:example1?A=1",
        "--bundle",
        "coordinate",
        "--method",
        "intersection",
    ]);
    assert_ne!(code(&o), 0);
}
