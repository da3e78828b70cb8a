use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn hybc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hybc"))
        .args(args)
        .env("HYBC_COLOR", "never")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hybc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn check_reports_types() {
    let o = hybc(&["check", &fixture("cat_state.qasm")]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "q0: qubit\nm0: qumode\n");
}

#[test]
fn check_flags_a_conflict() {
    let o = hybc(&["check", &fixture("conflict.qasm")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("TypeConflict"), "{}", stderr(&o));
}

#[test]
fn strict_mode_rejects_unresolved_wires() {
    let file = fixture("unconstrained.qasm");
    let o = hybc(&["check", &file]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = hybc(&["check", "--strict", &file]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("UnresolvedWire"), "{}", stderr(&o));
    assert!(stderr(&o).contains("m0"));
}

#[test]
fn check_json_has_metadata() {
    let v = json(&hybc(&[
        "check",
        "--format",
        "json",
        &fixture("cat_state.qasm"),
    ]));
    assert_eq!(v["types"]["q0"], "qubit");
    assert_eq!(v["types"]["m0"], "qumode");
    assert_eq!(v["metadata"]["tool"], "hybc");
    assert_eq!(v["diagnostics"], Value::Array(vec![]));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(
        hybc(&["check", "/definitely/not/here.qasm"]).status.code(),
        Some(1)
    );
    assert_eq!(hybc(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        hybc(&["simulate", "--shots", "0", &fixture("calibration.qasm")])
            .status
            .code(),
        Some(1)
    );
    let o = hybc(&["--version"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn decompose_counts_gates() {
    let v = json(&hybc(&["decompose", "--count", &fixture("cat_state.qasm")]));
    assert_eq!(v["gates"]["CD"], 3);
    assert_eq!(v["gates"]["H"], 6);
    assert_eq!(v["gates"]["S"], 2);
    assert_eq!(v["gates"]["Sdg"], 2);
    assert_eq!(v["ancilla_qubits"], 0);
    assert_eq!(v["metadata"]["gateset"], "sim-native");
}

#[test]
fn simulate_calibration_expval() {
    let v = json(&hybc(&["simulate", &fixture("calibration.qasm")]));
    let e = v["results"][0]["expval"].as_f64().unwrap();
    assert!((e - 1f64.cos()).abs() < 1e-6, "{e}");

    let o = hybc(&["simulate", "--format", "text", &fixture("calibration.qasm")]);
    let line = stdout(&o);
    let value: f64 = line
        .trim()
        .strip_prefix("expval: ")
        .expect("text line")
        .parse()
        .unwrap();
    assert!((value - 1f64.cos()).abs() < 1e-6);
}

#[test]
fn per_wire_cutoff_is_applied() {
    let coarse = json(&hybc(&[
        "simulate",
        "--cutoff-wire",
        "m1i1=4",
        &fixture("calibration.qasm"),
    ]));
    assert_eq!(coarse["metadata"]["cutoffs"]["per_wire"]["m1i1"], 4);
    let e = coarse["results"][0]["expval"].as_f64().unwrap();
    assert!(
        (e - 1f64.cos()).abs() > 1e-4,
        "truncation should show at cutoff 4: {e}"
    );
    assert_eq!(
        hybc(&[
            "simulate",
            "--cutoff-wire",
            "m1i1",
            &fixture("calibration.qasm")
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn seeded_shots_repeat() {
    let args = [
        "simulate",
        "--shots",
        "50",
        "--seed",
        "7",
        &fixture("cat_state.qasm"),
    ];
    let a = json(&hybc(&args));
    let b = json(&hybc(&args));
    assert_eq!(a, b);
    assert_eq!(a["metadata"]["seed"], 7);
    let r = &a["results"][0];
    assert_eq!(r["samples"].as_array().unwrap().len(), 50);
    let total: u64 = r["histogram"]
        .as_object()
        .unwrap()
        .values()
        .map(|c| c.as_u64().unwrap())
        .sum();
    assert_eq!(total, 50);
}

#[test]
fn exported_qasm_reparses() {
    let out = scratch("cat.qasm");
    let o = hybc(&[
        "export-qasm",
        "-o",
        out.to_str().unwrap(),
        &fixture("cat_state.qasm"),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(
        text.starts_with("OPENQASM 3.0;") || text.contains("\nOPENQASM 3.0;"),
        "{text}"
    );
    let o = hybc(&["check", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "q0: qubit\nm0: qumode\n");
    let again = scratch("cat2.qasm");
    assert!(hybc(&[
        "export-qasm",
        "-o",
        again.to_str().unwrap(),
        out.to_str().unwrap()
    ])
    .status
    .success());
    assert_eq!(std::fs::read_to_string(&again).unwrap(), text);
}

#[test]
fn jaqal_export_respects_the_device() {
    let small = scratch("one-ion.json");
    std::fs::write(&small, r#"{"n_qubits": 1}"#).unwrap();
    let o = hybc(&[
        "export-jaqal",
        "--device",
        small.to_str().unwrap(),
        &fixture("calibration.qasm"),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("m1i1"), "{}", stderr(&o));

    let bad = scratch("bad.json");
    std::fs::write(&bad, r#"{"n_qubits": 2, "bogus": true}"#).unwrap();
    let o = hybc(&[
        "export-jaqal",
        "--device",
        bad.to_str().unwrap(),
        &fixture("calibration.qasm"),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bogus"));

    let ok = scratch("three-ion.json");
    std::fs::write(&ok, r#"{"n_qubits": 3}"#).unwrap();
    let o = hybc(&[
        "export-jaqal",
        "--device",
        ok.to_str().unwrap(),
        &fixture("calibration.qasm"),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("register q[3]"));
    assert!(text.contains("usepulses"));
}
