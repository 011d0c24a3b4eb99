use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn loqe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loqe")).args(args).output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = loqe(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn worked() -> String {
    scenario("worked.json").display().to_string()
}

fn result<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["results"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["name"] == name)
        .unwrap()
}

fn without_wall_time(text: &[u8]) -> String {
    String::from_utf8_lossy(text)
        .lines()
        .filter(|l| !l.contains("wall_time_s"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn worked_efficiencies() {
    let report = json(&["efficiency", "--file", &worked()]);
    let value = |name: &str| result(&report, name)["value"].as_f64().unwrap();
    assert!((value("psi-d-2") - 1.0).abs() <= 1e-5);
    assert!((value("psi-prime-d-2") - 2.0).abs() <= 1e-5);
    assert!((value("psi-prime-s-1") - 0.5).abs() <= 1e-5);
    assert!((value("psi-prime-s-2") - 1.0).abs() <= 1e-5);
    assert!((value("phi-s-1") - 0.4).abs() <= 1e-5);
    let u = result(&report, "psi-prime-u-2");
    assert!((u["value"].as_f64().unwrap() - 1.0).abs() <= 1e-3);
    assert_eq!(u["bound"], "upper-bound");
    assert!(u["certificate"]["reconstruction_residual"].as_f64().unwrap() <= 1e-8);
    assert_eq!(result(&report, "psi-d-2")["bound"], "exact-to-tolerance");

    let table = &report["tables"][0]["rows"];
    for row in table.as_array().unwrap() {
        let (p, e) = (row["p"].as_f64().unwrap(), row["efficiency"].as_f64().unwrap());
        assert!((p - e).abs() <= 1e-5, "{p} {e}");
    }
    assert_eq!(report["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn single_state_from_the_command_line() {
    let report = json(&[
        "efficiency", "--file", &worked(), "--state", "psi_prime", "--measure", "s", "--k", "1",
    ]);
    assert_eq!(report["results"].as_array().unwrap().len(), 1);
    assert!((report["results"][0]["value"].as_f64().unwrap() - 0.5).abs() <= 1e-6);
    assert!(report["results"][0]["per_mode"].is_array());
}

#[test]
fn file_scenarios_hold() {
    let report = json(&["verify", "--file", &worked()]);
    assert_eq!(report["violations"], 0);
    let groups = report["groups"].as_array().unwrap();
    assert_eq!(groups.len(), 6);
    let random = groups.iter().find(|g| g["name"] == "random-four-mode").unwrap();
    let total: f64 = random["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["probability"].as_f64().unwrap())
        .sum();
    assert!(total <= 1.0 + 1e-12);
    assert!(random["rows"].as_array().unwrap().len() >= 2);
}

#[test]
fn suites_report_no_violations() {
    for (suite, rows) in [("decomposition-200", 200), ("theorem-40", 40), ("catalysis-40", 40)] {
        let out = loqe(&["verify", "--suite", suite, "--jobs", "2"]);
        assert_eq!(out.status.code(), Some(0), "{suite}");
        let report: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(report["violations"], 0, "{suite}");
        assert!(report["groups"][0]["rows"].as_array().unwrap().len() >= rows);
    }
}

#[test]
fn output_does_not_depend_on_thread_count() {
    for args in [
        vec!["verify", "--suite", "theorem-12"],
        vec!["efficiency", "--file", "WORKED"],
    ] {
        let file = worked();
        let args: Vec<&str> = args.iter().map(|a| if *a == "WORKED" { file.as_str() } else { a }).collect();
        let one = loqe(&[&args[..], &["--jobs", "1"]].concat());
        let four = loqe(&[&args[..], &["--jobs", "4"]].concat());
        assert!(one.status.success() && four.status.success());
        assert_eq!(without_wall_time(&one.stdout), without_wall_time(&four.stdout));
    }
}

#[test]
fn identity_trace_sorts_transmissivities() {
    let report = json(&["trace", "--file", &worked(), "--scenario", "identity"]);
    let p_out: Vec<f64> = report["p_out"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    for (got, want) in p_out.iter().zip([0.9, 0.6, 0.3]) {
        assert!((got - want).abs() <= 1e-12);
    }
    assert!((report["slack"].as_f64().unwrap()).abs() <= 1e-12);
}

#[test]
fn random_trace_residuals_are_small() {
    let report = json(&["trace", "--file", &worked(), "--scenario", "random-four-mode"]);
    for (name, v) in report["residuals"].as_object().unwrap() {
        assert!(v.as_f64().unwrap() <= 1e-10, "{name} = {v}");
    }
    assert!(report["slack"].as_f64().unwrap() >= -1e-9);
    assert_eq!(report["u"].as_array().unwrap().len(), 4);
}

#[test]
fn heralded_trace() {
    let report = json(&["trace", "--file", &worked(), "--scenario", "heralded-phi"]);
    assert!((report["probability"].as_f64().unwrap() - 0.4).abs() <= 1e-12);
    assert!((report["certified_bound"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
}

#[test]
fn csv_output_has_fixed_columns() {
    let out = loqe(&["verify", "--file", &worked(), "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "seed,N,M,K,outcome,probability,bound,input_sum,slack,margin"
    );
    assert!(lines.all(|l| l.split(',').count() == 10));
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.json");
    let path_str = path.display().to_string();
    let out = loqe(&["trace", "--file", &worked(), "--scenario", "identity", "--output", &path_str]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = std::fs::read(&path).unwrap();
    let printed = loqe(&["trace", "--file", &worked(), "--scenario", "identity"]).stdout;
    assert_eq!(without_wall_time(&written), without_wall_time(&printed));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.display().to_string()
    };

    let empty = write("empty.json", "");
    assert_eq!(loqe(&["verify", "--file", &empty]).status.code(), Some(2));

    let typo = write(
        "typo.json",
        r#"{"version": 1, "truncation": {"cutoff": 1, "cutof": 2}}"#,
    );
    let out = loqe(&["verify", "--file", &typo]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cutof"));

    let future = write("future.json", r#"{"version": 2, "truncation": {"cutoff": 1}}"#);
    assert_eq!(loqe(&["verify", "--file", &future]).status.code(), Some(2));

    let missing = dir.path().join("missing.json").display().to_string();
    assert_eq!(loqe(&["trace", "--file", &missing, "--scenario", "x"]).status.code(), Some(2));
    assert_eq!(loqe(&["verify", "--suite", "nonsense-3"]).status.code(), Some(2));

    let bunching = scenario("bunching.json").display().to_string();
    assert_eq!(loqe(&["verify", "--file", &bunching]).status.code(), Some(3));

    let over = write(
        "over.json",
        r#"{"version": 1, "truncation": {"cutoff": 1},
            "requests": [{"scenario": {"name": "a", "rho0": {"fock": [1, 1]}, "loss": [1, 1],
              "w": {"identity": 2}, "y": {"identity": 2}, "k": 1}}]}"#,
    );
    assert_eq!(loqe(&["verify", "--file", &over]).status.code(), Some(3));
}

#[test]
fn violations_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("strict.json");
    // A negative allowance demands slack of at least 0.1, which an equality lacks.
    std::fs::write(
        &path,
        r#"{"version": 1, "truncation": {"cutoff": 1},
            "requests": [{"scenario": {"name": "a", "rho0": {"fock": [1]}, "loss": [0.5],
              "w": {"identity": 1}, "y": {"identity": 1}, "k": 1}}]}"#,
    )
    .unwrap();
    let p = path.display().to_string();
    assert_eq!(loqe(&["verify", "--file", &p]).status.code(), Some(0));
    let out = loqe(&["verify", "--file", &p, "--violation-slack=-0.1"]);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["violations"], 1);
}
