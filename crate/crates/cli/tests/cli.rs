use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcc")).args(args).output().expect("qcc runs")
}

fn with_spec(dir: &Path, spec: &str, extra: &[&str]) -> Output {
    let path = dir.join("spec.json");
    std::fs::write(&path, spec).unwrap();
    let mut args = vec!["--spec", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    qcc(&args)
}

fn json_out(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr))
    })
}

#[test]
fn exponents_table_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = with_spec(
        dir.path(),
        r#"{"command": "exponents", "params": {"cases": [
            {"s": 0.5, "p": 2, "n": 2, "b": 1},
            {"s": 1, "p": 2, "n": 2},
            {"K": 2, "s": 0.5, "p": 2}]}, "seed": 9}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let j = json_out(&out);
    let rows = j["result"]["rows"].as_array().unwrap();
    assert_eq!(rows[0]["q"], "4/3");
    assert_eq!(rows[0]["regime"], "subcritical");
    assert_eq!(rows[1]["q"], "2");
    assert_eq!(rows[2]["planar"]["inv_q_lower_bound"], "3/4");
    assert_eq!(j["artifact"]["seed"], 9);
    assert_eq!(j["artifact"]["spec_sha256"].as_str().unwrap().len(), 64);

    let rejected = with_spec(
        dir.path(),
        r#"{"command": "exponents", "params": {"s": "1/2", "p": "4/3", "n": 2, "b": "1/4"}}"#,
        &[],
    );
    assert_eq!(rejected.status.code(), Some(2));

    let unknown = with_spec(dir.path(), r#"{"command": "exponents", "params": {"s": 1}, "extra": 0}"#, &[]);
    assert_eq!(unknown.status.code(), Some(1));
    let bad_param = with_spec(dir.path(), r#"{"command": "exponents", "params": {"s": 1, "p": 2, "m": 2}}"#, &[]);
    assert_eq!(bad_param.status.code(), Some(1));
    assert_eq!(qcc(&["--no-such-flag"]).status.code(), Some(1));
    assert_eq!(qcc(&[]).status.code(), Some(1));
}

#[test]
fn csv_output_is_machine_readable() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.csv");
    let status = with_spec(
        dir.path(),
        r#"{"command": "jacobian", "params": {"n": 2, "k": [0.5, 2.0], "t": [-0.5, 1.5]}}"#,
        &["--out", out.to_str().unwrap()],
    );
    assert_eq!(status.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# tool=qcc"));
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers().unwrap().clone();
    let agrees = header.iter().position(|h| h == "agrees").unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| &r[agrees] == "true"));
}

#[test]
fn diagram_writes_svg_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("fig.svg");
    let out = with_spec(
        dir.path(),
        r#"{"command": "diagram", "seed": 3, "params": {"n": 2, "a": 2, "b": 1, "interpolation": true,
            "points": [{"s": "1/2", "p": 2}, {"s": 1, "p": 2}]}}"#,
        &["--out", svg.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let body = std::fs::read_to_string(&svg).unwrap();
    assert!(body.starts_with("<svg") && body.contains("<metadata>") && body.contains("\"seed\":3"));
    let csv_text = std::fs::read_to_string(svg.with_extension("csv")).unwrap();
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(csv_text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    // two target arrows, two index arrows for the interior point
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| &r[10] == "true"));
    let first = &rows[0];
    assert_eq!((&first[3], &first[5], &first[9]), ("1/2", "3/4", "1/4"));
}

#[test]
fn witness_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = with_spec(
        dir.path(),
        r#"{"command": "witness", "params": {"regime": "subcritical", "s": "1/2", "p": 2,
            "q_prime": "3/2", "n": 2, "a_or_b": 1, "verify": true}}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let j = json_out(&out);
    assert_eq!(j["result"]["witness"]["epsilon"], "1/12");
    assert_eq!(j["result"]["verification"]["analytic"], serde_json::json!(["member", "non-member"]));

    let infeasible = with_spec(
        dir.path(),
        r#"{"command": "witness", "params": {"regime": "subcritical", "s": "1/2", "p": 2,
            "q_prime": "4/3", "n": 2, "a_or_b": 1}}"#,
        &[],
    );
    assert_eq!(infeasible.status.code(), Some(2));

    let verify = with_spec(
        dir.path(),
        r#"{"command": "verify", "params": {"s": 1, "p": 4, "n": 2, "a": 2, "b": 1, "q_prime": 3}}"#,
        &[],
    );
    assert_eq!(verify.status.code(), Some(0), "{}", String::from_utf8_lossy(&verify.stdout));
    let j = json_out(&verify);
    assert_eq!(j["result"]["target"]["q"], "8/3");
    assert_eq!(j["result"]["passed"], true);
}

#[test]
fn norms_reports_partials_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = with_spec(
        dir.path(),
        r#"{"command": "norms", "params": {"profile": {"kind": "singular_power", "rho": 0.25},
            "s": 0.5, "p": 2, "n": 2}}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let j = json_out(&out);
    assert_eq!(j["result"]["estimate"]["verdict"], "member");
    assert_eq!(j["result"]["oracle"], "member");
    let bad = with_spec(
        dir.path(),
        r#"{"command": "norms", "params": {"profile": {"kind": "singular_power", "rho": -1},
            "s": 0.5, "p": 2, "n": 2}}"#,
        &[],
    );
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn suite_verdicts_are_seed_stable() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{"command": "suite", "params": {"criteria": [1, 2, 4, 6, 8]}}"#;
    let verdicts = |seed: &str| -> Vec<Value> {
        let out = with_spec(dir.path(), spec, &["--seed", seed]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let j = json_out(&out);
        j["result"]["criteria"].as_array().unwrap().iter().map(|c| c["passed"].clone()).collect()
    };
    assert_eq!(verdicts("1"), verdicts("987654321"));
}

#[test]
fn degenerate_slope_threshold_fails_the_classifier_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let out = with_spec(
        dir.path(),
        r#"{"command": "suite", "params": {"criteria": [5], "classifier": {"slope_threshold": 0}}}"#,
        &["--format", "csv"],
    );
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("membership classifier,false"));
}

#[test]
fn thread_cap_is_validated() {
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_qcc"))
            .args(["suite", "--format", "csv"])
            .env("QCC_THREADS", v)
            .output()
            .unwrap()
    };
    assert_eq!(run("zero").status.code(), Some(1));
    assert_eq!(run("0").status.code(), Some(1));
}
