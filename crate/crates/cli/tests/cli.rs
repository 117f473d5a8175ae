use std::process::{Command, Output};

use serde_json::Value;
use turanlab_cli::output::canonicalize;

fn turanlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_turanlab"))
        .args(args)
        .env_remove("TURANLAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

fn float(v: &Value) -> f64 {
    match v {
        Value::String(s) if s == "inf" => f64::INFINITY,
        _ => v.as_f64().unwrap(),
    }
}

#[test]
fn verify_equality_family() {
    let o = turanlab(&["verify", "--ineq", "INEQ-5", "--n", "3", "--family", "one-plus-x-pow-n"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!((float(&v["ratio"]) - 1.0).abs() < 1e-12);
    assert_eq!(v["pass"], Value::Bool(true));
}

#[test]
fn constants_value() {
    let o = turanlab(&["constants", "--name", "A"]);
    assert_eq!(o.status.code(), Some(0));
    let a = float(&json(&o)["value"]);
    assert!((a - 0.027_903_061_263_525_698).abs() < 1e-17);
}

#[test]
fn asymptote_slope() {
    let o = turanlab(&["asymptote", "--family", "qn", "--deriv", "0", "--p", "2", "--n-range", "10:100"]);
    assert_eq!(o.status.code(), Some(0));
    let slope = float(&json(&o)["slope"]);
    assert!((slope + 0.5).abs() <= 0.05, "{slope}");
}

#[test]
fn json_round_trips_byte_for_byte() {
    for args in [
        vec!["verify", "--ineq", "INEQ-8", "--q", "inf", "--n", "4", "--family", "qn"],
        vec!["measure", "--variant", "lemma9", "--q", "3", "--roots", "0.5+0.5i,-0.25", "--class", "halfdisk"],
        vec!["sweep", "--ineq", "INEQ-1,LEM-9", "--n-range", "2:4", "--trials", "3"],
        vec!["extremal", "--ineq", "INEQ-2", "--n", "2", "--starts", "4"],
    ] {
        let o = turanlab(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let text = stdout(&o);
        assert_eq!(canonicalize(&text).unwrap(), text, "{args:?}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (k, jobs) in ["1", "3"].iter().enumerate() {
        let path = dir.path().join(format!("sweep{k}.json"));
        let p = path.to_str().unwrap();
        let o = turanlab(&[
            "--seed", "42", "--jobs", jobs, "-o", p, "sweep", "--ineq", "all", "--family", "random-halfdisk", "--n-range",
            "1:8", "--trials", "4",
        ]);
        assert_eq!(o.status.code(), Some(0));
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn seed_from_environment() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_turanlab"));
        c.env_remove("TURANLAB_SEED");
        if let Some(s) = env {
            c.env("TURANLAB_SEED", s);
        }
        if let Some(s) = flag {
            c.args(["--seed", s]);
        }
        c.args(["verify", "--ineq", "INEQ-1", "--n", "5", "--family", "random-halfdisk"]);
        c.output().unwrap().stdout
    };
    assert_eq!(run(Some("7"), None), run(None, Some("7")));
    assert_ne!(run(Some("7"), None), run(Some("8"), None));
    assert_eq!(run(Some("8"), Some("7")), run(None, Some("7")));
}

#[test]
fn csv_has_fixed_columns() {
    let o = turanlab(&["--format", "csv", "verify", "--ineq", "INEQ-C2", "--p", "inf", "--q", "2", "--n", "3", "--family", "qn"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("inequality_id,n,p,q,lhs,rhs,ratio,pass,seed,poly_digest"));
    assert!(lines.next().unwrap().starts_with("INEQ-C2,6,inf,2.0000000000000000e0,"));
    assert_eq!(lines.next(), None);
}

#[test]
fn usage_and_parameter_errors_exit_two() {
    for args in [
        vec!["bogus"],
        vec!["verify", "--ineq", "INEQ-7", "--q", "0.5", "--n", "3", "--family", "qn"],
        vec!["verify", "--ineq", "INEQ-2", "--roots", "0.1+0.3i"],
        vec!["verify", "--ineq", "INEQ-99", "--n", "3"],
        vec!["verify", "--ineq", "INEQ-1", "--n", "3", "--roots", "0.5"],
        vec!["sweep", "--ineq", "INEQ-2", "--family", "random-halfdisk", "--n-range", "1:3"],
        vec!["constants", "--name", "A_inf"],
        vec!["verify", "--ineq", "INEQ-1", "--n", "3", "--family", "qn", "--unknown-flag"],
    ] {
        let o = turanlab(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}
