use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coprod"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let out = run(&full);
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap_or(-1), v)
}

#[test]
fn maybe_plus_maybe_at_one_point() {
    let (code, v) = json(&["coprod", "--left", "maybe", "--right", "maybe", "--base", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["status"], "pass");
    assert_eq!(v["data"]["carrier_size"], 3);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["name"] == "oracle" && c["passed"] == true));
}

#[test]
fn powerset_plus_powerset_is_undecided_with_advice() {
    let (code, v) = json(&["coprod", "--left", "powerset", "--right", "powerset", "--budget", "8"]);
    assert_eq!(code, 3);
    assert_eq!(v["status"], "undecided");
    assert_eq!(v["data"]["verdict"], "NotExists");
    assert!(v["data"]["divergence"].as_str().unwrap().contains("stage 4"));
}

#[test]
fn advise_from_profile_names() {
    let (code, v) = json(&["advise", "--left", "powerset", "--right", "continuation-profile"]);
    assert_eq!(code, 0);
    assert_eq!(v["data"]["verdict"], "NotExists");

    let (code, v) = json(&[
        "advise",
        "--profile",
        "profile mine = exceptional",
        "--left",
        "mine",
        "--right",
        "powerset",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["data"]["verdict"], "Exists");
}

#[test]
fn undecidable_table_cell_exits_three() {
    let (code, v) = json(&["advise", "--left", "class:interval:A", "--right", "class:interval:B"]);
    assert_eq!(v["data"]["verdict"], "Unknown");
    assert_eq!(code, 3);
}

#[test]
fn bad_input_is_a_usage_error() {
    assert_eq!(
        run(&["coprod", "--left", "bogus", "--right", "maybe"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["coprod", "--left", "reader:x", "--right", "maybe"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["advise", "--left", "nothing-known", "--right", "maybe"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = [
        "--seed",
        "11",
        "coprod",
        "--left",
        "powerset",
        "--right",
        "exception:1",
        "--base",
        "2",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn terms_agree_with_the_materialized_coproduct() {
    let (code, v) = json(&[
        "terms", "--left", "powerset", "--right", "maybe", "--depth", "2", "--verify",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["data"]["count"], 4);
}

#[test]
fn other_commands_pass_on_builtins() {
    for args in [
        vec!["laws", "--monad", "state:2"],
        vec!["complement", "--monad", "reader:2", "--base", "2"],
        vec!["chain", "--left", "powerset", "--right", "exception:1", "--even"],
        vec!["closure", "--functor", "const0:2"],
        vec!["classify", "--monad", "exception0:1"],
        vec!["free", "--signature", "f/2,c/0", "--sizes", "3", "--sum", "g/1"],
    ] {
        let out = run(&args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stdout)
        );
    }
}
