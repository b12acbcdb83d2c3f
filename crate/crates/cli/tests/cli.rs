use std::process::{Command, Output};

use serde_json::Value;

fn kmtopo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kmtopo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.push("--json");
    let o = kmtopo(&all);
    let v: Value = serde_json::from_str(&stdout(&o)).expect("valid json");
    assert_eq!(v["schema"], 1);
    v
}

#[test]
fn affine_roots_to_height_three() {
    let o = kmtopo(&["roots", "--system", "affine-sl2", "--height", "3"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("8 real roots up to height 3 (4 positive)"));
    let v = json(&["roots", "--system", "affine-sl2", "--height", "3"]);
    let roots = v["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 8);
    assert_eq!(
        roots
            .iter()
            .filter(|r| r["height"].as_i64().unwrap() > 0)
            .count(),
        4
    );
}

#[test]
fn a1_roots() {
    let v = json(&["roots", "--system", "a1", "--height", "5"]);
    assert_eq!(v["roots"].as_array().unwrap().len(), 2);
}

#[test]
fn s1_squared_is_central_and_integral() {
    let o = kmtopo(&["member", "--field", "p:3", "--spec", "centerO", "s1 s1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "true\n");
}

#[test]
fn member_reports_violated_condition() {
    let o = kmtopo(&["member", "--spec", "hn:2", "xp(1; 3)"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("false: "), "{text}");
    let v = json(&["member", "--spec", "hn:2", "xp(1; 3)"]);
    assert_eq!(v["member"], false);
    assert!(v["reason"].is_string());
}

#[test]
fn retract_and_fix_interval() {
    assert_eq!(stdout(&kmtopo(&["retract", "point(xm(3), 1)"])), "0\n");
    assert_eq!(stdout(&kmtopo(&["retract", "point(xm(3), 1/4)"])), "1/4\n");
    assert_eq!(
        stdout(&kmtopo(&["fix-interval", "xp(1/3)"])),
        "[1/2, +inf)\n"
    );
}

#[test]
fn torus_commands() {
    assert_eq!(stdout(&kmtopo(&["nu", "t(1, 2)"])), "(1, 2)\n");
    let v = json(&["char", "--m", "1", "--n", "0", "torus(3; 1)"]);
    assert_eq!(v["value"], "9");
    let o = kmtopo(&["nu", "xp(1; 1)"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kp_witness_indices() {
    assert_eq!(json(&["kp-witness", "--n", "1"])["witness_index"], 2);
    assert_eq!(json(&["kp-witness", "--n", "2"])["witness_index"], 3);
}

#[test]
fn commutation_suite_passes() {
    let o = kmtopo(&[
        "verify",
        "--suite",
        "commutation",
        "--field",
        "p:5",
        "--trials",
        "1000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("pass"));
}

#[test]
fn json_and_text_verdicts_agree() {
    let args = ["verify", "--suite", "all", "--trials", "10"];
    let text = stdout(&kmtopo(&args));
    let v = json(&args);
    assert_eq!(v["verdict"], "pass");
    for suite in v["suites"].as_array().unwrap() {
        let name = suite["name"].as_str().unwrap();
        let verdict = match suite["verdict"].as_str().unwrap() {
            "pass" => "pass",
            "not-applicable" => "not applicable",
            _ => "FAIL",
        };
        let line = text.lines().find(|l| l.starts_with(name)).unwrap();
        assert!(line.contains(verdict), "{line}");
        assert!(suite.get("elapsed_ms").is_none());
    }
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "verify",
        "--suite",
        "tree-retraction",
        "--trials",
        "50",
        "--json",
    ];
    assert_eq!(kmtopo(&args).stdout, kmtopo(&args).stdout);
    let args = ["verify", "--suite", "hn-closure", "--trials", "20"];
    assert_eq!(kmtopo(&args).stdout, kmtopo(&args).stdout);
}

#[test]
fn timing_only_under_flag() {
    let v = json(&[
        "verify",
        "--suite",
        "uut-uniqueness",
        "--trials",
        "5",
        "--timing",
    ]);
    assert!(v["suites"][0]["elapsed_ms"].is_u64());
}

#[test]
fn center_separation_not_applicable_in_characteristic_two() {
    let o = kmtopo(&["verify", "--suite", "center-separation", "--field", "fq:2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("not applicable"));
}

#[test]
fn report_file() {
    let path = std::env::temp_dir().join(format!("kmtopo-report-{}.json", std::process::id()));
    let p = path.to_str().unwrap();
    let o = kmtopo(&["verify", "--suite", "coset-count", "--out", p]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["suites"][0]["name"], "coset-count");
    std::fs::remove_file(path).unwrap();
}

#[test]
fn exit_codes() {
    assert_eq!(kmtopo(&["--bogus"]).status.code(), Some(1));
    assert_eq!(
        kmtopo(&["verify", "--suite", "nope"]).status.code(),
        Some(1)
    );
    assert_eq!(
        kmtopo(&["member", "--spec", "nope", "s0"]).status.code(),
        Some(1)
    );
    assert_eq!(
        kmtopo(&["member", "--spec", "hn:1", "diag(0)"])
            .status
            .code(),
        Some(2)
    );
    let o = kmtopo(&["retract", "point(xm(3/1)"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("13"));
    assert_eq!(
        kmtopo(&["--field", "p:4", "nu", "s0"]).status.code(),
        Some(1)
    );
}

#[test]
fn field_flag_changes_meaning_of_literals() {
    let p3 = stdout(&kmtopo(&[
        "member",
        "--field",
        "p:3",
        "--spec",
        "sl2-tnunits",
        "diag(1/3)",
    ]));
    assert!(p3.starts_with("false"));
    assert_eq!(
        stdout(&kmtopo(&[
            "member",
            "--field",
            "fq:2",
            "--spec",
            "sl2-tnunits",
            "diag(1/3)"
        ])),
        "true\n"
    );
}
