use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn ewjet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ewjet"))
        .args(args)
        .env_remove("EWJET_PRECISION_BITS")
        .output()
        .expect("spawn ewjet")
}

fn code(args: &[&str]) -> i32 {
    ewjet(args).status.code().expect("exit code")
}

fn json(args: &[&str]) -> Value {
    let out = ewjet(args);
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn exit_codes_are_distinct_and_documented() {
    let cases: [(&[&str], i32); 8] = [
        (&["dims", "2"], 0),
        (&["check-solution"], 2),
        (&["check-solution", "u = x +"], 3),
        (&["check-solution", "u = z; v = 0"], 4),
        (&["check-solution", "u = x^2*y; v = 0"], 5),
        (&["--precision", "8", "dims", "3"], 13),
        (
            &["check-solution", "--file", "/nonexistent/solution.txt"],
            14,
        ),
        (&["check-solution", "hierarchy"], 0),
    ];
    for (args, want) in cases {
        assert_eq!(code(args), want, "ewjet {}", args.join(" "));
    }
    let help = String::from_utf8(ewjet(&["--help"]).stdout).unwrap();
    for c in [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14] {
        assert!(
            help.contains(&format!("{c:>3}  ")),
            "exit code {c} missing from --help"
        );
    }
}

#[test]
fn json_output_is_deterministic() {
    let args = [
        "--json",
        "--seed",
        "7",
        "signature",
        "exp-family",
        "--n",
        "6",
    ];
    assert_eq!(ewjet(&args).stdout, ewjet(&args).stdout);
    let v = json(&args);
    assert!(v.get("values").is_some(), "{v}");
}

#[test]
fn dims_match_the_closed_forms() {
    let binom = |n: i64, k: i64| (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1));
    for k in 2..=5i64 {
        let v = json(&["--json", "dims", &k.to_string()]);
        let jet = 3 + 2 * binom(k + 3, 3);
        assert_eq!(v["jet_space"], jet, "{v}");
        assert_eq!(v["equation"], jet - 2 * binom(k + 1, 3), "{v}");
    }
}

#[test]
fn solution_files_and_signature_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("sl2.txt");
    fs::write(&sol, "sl2-family\n").unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let s = |p: &std::path::Path| p.to_str().unwrap().to_string();
    assert_eq!(
        code(&["signature", "--file", &s(&sol), "--n", "6", "--out", &s(&a)]),
        0
    );
    assert_eq!(
        code(&["signature", "exp-family", "--n", "6", "--out", &s(&b)]),
        0
    );
    let same = json(&["--json", "compare", &s(&a), &s(&a)]);
    assert_eq!(same["verdict"], "equivalent-evidence", "{same}");
    let diff = json(&["--json", "compare", &s(&a), &s(&b)]);
    assert_eq!(diff["verdict"], "distinct", "{diff}");

    let c = dir.path().join("c.json");
    assert_eq!(
        code(&[
            "--precision",
            "100",
            "signature",
            "exp-family",
            "--n",
            "6",
            "--out",
            &s(&c)
        ]),
        0
    );
    assert_eq!(code(&["compare", &s(&a), &s(&c)]), 12);
}

#[test]
fn singular_solution_is_reported() {
    let out = ewjet(&["signature", "trivial", "--n", "4"]);
    assert_eq!(out.status.code(), Some(6));
    assert!(String::from_utf8_lossy(&out.stderr).contains("u_x"));
}

#[test]
fn verify_all_filters_suites() {
    let v = json(&["--json", "verify-all", "--only", "table"]);
    assert_eq!(v["ok"], true);
    assert_eq!(v["suites"], serde_json::json!(["table"]));
    assert_eq!(v["checks"].as_array().unwrap().len(), 25);
}

#[test]
fn reflections_keep_solutions() {
    let v = json(&["--json", "transform", "hierarchy", "--reflect", "yu"]);
    assert_eq!(v["solves_equation"], true, "{v}");
    assert_eq!(v["solution"], "u = -x\nv = exp(y)\n", "{v}");
    assert_eq!(code(&["transform", "exp-family", "--reflect", "txy"]), 0);
}
