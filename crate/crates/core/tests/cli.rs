mod common;

use std::process::{Command, Output};

use common::fixture;

fn algeo(args: &[&str]) -> Output {
    algeo_env(args, &[])
}

fn algeo_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_algeo"));
    cmd.args(args).current_dir(fixture(""));
    for key in ["ALGEO_MAX_CARRIER", "ALGEO_MAX_POINTS", "ALGEO_FORMULA_DEPTH"] {
        cmd.env_remove(key);
    }
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn check(args: &[&str], code: i32, stdout: &str) {
    let out = algeo(args);
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        stdout,
        "stdout of {args:?}, stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(out.status.code(), Some(code), "exit code of {args:?}");
}

fn fails_with_usage(args: &[&str], stderr_part: &str) {
    let out = algeo(args);
    assert_eq!(out.status.code(), Some(2), "{args:?}");
    assert!(out.stdout.is_empty());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(stderr_part), "{args:?}: {err}");
}

const A: &str = "fixA.model";

#[test]
fn eval() {
    check(
        &[
            "eval",
            "--model",
            A,
            "--instance",
            "f1",
            "--vars",
            "x:s,y:s",
            "--formula",
            "x == y",
        ],
        0,
        "indices: 0 4 8\npoint: x=0 y=0\npoint: x=1 y=1\npoint: x=2 y=2\n",
    );
    check(
        &[
            "eval",
            "--model",
            A,
            "--instance",
            "f1",
            "--vars",
            "x:s",
            "--formula",
            "p(x) & !p(x)",
        ],
        0,
        "indices:\n",
    );
    fails_with_usage(
        &[
            "eval",
            "--model",
            A,
            "--instance",
            "nope",
            "--vars",
            "x:s",
            "--formula",
            "p(x)",
        ],
        "unknown instance `nope`",
    );
}

#[test]
fn closure() {
    check(
        &[
            "closure",
            "--model",
            A,
            "--instance",
            "f12",
            "--vars",
            "x:s,y:s",
            "--points",
            "1",
        ],
        0,
        "indices: 1 2\norbit: 1 2\ncross-check: agreed\n",
    );
    check(
        &[
            "closure",
            "--model",
            A,
            "--instance",
            "f1",
            "--vars",
            "x:s,y:s",
            "--points",
            "1",
        ],
        0,
        "indices: 1\norbit: 1\ncross-check: agreed\n",
    );
    check(
        &[
            "closure",
            "--model",
            A,
            "--instance",
            "f12",
            "--vars",
            "x:s",
            "--points",
            "0,1,2",
        ],
        0,
        "indices: 0 1 2\norbit: 0\norbit: 1 2\ncross-check: agreed\n",
    );
    fails_with_usage(
        &[
            "closure",
            "--model",
            A,
            "--instance",
            "f1",
            "--vars",
            "x:s",
            "--points",
            "3",
        ],
        "out of range",
    );
}

#[test]
fn aut() {
    check(&["aut", "--model", A], 0, "order: 2\ns: ()\ns: (1 2)\n");
    check(&["aut", "--model", A, "--instance", "f1"], 0, "order: 1\ns: ()\n");
    check(
        &["aut", "--model", A, "--instance", "f12"],
        0,
        "order: 2\ns: ()\ns: (1 2)\n",
    );
    check(&["aut", "--model", "fixB.model"], 0, "order: 1\ns: ()\n");
}

#[test]
fn kb_equiv() {
    check(
        &["kb-equiv", "kb_f1.model", "kb_f2.model"],
        0,
        "verdict: EQUIVALENT\nalpha: f1 -> f2\ndelta[f1]: s: ()\n",
    );
    check(
        &["kb-equiv", "kb_f12.model", "kb_f1.model"],
        1,
        "verdict: NOT-EQUIVALENT\n",
    );
    check(
        &["kb-equiv", "kb_pair1.model", "kb_pair1.model"],
        0,
        "verdict: EQUIVALENT\nalpha: f1 -> f1\nalpha: f12 -> f12\ndelta[f1]: s: ()\ndelta[f12]: s: ()\n",
    );
    check(
        &["kb-equiv", "kb_pair1.model", "kb_pair2_renamed.model"],
        0,
        "verdict: EQUIVALENT\nalpha: f1 -> f2\nalpha: f12 -> f12\ndelta[f1]: s: ()\ndelta[f12]: s: ()\n",
    );
    fails_with_usage(&["kb-equiv", "kb_f1.model", "missing.model"], "missing.model");
}

#[test]
fn theory_closure_member() {
    let base = ["theory-closure-member", "--model", A, "--instance", "f1"];
    let with = |rest: &[&'static str]| [&base[..], rest].concat();
    check(
        &with(&["--vars", "x:s", "-T", "p(x)", "--candidate", "p(x)|p(add(x,x))"]),
        0,
        "true\n",
    );
    check(
        &with(&["--vars", "x:s", "-T", "p(x)", "--candidate", "p(add(x,x))"]),
        1,
        "false\n",
    );
    check(
        &with(&["--theory", "theory_p.txt", "--candidate", "E x. p(x)"]),
        0,
        "true\n",
    );
    check(&with(&["--vars", "x:s", "--candidate", "x == x"]), 0, "true\n");
    fails_with_usage(&with(&["--candidate", "p(x)"]), "--vars or --theory");
}

#[test]
fn support() {
    let base = [
        "support",
        "--model",
        A,
        "--instance",
        "f1",
        "--vars",
        "x:s, y:s",
        "--formula",
    ];
    check(&[&base[..], &["p(x) | !p(x)"]].concat(), 0, "support:\nfree: x\n");
    check(&[&base[..], &["p(x)"]].concat(), 0, "support: x\nfree: x\n");
    check(
        &[&base[..], &["x == add(y,y)"]].concat(),
        0,
        "support: x y\nfree: x y\n",
    );
}

#[test]
fn normalize_and_admissible() {
    check(
        &[
            "normalize",
            "--model",
            A,
            "--vars",
            "x:s",
            "--source-vars",
            "y:s",
            "--map",
            "y=add(x,x)",
            "--formula",
            "p(y) & E y. p(add(y,y))",
        ],
        0,
        "context: _v0:s, x:s\nformula: p(add(x,x)) & (E _v0. p(add(_v0,_v0)))\n",
    );
    check(
        &["normalize", "--model", A, "--vars", "x:s", "--formula", "p(x)"],
        0,
        "context: x:s\nformula: p(x)\n",
    );
    let adm = |b: &'static str| {
        [
            "admissible",
            "--model",
            A,
            "--instance",
            "f1",
            "--vars",
            "x:s",
            "--source-vars",
            "y:s",
            "--map",
            "y=add(x,x)",
            "--a",
            "1",
            "--b",
            b,
        ]
    };
    check(&adm("2"), 0, "admissible: true\n");
    check(&adm("0"), 1, "admissible: false\n");
}

#[test]
fn rf() {
    check(
        &[
            "rf",
            "--model",
            A,
            "--instance",
            "f12",
            "--vars",
            "x:s",
            "--budget",
            "0",
            "--witness",
        ],
        0,
        "blocks: 2\nmembers: 4\nblock: 0\nwitness: !p(x)\nblock: 1 2\nwitness: p(x)\nwitness-context: x:s\n\
         set:\nset: 0\nset: 1 2\nset: 0 1 2\n",
    );
    let out = algeo(&["rf", "--model", A, "--instance", "f1", "--vars", "x:s,y:s"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("blocks: 9\nmembers: 512\n"), "{text}");
    assert!(!text.contains("warning"));
}

#[test]
fn geo_equiv() {
    check(
        &["geo-equiv", "fixA.model:f1", "fixA.model:f12", "--depth", "3"],
        1,
        "verdict: DISAGREE\ncontext: x:s\ntheory: p(x)\ncandidate: p(add(x,x))\nf1: not-in-closure\n\
         f12: in-closure\nchecked: contexts=2 values=22 theories=1\n",
    );
    let out = algeo(&[
        "geo-equiv",
        "fixA.model:f1",
        "fixA.model:f2",
        "--depth",
        "2",
        "--contexts",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("verdict: NO-DISAGREEMENT-UP-TO-BOUNDS\n"));
    fails_with_usage(
        &["geo-equiv", "fixA.model:f1", "fixA.model:f2", "--depth", "9"],
        "formula depth limit",
    );
}

#[test]
fn usage_and_parse_errors() {
    fails_with_usage(&["frobnicate"], "unrecognized subcommand");
    fails_with_usage(&["eval", "--model", A], "--instance");
    fails_with_usage(
        &[
            "eval",
            "--model",
            A,
            "--instance",
            "f1",
            "--vars",
            "x:s",
            "--formula",
            "p(x) &",
        ],
        "1:7:",
    );
    fails_with_usage(
        &["aut", "--model", "bad_row.model"],
        "bad_row.model:5:1: table row has 4 entries, expected 3",
    );
    fails_with_usage(
        &["aut", "--model", "bad_tuple.model"],
        "bad_tuple.model:8:4: element 3 out of range",
    );
    let help = algeo(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("geo-equiv"));
}

#[test]
fn environment_overrides_limits() {
    let out = algeo_env(&["aut", "--model", A], &[("ALGEO_MAX_CARRIER", "2")]);
    assert_eq!(out.status.code(), Some(2));
    let out = algeo_env(
        &["geo-equiv", "fixA.model:f1", "fixA.model:f12", "--depth", "3"],
        &[("ALGEO_FORMULA_DEPTH", "2")],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let runs = [
        vec![
            "rf",
            "--model",
            A,
            "--instance",
            "f12",
            "--vars",
            "x:s,y:s",
            "--witness",
        ],
        vec!["kb-equiv", "kb_pair1.model", "kb_pair2.model"],
        vec![
            "closure",
            "--model",
            A,
            "--instance",
            "f12",
            "--vars",
            "x:s,y:s",
            "--points",
            "1 5 7",
        ],
    ];
    for args in runs {
        let first = algeo(&args);
        let second = algeo(&args);
        assert_eq!(first.stdout, second.stdout);
        assert_eq!(first.status.code(), second.status.code());
    }
}

#[test]
fn library_and_binary_agree() {
    let path = fixture(A);
    let path = path.to_str().unwrap();
    let lib = algeo::cli::run(["algeo", "aut", "--model", path]);
    let bin = algeo(&["aut", "--model", path]);
    assert_eq!(lib.stdout.as_bytes(), &bin.stdout[..]);
    assert_eq!(Some(lib.code), bin.status.code());
}
