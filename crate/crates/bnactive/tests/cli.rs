use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bnactive(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bnactive"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = bnactive(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    bnactive(dir, args).status.code().unwrap()
}

#[test]
fn full_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "gen-net",
            "--seed",
            "4",
            "--variables",
            "5",
            "--edges",
            "5",
            "--out",
            "true.json",
        ],
    );
    assert_eq!(
        ok(
            d,
            &["gen-net", "--seed", "4", "--variables", "5", "--edges", "5"]
        ),
        fs::read_to_string(d.join("true.json")).unwrap()
    );
    ok(
        d,
        &[
            "sample",
            "--net",
            "true.json",
            "--seed",
            "1",
            "--count",
            "200",
            "--out",
            "data.csv",
        ],
    );
    let under = ok(
        d,
        &[
            "sample",
            "--net",
            "true.json",
            "--seed",
            "1",
            "--count",
            "3",
            "--query",
            "X0=s1",
        ],
    );
    let lines: Vec<&str> = under.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].contains("do_X0"));
    assert!(lines[1..].iter().all(|l| l.starts_with("s1,")));

    let learned = ok(
        d,
        &[
            "learn",
            "--net",
            "true.json",
            "--data",
            "data.csv",
            "--seed",
            "2",
        ],
    );
    assert!(learned.contains("\"cpts\""));
    ok(
        d,
        &[
            "committee",
            "--net",
            "true.json",
            "--data",
            "data.csv",
            "--seed",
            "3",
            "--out",
            "c",
        ],
    );
    assert!(d.join("c/member_1.json").exists());

    let m = ok(
        d,
        &[
            "measures",
            "--committee",
            "c/committee.json",
            "--query",
            "X1=s0",
        ],
    );
    let rows: Vec<&str> = m.lines().collect();
    assert_eq!(rows[0], "measure,value,std_error,method");
    assert!(
        rows[1].starts_with("js,") && rows[2].starts_with("bjs,") && rows[3].starts_with("kl2,")
    );
    let value = |line: &str| line.split(',').nth(1).unwrap().parse::<f64>().unwrap();
    assert!(value(rows[1]) <= value(rows[3]) + 1e-12);

    let proposed = ok(
        d,
        &[
            "propose-query",
            "--committee",
            "c/committee.json",
            "--budget",
            "2",
        ],
    );
    let q = proposed
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .to_owned();
    let scored = ok(
        d,
        &[
            "score-query",
            "--committee",
            "c/committee.json",
            "--query",
            &q,
        ],
    );
    assert_eq!(
        scored.lines().nth(1).unwrap().split(',').nth(2),
        proposed.lines().nth(1).unwrap().split(',').nth(2)
    );

    let ev = ok(
        d,
        &[
            "eval",
            "--net",
            "true.json",
            "--data",
            "data.csv",
            "--seed",
            "5",
            "--bootstrap",
            "4",
            "--predictive-trials",
            "3",
        ],
    );
    assert!(ev.starts_with("edge_error,edge_entropy,pkl0,pkl1,pkl5,pkl10\n"));

    fs::write(
        d.join("exp.json"),
        r#"{"network": "true.json", "seed": 9, "trials": 2, "steps": 3,
        "bootstrap_eval_count": 4, "predictive_trials": 3, "samples": 100, "out": "unused"}"#,
    )
    .unwrap();
    ok(
        d,
        &[
            "--jobs",
            "2",
            "active",
            "--config",
            "exp.json",
            "--out",
            "res",
            "--strategy",
            "passive",
            "--strategy",
            "active:bjs",
        ],
    );
    let report = ok(d, &["report", "--out", "res"]);
    assert_eq!(
        report,
        fs::read_to_string(d.join("res/summary.csv")).unwrap()
    );
    assert!(!d.join("unused").exists());

    ok(
        d,
        &["active", "--config", "res/manifest.json", "--out", "again"],
    );
    for f in ["summary.csv", "trial_0.csv", "trial_1.csv"] {
        assert_eq!(
            fs::read(d.join("res").join(f)).unwrap(),
            fs::read(d.join("again").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "gen-net",
            "--seed",
            "1",
            "--variables",
            "4",
            "--out",
            "n.json",
        ],
    );
    fs::write(d.join("bad.json"), "{\"variables\": []").unwrap();
    fs::write(d.join("noseed.json"), r#"{"network": "n.json"}"#).unwrap();
    fs::write(
        d.join("strat.json"),
        r#"{"network": "n.json", "seed": 1, "strategies": ["magic"]}"#,
    )
    .unwrap();

    // Usage and configuration problems exit 2.
    assert_eq!(code(d, &["frobnicate"]), 2);
    assert_eq!(code(d, &["sample", "--net", "n.json"]), 2);
    assert_eq!(
        code(
            d,
            &["sample", "--net", "n.json", "--seed", "1", "--query", "X0"]
        ),
        2
    );
    assert_eq!(
        code(
            d,
            &["sample", "--net", "n.json", "--seed", "1", "--query", "Nope=s0"]
        ),
        2
    );
    assert_eq!(code(d, &["active", "--config", "noseed.json"]), 2);
    assert_eq!(code(d, &["active", "--config", "strat.json"]), 2);
    assert_eq!(code(d, &["active", "--config", "missing.json"]), 2);
    assert_eq!(code(d, &["report", "--out", "."]), 2);

    // Unreadable or malformed inputs exit 1.
    assert_eq!(
        code(d, &["sample", "--net", "missing.json", "--seed", "1"]),
        1
    );
    let out = bnactive(d, &["sample", "--net", "bad.json", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.json"));

    assert_eq!(
        code(
            d,
            &["sample", "--net", "n.json", "--seed", "1", "--count", "2"]
        ),
        0
    );
}
