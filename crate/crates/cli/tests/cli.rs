use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hitset(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hitset"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn ok(args: &[&str], cwd: &Path) -> Value {
    let out = hitset(args, cwd);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_line(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let last = stderr.lines().last().unwrap();
    serde_json::from_str(last).unwrap()
}

fn lines(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        [
            "generate", "--task", "msc", "--family", "ba_bipartite", "--size", "12", "--count",
            "15", "--seed", "4", "--with-optimal", "--out", out,
        ]
    };
    let summary = ok(&args("a"), dir.path());
    assert_eq!(summary["records"], 15);
    ok(&args("b"), dir.path());
    for name in [
        "msc_ba_bipartite_12_train.jsonl",
        "msc_ba_bipartite_12_val.jsonl",
        "msc_ba_bipartite_12.manifest.json",
    ] {
        let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn solve_exact_bench_round() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        &[
            "generate", "--task", "mvc", "--family", "er", "--size", "14", "--count", "10",
            "--seed", "2", "--test", "--out", "ds",
        ],
        d,
    );
    let data = "ds/mvc_er_14_test.jsonl";
    ok(&["solve", "--algo", "pd", "--in", data, "--out", "pd.jsonl"], d);
    ok(&["solve", "--algo", "cover", "--epsilon", "0.1", "--in", data, "--out", "cover.jsonl"], d);
    ok(&["exact", "--budget-ms", "5000", "--in", data, "--out", "opt.jsonl"], d);

    let pd = lines(&d.join("pd.jsonl"));
    let opt = lines(&d.join("opt.jsonl"));
    assert_eq!(pd.len(), 10);
    for (p, o) in pd.iter().zip(&opt) {
        assert_eq!(p["id"], o["id"]);
        assert_eq!(o["status"], "optimal");
        assert_eq!(p["feasible"], true);
        let (pw, ow) = (p["weight"].as_f64().unwrap(), o["weight"].as_f64().unwrap());
        assert!(ow <= pw + 1e-12);
        assert!(pw <= 2.0 * ow + 1e-9);
    }

    // exact against pd: every ratio is at most one
    let report = ok(&["bench", "--model", "opt.jsonl", "--algo", "pd.jsonl", "--report", "r.json"], d);
    assert!(report["sizes"][0]["mean"].as_f64().unwrap() <= 1.0 + 1e-12);
    let stored: Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(stored, report);
}

#[test]
fn analytic_weights_reproduce_the_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        &[
            "generate", "--task", "mhs", "--family", "ba_bipartite", "--size", "16", "--count",
            "8", "--seed", "3", "--test", "--out", "ds",
        ],
        d,
    );
    let data = "ds/mhs_ba_bipartite_16_test.jsonl";
    ok(&["weights", "--hidden-dim", "8", "--uniform", "--out", "w.txt"], d);
    ok(
        &[
            "infer", "--weights", "w.txt", "--in", data, "--out", "model.jsonl", "--decode",
            "threshold", "--trajectories", "traj.jsonl",
        ],
        d,
    );
    ok(&["solve", "--algo", "pd-uniform", "--in", data, "--out", "pd.jsonl"], d);
    let report = ok(
        &["bench", "--model", "model.jsonl", "--algo", "pd.jsonl", "--report", "r.json"],
        d,
    );
    assert_eq!(report["sizes"][0]["mean"], 1.0);
    assert_eq!(report["cleanup_rate"], 0.0);
    assert_eq!(lines(&d.join("traj.jsonl")).len(), 8);
}

#[test]
fn random_weights_teacher_forced() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        &[
            "generate", "--task", "mvc", "--family", "star", "--size", "10", "--count", "5",
            "--test", "--out", "ds",
        ],
        d,
    );
    ok(&["weights", "--random", "--seed", "5", "--hidden-dim", "4", "--out", "w.txt"], d);
    ok(
        &[
            "infer", "--weights", "w.txt", "--in", "ds/mvc_star_10_test.jsonl", "--out", "m.jsonl",
            "--teacher-forced",
        ],
        d,
    );
    assert!(lines(&d.join("m.jsonl")).iter().all(|r| r["feasible"] == true));
}

#[test]
fn export_writes_one_file_per_instance() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        &[
            "generate", "--task", "mvc", "--family", "lobster", "--size", "12", "--count", "4",
            "--test", "--out", "ds",
        ],
        d,
    );
    let data = "ds/mvc_lobster_12_test.jsonl";
    ok(&["solve", "--algo", "pd", "--in", data, "--out", "pd.jsonl"], d);
    ok(&["export", "--format", "lp", "--in", data, "--out", "lp"], d);
    ok(&["export", "--format", "mst", "--in", data, "--solution", "pd.jsonl", "--out", "mst"], d);
    for rec in lines(&d.join("pd.jsonl")) {
        let id = rec["id"].as_str().unwrap();
        let lp = std::fs::read_to_string(d.join("lp").join(format!("{id}.lp"))).unwrap();
        assert!(lp.contains("Binary") && lp.trim_end().ends_with("End"));
        let mst = std::fs::read_to_string(d.join("mst").join(format!("{id}.mst"))).unwrap();
        let ones = mst.lines().filter(|l| l.ends_with(" 1")).count();
        assert_eq!(ones, rec["chosen"].as_array().unwrap().len());
    }
}

#[test]
fn verify_replication_passes() {
    let dir = tempfile::tempdir().unwrap();
    for task in ["mvc", "msc", "mhs"] {
        let summary = ok(
            &["verify-replication", "--task", task, "--count", "6", "--tol", "1e-6"],
            dir.path(),
        );
        assert_eq!(summary["failed"], 0);
        assert_eq!(summary["checks"], 12);
    }
}

#[test]
fn failures_exit_nonzero_with_error_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let out = hitset(&["solve", "--algo", "pd", "--in", "missing.jsonl", "--out", "x"], d);
    assert_eq!(out.status.code(), Some(1));
    let err = error_line(&out);
    assert_eq!(err["error"], "io");
    assert!(err["message"].as_str().unwrap().contains("missing.jsonl"));

    let out = hitset(&["solve", "--algo", "nope", "--in", "a", "--out", "b"], d);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_line(&out)["error"], "usage");

    std::fs::write(d.join("bad.jsonl"), "{\"id\": 3\n").unwrap();
    let out = hitset(&["exact", "--in", "bad.jsonl", "--out", "x"], d);
    assert_eq!(out.status.code(), Some(1));
    let err = error_line(&out);
    assert_eq!(err["error"], "parse");
    assert!(err["message"].as_str().unwrap().contains("line 1"));

    let out = hitset(
        &["generate", "--task", "mvc", "--family", "ba_bipartite", "--size", "8", "--count", "1", "--out", "o"],
        d,
    );
    assert_eq!(error_line(&out)["error"], "unsupported");

    ok(
        &[
            "generate", "--task", "mhs", "--family", "ba_bipartite", "--size", "8", "--count", "2",
            "--test", "--out", "ds",
        ],
        d,
    );
    let out = hitset(
        &["solve", "--algo", "cover", "--in", "ds/mhs_ba_bipartite_8_test.jsonl", "--out", "x"],
        d,
    );
    assert_eq!(error_line(&out)["error"], "unsupported");
    let out = hitset(
        &["export", "--format", "mst", "--in", "ds/mhs_ba_bipartite_8_test.jsonl", "--out", "m"],
        d,
    );
    assert_eq!(error_line(&out)["error"], "invalid-config");
}

#[test]
fn help_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = hitset(&["--help"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("verify-replication"));
}
