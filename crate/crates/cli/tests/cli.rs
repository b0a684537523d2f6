use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn specsynth(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specsynth"))
        .args(args)
        .current_dir(dir)
        .env_remove("SPECSYNTH_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn csv_body(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn construct_then_verify_both_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let built = specsynth(
        &["construct", "--kind", "random", "--grid", "16x1", "--size", "4", "--set-out", "s.json", "--signal-out", "f.json", "--seed", "5"],
        dir.path(),
    );
    assert!(built.status.success(), "{}", String::from_utf8_lossy(&built.stderr));
    for which in ["support", "indicator"] {
        let out = specsynth(
            &["verify", "--which", which, "--grid", "16x1", "--p", "2", "--set-file", "s.json", "--signal-file", "f.json"],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let v = json(&out);
        assert!(v["result"]["slack_ratio"].as_f64().unwrap() >= 1.0 - 1e-9);
        assert_eq!(v["config"]["args"]["which"], which);
    }
}

#[test]
fn subspace_signal_attains_the_indicator_bound() {
    let dir = tempfile::tempdir().unwrap();
    let built = specsynth(
        &["construct", "--kind", "subspace", "--grid", "8x2", "--axes", "1", "--set-out", "h.json", "--signal-out", "f.json"],
        dir.path(),
    );
    assert!(built.status.success());
    let v = json(&built);
    assert_eq!(v["result"]["subspace"]["members"].as_array().unwrap().len(), 8);
    let out = specsynth(
        &["verify", "--which", "indicator", "--grid", "8x2", "--p", "inf", "--set-file", "h.json", "--signal-file", "f.json"],
        dir.path(),
    );
    assert!(out.status.success());
    let ratio = json(&out)["result"]["slack_ratio"].as_f64().unwrap();
    assert!((ratio - 1.0).abs() < 1e-9);
}

#[test]
fn violated_bound_exits_with_assertion_code() {
    let dir = tempfile::tempdir().unwrap();
    // A unit mass has flat spectrum; at p = 1 the support bound fails.
    let mut values = vec![[0.0, 0.0]; 8];
    values[0] = [1.0, 0.0];
    let signal = serde_json::json!({"modulus": 8, "dim": 1, "domain": "space", "values": values});
    let set = serde_json::json!({"modulus": 8, "dim": 1, "members": (0..8).collect::<Vec<_>>()});
    std::fs::write(dir.path().join("f.json"), signal.to_string()).unwrap();
    std::fs::write(dir.path().join("s.json"), set.to_string()).unwrap();
    let out = specsynth(
        &["verify", "--which", "support", "--grid", "8x1", "--p", "1", "--set-file", "s.json", "--signal-file", "f.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(json(&out)["result"]["slack_ratio"].as_f64().unwrap() < 1.0);
}

#[test]
fn usage_and_data_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad_grid = specsynth(&["phi-stats", "--grid", "16by2", "--size", "3"], dir.path());
    assert_eq!(bad_grid.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_grid.stderr).contains("--grid"));

    let both = specsynth(&["lambda-search", "--grid", "16x1", "--p", "4", "--size", "4", "--alpha", "0.5"], dir.path());
    assert_eq!(both.status.code(), Some(2));

    std::fs::write(dir.path().join("s.json"), r#"{"modulus": 8, "dim": 1, "members": [1]}"#).unwrap();
    std::fs::write(dir.path().join("f.json"), "{ not json").unwrap();
    let malformed = specsynth(
        &["verify", "--which", "support", "--grid", "8x1", "--p", "2", "--set-file", "s.json", "--signal-file", "f.json"],
        dir.path(),
    );
    assert_eq!(malformed.status.code(), Some(4));

    let signal = serde_json::json!({"modulus": 4, "dim": 1, "domain": "space", "values": vec![[1.0, 0.0]; 4]});
    std::fs::write(dir.path().join("g.json"), signal.to_string()).unwrap();
    let wrong_grid = specsynth(
        &["verify", "--which", "support", "--grid", "8x1", "--p", "2", "--set-file", "s.json", "--signal-file", "g.json"],
        dir.path(),
    );
    assert_eq!(wrong_grid.status.code(), Some(4));
}

#[test]
fn transform_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let values: Vec<[f64; 2]> = (0..9).map(|i| [i as f64, (i * i % 5) as f64]).collect();
    let signal = serde_json::json!({"modulus": 3, "dim": 2, "domain": "space", "values": values});
    std::fs::write(dir.path().join("f.json"), signal.to_string()).unwrap();
    let fwd = specsynth(&["transform", "--input", "f.json", "--output", "F.json"], dir.path());
    assert!(fwd.status.success());
    let back = specsynth(&["transform", "--input", "F.json"], dir.path());
    assert!(back.status.success());
    let v = json(&back);
    assert_eq!(v["result"]["domain"], "space");
    for (got, want) in v["result"]["values"].as_array().unwrap().iter().zip(&values) {
        assert!((got[0].as_f64().unwrap() - want[0]).abs() < 1e-12);
        assert!((got[1].as_f64().unwrap() - want[1]).abs() < 1e-12);
    }
}

#[test]
fn recover_example_matches_truth() {
    let dir = tempfile::tempdir().unwrap();
    let out = specsynth(&["recover", "--grid", "8x1", "--alphabet", "0,1", "--hidden-size", "2", "--seed", "7"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["result"]["rows"][0]["exact_match"], true);
    assert_eq!(v["result"]["first"]["truth"], v["result"]["first"]["recovered"]);
}

#[test]
fn problem_file_round_trip_and_csv_append() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["recover", "--grid", "16x1", "--alphabet", "0,1", "--hidden-size", "2", "--seed", "11", "--problem-out", "p.json", "--append-csv", "rows.csv"];
    assert!(specsynth(&args, dir.path()).status.success());
    assert!(specsynth(&args, dir.path()).status.success());
    let rows = std::fs::read_to_string(dir.path().join("rows.csv")).unwrap();
    let lines: Vec<&str> = rows.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("seed,N,d,hidden,p,objective,unique,exact_match,iterations"));
    assert_eq!(lines[1], lines[2]);

    let solved = specsynth(&["recover", "--problem-file", "p.json", "--alphabet", "0,1"], dir.path());
    assert!(solved.status.success(), "{}", String::from_utf8_lossy(&solved.stderr));
    let v = json(&solved);
    assert_eq!(v["result"]["snapped"], true);
    assert_eq!(v["result"]["certificate"]["unique"], true);
}

#[test]
fn sweep_body_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        specsynth(
            &["sweep", "--alpha", "0.5", "--grid-range", "8..32", "--budget", "8", "--trials", "8", "--seed", "4", "--threads", threads],
            dir.path(),
        )
    };
    let one = run("1");
    let eight = run("8");
    assert!(one.status.success() && eight.status.success());
    assert!(String::from_utf8_lossy(&one.stdout).starts_with("# config: "));
    let body = csv_body(&one);
    assert!(body.starts_with("experiment,N,d,size,p,statistic,bound,pass"));
    assert_eq!(body, csv_body(&eight));
}

#[test]
fn seed_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_specsynth"))
            .args(["construct", "--kind", "random", "--grid", "64x1", "--size", "5"])
            .current_dir(dir.path())
            .env("SPECSYNTH_SEED", seed)
            .output()
            .unwrap()
    };
    let a = json(&run("21"));
    let b = json(&run("21"));
    let c = json(&run("22"));
    assert_eq!(a["config"]["seed"], 21);
    assert_eq!(a["result"], b["result"]);
    assert_ne!(a["result"], c["result"]);
}

#[test]
fn explain_describes_each_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in [
        vec!["transform", "--input", "x"],
        vec!["phi-stats", "--grid", "8x1", "--size", "2"],
        vec!["sweep", "--alpha", "0.5", "--grid-range", "8..16"],
    ] {
        let mut args = cmd.clone();
        args.push("--explain");
        let out = specsynth(&args, dir.path());
        assert!(out.status.success());
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.starts_with(cmd[0]), "{text}");
    }
}

#[test]
fn phi_stats_csv_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = specsynth(&["phi-stats", "--grid", "64x1", "--size", "16", "--trials", "200", "--format", "csv"], dir.path());
    assert!(out.status.success());
    let body = csv_body(&out);
    assert_eq!(body.lines().count(), 2);
    assert!(body.lines().nth(1).unwrap().starts_with("phi_tail,64,1,16,inf,"));
}
