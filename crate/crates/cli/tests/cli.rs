//! End-to-end tests of the rtslab binary: exit statuses, frozen output
//! schemas and byte-level reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicU32, Ordering};

static DIR_COUNTER: AtomicU32 = AtomicU32::new(0);

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "rtslab-cli-{}-{}-{}",
        tag,
        std::process::id(),
        DIR_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn rtslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rtslab"))
        .args(args)
        .env_remove("RTSLAB_PARALLEL")
        .output()
        .expect("binary runs")
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

const RUN_CONFIG: &str = "[algorithm]
n = 30
mu = 4
w = 2
kind = \"rts\"
policy = \"without_replacement\"

[stop]
require_both_optima = true
stagnation_collapse = false
stagnation_w_minus_one = false
budget = 5000
";

#[test]
fn run_prints_deterministic_summary() {
    let dir = scratch_dir("run");
    let cfg = dir.join("run.toml");
    write(&cfg, RUN_CONFIG);
    let args = ["run", "--config", cfg.to_str().unwrap(), "--seed", "11"];
    let first = rtslab(&args);
    assert!(first.status.success(), "{first:?}");
    let stdout = String::from_utf8(first.stdout).unwrap();
    assert!(stdout.starts_with("status: "), "{stdout}");
    for field in [
        "generations:",
        "lone_individual:",
        "best_branch0:",
        "best_branch1:",
        "min_branch_best:",
    ] {
        assert!(stdout.contains(field), "missing {field} in {stdout}");
    }
    let second = rtslab(&args);
    assert_eq!(stdout, String::from_utf8(second.stdout).unwrap());
}

#[test]
fn run_trace_streams_generation_stats() {
    let dir = scratch_dir("trace");
    let cfg = dir.join("run.toml");
    write(&cfg, RUN_CONFIG);
    let trace = dir.join("trace.csv");
    let out = rtslab(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "3",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("generation,count0,count1,best0,best1"));
    let first = lines.next().unwrap();
    assert!(first.starts_with("0,"), "{first}");
}

#[test]
fn unknown_config_key_exits_one_naming_the_key() {
    let dir = scratch_dir("badkey");
    let cfg = dir.join("run.toml");
    write(
        &cfg,
        "[algorithm]\nn = 4\nmu = 2\nw = 1\nkind = \"rts\"\nwindowsize = 9\n\n[stop]\nrequire_both_optima = true\nstagnation_collapse = false\nstagnation_w_minus_one = false\n",
    );
    let out = rtslab(&["run", "--config", cfg.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("windowsize"), "{stderr}");
}

#[test]
fn zero_mu_exits_one() {
    let dir = scratch_dir("zeromu");
    let cfg = dir.join("run.toml");
    write(
        &cfg,
        "[algorithm]\nn = 4\nmu = 0\nw = 1\nkind = \"rts\"\n\n[stop]\nrequire_both_optima = true\nstagnation_collapse = false\nstagnation_w_minus_one = false\nbudget = 5\n",
    );
    let out = rtslab(&["run", "--config", cfg.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("mu"), "{stderr}");
}

#[test]
fn missing_seed_exits_one() {
    let dir = scratch_dir("noseed");
    let cfg = dir.join("run.toml");
    write(&cfg, RUN_CONFIG);
    let out = rtslab(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

const GRID_CONFIG: &str = "[experiment]
protocol = \"success_rate\"
n = 10
mu = [2]
w = [1]
budget = \"standard\"
runs = 1
";

#[test]
fn grid_outputs_have_frozen_schemas_and_are_byte_identical() {
    let dir = scratch_dir("grid");
    let cfg = dir.join("grid.toml");
    write(&cfg, GRID_CONFIG);
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out_dir in [&out_a, &out_b] {
        let out = rtslab(&[
            "grid",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "5",
            "--out",
            out_dir.to_str().unwrap(),
            "--parallel",
            "2",
        ]);
        assert!(out.status.success(), "{out:?}");
    }
    let runs = fs::read_to_string(out_a.join("runs.csv")).unwrap();
    let mut lines = runs.lines();
    assert_eq!(
        lines.next().unwrap(),
        "protocol,algorithm,policy,distance,n,mu,w,run_index,seed,status,generations,lone,best_branch0,best_branch1,min_branch_best"
    );
    assert_eq!(lines.count(), 1, "one data row for a 1-cell 1-run grid");
    let cells = fs::read_to_string(out_a.join("cells.csv")).unwrap();
    assert_eq!(
        cells.lines().next().unwrap(),
        "protocol,algorithm,policy,distance,n,mu,w,runs,success_count,mean_generations,std_generations,lone_count,mean_min_branch_best,std_min_branch_best"
    );
    for name in ["runs.csv", "cells.csv", "report.json"] {
        assert_eq!(
            fs::read(out_a.join(name)).unwrap(),
            fs::read(out_b.join(name)).unwrap(),
            "{name} must be byte-identical across reruns"
        );
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["tool"]["name"], "rtslab");
    assert_eq!(report["spec"]["master_seed"], 5);
    assert_eq!(report["cells"][0]["status"], "completed");
}

#[test]
fn grid_respects_parallel_env_override() {
    let dir = scratch_dir("gridenv");
    let cfg = dir.join("grid.toml");
    write(&cfg, GRID_CONFIG);
    let out_dir = dir.join("out");
    let out = Command::new(env!("CARGO_BIN_EXE_rtslab"))
        .args([
            "grid",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "5",
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .env("RTSLAB_PARALLEL", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("RTSLAB_PARALLEL"), "{stderr}");
}

#[test]
fn oracle_prints_exact_values() {
    let out = rtslab(&["oracle", "--n", "2", "--mu", "2", "--w", "1", "--within", "0"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "0.125");

    // w = 1 coincidence: both policies print the same probability
    let with = rtslab(&["oracle", "--n", "2", "--mu", "2", "--w", "1", "--within", "50"]);
    let without = rtslab(&[
        "oracle",
        "--n",
        "2",
        "--mu",
        "2",
        "--w",
        "1",
        "--policy",
        "without-replacement",
        "--within",
        "50",
    ]);
    assert_eq!(with.stdout, without.stdout);
}

#[test]
fn oracle_limit_breach_exits_one() {
    let out = rtslab(&[
        "oracle",
        "--n",
        "3",
        "--mu",
        "2",
        "--w",
        "1",
        "--within",
        "1",
        "--max-states",
        "20",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("max_states"), "{stderr}");
}

#[test]
fn oracle_reports_unreachable_absorption() {
    let out = rtslab(&["oracle", "--n", "1", "--mu", "1", "--w", "1", "--expected"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "inf");
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("closed class"), "{stderr}");
}

#[test]
fn validate_fast_passes_and_broken_fixture_exits_three() {
    let ok = rtslab(&["validate", "--level", "fast"]);
    assert!(ok.status.success(), "{ok:?}");
    let stdout = String::from_utf8(ok.stdout).unwrap();
    assert!(stdout.contains("PASS transition-cross-check"), "{stdout}");

    let broken = rtslab(&[
        "validate",
        "--level",
        "fast",
        "--break-check",
        "tie-break-uniform",
    ]);
    assert_eq!(broken.status.code(), Some(3));
    let stdout = String::from_utf8(broken.stdout).unwrap();
    assert!(stdout.contains("FAIL tie-break-uniform"), "{stdout}");
}
