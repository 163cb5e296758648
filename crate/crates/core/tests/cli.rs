//! End-to-end runs of the command-line front end.

use std::fs;
use std::path::Path;

use dvqa::analysis::{BENCH_HEADER, NOISE_HEADER, NOISE_RUNS_HEADER};
use dvqa::cli::run;
use dvqa::trainer::RECORDS_HEADER;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn dvqa(args: &[&str]) -> i32 {
    run(std::iter::once("dvqa").chain(args.iter().copied()))
}

#[test]
fn solve_single_edge_reaches_optimum() {
    let tmp = tempfile::tempdir().unwrap();
    let edge = write(tmp.path(), "edge.txt", "2\n0 1 1\n");
    let out = tmp.path().join("out");
    let out = out.to_str().unwrap();
    let args = [
        "solve", "--problem", "maxcut", "--input", &edge, "--k", "2", "--rank", "1", "--depth", "6", "--iters", "200",
        "--seed", "1", "--mode", "exact", "--out", out,
    ];
    assert_eq!(dvqa(&args), 0);
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(format!("{out}/solve_result.json")).unwrap()).unwrap();
    assert_eq!(doc["result"]["best_energy"].as_f64().unwrap(), -1.0);
    assert_eq!(doc["manifest"]["command"], "solve");
    assert_eq!(doc["manifest"]["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    let csv = fs::read_to_string(format!("{out}/solve_iterations.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), RECORDS_HEADER);
    assert_eq!(csv.lines().count(), 202);

    let first = csv.clone();
    assert_eq!(dvqa(&args), 0);
    assert_eq!(fs::read_to_string(format!("{out}/solve_iterations.csv")).unwrap(), first);
}

#[test]
fn exit_codes_follow_the_error_class() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let out = out.to_str().unwrap();
    let edge = write(tmp.path(), "edge.txt", "2\n0 1 1\n");
    let missing = tmp.path().join("missing.txt");
    assert_eq!(dvqa(&["solve", "--input", missing.to_str().unwrap(), "--out", out]), 3);
    let bad = write(tmp.path(), "bad.txt", "3\n0 1 1\n1 q 1\n");
    assert_eq!(dvqa(&["solve", "--input", &bad, "--out", out]), 3);
    assert_eq!(dvqa(&["solve", "--input", &edge, "--rank", "0", "--out", out]), 2);
    assert_eq!(dvqa(&["solve", "--input", &edge, "--k", "3", "--out", out]), 2);
    assert_eq!(dvqa(&["solve", "--input", &edge, "--mode", "bogus", "--out", out]), 2);
    assert_eq!(dvqa(&["solve", "--input", &edge, "--mode", "noisy", "--p1", "1.5", "--out", out]), 2);
    assert_eq!(dvqa(&["bench", "--out", out, "--runs", "0"]), 2);
    assert_eq!(dvqa(&["frobnicate"]), 2);
}

#[test]
fn brute_and_gradcheck() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let out = out.to_str().unwrap();
    let tri = write(tmp.path(), "tri.txt", "3\n0 1 1\n1 2 1\n0 2 1\n");
    assert_eq!(dvqa(&["brute", "--input", &tri, "--out", out]), 0);
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(format!("{out}/brute_result.json")).unwrap()).unwrap();
    assert_eq!(doc["result"]["energy"].as_f64().unwrap(), -2.0);

    assert_eq!(dvqa(&["gradcheck", "--seed", "1", "--n", "6", "--out", out]), 0);
    assert_eq!(dvqa(&["gradcheck", "--seed", "1", "--n", "6", "--k", "3", "--layout", "train", "--out", out]), 0);
    // An absurd step size breaks agreement and must be reported.
    assert_eq!(dvqa(&["gradcheck", "--seed", "1", "--n", "6", "--step", "0.5", "--out", out]), 1);
}

#[test]
fn bench_rows_and_byte_identical_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let edge = write(tmp.path(), "edge.txt", "2\n0 1 1\n");
    let tri = write(tmp.path(), "tri.txt", "3\n0 1 1\n1 2 1\n0 2 1\n");
    let run_once = |dir: &str| {
        let args = ["bench", "--input", &edge, &tri, "--iters", "30", "--depth", "2", "--no-timing", "--out", dir];
        assert_eq!(dvqa(&args), 0);
        fs::read_to_string(format!("{dir}/bench.csv")).unwrap()
    };
    let a = run_once(tmp.path().join("a").to_str().unwrap());
    let b = run_once(tmp.path().join("b").to_str().unwrap());
    assert_eq!(a, b);
    assert_eq!(a.lines().next().unwrap(), BENCH_HEADER);
    assert_eq!(a.lines().count(), 1 + 2 * 2 * 20);
    let manifest = fs::read_to_string(tmp.path().join("a/bench_manifest.json")).unwrap();
    assert!(manifest.contains("bench.csv"));
}

#[test]
fn noise_command_writes_both_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let out = out.to_str().unwrap();
    let cfg = write(tmp.path(), "noise.cfg", "# small study\nnum_qubits = 4\nks = 2, 4\nruns = 2\niterations = 20\nrestarts = 1\ndepth = 2\n");
    assert_eq!(dvqa(&["noise", "--config", &cfg, "--hamiltonians", "end_zz", "--no-timing", "--out", out]), 0);
    let rows = fs::read_to_string(format!("{out}/noise.csv")).unwrap();
    assert_eq!(rows.lines().next().unwrap(), NOISE_HEADER);
    assert_eq!(rows.lines().count(), 3);
    let runs = fs::read_to_string(format!("{out}/noise_runs.csv")).unwrap();
    assert_eq!(runs.lines().next().unwrap(), NOISE_RUNS_HEADER);
    assert_eq!(runs.lines().count(), 5);

    let bad = write(tmp.path(), "bad.cfg", "num_qubits = 4\nbogus = 1\n");
    assert_eq!(dvqa(&["noise", "--config", &bad, "--out", out]), 3);
}

#[test]
fn output_directory_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let tri = write(tmp.path(), "tri.txt", "3\n0 1 1\n1 2 1\n0 2 1\n");
    let dir = tmp.path().join("env-out");
    std::env::set_var(dvqa::cli::OUT_DIR_ENV, &dir);
    assert_eq!(dvqa(&["brute", "--input", &tri]), 0);
    assert!(dir.join("brute_manifest.json").exists());
}
