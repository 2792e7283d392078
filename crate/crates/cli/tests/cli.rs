use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use btom_harness::table::InferenceTable;

fn stimuli(domain: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/stimuli").join(domain)
}

fn btom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_btom")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = btom(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fails(args: &[&str]) -> String {
    let out = btom(args);
    assert!(!out.status.success(), "{args:?} should fail");
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "multi-line diagnostic: {err}");
    err
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn infer_rows_sum_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("post.csv");
    let stim = stimuli("dkg").join("dkg-lockout.toml");
    ok(&["infer", "--stimulus", p(&stim), "--runs", "2", "--particles", "20", "-o", p(&out)]);
    let table = InferenceTable::read_path(&out).unwrap();
    table.check_normalised(1e-9).unwrap();
    assert_eq!(table.models().into_iter().collect::<Vec<_>>(), ["full"]);
    assert!(!table.rows.is_empty());
}

#[test]
fn per_run_and_every_step_rows() {
    let stim = stimuli("blockwords").join("bw-goal-pear.toml");
    let csv = ok(&[
        "infer", "--stimulus", p(&stim), "--model", "g-lesioned", "--runs", "2", "--particles", "10", "--every-step",
        "--per-run",
    ]);
    let table = InferenceTable::read(csv.as_bytes()).unwrap();
    table.check_normalised(1e-9).unwrap();
    // 18 steps x 5 goals, averaged plus two runs
    assert_eq!(table.rows.len(), 18 * 5 * 3);
}

#[test]
fn simulated_trajectory_feeds_inference() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("t.jsonl");
    let stim = stimuli("dkg").join("dkg-opt-room.toml");
    ok(&["simulate", "--stimulus", p(&stim), "--seed", "5", "--horizon", "25", "-o", p(&traj)]);
    let again = ok(&["simulate", "--stimulus", p(&stim), "--seed", "5", "--horizon", "25"]);
    assert_eq!(fs::read_to_string(&traj).unwrap(), again);
    let csv = ok(&[
        "infer", "--stimulus", p(&stim), "--trajectory", p(&traj), "--runs", "1", "--particles", "10",
    ]);
    InferenceTable::read(csv.as_bytes()).unwrap().check_normalised(1e-9).unwrap();
}

#[test]
fn simulate_from_map_and_words() {
    let map = stimuli("dkg").join("dkg-lockout.map");
    let out = ok(&["simulate", "--map", p(&map), "--gems", "1=red,2=yellow,3=blue", "--goal", "blue"]);
    assert!(out.lines().last().unwrap().contains("pickup-gem blue"));
    let out = ok(&["simulate", "--towers", "p,e,a,r", "--words", "pear,reap", "--model", "a-lesioned"]);
    assert!(out.lines().count() > 1);
}

#[test]
fn fit_recovers_generating_cell() {
    let dir = tempfile::tempdir().unwrap();
    let human = dir.path().join("human.csv");
    let grid = dir.path().join("grid.toml");
    let out = dir.path().join("fit");
    fs::write(&grid, "gamma = [0.5]\nr = [2]\nq = [0.9]\naction_noise = [0.05, 0.2]\n").unwrap();
    let common = ["--domain", "dkg", "--runs", "2", "--particles", "20"];
    let mut args = vec!["synthesize", "--seed", "4", "-o", p(&human)];
    args.extend(common);
    ok(&args);
    let mut args = vec!["fit", "--human", p(&human), "--grid", p(&grid), "--model", "full", "--seed", "9", "-o", p(&out)];
    args.extend(common);
    let report = ok(&args);
    assert!(report.contains("best cell: eps_g=0 eps_a=0.05 gamma=0.5 r=2 q=0.9"), "{report}");
    for f in ["report.txt", "cells-full.csv", "sensitivity.csv", "best-posteriors.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let sens = fs::read_to_string(out.join("sensitivity.csv")).unwrap();
    assert_eq!(sens.lines().count(), 3);
}

#[test]
fn evaluate_breaks_down_by_category() {
    let dir = tempfile::tempdir().unwrap();
    let post = dir.path().join("post.csv");
    let human = dir.path().join("human.csv");
    let out = dir.path().join("eval.csv");
    let common = ["--domain", "dkg", "--runs", "1", "--particles", "10"];
    let mut args = vec!["infer", "--model", "full", "--model", "boltzmann", "-o", p(&post)];
    args.extend(common);
    ok(&args);
    ok(&["synthesize", "--posteriors", p(&post), "--participants", "8", "-o", p(&human)]);
    let text = ok(&[
        "evaluate", "--domain", "dkg", "--human", p(&human), "--posteriors", p(&post), "--resamples", "50", "-o", p(&out),
    ]);
    assert!(text.contains("with replacement"));
    let csv = fs::read_to_string(&out).unwrap();
    // header, then "all" and four categories per model
    assert_eq!(csv.lines().count(), 1 + 2 * 5);
    for subset in ["all", "optimal", "mistaken-action", "backtracking", "irreversible-failure"] {
        assert!(csv.contains(&format!("full,{subset},")), "{subset}");
    }
}

#[test]
fn export_writes_one_series_per_stimulus_and_model() {
    let dir = tempfile::tempdir().unwrap();
    let post = dir.path().join("post.csv");
    let fig = dir.path().join("fig");
    let stim = stimuli("dkg").join("dkg-lockout.toml");
    ok(&[
        "infer", "--stimulus", p(&stim), "--model", "full", "--model", "p-lesioned", "--every-step", "--runs", "1",
        "--particles", "10", "-o", p(&post),
    ]);
    ok(&["export-figures", "--posteriors", p(&post), "-o", p(&fig)]);
    let full = fs::read_to_string(fig.join("dkg-lockout.full.csv")).unwrap();
    assert!(fig.join("dkg-lockout.p-lesioned.csv").exists());
    let mut lines = full.lines();
    assert_eq!(lines.next().unwrap(), "t,blue,red,yellow");
    for l in lines {
        let sum: f64 = l.split(',').skip(1).map(|x| x.parse::<f64>().unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }
}

#[test]
fn bad_inputs_give_one_line_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert!(fails(&["infer", "--stimulus", "/no/such/file.toml"]).contains("/no/such/file.toml"));
    fails(&["infer"]);
    assert!(fails(&["infer", "--domain", "dkg", "--model", "boltzmann", "--gamma", "0.3"]).contains("plans exactly"));
    fails(&["infer", "--domain", "dkg", "--action-noise", "1.5"]);
    fails(&["simulate", "--stimulus", p(&stimuli("dkg").join("dkg-lockout.toml")), "--goal", "green"]);

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "stimulus,point,goal,probability,model,run\ndkg-lockout,2,red,0.3,full,\n").unwrap();
    let human = dir.path().join("h.csv");
    fs::write(&human, "participant-id,stimulus-id,judgment-point,selection\np1,dkg-lockout,2,red\n").unwrap();
    fails(&["evaluate", "--domain", "dkg", "--human", p(&human), "--posteriors", p(&bad)]);
    let grid = dir.path().join("grid.toml");
    fs::write(&grid, "bogus = [1]\n").unwrap();
    fails(&["fit", "--domain", "dkg", "--human", p(&human), "--grid", p(&grid), "-o", p(dir.path())]);
}
