//! End-to-end command tests: exit codes, report layout, replay
//! verdicts, and import determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_routefuzz"))
}

fn repo_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn write_campaign(dir: &Path, budget: u32, seed: u64) -> PathBuf {
    let path = dir.join("campaign.cfg");
    let topology = repo_path("topologies/tiny5.txt");
    fs::write(
        &path,
        format!(
            "topology {}\ntarget dc2\nbudget-iters {budget}\ntrials 1\nseed {seed}\nmutator grammar\n",
            topology.display()
        ),
    )
    .unwrap();
    path
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn run_writes_report_layout_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_campaign(dir.path(), 40, 12);
    let out = dir.path().join("out");
    let output = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stdout(&output));
    assert!(out.join("manifest.json").is_file());
    assert!(out.join("summary.txt").is_file());
    assert!(out.join("trials.jsonl").is_file());
    assert!(out.join("findings").is_dir());
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert_eq!(stdout(&output), summary);
    assert!(summary.contains("detection matrix"));
    // The manifest is valid JSON and records the seed verbatim.
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 12);
}

#[test]
fn run_with_missing_topology_exits_two_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("campaign.cfg");
    fs::write(&cfg, "topology /nope/missing.txt\ntarget dc2\n").unwrap();
    let output = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("/nope/missing.txt"), "{err}");
}

#[test]
fn identical_manifests_give_identical_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_campaign(dir.path(), 35, 99);
    let mut summaries = Vec::new();
    for sub in ["a", "b"] {
        let out = dir.path().join(sub);
        let output = bin()
            .args(["run", "--config"])
            .arg(&cfg)
            .arg("--out-dir")
            .arg(&out)
            .output()
            .unwrap();
        assert_eq!(output.status.code(), Some(0));
        summaries.push(fs::read_to_string(out.join("summary.txt")).unwrap());
    }
    assert_eq!(summaries[0], summaries[1]);
}

#[test]
fn fail_on_finding_gates_with_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_campaign(dir.path(), 40, 12);
    let output = bin()
        .args(["run", "--fail-on-finding", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
}

fn first_archive(out: &Path, class: &str) -> PathBuf {
    let mut dirs: Vec<PathBuf> = fs::read_dir(out.join("findings"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().contains(class))
        .collect();
    dirs.sort();
    dirs.into_iter().next().expect("archive for class exists")
}

#[test]
fn replay_matches_and_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_campaign(dir.path(), 120, 3);
    let out = dir.path().join("out");
    let status = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let archive = first_archive(&out, "session-reset");
    let first = bin().arg("replay").arg(&archive).output().unwrap();
    assert_eq!(first.status.code(), Some(0));
    assert!(stdout(&first).trim_end().ends_with("MATCH"), "{}", stdout(&first));
    let second = bin().arg("replay").arg(&archive).output().unwrap();
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn replay_detects_perturbed_archives() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_campaign(dir.path(), 120, 3);
    let out = dir.path().join("out");
    bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out)
        .status()
        .unwrap();
    let archive = first_archive(&out, "session-reset");
    let config_path = archive.join("config.txt");
    let original = fs::read_to_string(&config_path).unwrap();
    let edited: String = original
        .lines()
        .filter(|l| !l.contains("maximum-prefix"))
        .map(|l| format!("{l}\n"))
        .collect();
    fs::write(&config_path, edited).unwrap();
    let output = bin().arg("replay").arg(&archive).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).trim_end().ends_with("MISMATCH"));
}

#[test]
fn replay_of_corrupt_archive_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("finding.json"), "not json").unwrap();
    fs::write(dir.path().join("topology.txt"), "").unwrap();
    fs::write(dir.path().join("config.txt"), "").unwrap();
    let output = bin().arg("replay").arg(dir.path()).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn import_zoo_is_deterministic_and_loadable() {
    let dir = tempfile::tempdir().unwrap();
    let sample = repo_path("topologies/zoo_sample.graphml");
    let out_a = dir.path().join("a.txt");
    let out_b = dir.path().join("b.txt");
    for out in [&out_a, &out_b] {
        let output = bin()
            .arg("import-zoo")
            .arg(&sample)
            .arg("--out")
            .arg(out)
            .output()
            .unwrap();
        assert_eq!(output.status.code(), Some(0));
    }
    assert_eq!(
        fs::read_to_string(&out_a).unwrap(),
        fs::read_to_string(&out_b).unwrap()
    );
    // The imported file loads as a topology.
    let validate = bin().arg("validate").arg(&out_a).output().unwrap();
    assert_eq!(validate.status.code(), Some(0));
    let text = stdout(&validate);
    assert!(text.contains("5 nodes"), "{text}");
    assert!(text.contains("6 links"), "{text}");
}

#[test]
fn import_zoo_rejects_empty_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.graphml");
    fs::write(&empty, "<graphml><graph></graph></graphml>").unwrap();
    let output = bin().arg("import-zoo").arg(&empty).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn validate_handles_both_kinds_and_errors() {
    let config = repo_path("crates/core/tests/corpus/c01_two_neighbors.txt");
    let output = bin().arg("validate").arg(&config).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("valid config"));

    let topology = repo_path("topologies/ring3.txt");
    let output = bin().arg("validate").arg(&topology).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("valid topology"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "router bgp banana\n").unwrap();
    let output = bin().arg("validate").arg(&bad).output().unwrap();
    assert_eq!(output.status.code(), Some(1));

    let output = bin().arg("validate").arg("/does/not/exist").output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_flags_exit_two() {
    let output = bin().arg("run").arg("--bogus-flag").output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}
