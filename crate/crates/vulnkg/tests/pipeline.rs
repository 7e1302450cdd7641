//! End-to-end CLI pipeline over the bundled offline fixtures: every
//! subcommand runs against a scratch workspace with no network access.

use std::path::{Path, PathBuf};
use std::process::Command;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .canonicalize()
        .unwrap()
}

fn write_config(dir: &Path, fixture_set: &str, mode: &str) {
    let config = format!(
        r#"seed = 42

[paths]
fixtures = "{}"
cwe_catalog = "{}"

[split]
mode = "{mode}"
valid_fraction = 0.08
test_fraction = 0.15
train_cutoff = "2023-01-01"
test_cutoff = "2023-12-31"

[model]
dim = 16
rel_layers = 2
ent_layers = 2
fusion_hidden = 32

[train]
learning_rate = 0.002
negatives = 8
epochs = 3
batches_per_epoch = 4
batch_size = 16
fusion_enabled = true
"#,
        fixtures().join(fixture_set).display(),
        fixtures().join("cwe.xml").display()
    );
    std::fs::write(dir.join("run.toml"), config).unwrap();
}

fn run(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_vulnkg"))
        .current_dir(dir)
        .args(["--config", "run.toml"])
        .args(args)
        .output()
        .unwrap()
}

fn run_ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn full_offline_pipeline_transductive() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "nvd_tiny", "transductive");

    let out = run_ok(dir.path(), &["ingest"]);
    assert!(out.contains("nvd: cached 48 documents"), "{out}");
    assert!(dir.path().join("out/raw/nvd/manifest").exists());

    let out = run_ok(dir.path(), &["build"]);
    assert!(out.contains("graph:"), "{out}");
    for f in ["entities.tsv", "triples.tsv", "descriptions.tsv", "manifest"] {
        assert!(dir.path().join("out/graph").join(f).exists(), "missing {f}");
    }

    let out = run_ok(dir.path(), &["split"]);
    assert!(out.contains("split (transductive)"), "{out}");
    assert!(dir.path().join("out/splits/test.tsv").exists());

    run_ok(dir.path(), &["train"]);
    assert!(dir.path().join("out/checkpoints/model.ckpt").exists());
    assert!(dir.path().join("out/reports/train_loss.tsv").exists());

    let out = run_ok(dir.path(), &["eval", "--part", "test"]);
    assert!(out.contains("MRR"), "{out}");
    let report = std::fs::read_to_string(dir.path().join("out/reports/eval_test.tsv")).unwrap();
    assert!(report.contains("# summary\tall"));
    assert!(report.contains("# config_checksum"));

    let out = run_ok(
        dir.path(),
        &["predict", "--cve", "CVE-2023-4863", "--relation", "matchingCVE", "--top", "10"],
    );
    let rows: Vec<&str> = out.lines().filter(|l| l.starts_with(char::is_numeric)).collect();
    assert_eq!(rows.len(), 10, "{out}");
    assert!(dir
        .path()
        .join("out/reports/predict_CVE-2023-4863_matchingCVE.tsv")
        .exists());
    assert!(dir
        .path()
        .join("out/reports/predict_CVE-2023-4863_matchingCVE.jsonl")
        .exists());
    // Known links are excluded by default: chrome is already linked.
    assert!(!out.contains("cpe:2.3:a:google:chrome\t"), "{out}");

    let out = run_ok(dir.path(), &["stats"]);
    assert!(out.contains("triples per year:"), "{out}");
    assert!(out.contains("missing-CWE fraction"), "{out}");
}

#[test]
fn inductive_pipeline_produces_extension() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "nvd_tiny", "inductive");
    run_ok(dir.path(), &["ingest"]);
    run_ok(dir.path(), &["build"]);
    let out = run_ok(
        dir.path(),
        &[
            "split",
            "--mode",
            "inductive",
            "--train-cutoff",
            "2023-01-01",
            "--test-cutoff",
            "2023-12-31",
        ],
    );
    assert!(out.contains("extension"), "{out}");
    assert!(dir.path().join("out/splits/extension.tsv").exists());
    let manifest = std::fs::read_to_string(dir.path().join("out/splits/manifest")).unwrap();
    assert!(manifest.contains("mode\tinductive"));
    assert!(manifest.contains("train_cutoff\t2023-01-01"));
}

#[test]
fn unknown_command_exits_with_usage() {
    let out = Command::new(env!("CARGO_BIN_EXE_vulnkg"))
        .arg("frobnicate")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("Usage") || stderr.contains("usage"), "{stderr}");
}

#[test]
fn module_errors_exit_nonzero_with_message() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "nvd_tiny", "transductive");
    // eval before any other step: the graph is missing.
    let out = run(dir.path(), &["eval", "--part", "test"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    // Bad config key.
    std::fs::write(dir.path().join("run.toml"), "sean = 1\n").unwrap();
    let out = run(dir.path(), &["stats"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sean"));
}

#[test]
fn baseline_eval_runs_transductive_only() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "nvd_tiny", "transductive");
    run_ok(dir.path(), &["ingest"]);
    run_ok(dir.path(), &["build"]);
    run_ok(dir.path(), &["split"]);
    let out = run_ok(dir.path(), &["eval", "--part", "test", "--baseline"]);
    assert!(out.contains("MRR"), "{out}");
    assert!(dir.path().join("out/reports/eval_test_baseline.tsv").exists());
}
