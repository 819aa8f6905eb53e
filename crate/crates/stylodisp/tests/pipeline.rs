//! CLI behavior: error surfaces, locking, stage dependencies, and
//! stage-level reproducibility on the bundled demo fixture.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn demo_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/demo/demo.toml")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stylodisp"))
}

fn run_to_output(args: &[&str], config: &Path, out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

#[test]
fn run_all_exits_zero_with_all_artifact_kinds() {
    let out = tempfile::tempdir().unwrap();
    let output = run_to_output(&["run-all"], &demo_config(), out.path());
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));

    for artifact in [
        "corpus.jsonl",
        "fr/design_report.json",
        "fr/embeddings/model_a.jsonl",
        "fr/sweep.csv",
        "fr/sweep.json",
        "fr/hypotheses.csv",
        "fr/hypotheses.json",
        "fr/ground_frequencies.csv",
        "fr/correlations_model_b.csv",
        "fr/scatter/model_a_QUENEAU_REF.svg",
        "fr/features.csv",
        "journal.jsonl",
        "report.txt",
    ] {
        assert!(out.path().join(artifact).exists(), "missing {artifact}");
    }

    let report = std::fs::read_to_string(out.path().join("report.txt")).unwrap();
    assert!(report.contains("cluster validation"));
    assert!(report.contains("model_a"));

    // The lock is released at the end of the run.
    assert!(!out.path().join(".lock").exists());
}

#[test]
fn missing_api_key_for_remote_model_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("corpus.jsonl"), "{}\n").unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        r#"
[corpus]
manifest = "corpus.jsonl"
languages = ["fr"]

[[models]]
id = "remote"
endpoint = "https://api.example.com/v1"
api_key_env = "STYLODISP_PIPELINE_TEST_KEY"
"#,
    )
    .unwrap();
    let out = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["run-all", "--config"])
        .arg(dir.path().join("run.toml"))
        .arg("--out")
        .arg(out.path())
        .env_remove("STYLODISP_PIPELINE_TEST_KEY")
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("STYLODISP_PIPELINE_TEST_KEY"), "stderr: {stderr}");
}

#[test]
fn stage_with_missing_upstream_artifact_fails_with_hint() {
    let out = tempfile::tempdir().unwrap();
    let output = run_to_output(&["dispersion"], &demo_config(), out.path());
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("ingest"), "stderr: {stderr}");
}

#[test]
fn locked_output_directory_is_refused() {
    let out = tempfile::tempdir().unwrap();
    std::fs::write(out.path().join(".lock"), "12345\n").unwrap();
    let output = run_to_output(&["ingest"], &demo_config(), out.path());
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("locked"), "stderr: {stderr}");
}

#[test]
fn single_stage_rerun_reproduces_outputs_bit_for_bit() {
    let out = tempfile::tempdir().unwrap();
    let output = run_to_output(&["run-all"], &demo_config(), out.path());
    assert!(output.status.success());

    let dispersion = out.path().join("fr/dispersion_model_b.json");
    let hypotheses = out.path().join("fr/hypotheses.csv");
    let before_dispersion = std::fs::read(&dispersion).unwrap();
    let before_hypotheses = std::fs::read(&hypotheses).unwrap();

    let output = run_to_output(&["run-all", "--stage", "dispersion"], &demo_config(), out.path());
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    assert_eq!(before_dispersion, std::fs::read(&dispersion).unwrap());
    assert_eq!(before_hypotheses, std::fs::read(&hypotheses).unwrap());
}

#[test]
fn generate_without_section_is_a_recorded_skip() {
    let out = tempfile::tempdir().unwrap();
    let output = run_to_output(&["ingest"], &demo_config(), out.path());
    assert!(output.status.success());
    let output = run_to_output(&["generate"], &demo_config(), out.path());
    assert!(output.status.success());
    let journal = std::fs::read_to_string(out.path().join("journal.jsonl")).unwrap();
    assert!(journal.contains("stage skipped"), "journal: {journal}");
}

#[test]
fn malformed_manifest_line_is_reported_with_its_number() {
    let dir = tempfile::tempdir().unwrap();
    let good = r#"{"doc_id":"a","language":"fr","text":"Un texte.","cell":"QUENEAU_REF","topic_key":"t","style_key":"s","origin":"reference"}"#;
    std::fs::write(dir.path().join("corpus.jsonl"), format!("{good}\nnot json\n")).unwrap();
    std::fs::write(dir.path().join("emb.jsonl"), "{}\n").unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        r#"
[corpus]
manifest = "corpus.jsonl"
languages = ["fr"]

[[models]]
id = "m"
import = { fr = "emb.jsonl" }
"#,
    )
    .unwrap();
    let out = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["ingest", "--config"])
        .arg(dir.path().join("run.toml"))
        .arg("--out")
        .arg(out.path())
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
}

#[test]
fn unknown_stage_name_is_rejected() {
    let out = tempfile::tempdir().unwrap();
    let output = run_to_output(&["run-all", "--stage", "bogus"], &demo_config(), out.path());
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("unknown stage"));
}

#[test]
fn seed_override_changes_stochastic_artifacts() {
    let out_a = tempfile::tempdir().unwrap();
    let out_b = tempfile::tempdir().unwrap();
    for (dir, seed) in [(&out_a, "0"), (&out_b, "1")] {
        let output = bin()
            .args(["run-all", "--seed", seed, "--config"])
            .arg(demo_config())
            .arg("--out")
            .arg(dir.path())
            .stdout(std::process::Stdio::null())
            .output()
            .unwrap();
        assert!(output.status.success());
    }
    // Different global seeds change the k-means sweep (seeded restarts) or
    // at minimum are recorded; the CSVs must still parse to the same shape.
    let a = std::fs::read_to_string(out_a.path().join("fr/sweep.csv")).unwrap();
    let b = std::fs::read_to_string(out_b.path().join("fr/sweep.csv")).unwrap();
    assert_eq!(a.lines().count(), b.lines().count());
    let journal = std::fs::read_to_string(out_b.path().join("journal.jsonl")).unwrap();
    assert!(journal.contains("\"seed\":1"), "seed override must reach the journal");
}
