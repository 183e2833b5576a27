use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tagrec::commands::{synth_text, SynthKind};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn tagrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tagrec"))
        .args(args)
        .env("TAGREC_WORKERS", "2")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = tagrec(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

/// Exit code and the single stderr line.
fn fails(args: &[&str]) -> (i32, String) {
    let out = tagrec(args);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    assert!(stderr.starts_with("error kind="), "{stderr}");
    (out.status.code().unwrap(), stderr)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const ALL: &str = "3l,3lt-topic,3lt-tag,mp,mp-u,mp-r,mp-ur,lda,cf,apr,folkrank,bllc,girptm";

/// ingest → split → lda → eval, returning the eval directory.
fn pipeline(dir: &Path) -> PathBuf {
    let ds = dir.join("ds.tsv");
    let split = dir.join("split");
    let model = dir.join("model.tsv");
    let eval = dir.join("eval");
    ok(&["ingest", "--input", s(&fixture("pipeline.tsv")), "--out", s(&ds)]);
    ok(&["split", "--input", s(&ds), "--out", s(&split)]);
    ok(&["lda", "--split", s(&split), "--topics", "5", "--iters", "50", "--seed", "3", "--out", s(&model)]);
    ok(&[
        "eval", "--split", s(&split), "--model", s(&model), "--algos", ALL, "--sig", "--curves", "--out", s(&eval),
    ]);
    ok(&[
        "recommend", "--split", s(&split), "--model", s(&model), "--algo", "3lt-tag", "--k", "5", "--out",
        s(&dir.join("pred.tsv")),
    ]);
    ok(&["drift", "--input", s(&ds), "--topics", "3", "--iters", "30", "--max-lag", "10", "--out", s(&dir.join("drift"))]);
    eval
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn bundled_fixtures_match_the_generator() {
    assert_eq!(read(&fixture("pipeline.tsv")), synth_text(SynthKind::Pipeline).unwrap());
    assert_eq!(read(&fixture("drift.tsv")), synth_text(SynthKind::Drift).unwrap());
    assert!(read(&fixture("pipeline.tsv")).contains("# posts=200\n"));
}

#[test]
fn full_pipeline_is_complete_and_byte_identical_on_rerun() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let eval_a = pipeline(a.path());
    pipeline(b.path());

    let report: serde_json::Value = serde_json::from_str(&read(&eval_a.join("report.json"))).unwrap();
    let algos = report["algorithms"].as_array().unwrap();
    assert_eq!(algos.len(), 13);
    for alg in algos {
        assert_eq!(alg["n_cases"], 10);
        assert_eq!(alg["precision_at_k"].as_array().unwrap().len(), 10);
    }
    let config = report["config"]["config"].as_str().unwrap();

    let files = [
        "ds.tsv",
        "split/train.tsv",
        "split/test.tsv",
        "model.tsv",
        "eval/report.json",
        "eval/report.tsv",
        "eval/curves.tsv",
        "eval/significance.tsv",
        "pred.tsv",
        "drift/drift_index.tsv",
        "drift/drift_days.tsv",
    ];
    for f in files {
        let text = read(&a.path().join(f));
        assert_eq!(text, read(&b.path().join(f)), "{f} differs between runs");
        assert!(text.contains("config"), "{f} lacks the config fingerprint");
    }
    assert!(read(&eval_a.join("report.tsv")).contains(&format!("# config={config}\n")));
    // 3 algorithm metrics x 13 choose 2 pairs
    assert_eq!(read(&eval_a.join("significance.tsv")).lines().filter(|l| !l.starts_with('#')).count(), 1 + 3 * 78);
    assert_eq!(read(&a.path().join("pred.tsv")).lines().filter(|l| !l.starts_with('#')).count(), 1 + 50);
}

#[test]
fn worker_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let split = dir.path().join("split");
    ok(&["split", "--input", s(&fixture("pipeline.tsv")), "--out", s(&split)]);
    let mut reports = Vec::new();
    for workers in ["1", "4"] {
        let out_dir = dir.path().join(workers);
        let out = Command::new(env!("CARGO_BIN_EXE_tagrec"))
            .args(["eval", "--split", s(&split), "--algos", "mp-ur,cf,bllc", "--out", s(&out_dir)])
            .env("TAGREC_WORKERS", workers)
            .output()
            .unwrap();
        assert!(out.status.success());
        reports.push(read(&out_dir.join("report.json")));
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let split = dir.path().join("split");
    ok(&["split", "--input", s(&fixture("pipeline.tsv")), "--out", s(&split)]);

    let (code, line) = fails(&["eval", "--split", s(&split), "--algos", "3l,nope", "--out", s(&dir.path().join("e"))]);
    assert_eq!(code, 2, "{line}");
    assert!(line.contains("kind=config"));
    assert!(!dir.path().join("e").exists());

    let (code, _) = fails(&["eval", "--split", s(&split), "--beta", "2", "--out", s(&dir.path().join("e"))]);
    assert_eq!(code, 2);
    let (code, _) = fails(&["eval", "--bogus-flag"]);
    assert_eq!(code, 2);

    let (code, line) = fails(&["ingest", "--input", s(&dir.path().join("missing.tsv")), "--out", s(&dir.path().join("x"))]);
    assert_eq!(code, 3, "{line}");

    let bad = dir.path().join("bad.tsv");
    fs::write(&bad, "u\tr\tt\t1\nu\tr\tt\tnoon\n").unwrap();
    let (code, line) = fails(&["ingest", "--input", s(&bad), "--out", s(&dir.path().join("x"))]);
    assert_eq!(code, 5);
    assert!(line.contains("bad.tsv:2"), "{line}");
}

#[test]
fn models_from_other_splits_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (one, two) = (dir.path().join("one"), dir.path().join("two"));
    ok(&["split", "--input", s(&fixture("pipeline.tsv")), "--out", s(&one)]);
    ok(&["split", "--input", s(&fixture("drift.tsv")), "--out", s(&two)]);
    let model = dir.path().join("model.tsv");
    ok(&["lda", "--split", s(&one), "--topics", "3", "--iters", "10", "--out", s(&model)]);

    let out = dir.path().join("e");
    let (code, line) = fails(&["eval", "--split", s(&two), "--model", s(&model), "--algos", "3l", "--out", s(&out)]);
    assert_eq!(code, 4, "{line}");
    assert!(line.contains("kind=fingerprint"));

    // a paper-mode model is not the train-only model of the same split
    let paper = dir.path().join("paper.tsv");
    ok(&["lda", "--split", s(&one), "--topics", "3", "--iters", "10", "--paper-mode", "--out", s(&paper)]);
    ok(&["eval", "--split", s(&one), "--model", s(&paper), "--algos", "3l", "--out", s(&out)]);
    let tampered = read(&model).replace("# paper_mode=false", "# paper_mode=true");
    fs::write(&model, tampered).unwrap();
    let (code, _) = fails(&["eval", "--split", s(&one), "--model", s(&model), "--algos", "3l", "--out", s(&out)]);
    assert_eq!(code, 4);

    // mixed halves
    let mixed = dir.path().join("mixed");
    fs::create_dir_all(&mixed).unwrap();
    fs::copy(one.join("train.tsv"), mixed.join("train.tsv")).unwrap();
    fs::copy(two.join("test.tsv"), mixed.join("test.tsv")).unwrap();
    let (code, _) = fails(&["eval", "--split", s(&mixed), "--algos", "mp", "--out", s(&out)]);
    assert_eq!(code, 4);
}

#[test]
fn help_exits_cleanly() {
    let out = tagrec(&["--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("eval"));
}
