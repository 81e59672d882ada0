use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use decipher_fst::cli::{read_manifest, EvalReport};
use serde_json::json;

fn run(config: &Path, cmd: &str, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_decipher-fst"))
        .arg(cmd)
        .arg("--config")
        .arg(config)
        .args(extra)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn ok(config: &Path, cmd: &str, extra: &[&str]) -> Output {
    let out = run(config, cmd, extra);
    assert!(out.status.success(), "{cmd} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

/// A small experiment: short bijective task, two char stages.
fn small_experiment(dir: &Path, extra: serde_json::Value) -> PathBuf {
    fs::write(dir.join("schedule.json"), r#"[{"lm":"char-2","iterations":3},{"lm":"char-3","iterations":3,"prune_k":10}]"#).unwrap();
    let mut cfg = json!({
        "output_dir": "run",
        "seed": 5,
        "paths": {"schedule": "schedule.json"},
        "synth": {"lm_sentences": 400, "cipher_sentences": 60, "heldout_sentences": 8, "train_utterances": 30},
        "decode": {"emit_lattice": true}
    });
    if let (Some(c), Some(e)) = (cfg.as_object_mut(), extra.as_object()) {
        for (k, v) in e {
            c.insert(k.clone(), v.clone());
        }
    }
    let path = dir.join("exp.json");
    fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn full_pipeline_runs_and_reruns_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_experiment(tmp.path(), json!({}));
    let run_dir = tmp.path().join("run");
    for cmd in ["synth", "lm", "train", "decode", "eval"] {
        ok(&cfg, cmd, &["--jobs", "1"]);
    }
    let phones = fs::read_to_string(run_dir.join("heldout.phones")).unwrap();
    let text = fs::read_to_string(run_dir.join("heldout.txt")).unwrap();
    assert_eq!(phones.lines().count(), text.lines().count());
    let hyps = fs::read_to_string(run_dir.join("hypotheses.txt")).unwrap();
    assert_eq!(hyps.lines().count(), 8);
    assert!(run_dir.join("models/char-2.fst").is_file());
    assert!(run_dir.join("models/lexical.tsv").is_file());
    assert_eq!(fs::read_to_string(run_dir.join("train_log.jsonl")).unwrap().lines().count(), 6);

    let report: EvalReport = serde_json::from_str(&fs::read_to_string(run_dir.join("eval.json")).unwrap()).unwrap();
    let cer = report.reports["cer"].rate;
    let oracle = report.reports["oracle_cer"].rate;
    assert!(oracle <= cer, "oracle {oracle} above 1-best {cer}");

    let manifest = read_manifest(&run_dir).unwrap().unwrap();
    assert_eq!(manifest.steps.len(), 5);
    for step in manifest.steps.values() {
        for (file, hash) in &step.outputs {
            let bytes = fs::read(run_dir.join(file)).unwrap();
            assert_eq!(&hex_sha256(&bytes), hash, "{file}");
        }
    }

    let before = snapshot(&run_dir);
    for cmd in ["synth", "lm", "train", "decode", "eval"] {
        ok(&cfg, cmd, &["--jobs", "2"]);
    }
    assert_eq!(snapshot(&run_dir), before);
}

fn hex_sha256(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

#[test]
fn validate_mode_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_experiment(tmp.path(), json!({}));
    ok(&cfg, "synth", &["--validate"]);
    assert!(!tmp.path().join("run").exists());
    ok(&cfg, "synth", &[]);
    let before = snapshot(&tmp.path().join("run"));
    ok(&cfg, "lm", &["--validate"]);
    assert_eq!(snapshot(&tmp.path().join("run")), before);
}

#[test]
fn missing_inputs_fail_before_any_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_experiment(tmp.path(), json!({"paths": {"source_text": "missing.txt"}}));
    let out = run(&cfg, "synth", &[]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.txt"));
    assert!(!tmp.path().join("run").exists());
}

#[test]
fn synth_requires_a_seed_and_the_flag_overrides_it() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_experiment(tmp.path(), json!({"seed": null}));
    assert!(!run(&cfg, "synth", &[]).status.success());
    ok(&cfg, "synth", &["--seed", "8"]);
    let manifest = read_manifest(&tmp.path().join("run")).unwrap().unwrap();
    assert_eq!(manifest.steps["synth"].seed, Some(8));
}

#[test]
fn zero_jobs_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_experiment(tmp.path(), json!({}));
    assert!(!run(&cfg, "synth", &["--jobs", "0"]).status.success());
}

#[test]
fn lm_builds_every_requested_order() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("lm.txt"), "the cat sat\non the mat\n").unwrap();
    let cfg = small_experiment(tmp.path(), json!({"paths": {"lm_text": "lm.txt", "schedule": "schedule.json"}, "lm": {"char_orders": [1, 2, 3, 4, 5]}}));
    ok(&cfg, "lm", &[]);
    let models = tmp.path().join("run/models");
    for n in 1..=5 {
        assert!(models.join(format!("char-{n}.fst")).is_file(), "char-{n}");
    }
    let unigram = fs::read_to_string(models.join("char-1.fst")).unwrap();
    let states: std::collections::BTreeSet<&str> = unigram.lines().filter_map(|l| l.split_whitespace().next()).collect();
    assert_eq!(states.len(), 1, "{unigram}");

    fs::write(tmp.path().join("lm.txt"), "").unwrap();
    assert!(!run(&cfg, "lm", &[]).status.success());
}

#[test]
fn reference_scored_against_itself_is_perfect() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_experiment(tmp.path(), json!({"decode": {}}));
    ok(&cfg, "synth", &[]);
    let run_dir = tmp.path().join("run");
    fs::copy(run_dir.join("heldout.txt"), run_dir.join("hypotheses.txt")).unwrap();
    let out = ok(&cfg, "eval", &[]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("cer"));
    let report: EvalReport = serde_json::from_str(&fs::read_to_string(run_dir.join("eval.json")).unwrap()).unwrap();
    assert_eq!(report.reports["wer"].rate, 0.0);
    assert_eq!(report.reports["cer"].rate, 0.0);
}
