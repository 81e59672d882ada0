//! Drives the same five steps as the `decipher-fst` binary on a tiny
//! experiment in a temporary directory, then prints the manifest.

use std::fs;

use decipher_fst::cli::{read_manifest, run_command, Command, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    fs::write(dir.path().join("schedule.json"), r#"[{"lm": "char-2", "iterations": 5}, {"lm": "char-3", "iterations": 5}]"#)?;
    let config = dir.path().join("exp.json");
    fs::write(
        &config,
        r#"{
  "output_dir": "run",
  "seed": 11,
  "paths": {"schedule": "schedule.json"},
  "synth": {"lm_sentences": 300, "cipher_sentences": 40, "heldout_sentences": 5, "train_utterances": 20},
  "decode": {"emit_lattice": true}
}"#,
    )?;
    let cfg = ExperimentConfig::load(&config)?;
    for cmd in [Command::Synth, Command::Lm, Command::Train, Command::Decode, Command::Eval] {
        // Validation reads every input and writes nothing.
        run_command(&cfg, cmd, true)?;
        run_command(&cfg, cmd, false)?;
    }
    let manifest = read_manifest(&cfg.output_dir)?.expect("manifest written");
    for (step, record) in &manifest.steps {
        println!("{step}: config {}… {} outputs", &record.config_sha256[..12], record.outputs.len());
    }
    println!("\n{}", fs::read_to_string(cfg.output_dir.join("eval.json"))?);
    Ok(())
}
