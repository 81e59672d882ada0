//! Deciphers a noiseless synthetic cipher with no parallel data: EM over a
//! bigram then trigram character model, then decoding held-out utterances.
//! Run with `--release`; the exact E-step is slow unoptimized.

use decipher_fst::cli::pipeline::{run_task, RunOptions};
use decipher_fst::decipher::TrainingSchedule;
use decipher_fst::synth::{build_task, TaskConfig};

fn main() -> decipher_fst::Result<()> {
    let task = build_task(&TaskConfig {
        seed: 3,
        lm_sentences: 1500,
        cipher_sentences: 300,
        heldout_sentences: 20,
        train_utterances: 100,
        ..Default::default()
    })?;
    let opts = RunOptions {
        schedule: TrainingSchedule::char_only(2..=3, 6, Some(10)),
        ..Default::default()
    };
    let out = run_task(&task, &opts)?;
    for rec in &out.log {
        println!("stage {} {:<7} iteration {:>2}  log-likelihood {:>12.3}", rec.stage, rec.lm, rec.iter, rec.loglik);
    }
    println!();
    for (reference, hyp) in task.heldout_text.iter().zip(&out.hypotheses).take(5) {
        println!("ref: {reference}\nhyp: {hyp}\n");
    }
    println!("held-out CER {:.2}%  WER {:.2}%", 100.0 * out.cer.rate, 100.0 * out.wer.rate);
    Ok(())
}
