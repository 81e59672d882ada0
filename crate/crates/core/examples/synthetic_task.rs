//! Generates a small synthetic decipherment task under a few channel
//! settings and prints an utterance from each.

use decipher_fst::synth::{build_task, TableKind, TaskConfig};

fn main() -> decipher_fst::Result<()> {
    let base = TaskConfig {
        lm_sentences: 100,
        cipher_sentences: 50,
        heldout_sentences: 5,
        train_utterances: 10,
        ..Default::default()
    };
    let settings = [
        ("bijective, silence", base.clone()),
        ("bijective, no silence", TaskConfig { silence_prob: 0.0, ..base.clone() }),
        ("bijective, 15% noise", TaskConfig { noise_rate: 0.15, ..base.clone() }),
        ("ambiguous table", TaskConfig { table: TableKind::Ambiguous, ..base }),
    ];
    for (name, cfg) in settings {
        let task = build_task(&cfg)?;
        println!("{name}");
        println!("  text:   {}", task.heldout_text[0]);
        println!("  phones: {}", task.heldout_phones[0].join(" "));
    }
    let task = build_task(&TaskConfig { lm_sentences: 100, cipher_sentences: 50, heldout_sentences: 5, train_utterances: 10, ..Default::default() })?;
    println!("\nshortest training utterances:");
    for (text, phones) in task.train_text.iter().zip(&task.train_phones).take(3) {
        println!("  {text:<20} {}", phones.join(" "));
    }
    println!("\npronunciation table (first lines):");
    for line in task.table.to_tsv().lines().take(5) {
        println!("  {line}");
    }
    Ok(())
}
