//! Word and character error rates, and the summary table used by `eval`.

use decipher_fst::eval::{corpus_error_rate, summary_table, text_error_rate, Unit};

fn main() -> decipher_fst::Result<()> {
    let refs = ["the cat sat on the mat", "a quick brown fox"];
    let hyps = ["the cat sad on mat", "a quick brown fox jumps"];
    for (r, h) in refs.iter().zip(&hyps) {
        let w = text_error_rate(r, h, Unit::Word);
        println!("{r:?} vs {h:?}: S={} I={} D={} WER={:.3}", w.substitutions, w.insertions, w.deletions, w.rate);
    }
    let rows = vec![
        ("wer".to_string(), corpus_error_rate(&refs, &hyps, Unit::Word)?),
        ("cer".to_string(), corpus_error_rate(&refs, &hyps, Unit::Char)?),
    ];
    print!("\n{}", summary_table(&rows));
    println!("\n{}", serde_json::to_string_pretty(&rows[0].1)?);
    Ok(())
}
