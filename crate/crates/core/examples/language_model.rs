//! Trains Witten-Bell character models of increasing order, compiles each
//! into a backoff acceptor, and compares perplexities.

use decipher_fst::fst::{LogWeight, Semiring, Wfst};
use decipher_fst::ngram::{backoff_walk, lm_to_fst, perplexity, train_char_lm};
use decipher_fst::synth::TextGenerator;

fn main() -> decipher_fst::Result<()> {
    let text = TextGenerator::default().generate(600, 1)?;
    let (train, heldout) = text.split_at(500);
    println!("order  states    arcs  train ppl  held-out ppl");
    for order in 1..=5 {
        let lm = train_char_lm(train, order)?;
        let g: Wfst<LogWeight> = lm_to_fst(&lm)?;
        println!(
            "{order:>5} {:>7} {:>7} {:>10.3} {:>13.3}",
            g.num_states(),
            g.num_arcs(),
            perplexity(&lm, train),
            perplexity(&lm, heldout)
        );
    }

    let lm = train_char_lm(train, 3)?;
    let g: Wfst<LogWeight> = lm_to_fst(&lm)?;
    let sentence = "the time of day";
    let graphemes = decipher_fst::ngram::graphemes_of(sentence);
    let tokens = lm.symbols().labels_of(&graphemes.iter().map(String::as_str).collect::<Vec<_>>())?;
    let walked = backoff_walk(&g, &tokens).expect("every string has a backoff path");
    println!(
        "\n-log P({sentence:?}) = {:.4} from the model, {:.4} walking the acceptor",
        -lm.sentence_logprob(&tokens),
        walked.value()
    );
    Ok(())
}
