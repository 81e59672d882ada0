//! Decodes phone strings into pruned lattices and compares the 1-best error
//! with the best path the lattice contains.

use decipher_fst::decipher::{decipher, graphemes_to_text, init_lexical, AlignmentModel, DecodeOptions, LanguageModel};
use decipher_fst::eval::{char_tokens, error_rate, oracle_error_rate, Unit};
use decipher_fst::fst::{LogWeight, SymbolTable};
use decipher_fst::ngram::{lm_to_fst, train_char_lm};
use decipher_fst::synth::TextGenerator;

fn main() -> decipher_fst::Result<()> {
    let text = TextGenerator::default().generate(800, 2)?;
    let lm = train_char_lm(&text, 2)?;
    let g = LanguageModel::char(&lm_to_fst::<LogWeight>(&lm)?)?;

    // A channel that confuses every letter with its alphabetical neighbour.
    let letters: Vec<String> = ('a'..='z').map(|c| c.to_uppercase().to_string()).collect();
    let mut phones = letters.clone();
    phones.push("SIL".into());
    let phones = SymbolTable::from_symbols(phones).into_shared();
    let mut lex = init_lexical(phones.clone(), lm.symbols().clone(), &["SIL"], "<wb>")?;
    for (i, c) in ('a'..='z').enumerate() {
        let Some(row) = lm.symbols().get(&c.to_string()) else { continue };
        let own = i as u32 + 1;
        let next = (i as u32 + 1) % 26 + 1;
        lex.set_row(row, &[(own, 0.5), (next, 0.5)])?;
    }
    let ali = AlignmentModel::default();
    let opts = DecodeOptions { beam: Some(6.0), emit_lattice: true, ..Default::default() };

    for reference in ["the other side", "what about that", "some people", "just give me a minute", "high above the valley"] {
        let x: Vec<u32> = reference
            .chars()
            .map(|c| if c == ' ' { phones.get("SIL").unwrap() } else { phones.get(&c.to_uppercase().to_string()).unwrap() })
            .collect();
        let res = decipher(&lex, &ali, &g, &x, &opts)?;
        let hyp = graphemes_to_text(lex.graphemes(), &res.graphemes, lex.boundary());
        let words: Vec<&str> = reference.split(' ').collect();
        let hyp_words: Vec<&str> = hyp.split(' ').collect();
        let one_best = error_rate(&words, &hyp_words, Unit::Char);
        let lattice = res.lattice.expect("lattice requested");
        let oracle = oracle_error_rate(&lattice, &char_tokens(&words), Unit::Char)?;
        println!(
            "{reference:<22} -> {hyp:<22} 1-best CER {:>5.1}%  oracle CER {:>5.1}%  ({} lattice states)",
            100.0 * one_best.rate,
            100.0 * oracle.rate,
            lattice.num_states()
        );
    }
    Ok(())
}
