#![allow(dead_code)]

pub mod oracle;
pub mod wb;

use decipher_fst::decipher::{init_lexical, LexicalModel};
use decipher_fst::fst::{Label, SymbolTable, Symbols};
use decipher_fst::ngram::{train_char_lm, NGramLm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random lines over the first `k` letters, one to three short words each.
pub fn random_text(rng: &mut ChaCha8Rng, lines: usize, k: u8) -> Vec<String> {
    (0..lines)
        .map(|_| {
            let words = rng.gen_range(1..=3);
            (0..words)
                .map(|_| {
                    let len = rng.gen_range(1..=4);
                    (0..len).map(|_| (b'a' + rng.gen_range(0..k)) as char).collect::<String>()
                })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

pub fn phone_table(n: usize) -> Symbols {
    let mut v: Vec<String> = (0..n).map(|i| format!("P{i}")).collect();
    v.push("SIL".into());
    SymbolTable::from_symbols(v).into_shared()
}

/// A lexical model over `lm`'s graphemes with randomized rows.
pub fn random_lexical(rng: &mut ChaCha8Rng, lm: &NGramLm, phones: usize) -> LexicalModel {
    let lex = init_lexical(phone_table(phones), lm.symbols().clone(), &["SIL"], "<wb>").unwrap();
    let counts: Vec<f64> = (0..lex.num_params()).map(|_| rng.gen_range(0.05..1.0)).collect();
    lex.reestimate(&counts).unwrap()
}

pub fn random_phones(rng: &mut ChaCha8Rng, lex: &LexicalModel, len: usize) -> Vec<Label> {
    let n = lex.num_cols() as Label;
    (0..len).map(|_| rng.gen_range(1..n)).collect()
}

pub fn small_lm(rng: &mut ChaCha8Rng, order: usize) -> NGramLm {
    let text = random_text(rng, 12, 3);
    train_char_lm(&text, order).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
