//! Lexical model files: a TSV of `grapheme<TAB>phone<TAB>prob` for every
//! active entry, plus a JSON sidecar with the symbol inventories.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fst::symbols::{SymbolTable, EPSILON_SYMBOL};

use super::lexical::LexicalModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LexicalMeta {
    pub phones: Vec<String>,
    pub graphemes: Vec<String>,
    pub silence: Vec<String>,
    pub boundary: String,
}

pub fn lexical_to_tsv(lex: &LexicalModel) -> String {
    let mut out = String::new();
    for row in 0..lex.num_rows() as u32 {
        for col in 0..lex.num_cols() as u32 {
            if lex.is_active(row, col) {
                let g = lex.graphemes().symbol(row).unwrap_or(EPSILON_SYMBOL);
                let p = lex.phones().symbol(col).unwrap_or(EPSILON_SYMBOL);
                out.push_str(&format!("{g}\t{p}\t{}\n", lex.prob(row, col)));
            }
        }
    }
    out
}

pub fn lexical_meta(lex: &LexicalModel) -> LexicalMeta {
    let names = |t: &SymbolTable| t.iter().map(|(_, s)| s.to_string()).collect();
    LexicalMeta {
        phones: names(lex.phones()),
        graphemes: names(lex.graphemes()),
        silence: lex
            .silence_phones()
            .filter_map(|p| lex.phones().symbol(p).map(String::from))
            .collect(),
        boundary: lex.graphemes().symbol(lex.boundary()).unwrap_or_default().to_string(),
    }
}

/// Rebuilds a model from its TSV and metadata. Entries absent from the TSV are
/// pruned.
pub fn lexical_from_tsv(text: &str, meta: &LexicalMeta) -> Result<LexicalModel> {
    let phones = SymbolTable::from_symbols(&meta.phones).into_shared();
    let graphemes = SymbolTable::from_symbols(&meta.graphemes).into_shared();
    let silence: Vec<&str> = meta.silence.iter().map(String::as_str).collect();
    let shell = LexicalModel::init(phones.clone(), graphemes.clone(), &silence, &meta.boundary, 0.0)?;
    let mut probs = vec![0.0; shell.num_params()];
    let mut mask = vec![false; shell.num_params()];
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 3 {
            return Err(Error::parse(i + 1, format!("expected 3 fields, got {}", f.len())));
        }
        let lookup = |t: &SymbolTable, s: &str| {
            if s == EPSILON_SYMBOL {
                Some(0)
            } else {
                t.get(s)
            }
        };
        let row = lookup(&graphemes, f[0]).ok_or_else(|| Error::parse(i + 1, format!("unknown grapheme {:?}", f[0])))?;
        let col = lookup(&phones, f[1]).ok_or_else(|| Error::parse(i + 1, format!("unknown phone {:?}", f[1])))?;
        if !shell.is_allowed(row, col) {
            return Err(Error::parse(i + 1, format!("entry ({}, {}) is not allowed", f[0], f[1])));
        }
        let p: f64 = f[2]
            .parse()
            .map_err(|_| Error::parse(i + 1, format!("bad probability {:?}", f[2])))?;
        let id = shell.param(row, col) as usize;
        probs[id] = p;
        mask[id] = true;
    }
    let silence_mask = (0..phones.len() as u32).map(|p| shell.is_silence(p)).collect();
    let lex = LexicalModel::from_parts(phones, graphemes, shell.boundary(), silence_mask, probs, mask);
    lex.validate(1e-6)?;
    Ok(lex)
}

/// Writes `<stem>.tsv` and `<stem>.json`.
pub fn write_lexical(lex: &LexicalModel, stem: &Path) -> Result<()> {
    fs::write(stem.with_extension("tsv"), lexical_to_tsv(lex))?;
    fs::write(stem.with_extension("json"), serde_json::to_string_pretty(&lexical_meta(lex))?)?;
    Ok(())
}

pub fn read_lexical(stem: &Path) -> Result<LexicalModel> {
    let meta: LexicalMeta = serde_json::from_str(&fs::read_to_string(stem.with_extension("json"))?)?;
    lexical_from_tsv(&fs::read_to_string(stem.with_extension("tsv"))?, &meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decipher::lexical::init_lexical;

    #[test]
    fn round_trip_is_exact() {
        let p = SymbolTable::from_symbols(["A", "B", "C", "SIL"]).into_shared();
        let g = SymbolTable::from_symbols(["<wb>", "a", "b"]).into_shared();
        let lex = init_lexical(p, g, &["SIL"], "<wb>").unwrap().prune(2).unwrap().smooth(0.7).unwrap().prune(1).unwrap();
        let back = lexical_from_tsv(&lexical_to_tsv(&lex), &lexical_meta(&lex)).unwrap();
        assert_eq!(back, lex);
    }
}
