//! On-disk form of a compiled model: the acceptor in text format plus a JSON
//! sidecar describing it.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fst::io::{read_fst, write_fst};
use crate::fst::semiring::Semiring;
use crate::fst::symbols::SymbolTable;
use crate::fst::wfst::Wfst;

use super::fst::lm_to_fst;
use super::model::{NGramLm, TokenKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LmMeta {
    pub order: usize,
    pub kind: TokenKind,
    pub vocab_size: usize,
    pub num_states: usize,
    pub num_arcs: usize,
    /// Token table file, relative to the sidecar's directory.
    pub alphabet: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heldout_perplexity: Option<f64>,
}

/// Writes `<stem>.fst`, its symbol tables and `<stem>.json`.
pub fn write_lm<W: Semiring>(lm: &NGramLm, stem: &Path, heldout_perplexity: Option<f64>) -> Result<LmMeta> {
    let g: Wfst<W> = lm_to_fst(lm)?;
    write_fst(&g, stem)?;
    let meta = LmMeta {
        order: lm.order(),
        kind: lm.kind(),
        vocab_size: lm.symbols().len() - 1,
        num_states: g.num_states(),
        num_arcs: g.num_arcs(),
        alphabet: file_name(&stem.with_extension("isyms"))?,
        heldout_perplexity,
    };
    fs::write(stem.with_extension("json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(meta)
}

pub fn read_lm<W: Semiring>(stem: &Path) -> Result<(LmMeta, Wfst<W>)> {
    let meta: LmMeta = serde_json::from_str(&fs::read_to_string(stem.with_extension("json"))?)?;
    let g: Wfst<W> = read_fst(stem)?;
    if g.num_states() != meta.num_states || g.num_arcs() != meta.num_arcs {
        return Err(Error::InvalidModel(format!(
            "{} does not match its metadata",
            stem.display()
        )));
    }
    let dir = stem.parent().unwrap_or(Path::new("."));
    let alphabet = SymbolTable::parse_text(&fs::read_to_string(dir.join(&meta.alphabet))?)?;
    if alphabet != **g.isyms() {
        return Err(Error::InvalidModel(format!(
            "{} does not match the alphabet {}",
            stem.display(),
            meta.alphabet
        )));
    }
    Ok((meta, g))
}

fn file_name(p: &Path) -> Result<String> {
    p.file_name()
        .and_then(|n| n.to_str())
        .map(str::to_string)
        .ok_or_else(|| Error::Config(format!("{} has no usable file name", p.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fst::semiring::TropicalWeight;
    use crate::ngram::model::train_char_lm;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("lm2");
        let lm = train_char_lm(&["hello world"], 2).unwrap();
        let meta = write_lm::<TropicalWeight>(&lm, &stem, Some(3.5)).unwrap();
        let (back, g) = read_lm::<TropicalWeight>(&stem).unwrap();
        assert_eq!(meta, back);
        assert_eq!(g.num_states(), meta.num_states);
        assert_eq!(meta.alphabet, "lm2.isyms");
    }
}
