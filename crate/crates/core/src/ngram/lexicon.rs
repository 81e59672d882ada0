//! Spelling lexicons mapping grapheme strings to words.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fst::semiring::Semiring;
use crate::fst::symbols::{Symbols, EPSILON};
use crate::fst::wfst::{Arc, Wfst};

use super::model::WORD_BOUNDARY;

/// Word spellings plus the token separating consecutive words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphemeLexicon {
    pub entries: BTreeMap<String, Vec<String>>,
    pub boundary: String,
}

impl GraphemeLexicon {
    /// Checks that words are unique and spellings nonempty.
    pub fn new(entries: Vec<(String, Vec<String>)>, boundary: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (word, spelling) in entries {
            if spelling.is_empty() {
                return Err(Error::InvalidModel(format!("word {word:?} has an empty spelling")));
            }
            if map.insert(word.clone(), spelling).is_some() {
                return Err(Error::InvalidModel(format!("duplicate word {word:?}")));
            }
        }
        Ok(GraphemeLexicon {
            entries: map,
            boundary: boundary.to_string(),
        })
    }

    /// Spells each word letter by letter, separated by `<wb>`.
    pub fn from_words<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        let entries = words
            .into_iter()
            .map(|w| (w.to_string(), w.chars().map(String::from).collect()))
            .collect();
        GraphemeLexicon {
            entries,
            boundary: WORD_BOUNDARY.to_string(),
        }
    }

    /// Lexicon covering every entry of a word table except those in `skip`.
    pub fn from_word_table(words: &Symbols, skip: &[&str]) -> Self {
        Self::from_words(words.iter().map(|(_, s)| s).filter(|s| !skip.contains(s)))
    }

    /// Concatenates spellings of `words`, boundary-separated.
    pub fn spell(&self, words: &[&str]) -> Result<Vec<String>> {
        let mut out = Vec::new();
        for (i, w) in words.iter().enumerate() {
            if i > 0 {
                out.push(self.boundary.clone());
            }
            let sp = self
                .entries
                .get(*w)
                .ok_or_else(|| Error::InvalidModel(format!("word {w:?} not in lexicon")))?;
            out.extend(sp.iter().cloned());
        }
        Ok(out)
    }
}

/// Transducer from grapheme strings to word sequences.
///
/// The word label sits on the first arc of each spelling. All spellings end
/// in a shared final state with a boundary arc back to the start, which is
/// final too, so the empty string and a trailing boundary are accepted.
pub fn build_lexicon_fst<W: Semiring>(
    lex: &GraphemeLexicon,
    graphemes: &Symbols,
    words: &Symbols,
) -> Result<Wfst<W>> {
    let boundary = graphemes.get(&lex.boundary).ok_or_else(|| {
        Error::SymbolMismatch(format!("boundary {:?} not in grapheme table", lex.boundary))
    })?;
    let mut b = Wfst::<W>::builder(graphemes.clone(), words.clone());
    let start = b.add_state();
    let end = b.add_state();
    b.set_start(start);
    b.set_final(start, W::one());
    b.set_final(end, W::one());
    b.add_arc(end, Arc::new(boundary, EPSILON, W::one(), start));
    for (word, spelling) in &lex.entries {
        let wl = words
            .get(word)
            .ok_or_else(|| Error::SymbolMismatch(format!("word {word:?} not in word table")))?;
        if spelling.is_empty() {
            return Err(Error::InvalidModel(format!("word {word:?} has an empty spelling")));
        }
        let mut src = start;
        for (i, g) in spelling.iter().enumerate() {
            let gl = graphemes.get(g).ok_or_else(|| {
                Error::SymbolMismatch(format!("grapheme {g:?} of {word:?} not in grapheme table"))
            })?;
            let dst = if i + 1 == spelling.len() { end } else { b.add_state() };
            let ol = if i == 0 { wl } else { EPSILON };
            b.add_arc(src, Arc::new(gl, ol, W::one(), dst));
            src = dst;
        }
    }
    b.build()
}
