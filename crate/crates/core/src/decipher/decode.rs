//! Viterbi decoding of phone sequences into graphemes.

use crate::error::{Error, Result};
use crate::fst::compose::{compose_chain, ComposeOptions};
use crate::fst::semiring::{Semiring, TropicalWeight};
use crate::fst::shortest::shortest_path;
use crate::fst::symbols::{Label, Symbols};
use crate::fst::wfst::Wfst;

use super::alignment::AlignmentModel;
use super::edit_fst::build_edit_fst;
use super::fused::{self, Channel};
use super::lexical::LexicalModel;
use super::lm::{Combine, LanguageModel};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DecodeOptions {
    /// Lattice arcs not on a path within this many nats of the best are
    /// dropped.
    pub beam: Option<f64>,
    /// Approximate forward beam.
    pub search_beam: Option<f64>,
    /// Return the pruned lattice alongside the best path.
    pub emit_lattice: bool,
}

#[derive(Clone, Debug)]
pub struct DecipherResult {
    pub graphemes: Vec<Label>,
    /// Word labels, when a word model was used.
    pub words: Option<Vec<Label>>,
    /// Cost of the best path in nats.
    pub weight: f64,
    /// Phones to graphemes (character model) or to words (word model).
    pub lattice: Option<Wfst<TropicalWeight>>,
}

/// Reusable decoding state for one trained model.
pub struct Decoder<'a> {
    lex: &'a LexicalModel,
    lm: &'a LanguageModel,
    edit: Wfst<TropicalWeight>,
    channel: Channel,
}

impl<'a> Decoder<'a> {
    pub fn new(lex: &'a LexicalModel, ali: &AlignmentModel, lm: &'a LanguageModel) -> Result<Self> {
        lm.check_graphemes(lex.graphemes())?;
        Ok(Decoder {
            lex,
            lm,
            edit: build_edit_fst(lex, ali)?,
            channel: Channel::new(lex, ali, Combine::Min),
        })
    }

    pub fn decode(&self, x: &[Label], opts: &DecodeOptions) -> Result<DecipherResult> {
        if let Some(&bad) = x.iter().find(|&&p| p == 0 || p as usize >= self.lex.num_cols()) {
            return Err(Error::SymbolMismatch(format!("phone label {bad} out of range")));
        }
        if let LanguageModel::Char(c) = self.lm {
            if !opts.emit_lattice && opts.beam.is_none() {
                let (graphemes, weight) = fused::viterbi(&c.min, &self.channel, x, opts.search_beam)?;
                return Ok(DecipherResult {
                    graphemes,
                    words: None,
                    weight,
                    lattice: None,
                });
            }
        }
        let compose = ComposeOptions {
            prune_beam: opts.beam,
            search_beam: opts.search_beam,
        };
        let xa = Wfst::<TropicalWeight>::string_acceptor(self.lex.phones().clone(), x)?;
        let lattice = match self.lm {
            LanguageModel::Char(c) => compose_chain(&[&xa, &self.edit, &c.g_trop], compose)?,
            LanguageModel::Word(w) => compose_chain(&[&xa, &self.edit, &w.lexicon_trop, &w.g_trop], compose)?,
        };
        if lattice.is_empty() {
            return Err(Error::EmptyResult);
        }
        let best = shortest_path(&lattice)?;
        let (graphemes, words) = match self.lm {
            LanguageModel::Char(_) => (best.olabels.clone(), None),
            LanguageModel::Word(w) => {
                let table = w.g.isyms();
                let names: Vec<&str> = table.symbols_of(&best.olabels);
                let spelled = w.lexicon.spell(&names)?;
                let refs: Vec<&str> = spelled.iter().map(String::as_str).collect();
                (self.lex.graphemes().labels_of(&refs)?, Some(best.olabels.clone()))
            }
        };
        Ok(DecipherResult {
            graphemes,
            words,
            weight: best.weight.value(),
            lattice: opts.emit_lattice.then_some(lattice),
        })
    }
}

/// Decodes one phone sequence.
pub fn decipher(
    lex: &LexicalModel,
    ali: &AlignmentModel,
    lm: &LanguageModel,
    x: &[Label],
    opts: &DecodeOptions,
) -> Result<DecipherResult> {
    Decoder::new(lex, ali, lm)?.decode(x, opts)
}

/// Renders graphemes as text: the boundary becomes a space and runs of
/// spaces collapse.
pub fn graphemes_to_text(graphemes: &Symbols, labels: &[Label], boundary: Label) -> String {
    let mut s = String::new();
    for &l in labels {
        if l == boundary {
            s.push(' ');
        } else if let Some(sym) = graphemes.symbol(l) {
            s.push_str(sym);
        }
    }
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
