//! One full-batch Baum–Welch iteration.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fst::compose::{compose_chain, ComposeOptions};
use crate::fst::forward_backward::forward_backward;
use crate::fst::semiring::{LogWeight, Semiring};
use crate::fst::symbols::Label;
use crate::fst::wfst::Wfst;

use super::alignment::AlignmentModel;
use super::edit_fst::build_edit_fst;
use super::fused::{self, Channel};
use super::lexical::LexicalModel;
use super::lm::{Combine, LanguageModel};

/// How the E-step obtains posteriors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EStepRoute {
    /// Fused for character models without a lattice beam, lattices
    /// otherwise.
    #[default]
    Auto,
    /// Slice-wise computation that never builds the lattice. Character
    /// models only, no lattice beam.
    Fused,
    /// Compose the lattice and run forward–backward on it.
    Lattice,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EmOptions {
    /// Lattice arcs not on a path within this many nats of the best are
    /// dropped.
    pub beam: Option<f64>,
    /// Approximate forward beam: partial paths falling this many nats behind
    /// the best one at the same input position are abandoned.
    pub search_beam: Option<f64>,
    pub route: EStepRoute,
}

impl EmOptions {
    fn resolve(&self, lm: &LanguageModel) -> Result<bool> {
        let ok = self.beam.is_none() && matches!(lm, LanguageModel::Char(_));
        match self.route {
            EStepRoute::Auto => Ok(ok),
            EStepRoute::Lattice => Ok(false),
            EStepRoute::Fused if ok => Ok(true),
            EStepRoute::Fused => Err(Error::Config(
                "the fused E-step needs a character model and no lattice beam".into(),
            )),
        }
    }
}

/// Result of one EM iteration.
#[derive(Clone, Debug)]
pub struct EmStep {
    pub model: LexicalModel,
    /// Σ over utterances of the natural-log lattice total under the model
    /// that went in.
    pub loglik: f64,
    /// Expected count of every lexical parameter.
    pub counts: Vec<f64>,
    /// Indices of utterances whose lattice was empty.
    pub skipped: Vec<usize>,
}

/// Expected counts and log likelihood under the current model, without the
/// M-step.
pub fn expected_counts(
    lex: &LexicalModel,
    ali: &AlignmentModel,
    corpus: &[Vec<Label>],
    lm: &LanguageModel,
    opts: &EmOptions,
) -> Result<(Vec<f64>, f64, Vec<usize>)> {
    lm.check_graphemes(lex.graphemes())?;
    for (i, utt) in corpus.iter().enumerate() {
        if let Some(&bad) = utt.iter().find(|&&p| p == 0 || p as usize >= lex.num_cols()) {
            return Err(Error::SymbolMismatch(format!("utterance {i} has phone label {bad}")));
        }
    }
    let fused = opts.resolve(lm)?;
    let compose = ComposeOptions {
        prune_beam: opts.beam,
        search_beam: opts.search_beam,
    };
    let edit: Option<Wfst<LogWeight>> = if fused { None } else { Some(build_edit_fst(lex, ali)?) };
    let channel = fused.then(|| Channel::new(lex, ali, Combine::Sum));

    let per_utt = |utt: &Vec<Label>| -> Result<Option<(f64, Vec<f64>)>> {
        let mut counts = vec![0.0; lex.num_params()];
        let res = match (lm, &channel, &edit) {
            (LanguageModel::Char(c), Some(ch), _) => {
                fused::forward_backward(&c.sum, ch, lex, utt, opts.search_beam, &mut counts)
            }
            (_, _, Some(e)) => lattice_counts(lex, e, lm, utt, compose, &mut counts),
            _ => unreachable!("route resolved above"),
        };
        match res {
            Ok(ll) => Ok(Some((ll, counts))),
            Err(Error::EmptyResult) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let results: Vec<Result<Option<(f64, Vec<f64>)>>> = corpus.par_iter().map(per_utt).collect();

    let mut total = vec![0.0; lex.num_params()];
    let mut loglik = 0.0;
    let mut skipped = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r? {
            Some((ll, c)) => {
                loglik += ll;
                for (t, v) in total.iter_mut().zip(c) {
                    *t += v;
                }
            }
            None => skipped.push(i),
        }
    }
    Ok((total, loglik, skipped))
}

fn lattice_counts(
    lex: &LexicalModel,
    edit: &Wfst<LogWeight>,
    lm: &LanguageModel,
    utt: &[Label],
    opts: ComposeOptions,
    counts: &mut [f64],
) -> Result<f64> {
    let x = Wfst::<LogWeight>::string_acceptor(lex.phones().clone(), utt)?;
    let lattice = match lm {
        LanguageModel::Char(c) => compose_chain(&[&x, edit, &c.g], opts)?,
        LanguageModel::Word(w) => compose_chain(&[&x, edit, &w.lexicon_log, &w.g], opts)?,
    };
    if lattice.is_empty() {
        return Err(Error::EmptyResult);
    }
    let post = forward_backward(&lattice)?;
    post.tag_counts(&lattice, |tag, p| counts[tag as usize] += p);
    Ok(-post.total.value())
}

/// E-step over the whole corpus followed by the M-step.
///
/// Utterances whose lattice is empty are skipped and listed in the result.
pub fn em_step(
    lex: &LexicalModel,
    ali: &AlignmentModel,
    corpus: &[Vec<Label>],
    lm: &LanguageModel,
    opts: &EmOptions,
) -> Result<EmStep> {
    let (counts, loglik, skipped) = expected_counts(lex, ali, corpus, lm, opts)?;
    let model = lex.reestimate(&counts)?;
    Ok(EmStep {
        model,
        loglik,
        counts,
        skipped,
    })
}
