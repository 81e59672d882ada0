//! In-memory glue from a synthetic task to held-out error rates.

use rayon::prelude::*;

use crate::decipher::{
    graphemes_to_text, init_lexical, train_with, AlignmentModel, DecipherResult, DecodeOptions, Decoder, EStepRoute,
    IterationRecord, LanguageModel, LexicalModel, LmRef, LmSet, TrainingSchedule,
};
use crate::error::{Error, Result};
use crate::eval::{corpus_error_rate, ErrorReport, Unit};
use crate::fst::semiring::LogWeight;
use crate::fst::symbols::{Label, SymbolTable, Symbols};
use crate::ngram::{lm_to_fst, train_char_lm, train_word_lm, GraphemeLexicon, UNKNOWN_WORD, WORD_BOUNDARY};
use crate::synth::SyntheticTask;

/// Trains every model `schedule` refers to on `text`. Character models share
/// one grapheme table, which is returned.
pub fn build_lms<S: AsRef<str> + Sync>(
    text: &[S],
    schedule: &TrainingSchedule,
    word_order: usize,
    vocab_limit: usize,
) -> Result<(LmSet, Symbols)> {
    let base = train_char_lm(text, 1)?;
    let graphemes = base.symbols().clone();
    let mut set = LmSet::new();
    for r in schedule.lm_refs() {
        let lm = match r {
            LmRef::Char(n) => {
                let lm = train_char_lm(text, n)?;
                LanguageModel::char(&lm_to_fst::<LogWeight>(&lm)?.with_symbols(graphemes.clone(), graphemes.clone())?)?
            }
            LmRef::Word => {
                let lm = train_word_lm(text, word_order, vocab_limit)?;
                let g = lm_to_fst::<LogWeight>(&lm)?;
                let lex = GraphemeLexicon::from_word_table(lm.symbols(), &[UNKNOWN_WORD]);
                LanguageModel::word(&g, lex, &graphemes)?
            }
        };
        set.insert(r, lm)?;
    }
    Ok((set, graphemes))
}

/// Maps phone strings to labels of `phones`.
pub fn phone_labels(phones: &Symbols, corpus: &[Vec<String>]) -> Result<Vec<Vec<Label>>> {
    corpus
        .iter()
        .map(|u| {
            let refs: Vec<&str> = u.iter().map(String::as_str).collect();
            phones.labels_of(&refs)
        })
        .collect()
}

/// Decodes every utterance in parallel; `None` marks utterances without any
/// path.
pub fn decode_all(
    lex: &LexicalModel,
    ali: &AlignmentModel,
    lm: &LanguageModel,
    corpus: &[Vec<Label>],
    opts: &DecodeOptions,
) -> Result<Vec<Option<DecipherResult>>> {
    let dec = Decoder::new(lex, ali, lm)?;
    corpus
        .par_iter()
        .map(|x| match dec.decode(x, opts) {
            Ok(r) => Ok(Some(r)),
            Err(Error::EmptyResult) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

/// Decodes every utterance and renders it as text. Utterances without any
/// path decode to the empty string.
pub fn decode_corpus(
    lex: &LexicalModel,
    ali: &AlignmentModel,
    lm: &LanguageModel,
    corpus: &[Vec<Label>],
    opts: &DecodeOptions,
) -> Result<Vec<String>> {
    Ok(decode_all(lex, ali, lm, corpus, opts)?
        .into_iter()
        .map(|r| r.map_or_else(String::new, |r| graphemes_to_text(lex.graphemes(), &r.graphemes, lex.boundary())))
        .collect())
}

/// Settings for [`run_task`].
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub schedule: TrainingSchedule,
    pub alignment: AlignmentModel,
    pub route: EStepRoute,
    /// Model used for held-out decoding; defaults to the last stage's.
    pub decode_lm: Option<LmRef>,
    pub decode: DecodeOptions,
    pub word_order: usize,
    pub vocab_limit: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            schedule: TrainingSchedule::default(),
            alignment: AlignmentModel::default(),
            route: EStepRoute::Auto,
            decode_lm: None,
            decode: DecodeOptions::default(),
            word_order: 3,
            vocab_limit: 100_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TaskOutcome {
    pub model: LexicalModel,
    pub log: Vec<IterationRecord>,
    pub hypotheses: Vec<String>,
    pub cer: ErrorReport,
    pub wer: ErrorReport,
}

/// Trains on the task's training utterances, decodes the held-out ones and
/// scores them.
pub fn run_task(task: &SyntheticTask, opts: &RunOptions) -> Result<TaskOutcome> {
    let (lms, graphemes) = build_lms(&task.lm_text, &opts.schedule, opts.word_order, opts.vocab_limit)?;
    let phones = SymbolTable::from_symbols(task.table.phones()).into_shared();
    let lex0 = init_lexical(phones.clone(), graphemes, &[task.table.silence()], WORD_BOUNDARY)?;
    let train = phone_labels(&phones, &task.train_phones)?;
    let trained = train_with(&lex0, &opts.alignment, &opts.schedule, &train, &lms, opts.route, |_, _| {})?;
    let last = opts.schedule.stages.last().expect("validated schedule").lm;
    let lm = lms.get(opts.decode_lm.unwrap_or(last))?;
    let heldout = phone_labels(&phones, &task.heldout_phones)?;
    let hypotheses = decode_corpus(&trained.model, &opts.alignment, lm, &heldout, &opts.decode)?;
    Ok(TaskOutcome {
        cer: corpus_error_rate(&task.heldout_text, &hypotheses, Unit::Char)?,
        wer: corpus_error_rate(&task.heldout_text, &hypotheses, Unit::Word)?,
        model: trained.model,
        log: trained.log,
        hypotheses,
    })
}
