//! Running a training schedule.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fst::symbols::Label;

use super::alignment::AlignmentModel;
use super::em::{em_step, EStepRoute, EmOptions};
use super::lexical::LexicalModel;
use super::lm::LanguageModel;
use super::schedule::{LmRef, TrainingSchedule};

/// The language models a schedule may refer to.
#[derive(Clone, Debug, Default)]
pub struct LmSet {
    models: BTreeMap<LmRef, LanguageModel>,
}

impl LmSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, r: LmRef, lm: LanguageModel) -> Result<()> {
        let matches = matches!(
            (r, &lm),
            (LmRef::Char(_), LanguageModel::Char(_)) | (LmRef::Word, LanguageModel::Word(_))
        );
        if !matches {
            return Err(Error::Config(format!("{r} given the wrong kind of model")));
        }
        self.models.insert(r, lm);
        Ok(())
    }

    pub fn get(&self, r: LmRef) -> Result<&LanguageModel> {
        self.models
            .get(&r)
            .ok_or_else(|| Error::Config(format!("no language model for {r}")))
    }
}

/// One line of the training log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub stage: usize,
    pub lm: String,
    pub iter: usize,
    pub loglik: f64,
    pub active_params: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug)]
pub struct Trained {
    pub model: LexicalModel,
    pub log: Vec<IterationRecord>,
}

/// Runs every stage of `schedule` in order, calling `on_iteration` after each
/// EM iteration.
///
/// A stage iteration in which more than half of the utterances have empty
/// lattices aborts training.
pub fn train_with(
    initial: &LexicalModel,
    ali: &AlignmentModel,
    schedule: &TrainingSchedule,
    corpus: &[Vec<Label>],
    lms: &LmSet,
    route: EStepRoute,
    mut on_iteration: impl FnMut(&IterationRecord, &LexicalModel),
) -> Result<Trained> {
    schedule.validate()?;
    ali.validate()?;
    if corpus.is_empty() {
        return Err(Error::Config("training corpus is empty".into()));
    }
    for r in schedule.lm_refs() {
        lms.get(r)?.check_graphemes(initial.graphemes())?;
    }
    let mut lex = initial.clone();
    let mut log = Vec::new();
    for (si, stage) in schedule.stages.iter().enumerate() {
        if let Some(k) = stage.prune_k {
            lex = lex.prune(k)?;
        }
        if let Some(a) = stage.smooth_alpha {
            lex = lex.smooth(a)?;
        }
        let lm = lms.get(stage.lm)?;
        let opts = EmOptions {
            beam: stage.beam,
            search_beam: stage.search_beam,
            route,
        };
        for it in 0..stage.iterations {
            let step = em_step(&lex, ali, corpus, lm, &opts)?;
            if step.skipped.len() * 2 > corpus.len() {
                return Err(Error::TrainingAborted(format!(
                    "stage {si} ({}), iteration {}: {} of {} utterances have empty lattices, first {:?}",
                    stage.lm,
                    it + 1,
                    step.skipped.len(),
                    corpus.len(),
                    &step.skipped[..step.skipped.len().min(5)]
                )));
            }
            if !step.skipped.is_empty() {
                tracing::warn!(
                    stage = si,
                    lm = %stage.lm,
                    iter = it + 1,
                    skipped = step.skipped.len(),
                    first = step.skipped[0],
                    "utterances with empty lattices were skipped"
                );
            }
            let rec = IterationRecord {
                stage: si,
                lm: stage.lm.to_string(),
                iter: it + 1,
                loglik: step.loglik,
                active_params: lex.active_params(),
                skipped: step.skipped.len(),
            };
            lex = step.model;
            on_iteration(&rec, &lex);
            log.push(rec);
        }
        if let Some(a) = stage.smooth_after {
            lex = lex.smooth(a)?;
        }
    }
    Ok(Trained { model: lex, log })
}

/// [`train_with`] using the automatic E-step route and no callback.
pub fn train(
    initial: &LexicalModel,
    ali: &AlignmentModel,
    schedule: &TrainingSchedule,
    corpus: &[Vec<Label>],
    lms: &LmSet,
) -> Result<Trained> {
    train_with(initial, ali, schedule, corpus, lms, EStepRoute::Auto, |_, _| {})
}
