//! Staged training plans.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ngram::MAX_ORDER;

/// Names the language model of a stage: `char-N` or `word`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LmRef {
    Char(usize),
    Word,
}

impl fmt::Display for LmRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LmRef::Char(n) => write!(f, "char-{n}"),
            LmRef::Word => f.write_str("word"),
        }
    }
}

impl FromStr for LmRef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "word" {
            return Ok(LmRef::Word);
        }
        s.strip_prefix("char-")
            .and_then(|n| n.parse().ok())
            .filter(|n| (1..=MAX_ORDER).contains(n))
            .map(LmRef::Char)
            .ok_or_else(|| Error::Config(format!("unknown language model reference {s:?}")))
    }
}

impl Serialize for LmRef {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LmRef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One block of EM iterations against a fixed language model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stage {
    pub lm: LmRef,
    pub iterations: usize,
    /// Smooth the lexical model with this α before the stage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smooth_alpha: Option<f64>,
    /// Prune every grapheme row to its top k phones before the stage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prune_k: Option<usize>,
    /// Lattice beam in nats; absent means exact.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beam: Option<f64>,
    /// Approximate forward beam applied while composing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_beam: Option<f64>,
    /// Smooth the lexical model with this α after the stage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smooth_after: Option<f64>,
}

impl Stage {
    pub fn new(lm: LmRef, iterations: usize) -> Self {
        Stage {
            lm,
            iterations,
            smooth_alpha: None,
            prune_k: None,
            beam: None,
            search_beam: None,
            smooth_after: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("stage {}: {msg}", self.lm)));
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        for a in [self.smooth_alpha, self.smooth_after].into_iter().flatten() {
            if !(a > 0.0 && a <= 1.0) {
                return bad(format!("smoothing alpha {a} outside (0, 1]"));
            }
        }
        if self.prune_k == Some(0) {
            return bad("prune_k must be at least 1".into());
        }
        for b in [self.beam, self.search_beam].into_iter().flatten() {
            if !(b > 0.0) {
                return bad(format!("beam {b} must be positive"));
            }
        }
        Ok(())
    }
}

/// Ordered training stages. Serialized as a JSON list of stage objects.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrainingSchedule {
    pub stages: Vec<Stage>,
}

/// Nats kept around the best path in the word stage.
pub const WORD_STAGE_BEAM: f64 = 10.0;

impl Default for TrainingSchedule {
    /// Character models of order 2 to 5 for ten iterations each, pruning to
    /// the top 10 phones after the bigram stage; then smoothing with α = 0.9,
    /// ten word-model iterations under a 10-nat beam, and smoothing again.
    fn default() -> Self {
        let mut stages: Vec<Stage> = (2..=5).map(|n| Stage::new(LmRef::Char(n), 10)).collect();
        stages[1].prune_k = Some(10);
        let mut word = Stage::new(LmRef::Word, 10);
        word.smooth_alpha = Some(0.9);
        word.beam = Some(WORD_STAGE_BEAM);
        word.search_beam = Some(WORD_STAGE_BEAM);
        word.smooth_after = Some(0.9);
        stages.push(word);
        TrainingSchedule { stages }
    }
}

impl TrainingSchedule {
    /// Only the character stages of the default schedule, with `iterations`
    /// per stage.
    pub fn char_only(orders: impl IntoIterator<Item = usize>, iterations: usize, prune_k: Option<usize>) -> Self {
        let mut stages: Vec<Stage> = orders
            .into_iter()
            .map(|n| Stage::new(LmRef::Char(n), iterations))
            .collect();
        if let Some(s) = stages.get_mut(1) {
            s.prune_k = prune_k;
        }
        TrainingSchedule { stages }
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::Config("schedule has no stages".into()));
        }
        self.stages.iter().try_for_each(Stage::validate)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: TrainingSchedule = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Language models the schedule refers to, without repeats.
    pub fn lm_refs(&self) -> Vec<LmRef> {
        let mut v: Vec<LmRef> = self.stages.iter().map(|s| s.lm).collect();
        v.sort();
        v.dedup();
        v
    }
}
