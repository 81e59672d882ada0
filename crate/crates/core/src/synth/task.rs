//! End-to-end synthetic decipherment tasks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use crate::ngram::normalize_line;

use super::channel::{gen_cipher, select_shortest, ChannelNoise};
use super::table::PronunciationTable;
use super::text::TextGenerator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Bijective,
    Ambiguous,
}

impl TableKind {
    pub fn table(self) -> PronunciationTable {
        match self {
            TableKind::Bijective => PronunciationTable::bijective(),
            TableKind::Ambiguous => PronunciationTable::ambiguous(),
        }
    }
}

/// Sizes and channel settings of a generated task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    pub seed: u64,
    pub text: TextGenerator,
    /// Sentences used only for language-model training.
    pub lm_sentences: usize,
    /// Sentences enciphered to form the training pool.
    pub cipher_sentences: usize,
    /// Enciphered sentences kept for evaluation.
    pub heldout_sentences: usize,
    /// The shortest this many pool utterances form the training set.
    pub train_utterances: usize,
    pub table: TableKind,
    pub noise_rate: f64,
    pub silence_prob: f64,
}

impl Default for TaskConfig {
    fn default() -> Self {
        TaskConfig {
            seed: 0,
            text: TextGenerator::default(),
            lm_sentences: 2500,
            cipher_sentences: 800,
            heldout_sentences: 100,
            train_utterances: 200,
            table: TableKind::Bijective,
            noise_rate: 0.0,
            silence_prob: 1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticTask {
    pub table: PronunciationTable,
    pub lm_text: Vec<String>,
    pub train_text: Vec<String>,
    pub train_phones: Vec<Vec<String>>,
    pub heldout_text: Vec<String>,
    pub heldout_phones: Vec<Vec<String>>,
}

impl TaskConfig {
    pub fn total_sentences(&self) -> usize {
        self.lm_sentences + self.cipher_sentences + self.heldout_sentences
    }
}

/// Generates text, splits it into language-model, training-pool and held-out
/// parts, and enciphers the latter two.
pub fn build_task(cfg: &TaskConfig) -> Result<SyntheticTask> {
    let text = cfg.text.generate(cfg.total_sentences(), cfg.seed)?;
    build_task_from_text(cfg, &text)
}

/// Like [`build_task`], but over the first lines of `text` (normalized)
/// instead of generated sentences. Blank lines are skipped.
pub fn build_task_from_text<S: AsRef<str>>(cfg: &TaskConfig, text: &[S]) -> Result<SyntheticTask> {
    if cfg.train_utterances > cfg.cipher_sentences {
        return Err(Error::Config(format!(
            "train_utterances ({}) exceeds cipher_sentences ({})",
            cfg.train_utterances, cfg.cipher_sentences
        )));
    }
    let total = cfg.total_sentences();
    let text: Vec<String> = text
        .iter()
        .map(|l| normalize_line(l.as_ref()))
        .filter(|l| !l.is_empty())
        .take(total)
        .collect();
    if text.len() < total {
        return Err(Error::Config(format!(
            "task needs {total} nonempty lines of text, got {}",
            text.len()
        )));
    }
    let (lm_text, rest) = text.split_at(cfg.lm_sentences);
    let (pool, heldout) = rest.split_at(cfg.cipher_sentences);
    let table = cfg.table.table();
    let noise = ChannelNoise::uniform(cfg.noise_rate, cfg.seed.wrapping_add(1));
    let enc_pool = gen_cipher(pool, &table, &noise, cfg.silence_prob)?;
    let held_noise = ChannelNoise::uniform(cfg.noise_rate, cfg.seed.wrapping_add(2));
    let enc_held = gen_cipher(heldout, &table, &held_noise, cfg.silence_prob)?;
    let pick = select_shortest(&enc_pool.phones, cfg.train_utterances)?;
    Ok(SyntheticTask {
        table,
        lm_text: lm_text.to_vec(),
        train_text: pick.iter().map(|&i| pool[i].clone()).collect(),
        train_phones: pick.iter().map(|&i| enc_pool.phones[i].clone()).collect(),
        heldout_text: heldout.to_vec(),
        heldout_phones: enc_held.phones,
    })
}
