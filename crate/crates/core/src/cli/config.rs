//! Experiment configuration files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::decipher::{AlignmentModel, EStepRoute, LmRef, TrainingSchedule};
use crate::error::{Error, Result};
use crate::synth::{TableKind, TaskConfig, TextGenerator, SILENCE_PHONE};

/// Everything one experiment directory is built from.
///
/// Relative paths are resolved against the directory holding the config
/// file. Inputs left unset default to the files earlier commands write into
/// `output_dir`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub paths: Paths,
    #[serde(default)]
    pub synth: SynthConfig,
    #[serde(default)]
    pub lm: LmConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub decode: DecodeConfig,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Plain text to encipher instead of generated sentences.
    pub source_text: Option<PathBuf>,
    /// Language-model training text.
    pub lm_text: Option<PathBuf>,
    /// Phone corpus to train on.
    pub train_phones: Option<PathBuf>,
    /// Pronunciation table whose phones form the phone inventory.
    pub phone_table: Option<PathBuf>,
    /// Phone corpus to decode.
    pub decode_phones: Option<PathBuf>,
    /// Reference transcripts of the decoded corpus.
    pub reference: Option<PathBuf>,
    /// Directory of compiled language models and the trained lexical model.
    pub models: Option<PathBuf>,
    /// Training schedule as a JSON list of stages.
    pub schedule: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Total per-phone corruption probability.
    pub rate: f64,
    /// Probability of pronouncing a space as the silence phone.
    pub silence_prob: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            rate: 0.0,
            silence_prob: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub table: TableKind,
    pub text: TextGenerator,
    pub lm_sentences: usize,
    pub cipher_sentences: usize,
    pub heldout_sentences: usize,
    pub train_utterances: usize,
    pub noise: NoiseConfig,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let t = TaskConfig::default();
        SynthConfig {
            table: t.table,
            text: t.text,
            lm_sentences: t.lm_sentences,
            cipher_sentences: t.cipher_sentences,
            heldout_sentences: t.heldout_sentences,
            train_utterances: t.train_utterances,
            noise: NoiseConfig {
                rate: t.noise_rate,
                silence_prob: t.silence_prob,
            },
        }
    }
}

impl SynthConfig {
    pub fn task(&self, seed: u64) -> TaskConfig {
        TaskConfig {
            seed,
            text: self.text.clone(),
            lm_sentences: self.lm_sentences,
            cipher_sentences: self.cipher_sentences,
            heldout_sentences: self.heldout_sentences,
            train_utterances: self.train_utterances,
            table: self.table,
            noise_rate: self.noise.rate,
            silence_prob: self.noise.silence_prob,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LmConfig {
    /// Character orders to build besides those the schedule names.
    pub char_orders: Vec<usize>,
    pub word_order: usize,
    pub vocab_limit: usize,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig {
            char_orders: Vec::new(),
            word_order: 3,
            vocab_limit: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub alignment: AlignmentModel,
    pub route: EStepRoute,
    /// Silence phones, used when no pronunciation table is available.
    pub silence: Vec<String>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            alignment: AlignmentModel::default(),
            route: EStepRoute::Auto,
            silence: vec![SILENCE_PHONE.to_string()],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecodeConfig {
    /// Model to decode with; the last stage's by default.
    pub lm: Option<LmRef>,
    pub beam: Option<f64>,
    pub search_beam: Option<f64>,
    /// Also write one lattice per utterance, for oracle scoring. Lattices
    /// are pruned to `beam`, or to [`DEFAULT_LATTICE_BEAM`] when it is unset.
    pub emit_lattice: bool,
}

/// Lattice pruning beam in nats used when lattices are written without an
/// explicit `beam`.
pub const DEFAULT_LATTICE_BEAM: f64 = 6.0;

impl DecodeConfig {
    pub fn options(&self) -> crate::decipher::DecodeOptions {
        let beam = match (self.beam, self.emit_lattice) {
            (None, true) => Some(DEFAULT_LATTICE_BEAM),
            (b, _) => b,
        };
        crate::decipher::DecodeOptions {
            beam,
            search_beam: self.search_beam,
            emit_lattice: self.emit_lattice,
        }
    }
}

impl ExperimentConfig {
    /// Reads a config and resolves its relative paths.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve(base);
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        let p = &mut self.paths;
        for path in [
            &mut p.source_text,
            &mut p.lm_text,
            &mut p.train_phones,
            &mut p.phone_table,
            &mut p.decode_phones,
            &mut p.reference,
            &mut p.models,
            &mut p.schedule,
        ]
        .into_iter()
        .flatten()
        {
            fix(path);
        }
    }

    /// Checks explicitly named inputs exist and the schedule parses.
    pub fn validate(&self) -> Result<()> {
        let p = &self.paths;
        for (name, path) in [
            ("source_text", &p.source_text),
            ("lm_text", &p.lm_text),
            ("train_phones", &p.train_phones),
            ("phone_table", &p.phone_table),
            ("decode_phones", &p.decode_phones),
            ("reference", &p.reference),
            ("schedule", &p.schedule),
        ] {
            if let Some(path) = path {
                if !path.is_file() {
                    return Err(Error::Config(format!("{name} {} does not exist", path.display())));
                }
            }
        }
        if let Some(m) = &p.models {
            if m.exists() && !m.is_dir() {
                return Err(Error::Config(format!("models path {} is not a directory", m.display())));
            }
        }
        self.train.alignment.validate()?;
        self.schedule()?;
        Ok(())
    }

    pub fn schedule(&self) -> Result<TrainingSchedule> {
        match &self.paths.schedule {
            Some(path) => TrainingSchedule::from_json(&fs::read_to_string(path)?),
            None => Ok(TrainingSchedule::default()),
        }
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> Result<String> {
        let bytes = serde_json::to_vec(self)?;
        Ok(hex::encode(Sha256::digest(&bytes)))
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }

    pub fn models_dir(&self) -> PathBuf {
        self.paths.models.clone().unwrap_or_else(|| self.out("models"))
    }

    pub fn lm_text(&self) -> PathBuf {
        self.paths.lm_text.clone().unwrap_or_else(|| self.out(files::LM_TEXT))
    }

    pub fn train_phones(&self) -> PathBuf {
        self.paths.train_phones.clone().unwrap_or_else(|| self.out(files::TRAIN_PHONES))
    }

    pub fn phone_table(&self) -> PathBuf {
        self.paths.phone_table.clone().unwrap_or_else(|| self.out(files::TABLE))
    }

    pub fn decode_phones(&self) -> PathBuf {
        self.paths.decode_phones.clone().unwrap_or_else(|| self.out(files::HELDOUT_PHONES))
    }

    pub fn reference(&self) -> PathBuf {
        self.paths.reference.clone().unwrap_or_else(|| self.out(files::HELDOUT_TEXT))
    }
}

/// Artifact file names inside an experiment directory.
pub mod files {
    pub const TABLE: &str = "table.tsv";
    pub const LM_TEXT: &str = "lm.txt";
    pub const TRAIN_TEXT: &str = "train.txt";
    pub const TRAIN_PHONES: &str = "train.phones";
    pub const HELDOUT_TEXT: &str = "heldout.txt";
    pub const HELDOUT_PHONES: &str = "heldout.phones";
    pub const GRAPHEMES: &str = "graphemes.syms";
    pub const LEXICAL: &str = "lexical";
    pub const TRAIN_LOG: &str = "train_log.jsonl";
    pub const HYPOTHESES: &str = "hypotheses.txt";
    pub const LATTICES: &str = "lattices";
    pub const EVAL: &str = "eval.json";
    pub const MANIFEST: &str = "manifest.json";
}
