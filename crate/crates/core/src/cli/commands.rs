//! The five pipeline commands. Each reads and checks all of its inputs
//! before writing anything, so a validation run is the same call with
//! writing switched off.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tracing::info;

use crate::decipher::{
    graphemes_to_text, init_lexical, read_lexical, train_with, write_lexical,
    LanguageModel, LmRef, LmSet, TrainingSchedule,
};
use crate::error::{Error, Result};
use crate::eval::{char_tokens, corpus_error_rate, oracle_error_rate, summary_table, ErrorReport, Unit};
use crate::fst::io::write_fst;
use crate::fst::semiring::LogWeight;
use crate::fst::symbols::{SymbolTable, Symbols};
use crate::ngram::{
    perplexity, read_lm, train_char_lm, train_word_lm, write_lm, GraphemeLexicon, UNKNOWN_WORD,
    WORD_BOUNDARY,
};
use crate::synth::{build_task, build_task_from_text, PronunciationTable};

use super::config::{files, ExperimentConfig};
use super::pipeline::{decode_all, phone_labels};

/// Pipeline step selected on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Synth,
    Lm,
    Train,
    Decode,
    Eval,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Synth => "synth",
            Command::Lm => "lm",
            Command::Train => "train",
            Command::Decode => "decode",
            Command::Eval => "eval",
        }
    }
}

/// Where a command's outputs go: files collected in memory, then written
/// together unless validating.
struct Outputs {
    root: PathBuf,
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    fn new(root: &Path) -> Self {
        Outputs {
            root: root.to_path_buf(),
            files: Vec::new(),
        }
    }

    fn add(&mut self, path: PathBuf, bytes: impl Into<Vec<u8>>) {
        self.files.push((path, bytes.into()));
    }

    fn commit(self) -> Result<BTreeMap<String, String>> {
        let mut hashes = BTreeMap::new();
        for (path, bytes) in self.files {
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir)?;
            }
            fs::write(&path, &bytes)?;
            let key = path
                .strip_prefix(&self.root)
                .unwrap_or(&path)
                .to_string_lossy()
                .into_owned();
            hashes.insert(key, hex::encode(Sha256::digest(&bytes)));
        }
        Ok(hashes)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub steps: BTreeMap<String, StepRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub config_sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// SHA-256 of every file written, keyed by path relative to the
    /// experiment directory.
    pub outputs: BTreeMap<String, String>,
}

pub fn read_manifest(dir: &Path) -> Result<Option<Manifest>> {
    let path = dir.join(files::MANIFEST);
    if !path.exists() {
        return Ok(None);
    }
    Ok(Some(serde_json::from_str(&fs::read_to_string(path)?)?))
}

fn update_manifest(cfg: &ExperimentConfig, cmd: Command, outputs: BTreeMap<String, String>) -> Result<()> {
    let mut m = read_manifest(&cfg.output_dir)?.unwrap_or_default();
    m.tool = env!("CARGO_PKG_NAME").to_string();
    m.version = env!("CARGO_PKG_VERSION").to_string();
    m.steps.insert(
        cmd.name().to_string(),
        StepRecord {
            config_sha256: cfg.hash()?,
            seed: cfg.seed,
            outputs,
        },
    );
    fs::create_dir_all(&cfg.output_dir)?;
    fs::write(cfg.out(files::MANIFEST), serde_json::to_string_pretty(&m)? + "\n")?;
    Ok(())
}

/// Runs `cmd`. With `validate`, every input is read and checked but nothing
/// is written.
pub fn run_command(cfg: &ExperimentConfig, cmd: Command, validate: bool) -> Result<()> {
    cfg.validate()?;
    let mut out = Outputs::new(&cfg.output_dir);
    match cmd {
        Command::Synth => synth(cfg, &mut out)?,
        Command::Lm => lm(cfg, &mut out)?,
        Command::Train => train(cfg, &mut out)?,
        Command::Decode => decode(cfg, &mut out)?,
        Command::Eval => eval(cfg, &mut out)?,
    }
    if validate {
        info!(cmd = cmd.name(), files = out.files.len(), "validation passed");
        return Ok(());
    }
    let hashes = out.commit()?;
    update_manifest(cfg, cmd, hashes)?;
    info!(cmd = cmd.name(), dir = %cfg.output_dir.display(), "done");
    Ok(())
}

fn read_input(path: &Path, what: &str) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("{what} {}: {e}", path.display())))
}

fn read_lines(path: &Path, what: &str) -> Result<Vec<String>> {
    Ok(read_input(path, what)?.lines().map(str::to_string).collect())
}

fn lines_text<S: AsRef<str>>(lines: &[S]) -> String {
    let mut s = String::new();
    for l in lines {
        s.push_str(l.as_ref());
        s.push('\n');
    }
    s
}

fn phone_text(corpus: &[Vec<String>]) -> String {
    lines_text(&corpus.iter().map(|u| u.join(" ")).collect::<Vec<_>>())
}

fn read_phone_corpus(path: &Path) -> Result<Vec<Vec<String>>> {
    let corpus: Vec<Vec<String>> = read_lines(path, "phone corpus")?
        .iter()
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect();
    if corpus.is_empty() {
        return Err(Error::Config(format!("phone corpus {} is empty", path.display())));
    }
    Ok(corpus)
}

fn synth(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let seed = cfg
        .seed
        .ok_or_else(|| Error::Config("synth needs a seed (config \"seed\" or --seed)".into()))?;
    let task_cfg = cfg.synth.task(seed);
    let task = match &cfg.paths.source_text {
        Some(p) => build_task_from_text(&task_cfg, &read_lines(p, "source text")?)?,
        None => build_task(&task_cfg)?,
    };
    info!(
        cmd = "synth",
        seed,
        lm_sentences = task.lm_text.len(),
        train_utterances = task.train_phones.len(),
        heldout = task.heldout_phones.len(),
        "task generated"
    );
    out.add(cfg.out(files::TABLE), task.table.to_tsv());
    out.add(cfg.out(files::LM_TEXT), lines_text(&task.lm_text));
    out.add(cfg.out(files::TRAIN_TEXT), lines_text(&task.train_text));
    out.add(cfg.out(files::TRAIN_PHONES), phone_text(&task.train_phones));
    out.add(cfg.out(files::HELDOUT_TEXT), lines_text(&task.heldout_text));
    out.add(cfg.out(files::HELDOUT_PHONES), phone_text(&task.heldout_phones));
    Ok(())
}

/// Models the schedule and the decoder need.
fn needed_lms(cfg: &ExperimentConfig, schedule: &TrainingSchedule) -> BTreeSet<LmRef> {
    let mut refs: BTreeSet<LmRef> = schedule.lm_refs().into_iter().collect();
    refs.extend(cfg.lm.char_orders.iter().map(|&n| LmRef::Char(n)));
    refs.extend(cfg.decode.lm);
    refs
}

fn lm(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let schedule = cfg.schedule()?;
    let text = read_lines(&cfg.lm_text(), "language-model text")?;
    let heldout = cfg.reference();
    let heldout = if heldout.is_file() { Some(read_lines(&heldout, "held-out text")?) } else { None };
    let dir = cfg.models_dir();
    let base = train_char_lm(&text, 1)?;
    out.add(dir.join(files::GRAPHEMES), base.symbols().to_text());
    // The compiled files are produced by the store writer into a scratch
    // directory and then staged like every other output.
    let scratch = tempfile::tempdir()?;
    for r in needed_lms(cfg, &schedule) {
        let model = match r {
            LmRef::Char(n) => train_char_lm(&text, n)?,
            LmRef::Word => train_word_lm(&text, cfg.lm.word_order, cfg.lm.vocab_limit)?,
        };
        let ppl = heldout.as_ref().map(|h| perplexity(&model, h));
        let name = r.to_string();
        let meta = write_lm::<LogWeight>(&model, &scratch.path().join(&name), ppl)?;
        info!(
            cmd = "lm",
            model = %name,
            states = meta.num_states,
            arcs = meta.num_arcs,
            heldout_perplexity = ppl,
            "language model built"
        );
        for ext in ["fst", "isyms", "osyms", "json"] {
            let file = format!("{name}.{ext}");
            out.add(dir.join(&file), fs::read(scratch.path().join(&file))?);
        }
    }
    Ok(())
}

fn read_graphemes(dir: &Path) -> Result<Symbols> {
    let path = dir.join(files::GRAPHEMES);
    Ok(SymbolTable::parse_text(&read_input(&path, "grapheme table")?)?.into_shared())
}

fn load_lm(dir: &Path, r: LmRef, graphemes: &Symbols) -> Result<LanguageModel> {
    let stem = dir.join(r.to_string());
    if !stem.with_extension("json").is_file() {
        return Err(Error::Config(format!(
            "language model {r} missing from {} (run the lm command)",
            dir.display()
        )));
    }
    let (_, g) = read_lm::<LogWeight>(&stem)?;
    match r {
        LmRef::Char(_) => LanguageModel::char(&g),
        LmRef::Word => {
            let lex = GraphemeLexicon::from_word_table(g.isyms(), &[UNKNOWN_WORD]);
            LanguageModel::word(&g, lex, graphemes)
        }
    }
}

/// Phone inventory and silence phones: from the pronunciation table when
/// present, otherwise from the corpus plus the configured silence phones.
fn phone_inventory(cfg: &ExperimentConfig, corpus: &[Vec<String>]) -> Result<(Symbols, Vec<String>)> {
    let table_path = cfg.phone_table();
    if table_path.is_file() {
        let table = PronunciationTable::from_tsv(&read_input(&table_path, "phone table")?)?;
        return Ok((
            SymbolTable::from_symbols(table.phones()).into_shared(),
            vec![table.silence().to_string()],
        ));
    }
    if cfg.paths.phone_table.is_some() {
        return Err(Error::Config(format!("phone table {} does not exist", table_path.display())));
    }
    let mut set: BTreeSet<String> = corpus.iter().flatten().cloned().collect();
    set.extend(cfg.train.silence.iter().cloned());
    Ok((SymbolTable::from_symbols(set).into_shared(), cfg.train.silence.clone()))
}

fn train(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let schedule = cfg.schedule()?;
    schedule.validate()?;
    let corpus = read_phone_corpus(&cfg.train_phones())?;
    let (phones, silence) = phone_inventory(cfg, &corpus)?;
    let labels = phone_labels(&phones, &corpus)?;
    let dir = cfg.models_dir();
    let graphemes = read_graphemes(&dir)?;
    let mut lms = LmSet::new();
    for r in schedule.lm_refs() {
        lms.insert(r, load_lm(&dir, r, &graphemes)?)?;
    }
    let silence: Vec<&str> = silence.iter().map(String::as_str).collect();
    let lex0 = init_lexical(phones, graphemes, &silence, WORD_BOUNDARY)?;
    let mut log = String::new();
    let trained = train_with(
        &lex0,
        &cfg.train.alignment,
        &schedule,
        &labels,
        &lms,
        cfg.train.route,
        |rec, _| {
            info!(
                cmd = "train",
                stage = rec.stage,
                lm = %rec.lm,
                iter = rec.iter,
                loglik = rec.loglik,
                active_params = rec.active_params,
                skipped = rec.skipped,
                "iteration"
            );
            log.push_str(&serde_json::to_string(rec).expect("plain record"));
            log.push('\n');
        },
    )?;
    let scratch = tempfile::tempdir()?;
    let stem = scratch.path().join(files::LEXICAL);
    write_lexical(&trained.model, &stem)?;
    for ext in ["tsv", "json"] {
        let file = format!("{}.{ext}", files::LEXICAL);
        out.add(dir.join(&file), fs::read(scratch.path().join(&file))?);
    }
    out.add(cfg.out(files::TRAIN_LOG), log);
    Ok(())
}

fn decode_lm(cfg: &ExperimentConfig) -> Result<LmRef> {
    match cfg.decode.lm {
        Some(r) => Ok(r),
        None => cfg
            .schedule()?
            .stages
            .last()
            .map(|s| s.lm)
            .ok_or_else(|| Error::Config("schedule has no stages".into())),
    }
}

fn lattice_stem(dir: &Path, i: usize) -> PathBuf {
    dir.join(format!("utt-{:05}", i + 1))
}

fn decode(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let dir = cfg.models_dir();
    let lex = read_lexical(&dir.join(files::LEXICAL))?;
    let r = decode_lm(cfg)?;
    let lm = load_lm(&dir, r, lex.graphemes())?;
    let corpus = read_phone_corpus(&cfg.decode_phones())?;
    let labels = phone_labels(lex.phones(), &corpus)?;
    let opts = cfg.decode.options();
    let results = decode_all(&lex, &cfg.train.alignment, &lm, &labels, &opts)?;
    let mut hyps = Vec::with_capacity(results.len());
    let mut empty = 0;
    let scratch = tempfile::tempdir()?;
    for (i, res) in results.iter().enumerate() {
        match res {
            Some(res) => {
                hyps.push(graphemes_to_text(lex.graphemes(), &res.graphemes, lex.boundary()));
                if let Some(lat) = &res.lattice {
                    let stem = lattice_stem(scratch.path(), i);
                    write_fst(lat, &stem)?;
                    for ext in ["fst", "isyms", "osyms"] {
                        let file = stem.with_extension(ext);
                        let name = file.file_name().expect("file name").to_owned();
                        out.add(cfg.out(files::LATTICES).join(name), fs::read(&file)?);
                    }
                }
            }
            None => {
                empty += 1;
                hyps.push(String::new());
            }
        }
    }
    info!(cmd = "decode", lm = %r, utterances = hyps.len(), empty, "decoded");
    out.add(cfg.out(files::HYPOTHESES), lines_text(&hyps));
    Ok(())
}

/// Named reports as written to `eval.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub reports: BTreeMap<String, ErrorReport>,
}

fn eval(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let refs = read_lines(&cfg.reference(), "reference text")?;
    let hyps = read_lines(&cfg.out(files::HYPOTHESES), "hypotheses")?;
    let mut reports = BTreeMap::new();
    reports.insert("wer".to_string(), corpus_error_rate(&refs, &hyps, Unit::Word)?);
    reports.insert("cer".to_string(), corpus_error_rate(&refs, &hyps, Unit::Char)?);
    let lat_dir = cfg.out(files::LATTICES);
    if cfg.decode.emit_lattice && lat_dir.is_dir() {
        let mut total = None::<ErrorReport>;
        for (i, r) in refs.iter().enumerate() {
            let stem = lattice_stem(&lat_dir, i);
            let words: Vec<&str> = r.split_whitespace().collect();
            let rep = if stem.with_extension("fst").is_file() {
                let lat = crate::fst::io::read_fst::<crate::fst::semiring::TropicalWeight>(&stem)?;
                if lat.osyms().get(WORD_BOUNDARY).is_some() {
                    oracle_error_rate(&lat, &char_tokens(&words), Unit::Char)?
                } else {
                    oracle_error_rate(&lat, &words, Unit::Word)?
                }
            } else {
                let n = char_tokens(&words).len();
                ErrorReport::new(Unit::Char, 0, 0, n, n)
            };
            total = Some(match total {
                Some(t) if t.unit == rep.unit => t.merge(&rep),
                Some(_) => return Err(Error::Config("lattices mix character and word outputs".into())),
                None => rep,
            });
        }
        if let Some(t) = total {
            let key = if t.unit == Unit::Word { "oracle_wer" } else { "oracle_cer" };
            reports.insert(key.to_string(), t);
        }
    }
    let rows: Vec<(String, ErrorReport)> = reports.iter().map(|(k, v)| (k.clone(), *v)).collect();
    print!("{}", summary_table(&rows));
    for (k, v) in &reports {
        info!(cmd = "eval", report = %k, rate = v.rate, errors = v.errors(), n = v.reference_len, "scored");
    }
    let report = EvalReport { reports };
    out.add(cfg.out(files::EVAL), serde_json::to_string_pretty(&report)? + "\n");
    Ok(())
}
