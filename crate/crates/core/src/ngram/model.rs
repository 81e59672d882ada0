//! Witten–Bell backoff n-gram models.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fst::symbols::{Label, SymbolTable, Symbols};

pub const WORD_BOUNDARY: &str = "<wb>";
pub const UNKNOWN_WORD: &str = "<unk>";
pub const MAX_ORDER: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenKind {
    Grapheme,
    Word,
}

/// Per-history parameters: interpolated probabilities of the tokens seen
/// after the history, and the weight applied to the lower-order model for
/// everything else.
#[derive(Clone, Debug, Default)]
pub(crate) struct Context {
    pub probs: BTreeMap<Label, f64>,
    pub counts: BTreeMap<Label, u64>,
    pub backoff: f64,
}

/// A backoff n-gram model.
///
/// Token labels `1..=V` come from [`NGramLm::symbols`]. Sentence end and
/// sentence start get the private labels `V + 1` and `V + 2`; the end label is
/// predicted like any token, the start label only appears in histories.
#[derive(Clone, Debug)]
pub struct NGramLm {
    order: usize,
    kind: TokenKind,
    symbols: Symbols,
    unigram: Vec<f64>,
    unigram_counts: Vec<u64>,
    contexts: HashMap<Vec<Label>, Context>,
}

/// Lowercases and collapses whitespace.
pub fn normalize_line(line: &str) -> String {
    line.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Splits a normalized line into grapheme tokens, spaces becoming `<wb>`.
pub fn graphemes_of(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    for (i, word) in line.split(' ').filter(|w| !w.is_empty()).enumerate() {
        if i > 0 {
            out.push(WORD_BOUNDARY.to_string());
        }
        out.extend(word.chars().map(String::from));
    }
    out
}

fn check_order(order: usize) -> Result<()> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(Error::Config(format!(
            "n-gram order must be in 1..={MAX_ORDER}, got {order}"
        )));
    }
    Ok(())
}

fn tokenized_corpus<S: AsRef<str>>(corpus: &[S]) -> Result<Vec<String>> {
    let lines: Vec<String> = corpus
        .iter()
        .map(|l| normalize_line(l.as_ref()))
        .filter(|l| !l.is_empty())
        .collect();
    if lines.is_empty() {
        return Err(Error::Config("corpus is empty".into()));
    }
    Ok(lines)
}

/// Trains a character model. Spaces become the `<wb>` token.
pub fn train_char_lm<S: AsRef<str>>(corpus: &[S], order: usize) -> Result<NGramLm> {
    check_order(order)?;
    let lines = tokenized_corpus(corpus)?;
    let sentences: Vec<Vec<String>> = lines.iter().map(|l| graphemes_of(l)).collect();
    let mut alphabet: Vec<&str> = sentences
        .iter()
        .flatten()
        .map(String::as_str)
        .filter(|t| *t != WORD_BOUNDARY)
        .collect();
    alphabet.sort_unstable();
    alphabet.dedup();
    let symbols = SymbolTable::from_symbols(std::iter::once(WORD_BOUNDARY).chain(alphabet));
    NGramLm::estimate(order, TokenKind::Grapheme, symbols.into_shared(), &sentences)
}

/// Trains a word model over the `vocab_limit` most frequent words (ties broken
/// lexicographically); other words map to `<unk>`.
pub fn train_word_lm<S: AsRef<str>>(corpus: &[S], order: usize, vocab_limit: usize) -> Result<NGramLm> {
    check_order(order)?;
    if vocab_limit == 0 {
        return Err(Error::Config("vocab_limit must be at least 1".into()));
    }
    let lines = tokenized_corpus(corpus)?;
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for l in &lines {
        for w in l.split(' ') {
            *freq.entry(w).or_default() += 1;
        }
    }
    let mut ranked: Vec<(&str, u64)> = freq.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    ranked.truncate(vocab_limit);
    let mut vocab: Vec<&str> = ranked.into_iter().map(|(w, _)| w).collect();
    vocab.sort_unstable();
    let symbols = SymbolTable::from_symbols(vocab.iter().copied().chain([UNKNOWN_WORD]));
    let sentences: Vec<Vec<String>> = lines
        .iter()
        .map(|l| {
            l.split(' ')
                .map(|w| {
                    if symbols.get(w).is_some() {
                        w.to_string()
                    } else {
                        UNKNOWN_WORD.to_string()
                    }
                })
                .collect()
        })
        .collect();
    NGramLm::estimate(order, TokenKind::Word, symbols.into_shared(), &sentences)
}

impl NGramLm {
    fn estimate(order: usize, kind: TokenKind, symbols: Symbols, sentences: &[Vec<String>]) -> Result<Self> {
        let v = symbols.len() - 1;
        let eos = v as Label + 1;
        let bos = v as Label + 2;

        let mut unigram_counts = vec![0u64; v + 2];
        let mut counts: HashMap<Vec<Label>, BTreeMap<Label, u64>> = HashMap::new();
        for sent in sentences {
            let mut seq = Vec::with_capacity(sent.len() + 2);
            seq.push(bos);
            for t in sent {
                seq.push(symbols.get(t).ok_or_else(|| {
                    Error::InvalidModel(format!("token {t:?} missing from alphabet"))
                })?);
            }
            seq.push(eos);
            for i in 1..seq.len() {
                let y = seq[i];
                unigram_counts[y as usize] += 1;
                for k in 1..order.min(i + 1) {
                    let h = seq[i - k..i].to_vec();
                    *counts.entry(h).or_default().entry(y).or_default() += 1;
                }
            }
        }

        // Unigram: Witten–Bell interpolation with a uniform floor over V ∪ {</s>}.
        let predicted = v + 1;
        let n: u64 = unigram_counts.iter().sum();
        let distinct = unigram_counts.iter().filter(|&&c| c > 0).count() as f64;
        let floor = 1.0 / predicted as f64;
        let mut unigram = vec![0.0; v + 2];
        for y in 1..=eos as usize {
            unigram[y] = (unigram_counts[y] as f64 + distinct * floor) / (n as f64 + distinct);
        }

        let mut lm = NGramLm {
            order,
            kind,
            symbols,
            unigram,
            unigram_counts,
            contexts: HashMap::new(),
        };

        // Estimate shorter histories first so lower-order probabilities exist.
        let mut histories: Vec<Vec<Label>> = counts.keys().cloned().collect();
        histories.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        for h in histories {
            let seen = &counts[&h];
            let total: u64 = seen.values().sum();
            let types = seen.len() as f64;
            let denom = total as f64 + types;
            let mut probs = BTreeMap::new();
            for (&y, &c) in seen {
                let lower = lm.prob(&h[1..], y);
                probs.insert(y, (c as f64 + types * lower) / denom);
            }
            let ctx = Context {
                probs,
                counts: seen.clone(),
                backoff: types / denom,
            };
            lm.contexts.insert(h, ctx);
        }
        Ok(lm)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn kind(&self) -> TokenKind {
        self.kind
    }

    pub fn symbols(&self) -> &Symbols {
        &self.symbols
    }

    /// Label used for sentence end in histories and predictions.
    pub fn eos(&self) -> Label {
        self.symbols.len() as Label
    }

    /// Label used for sentence start in histories.
    pub fn bos(&self) -> Label {
        self.symbols.len() as Label + 1
    }

    pub(crate) fn unigram(&self, y: Label) -> f64 {
        self.unigram[y as usize]
    }

    pub(crate) fn context(&self, h: &[Label]) -> Option<&Context> {
        self.contexts.get(h)
    }

    pub(crate) fn histories(&self) -> impl Iterator<Item = &Vec<Label>> {
        self.contexts.keys()
    }

    /// Probability mass the unigram level gives a token outside the alphabet.
    pub fn floor_prob(&self) -> f64 {
        let n: u64 = self.unigram_counts.iter().sum();
        let distinct = self.unigram_counts.iter().filter(|&&c| c > 0).count() as f64;
        let predicted = self.symbols.len() as f64; // V tokens plus </s>
        distinct / predicted / (n as f64 + distinct)
    }

    /// `P(y | h)` following the backoff recursion. Histories longer than
    /// `order - 1` are truncated; unknown histories back off with weight 1.
    pub fn prob(&self, h: &[Label], y: Label) -> f64 {
        let keep = h.len().min(self.order - 1);
        let h = &h[h.len() - keep..];
        if h.is_empty() {
            return self.unigram[y as usize];
        }
        match self.contexts.get(h) {
            Some(ctx) => match ctx.probs.get(&y) {
                Some(&p) => p,
                None => ctx.backoff * self.prob(&h[1..], y),
            },
            None => self.prob(&h[1..], y),
        }
    }

    /// Maximum-likelihood `c(h y) / c(h)` before smoothing; `None` for an
    /// unseen history.
    pub fn raw_prob(&self, h: &[Label], y: Label) -> Option<f64> {
        if h.is_empty() {
            let n: u64 = self.unigram_counts.iter().sum();
            return Some(self.unigram_counts[y as usize] as f64 / n as f64);
        }
        let ctx = self.contexts.get(h)?;
        let total: u64 = ctx.counts.values().sum();
        Some(*ctx.counts.get(&y).unwrap_or(&0) as f64 / total as f64)
    }

    /// Natural-log probability of a token sentence, including sentence end.
    pub fn sentence_logprob(&self, tokens: &[Label]) -> f64 {
        let mut h = vec![self.bos()];
        let mut lp = 0.0;
        for &y in tokens.iter().chain(std::iter::once(&self.eos())) {
            lp += self.prob(&h, y).ln();
            h.push(y);
            if h.len() >= self.order {
                h.remove(0);
            }
        }
        lp
    }

    /// Tokens of a normalized line in this model's alphabet, or `None` where a
    /// token is outside it (words map to `<unk>` instead).
    pub fn tokenize(&self, line: &str) -> Vec<Option<Label>> {
        let line = normalize_line(line);
        match self.kind {
            TokenKind::Grapheme => graphemes_of(&line)
                .iter()
                .map(|t| self.symbols.get(t))
                .collect(),
            TokenKind::Word => line
                .split(' ')
                .filter(|w| !w.is_empty())
                .map(|w| self.symbols.get(w).or_else(|| self.symbols.get(UNKNOWN_WORD)))
                .collect(),
        }
    }
}

/// `exp(-(1/N) Σ log P)` over all tokens and sentence ends of `text`.
/// Tokens outside the alphabet receive [`NGramLm::floor_prob`] and reset the
/// history.
pub fn perplexity<S: AsRef<str>>(lm: &NGramLm, text: &[S]) -> f64 {
    let mut lp = 0.0;
    let mut n = 0usize;
    for line in text {
        let tokens = lm.tokenize(line.as_ref());
        if tokens.is_empty() {
            continue;
        }
        let mut h = vec![lm.bos()];
        for t in tokens.into_iter().map(Some).chain(std::iter::once(None)) {
            let p = match t {
                Some(Some(y)) => {
                    let p = lm.prob(&h, y);
                    h.push(y);
                    p
                }
                Some(None) => {
                    h.clear();
                    lm.floor_prob()
                }
                None => lm.prob(&h, lm.eos()),
            };
            lp += p.ln();
            n += 1;
            if h.len() >= lm.order() {
                h.remove(0);
            }
        }
    }
    if n == 0 {
        return f64::NAN;
    }
    (-lp / n as f64).exp()
}
