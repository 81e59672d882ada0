use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ngram::{graphemes_of, normalize_line};

use super::table::PronunciationTable;

/// Independent per-phone corruption. Silence phones are never touched.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelNoise {
    pub sub_rate: f64,
    pub del_rate: f64,
    pub ins_rate: f64,
    /// Substitution targets per phone with relative weights; phones not
    /// listed are replaced uniformly.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub confusion: BTreeMap<String, Vec<(String, f64)>>,
    pub seed: u64,
}

impl ChannelNoise {
    pub fn none(seed: u64) -> Self {
        Self::uniform(0.0, seed)
    }

    /// Total rate `rate`, split 60/20/20 between substitutions, deletions and
    /// insertions.
    pub fn uniform(rate: f64, seed: u64) -> Self {
        ChannelNoise {
            sub_rate: 0.6 * rate,
            del_rate: 0.2 * rate,
            ins_rate: 0.2 * rate,
            confusion: BTreeMap::new(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [self.sub_rate, self.del_rate, self.ins_rate];
        if rates.iter().any(|r| !(0.0..1.0).contains(r)) || rates.iter().sum::<f64>() >= 1.0 {
            return Err(Error::Config(format!(
                "noise rates must lie in [0, 1) and sum below 1, got {rates:?}"
            )));
        }
        Ok(())
    }
}

/// Phone sequences with the grapheme sequences they were generated from.
#[derive(Clone, Debug, PartialEq)]
pub struct Cipher {
    pub phones: Vec<Vec<String>>,
    /// Grapheme tokens, `<wb>` between words.
    pub references: Vec<Vec<String>>,
}

struct Sampler<'a> {
    speech: Vec<&'a str>,
    uniform: rand::distributions::Uniform<usize>,
    confusion: BTreeMap<&'a str, (Vec<&'a str>, WeightedIndex<f64>)>,
}

impl<'a> Sampler<'a> {
    fn new(speech: Vec<&'a str>, noise: &'a ChannelNoise) -> Result<Self> {
        let mut confusion = BTreeMap::new();
        for (from, targets) in &noise.confusion {
            let w: Vec<f64> = targets.iter().map(|t| t.1).collect();
            let dist = WeightedIndex::new(&w)
                .map_err(|e| Error::Config(format!("confusion row {from:?}: {e}")))?;
            confusion.insert(from.as_str(), (targets.iter().map(|t| t.0.as_str()).collect(), dist));
        }
        Ok(Sampler {
            uniform: rand::distributions::Uniform::new(0, speech.len()),
            speech,
            confusion,
        })
    }

    fn any(&self, rng: &mut ChaCha8Rng) -> &'a str {
        self.speech[self.uniform.sample(rng)]
    }

    fn replace(&self, p: &str, rng: &mut ChaCha8Rng) -> &'a str {
        if let Some((targets, dist)) = self.confusion.get(p) {
            return targets[dist.sample(rng)];
        }
        if self.speech.len() < 2 {
            return self.speech[0];
        }
        loop {
            let q = self.any(rng);
            if q != p {
                return q;
            }
        }
    }
}

/// Pronounces each line through `table`, separating words by the silence
/// phone with probability `silence_prob`, then corrupts the speech phones.
///
/// Line `i` draws from its own random stream, so results do not depend on
/// how lines are batched.
pub fn gen_cipher<S: AsRef<str>>(
    text: &[S],
    table: &PronunciationTable,
    noise: &ChannelNoise,
    silence_prob: f64,
) -> Result<Cipher> {
    noise.validate()?;
    if !(0.0..=1.0).contains(&silence_prob) {
        return Err(Error::Config(format!("silence probability {silence_prob} outside [0, 1]")));
    }
    let all = table.phones();
    let speech: Vec<&str> = all.iter().map(String::as_str).filter(|p| *p != table.silence()).collect();
    if speech.is_empty() {
        return Err(Error::Config("pronunciation table has no speech phones".into()));
    }
    let sampler = Sampler::new(speech, noise)?;
    let max_key = table.max_key_chars();

    let mut cipher = Cipher {
        phones: Vec::with_capacity(text.len()),
        references: Vec::with_capacity(text.len()),
    };
    for (li, line) in text.iter().enumerate() {
        let line = normalize_line(line.as_ref());
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        rng.set_stream(li as u64);
        let mut clean: Vec<&str> = Vec::new();
        for (wi, word) in line.split(' ').filter(|w| !w.is_empty()).enumerate() {
            if wi > 0 && rng.gen_bool(silence_prob) {
                clean.push(table.silence());
            }
            let chars: Vec<char> = word.chars().collect();
            let mut i = 0;
            while i < chars.len() {
                let (len, variants) = (1..=max_key.min(chars.len() - i))
                    .rev()
                    .find_map(|l| {
                        let key: String = chars[i..i + l].iter().collect();
                        table.get(&key).map(|v| (l, v))
                    })
                    .ok_or_else(|| {
                        Error::Config(format!("character {:?} (line {}) not covered by the table", chars[i], li + 1))
                    })?;
                let pick = if variants.len() == 1 {
                    0
                } else {
                    let w: Vec<f64> = variants.iter().map(|v| v.1).collect();
                    WeightedIndex::new(&w).expect("validated weights").sample(&mut rng)
                };
                clean.extend(variants[pick].0.iter().map(String::as_str));
                i += len;
            }
        }
        let mut noisy: Vec<String> = Vec::with_capacity(clean.len());
        for p in clean {
            if p == table.silence() {
                noisy.push(p.to_string());
                continue;
            }
            let u: f64 = rng.gen();
            if u >= noise.del_rate {
                let out = if u < noise.del_rate + noise.sub_rate { sampler.replace(p, &mut rng) } else { p };
                noisy.push(out.to_string());
            }
            if noise.ins_rate > 0.0 && rng.gen_bool(noise.ins_rate) {
                noisy.push(sampler.any(&mut rng).to_string());
            }
        }
        cipher.phones.push(noisy);
        cipher.references.push(graphemes_of(&line));
    }
    Ok(cipher)
}

/// Indices of the `n` shortest sequences, shortest first, ties in corpus
/// order.
pub fn select_shortest<T>(corpus: &[Vec<T>], n: usize) -> Result<Vec<usize>> {
    if n > corpus.len() {
        return Err(Error::Config(format!(
            "asked for {n} utterances from a corpus of {}",
            corpus.len()
        )));
    }
    let mut idx: Vec<usize> = (0..corpus.len()).collect();
    idx.sort_by_key(|&i| corpus[i].len());
    idx.truncate(n);
    Ok(idx)
}
