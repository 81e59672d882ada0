use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::words::WORDS;

/// Sentences of Zipf-distributed common English words.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TextGenerator {
    /// Word `r` (1-based rank) is drawn with weight `r^-s`.
    pub zipf_exponent: f64,
    pub min_words: usize,
    pub max_words: usize,
    /// Use only the most frequent `vocabulary` words.
    pub vocabulary: usize,
}

impl Default for TextGenerator {
    fn default() -> Self {
        TextGenerator {
            zipf_exponent: 1.0,
            min_words: 2,
            max_words: 14,
            vocabulary: WORDS.len(),
        }
    }
}

impl TextGenerator {
    pub fn validate(&self) -> Result<()> {
        if self.min_words == 0 || self.min_words > self.max_words {
            return Err(Error::Config(format!(
                "sentence length range {}..={} is invalid",
                self.min_words, self.max_words
            )));
        }
        if self.vocabulary == 0 || self.vocabulary > WORDS.len() {
            return Err(Error::Config(format!("vocabulary must be in 1..={}", WORDS.len())));
        }
        if !(self.zipf_exponent >= 0.0) {
            return Err(Error::Config("zipf exponent must be non-negative".into()));
        }
        Ok(())
    }

    /// `n` sentences, identical for identical seeds.
    pub fn generate(&self, n: usize, seed: u64) -> Result<Vec<String>> {
        self.validate()?;
        let weights: Vec<f64> = (1..=self.vocabulary)
            .map(|r| (r as f64).powf(-self.zipf_exponent))
            .collect();
        let dist = WeightedIndex::new(&weights).map_err(|e| Error::Config(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..n)
            .map(|_| {
                let len = rng.gen_range(self.min_words..=self.max_words);
                (0..len)
                    .map(|_| WORDS[dist.sample(&mut rng)])
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect())
    }
}

/// The embedded word list, most frequent first.
pub fn word_list() -> &'static [&'static str] {
    WORDS
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_in_range() {
        let g = TextGenerator::default();
        let a = g.generate(50, 7).unwrap();
        assert_eq!(a, g.generate(50, 7).unwrap());
        assert_ne!(a, g.generate(50, 8).unwrap());
        for s in &a {
            let n = s.split(' ').count();
            assert!((2..=14).contains(&n));
        }
    }

    #[test]
    fn frequent_words_dominate() {
        let text = TextGenerator::default().generate(500, 1).unwrap().join(" ");
        let count = |w: &str| text.split(' ').filter(|t| *t == w).count();
        assert!(count("the") > count("zone"));
    }
}
