use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::fst::symbols::EPSILON_SYMBOL;
use crate::ngram::WORD_BOUNDARY;

/// Phone used for word boundaries by the built-in tables.
pub const SILENCE_PHONE: &str = "SIL";

const BASE_MAP: [(&str, &str); 26] = [
    ("a", "AE"), ("b", "B"), ("c", "K"), ("d", "D"), ("e", "EH"), ("f", "F"), ("g", "G"),
    ("h", "HH"), ("i", "IH"), ("j", "JH"), ("k", "KH"), ("l", "L"), ("m", "M"), ("n", "N"),
    ("o", "AA"), ("p", "P"), ("q", "KW"), ("r", "R"), ("s", "S"), ("t", "T"), ("u", "UH"),
    ("v", "V"), ("w", "W"), ("x", "KS"), ("y", "Y"), ("z", "Z"),
];

const VARIANTS: [(&str, &str, f64, &str, f64); 6] = [
    ("a", "AE", 0.7, "EY", 0.3),
    ("e", "EH", 0.6, "IY", 0.4),
    ("i", "IH", 0.7, "IY", 0.3),
    ("o", "AA", 0.6, "OW", 0.4),
    ("c", "K", 0.7, "S", 0.3),
    ("g", "G", 0.7, "JH", 0.3),
];

/// Phone sequences a grapheme (or grapheme pair) can be pronounced as.
#[derive(Clone, Debug, PartialEq)]
pub struct PronunciationTable {
    entries: BTreeMap<String, Vec<(Vec<String>, f64)>>,
    silence: String,
}

impl PronunciationTable {
    pub fn new(silence: &str) -> Self {
        PronunciationTable {
            entries: BTreeMap::new(),
            silence: silence.to_string(),
        }
    }

    /// One phone per letter, each letter its own phone.
    pub fn bijective() -> Self {
        let mut t = Self::new(SILENCE_PHONE);
        for (g, p) in BASE_MAP {
            t.insert(g, vec![(vec![p.to_string()], 1.0)]).expect("valid entry");
        }
        t
    }

    /// The bijective table with a second pronunciation for six letters, some
    /// shared with other letters.
    pub fn ambiguous() -> Self {
        let mut t = Self::bijective();
        for (g, p1, w1, p2, w2) in VARIANTS {
            t.insert(g, vec![(vec![p1.to_string()], w1), (vec![p2.to_string()], w2)])
                .expect("valid entry");
        }
        t
    }

    /// Adds or replaces the variants of `key`.
    pub fn insert(&mut self, key: &str, variants: Vec<(Vec<String>, f64)>) -> Result<()> {
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(Error::Config(format!("bad pronunciation key {key:?}")));
        }
        if variants.is_empty() {
            return Err(Error::Config(format!("{key:?} has no pronunciations")));
        }
        let mut sum = 0.0;
        for (phones, p) in &variants {
            if phones.len() > 2 {
                return Err(Error::Config(format!("{key:?} maps to more than two phones")));
            }
            if phones.iter().any(|ph| ph == &self.silence) {
                return Err(Error::Config(format!("{key:?} uses the silence phone")));
            }
            if !(*p > 0.0) {
                return Err(Error::Config(format!("{key:?} has a non-positive probability")));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("{key:?} probabilities sum to {sum}")));
        }
        self.entries.insert(key.to_string(), variants);
        Ok(())
    }

    pub fn silence(&self) -> &str {
        &self.silence
    }

    pub fn get(&self, key: &str) -> Option<&[(Vec<String>, f64)]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub(crate) fn max_key_chars(&self) -> usize {
        self.entries.keys().map(|k| k.chars().count()).max().unwrap_or(1)
    }

    /// All phones used, sorted, with the silence phone.
    pub fn phones(&self) -> Vec<String> {
        let mut set: BTreeSet<&str> = self
            .entries
            .values()
            .flatten()
            .flat_map(|(ph, _)| ph.iter().map(String::as_str))
            .collect();
        set.insert(&self.silence);
        set.into_iter().map(String::from).collect()
    }

    /// `grapheme<TAB>phones<TAB>prob` lines; an empty phone sequence is
    /// written as `<eps>` and the boundary row names the silence phone.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("{WORD_BOUNDARY}\t{}\t1\n", self.silence);
        for (k, vs) in &self.entries {
            for (ph, p) in vs {
                let phones = if ph.is_empty() { EPSILON_SYMBOL.to_string() } else { ph.join(" ") };
                out.push_str(&format!("{k}\t{phones}\t{p}\n"));
            }
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut silence = None;
        let mut grouped: BTreeMap<String, Vec<(Vec<String>, f64)>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 {
                return Err(Error::parse(i + 1, format!("expected 3 fields, got {}", f.len())));
            }
            let p: f64 = f[2]
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("bad probability {:?}", f[2])))?;
            if f[0] == WORD_BOUNDARY {
                silence = Some(f[1].to_string());
                continue;
            }
            let phones = if f[1] == EPSILON_SYMBOL {
                Vec::new()
            } else {
                f[1].split(' ').filter(|s| !s.is_empty()).map(String::from).collect()
            };
            grouped.entry(f[0].to_string()).or_default().push((phones, p));
        }
        let silence = silence.ok_or_else(|| Error::Config(format!("table has no {WORD_BOUNDARY} row")))?;
        let mut t = Self::new(&silence);
        for (k, v) in grouped {
            t.insert(&k, v)?;
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn built_in_sizes() {
        assert_eq!(PronunciationTable::bijective().phones().len(), 27);
        assert_eq!(PronunciationTable::ambiguous().phones().len(), 30);
    }

    #[test]
    fn tsv_round_trip() {
        let mut t = PronunciationTable::ambiguous();
        t.insert("th", vec![(vec!["DH".into()], 0.5), (vec!["T".into(), "HH".into()], 0.5)]).unwrap();
        t.insert("h", vec![(vec![], 0.25), (vec!["HH".into()], 0.75)]).unwrap();
        assert_eq!(PronunciationTable::from_tsv(&t.to_tsv()).unwrap(), t);
    }

    #[test]
    fn rejects_bad_rows() {
        let mut t = PronunciationTable::new("SIL");
        assert!(t.insert("a", vec![(vec!["A".into()], 0.5)]).is_err());
        assert!(t.insert("a", vec![(vec!["A".into(), "B".into(), "C".into()], 1.0)]).is_err());
        assert!(t.insert("a", vec![(vec!["SIL".into()], 1.0)]).is_err());
    }
}
