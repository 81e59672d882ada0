//! Word, character and phone error rates, including the best rate reachable
//! inside a lattice.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fst::compose::compose;
use crate::fst::semiring::{Semiring, TropicalWeight};
use crate::fst::shortest::shortest_path;
use crate::fst::symbols::{Label, SymbolTable, EPSILON};
use crate::fst::wfst::{Arc, Wfst};
use crate::ngram::WORD_BOUNDARY;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Word,
    Char,
    Phone,
}

/// Edit counts against a reference of length `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub unit: Unit,
    #[serde(rename = "S")]
    pub substitutions: usize,
    #[serde(rename = "I")]
    pub insertions: usize,
    #[serde(rename = "D")]
    pub deletions: usize,
    #[serde(rename = "N")]
    pub reference_len: usize,
    pub rate: f64,
}

impl ErrorReport {
    pub fn new(unit: Unit, s: usize, i: usize, d: usize, n: usize) -> Self {
        let errors = s + i + d;
        let rate = match (errors, n) {
            (0, _) => 0.0,
            (_, 0) => f64::INFINITY,
            (e, n) => e as f64 / n as f64,
        };
        ErrorReport {
            unit,
            substitutions: s,
            insertions: i,
            deletions: d,
            reference_len: n,
            rate,
        }
    }

    pub fn errors(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }

    /// Sums counts; both reports must use the same unit.
    pub fn merge(&self, other: &ErrorReport) -> ErrorReport {
        debug_assert_eq!(self.unit, other.unit);
        ErrorReport::new(
            self.unit,
            self.substitutions + other.substitutions,
            self.insertions + other.insertions,
            self.deletions + other.deletions,
            self.reference_len + other.reference_len,
        )
    }

    pub fn empty(unit: Unit) -> Self {
        ErrorReport::new(unit, 0, 0, 0, 0)
    }
}

/// Minimum-cost alignment counts `(S, I, D)` with unit costs. Among
/// alignments of equal cost the one with the most substitutions is chosen, so
/// swapping reference and hypothesis swaps `I` and `D`.
pub fn align_counts<T: PartialEq>(reference: &[T], hyp: &[T]) -> (usize, usize, usize) {
    // Cell: (cost, insertions + deletions, S, I, D); compared on the first two.
    type Cell = (usize, usize, usize, usize, usize);
    let m = hyp.len();
    let mut prev: Vec<Cell> = (0..=m).map(|j| (j, j, 0, j, 0)).collect();
    let mut cur: Vec<Cell> = vec![(0, 0, 0, 0, 0); m + 1];
    for (i, r) in reference.iter().enumerate() {
        cur[0] = (i + 1, i + 1, 0, 0, i + 1);
        for j in 1..=m {
            let diag = prev[j - 1];
            let sub = usize::from(*r != hyp[j - 1]);
            let mut best = (diag.0 + sub, diag.1, diag.2 + sub, diag.3, diag.4);
            let up = prev[j];
            let del = (up.0 + 1, up.1 + 1, up.2, up.3, up.4 + 1);
            let left = cur[j - 1];
            let ins = (left.0 + 1, left.1 + 1, left.2, left.3 + 1, left.4);
            for c in [del, ins] {
                if (c.0, c.1) < (best.0, best.1) {
                    best = c;
                }
            }
            cur[j] = best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let c = prev[m];
    (c.2, c.3, c.4)
}

/// Splits words into characters with a boundary token between words.
pub fn char_tokens<S: AsRef<str>>(words: &[S]) -> Vec<String> {
    let mut out = Vec::new();
    for (i, w) in words.iter().enumerate() {
        if i > 0 {
            out.push(WORD_BOUNDARY.to_string());
        }
        out.extend(w.as_ref().chars().map(String::from));
    }
    out
}

/// Error rate of `hyp` against `reference`. Tokens are words for
/// [`Unit::Word`] and [`Unit::Char`] (the latter spelled out with boundary
/// tokens) and phones for [`Unit::Phone`].
pub fn error_rate<S: AsRef<str>>(reference: &[S], hyp: &[S], unit: Unit) -> ErrorReport {
    let (r, h): (Vec<String>, Vec<String>) = match unit {
        Unit::Char => (char_tokens(reference), char_tokens(hyp)),
        _ => (
            reference.iter().map(|s| s.as_ref().to_string()).collect(),
            hyp.iter().map(|s| s.as_ref().to_string()).collect(),
        ),
    };
    let (s, i, d) = align_counts(&r, &h);
    ErrorReport::new(unit, s, i, d, r.len())
}

/// [`error_rate`] on whitespace-separated text.
pub fn text_error_rate(reference: &str, hyp: &str, unit: Unit) -> ErrorReport {
    let r: Vec<&str> = reference.split_whitespace().collect();
    let h: Vec<&str> = hyp.split_whitespace().collect();
    error_rate(&r, &h, unit)
}

/// Summed counts over aligned lists of reference and hypothesis lines.
pub fn corpus_error_rate<S: AsRef<str>>(references: &[S], hyps: &[S], unit: Unit) -> Result<ErrorReport> {
    if references.len() != hyps.len() {
        return Err(Error::Config(format!(
            "{} references but {} hypotheses",
            references.len(),
            hyps.len()
        )));
    }
    Ok(references
        .iter()
        .zip(hyps)
        .map(|(r, h)| text_error_rate(r.as_ref(), h.as_ref(), unit))
        .fold(ErrorReport::empty(unit), |a, b| a.merge(&b)))
}

/// Extra cost on insertions and deletions so that, among alignments with the
/// same number of errors, the one with the most substitutions wins.
const GAP_TIE: f64 = 1e-7;

/// Smallest error count between `reference` and any output string of
/// `lattice`, found by composing the lattice's unweighted output side with an
/// edit-distance transducer that spells `reference`.
///
/// Reference tokens are looked up in the lattice's output table; unknown
/// tokens can only be substituted or deleted.
pub fn oracle_error_rate<W: Semiring, S: AsRef<str>>(
    lattice: &Wfst<W>,
    reference: &[S],
    unit: Unit,
) -> Result<ErrorReport> {
    if lattice.is_empty() {
        return Err(Error::EmptyResult);
    }
    let hyp: Wfst<TropicalWeight> = lattice.project(true).map(
        |a| Some(Arc::new(a.ilabel, a.olabel, TropicalWeight::one(), a.nextstate)),
        |_| TropicalWeight::one(),
    );
    let syms = lattice.osyms().clone();
    let ops = SymbolTable::from_symbols(["S", "I", "D", "M"]).into_shared();
    let (op_s, op_i, op_d, op_m) = (1, 2, 3, 4);
    let r: Vec<Option<Label>> = reference.iter().map(|t| syms.get(t.as_ref())).collect();

    let mut b = Wfst::<TropicalWeight>::builder(syms.clone(), ops);
    b.add_states(r.len() + 1);
    b.set_start(0);
    b.set_final(r.len() as u32, TropicalWeight::one());
    let gap = TropicalWeight::new(1.0 + GAP_TIE);
    for j in 0..=r.len() {
        let s = j as u32;
        if j < r.len() {
            b.add_arc(s, Arc::new(EPSILON, op_d, gap, s + 1));
        }
        for (l, _) in syms.iter() {
            if j < r.len() {
                let (op, w) = if r[j] == Some(l) { (op_m, 0.0) } else { (op_s, 1.0) };
                b.add_arc(s, Arc::new(l, op, TropicalWeight::new(w), s + 1));
            }
            b.add_arc(s, Arc::new(l, op_i, gap, s));
        }
    }
    let edit = b.build()?;
    let best = shortest_path(&compose(&hyp, &edit)?)?;
    let count = |op| best.olabels.iter().filter(|&&o| o == op).count();
    Ok(ErrorReport::new(unit, count(op_s), count(op_i), count(op_d), r.len()))
}

/// Fixed-width table of named reports.
pub fn summary_table(rows: &[(String, ErrorReport)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<24} {:>5} {:>7} {:>7} {:>7} {:>7} {:>8}", "name", "unit", "N", "S", "I", "D", "rate%");
    for (name, r) in rows {
        let unit = match r.unit {
            Unit::Word => "word",
            Unit::Char => "char",
            Unit::Phone => "phone",
        };
        let _ = writeln!(
            out,
            "{:<24} {:>5} {:>7} {:>7} {:>7} {:>7} {:>8.2}",
            name,
            unit,
            r.reference_len,
            r.substitutions,
            r.insertions,
            r.deletions,
            100.0 * r.rate
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_substitution() {
        let r = error_rate(&["a", "b", "c"], &["a", "x", "c"], Unit::Word);
        assert_eq!((r.substitutions, r.insertions, r.deletions), (1, 0, 0));
        assert!((r.rate - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn identical_is_zero() {
        assert_eq!(error_rate(&["a", "b"], &["a", "b"], Unit::Word).rate, 0.0);
    }

    #[test]
    fn insertions_can_exceed_one() {
        let r = error_rate(&["a"], &["a", "b", "b"], Unit::Word);
        assert_eq!(r.insertions, 2);
        assert_eq!(r.rate, 2.0);
    }

    #[test]
    fn char_mode_scores_boundaries() {
        let r = error_rate(&["ab", "c"], &["abc"], Unit::Char);
        assert_eq!(r.reference_len, 4);
        assert_eq!(r.errors(), 1);
    }

    #[test]
    fn empty_reference() {
        assert_eq!(error_rate::<&str>(&[], &[], Unit::Word).rate, 0.0);
        assert!(error_rate(&[], &["a"], Unit::Word).rate.is_infinite());
    }

    #[test]
    fn prefers_substitutions_on_ties() {
        assert_eq!(align_counts(&["a", "b"], &["b", "a"]), (2, 0, 0));
    }

    #[test]
    fn json_field_names() {
        let j = serde_json::to_value(ErrorReport::new(Unit::Char, 1, 2, 3, 10)).unwrap();
        assert_eq!(j["unit"], "char");
        assert_eq!(j["S"], 1);
        assert_eq!(j["N"], 10);
    }
}
