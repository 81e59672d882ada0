//! The trainable phone-given-grapheme table.

use crate::error::{Error, Result};
use crate::fst::symbols::{Label, Symbols, EPSILON};
use crate::fst::wfst::ParamId;

/// Initial mass reserved for each grapheme row's insertion entry.
pub const DEFAULT_INSERTION_MASS: f64 = 0.01;

/// `P_lex(phone | grapheme)` with a deletion row and an insertion column.
///
/// Rows are indexed by grapheme label, row 0 being the deletion row (a phone
/// produced by no grapheme). Columns are indexed by phone label, column 0
/// being the insertion entry (a grapheme producing no phone). Which entries
/// may ever be nonzero is fixed structurally:
///
/// * the boundary row holds only silence phones and its insertion entry;
/// * every other grapheme row holds non-silence phones and its insertion entry;
/// * the deletion row holds non-silence phones;
/// * `P(ε | ε)` does not exist.
///
/// On top of that a pruning mask switches entries off.
#[derive(Clone, Debug, PartialEq)]
pub struct LexicalModel {
    phones: Symbols,
    graphemes: Symbols,
    boundary: Label,
    silence: Vec<bool>,
    probs: Vec<f64>,
    mask: Vec<bool>,
}

impl LexicalModel {
    /// Uniform initialization. Each grapheme row gives `insertion_mass` to its
    /// insertion entry and splits the rest evenly over its phones.
    pub fn init(
        phones: Symbols,
        graphemes: Symbols,
        silence: &[&str],
        boundary: &str,
        insertion_mass: f64,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&insertion_mass) {
            return Err(Error::Config(format!(
                "insertion mass must be in [0, 1), got {insertion_mass}"
            )));
        }
        let boundary_label = graphemes
            .get(boundary)
            .ok_or_else(|| Error::Config(format!("boundary grapheme {boundary:?} not in grapheme table")))?;
        let mut sil = vec![false; phones.len()];
        for s in silence {
            let l = phones
                .get(s)
                .ok_or_else(|| Error::Config(format!("silence phone {s:?} not in phone table")))?;
            sil[l as usize] = true;
        }
        if sil.iter().filter(|&&s| !s).count() < 2 {
            return Err(Error::Config("need at least one non-silence phone".into()));
        }
        let size = graphemes.len() * phones.len();
        let mut lex = LexicalModel {
            phones,
            graphemes,
            boundary: boundary_label,
            silence: sil,
            probs: vec![0.0; size],
            mask: vec![false; size],
        };
        for row in 0..lex.num_rows() as Label {
            let cols: Vec<Label> = (0..lex.num_cols() as Label)
                .filter(|&c| lex.is_allowed(row, c))
                .collect();
            let has_ins = row != EPSILON;
            let subs = cols.len() - usize::from(has_ins);
            for &c in &cols {
                let id = lex.param(row, c) as usize;
                lex.mask[id] = true;
                lex.probs[id] = match (c == EPSILON, subs) {
                    (true, 0) => 1.0,
                    (true, _) => insertion_mass,
                    (false, n) if has_ins => (1.0 - insertion_mass) / n as f64,
                    (false, n) => 1.0 / n as f64,
                };
            }
        }
        Ok(lex)
    }

    pub fn phones(&self) -> &Symbols {
        &self.phones
    }

    pub fn graphemes(&self) -> &Symbols {
        &self.graphemes
    }

    pub fn boundary(&self) -> Label {
        self.boundary
    }

    pub fn is_silence(&self, phone: Label) -> bool {
        self.silence.get(phone as usize).copied().unwrap_or(false)
    }

    pub fn silence_phones(&self) -> impl Iterator<Item = Label> + '_ {
        (0..self.silence.len() as Label).filter(|&p| self.silence[p as usize])
    }

    /// Number of non-silence phones, the `|X|` of smoothing.
    pub fn num_speech_phones(&self) -> usize {
        self.silence.iter().skip(1).filter(|&&s| !s).count()
    }

    /// Deletion row plus one row per grapheme.
    pub fn num_rows(&self) -> usize {
        self.graphemes.len()
    }

    /// Insertion column plus one column per phone.
    pub fn num_cols(&self) -> usize {
        self.phones.len()
    }

    pub fn num_params(&self) -> usize {
        self.probs.len()
    }

    pub fn param(&self, row: Label, col: Label) -> ParamId {
        row * self.num_cols() as Label + col
    }

    /// `(row, col)` of a parameter id.
    pub fn entry(&self, id: ParamId) -> (Label, Label) {
        let n = self.num_cols() as Label;
        (id / n, id % n)
    }

    /// Whether the structure permits `(row, col)` at all.
    pub fn is_allowed(&self, row: Label, col: Label) -> bool {
        if row as usize >= self.num_rows() || col as usize >= self.num_cols() {
            return false;
        }
        match (row, col) {
            (EPSILON, EPSILON) => false,
            (EPSILON, c) => !self.is_silence(c),
            (_, EPSILON) => true,
            (r, c) if r == self.boundary => self.is_silence(c),
            (_, c) => !self.is_silence(c),
        }
    }

    /// Allowed and not pruned.
    pub fn is_active(&self, row: Label, col: Label) -> bool {
        self.is_allowed(row, col) && self.mask[self.param(row, col) as usize]
    }

    pub fn prob(&self, row: Label, col: Label) -> f64 {
        self.probs[self.param(row, col) as usize]
    }

    pub fn row(&self, row: Label) -> &[f64] {
        let n = self.num_cols();
        &self.probs[row as usize * n..(row as usize + 1) * n]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Active entries with nonzero probability.
    pub fn active_params(&self) -> usize {
        self.probs
            .iter()
            .zip(&self.mask)
            .filter(|(&p, &m)| m && p > 0.0)
            .count()
    }

    fn grapheme_rows(&self) -> impl Iterator<Item = Label> + '_ {
        (1..self.num_rows() as Label).filter(move |&r| r != self.boundary)
    }

    /// Replaces one row. Entries not listed become zero; listed entries must
    /// be allowed, and the row must sum to one.
    pub fn set_row(&mut self, row: Label, entries: &[(Label, f64)]) -> Result<()> {
        if row as usize >= self.num_rows() {
            return Err(Error::InvalidModel(format!("row {row} out of range")));
        }
        let mut values = vec![0.0; self.num_cols()];
        for &(c, p) in entries {
            if !self.is_allowed(row, c) {
                return Err(Error::InvalidModel(format!("entry ({row}, {c}) is not allowed")));
            }
            if !(p >= 0.0) {
                return Err(Error::InvalidModel(format!("negative probability {p}")));
            }
            values[c as usize] = p;
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidModel(format!("row {row} sums to {sum}")));
        }
        for (c, v) in values.into_iter().enumerate() {
            let id = self.param(row, c as Label) as usize;
            self.probs[id] = v;
            self.mask[id] = self.is_allowed(row, c as Label);
        }
        Ok(())
    }

    /// Checks structure and row sums.
    pub fn validate(&self, tol: f64) -> Result<()> {
        for row in 0..self.num_rows() as Label {
            let mut sum = 0.0;
            for col in 0..self.num_cols() as Label {
                let p = self.prob(row, col);
                if !(p >= 0.0 && p <= 1.0 + tol) {
                    return Err(Error::InvalidModel(format!("entry ({row}, {col}) = {p}")));
                }
                if p > 0.0 && !self.is_active(row, col) {
                    return Err(Error::InvalidModel(format!(
                        "inactive entry ({row}, {col}) has mass {p}"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > tol {
                return Err(Error::InvalidModel(format!("row {row} sums to {sum}")));
            }
        }
        Ok(())
    }

    /// M-step: each row becomes its normalized expected counts. Rows with no
    /// evidence keep their previous values.
    pub fn reestimate(&self, counts: &[f64]) -> Result<Self> {
        if counts.len() != self.num_params() {
            return Err(Error::InvalidModel(format!(
                "expected {} counts, got {}",
                self.num_params(),
                counts.len()
            )));
        }
        let mut next = self.clone();
        let n = self.num_cols();
        for row in 0..self.num_rows() {
            let range = row * n..(row + 1) * n;
            let total: f64 = range
                .clone()
                .filter(|&i| self.mask[i])
                .map(|i| counts[i])
                .sum();
            if !(total > 0.0) || !total.is_finite() {
                continue;
            }
            for i in range {
                next.probs[i] = if self.mask[i] { counts[i] / total } else { 0.0 };
            }
        }
        Ok(next)
    }

    /// Interpolates every grapheme row with a uniform distribution over the
    /// non-silence phones: `α·P + (1 − α)/|X|`, the insertion entry being
    /// scaled by `α`. Entries masked by pruning are switched back on. The
    /// deletion and boundary rows are left alone.
    pub fn smooth(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Config(format!("smoothing alpha must be in (0, 1], got {alpha}")));
        }
        let floor = (1.0 - alpha) / self.num_speech_phones() as f64;
        let mut next = self.clone();
        for row in self.grapheme_rows() {
            for col in 0..self.num_cols() as Label {
                if !self.is_allowed(row, col) {
                    continue;
                }
                let id = self.param(row, col) as usize;
                next.mask[id] = true;
                next.probs[id] = if col == EPSILON {
                    alpha * self.probs[id]
                } else {
                    alpha * self.probs[id] + floor
                };
            }
        }
        Ok(next)
    }

    /// Keeps the `k` most probable phones of every grapheme row (ties to the
    /// lower phone id), masks the rest and renormalizes. Insertion entries,
    /// the deletion row and the boundary row are exempt.
    pub fn prune(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("prune k must be at least 1".into()));
        }
        let mut next = self.clone();
        for row in self.grapheme_rows() {
            let mut cols: Vec<Label> = (1..self.num_cols() as Label)
                .filter(|&c| self.is_active(row, c))
                .collect();
            if cols.len() <= k {
                continue;
            }
            cols.sort_by(|&a, &b| self.prob(row, b).total_cmp(&self.prob(row, a)).then(a.cmp(&b)));
            for &c in &cols[k..] {
                let id = self.param(row, c) as usize;
                next.mask[id] = false;
                next.probs[id] = 0.0;
            }
            let sum: f64 = next.row(row).iter().sum();
            if sum > 0.0 {
                let n = self.num_cols();
                for p in &mut next.probs[row as usize * n..(row as usize + 1) * n] {
                    *p /= sum;
                }
            }
        }
        Ok(next)
    }

    pub(crate) fn from_parts(
        phones: Symbols,
        graphemes: Symbols,
        boundary: Label,
        silence: Vec<bool>,
        probs: Vec<f64>,
        mask: Vec<bool>,
    ) -> Self {
        LexicalModel {
            phones,
            graphemes,
            boundary,
            silence,
            probs,
            mask,
        }
    }
}

/// Free-function form of [`LexicalModel::init`] with the default insertion
/// mass.
pub fn init_lexical(
    phones: Symbols,
    graphemes: Symbols,
    silence: &[&str],
    boundary: &str,
) -> Result<LexicalModel> {
    LexicalModel::init(phones, graphemes, silence, boundary, DEFAULT_INSERTION_MASS)
}

pub fn smooth(lex: &LexicalModel, alpha: f64) -> Result<LexicalModel> {
    lex.smooth(alpha)
}

pub fn prune_lexical(lex: &LexicalModel, k: usize) -> Result<LexicalModel> {
    lex.prune(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fst::symbols::SymbolTable;

    fn model(n_phones: usize) -> LexicalModel {
        let mut phones: Vec<String> = (0..n_phones).map(|i| format!("P{i}")).collect();
        phones.push("SIL".into());
        let p = SymbolTable::from_symbols(phones).into_shared();
        let g = SymbolTable::from_symbols(["<wb>", "a", "b"]).into_shared();
        init_lexical(p, g, &["SIL"], "<wb>").unwrap()
    }

    #[test]
    fn init_splits_row_mass() {
        let lex = model(5);
        let a = lex.graphemes().get("a").unwrap();
        assert!((lex.prob(a, 1) - 0.198).abs() < 1e-12);
        assert!((lex.prob(a, EPSILON) - 0.01).abs() < 1e-12);
        lex.validate(1e-9).unwrap();
    }

    #[test]
    fn boundary_row_holds_only_silence_phones() {
        let lex = model(5);
        let sil = lex.phones().get("SIL").unwrap();
        let wb = lex.boundary();
        for c in 1..lex.num_cols() as Label {
            assert_eq!(lex.prob(wb, c) > 0.0, c == sil);
        }
        for r in 0..lex.num_rows() as Label {
            assert_eq!(lex.prob(r, sil) > 0.0, r == wb);
        }
        assert_eq!(lex.prob(EPSILON, EPSILON), 0.0);
    }

    #[test]
    fn rejects_unknown_silence() {
        let p = SymbolTable::from_symbols(["A", "B"]).into_shared();
        let g = SymbolTable::from_symbols(["<wb>", "a"]).into_shared();
        assert!(init_lexical(p, g, &["SIL"], "<wb>").is_err());
    }

    #[test]
    fn smoothing_arithmetic() {
        let mut lex = model(10);
        let a = lex.graphemes().get("a").unwrap();
        let mut row = vec![(1, 0.5)];
        row.extend((2..=6).map(|c| (c, 0.1)));
        lex.set_row(a, &row).unwrap();
        let s = lex.smooth(0.9).unwrap();
        assert!((s.prob(a, 1) - 0.46).abs() < 1e-12);
        s.validate(1e-9).unwrap();
    }

    #[test]
    fn uniform_row_is_fixed_point() {
        let mut lex = model(4);
        let a = lex.graphemes().get("a").unwrap();
        lex.set_row(a, &[(1, 0.25), (2, 0.25), (3, 0.25), (4, 0.25)]).unwrap();
        let s = lex.smooth(0.9).unwrap();
        assert_eq!(s.row(a), lex.row(a));
    }

    #[test]
    fn prune_example() {
        let mut lex = model(3);
        let a = lex.graphemes().get("a").unwrap();
        lex.set_row(a, &[(1, 0.5), (2, 0.3), (3, 0.2)]).unwrap();
        let p = lex.prune(2).unwrap();
        assert!((p.prob(a, 1) - 0.625).abs() < 1e-12);
        assert!((p.prob(a, 2) - 0.375).abs() < 1e-12);
        assert!(!p.is_active(a, 3));
        p.validate(1e-9).unwrap();
    }

    #[test]
    fn smoothing_revives_pruned_entries() {
        let lex = model(12).prune(10).unwrap();
        let a = lex.graphemes().get("a").unwrap();
        assert_eq!((1..=12).filter(|&c| lex.is_active(a, c)).count(), 10);
        let s = lex.smooth(0.9).unwrap();
        assert_eq!((1..=12).filter(|&c| s.is_active(a, c)).count(), 12);
        s.validate(1e-9).unwrap();
    }

    #[test]
    fn reestimate_keeps_rows_without_evidence() {
        let lex = model(3);
        let mut counts = vec![0.0; lex.num_params()];
        let a = lex.graphemes().get("a").unwrap();
        counts[lex.param(a, 2) as usize] = 4.0;
        let next = lex.reestimate(&counts).unwrap();
        assert_eq!(next.prob(a, 2), 1.0);
        let b = lex.graphemes().get("b").unwrap();
        assert_eq!(next.row(b), lex.row(b));
        next.validate(1e-9).unwrap();
    }
}
