//! Language models prepared for training and decoding.

use crate::error::{Error, Result};
use crate::fst::semiring::{LogWeight, Semiring, TropicalWeight};
use crate::fst::symbols::{Label, Symbols, EPSILON};
use crate::fst::wfst::{same_symbols, StateId, Wfst};
use crate::ngram::{build_lexicon_fst, GraphemeLexicon};

/// How parallel routes through the epsilon closure are combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Combine {
    /// Probabilities, summed.
    Sum,
    /// Costs (negative log), minimized.
    Min,
}

/// Every way a grapheme acceptor can consume one token from a state, with
/// epsilon moves folded in.
///
/// For state `g`, entries `offsets[g]..offsets[g + 1]` list `(token, next,
/// weight)` sorted by token. `finals[g]` is the weight of ending from `g`
/// after any epsilon moves.
#[derive(Clone, Debug)]
pub(crate) struct EmissionTable {
    pub offsets: Vec<u32>,
    pub tokens: Vec<Label>,
    pub targets: Vec<StateId>,
    pub weights: Vec<f64>,
    pub finals: Vec<f64>,
    pub start: StateId,
    pub mode: Combine,
    /// Tokens are below `width - 1`; entries of state `g` with token `y`
    /// start at `by_token[g * width + y]`.
    width: usize,
    by_token: Vec<u32>,
}

impl EmissionTable {
    pub fn build(g: &Wfst<LogWeight>, mode: Combine) -> Result<Self> {
        let start = g.start().ok_or(Error::EmptyResult)?;
        let n = g.num_states();
        let (plus, times, zero, one): (fn(f64, f64) -> f64, fn(f64, f64) -> f64, f64, f64) = match mode {
            Combine::Sum => (|a, b| a + b, |a, b| a * b, 0.0, 1.0),
            Combine::Min => (f64::min, |a, b| a + b, f64::INFINITY, 0.0),
        };
        let conv = |w: LogWeight| match mode {
            Combine::Sum => w.to_prob(),
            Combine::Min => w.value(),
        };

        // Epsilon closures in reverse topological order of the epsilon graph.
        let eps_order = epsilon_order(g)?;
        let mut closure: Vec<Vec<(StateId, f64)>> = vec![Vec::new(); n];
        for &s in eps_order.iter().rev() {
            let mut acc: Vec<(StateId, f64)> = vec![(s, one)];
            for a in g.arcs(s).iter().filter(|a| a.ilabel == EPSILON) {
                let w = conv(a.weight);
                for &(t, v) in &closure[a.nextstate as usize] {
                    acc.push((t, times(w, v)));
                }
            }
            acc.sort_by_key(|&(t, _)| t);
            let mut merged: Vec<(StateId, f64)> = Vec::with_capacity(acc.len());
            for (t, v) in acc {
                match merged.last_mut() {
                    Some(last) if last.0 == t => last.1 = plus(last.1, v),
                    _ => merged.push((t, v)),
                }
            }
            closure[s as usize] = merged;
        }

        let mut table = EmissionTable {
            offsets: Vec::with_capacity(n + 1),
            tokens: Vec::new(),
            targets: Vec::new(),
            weights: Vec::new(),
            finals: vec![zero; n],
            start,
            mode,
            width: 0,
            by_token: Vec::new(),
        };
        let mut entries: Vec<(Label, StateId, f64)> = Vec::new();
        for s in 0..n {
            table.offsets.push(table.tokens.len() as u32);
            entries.clear();
            let mut fin = zero;
            for &(t, v) in &closure[s] {
                if g.is_final(t) {
                    fin = plus(fin, times(v, conv(g.final_weight(t))));
                }
                for a in g.arcs(t).iter().filter(|a| a.ilabel != EPSILON) {
                    entries.push((a.ilabel, a.nextstate, times(v, conv(a.weight))));
                }
            }
            table.finals[s] = fin;
            entries.sort_by_key(|&(y, t, _)| (y, t));
            let mut i = 0;
            while i < entries.len() {
                let (y, t, mut v) = entries[i];
                i += 1;
                while i < entries.len() && entries[i].0 == y && entries[i].1 == t {
                    v = plus(v, entries[i].2);
                    i += 1;
                }
                table.tokens.push(y);
                table.targets.push(t);
                table.weights.push(v);
            }
        }
        table.offsets.push(table.tokens.len() as u32);
        table.index_tokens();
        Ok(table)
    }

    fn index_tokens(&mut self) {
        let width = self.tokens.iter().copied().max().map_or(0, |m| m as usize + 1) + 1;
        let n = self.num_states();
        let mut by_token = Vec::with_capacity(n * width);
        for g in 0..n as StateId {
            let r = self.range(g);
            let mut e = r.start;
            for y in 0..width {
                while e < r.end && (self.tokens[e] as usize) < y {
                    e += 1;
                }
                by_token.push(e as u32);
            }
        }
        self.width = width;
        self.by_token = by_token;
    }

    /// Entries of `g` that consume token `y`.
    #[inline]
    pub fn token_range(&self, g: StateId, y: Label) -> std::ops::Range<usize> {
        let y = y as usize;
        if y + 1 >= self.width {
            return 0..0;
        }
        let base = g as usize * self.width + y;
        self.by_token[base] as usize..self.by_token[base + 1] as usize
    }

    pub fn num_states(&self) -> usize {
        self.finals.len()
    }

    #[inline]
    pub fn range(&self, g: StateId) -> std::ops::Range<usize> {
        self.offsets[g as usize] as usize..self.offsets[g as usize + 1] as usize
    }
}

/// A grapheme acceptor in probability space with its epsilon arcs kept
/// apart from the token arcs.
///
/// `level[g]` is the length of the longest epsilon path leaving `g`, so every
/// epsilon arc goes to a strictly lower level. `finals[g]` already includes
/// epsilon moves.
#[derive(Clone, Debug)]
pub(crate) struct ArcTable {
    pub start: StateId,
    pub offsets: Vec<u32>,
    pub tokens: Vec<Label>,
    pub targets: Vec<StateId>,
    pub weights: Vec<f64>,
    pub eps_offsets: Vec<u32>,
    pub eps_targets: Vec<StateId>,
    pub eps_weights: Vec<f64>,
    pub level: Vec<u32>,
    pub levels: usize,
    pub finals: Vec<f64>,
}

impl ArcTable {
    pub fn build(g: &Wfst<LogWeight>) -> Result<Self> {
        let start = g.start().ok_or(Error::EmptyResult)?;
        let n = g.num_states();
        let mut t = ArcTable {
            start,
            offsets: Vec::with_capacity(n + 1),
            tokens: Vec::new(),
            targets: Vec::new(),
            weights: Vec::new(),
            eps_offsets: Vec::with_capacity(n + 1),
            eps_targets: Vec::new(),
            eps_weights: Vec::new(),
            level: vec![0; n],
            levels: 1,
            finals: vec![0.0; n],
        };
        for s in g.states() {
            t.offsets.push(t.tokens.len() as u32);
            t.eps_offsets.push(t.eps_targets.len() as u32);
            for a in g.arcs(s) {
                if a.ilabel == EPSILON {
                    t.eps_targets.push(a.nextstate);
                    t.eps_weights.push(a.weight.to_prob());
                } else {
                    t.tokens.push(a.ilabel);
                    t.targets.push(a.nextstate);
                    t.weights.push(a.weight.to_prob());
                }
            }
        }
        t.offsets.push(t.tokens.len() as u32);
        t.eps_offsets.push(t.eps_targets.len() as u32);
        for &s in epsilon_order(g)?.iter().rev() {
            let mut lvl = 0;
            let mut fin = g.final_weight(s).to_prob();
            for e in t.eps(s) {
                let h = t.eps_targets[e] as usize;
                lvl = lvl.max(t.level[h] + 1);
                fin += t.eps_weights[e] * t.finals[h];
            }
            t.level[s as usize] = lvl;
            t.finals[s as usize] = fin;
        }
        t.levels = t.level.iter().max().map_or(1, |&m| m as usize + 1);
        Ok(t)
    }

    pub fn num_states(&self) -> usize {
        self.finals.len()
    }

    #[inline]
    pub fn arcs(&self, g: StateId) -> std::ops::Range<usize> {
        self.offsets[g as usize] as usize..self.offsets[g as usize + 1] as usize
    }

    #[inline]
    pub fn eps(&self, g: StateId) -> std::ops::Range<usize> {
        self.eps_offsets[g as usize] as usize..self.eps_offsets[g as usize + 1] as usize
    }
}

/// States ordered so that every epsilon arc goes forward.
fn epsilon_order(g: &Wfst<LogWeight>) -> Result<Vec<StateId>> {
    let n = g.num_states();
    let mut indeg = vec![0u32; n];
    for s in g.states() {
        for a in g.arcs(s).iter().filter(|a| a.ilabel == EPSILON) {
            indeg[a.nextstate as usize] += 1;
        }
    }
    let mut queue: Vec<StateId> = (0..n as StateId).filter(|&s| indeg[s as usize] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(s) = queue.pop() {
        order.push(s);
        for a in g.arcs(s).iter().filter(|a| a.ilabel == EPSILON) {
            indeg[a.nextstate as usize] -= 1;
            if indeg[a.nextstate as usize] == 0 {
                queue.push(a.nextstate);
            }
        }
    }
    if order.len() != n {
        return Err(Error::Cyclic);
    }
    Ok(order)
}

/// A character model ready for fused lattice computations.
#[derive(Clone, Debug)]
pub struct CharLm {
    pub(crate) g: Wfst<LogWeight>,
    pub(crate) g_trop: Wfst<TropicalWeight>,
    pub(crate) sum: ArcTable,
    pub(crate) min: EmissionTable,
}

/// A word model with the lexicon that spells its words.
#[derive(Clone, Debug)]
pub struct WordLm {
    pub(crate) lexicon: GraphemeLexicon,
    pub(crate) lexicon_log: Wfst<LogWeight>,
    pub(crate) lexicon_trop: Wfst<TropicalWeight>,
    pub(crate) g: Wfst<LogWeight>,
    pub(crate) g_trop: Wfst<TropicalWeight>,
}

/// The language model of one training stage.
#[derive(Clone, Debug)]
pub enum LanguageModel {
    Char(CharLm),
    Word(WordLm),
}

impl LanguageModel {
    /// Wraps a grapheme acceptor. Its epsilon arcs must not form a cycle.
    pub fn char<W: Semiring>(g: &Wfst<W>) -> Result<Self> {
        let g: Wfst<LogWeight> = g.map_weights();
        if !g.is_acceptor() {
            return Err(Error::InvalidFst("grapheme model must be an acceptor".into()));
        }
        let sum = ArcTable::build(&g)?;
        let min = EmissionTable::build(&g, Combine::Min)?;
        Ok(LanguageModel::Char(CharLm {
            g_trop: g.map_weights(),
            g,
            sum,
            min,
        }))
    }

    /// Wraps a word acceptor and a lexicon over `graphemes`.
    pub fn word<W: Semiring>(g: &Wfst<W>, lexicon: GraphemeLexicon, graphemes: &Symbols) -> Result<Self> {
        let g: Wfst<LogWeight> = g.map_weights();
        let lexicon_log: Wfst<LogWeight> = build_lexicon_fst(&lexicon, graphemes, g.isyms())?;
        Ok(LanguageModel::Word(WordLm {
            lexicon,
            lexicon_trop: lexicon_log.map_weights(),
            lexicon_log,
            g_trop: g.map_weights(),
            g,
        }))
    }

    /// Symbol table the edit machine's output must match.
    pub fn graphemes(&self) -> &Symbols {
        match self {
            LanguageModel::Char(c) => c.g.isyms(),
            LanguageModel::Word(w) => w.lexicon_log.isyms(),
        }
    }

    pub(crate) fn check_graphemes(&self, graphemes: &Symbols) -> Result<()> {
        if same_symbols(self.graphemes(), graphemes) {
            Ok(())
        } else {
            Err(Error::SymbolMismatch(
                "language model alphabet differs from the lexical model graphemes".into(),
            ))
        }
    }
}
