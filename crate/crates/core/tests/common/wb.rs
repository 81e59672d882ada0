//! A direct Witten–Bell backoff model over token strings, computed from raw
//! counts on every query, and a failure-arc walk over compiled acceptors.

use std::collections::{BTreeSet, HashMap};

use decipher_fst::fst::{Label, Semiring, Wfst, EPSILON};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

pub struct WbOracle {
    order: usize,
    vocab: BTreeSet<String>,
    /// Counts of every n-gram of length `1..=order`, keyed by tokens.
    counts: HashMap<Vec<String>, u64>,
    /// Distinct successors of each history.
    followers: HashMap<Vec<String>, BTreeSet<String>>,
}

impl WbOracle {
    /// `vocab` holds the predicted tokens other than sentence end.
    pub fn new(order: usize, vocab: impl IntoIterator<Item = String>, sentences: &[Vec<String>]) -> Self {
        let mut counts = HashMap::new();
        let mut followers: HashMap<Vec<String>, BTreeSet<String>> = HashMap::new();
        for s in sentences {
            let seq: Vec<String> = std::iter::once(BOS.to_string())
                .chain(s.iter().cloned())
                .chain(std::iter::once(EOS.to_string()))
                .collect();
            for i in 1..seq.len() {
                for k in 0..order.min(i + 1) {
                    let h = seq[i - k..i].to_vec();
                    let mut g = h.clone();
                    g.push(seq[i].clone());
                    *counts.entry(g).or_insert(0) += 1;
                    followers.entry(h).or_default().insert(seq[i].clone());
                }
            }
        }
        WbOracle {
            order,
            vocab: vocab.into_iter().collect(),
            counts,
            followers,
        }
    }

    fn count(&self, g: &[String]) -> u64 {
        *self.counts.get(g).unwrap_or(&0)
    }

    /// `P(y | h)`.
    pub fn prob(&self, h: &[String], y: &str) -> f64 {
        let h = &h[h.len().saturating_sub(self.order - 1)..];
        let seen = self.followers.get(h).cloned().unwrap_or_default();
        let total: u64 = seen.iter().map(|f| self.count(&[h, std::slice::from_ref(f)].concat())).sum();
        let types = seen.len() as f64;
        let lower = if h.is_empty() {
            1.0 / (self.vocab.len() + 1) as f64
        } else {
            self.prob(&h[1..], y)
        };
        if total == 0 {
            return lower;
        }
        let c = self.count(&[h, &[y.to_string()]].concat()) as f64;
        (c + types * lower) / (total as f64 + types)
    }

    pub fn sentence_logprob(&self, tokens: &[String]) -> f64 {
        let mut h = vec![BOS.to_string()];
        let mut lp = 0.0;
        for y in tokens.iter().map(String::as_str).chain([EOS]) {
            lp += self.prob(&h, y).ln();
            h.push(y.to_string());
        }
        lp
    }
}

/// Cost of `tokens` in a backoff acceptor: a direct arc is taken whenever one
/// matches, an epsilon arc only otherwise, and the string ends by backing
/// off until a final state.
pub fn failure_walk<W: Semiring>(g: &Wfst<W>, tokens: &[Label]) -> Option<f64> {
    let mut s = g.start()?;
    let mut cost = 0.0;
    let mut i = 0;
    loop {
        let next = tokens.get(i).copied();
        let direct = next.and_then(|y| g.arcs(s).iter().find(|a| a.ilabel == y));
        if let Some(a) = direct {
            cost += a.weight.value();
            s = a.nextstate;
            i += 1;
            continue;
        }
        if next.is_none() && g.is_final(s) {
            return Some(cost + g.final_weight(s).value());
        }
        let eps = g.arcs(s).iter().find(|a| a.ilabel == EPSILON)?;
        cost += eps.weight.value();
        s = eps.nextstate;
    }
}
