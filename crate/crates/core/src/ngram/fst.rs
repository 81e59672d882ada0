//! Compiling n-gram models into backoff acceptors.

use std::collections::HashMap;

use crate::error::Result;
use crate::fst::semiring::Semiring;
use crate::fst::symbols::{Label, EPSILON};
use crate::fst::wfst::{Arc, StateId, Wfst};

use super::model::NGramLm;

/// Builds an acceptor over the model's alphabet.
///
/// There is one state per stored history plus a unigram state. Seen tokens
/// leave a history on an arc weighted by their interpolated probability;
/// everything else is reached through an epsilon arc carrying the backoff
/// weight. Sentence end becomes a final weight. Following backoff arcs only
/// when no direct arc matches reproduces [`NGramLm::prob`] exactly.
pub fn lm_to_fst<W: Semiring>(lm: &NGramLm) -> Result<Wfst<W>> {
    let mut histories: Vec<&Vec<Label>> = lm.histories().collect();
    histories.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let mut ids: HashMap<&[Label], StateId> = HashMap::with_capacity(histories.len() + 1);
    ids.insert(&[], 0);
    for (i, h) in histories.iter().enumerate() {
        ids.insert(h.as_slice(), i as StateId + 1);
    }
    let max_hist = lm.order() - 1;
    let target = |h: &[Label], y: Label| -> StateId {
        let mut ext: Vec<Label> = h.iter().copied().chain(std::iter::once(y)).collect();
        if ext.len() > max_hist {
            ext.drain(..ext.len() - max_hist);
        }
        (0..=ext.len())
            .find_map(|skip| ids.get(&ext[skip..]).copied())
            .unwrap_or(0)
    };

    let eos = lm.eos();
    let mut b = Wfst::<W>::builder(lm.symbols().clone(), lm.symbols().clone());
    b.add_states(histories.len() + 1);
    let start = if max_hist == 0 { 0 } else { ids[&[lm.bos()][..]] };
    b.set_start(start);

    for y in 1..eos {
        b.add_arc(0, Arc::new(y, y, W::from_prob(lm.unigram(y)), target(&[], y)));
    }
    b.set_final(0, W::from_prob(lm.unigram(eos)));

    for h in histories {
        let s = ids[h.as_slice()];
        let ctx = lm.context(h).expect("stored history");
        for (&y, &p) in &ctx.probs {
            if y == eos {
                b.set_final(s, W::from_prob(p));
            } else {
                b.add_arc(s, Arc::new(y, y, W::from_prob(p), target(h, y)));
            }
        }
        b.add_arc(s, Arc::new(EPSILON, EPSILON, W::from_prob(ctx.backoff), ids[&h[1..]]));
    }
    b.build()
}

/// Scores a token sequence by walking the acceptor and taking a backoff arc
/// only when no direct arc matches. Returns `None` if the walk gets stuck.
pub fn backoff_walk<W: Semiring>(g: &Wfst<W>, tokens: &[Label]) -> Option<W> {
    let mut state = g.start()?;
    let mut w = W::one();
    let backoff = |s: StateId| g.arcs(s).iter().find(|a| a.ilabel == EPSILON);
    for &y in tokens {
        loop {
            if let Some(a) = g.arcs(state).iter().find(|a| a.ilabel == y) {
                w = w.times(a.weight);
                state = a.nextstate;
                break;
            }
            let a = backoff(state)?;
            w = w.times(a.weight);
            state = a.nextstate;
        }
    }
    while !g.is_final(state) {
        let a = backoff(state)?;
        w = w.times(a.weight);
        state = a.nextstate;
    }
    Some(w.times(g.final_weight(state)))
}
