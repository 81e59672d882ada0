//! The pre-composed lexical and alignment transducer.

use crate::error::Result;
use crate::fst::semiring::Semiring;
use crate::fst::symbols::{Label, EPSILON};
use crate::fst::wfst::{Arc, Wfst};

use super::alignment::{AlignmentModel, AFTER_DEL, AFTER_INS, BASE};
use super::lexical::LexicalModel;

/// Builds the three-state edit transducer from phones to graphemes.
///
/// Substitutions `x:y` lead from every state back to `BASE`; insertions
/// `ε:y` and deletions `x:ε` leave only from `BASE`, so two insertions or two
/// deletions never follow each other. Every arc is tagged with its lexical
/// parameter and entries with zero probability get no arc. All states are
/// final.
pub fn build_edit_fst<W: Semiring>(lex: &LexicalModel, ali: &AlignmentModel) -> Result<Wfst<W>> {
    ali.validate()?;
    let mut b = Wfst::<W>::builder(lex.phones().clone(), lex.graphemes().clone());
    b.add_states(3);
    b.set_start(BASE);
    for s in [BASE, AFTER_INS, AFTER_DEL] {
        b.set_final(s, W::one());
    }
    let cols = lex.num_cols() as Label;
    // Arcs are added in phone order so the machine is input-sorted.
    let mut subs = Vec::new();
    for col in 1..cols {
        for row in 1..lex.num_rows() as Label {
            let p = lex.prob(row, col);
            if lex.is_active(row, col) && p > 0.0 {
                subs.push((col, row, p * ali.sub));
            }
        }
    }
    for state in [BASE, AFTER_INS, AFTER_DEL] {
        if state == BASE {
            for row in 1..lex.num_rows() as Label {
                let p = lex.prob(row, EPSILON);
                if lex.is_active(row, EPSILON) && p > 0.0 && ali.ins > 0.0 {
                    let arc = Arc::new(EPSILON, row, W::from_prob(p * ali.ins), AFTER_INS);
                    b.add_arc(BASE, arc.tagged(lex.param(row, EPSILON)));
                }
            }
        }
        for col in 1..cols {
            if state == BASE {
                let p = lex.prob(EPSILON, col);
                if lex.is_active(EPSILON, col) && p > 0.0 && ali.del > 0.0 {
                    let arc = Arc::new(col, EPSILON, W::from_prob(p * ali.del), AFTER_DEL);
                    b.add_arc(BASE, arc.tagged(lex.param(EPSILON, col)));
                }
            }
            for &(c, row, w) in subs.iter().filter(|s| s.0 == col) {
                let arc = Arc::new(c, row, W::from_prob(w), BASE);
                b.add_arc(state, arc.tagged(lex.param(row, c)));
            }
        }
    }
    b.build()
}
