use crate::fst::semiring::Semiring;
use crate::fst::symbols::Label;
use crate::fst::wfst::{Arc, StateId, Wfst};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SortKey {
    Input,
    Output,
}

/// Removes every state that is not on some start-to-final path.
///
/// Surviving states keep their relative order, so a machine that is already
/// trim comes back isomorphic with identical numbering.
pub fn trim<W: Semiring>(f: &Wfst<W>) -> Wfst<W> {
    let n = f.num_states();
    let Some(start) = f.start() else {
        return Wfst::empty(f.isyms().clone(), f.osyms().clone());
    };

    let mut accessible = vec![false; n];
    let mut stack = vec![start];
    accessible[start as usize] = true;
    while let Some(s) = stack.pop() {
        for a in f.arcs(s) {
            if !accessible[a.nextstate as usize] {
                accessible[a.nextstate as usize] = true;
                stack.push(a.nextstate);
            }
        }
    }

    let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for s in f.states() {
        for a in f.arcs(s) {
            preds[a.nextstate as usize].push(s);
        }
    }
    let mut coaccessible = vec![false; n];
    let mut stack: Vec<StateId> = f.states().filter(|&s| f.is_final(s)).collect();
    for &s in &stack {
        coaccessible[s as usize] = true;
    }
    while let Some(s) = stack.pop() {
        for &p in &preds[s as usize] {
            if !coaccessible[p as usize] {
                coaccessible[p as usize] = true;
                stack.push(p);
            }
        }
    }

    if !coaccessible[start as usize] {
        return Wfst::empty(f.isyms().clone(), f.osyms().clone());
    }

    let mut remap = vec![u32::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if accessible[s] && coaccessible[s] {
            remap[s] = next;
            next += 1;
        }
    }

    let mut b = Wfst::builder(f.isyms().clone(), f.osyms().clone());
    b.add_states(next as usize);
    b.set_start(remap[start as usize]);
    for s in f.states() {
        let ns = remap[s as usize];
        if ns == u32::MAX {
            continue;
        }
        b.set_final(ns, f.final_weight(s));
        for a in f.arcs(s) {
            let t = remap[a.nextstate as usize];
            if t != u32::MAX {
                b.add_arc(ns, Arc { nextstate: t, ..*a });
            }
        }
    }
    b.build().expect("trim preserves validity")
}

/// Sorts each state's arcs by input or output label (stable).
pub fn arc_sort<W: Semiring>(f: &Wfst<W>, by: SortKey) -> Wfst<W> {
    let already = match by {
        SortKey::Input => f.is_input_sorted(),
        SortKey::Output => f.is_output_sorted(),
    };
    if already {
        return f.clone();
    }
    let key = |a: &Arc<W>| -> Label {
        match by {
            SortKey::Input => a.ilabel,
            SortKey::Output => a.olabel,
        }
    };
    let mut sorted = Wfst::builder(f.isyms().clone(), f.osyms().clone());
    sorted.add_states(f.num_states());
    if let Some(s) = f.start() {
        sorted.set_start(s);
    }
    for s in f.states() {
        let mut arcs = f.arcs(s).to_vec();
        arcs.sort_by_key(key);
        sorted.set_final(s, f.final_weight(s));
        for a in arcs {
            sorted.add_arc(s, a);
        }
    }
    sorted.build().expect("sorting preserves validity")
}
