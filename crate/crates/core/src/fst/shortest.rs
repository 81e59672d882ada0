use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::fst::ops::trim;
use crate::fst::semiring::{Semiring, TropicalWeight};
use crate::fst::symbols::{Label, EPSILON};
use crate::fst::wfst::{Arc, StateId, Wfst};

/// Best cost from the start state to every state, reading weights as costs.
///
/// Acyclic machines are relaxed in topological order; otherwise a FIFO
/// label-correcting search is used, which tolerates negative arcs but not
/// negative cycles.
pub fn shortest_distance<W: Semiring>(f: &Wfst<W>) -> Result<Vec<f64>> {
    let n = f.num_states();
    let mut dist = vec![f64::INFINITY; n];
    let Some(start) = f.start() else {
        return Ok(dist);
    };
    dist[start as usize] = 0.0;
    if let Some(order) = f.topological_order() {
        for s in order {
            let d = dist[s as usize];
            if d == f64::INFINITY {
                continue;
            }
            for a in f.arcs(s) {
                let c = d + a.weight.value();
                if c < dist[a.nextstate as usize] {
                    dist[a.nextstate as usize] = c;
                }
            }
        }
        return Ok(dist);
    }
    label_correcting(n, start, &mut dist, |s, visit| {
        for a in f.arcs(s) {
            visit(a.nextstate, a.weight.value());
        }
    })?;
    Ok(dist)
}

/// Best cost from every state to a final state.
pub fn reverse_distance<W: Semiring>(f: &Wfst<W>) -> Result<Vec<f64>> {
    let n = f.num_states();
    let mut dist: Vec<f64> = f.states().map(|s| f.final_weight(s).value()).collect();
    if let Some(order) = f.topological_order() {
        for &s in order.iter().rev() {
            let mut best = dist[s as usize];
            for a in f.arcs(s) {
                best = best.min(a.weight.value() + dist[a.nextstate as usize]);
            }
            dist[s as usize] = best;
        }
        return Ok(dist);
    }
    let mut preds: Vec<Vec<(StateId, f64)>> = vec![Vec::new(); n];
    for s in f.states() {
        for a in f.arcs(s) {
            preds[a.nextstate as usize].push((s, a.weight.value()));
        }
    }
    let mut queue: VecDeque<StateId> = f.states().filter(|&s| f.is_final(s)).collect();
    let mut queued = vec![false; n];
    let mut updates = vec![0usize; n];
    for &s in &queue {
        queued[s as usize] = true;
    }
    while let Some(s) = queue.pop_front() {
        queued[s as usize] = false;
        for &(p, w) in &preds[s as usize] {
            let c = w + dist[s as usize];
            if c < dist[p as usize] {
                dist[p as usize] = c;
                updates[p as usize] += 1;
                if updates[p as usize] > n + 1 {
                    return Err(Error::InvalidFst("negative-cost cycle".into()));
                }
                if !queued[p as usize] {
                    queued[p as usize] = true;
                    queue.push_back(p);
                }
            }
        }
    }
    Ok(dist)
}

fn label_correcting(
    n: usize,
    start: StateId,
    dist: &mut [f64],
    mut arcs: impl FnMut(StateId, &mut dyn FnMut(StateId, f64)),
) -> Result<()> {
    let mut queue = VecDeque::from([start]);
    let mut queued = vec![false; n];
    let mut updates = vec![0usize; n];
    queued[start as usize] = true;
    while let Some(s) = queue.pop_front() {
        queued[s as usize] = false;
        let d = dist[s as usize];
        let mut relaxed = Vec::new();
        arcs(s, &mut |t, w| {
            let c = d + w;
            if c < dist[t as usize] {
                relaxed.push((t, c));
            }
        });
        for (t, c) in relaxed {
            if c < dist[t as usize] {
                dist[t as usize] = c;
                updates[t as usize] += 1;
                if updates[t as usize] > n + 1 {
                    return Err(Error::InvalidFst("negative-cost cycle".into()));
                }
                if !queued[t as usize] {
                    queued[t as usize] = true;
                    queue.push_back(t);
                }
            }
        }
    }
    Ok(())
}

/// A best path through a machine.
#[derive(Clone, Debug, PartialEq)]
pub struct ShortestPath {
    /// Input labels along the path, epsilons removed.
    pub ilabels: Vec<Label>,
    /// Output labels along the path, epsilons removed.
    pub olabels: Vec<Label>,
    /// Path weight including the final weight.
    pub weight: TropicalWeight,
    pub states: Vec<StateId>,
    pub arcs: Vec<Arc<TropicalWeight>>,
}

/// The minimum-cost accepting path.
///
/// Ties are broken towards the lowest final state id, and along the path
/// towards the predecessor with the lowest state id, then the lowest arc
/// position. Returns [`Error::EmptyResult`] when nothing is accepted.
pub fn shortest_path(f: &Wfst<TropicalWeight>) -> Result<ShortestPath> {
    let n = f.num_states();
    let start = f.start().ok_or(Error::EmptyResult)?;
    let mut dist = vec![f64::INFINITY; n];
    // (predecessor state, arc index)
    let mut back: Vec<Option<(StateId, usize)>> = vec![None; n];
    dist[start as usize] = 0.0;

    let better = |c: f64, cur: f64, cand: (StateId, usize), prev: Option<(StateId, usize)>| {
        c < cur || (c == cur && prev.is_some_and(|p| cand < p))
    };

    if let Some(order) = f.topological_order() {
        for s in order {
            let d = dist[s as usize];
            if d == f64::INFINITY {
                continue;
            }
            for (i, a) in f.arcs(s).iter().enumerate() {
                let t = a.nextstate as usize;
                let c = d + a.weight.value();
                if better(c, dist[t], (s, i), back[t]) && t != start as usize {
                    dist[t] = c;
                    back[t] = Some((s, i));
                }
            }
        }
    } else {
        let mut queue = VecDeque::from([start]);
        let mut queued = vec![false; n];
        let mut updates = vec![0usize; n];
        queued[start as usize] = true;
        while let Some(s) = queue.pop_front() {
            queued[s as usize] = false;
            let d = dist[s as usize];
            for (i, a) in f.arcs(s).iter().enumerate() {
                let t = a.nextstate as usize;
                let c = d + a.weight.value();
                if t != start as usize && better(c, dist[t], (s, i), back[t]) {
                    let strictly = c < dist[t];
                    dist[t] = c;
                    back[t] = Some((s, i));
                    if strictly {
                        updates[t] += 1;
                        if updates[t] > n + 1 {
                            return Err(Error::InvalidFst("negative-cost cycle".into()));
                        }
                        if !queued[t] {
                            queued[t] = true;
                            queue.push_back(t as StateId);
                        }
                    }
                }
            }
        }
    }

    let mut best: Option<(f64, StateId)> = None;
    for s in f.states() {
        let fw = f.final_weight(s).value();
        let c = dist[s as usize] + fw;
        if c < f64::INFINITY && best.is_none_or(|(b, _)| c < b) {
            best = Some((c, s));
        }
    }
    let (cost, last) = best.ok_or(Error::EmptyResult)?;

    let mut states = vec![last];
    let mut arcs = Vec::new();
    let mut cur = last;
    while let Some((p, i)) = back[cur as usize] {
        arcs.push(f.arcs(p)[i]);
        states.push(p);
        cur = p;
        if states.len() > n + 1 {
            return Err(Error::InvalidFst("cycle in best-path back-pointers".into()));
        }
    }
    states.reverse();
    arcs.reverse();
    Ok(ShortestPath {
        ilabels: arcs.iter().map(|a| a.ilabel).filter(|&l| l != EPSILON).collect(),
        olabels: arcs.iter().map(|a| a.olabel).filter(|&l| l != EPSILON).collect(),
        weight: TropicalWeight::new(cost),
        states,
        arcs,
    })
}

/// Removes arcs and final weights that lie on no accepting path within
/// `beam` of the best path (weights read as costs), then trims.
pub fn prune<W: Semiring>(f: &Wfst<W>, beam: f64) -> Result<Wfst<W>> {
    if !(beam > 0.0) {
        return Err(Error::Config(format!("beam must be positive, got {beam}")));
    }
    let alpha = shortest_distance(f)?;
    let beta = reverse_distance(f)?;
    let Some(start) = f.start() else {
        return Ok(f.clone());
    };
    let best = beta[start as usize];
    if best == f64::INFINITY {
        return Ok(trim(f));
    }
    let limit = best + beam + 1e-9 * best.abs().max(1.0);
    let mut b = Wfst::builder(f.isyms().clone(), f.osyms().clone());
    b.add_states(f.num_states());
    b.set_start(start);
    for s in f.states() {
        let a_s = alpha[s as usize];
        if a_s == f64::INFINITY {
            continue;
        }
        let fw = f.final_weight(s);
        if a_s + fw.value() <= limit {
            b.set_final(s, fw);
        }
        for a in f.arcs(s) {
            if a_s + a.weight.value() + beta[a.nextstate as usize] <= limit {
                b.add_arc(s, *a);
            }
        }
    }
    Ok(trim(&b.build()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fst::symbols::SymbolTable;

    fn machine(n: usize, arcs: &[(u32, u32, u32, f64)], finals: &[(u32, f64)]) -> Wfst<TropicalWeight> {
        let s = SymbolTable::from_symbols(["a", "b", "c"]).into_shared();
        let mut b = Wfst::builder(s.clone(), s);
        b.add_states(n);
        b.set_start(0);
        for &(src, dst, l, w) in arcs {
            b.add_arc(src, Arc::new(l, l, TropicalWeight::new(w), dst));
        }
        for &(q, w) in finals {
            b.set_final(q, TropicalWeight::new(w));
        }
        b.build().unwrap()
    }

    #[test]
    fn picks_cheaper_parallel_arc() {
        let f = machine(2, &[(0, 1, 1, 2.0), (0, 1, 2, 1.0)], &[(1, 0.0)]);
        let p = shortest_path(&f).unwrap();
        assert_eq!(p.weight.value(), 1.0);
        assert_eq!(p.ilabels, vec![2]);
    }

    #[test]
    fn single_path_total() {
        let f = machine(3, &[(0, 1, 1, 0.5), (1, 2, 2, 0.25)], &[(2, 0.0)]);
        let p = shortest_path(&f).unwrap();
        assert_eq!(p.weight.value(), 0.75);
        assert_eq!(p.states, vec![0, 1, 2]);
    }

    #[test]
    fn final_weight_counts() {
        let f = machine(3, &[(0, 1, 1, 1.0), (0, 2, 2, 2.0)], &[(1, 5.0), (2, 0.0)]);
        assert_eq!(shortest_path(&f).unwrap().ilabels, vec![2]);
    }

    #[test]
    fn ties_prefer_lowest_state() {
        let f = machine(3, &[(0, 2, 1, 1.0), (0, 1, 2, 1.0)], &[(1, 0.0), (2, 0.0)]);
        let p = shortest_path(&f).unwrap();
        assert_eq!(p.states, vec![0, 1]);
    }

    #[test]
    fn no_accepting_path_is_explicit() {
        let f = machine(2, &[(0, 1, 1, 1.0)], &[]);
        assert!(matches!(shortest_path(&f), Err(Error::EmptyResult)));
    }

    #[test]
    fn cyclic_machine_shortest_path() {
        let f = machine(2, &[(0, 0, 1, 1.0), (0, 1, 2, 3.0)], &[(1, 0.0)]);
        let p = shortest_path(&f).unwrap();
        assert_eq!(p.weight.value(), 3.0);
    }

    #[test]
    fn prune_keeps_arcs_near_best() {
        let f = machine(2, &[(0, 1, 1, 1.0), (0, 1, 2, 2.5), (0, 1, 3, 4.0)], &[(1, 0.0)]);
        let p = prune(&f, 2.0).unwrap();
        let kept: Vec<_> = p.arcs(0).iter().map(|a| a.ilabel).collect();
        assert_eq!(kept, vec![1, 2]);
    }
}
