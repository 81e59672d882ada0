//! Brute-force references: random small acyclic machines and exhaustive
//! path enumeration.

use std::collections::BTreeMap;

use decipher_fst::fst::{Arc, Label, LogWeight, Semiring, StateId, SymbolTable, Symbols, TropicalWeight, Wfst};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// One accepting path: its arc positions `(state, index)`, labels with
/// epsilons removed, and total cost including the final weight.
#[derive(Clone, Debug)]
pub struct Path {
    pub arcs: Vec<(StateId, usize)>,
    pub input: Vec<Label>,
    pub output: Vec<Label>,
    pub cost: f64,
}

pub fn alphabet(k: usize) -> Symbols {
    SymbolTable::from_symbols((0..k).map(|i| ((b'a' + i as u8) as char).to_string())).into_shared()
}

/// An acyclic machine with up to `max_states` states over `syms`
/// (labels `0..=syms.len()-1`, so epsilons included). Arcs only go from a
/// state to a higher-numbered one, so every machine has finitely many paths,
/// and a chain through all states guarantees at least one of them.
pub fn random_acyclic<W: Semiring>(rng: &mut ChaCha8Rng, syms: &Symbols, max_states: usize) -> Wfst<W> {
    let n = rng.gen_range(1..=max_states);
    let k = syms.len() as Label;
    let mut b = Wfst::<W>::builder(syms.clone(), syms.clone());
    b.add_states(n);
    b.set_start(0);
    for s in 0..n {
        for t in s + 1..n {
            let lo = usize::from(t == s + 1);
            for _ in 0..rng.gen_range(lo..=2) {
                let i = if rng.gen_bool(0.25) { 0 } else { rng.gen_range(1..k) };
                let o = if rng.gen_bool(0.25) { 0 } else { rng.gen_range(1..k) };
                let w = W::new((rng.gen_range(0.0..3.0f64) * 8.0).round() / 8.0);
                b.add_arc(s as StateId, Arc::new(i, o, w, t as StateId));
            }
        }
        if s + 1 == n || rng.gen_bool(0.3) {
            b.set_final(s as StateId, W::new(rng.gen_range(0.0..1.0)));
        }
    }
    b.build().unwrap()
}

/// Every accepting path.
pub fn paths<W: Semiring>(f: &Wfst<W>) -> Vec<Path> {
    let mut out = Vec::new();
    let Some(start) = f.start() else {
        return out;
    };
    let mut stack = vec![(start, Path { arcs: vec![], input: vec![], output: vec![], cost: 0.0 })];
    while let Some((s, p)) = stack.pop() {
        if f.is_final(s) {
            let mut done = p.clone();
            done.cost += f.final_weight(s).value();
            out.push(done);
        }
        for (i, a) in f.arcs(s).iter().enumerate() {
            let mut q = p.clone();
            q.arcs.push((s, i));
            if a.ilabel != 0 {
                q.input.push(a.ilabel);
            }
            if a.olabel != 0 {
                q.output.push(a.olabel);
            }
            q.cost += a.weight.value();
            stack.push((a.nextstate, q));
        }
    }
    out
}

pub type Relation = BTreeMap<(Vec<Label>, Vec<Label>), f64>;

/// The weighted relation of a machine: ⊕ of path costs per string pair.
pub fn relation<W: Semiring>(f: &Wfst<W>) -> Relation {
    let mut r = Relation::new();
    for p in paths(f) {
        let e = r.entry((p.input, p.output)).or_insert(W::zero().value());
        *e = W::new(*e).plus(W::new(p.cost)).value();
    }
    r
}

/// Relational composition computed from two enumerated relations.
pub fn compose_relations<W: Semiring>(a: &Relation, b: &Relation) -> Relation {
    let mut r = Relation::new();
    for ((x, y), wa) in a {
        for ((y2, z), wb) in b {
            if y == y2 {
                let e = r.entry((x.clone(), z.clone())).or_insert(W::zero().value());
                *e = W::new(*e).plus(W::new(wa + wb)).value();
            }
        }
    }
    r
}

/// Same string pairs, and weights within `tol`.
pub fn relations_match(a: &Relation, b: &Relation, tol: f64) -> Result<(), String> {
    if a.keys().ne(b.keys()) {
        return Err(format!("path sets differ: {:?} vs {:?}", a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>()));
    }
    for (k, wa) in a {
        let wb = b[k];
        if (wa - wb).abs() > tol {
            return Err(format!("{k:?}: {wa} vs {wb}"));
        }
    }
    Ok(())
}

/// Log-semiring total over all paths.
pub fn total_cost(ps: &[Path]) -> f64 {
    ps.iter().fold(LogWeight::zero(), |acc, p| acc.plus(LogWeight::new(p.cost))).value()
}

/// Posterior of every arc, as the normalized mass of the paths through it.
pub fn arc_posteriors<W: Semiring>(f: &Wfst<W>) -> Vec<Vec<f64>> {
    let ps = paths(f);
    let total = total_cost(&ps);
    let mut post: Vec<Vec<f64>> = f.states().map(|s| vec![0.0; f.arcs(s).len()]).collect();
    for p in &ps {
        let share = (total - p.cost).exp();
        for &(s, i) in &p.arcs {
            post[s as usize][i] += share;
        }
    }
    post
}

pub fn min_cost(ps: &[Path]) -> f64 {
    ps.iter().map(|p| p.cost).fold(f64::INFINITY, f64::min)
}

/// Reinterprets a tropical machine in the log semiring.
pub fn as_log(f: &Wfst<TropicalWeight>) -> Wfst<LogWeight> {
    f.map_weights()
}
