//! Composition of weighted transducers.
//!
//! Composition is computed by exploring the reachable part of a product
//! machine. Epsilon moves are sequenced by a two-state filter: after the right
//! operand takes an input-epsilon move, the left operand may not take an
//! output-epsilon move until the next matched label. Each pair of operand
//! paths therefore yields exactly one composed path.

use std::borrow::Cow;
use std::hash::Hash;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::fst::ops::{arc_sort, trim, SortKey};
use crate::fst::semiring::Semiring;
use crate::fst::shortest::prune;
use crate::fst::symbols::{Label, Symbols, EPSILON};
use crate::fst::wfst::{same_symbols, Arc, ParamId, StateId, Wfst};

pub(crate) struct ExArc<W, K> {
    pub ilabel: Label,
    pub olabel: Label,
    pub weight: W,
    pub tag: Option<ParamId>,
    pub next: K,
}

/// On-demand view of a machine's states; implemented by stored machines and
/// by products of machines.
pub(crate) trait Expand<W: Semiring> {
    type Key: Copy + Eq + Hash;

    fn start(&self) -> Option<Self::Key>;
    fn final_weight(&self, k: Self::Key) -> W;
    fn expand(&self, k: Self::Key, out: &mut Vec<ExArc<W, Self::Key>>) -> Result<()>;
    /// State of the leftmost operand, used to order beam search.
    fn primary(&self, k: Self::Key) -> StateId;
    fn isyms(&self) -> &Symbols;
    fn osyms(&self) -> &Symbols;
}

impl<W: Semiring> Expand<W> for Wfst<W> {
    type Key = StateId;

    fn start(&self) -> Option<StateId> {
        Wfst::start(self)
    }

    fn final_weight(&self, k: StateId) -> W {
        Wfst::final_weight(self, k)
    }

    fn expand(&self, k: StateId, out: &mut Vec<ExArc<W, StateId>>) -> Result<()> {
        out.extend(self.arcs(k).iter().map(|a| ExArc {
            ilabel: a.ilabel,
            olabel: a.olabel,
            weight: a.weight,
            tag: a.tag,
            next: a.nextstate,
        }));
        Ok(())
    }

    fn primary(&self, k: StateId) -> StateId {
        k
    }

    fn isyms(&self) -> &Symbols {
        Wfst::isyms(self)
    }

    fn osyms(&self) -> &Symbols {
        Wfst::osyms(self)
    }
}

struct Product<'a, W: Semiring, L> {
    left: &'a L,
    right: Cow<'a, Wfst<W>>,
}

impl<'a, W: Semiring, L: Expand<W>> Product<'a, W, L> {
    fn new(left: &'a L, right: &'a Wfst<W>) -> Result<Self> {
        if !same_symbols(left.osyms(), right.isyms()) {
            return Err(Error::SymbolMismatch(
                "output symbols of the left operand differ from input symbols of the right"
                    .into(),
            ));
        }
        let right = if right.is_input_sorted() {
            Cow::Borrowed(right)
        } else {
            Cow::Owned(arc_sort(right, SortKey::Input))
        };
        Ok(Product { left, right })
    }
}

fn merge_tags(a: Option<ParamId>, b: Option<ParamId>) -> Result<Option<ParamId>> {
    match (a, b) {
        (Some(left), Some(right)) => Err(Error::TagConflict { left, right }),
        (a, None) => Ok(a),
        (None, b) => Ok(b),
    }
}

impl<W: Semiring, L: Expand<W>> Expand<W> for Product<'_, W, L> {
    type Key = (L::Key, StateId, bool);

    fn start(&self) -> Option<Self::Key> {
        Some((self.left.start()?, self.right.start()?, false))
    }

    fn final_weight(&self, (l, r, _): Self::Key) -> W {
        self.left.final_weight(l).times(self.right.final_weight(r))
    }

    fn expand(&self, (l, r, blocked): Self::Key, out: &mut Vec<ExArc<W, Self::Key>>) -> Result<()> {
        let mut left_arcs = Vec::new();
        self.left.expand(l, &mut left_arcs)?;
        let rarcs = self.right.arcs(r);
        let eps_end = rarcs.partition_point(|b| b.ilabel == EPSILON);

        for a in left_arcs {
            if a.olabel == EPSILON {
                if !blocked {
                    out.push(ExArc {
                        ilabel: a.ilabel,
                        olabel: EPSILON,
                        weight: a.weight,
                        tag: a.tag,
                        next: (a.next, r, false),
                    });
                }
                continue;
            }
            let lo = eps_end + rarcs[eps_end..].partition_point(|b| b.ilabel < a.olabel);
            for b in rarcs[lo..].iter().take_while(|b| b.ilabel == a.olabel) {
                let weight = a.weight.times(b.weight);
                if weight.is_zero() {
                    continue;
                }
                out.push(ExArc {
                    ilabel: a.ilabel,
                    olabel: b.olabel,
                    weight,
                    tag: merge_tags(a.tag, b.tag)?,
                    next: (a.next, b.nextstate, false),
                });
            }
        }
        for b in &rarcs[..eps_end] {
            out.push(ExArc {
                ilabel: EPSILON,
                olabel: b.olabel,
                weight: b.weight,
                tag: b.tag,
                next: (l, b.nextstate, true),
            });
        }
        Ok(())
    }

    fn primary(&self, (l, _, _): Self::Key) -> StateId {
        self.left.primary(l)
    }

    fn isyms(&self) -> &Symbols {
        self.left.isyms()
    }

    fn osyms(&self) -> &Symbols {
        self.right.osyms()
    }
}

/// Builds the reachable part of `e`.
///
/// With a search beam, states are expanded in order of the leftmost operand's
/// state id and a state is skipped when its best forward cost exceeds the best
/// cost seen in its slice by more than the beam. This requires the leftmost
/// operand to be topologically numbered (every arc goes to a larger id or
/// stays within the slice through other operands); otherwise the search beam
/// is ignored.
fn materialize<W: Semiring, E: Expand<W>>(e: &E, search_beam: Option<f64>) -> Result<Wfst<W>> {
    let mut b = Wfst::builder(e.isyms().clone(), e.osyms().clone());
    let Some(start) = e.start() else {
        return b.build();
    };

    let mut ids: FxHashMap<E::Key, StateId> = FxHashMap::default();
    let mut keys: Vec<E::Key> = Vec::new();
    let mut intern = |k: E::Key, b: &mut crate::fst::wfst::WfstBuilder<W>, keys: &mut Vec<E::Key>| {
        *ids.entry(k).or_insert_with(|| {
            keys.push(k);
            b.add_state()
        })
    };

    let s0 = intern(start, &mut b, &mut keys);
    b.set_start(s0);
    let mut scratch = Vec::new();

    match search_beam {
        None => {
            let mut i = 0;
            while i < keys.len() {
                let k = keys[i];
                let s = i as StateId;
                b.set_final(s, e.final_weight(k));
                scratch.clear();
                e.expand(k, &mut scratch)?;
                for a in scratch.drain(..) {
                    let t = intern(a.next, &mut b, &mut keys);
                    b.add_arc(s, Arc { ilabel: a.ilabel, olabel: a.olabel, weight: a.weight, nextstate: t, tag: a.tag });
                }
                i += 1;
            }
        }
        Some(beam) => {
            let mut alpha: Vec<f64> = vec![0.0];
            let mut slices: Vec<Vec<StateId>> = Vec::new();
            let slot = |slices: &mut Vec<Vec<StateId>>, p: usize| {
                if slices.len() <= p {
                    slices.resize_with(p + 1, Vec::new);
                }
            };
            let p0 = e.primary(start) as usize;
            slot(&mut slices, p0);
            slices[p0].push(s0);
            let mut p = p0;
            while p < slices.len() {
                let mut best = slices[p]
                    .iter()
                    .map(|&s| alpha[s as usize])
                    .fold(f64::INFINITY, f64::min);
                let mut j = 0;
                while j < slices[p].len() {
                    let s = slices[p][j];
                    j += 1;
                    let a_s = alpha[s as usize];
                    if a_s > best + beam {
                        continue;
                    }
                    let k = keys[s as usize];
                    b.set_final(s, e.final_weight(k));
                    scratch.clear();
                    e.expand(k, &mut scratch)?;
                    for a in scratch.drain(..) {
                        let before = keys.len();
                        let t = intern(a.next, &mut b, &mut keys);
                        let cost = a_s + a.weight.value();
                        if keys.len() > before {
                            alpha.push(cost);
                            let q = e.primary(a.next) as usize;
                            if q < p {
                                // Not topologically numbered; fall back to exhaustive search.
                                return materialize(e, None);
                            }
                            slot(&mut slices, q);
                            slices[q].push(t);
                        } else if cost < alpha[t as usize] {
                            alpha[t as usize] = cost;
                        }
                        if e.primary(a.next) as usize == p {
                            best = best.min(alpha[t as usize]);
                        }
                        b.add_arc(s, Arc { ilabel: a.ilabel, olabel: a.olabel, weight: a.weight, nextstate: t, tag: a.tag });
                    }
                }
                p += 1;
            }
        }
    }
    b.build()
}

/// Weighted composition `a ∘ b`, trimmed.
pub fn compose<W: Semiring>(a: &Wfst<W>, b: &Wfst<W>) -> Result<Wfst<W>> {
    let product = Product::new(a, b)?;
    Ok(trim(&materialize(&product, None)?))
}

/// Pruning applied while composing a chain of machines.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ComposeOptions {
    /// Keep only arcs on some path within this cost of the best path.
    pub prune_beam: Option<f64>,
    /// Forward beam applied while exploring, slice by slice along the first
    /// machine. Approximate: the best path can be lost.
    pub search_beam: Option<f64>,
}

impl ComposeOptions {
    pub fn exact(beam: Option<f64>) -> Self {
        ComposeOptions {
            prune_beam: beam,
            search_beam: None,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, b) in [("beam", self.prune_beam), ("search beam", self.search_beam)] {
            if let Some(b) = b {
                if !(b > 0.0) {
                    return Err(Error::Config(format!("{name} must be positive, got {b}")));
                }
            }
        }
        Ok(())
    }
}

/// Three-way composition `x ∘ la ∘ g` in a single pass, without building
/// `la ∘ g`. With `beam`, arcs not on a path within `beam` of the best path
/// are removed. The result is trimmed.
pub fn compose3<W: Semiring>(
    x: &Wfst<W>,
    la: &Wfst<W>,
    g: &Wfst<W>,
    beam: Option<f64>,
) -> Result<Wfst<W>> {
    compose_chain(&[x, la, g], ComposeOptions::exact(beam))
}

/// Composes two to four machines left to right in one pass.
pub fn compose_chain<W: Semiring>(machines: &[&Wfst<W>], opts: ComposeOptions) -> Result<Wfst<W>> {
    opts.validate()?;
    let raw = match machines {
        [a, b] => materialize(&Product::new(*a, b)?, opts.search_beam)?,
        [a, b, c] => {
            let ab = Product::new(*a, b)?;
            materialize(&Product::new(&ab, c)?, opts.search_beam)?
        }
        [a, b, c, d] => {
            let ab = Product::new(*a, b)?;
            let abc = Product::new(&ab, c)?;
            materialize(&Product::new(&abc, d)?, opts.search_beam)?
        }
        _ => {
            return Err(Error::Config(format!(
                "compose_chain takes 2 to 4 machines, got {}",
                machines.len()
            )))
        }
    };
    match opts.prune_beam {
        Some(beam) => prune(&raw, beam),
        None => Ok(trim(&raw)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fst::semiring::{LogWeight, TropicalWeight as T};
    use crate::fst::symbols::SymbolTable;

    fn table(syms: &[&str]) -> Symbols {
        SymbolTable::from_symbols(syms).into_shared()
    }

    #[test]
    fn identity_transducer_preserves_acceptor() {
        let s = table(&["a", "b"]);
        let x = Wfst::<T>::from_tokens(s.clone(), &["a", "b"]).unwrap();
        let mut b = Wfst::builder(s.clone(), s.clone());
        let q = b.add_state();
        b.set_start(q);
        b.set_final(q, T::one());
        for l in [1, 2] {
            b.add_arc(q, Arc::new(l, l, T::one(), q));
        }
        let id = b.build().unwrap();
        let c = compose(&x, &id).unwrap();
        assert_eq!(c.num_states(), 3);
        let labels: Vec<_> = (0..2).map(|s| (c.arcs(s)[0].ilabel, c.arcs(s)[0].olabel)).collect();
        assert_eq!(labels, vec![(1, 1), (2, 2)]);
    }

    #[test]
    fn weights_multiply() {
        let sa = table(&["a"]);
        let sx = table(&["x"]);
        let sz = table(&["z"]);
        let single = |i: &Symbols, o: &Symbols, w: f64| {
            let mut b = Wfst::<T>::builder(i.clone(), o.clone());
            b.add_states(2);
            b.set_start(0);
            b.set_final(1, T::one());
            b.add_arc(0, Arc::new(1, 1, T::new(w), 1));
            b.build().unwrap()
        };
        let c = compose(&single(&sa, &sx, 1.0), &single(&sx, &sz, 2.0)).unwrap();
        assert_eq!(c.num_arcs(), 1);
        assert_eq!(c.arcs(0)[0].weight.value(), 3.0);
        assert_eq!(c.osyms().symbol(c.arcs(0)[0].olabel), Some("z"));
    }

    #[test]
    fn symbol_mismatch_is_a_configuration_error() {
        let a = Wfst::<T>::from_tokens(table(&["a"]), &["a"]).unwrap();
        let b = Wfst::<T>::from_tokens(table(&["b"]), &["b"]).unwrap();
        assert!(matches!(compose(&a, &b), Err(Error::SymbolMismatch(_))));
    }

    #[test]
    fn conflicting_tags_are_rejected() {
        let s = table(&["a"]);
        let tagged = |tag| {
            let mut b = Wfst::<LogWeight>::builder(s.clone(), s.clone());
            b.add_states(2);
            b.set_start(0);
            b.set_final(1, LogWeight::one());
            b.add_arc(0, Arc::new(1, 1, LogWeight::one(), 1).tagged(tag));
            b.build().unwrap()
        };
        assert!(matches!(compose(&tagged(1), &tagged(2)), Err(Error::TagConflict { .. })));
    }

    #[test]
    fn nonpositive_beam_is_rejected() {
        let s = table(&["a"]);
        let x = Wfst::<T>::from_tokens(s.clone(), &["a"]).unwrap();
        assert!(matches!(compose3(&x, &x, &x, Some(0.0)), Err(Error::Config(_))));
    }

    #[test]
    fn epsilons_on_both_sides_are_not_duplicated() {
        let s = table(&["x", "y"]);
        let mut a = Wfst::<LogWeight>::builder(s.clone(), s.clone());
        a.add_states(3);
        a.set_start(0);
        a.add_arc(0, Arc::new(1, 0, LogWeight::new(1.0), 1));
        a.add_arc(1, Arc::new(2, 2, LogWeight::new(1.0), 2));
        a.set_final(2, LogWeight::one());
        let mut b = Wfst::<LogWeight>::builder(s.clone(), s.clone());
        b.add_states(3);
        b.set_start(0);
        b.add_arc(0, Arc::new(0, 1, LogWeight::new(1.0), 1));
        b.add_arc(1, Arc::new(2, 2, LogWeight::new(1.0), 2));
        b.set_final(2, LogWeight::one());
        let c = compose(&a.build().unwrap(), &b.build().unwrap()).unwrap();
        let fb = crate::fst::forward_backward::forward_backward(&c).unwrap();
        assert!((fb.total.value() - 4.0).abs() < 1e-12);
    }
}
