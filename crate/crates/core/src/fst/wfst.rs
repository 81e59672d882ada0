use std::sync::Arc as Shared;

use crate::error::{Error, Result};
use crate::fst::semiring::Semiring;
use crate::fst::symbols::{Label, SymbolTable, Symbols};

pub type StateId = u32;

/// Identifier of the trainable parameter an arc weight was drawn from.
pub type ParamId = u32;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc<W> {
    pub ilabel: Label,
    pub olabel: Label,
    pub weight: W,
    pub nextstate: StateId,
    pub tag: Option<ParamId>,
}

impl<W: Semiring> Arc<W> {
    pub fn new(ilabel: Label, olabel: Label, weight: W, nextstate: StateId) -> Self {
        Arc {
            ilabel,
            olabel,
            weight,
            nextstate,
            tag: None,
        }
    }

    pub fn tagged(mut self, tag: ParamId) -> Self {
        self.tag = Some(tag);
        self
    }
}

#[derive(Clone, Debug)]
struct StateData<W> {
    arcs: Vec<Arc<W>>,
    final_weight: W,
}

/// A weighted transducer in vector representation.
///
/// Built through [`WfstBuilder`], which validates arc targets and labels;
/// afterwards the machine is read-only and every algorithm returns a new one.
#[derive(Clone, Debug)]
pub struct Wfst<W: Semiring> {
    states: Vec<StateData<W>>,
    start: Option<StateId>,
    isyms: Symbols,
    osyms: Symbols,
    input_sorted: bool,
    output_sorted: bool,
}

pub struct WfstBuilder<W: Semiring> {
    states: Vec<StateData<W>>,
    start: Option<StateId>,
    isyms: Symbols,
    osyms: Symbols,
}

impl<W: Semiring> WfstBuilder<W> {
    pub fn new(isyms: Symbols, osyms: Symbols) -> Self {
        WfstBuilder {
            states: Vec::new(),
            start: None,
            isyms,
            osyms,
        }
    }

    pub fn add_state(&mut self) -> StateId {
        self.states.push(StateData {
            arcs: Vec::new(),
            final_weight: W::zero(),
        });
        (self.states.len() - 1) as StateId
    }

    pub fn add_states(&mut self, n: usize) {
        for _ in 0..n {
            self.add_state();
        }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn set_start(&mut self, s: StateId) {
        self.start = Some(s);
    }

    pub fn set_final(&mut self, s: StateId, w: W) {
        self.states[s as usize].final_weight = w;
    }

    pub fn add_arc(&mut self, s: StateId, arc: Arc<W>) {
        self.states[s as usize].arcs.push(arc);
    }

    pub fn build(self) -> Result<Wfst<W>> {
        let n = self.states.len();
        if let Some(s) = self.start {
            if s as usize >= n {
                return Err(Error::InvalidFst(format!("start state {s} out of range")));
            }
        }
        for (s, st) in self.states.iter().enumerate() {
            for a in &st.arcs {
                if a.nextstate as usize >= n {
                    return Err(Error::InvalidFst(format!(
                        "arc from {s} targets missing state {}",
                        a.nextstate
                    )));
                }
                if !self.isyms.contains(a.ilabel) || !self.osyms.contains(a.olabel) {
                    return Err(Error::InvalidFst(format!(
                        "arc from {s} has label {}:{} outside its symbol tables",
                        a.ilabel, a.olabel
                    )));
                }
            }
        }
        Ok(Wfst::from_parts(self.states, self.start, self.isyms, self.osyms))
    }
}

impl<W: Semiring> Wfst<W> {
    fn from_parts(
        states: Vec<StateData<W>>,
        start: Option<StateId>,
        isyms: Symbols,
        osyms: Symbols,
    ) -> Self {
        let sorted_by = |key: fn(&Arc<W>) -> Label| {
            states
                .iter()
                .all(|st| st.arcs.windows(2).all(|w| key(&w[0]) <= key(&w[1])))
        };
        let input_sorted = sorted_by(|a| a.ilabel);
        let output_sorted = sorted_by(|a| a.olabel);
        Wfst {
            states,
            start,
            isyms,
            osyms,
            input_sorted,
            output_sorted,
        }
    }

    pub fn builder(isyms: Symbols, osyms: Symbols) -> WfstBuilder<W> {
        WfstBuilder::new(isyms, osyms)
    }

    /// A machine with no states, accepting nothing.
    pub fn empty(isyms: Symbols, osyms: Symbols) -> Self {
        Wfst::from_parts(Vec::new(), None, isyms, osyms)
    }

    /// Linear acceptor over `labels` with unit weights.
    pub fn string_acceptor(syms: Symbols, labels: &[Label]) -> Result<Self> {
        let mut b = WfstBuilder::new(syms.clone(), syms);
        b.add_states(labels.len() + 1);
        b.set_start(0);
        for (i, &l) in labels.iter().enumerate() {
            b.add_arc(i as StateId, Arc::new(l, l, W::one(), i as StateId + 1));
        }
        b.set_final(labels.len() as StateId, W::one());
        b.build()
    }

    pub fn from_tokens(syms: Symbols, tokens: &[&str]) -> Result<Self> {
        let labels = syms.labels_of(tokens)?;
        Self::string_acceptor(syms, &labels)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.states.iter().map(|s| s.arcs.len()).sum()
    }

    pub fn start(&self) -> Option<StateId> {
        self.start
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        0..self.states.len() as StateId
    }

    #[inline]
    pub fn arcs(&self, s: StateId) -> &[Arc<W>] {
        &self.states[s as usize].arcs
    }

    #[inline]
    pub fn final_weight(&self, s: StateId) -> W {
        self.states[s as usize].final_weight
    }

    pub fn is_final(&self, s: StateId) -> bool {
        !self.final_weight(s).is_zero()
    }

    pub fn isyms(&self) -> &Symbols {
        &self.isyms
    }

    pub fn osyms(&self) -> &Symbols {
        &self.osyms
    }

    pub fn is_input_sorted(&self) -> bool {
        self.input_sorted
    }

    pub fn is_output_sorted(&self) -> bool {
        self.output_sorted
    }

    pub fn is_empty(&self) -> bool {
        self.start.is_none()
    }

    pub fn is_acceptor(&self) -> bool {
        self.states
            .iter()
            .all(|st| st.arcs.iter().all(|a| a.ilabel == a.olabel))
    }

    pub fn has_tags(&self) -> bool {
        self.states
            .iter()
            .any(|st| st.arcs.iter().any(|a| a.tag.is_some()))
    }

    /// Reinterprets weights in another semiring; stored values are unchanged.
    pub fn map_weights<V: Semiring>(&self) -> Wfst<V> {
        self.map(|a| Some(Arc {
            ilabel: a.ilabel,
            olabel: a.olabel,
            weight: V::new(a.weight.value()),
            nextstate: a.nextstate,
            tag: a.tag,
        }), |w| V::new(w.value()))
    }

    /// Rewrites every arc (dropping those mapped to `None`) and final weight.
    pub fn map<V: Semiring>(
        &self,
        mut arc_fn: impl FnMut(&Arc<W>) -> Option<Arc<V>>,
        mut final_fn: impl FnMut(W) -> V,
    ) -> Wfst<V> {
        let states = self
            .states
            .iter()
            .map(|st| StateData {
                arcs: st.arcs.iter().filter_map(&mut arc_fn).collect(),
                final_weight: if st.final_weight.is_zero() {
                    V::zero()
                } else {
                    final_fn(st.final_weight)
                },
            })
            .collect();
        Wfst::from_parts(states, self.start, self.isyms.clone(), self.osyms.clone())
    }

    /// Copies the machine with new symbol tables; labels must stay in range.
    pub fn with_symbols(&self, isyms: Symbols, osyms: Symbols) -> Result<Self> {
        let mut b = self.to_builder();
        b.isyms = isyms;
        b.osyms = osyms;
        b.build()
    }

    pub fn to_builder(&self) -> WfstBuilder<W> {
        WfstBuilder {
            states: self.states.clone(),
            start: self.start,
            isyms: self.isyms.clone(),
            osyms: self.osyms.clone(),
        }
    }

    /// Keeps the input (`output == false`) or output tape on both sides.
    pub fn project(&self, output: bool) -> Self {
        let syms = if output { self.osyms.clone() } else { self.isyms.clone() };
        let mut f = self.map(
            |a| {
                let l = if output { a.olabel } else { a.ilabel };
                Some(Arc { ilabel: l, olabel: l, ..*a })
            },
            |w| w,
        );
        f.isyms = syms.clone();
        f.osyms = syms;
        f
    }

    /// Topological order of all states, or `None` if a cycle exists.
    pub fn topological_order(&self) -> Option<Vec<StateId>> {
        let n = self.states.len();
        let mut indeg = vec![0u32; n];
        for st in &self.states {
            for a in &st.arcs {
                indeg[a.nextstate as usize] += 1;
            }
        }
        let mut order = Vec::with_capacity(n);
        let mut stack: Vec<StateId> = (0..n as StateId)
            .rev()
            .filter(|&s| indeg[s as usize] == 0)
            .collect();
        while let Some(s) = stack.pop() {
            order.push(s);
            for a in self.arcs(s).iter().rev() {
                let d = &mut indeg[a.nextstate as usize];
                *d -= 1;
                if *d == 0 {
                    stack.push(a.nextstate);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    pub fn input_symbols_equal(&self, table: &SymbolTable) -> bool {
        *self.isyms == *table
    }
}

/// True when both handles refer to tables with identical contents.
pub(crate) fn same_symbols(a: &Symbols, b: &Symbols) -> bool {
    Shared::ptr_eq(a, b) || **a == **b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fst::semiring::TropicalWeight;

    fn syms() -> Symbols {
        SymbolTable::from_symbols(["a", "b"]).into_shared()
    }

    #[test]
    fn builder_rejects_dangling_arcs() {
        let mut b = WfstBuilder::<TropicalWeight>::new(syms(), syms());
        let s = b.add_state();
        b.set_start(s);
        b.add_arc(s, Arc::new(1, 1, TropicalWeight::one(), 7));
        assert!(matches!(b.build(), Err(Error::InvalidFst(_))));
    }

    #[test]
    fn builder_rejects_unknown_labels() {
        let mut b = WfstBuilder::<TropicalWeight>::new(syms(), syms());
        let s = b.add_state();
        b.add_arc(s, Arc::new(9, 1, TropicalWeight::one(), s));
        assert!(b.build().is_err());
    }

    #[test]
    fn string_acceptor_is_linear_and_acyclic() {
        let f = Wfst::<TropicalWeight>::from_tokens(syms(), &["a", "b", "a"]).unwrap();
        assert_eq!(f.num_states(), 4);
        assert!(f.is_acceptor());
        assert_eq!(f.topological_order().unwrap(), vec![0, 1, 2, 3]);
        assert!(f.is_final(3));
    }

    #[test]
    fn detects_cycles() {
        let mut b = WfstBuilder::<TropicalWeight>::new(syms(), syms());
        let s = b.add_state();
        b.set_start(s);
        b.add_arc(s, Arc::new(1, 1, TropicalWeight::one(), s));
        assert!(!b.build().unwrap().is_acyclic());
    }
}
