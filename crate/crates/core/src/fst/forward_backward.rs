use crate::error::{Error, Result};
use crate::fst::semiring::{LogWeight, Semiring};
use crate::fst::wfst::{ParamId, StateId, Wfst};

/// Forward and backward potentials of an acyclic log-semiring machine.
#[derive(Clone, Debug)]
pub struct Posteriors {
    /// ⊕ over all accepting paths, computed by the forward pass.
    pub total: LogWeight,
    /// The same quantity computed by the backward pass.
    pub backward_total: LogWeight,
    pub alpha: Vec<LogWeight>,
    pub beta: Vec<LogWeight>,
    /// Posterior probability of each arc, indexed `[state][arc position]`.
    pub arc_posteriors: Vec<Vec<f64>>,
}

impl Posteriors {
    /// Sums arc posteriors by arc tag.
    pub fn tag_counts(&self, f: &Wfst<LogWeight>, mut add: impl FnMut(ParamId, f64)) {
        for s in f.states() {
            for (a, &p) in f.arcs(s).iter().zip(&self.arc_posteriors[s as usize]) {
                if let Some(tag) = a.tag {
                    if p > 0.0 {
                        add(tag, p);
                    }
                }
            }
        }
    }
}

/// Runs forward–backward over an acyclic lattice.
///
/// Fails with [`Error::Cyclic`] on cyclic input and [`Error::EmptyResult`]
/// when no accepting path exists.
pub fn forward_backward(f: &Wfst<LogWeight>) -> Result<Posteriors> {
    let order = f.topological_order().ok_or(Error::Cyclic)?;
    let start = f.start().ok_or(Error::EmptyResult)?;
    let n = f.num_states();

    let mut alpha = vec![LogWeight::zero(); n];
    alpha[start as usize] = LogWeight::one();
    let mut total = LogWeight::zero();
    for &s in &order {
        let a_s = alpha[s as usize];
        if a_s.is_zero() {
            continue;
        }
        total = total.plus(a_s.times(f.final_weight(s)));
        for a in f.arcs(s) {
            let t = a.nextstate as usize;
            alpha[t] = alpha[t].plus(a_s.times(a.weight));
        }
    }

    let mut beta = vec![LogWeight::zero(); n];
    for &s in order.iter().rev() {
        let mut b = f.final_weight(s);
        for a in f.arcs(s) {
            b = b.plus(a.weight.times(beta[a.nextstate as usize]));
        }
        beta[s as usize] = b;
    }
    let backward_total = beta[start as usize];

    if total.is_zero() {
        return Err(Error::EmptyResult);
    }

    let z = total.value();
    let arc_posteriors = (0..n as StateId)
        .map(|s| {
            let a_s = alpha[s as usize];
            f.arcs(s)
                .iter()
                .map(|a| {
                    let c = a_s.times(a.weight).times(beta[a.nextstate as usize]);
                    if c.is_zero() {
                        0.0
                    } else {
                        (z - c.value()).exp()
                    }
                })
                .collect()
        })
        .collect();

    Ok(Posteriors {
        total,
        backward_total,
        alpha,
        beta,
        arc_posteriors,
    })
}
