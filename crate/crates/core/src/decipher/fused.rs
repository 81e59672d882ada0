//! Lattice computations over `acceptor(x) ∘ edit ∘ G` without building the
//! lattice.
//!
//! A lattice node is `(t, e, g)`: `t` phones consumed, edit state `e` and
//! grapheme-model state `g`. Substitutions and deletions move from slice `t`
//! to `t + 1`; insertions stay inside a slice, from `BASE` to `AFTER_INS`.
//! Forward–backward follows the epsilon arcs of `G` level by level through an
//! [`ArcTable`]; the Viterbi search uses an [`EmissionTable`] with epsilon
//! moves folded in. Forward values are rescaled to sum to one in every slice.

use crate::error::{Error, Result};
use crate::fst::symbols::{Label, EPSILON};
use crate::fst::wfst::StateId;

use super::alignment::AlignmentModel;
use super::lexical::LexicalModel;
use super::lm::{ArcTable, Combine, EmissionTable};

/// Edit-operation weights for one lexical model, laid out for slice access.
/// Probabilities for [`Combine::Sum`], costs for [`Combine::Min`].
#[derive(Clone, Debug)]
pub(crate) struct Channel {
    rows: usize,
    /// `[phone * rows + grapheme]`
    sub: Vec<f64>,
    /// `[grapheme]`
    ins: Vec<f64>,
    /// `[phone]`
    del: Vec<f64>,
    /// Graphemes each phone can substitute for, with their weights.
    sub_lists: Vec<Vec<(Label, f64)>>,
    mode: Combine,
}

impl Channel {
    pub fn new(lex: &LexicalModel, ali: &AlignmentModel, mode: Combine) -> Self {
        let rows = lex.num_rows();
        let cols = lex.num_cols();
        let none = match mode {
            Combine::Sum => 0.0,
            Combine::Min => f64::INFINITY,
        };
        let w = |row: Label, col: Label, op: f64| {
            let p = if lex.is_active(row, col) { lex.prob(row, col) * op } else { 0.0 };
            match mode {
                Combine::Sum => p,
                Combine::Min if p > 0.0 => -p.ln(),
                Combine::Min => f64::INFINITY,
            }
        };
        let mut sub = vec![none; rows * cols];
        for col in 1..cols as Label {
            for row in 1..rows as Label {
                sub[col as usize * rows + row as usize] = w(row, col, ali.sub);
            }
        }
        let mut ins = vec![none; rows];
        for row in 1..rows as Label {
            ins[row as usize] = w(row, EPSILON, ali.ins);
        }
        let mut del = vec![none; cols];
        for col in 1..cols as Label {
            del[col as usize] = w(EPSILON, col, ali.del);
        }
        let sub_lists = (0..cols)
            .map(|col| {
                (1..rows)
                    .map(|row| (row as Label, sub[col * rows + row]))
                    .filter(|&(_, w)| w != none)
                    .collect()
            })
            .collect();
        Channel {
            rows,
            sub,
            ins,
            del,
            sub_lists,
            mode,
        }
    }

    #[inline]
    fn sub_row(&self, phone: Label) -> &[f64] {
        &self.sub[phone as usize * self.rows..(phone as usize + 1) * self.rows]
    }
}

/// Active nodes of one slice; `vals[k][i]` belongs to edit state `k` of
/// `states[i]`.
#[derive(Default)]
struct Slice {
    states: Vec<StateId>,
    vals: [Vec<f64>; 3],
}

/// Dense accumulators indexed by grapheme-model state, with the list of
/// touched states in first-touch order.
struct Scratch {
    vals: [Vec<f64>; 3],
    seen: Vec<bool>,
    touched: Vec<StateId>,
    empty: f64,
}

impl Scratch {
    fn new(n: usize, empty: f64) -> Self {
        Scratch {
            vals: [vec![empty; n], vec![empty; n], vec![empty; n]],
            seen: vec![false; n],
            touched: Vec::new(),
            empty,
        }
    }

    #[inline]
    fn touch(&mut self, g: StateId) {
        if !self.seen[g as usize] {
            self.seen[g as usize] = true;
            self.touched.push(g);
        }
    }

    fn drain(&mut self) -> Slice {
        let mut s = Slice {
            states: std::mem::take(&mut self.touched),
            vals: Default::default(),
        };
        for k in 0..3 {
            s.vals[k] = s.states.iter().map(|&g| self.vals[k][g as usize]).collect();
        }
        for &g in &s.states {
            self.seen[g as usize] = false;
            for k in 0..3 {
                self.vals[k][g as usize] = self.empty;
            }
        }
        s
    }
}


const B: usize = 0;
const I: usize = 1;
const D: usize = 2;

/// Spreads values over the epsilon closure of their states.
struct Closure {
    vals: Vec<f64>,
    seen: Vec<bool>,
    buckets: Vec<Vec<StateId>>,
    /// States holding a value, highest level first, after [`Closure::close`].
    order: Vec<StateId>,
}

impl Closure {
    fn new(table: &ArcTable) -> Self {
        let n = table.num_states();
        Closure {
            vals: vec![0.0; n],
            seen: vec![false; n],
            buckets: vec![Vec::new(); table.levels],
            order: Vec::new(),
        }
    }

    #[inline]
    fn add(&mut self, table: &ArcTable, g: StateId, v: f64) {
        if !self.seen[g as usize] {
            self.seen[g as usize] = true;
            self.buckets[table.level[g as usize] as usize].push(g);
        }
        self.vals[g as usize] += v;
    }

    fn close(&mut self, table: &ArcTable) {
        self.order.clear();
        for lvl in (0..self.buckets.len()).rev() {
            let mut i = 0;
            while i < self.buckets[lvl].len() {
                let g = self.buckets[lvl][i];
                i += 1;
                self.order.push(g);
                let v = self.vals[g as usize];
                for e in table.eps(g) {
                    self.add(table, table.eps_targets[e], v * table.eps_weights[e]);
                }
            }
            self.buckets[lvl].clear();
        }
    }

    /// For every state `g` of the closure, `E[g]` plus the epsilon-weighted
    /// sum of the results at its epsilon targets. `out` must be zero on the
    /// closure.
    fn pull(&self, table: &ArcTable, out: &mut [f64]) {
        for &g in self.order.iter().rev() {
            let mut v = out[g as usize];
            for e in table.eps(g) {
                v += table.eps_weights[e] * out[table.eps_targets[e] as usize];
            }
            out[g as usize] = v;
        }
    }

    fn reset(&mut self) {
        for &g in &self.order {
            self.seen[g as usize] = false;
            self.vals[g as usize] = 0.0;
        }
    }
}

/// Adds insertion moves out of the `BASE` values already in `sc`.
fn sum_insertions(table: &ArcTable, ch: &Channel, sc: &mut Scratch, cl: &mut Closure) {
    for i in 0..sc.touched.len() {
        let g = sc.touched[i];
        let b = sc.vals[B][g as usize];
        if b > 0.0 {
            cl.add(table, g, b);
        }
    }
    cl.close(table);
    for &g in &cl.order {
        let b = cl.vals[g as usize];
        for e in table.arcs(g) {
            let w = ch.ins[table.tokens[e] as usize];
            if w == 0.0 {
                continue;
            }
            let t = table.targets[e];
            sc.touch(t);
            sc.vals[I][t as usize] += b * w * table.weights[e];
        }
    }
    cl.reset();
}

/// Scales a slice to sum to one and returns the scale.
fn normalize(s: &mut Slice) -> Result<f64> {
    let total: f64 = s.vals.iter().flat_map(|v| v.iter()).sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::EmptyResult);
    }
    for v in &mut s.vals {
        for x in v.iter_mut() {
            *x /= total;
        }
    }
    Ok(total)
}

/// Drops every state whose forward mass is below `exp(-beam)` times the
/// largest in the slice.
fn prune_slice(s: &mut Slice, beam: f64) {
    let mass = |s: &Slice, i: usize| s.vals[B][i] + s.vals[I][i] + s.vals[D][i];
    let best = (0..s.states.len()).map(|i| mass(s, i)).fold(0.0, f64::max);
    let floor = best * (-beam).exp();
    let keep: Vec<bool> = (0..s.states.len()).map(|i| mass(s, i) >= floor).collect();
    if keep.iter().all(|&k| k) {
        return;
    }
    let mut it = keep.iter();
    s.states.retain(|_| *it.next().expect("same length"));
    for v in &mut s.vals {
        let mut it = keep.iter();
        v.retain(|_| *it.next().expect("same length"));
    }
}

/// Forward–backward over the implicit lattice. Adds expected parameter counts
/// to `counts` (indexed like the lexical model's parameters) and returns the
/// natural-log total probability.
///
/// With `search_beam`, the lattice is restricted to states whose forward mass
/// is within the beam of the best state of their slice; the counts and the
/// total are then exact for that restricted lattice.
pub(crate) fn forward_backward(
    table: &ArcTable,
    ch: &Channel,
    lex: &LexicalModel,
    x: &[Label],
    search_beam: Option<f64>,
    counts: &mut [f64],
) -> Result<f64> {
    debug_assert_eq!(ch.mode, Combine::Sum);
    let n = table.num_states();
    let mut sc = Scratch::new(n, 0.0);
    let mut cl = Closure::new(table);
    let mut slices: Vec<Slice> = Vec::with_capacity(x.len() + 1);
    let mut scales: Vec<f64> = Vec::with_capacity(x.len() + 1);
    let mut finish = |sc: &mut Scratch, slices: &mut Vec<Slice>| -> Result<()> {
        let mut s = sc.drain();
        scales.push(normalize(&mut s)?);
        if let Some(beam) = search_beam {
            prune_slice(&mut s, beam);
        }
        slices.push(s);
        Ok(())
    };

    sc.touch(table.start);
    sc.vals[B][table.start as usize] = 1.0;
    sum_insertions(table, ch, &mut sc, &mut cl);
    finish(&mut sc, &mut slices)?;

    for &phone in x {
        let prev = slices.last().expect("slice");
        for (i, &g) in prev.states.iter().enumerate() {
            let a = prev.vals[B][i] + prev.vals[I][i] + prev.vals[D][i];
            if a > 0.0 {
                cl.add(table, g, a);
            }
        }
        cl.close(table);
        let sub = ch.sub_row(phone);
        for &g in &cl.order {
            let a = cl.vals[g as usize];
            for e in table.arcs(g) {
                let w = sub[table.tokens[e] as usize];
                if w == 0.0 {
                    continue;
                }
                let t = table.targets[e];
                sc.touch(t);
                sc.vals[B][t as usize] += a * w * table.weights[e];
            }
        }
        cl.reset();
        let dw = ch.del[phone as usize];
        if dw > 0.0 {
            for (i, &g) in prev.states.iter().enumerate() {
                let b = prev.vals[B][i];
                if b > 0.0 {
                    sc.touch(g);
                    sc.vals[D][g as usize] += b * dw;
                }
            }
        }
        sum_insertions(table, ch, &mut sc, &mut cl);
        finish(&mut sc, &mut slices)?;
    }

    let last = slices.last().expect("slice");
    let f_hat: f64 = last
        .states
        .iter()
        .enumerate()
        .map(|(i, &g)| (last.vals[B][i] + last.vals[I][i] + last.vals[D][i]) * table.finals[g as usize])
        .sum();
    if !(f_hat > 0.0) {
        return Err(Error::EmptyResult);
    }
    let loglik = scales.iter().map(|s| s.ln()).sum::<f64>() + f_hat.ln();

    // Backward pass. `next_b` and `next_d` hold the scaled backward values of
    // slice t + 1 scattered by state, `ins_beta` those of the insertion nodes
    // of slice t, and `pulled` per-state continuations over the closure.
    let mut next_b = vec![0.0; n];
    let mut next_d = vec![0.0; n];
    let mut ins_beta = vec![0.0; n];
    let mut pulled = vec![0.0; n];
    let mut tok_acc = vec![0.0; lex.num_rows()];
    let mut beta: [Vec<f64>; 3] = Default::default();
    let t_end = x.len();
    for t in (0..=t_end).rev() {
        let slice = &slices[t];
        let m = slice.states.len();
        for v in &mut beta {
            v.clear();
            v.resize(m, 0.0);
        }
        let inv = if t < t_end { 1.0 / scales[t + 1] } else { 0.0 };

        if t < t_end {
            let phone = x[t];
            let sub = ch.sub_row(phone);
            for (i, &g) in slice.states.iter().enumerate() {
                let a = slice.vals[B][i] + slice.vals[I][i] + slice.vals[D][i];
                cl.add(table, g, a);
            }
            cl.close(table);
            tok_acc.iter_mut().for_each(|v| *v = 0.0);
            for &g in &cl.order {
                let a = cl.vals[g as usize];
                let mut s = 0.0;
                for e in table.arcs(g) {
                    let y = table.tokens[e] as usize;
                    let w = sub[y];
                    if w == 0.0 {
                        continue;
                    }
                    let c = table.weights[e] * next_b[table.targets[e] as usize];
                    s += w * c;
                    tok_acc[y] += a * c;
                }
                pulled[g as usize] = s;
            }
            cl.pull(table, &mut pulled);
            for (y, acc) in tok_acc.iter().enumerate() {
                if *acc > 0.0 {
                    counts[lex.param(y as Label, phone) as usize] += acc * sub[y] * inv / f_hat;
                }
            }
            let dw = ch.del[phone as usize];
            let mut del_acc = 0.0;
            for (i, &g) in slice.states.iter().enumerate() {
                let s = pulled[g as usize] * inv;
                beta[I][i] = s;
                beta[D][i] = s;
                let d = dw * next_d[g as usize] * inv;
                beta[B][i] = s + d;
                del_acc += slice.vals[B][i] * d;
            }
            if del_acc > 0.0 {
                counts[lex.param(EPSILON, phone) as usize] += del_acc / f_hat;
            }
            for &g in &cl.order {
                pulled[g as usize] = 0.0;
            }
            cl.reset();
        } else {
            for (i, &g) in slice.states.iter().enumerate() {
                let fin = table.finals[g as usize];
                beta[B][i] = fin;
                beta[I][i] = fin;
                beta[D][i] = fin;
            }
        }

        // Insertions within the slice, out of BASE nodes.
        for (i, &g) in slice.states.iter().enumerate() {
            ins_beta[g as usize] = beta[I][i];
            let b = slice.vals[B][i];
            if b > 0.0 {
                cl.add(table, g, b);
            }
        }
        for (i, &g) in slice.states.iter().enumerate() {
            if slice.vals[B][i] == 0.0 {
                cl.add(table, g, 0.0);
            }
        }
        cl.close(table);
        tok_acc.iter_mut().for_each(|v| *v = 0.0);
        for &g in &cl.order {
            let b = cl.vals[g as usize];
            let mut s = 0.0;
            for e in table.arcs(g) {
                let y = table.tokens[e] as usize;
                let w = ch.ins[y];
                if w == 0.0 {
                    continue;
                }
                let c = w * table.weights[e] * ins_beta[table.targets[e] as usize];
                s += c;
                tok_acc[y] += b * c;
            }
            pulled[g as usize] = s;
        }
        cl.pull(table, &mut pulled);
        for (y, acc) in tok_acc.iter().enumerate() {
            if *acc > 0.0 {
                counts[lex.param(y as Label, EPSILON) as usize] += acc / f_hat;
            }
        }
        for (i, &g) in slice.states.iter().enumerate() {
            beta[B][i] += pulled[g as usize];
        }
        for &g in &cl.order {
            pulled[g as usize] = 0.0;
        }
        cl.reset();
        for &g in &slice.states {
            ins_beta[g as usize] = 0.0;
        }

        if t < t_end {
            for &g in &slices[t + 1].states {
                next_b[g as usize] = 0.0;
                next_d[g as usize] = 0.0;
            }
        }
        for (i, &g) in slice.states.iter().enumerate() {
            next_b[g as usize] = beta[B][i];
            next_d[g as usize] = beta[D][i];
        }
    }
    Ok(loglik)
}

/// Best path through the implicit lattice in cost space: the graphemes it
/// outputs and its cost. With `search_beam`, nodes costlier than the best
/// node of their slice by more than the beam are dropped.
pub(crate) fn viterbi(
    table: &EmissionTable,
    ch: &Channel,
    x: &[Label],
    search_beam: Option<f64>,
) -> Result<(Vec<Label>, f64)> {
    debug_assert_eq!(table.mode, Combine::Min);
    debug_assert_eq!(ch.mode, Combine::Min);
    const INF: f64 = f64::INFINITY;
    // Backpointer: (edit state, index in previous or same slice, token).
    type Bp = (u8, u32, Label);
    let n = table.num_states();
    let mut cost: [Vec<f64>; 3] = [vec![INF; n], vec![INF; n], vec![INF; n]];
    let mut bps: [Vec<Bp>; 3] = [vec![(0, 0, 0); n], vec![(0, 0, 0); n], vec![(0, 0, 0); n]];
    let mut seen = vec![false; n];
    let mut touched: Vec<StateId> = Vec::new();
    let mut slices: Vec<(Vec<StateId>, [Vec<f64>; 3], [Vec<Bp>; 3])> = Vec::with_capacity(x.len() + 1);

    let touch = |g: StateId, seen: &mut Vec<bool>, touched: &mut Vec<StateId>| {
        if !seen[g as usize] {
            seen[g as usize] = true;
            touched.push(g);
        }
    };

    let finish_slice = |cost: &mut [Vec<f64>; 3],
                            bps: &mut [Vec<Bp>; 3],
                            seen: &mut Vec<bool>,
                            touched: &mut Vec<StateId>|
     -> Result<(Vec<StateId>, [Vec<f64>; 3], [Vec<Bp>; 3])> {
        // Insertions from BASE within the slice.
        let base_count = touched.len();
        for i in 0..base_count {
            let g = touched[i];
            let c = cost[B][g as usize];
            if c == INF {
                continue;
            }
            for e in table.range(g) {
                let w = ch.ins[table.tokens[e] as usize];
                if w == INF {
                    continue;
                }
                let t = table.targets[e];
                let v = c + w + table.weights[e];
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    touched.push(t);
                }
                if v < cost[I][t as usize] {
                    cost[I][t as usize] = v;
                    bps[I][t as usize] = (B as u8, i as u32, table.tokens[e]);
                }
            }
        }
        let states = std::mem::take(touched);
        let mut vals: [Vec<f64>; 3] = Default::default();
        let mut bp: [Vec<Bp>; 3] = Default::default();
        for k in 0..3 {
            vals[k] = states.iter().map(|&g| cost[k][g as usize]).collect();
            bp[k] = states.iter().map(|&g| bps[k][g as usize]).collect();
        }
        for &g in &states {
            seen[g as usize] = false;
            for k in 0..3 {
                cost[k][g as usize] = INF;
            }
        }
        let best = vals.iter().flatten().copied().fold(INF, f64::min);
        if best == INF {
            return Err(Error::EmptyResult);
        }
        if let Some(beam) = search_beam {
            for v in vals.iter_mut().flatten() {
                if *v > best + beam {
                    *v = INF;
                }
            }
        }
        Ok((states, vals, bp))
    };

    touch(table.start, &mut seen, &mut touched);
    cost[B][table.start as usize] = 0.0;
    slices.push(finish_slice(&mut cost, &mut bps, &mut seen, &mut touched)?);

    for &phone in x {
        let (states, vals, _) = slices.last().expect("slice");
        let subs = &ch.sub_lists[phone as usize];
        for (i, &g) in states.iter().enumerate() {
            for k in 0..3 {
                let c = vals[k][i];
                if c == INF {
                    continue;
                }
                for &(y, w) in subs {
                    for e in table.token_range(g, y) {
                        let t = table.targets[e];
                        let v = c + w + table.weights[e];
                        touch(t, &mut seen, &mut touched);
                        if v < cost[B][t as usize] {
                            cost[B][t as usize] = v;
                            bps[B][t as usize] = (k as u8, i as u32, y);
                        }
                    }
                }
            }
        }
        let dw = ch.del[phone as usize];
        if dw < INF {
            for (i, &g) in states.iter().enumerate() {
                let c = vals[B][i];
                if c == INF {
                    continue;
                }
                let v = c + dw;
                touch(g, &mut seen, &mut touched);
                if v < cost[D][g as usize] {
                    cost[D][g as usize] = v;
                    bps[D][g as usize] = (B as u8, i as u32, EPSILON);
                }
            }
        }
        slices.push(finish_slice(&mut cost, &mut bps, &mut seen, &mut touched)?);
    }

    let (states, vals, _) = slices.last().expect("slice");
    let mut best: Option<(f64, usize, usize)> = None;
    for (i, &g) in states.iter().enumerate() {
        let f = table.finals[g as usize];
        if f == INF {
            continue;
        }
        for k in 0..3 {
            let v = vals[k][i] + f;
            if v < INF && best.is_none_or(|(b, _, _)| v < b) {
                best = Some((v, k, i));
            }
        }
    }
    let (total, mut k, mut i) = best.ok_or(Error::EmptyResult)?;
    let mut out = Vec::new();
    let mut t = slices.len() - 1;
    loop {
        if t == 0 && k == B && slices[0].0[i] == table.start {
            break;
        }
        let (pk, pi, tok) = slices[t].2[k][i];
        if tok != EPSILON {
            out.push(tok);
        }
        // Insertions stay within the slice; everything else steps back one.
        if k != I {
            t -= 1;
        }
        k = pk as usize;
        i = pi as usize;
    }
    out.reverse();
    Ok((out, total))
}
