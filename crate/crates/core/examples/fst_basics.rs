//! Builds two small transducers by hand, composes them, and reads off the
//! best path and the arc posteriors of the result.

use decipher_fst::fst::*;

fn main() -> decipher_fst::Result<()> {
    let syms = SymbolTable::from_symbols(["a", "b", "x", "y"]).into_shared();
    let (a, b, x, y) = (1, 2, 3, 4);

    // a -> x (cost 1) or a -> y (cost 2), then b -> x.
    let mut t1 = Wfst::<LogWeight>::builder(syms.clone(), syms.clone());
    t1.add_states(3);
    t1.set_start(0);
    t1.add_arc(0, Arc::new(a, x, LogWeight::new(1.0), 1));
    t1.add_arc(0, Arc::new(a, y, LogWeight::new(2.0), 1));
    t1.add_arc(1, Arc::new(b, x, LogWeight::new(0.5), 2));
    t1.set_final(2, LogWeight::one());
    let t1 = t1.build()?;

    // x and y pass through; y is cheaper.
    let mut t2 = Wfst::<LogWeight>::builder(syms.clone(), syms.clone());
    let s = t2.add_state();
    t2.set_start(s);
    t2.set_final(s, LogWeight::one());
    t2.add_arc(s, Arc::new(x, x, LogWeight::new(1.5), s));
    t2.add_arc(s, Arc::new(y, y, LogWeight::new(0.0), s));
    let t2 = t2.build()?;

    let c = compose(&t1, &t2)?;
    println!("composed machine:\n{}", decipher_fst::fst::io::to_text(&c));

    let fb = forward_backward(&c)?;
    println!("total -log P = {:.4}", fb.total.value());
    for s in c.states() {
        for (i, arc) in c.arcs(s).iter().enumerate() {
            println!(
                "  {s} -> {}  {}:{}  posterior {:.3}",
                arc.nextstate,
                syms.symbol(arc.ilabel).unwrap_or("<eps>"),
                syms.symbol(arc.olabel).unwrap_or("<eps>"),
                fb.arc_posteriors[s as usize][i]
            );
        }
    }

    let tropical: Wfst<TropicalWeight> = c.map_weights();
    let best = shortest_path(&tropical)?;
    println!(
        "best path {:?} -> {:?} at cost {:.2}",
        syms.symbols_of(&best.ilabels),
        syms.symbols_of(&best.olabels),
        best.weight.value()
    );
    Ok(())
}
