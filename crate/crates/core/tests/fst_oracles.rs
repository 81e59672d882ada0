mod common;

use common::oracle::*;
use common::rng;
use decipher_fst::fst::*;
use proptest::prelude::*;

const TOL: f64 = 1e-9;

#[test]
fn compose_matches_relational_composition() {
    let syms = alphabet(4);
    for seed in 0..200 {
        let mut r = rng(seed);
        let a: Wfst<LogWeight> = random_acyclic(&mut r, &syms, 5);
        let b: Wfst<LogWeight> = random_acyclic(&mut r, &syms, 5);
        let want = compose_relations::<LogWeight>(&relation(&a), &relation(&b));
        let got = relation(&compose(&a, &b).unwrap());
        relations_match(&want, &got, TOL).unwrap_or_else(|e| panic!("seed {seed}: {e}"));

        let (at, bt): (Wfst<TropicalWeight>, Wfst<TropicalWeight>) = (a.map_weights(), b.map_weights());
        let want = compose_relations::<TropicalWeight>(&relation(&at), &relation(&bt));
        let got = relation(&compose(&at, &bt).unwrap());
        relations_match(&want, &got, TOL).unwrap_or_else(|e| panic!("tropical seed {seed}: {e}"));
    }
}

#[test]
fn three_way_compose_matches_relational_composition() {
    let syms = alphabet(3);
    for seed in 0..200 {
        let mut r = rng(10_000 + seed);
        let a: Wfst<LogWeight> = random_acyclic(&mut r, &syms, 4);
        let b: Wfst<LogWeight> = random_acyclic(&mut r, &syms, 4);
        let c: Wfst<LogWeight> = random_acyclic(&mut r, &syms, 4);
        let ab = compose_relations::<LogWeight>(&relation(&a), &relation(&b));
        let want = compose_relations::<LogWeight>(&ab, &relation(&c));
        let got = relation(&compose3(&a, &b, &c, None).unwrap());
        relations_match(&want, &got, TOL).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
    }
}

#[test]
fn shortest_path_is_the_cheapest_enumerated_path() {
    let syms = alphabet(4);
    for seed in 0..200 {
        let mut r = rng(20_000 + seed);
        let f: Wfst<TropicalWeight> = random_acyclic(&mut r, &syms, 5);
        let all = paths(&f);
        let best = shortest_path(&f).unwrap();
        let want = min_cost(&all);
        assert!((best.weight.value() - want).abs() < TOL, "seed {seed}");
        let along: f64 = best.arcs.iter().map(|a| a.weight.value()).sum::<f64>()
            + f.final_weight(*best.states.last().unwrap()).value();
        assert!((along - want).abs() < TOL, "seed {seed}: returned path costs {along}");
        assert!(all.iter().any(|p| p.input == best.ilabels && p.output == best.olabels && (p.cost - want).abs() < TOL));
    }
}

#[test]
fn forward_backward_matches_path_sums() {
    let syms = alphabet(4);
    for seed in 0..200 {
        let mut r = rng(30_000 + seed);
        let f: Wfst<LogWeight> = random_acyclic(&mut r, &syms, 5);
        let fb = forward_backward(&f).unwrap();
        let want = total_cost(&paths(&f));
        assert!((fb.total.value() - want).abs() < TOL, "seed {seed}");
        assert!((fb.backward_total.value() - want).abs() < TOL, "seed {seed}");
        let post = arc_posteriors(&f);
        for s in f.states() {
            for (i, p) in post[s as usize].iter().enumerate() {
                assert!((fb.arc_posteriors[s as usize][i] - p).abs() < TOL, "seed {seed} arc {s}/{i}");
            }
        }
    }
}

#[test]
fn trim_preserves_the_relation_and_leaves_only_useful_states() {
    let syms = alphabet(3);
    for seed in 0..200 {
        let mut r = rng(40_000 + seed);
        let f: Wfst<LogWeight> = random_acyclic(&mut r, &syms, 5);
        let t = trim(&f);
        relations_match(&relation(&f), &relation(&t), TOL).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        let used: std::collections::BTreeSet<StateId> = paths(&t)
            .iter()
            .flat_map(|p| p.arcs.iter().flat_map(|&(s, i)| [s, t.arcs(s)[i].nextstate]))
            .chain(t.start())
            .collect();
        assert_eq!(used.len(), t.num_states(), "seed {seed}");
    }
}

#[test]
fn prune_keeps_every_path_within_the_beam_and_only_arcs_on_one() {
    let syms = alphabet(3);
    for seed in 0..100 {
        let mut r = rng(50_000 + seed);
        let f: Wfst<TropicalWeight> = random_acyclic(&mut r, &syms, 5);
        let beam = 1.5;
        let best = min_cost(&paths(&f));
        let p = prune(&f, beam).unwrap();
        let kept = paths(&p);
        assert!((min_cost(&kept) - best).abs() < TOL, "seed {seed}");
        let near = |ps: &[Path]| ps.iter().filter(|q| q.cost <= best + beam - TOL).count();
        assert_eq!(near(&kept), near(&paths(&f)), "seed {seed}");
        for s in p.states() {
            for i in 0..p.arcs(s).len() {
                let on_good_path = kept.iter().any(|q| q.arcs.contains(&(s, i)) && q.cost <= best + beam + TOL);
                assert!(on_good_path, "seed {seed}: arc {s}/{i} lies on no path within the beam");
            }
        }
    }
}

proptest! {
    #[test]
    fn composing_with_identity_changes_nothing(seed in 0u64..10_000) {
        let syms = alphabet(3);
        let mut r = rng(seed);
        let f: Wfst<LogWeight> = random_acyclic(&mut r, &syms, 5);
        let mut b = Wfst::<LogWeight>::builder(syms.clone(), syms.clone());
        let s = b.add_state();
        b.set_start(s);
        b.set_final(s, LogWeight::one());
        for l in 1..syms.len() as Label {
            b.add_arc(s, Arc::new(l, l, LogWeight::one(), s));
        }
        let id = b.build().unwrap();
        let want = relation(&f);
        prop_assert!(relations_match(&want, &relation(&compose(&f, &id).unwrap()), TOL).is_ok());
        prop_assert!(relations_match(&want, &relation(&compose(&id, &f).unwrap()), TOL).is_ok());
    }

    #[test]
    fn text_format_round_trips(seed in 0u64..10_000) {
        let syms = alphabet(4);
        let mut r = rng(seed);
        let f: Wfst<TropicalWeight> = random_acyclic(&mut r, &syms, 5);
        let back: Wfst<TropicalWeight> = io::parse_text(&io::to_text(&f), syms.clone(), syms).unwrap();
        prop_assert!(relations_match(&relation(&f), &relation(&back), 1e-12).is_ok());
    }

    #[test]
    fn trim_is_idempotent(seed in 0u64..10_000) {
        let syms = alphabet(3);
        let mut r = rng(seed);
        let t = trim(&random_acyclic::<TropicalWeight>(&mut r, &syms, 5));
        let tt = trim(&t);
        prop_assert_eq!(io::to_text(&t), io::to_text(&tt));
    }
}
