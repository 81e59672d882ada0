mod common;

use common::oracle::{alphabet, paths, random_acyclic};
use common::rng;
use decipher_fst::eval::*;
use decipher_fst::fst::*;
use proptest::prelude::*;
use rand::Rng;

/// Textbook Levenshtein distance over a full matrix.
fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

fn random_words(r: &mut rand_chacha::ChaCha8Rng, max: usize) -> Vec<String> {
    let words = ["a", "b", "c", "ab", "ba", "cab"];
    (0..r.gen_range(0..=max)).map(|_| words[r.gen_range(0..words.len())].to_string()).collect()
}

#[test]
fn error_counts_match_a_reference_dynamic_program_on_random_pairs() {
    let mut r = rng(1);
    for _ in 0..1000 {
        let a = random_words(&mut r, 8);
        let b = random_words(&mut r, 8);
        for unit in [Unit::Word, Unit::Char] {
            let rep = error_rate(&a, &b, unit);
            let (ra, rb) = match unit {
                Unit::Char => (char_tokens(&a), char_tokens(&b)),
                _ => (a.clone(), b.clone()),
            };
            assert_eq!(rep.errors(), levenshtein(&ra, &rb), "{a:?} / {b:?}");
            assert_eq!(rep.reference_len, ra.len());
            assert_eq!(rb.len() + rep.deletions, ra.len() + rep.insertions);
        }
    }
}

#[test]
fn documented_examples() {
    let r = text_error_rate("a b c", "a x c", Unit::Word);
    assert_eq!((r.substitutions, r.insertions, r.deletions), (1, 0, 0));
    assert!((r.rate - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(text_error_rate("a b c", "a b c", Unit::Word).rate, 0.0);
    let r = text_error_rate("a", "a b b", Unit::Word);
    assert_eq!(r.insertions, 2);
    assert_eq!(r.rate, 2.0);
    // Boundaries count as characters.
    let r = text_error_rate("ab c", "abc", Unit::Char);
    assert_eq!((r.errors(), r.reference_len), (1, 4));
}

fn lattice_outputs(lat: &Wfst<TropicalWeight>) -> Vec<Vec<String>> {
    paths(lat)
        .into_iter()
        .map(|p| lat.osyms().symbols_of(&p.output).into_iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn lattice_oracle_equals_the_best_enumerated_path() {
    let syms = alphabet(3);
    let mut r = rng(2);
    let mut checked = 0;
    while checked < 300 {
        let lat: Wfst<TropicalWeight> = random_acyclic(&mut r, &syms, 5);
        let outs = lattice_outputs(&lat);
        if outs.is_empty() || outs.len() > 50 {
            continue;
        }
        let n = r.gen_range(0..=5);
        let reference: Vec<String> = (0..n).map(|_| ((b'a' + r.gen_range(0..4u8)) as char).to_string()).collect();
        let oracle = oracle_error_rate(&lat, &reference, Unit::Word).unwrap();
        let best = outs.iter().map(|h| error_rate(&reference, h, Unit::Word).errors()).min().unwrap();
        assert_eq!(oracle.errors(), best, "{reference:?} vs {outs:?}");
        let one_best = shortest_path(&lat).unwrap();
        let hyp: Vec<&str> = lat.osyms().symbols_of(&one_best.olabels);
        let refs: Vec<&str> = reference.iter().map(String::as_str).collect();
        assert!(oracle.errors() <= error_rate(&refs, &hyp, Unit::Word).errors());
        checked += 1;
    }
}

#[test]
fn oracle_of_a_lattice_containing_the_reference_is_zero() {
    let syms = alphabet(3);
    let lat: Wfst<TropicalWeight> = Wfst::from_tokens(syms, &["a", "c", "b"]).unwrap();
    assert_eq!(oracle_error_rate(&lat, &["a", "c", "b"], Unit::Word).unwrap().rate, 0.0);
    let single = oracle_error_rate(&lat, &["a", "b"], Unit::Word).unwrap();
    assert_eq!(single, error_rate(&["a", "b"], &["a", "c", "b"], Unit::Word));
}

#[test]
fn empty_lattice_has_no_oracle() {
    let empty = Wfst::<TropicalWeight>::builder(alphabet(2), alphabet(2)).build().unwrap();
    assert!(oracle_error_rate(&empty, &["a"], Unit::Word).is_err());
}

proptest! {
    #[test]
    fn swapping_arguments_swaps_insertions_and_deletions(seed in 0u64..100_000) {
        let mut r = rng(seed);
        let a = random_words(&mut r, 7);
        let b = random_words(&mut r, 7);
        let ab = error_rate(&a, &b, Unit::Word);
        let ba = error_rate(&b, &a, Unit::Word);
        prop_assert_eq!(ab.errors(), ba.errors());
        prop_assert_eq!((ab.substitutions, ab.insertions, ab.deletions), (ba.substitutions, ba.deletions, ba.insertions));
    }

    #[test]
    fn distance_obeys_the_triangle_inequality(seed in 0u64..100_000) {
        let mut r = rng(seed);
        let (a, b, c) = (random_words(&mut r, 6), random_words(&mut r, 6), random_words(&mut r, 6));
        let d = |x: &[String], y: &[String]| error_rate(x, y, Unit::Word).errors();
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
    }
}
