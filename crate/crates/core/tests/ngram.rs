mod common;

use common::wb::{failure_walk, WbOracle};
use common::{random_text, rng};
use decipher_fst::fst::*;
use decipher_fst::ngram::*;
use proptest::prelude::*;
use rand::Rng;

fn oracle_for(lm: &NGramLm, text: &[String]) -> WbOracle {
    let vocab: Vec<String> = lm.symbols().iter().map(|(_, s)| s.to_string()).collect();
    let sentences: Vec<Vec<String>> = text
        .iter()
        .map(|l| match lm.kind() {
            TokenKind::Grapheme => graphemes_of(&normalize_line(l)),
            TokenKind::Word => normalize_line(l)
                .split(' ')
                .map(|w| if lm.symbols().get(w).is_some() { w.to_string() } else { UNKNOWN_WORD.to_string() })
                .collect(),
        })
        .collect();
    WbOracle::new(lm.order(), vocab, &sentences)
}

fn random_tokens(r: &mut rand_chacha::ChaCha8Rng, lm: &NGramLm, max_len: usize) -> Vec<Label> {
    let v = lm.symbols().len() as Label - 1;
    (0..r.gen_range(0..=max_len)).map(|_| r.gen_range(1..=v)).collect()
}

fn names(lm: &NGramLm, tokens: &[Label]) -> Vec<String> {
    lm.symbols().symbols_of(tokens).into_iter().map(str::to_string).collect()
}

#[test]
fn character_model_matches_direct_witten_bell_estimates() {
    for order in 1..=5 {
        let mut r = rng(order as u64);
        let text = random_text(&mut r, 30, 4);
        let lm = train_char_lm(&text, order).unwrap();
        let oracle = oracle_for(&lm, &text);
        for _ in 0..100 {
            let toks = random_tokens(&mut r, &lm, 8);
            let want = oracle.sentence_logprob(&names(&lm, &toks));
            let got = lm.sentence_logprob(&toks);
            assert!((want - got).abs() < 1e-9 * want.abs().max(1.0), "order {order}: {want} vs {got}");
        }
    }
}

#[test]
fn word_model_matches_direct_witten_bell_estimates() {
    let mut r = rng(77);
    let text = random_text(&mut r, 60, 3);
    for order in 1..=4 {
        let lm = train_word_lm(&text, order, 12).unwrap();
        let oracle = oracle_for(&lm, &text);
        for _ in 0..100 {
            let toks = random_tokens(&mut r, &lm, 5);
            let want = oracle.sentence_logprob(&names(&lm, &toks));
            let got = lm.sentence_logprob(&toks);
            assert!((want - got).abs() < 1e-9 * want.abs().max(1.0), "order {order}");
        }
    }
}

#[test]
fn acceptor_scores_equal_model_scores_for_orders_one_to_five() {
    for order in 1..=5 {
        let mut r = rng(100 + order as u64);
        let text = random_text(&mut r, 40, 5);
        let lm = train_char_lm(&text, order).unwrap();
        let g: Wfst<LogWeight> = lm_to_fst(&lm).unwrap();
        for _ in 0..100 {
            let toks = random_tokens(&mut r, &lm, 10);
            let want = -lm.sentence_logprob(&toks);
            let walked = failure_walk(&g, &toks).expect("acceptor accepts every string");
            assert!((walked - want).abs() < 1e-6, "order {order}: {walked} vs {want}");
            let lib = backoff_walk(&g, &toks).unwrap().value();
            assert!((lib - want).abs() < 1e-6);
        }
    }
}

#[test]
fn every_history_distribution_sums_to_one() {
    for order in 1..=5 {
        let mut r = rng(200 + order as u64);
        let text = random_text(&mut r, 25, 4);
        let lm = train_char_lm(&text, order).unwrap();
        for _ in 0..50 {
            let mut h = vec![lm.bos()];
            h.extend(random_tokens(&mut r, &lm, order));
            let sum: f64 = (1..=lm.eos()).map(|y| lm.prob(&h, y)).sum();
            assert!((sum - 1.0).abs() < 1e-9, "order {order}: {sum}");
        }
    }
}

#[test]
fn acceptor_is_normalized_under_failure_semantics() {
    let mut r = rng(300);
    let text = random_text(&mut r, 25, 3);
    let lm = train_char_lm(&text, 3).unwrap();
    let g: Wfst<LogWeight> = lm_to_fst(&lm).unwrap();
    // Σ over all strings up to length L of P(s) approaches 1 from below; the
    // remainder is the probability of not having ended by then.
    let v = lm.symbols().len() as Label - 1;
    let mut frontier: Vec<Vec<Label>> = vec![vec![]];
    let mut ended = 0.0;
    for _ in 0..6 {
        let mut next = Vec::new();
        for s in &frontier {
            ended += (-failure_walk(&g, s).unwrap()).exp();
            for y in 1..=v {
                let mut t = s.clone();
                t.push(y);
                next.push(t);
            }
        }
        frontier = next;
    }
    let continuing: f64 = frontier
        .iter()
        .map(|s| {
            let mut p = 0.0;
            let mut hist = vec![lm.bos()];
            for &y in s {
                p += lm.prob(&hist, y).ln();
                hist.push(y);
            }
            p.exp()
        })
        .sum();
    assert!((ended + continuing - 1.0).abs() < 1e-9, "{ended} + {continuing}");
}

#[test]
fn bigram_estimates_recover_a_markov_source() {
    // Two letters, P(a|a) = 0.8, P(b|b) = 0.7; long lines make boundary
    // effects negligible.
    let mut r = rng(400);
    let text: Vec<String> = (0..200)
        .map(|_| {
            let mut c = 'a';
            let mut s = String::new();
            for _ in 0..200 {
                s.push(c);
                let stay = if c == 'a' { 0.8 } else { 0.7 };
                if !r.gen_bool(stay) {
                    c = if c == 'a' { 'b' } else { 'a' };
                }
            }
            s
        })
        .collect();
    let lm = train_char_lm(&text, 2).unwrap();
    let a = lm.symbols().get("a").unwrap();
    let b = lm.symbols().get("b").unwrap();
    assert!((lm.prob(&[a], a) - 0.8).abs() < 0.01, "{}", lm.prob(&[a], a));
    assert!((lm.prob(&[b], b) - 0.7).abs() < 0.01, "{}", lm.prob(&[b], b));
    assert!((lm.prob(&[a], b) - 0.2).abs() < 0.01);
}

#[test]
fn lexicon_composed_with_word_model_scores_like_the_word_model() {
    let mut r = rng(500);
    let text = random_text(&mut r, 50, 3);
    let wlm = train_word_lm(&text, 2, 1000).unwrap();
    let graphemes = train_char_lm(&text, 1).unwrap().symbols().clone();
    let lex = GraphemeLexicon::from_word_table(wlm.symbols(), &[UNKNOWN_WORD]);
    let l: Wfst<TropicalWeight> = build_lexicon_fst(&lex, &graphemes, wlm.symbols()).unwrap();
    let g: Wfst<TropicalWeight> = lm_to_fst(&wlm).unwrap();
    for line in text.iter().take(20) {
        let words: Vec<&str> = line.split(' ').collect();
        let spelled = lex.spell(&words).unwrap();
        let spelled: Vec<&str> = spelled.iter().map(String::as_str).collect();
        let x = Wfst::<TropicalWeight>::from_tokens(graphemes.clone(), &spelled).unwrap();
        let xl = compose(&x, &l).unwrap();
        let best = shortest_path(&xl).unwrap();
        assert_eq!(wlm.symbols().symbols_of(&best.olabels), words, "{line}");
        let labels = wlm.symbols().labels_of(&words).unwrap();
        let want = -wlm.sentence_logprob(&labels);
        assert!((failure_walk(&g, &best.olabels).unwrap() - want).abs() < 1e-6);
        // The tropical composition can only find paths at most as costly as
        // the backoff walk.
        let full = shortest_path(&compose(&xl, &g).unwrap()).unwrap();
        assert!(full.weight.value() <= want + 1e-9);
    }
}

#[test]
fn stored_models_read_back_identically() {
    let mut r = rng(600);
    let text = random_text(&mut r, 20, 4);
    let dir = tempfile::tempdir().unwrap();
    for order in 1..=5 {
        let lm = train_char_lm(&text, order).unwrap();
        let stem = dir.path().join(format!("char-{order}"));
        let meta = write_lm::<LogWeight>(&lm, &stem, Some(perplexity(&lm, &text))).unwrap();
        let (back_meta, g) = read_lm::<LogWeight>(&stem).unwrap();
        assert_eq!(meta, back_meta);
        for _ in 0..20 {
            let toks = random_tokens(&mut r, &lm, 6);
            let want = -lm.sentence_logprob(&toks);
            assert!((failure_walk(&g, &toks).unwrap() - want).abs() < 1e-6);
        }
    }
}

proptest! {
    #[test]
    fn perplexity_is_at_least_one_and_at_most_the_floor(seed in 0u64..5_000, order in 1usize..=4) {
        let mut r = rng(seed);
        let text = random_text(&mut r, 10, 4);
        let lm = train_char_lm(&text, order).unwrap();
        let ppl = perplexity(&lm, &text);
        prop_assert!(ppl >= 1.0);
        prop_assert!(ppl <= lm.symbols().len() as f64 + 1e-9 || order == 1 && ppl.is_finite());
    }

    #[test]
    fn higher_orders_fit_training_text_at_least_as_well(seed in 0u64..5_000) {
        let mut r = rng(seed);
        let text = random_text(&mut r, 15, 3);
        let p2 = perplexity(&train_char_lm(&text, 2).unwrap(), &text);
        let p4 = perplexity(&train_char_lm(&text, 4).unwrap(), &text);
        prop_assert!(p4 <= p2 + 1e-9, "{} > {}", p4, p2);
    }
}
