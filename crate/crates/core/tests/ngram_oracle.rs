mod support;

use num_rational::Ratio;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use revmine_core::corpus::ingest_csv;
use revmine_core::insights::{segment, SentimentClass};
use revmine_core::ngram::{build_table, build_table_sharded, merge, NgramError, NgramOrder, NgramTable};
use revmine_core::textprep::{preprocess, PipelineConfig, ProcessedSentence};
use support::{corpus_strategy, fixture, naive_count, table_counts};

fn fixture_sentences() -> Vec<ProcessedSentence> {
    let corpus = ingest_csv(fixture("reviews_200.csv"), true).unwrap();
    let cfg = PipelineConfig::default();
    corpus.records().iter().flat_map(|r| preprocess(r, &cfg)).collect()
}

fn token_lists(s: &[ProcessedSentence]) -> Vec<Vec<String>> {
    s.iter().map(|p| p.tokens.clone()).collect()
}

#[test]
fn exhaustive_small_corpora_match_naive_counter() {
    // Every sentence of length 0..=3 over {a, b}, and every corpus of up to two such sentences.
    let mut sentences: Vec<Vec<String>> = vec![vec![]];
    for len in 1..=3 {
        for bits in 0..(1u32 << len) {
            sentences.push((0..len).map(|i| if bits >> i & 1 == 1 { "b" } else { "a" }.to_string()).collect());
        }
    }
    let mut corpora: Vec<Vec<Vec<String>>> = vec![vec![]];
    for s in &sentences {
        corpora.push(vec![s.clone()]);
        for t in &sentences {
            corpora.push(vec![s.clone(), t.clone()]);
        }
    }
    assert_eq!(corpora.len(), 1 + 15 + 225);
    for c in &corpora {
        assert_eq!(table_counts(&NgramTable::from_token_lists(c)), naive_count(c), "{c:?}");
    }
}

#[test]
fn fixture_table_matches_naive_counter() {
    let s = fixture_sentences();
    assert_eq!(table_counts(&build_table(&s)), naive_count(&token_lists(&s)));
}

#[test]
fn fixture_queries_match_recount() {
    let s = fixture_sentences();
    let t = build_table(&s);
    let lists = token_lists(&s);
    let total: usize = lists.iter().map(Vec::len).sum();
    let staff = lists.iter().flatten().filter(|w| *w == "staff").count();
    assert_eq!(t.prob_unigram("staff").unwrap(), staff as f64 / total as f64);

    let (mut hist, mut hits) = (0u64, 0u64);
    for l in &lists {
        for w in l.windows(3) {
            if w[0] == "friendli" && w[1] == "staff" {
                hist += 1;
                hits += u64::from(w[2] == "made");
            }
        }
    }
    assert!(hist > 0);
    assert_eq!(t.cond_prob_trigram("friendli", "staff", "made").unwrap(), hits as f64 / hist as f64);
}

#[test]
fn seven_shard_merge_equals_single_pass() {
    let s = fixture_sentences();
    let single = build_table(&s);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut shards: Vec<Vec<ProcessedSentence>> = vec![Vec::new(); 7];
    for p in &s {
        shards[rng.gen_range(0..7)].push(p.clone());
    }
    let folded = shards.iter().map(|sh| build_table(sh)).fold(NgramTable::new(), merge);
    assert_eq!(folded, single);
    assert_eq!(folded.to_canonical_json(), single.to_canonical_json());
    for n in [1, 2, 3, 7, 64, 10_000] {
        assert_eq!(build_table_sharded(&s, n), single, "{n} shards");
    }
}

#[test]
fn segment_tables_sum_to_whole_corpus() {
    let s = fixture_sentences();
    let corpus = ingest_csv(fixture("reviews_200.csv"), true).unwrap();
    let whole = build_table(&s);
    let segs = segment(s, &corpus).unwrap();
    let merged = SentimentClass::ALL.iter().map(|c| build_table(&segs[c])).fold(NgramTable::new(), merge);
    assert_eq!(merged, whole);
}

#[test]
fn closed_corpus_telescopes() {
    // "a" and "b" never end a sentence, so each prefix count equals its continuation total.
    let corpus: Vec<Vec<&str>> =
        vec![vec!["a", "b", "x"], vec!["a", "b", "y"], vec!["b", "a", "b", "x"], vec!["a", "a", "y"], vec!["b", "x"]];
    let t = NgramTable::from_token_lists(&corpus);
    let total = t.total_tokens();
    for (gram, c) in t.trigrams() {
        if gram[0] == "x" || gram[0] == "y" || gram[1] == "x" || gram[1] == "y" {
            continue;
        }
        let exact = Ratio::new(t.unigram_count(&gram[0]), total)
            * Ratio::new(t.bigram_count(&gram[0], &gram[1]), t.unigram_count(&gram[0]))
            * Ratio::new(c, t.bigram_count(&gram[0], &gram[1]));
        assert_eq!(exact, Ratio::new(c, total));
        let float = t.joint_prob(gram, NgramOrder::Trigram).unwrap();
        assert!((float - c as f64 / total as f64).abs() <= 1e-12, "{gram:?}");
    }
}

#[test]
fn unseen_history_names_position() {
    let t = NgramTable::from_token_lists([["a", "b"]]);
    assert_eq!(t.cond_prob_bigram("a", "z"), Ok(0.0));
    match t.joint_prob(&["a", "b", "c"], NgramOrder::Bigram) {
        Err(NgramError::UnseenHistory { history, position }) => {
            assert_eq!(history, ["b"]);
            assert_eq!(position, Some(2));
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        t.joint_prob(&["a", "b", "c"], NgramOrder::Trigram),
        Err(NgramError::UnseenHistory { position: Some(2), .. })
    ));
    assert_eq!(NgramTable::new().prob_unigram("a"), Err(NgramError::EmptyModel));
}

proptest! {
    #[test]
    fn build_matches_naive_counter(c in corpus_strategy(100, 6)) {
        prop_assert_eq!(table_counts(&NgramTable::from_token_lists(&c)), naive_count(&c));
    }

    #[test]
    fn conditionals_normalize_exactly(c in corpus_strategy(60, 5)) {
        let t = NgramTable::from_token_lists(&c);
        let vocab: Vec<String> = t.unigrams().map(|(w, _)| w.clone()).collect();
        for h in &vocab {
            let denom: u64 = vocab.iter().map(|x| t.bigram_count(h, x)).sum();
            if denom == 0 {
                prop_assert!(t.cond_prob_bigram(h, &vocab[0]).is_err());
                continue;
            }
            let exact: Ratio<u64> = vocab.iter().map(|x| Ratio::new(t.bigram_count(h, x), denom)).sum();
            prop_assert_eq!(exact, Ratio::from_integer(1));
            let float: f64 = vocab.iter().map(|x| t.cond_prob_bigram(h, x).unwrap()).sum();
            prop_assert!((float - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn merge_is_a_homomorphism(c in corpus_strategy(60, 5), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for s in &c {
            if rng.gen_bool(0.5) { left.push(s.clone()) } else { right.push(s.clone()) }
        }
        let l = NgramTable::from_token_lists(&left);
        let r = NgramTable::from_token_lists(&right);
        let whole = NgramTable::from_token_lists(&c);
        prop_assert_eq!(merge(l.clone(), r.clone()), whole.clone());
        prop_assert_eq!(merge(r, l), whole.clone());
        prop_assert_eq!(merge(whole.clone(), NgramTable::new()), whole);
    }

    #[test]
    fn order_independent_and_monotone(c in corpus_strategy(40, 5), extra in prop::collection::vec(0..5usize, 0..6), seed in any::<u64>()) {
        let t = NgramTable::from_token_lists(&c);
        let mut shuffled = c.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(&NgramTable::from_token_lists(&shuffled), &t);

        let mut grown = t.clone();
        let extra: Vec<String> = extra.iter().map(|i| format!("w{i}")).collect();
        grown.add_sentence(&extra);
        for (w, n) in t.unigrams() { prop_assert!(grown.unigram_count(w) >= n); }
        for (g, n) in t.bigrams() { prop_assert!(grown.count(g) >= n); }
        for (g, n) in t.trigrams() { prop_assert!(grown.count(g) >= n); }
    }

    #[test]
    fn probabilities_are_in_unit_interval(c in corpus_strategy(30, 4), q in prop::collection::vec(0..5usize, 1..5)) {
        let t = NgramTable::from_token_lists(&c);
        let q: Vec<String> = q.iter().map(|i| format!("w{i}")).collect();
        for order in [NgramOrder::Bigram, NgramOrder::Trigram] {
            if let Ok(p) = t.joint_prob(&q, order) {
                prop_assert!((0.0..=1.0).contains(&p));
            }
        }
        if let Ok(p) = t.prob_unigram(&q[0]) { prop_assert!((0.0..=1.0).contains(&p)); }
    }

    #[test]
    fn canonical_json_round_trips(c in corpus_strategy(20, 4)) {
        let t = NgramTable::from_token_lists(&c);
        let back: NgramTable = serde_json::from_str(&t.to_canonical_json()).unwrap();
        prop_assert_eq!(back, t);
    }
}
