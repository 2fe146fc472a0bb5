mod support;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use revmine_core::corpus::{ingest_csv, Corpus, ReviewRecord};
use revmine_core::insights::{
    classify_rating, extract_topics, map_7s, segment, ExtractConfig, SentimentClass, SevenSElement, SevenSMapping,
    TopicDictionary, TopicProfile, Verdict, VerdictThresholds,
};
use revmine_core::ngram::{build_table, NgramTable};
use revmine_core::textprep::{preprocess, PipelineConfig, ProcessedSentence};
use support::fixture;

fn load(name: &str) -> (Corpus, Vec<ProcessedSentence>) {
    let corpus = ingest_csv(fixture(name), true).unwrap();
    let cfg = PipelineConfig::default();
    let s = corpus.records().iter().flat_map(|r| preprocess(r, &cfg)).collect();
    (corpus, s)
}

#[test]
fn segmentation_matches_brute_force() {
    for name in ["reviews_200.csv", "dup10.csv", "small.csv", "all_neutral.csv", "single.csv", "stop_words_only.csv"] {
        let (corpus, sentences) = load(name);
        let segs = segment(sentences.clone(), &corpus).unwrap();
        assert_eq!(segs.len(), 3);
        for class in SentimentClass::ALL {
            let want: Vec<&ProcessedSentence> = sentences
                .iter()
                .filter(|s| {
                    let r = corpus.records().iter().find(|r| r.review_id == s.review_id).unwrap();
                    let c = match r.rating {
                        1 | 2 => SentimentClass::Negative,
                        3 => SentimentClass::Neutral,
                        _ => SentimentClass::Positive,
                    };
                    c == class
                })
                .collect();
            let got: Vec<&ProcessedSentence> = segs[&class].iter().collect();
            assert_eq!(got, want, "{name} {class}");
        }
        let total: usize = segs.values().map(Vec::len).sum();
        assert_eq!(total, sentences.len(), "{name}");
    }
}

#[test]
fn classify_rating_is_total_and_surjective() {
    let image: BTreeSet<_> = (1..=5).map(|r| classify_rating(r).unwrap()).collect();
    assert_eq!(image.len(), 3);
    assert!(classify_rating(0).is_err() && classify_rating(6).is_err());
}

#[test]
fn dangling_sentence_is_an_error() {
    let (corpus, mut s) = load("single.csv");
    s[0].review_id = "ghost".into();
    assert!(segment(s, &corpus).is_err());
}

#[test]
fn dictionary_has_the_ten_topics() {
    let names: Vec<String> = TopicDictionary::default().topics.into_keys().collect();
    assert_eq!(
        names,
        [
            "Features",
            "Guided Tour",
            "Promotion",
            "Reservation",
            "Safety",
            "Schedule",
            "Site Visibility",
            "Staff",
            "Vehicle Maintenance",
            "Waiting Area"
        ]
    );
    let mapping = SevenSMapping::default();
    mapping.check_topics(&TopicDictionary::default()).unwrap();
    let covered: BTreeSet<SevenSElement> = mapping.0.values().copied().collect();
    let expected = [
        SevenSElement::Strategy,
        SevenSElement::Systems,
        SevenSElement::SharedValues,
        SevenSElement::Skills,
        SevenSElement::Staff,
    ];
    assert_eq!(covered, expected.into_iter().collect());
}

fn tables(segs: &BTreeMap<SentimentClass, Vec<ProcessedSentence>>, m: usize) -> BTreeMap<SentimentClass, NgramTable> {
    segs.iter()
        .map(|(&c, s)| {
            let repeated: Vec<ProcessedSentence> = (0..m).flat_map(|_| s.iter().cloned()).collect();
            (c, build_table(&repeated))
        })
        .collect()
}

fn profiles(m: usize, cfg: &ExtractConfig) -> Vec<TopicProfile> {
    let (corpus, s) = load("reviews_200.csv");
    let segs = segment(s, &corpus).unwrap();
    let dict = TopicDictionary::default().normalize(&PipelineConfig::default()).unwrap();
    extract_topics(&tables(&segs, m), &dict, cfg).unwrap()
}

#[test]
fn scaling_leaves_rates_polarity_and_verdicts_unchanged() {
    // The count threshold is absolute, so replication is only rate-preserving
    // when every candidate already clears it.
    let cfg = ExtractConfig { k: 25, min_count: 1 };
    let base = profiles(1, &cfg);
    let mapping = SevenSMapping::default();
    let th = VerdictThresholds::default();
    for m in [2, 3, 5] {
        let scaled = profiles(m, &cfg);
        assert_eq!(scaled.len(), base.len());
        for (a, b) in base.iter().zip(&scaled) {
            assert_eq!(a.topic, b.topic);
            assert_eq!(a.polarity, b.polarity, "{} m={m}", a.topic);
            assert_eq!(a.dominant_class, b.dominant_class);
            for (c, r) in &a.freq_per_kilosentence {
                assert!((r - b.freq_per_kilosentence[c]).abs() <= 1e-6, "{} {c} m={m}", a.topic);
            }
        }
        assert_eq!(map_7s(&base, &mapping, &th), map_7s(&scaled, &mapping, &th));
    }
}

#[test]
fn fixture_verdicts() {
    let p = profiles(1, &ExtractConfig::default());
    let a = map_7s(&p, &SevenSMapping::default(), &VerdictThresholds::default());
    assert_eq!(a.elements[&SevenSElement::Staff].verdict, Verdict::Strength);
    assert_eq!(a.elements[&SevenSElement::Style].verdict, Verdict::NoEvidence);
    assert_eq!(a.elements[&SevenSElement::Structure].verdict, Verdict::NoEvidence);
    assert!(matches!(a.elements[&SevenSElement::SharedValues].verdict, Verdict::Mixed | Verdict::Weakness));
    assert_eq!(a.elements.len(), 7);
}

fn rank(v: Verdict) -> i32 {
    match v {
        Verdict::Weakness => 0,
        Verdict::Mixed => 1,
        Verdict::Strength => 2,
        Verdict::NoEvidence => -1,
    }
}

fn record(id: usize, rating: u8, text: &str) -> ReviewRecord {
    ReviewRecord { review_id: format!("r{id}"), rating, text: text.into(), source: None, date: None }
}

proptest! {
    #[test]
    fn verdicts_are_monotone(p in prop::collection::vec(-1.0f64..=1.0, 0..6), bump in prop::collection::vec(0.0f64..1.0, 6)) {
        let th = VerdictThresholds::default();
        let raised: Vec<f64> = p.iter().zip(&bump).map(|(x, b)| (x + b).min(1.0)).collect();
        let (before, after) = (th.verdict(&p), th.verdict(&raised));
        prop_assert_eq!(before == Verdict::NoEvidence, after == Verdict::NoEvidence);
        prop_assert!(rank(after) >= rank(before));
    }

    #[test]
    fn polarity_bounded_and_signed(
        reviews in prop::collection::vec((1..=5u8, prop::sample::select(vec![
            "Friendly staff.", "Rude staff.", "Long wait in the lobby.", "Great pilot!", "No refund after cancellation.",
            "Nice views.", "Booking on the website was easy.",
        ])), 1..30)
    ) {
        let cfg = PipelineConfig::default();
        let records: Vec<ReviewRecord> = reviews.iter().enumerate().map(|(i, (r, t))| record(i, *r, t)).collect();
        let rows = records.iter().map(|r| Ok(revmine_core::corpus::RawRow {
            review_id: Some(r.review_id.clone()),
            rating: Some(r.rating.to_string()),
            text: Some(r.text.clone()),
            ..Default::default()
        }));
        let corpus = Corpus::from_rows(rows);
        let sentences: Vec<ProcessedSentence> = corpus.records().iter().flat_map(|r| preprocess(r, &cfg)).collect();
        let n = sentences.len();
        let segs = segment(sentences, &corpus).unwrap();
        prop_assert_eq!(segs.values().map(Vec::len).sum::<usize>(), n);
        let t: BTreeMap<_, _> = segs.iter().map(|(&c, s)| (c, build_table(s))).collect();
        let dict = TopicDictionary::default().normalize(&cfg).unwrap();
        for p in extract_topics(&t, &dict, &ExtractConfig { k: 25, min_count: 1 }).unwrap() {
            prop_assert!((-1.0..=1.0).contains(&p.polarity));
            let pos = p.freq_per_kilosentence[&SentimentClass::Positive];
            let neg = p.freq_per_kilosentence[&SentimentClass::Negative];
            prop_assert!(pos + neg > 0.0);
            prop_assert_eq!(p.polarity.signum() * (p.polarity != 0.0) as i32 as f64,
                (pos - neg).signum() * (pos != neg) as i32 as f64);
        }
    }
}
