//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use proptest::prelude::*;
use revmine_core::ngram::NgramTable;

pub type Counts = BTreeMap<Vec<String>, u64>;

/// Nested-loop recount: every window of length 1..=3 inside each sentence.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct NaiveCounts {
    pub grams: [Counts; 3],
    pub totals: [u64; 3],
    pub sentences: u64,
}

pub fn naive_count<S: AsRef<str>>(sentences: &[Vec<S>]) -> NaiveCounts {
    let mut out = NaiveCounts::default();
    for s in sentences {
        out.sentences += 1;
        for n in 1..=3 {
            for start in 0..s.len() {
                if start + n > s.len() {
                    break;
                }
                let gram: Vec<String> = s[start..start + n].iter().map(|t| t.as_ref().to_string()).collect();
                *out.grams[n - 1].entry(gram).or_insert(0) += 1;
                out.totals[n - 1] += 1;
            }
        }
    }
    out
}

/// The same shape, read back out of a built table.
pub fn table_counts(t: &NgramTable) -> NaiveCounts {
    NaiveCounts {
        grams: [
            t.unigrams().map(|(w, c)| (vec![w.clone()], c)).collect(),
            t.bigrams().map(|(g, c)| (g.to_vec(), c)).collect(),
            t.trigrams().map(|(g, c)| (g.to_vec(), c)).collect(),
        ],
        totals: [t.total_tokens(), t.total_bigram_positions(), t.total_trigram_positions()],
        sentences: t.sentence_count(),
    }
}

/// Corpora of up to `max_sentences` sentences over a small vocabulary, so
/// histories repeat often.
pub fn corpus_strategy(max_sentences: usize, vocab: usize) -> impl Strategy<Value = Vec<Vec<String>>> {
    let word = (0..vocab).prop_map(|i| format!("w{i}"));
    prop::collection::vec(prop::collection::vec(word, 0..8), 0..=max_sentences)
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}
