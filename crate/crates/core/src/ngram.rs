//! Exact n-gram counts and the maximum-likelihood language model built on them.
//!
//! Counts cover every contiguous 1-, 2- and 3-gram inside a sentence. N-grams
//! never cross sentence boundaries and no padding symbols are added.
//!
//! Conditional probabilities are raw count ratios with no smoothing:
//!
//! ```text
//! P(w | v)    = c(v w)   / Σ_x c(v x)
//! P(w | u, v) = c(u v w) / Σ_x c(u v x)
//! ```
//!
//! The denominators are the number of continuations of the history, which is
//! smaller than `c(v)` whenever `v` can end a sentence. A history with no
//! continuations is an error ([`NgramError::UnseenHistory`]), not probability 0.
//!
//! Counts are `u64` and tables merge by pointwise addition, so a table built from
//! shards and merged equals the table built in one pass.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textprep::ProcessedSentence;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NgramError {
    #[error("model is undefined: the table has no tokens")]
    EmptyModel,
    #[error("empty word sequence")]
    EmptySequence,
    #[error("unseen history {history:?}{}", position.map(|p| format!(" at position {p}")).unwrap_or_default())]
    UnseenHistory {
        history: Vec<String>,
        /// 0-based index of the predicted word within a joint-probability query.
        position: Option<usize>,
    },
}

/// N-gram order used for ranking and chain-rule products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NgramOrder {
    Bigram,
    Trigram,
}

impl NgramOrder {
    pub fn n(self) -> usize {
        match self {
            NgramOrder::Bigram => 2,
            NgramOrder::Trigram => 3,
        }
    }
}

impl fmt::Display for NgramOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NgramOrder::Bigram => "bigram",
            NgramOrder::Trigram => "trigram",
        })
    }
}

/// Occurrence counts for one corpus segment.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "CanonicalTable", from = "CanonicalTable")]
pub struct NgramTable {
    unigrams: HashMap<String, u64>,
    bigrams: HashMap<[String; 2], u64>,
    trigrams: HashMap<[String; 3], u64>,
    // Continuation totals per history, kept in step with the counts above.
    bigram_histories: HashMap<String, u64>,
    trigram_histories: HashMap<[String; 2], u64>,
    total_tokens: u64,
    total_bigram_positions: u64,
    total_trigram_positions: u64,
    sentence_count: u64,
}

fn bump<K: std::hash::Hash + Eq>(map: &mut HashMap<K, u64>, key: K, by: u64) {
    *map.entry(key).or_insert(0) += by;
}

impl NgramTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Count one sentence's tokens.
    pub fn add_sentence<S: AsRef<str>>(&mut self, tokens: &[S]) {
        let t: Vec<&str> = tokens.iter().map(AsRef::as_ref).collect();
        self.sentence_count += 1;
        self.total_tokens += t.len() as u64;
        for w in &t {
            bump(&mut self.unigrams, w.to_string(), 1);
        }
        for pair in t.windows(2) {
            bump(&mut self.bigrams, [pair[0].to_string(), pair[1].to_string()], 1);
            bump(&mut self.bigram_histories, pair[0].to_string(), 1);
            self.total_bigram_positions += 1;
        }
        for tri in t.windows(3) {
            bump(&mut self.trigrams, [tri[0].to_string(), tri[1].to_string(), tri[2].to_string()], 1);
            bump(&mut self.trigram_histories, [tri[0].to_string(), tri[1].to_string()], 1);
            self.total_trigram_positions += 1;
        }
    }

    pub fn from_token_lists<I, T, S>(sentences: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[S]>,
        S: AsRef<str>,
    {
        let mut table = Self::new();
        for s in sentences {
            table.add_sentence(s.as_ref());
        }
        table
    }

    /// Add every count of `other` into `self`.
    pub fn merge_from(&mut self, other: &NgramTable) {
        for (k, v) in &other.unigrams {
            bump(&mut self.unigrams, k.clone(), *v);
        }
        for (k, v) in &other.bigrams {
            bump(&mut self.bigrams, k.clone(), *v);
        }
        for (k, v) in &other.trigrams {
            bump(&mut self.trigrams, k.clone(), *v);
        }
        for (k, v) in &other.bigram_histories {
            bump(&mut self.bigram_histories, k.clone(), *v);
        }
        for (k, v) in &other.trigram_histories {
            bump(&mut self.trigram_histories, k.clone(), *v);
        }
        self.total_tokens += other.total_tokens;
        self.total_bigram_positions += other.total_bigram_positions;
        self.total_trigram_positions += other.total_trigram_positions;
        self.sentence_count += other.sentence_count;
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn total_bigram_positions(&self) -> u64 {
        self.total_bigram_positions
    }

    pub fn total_trigram_positions(&self) -> u64 {
        self.total_trigram_positions
    }

    pub fn sentence_count(&self) -> u64 {
        self.sentence_count
    }

    pub fn unigram_count(&self, w: &str) -> u64 {
        self.unigrams.get(w).copied().unwrap_or(0)
    }

    pub fn bigram_count(&self, a: &str, b: &str) -> u64 {
        self.bigrams.get(&[a.to_string(), b.to_string()]).copied().unwrap_or(0)
    }

    pub fn trigram_count(&self, a: &str, b: &str, c: &str) -> u64 {
        self.trigrams.get(&[a.to_string(), b.to_string(), c.to_string()]).copied().unwrap_or(0)
    }

    pub fn unigrams(&self) -> impl Iterator<Item = (&String, u64)> {
        self.unigrams.iter().map(|(k, v)| (k, *v))
    }

    pub fn bigrams(&self) -> impl Iterator<Item = (&[String; 2], u64)> {
        self.bigrams.iter().map(|(k, v)| (k, *v))
    }

    pub fn trigrams(&self) -> impl Iterator<Item = (&[String; 3], u64)> {
        self.trigrams.iter().map(|(k, v)| (k, *v))
    }

    /// Count of an n-gram of length 1 to 3.
    pub fn count(&self, gram: &[String]) -> u64 {
        match gram {
            [a] => self.unigram_count(a),
            [a, b] => self.bigram_count(a, b),
            [a, b, c] => self.trigram_count(a, b, c),
            _ => 0,
        }
    }

    /// P(w) = c(w) / total tokens; 0 for an unseen word.
    pub fn prob_unigram(&self, w: &str) -> Result<f64, NgramError> {
        if self.total_tokens == 0 {
            return Err(NgramError::EmptyModel);
        }
        Ok(self.unigram_count(w) as f64 / self.total_tokens as f64)
    }

    /// P(w | prev) = c(prev w) / Σ_x c(prev x).
    pub fn cond_prob_bigram(&self, prev: &str, w: &str) -> Result<f64, NgramError> {
        let total = self.bigram_histories.get(prev).copied().unwrap_or(0);
        if total == 0 {
            return Err(NgramError::UnseenHistory { history: vec![prev.to_string()], position: None });
        }
        Ok(self.bigram_count(prev, w) as f64 / total as f64)
    }

    /// P(w | w2, w1) = c(w2 w1 w) / Σ_x c(w2 w1 x), where `w2` is the older word.
    pub fn cond_prob_trigram(&self, w2: &str, w1: &str, w: &str) -> Result<f64, NgramError> {
        let history = [w2.to_string(), w1.to_string()];
        let total = self.trigram_histories.get(&history).copied().unwrap_or(0);
        if total == 0 {
            return Err(NgramError::UnseenHistory { history: history.to_vec(), position: None });
        }
        Ok(self.trigram_count(w2, w1, w) as f64 / total as f64)
    }

    /// Chain-rule probability of a word sequence under the Markov assumption of
    /// the given order. The first word uses the unigram estimate; with trigram
    /// order the second word uses the bigram estimate.
    pub fn joint_prob<S: AsRef<str>>(&self, words: &[S], order: NgramOrder) -> Result<f64, NgramError> {
        let w: Vec<&str> = words.iter().map(AsRef::as_ref).collect();
        let first = w.first().ok_or(NgramError::EmptySequence)?;
        let at = |i: usize, e: NgramError| match e {
            NgramError::UnseenHistory { history, .. } => NgramError::UnseenHistory { history, position: Some(i) },
            other => other,
        };
        let mut p = self.prob_unigram(first)?;
        for i in 1..w.len() {
            let factor = if order == NgramOrder::Trigram && i >= 2 {
                self.cond_prob_trigram(w[i - 2], w[i - 1], w[i])
            } else {
                self.cond_prob_bigram(w[i - 1], w[i])
            };
            p *= factor.map_err(|e| at(i, e))?;
        }
        Ok(p)
    }

    /// The `k` most frequent n-grams of the given order with count at least
    /// `min_count`, by descending count and then lexicographic token sequence.
    pub fn top_ngrams(&self, order: NgramOrder, k: usize, min_count: u64) -> Vec<(Vec<String>, u64)> {
        let mut grams: Vec<(Vec<String>, u64)> = match order {
            NgramOrder::Bigram => {
                self.bigrams.iter().filter(|(_, &c)| c >= min_count).map(|(g, &c)| (g.to_vec(), c)).collect()
            }
            NgramOrder::Trigram => {
                self.trigrams.iter().filter(|(_, &c)| c >= min_count).map(|(g, &c)| (g.to_vec(), c)).collect()
            }
        };
        rank(&mut grams);
        grams.truncate(k);
        grams
    }

    /// Every unigram with count at least `min_count`, ranked like [`Self::top_ngrams`].
    pub fn frequent_unigrams(&self, min_count: u64) -> Vec<(Vec<String>, u64)> {
        let mut grams: Vec<(Vec<String>, u64)> =
            self.unigrams.iter().filter(|(_, &c)| c >= min_count).map(|(g, &c)| (vec![g.clone()], c)).collect();
        rank(&mut grams);
        grams
    }

    /// Canonical sorted JSON; equal tables serialize to equal bytes.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("table serialization")
    }
}

fn rank(grams: &mut [(Vec<String>, u64)]) {
    grams.sort_by(|(ga, ca), (gb, cb)| cb.cmp(ca).then_with(|| ga.cmp(gb)));
}

pub fn build_table(sentences: &[ProcessedSentence]) -> NgramTable {
    NgramTable::from_token_lists(sentences.iter().map(|s| &s.tokens))
}

/// Count `sentences` in up to `shards` contiguous chunks on the current rayon
/// pool and merge the partial tables.
pub fn build_table_sharded(sentences: &[ProcessedSentence], shards: usize) -> NgramTable {
    if sentences.is_empty() {
        return NgramTable::new();
    }
    let chunk = sentences.len().div_ceil(shards.max(1));
    sentences.par_chunks(chunk).map(build_table).reduce(NgramTable::new, merge)
}

/// Pointwise sum of two tables.
pub fn merge(mut a: NgramTable, b: NgramTable) -> NgramTable {
    if a.unigrams.len() < b.unigrams.len() {
        let mut b = b;
        b.merge_from(&a);
        return b;
    }
    a.merge_from(&b);
    a
}

#[derive(Serialize, Deserialize)]
struct CanonicalTable {
    sentence_count: u64,
    total_tokens: u64,
    total_bigram_positions: u64,
    total_trigram_positions: u64,
    unigrams: BTreeMap<String, u64>,
    bigrams: Vec<([String; 2], u64)>,
    trigrams: Vec<([String; 3], u64)>,
}

impl From<NgramTable> for CanonicalTable {
    fn from(t: NgramTable) -> Self {
        let mut bigrams: Vec<_> = t.bigrams.into_iter().collect();
        bigrams.sort();
        let mut trigrams: Vec<_> = t.trigrams.into_iter().collect();
        trigrams.sort();
        CanonicalTable {
            sentence_count: t.sentence_count,
            total_tokens: t.total_tokens,
            total_bigram_positions: t.total_bigram_positions,
            total_trigram_positions: t.total_trigram_positions,
            unigrams: t.unigrams.into_iter().collect(),
            bigrams,
            trigrams,
        }
    }
}

impl From<CanonicalTable> for NgramTable {
    fn from(c: CanonicalTable) -> Self {
        let mut t = NgramTable {
            sentence_count: c.sentence_count,
            total_tokens: c.total_tokens,
            total_bigram_positions: c.total_bigram_positions,
            total_trigram_positions: c.total_trigram_positions,
            unigrams: c.unigrams.into_iter().collect(),
            ..NgramTable::default()
        };
        for ([a, b], n) in c.bigrams {
            bump(&mut t.bigram_histories, a.clone(), n);
            t.bigrams.insert([a, b], n);
        }
        for ([a, b, x], n) in c.trigrams {
            bump(&mut t.trigram_histories, [a.clone(), b.clone()], n);
            t.trigrams.insert([a, b, x], n);
        }
        t
    }
}
