//! Rating segmentation, key-topic extraction and the 7S roll-up.
//!
//! Sentences inherit the polarity class of their review's star rating. Each
//! class gets its own [`NgramTable`]; frequent n-grams from those tables are
//! matched against a seed-phrase [`TopicDictionary`] to produce per-topic
//! occurrence rates and a polarity score, which are then grouped by 7S element.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::ngram::{NgramOrder, NgramTable};
use crate::textprep::{tokenize, PipelineConfig, ProcessedSentence};

const DEFAULT_TOPICS: &str = include_str!("../data/topics.json");
const DEFAULT_SEVEN_S: &str = include_str!("../data/seven_s.json");

#[derive(Debug, Error)]
pub enum InsightsError {
    #[error("rating {0} is outside 1..=5")]
    InvalidRating(u8),
    #[error("sentence refers to unknown review {0:?}")]
    DanglingReview(String),
    #[error("{0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentClass {
    Negative,
    Neutral,
    Positive,
}

impl SentimentClass {
    pub const ALL: [SentimentClass; 3] = [SentimentClass::Negative, SentimentClass::Neutral, SentimentClass::Positive];

    pub fn as_str(self) -> &'static str {
        match self {
            SentimentClass::Negative => "negative",
            SentimentClass::Neutral => "neutral",
            SentimentClass::Positive => "positive",
        }
    }
}

impl fmt::Display for SentimentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// 1–2 stars are negative, 3 neutral, 4–5 positive.
pub fn classify_rating(rating: u8) -> Result<SentimentClass, InsightsError> {
    match rating {
        1 | 2 => Ok(SentimentClass::Negative),
        3 => Ok(SentimentClass::Neutral),
        4 | 5 => Ok(SentimentClass::Positive),
        other => Err(InsightsError::InvalidRating(other)),
    }
}

/// Sentences grouped by the class of their parent review. All three classes are
/// always present.
pub type Segments = BTreeMap<SentimentClass, Vec<ProcessedSentence>>;

pub fn segment<I>(sentences: I, corpus: &Corpus) -> Result<Segments, InsightsError>
where
    I: IntoIterator<Item = ProcessedSentence>,
{
    let mut segments: Segments = SentimentClass::ALL.iter().map(|&c| (c, Vec::new())).collect();
    for s in sentences {
        let record = corpus.get(&s.review_id).ok_or_else(|| InsightsError::DanglingReview(s.review_id.clone()))?;
        let class = classify_rating(record.rating)?;
        segments.get_mut(&class).expect("all classes present").push(s);
    }
    Ok(segments)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicEntry {
    pub seeds: Vec<String>,
    #[serde(default)]
    pub description: String,
}

/// Named topics, each described by surface seed phrases of one to three words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicDictionary {
    pub topics: BTreeMap<String, TopicEntry>,
}

impl Default for TopicDictionary {
    /// The ten service topics: Promotion, Features, Staff, Reservation, Waiting
    /// Area, Schedule, Safety, Guided Tour, Site Visibility, Vehicle Maintenance.
    fn default() -> Self {
        TopicDictionary::from_json(DEFAULT_TOPICS).expect("bundled topic dictionary")
    }
}

impl TopicDictionary {
    pub fn from_json(body: &str) -> Result<Self, InsightsError> {
        let dict: TopicDictionary =
            serde_json::from_str(body).map_err(|e| InsightsError::Config(format!("topic dictionary: {e}")))?;
        dict.validate()?;
        Ok(dict)
    }

    pub fn load(path: &Path) -> Result<Self, InsightsError> {
        Self::from_json(&read(path)?)
    }

    pub fn validate(&self) -> Result<(), InsightsError> {
        if self.topics.is_empty() {
            return Err(InsightsError::Config("topic dictionary is empty".into()));
        }
        for (name, entry) in &self.topics {
            if name.trim().is_empty() {
                return Err(InsightsError::Config("topic with an empty name".into()));
            }
            if entry.seeds.is_empty() {
                return Err(InsightsError::Config(format!("topic {name:?} has no seeds")));
            }
            for seed in &entry.seeds {
                let n = tokenize(seed).len();
                if !(1..=3).contains(&n) {
                    return Err(InsightsError::Config(format!(
                        "seed {seed:?} of topic {name:?} must have 1 to 3 words, has {n}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Pass every seed through the token pipeline so seeds and corpus share one
    /// normalization.
    pub fn normalize(&self, pipeline: &PipelineConfig) -> Result<NormalizedDictionary, InsightsError> {
        self.validate()?;
        let mut topics = BTreeMap::new();
        for (name, entry) in &self.topics {
            let mut seeds = Vec::new();
            for seed in &entry.seeds {
                let tokens = pipeline.normalize_tokens(seed);
                if tokens.is_empty() {
                    return Err(InsightsError::Config(format!(
                        "seed {seed:?} of topic {name:?} is removed entirely by preprocessing"
                    )));
                }
                if !seeds.contains(&tokens) {
                    seeds.push(tokens);
                }
            }
            topics.insert(name.clone(), (entry.description.clone(), seeds));
        }
        Ok(NormalizedDictionary { topics })
    }
}

/// Topic name -> (description, normalized seed token sequences).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedDictionary {
    pub topics: BTreeMap<String, (String, Vec<Vec<String>>)>,
}

impl NormalizedDictionary {
    /// Topics whose seeds occur in `ngram` as a contiguous run.
    pub fn matching_topics<'a, 'b>(&'a self, ngram: &'b [String]) -> impl Iterator<Item = &'a str> + use<'a, 'b> {
        self.topics.iter().filter_map(move |(name, (_, seeds))| {
            seeds.iter().any(|seed| contains_run(ngram, seed)).then_some(name.as_str())
        })
    }
}

fn contains_run(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractConfig {
    pub k: usize,
    pub min_count: u64,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig { k: 25, min_count: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedNgram {
    pub ngram: Vec<String>,
    pub segment: SentimentClass,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicProfile {
    pub topic: String,
    pub description: String,
    pub matched_ngrams: Vec<MatchedNgram>,
    /// Matched occurrences per 1000 sentences of each segment, rounded to 6 decimals.
    pub freq_per_kilosentence: BTreeMap<SentimentClass, f64>,
    /// (p - n) / (p + n) over the positive and negative rates, rounded to 6 decimals.
    pub polarity: f64,
    pub dominant_class: SentimentClass,
}

pub fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// The n-grams a segment offers for topic matching: its top `k` bigrams and
/// trigrams plus every unigram, all with count at least `min_count`.
pub fn candidate_ngrams(table: &NgramTable, config: &ExtractConfig) -> Vec<(Vec<String>, u64)> {
    let mut out = table.top_ngrams(NgramOrder::Bigram, config.k, config.min_count);
    out.extend(table.top_ngrams(NgramOrder::Trigram, config.k, config.min_count));
    out.extend(table.frequent_unigrams(config.min_count));
    out
}

/// Score every topic against the per-segment tables. Topics with no positive or
/// negative evidence are omitted; the rest come back sorted by name.
pub fn extract_topics(
    tables: &BTreeMap<SentimentClass, NgramTable>,
    dict: &NormalizedDictionary,
    config: &ExtractConfig,
) -> Result<Vec<TopicProfile>, InsightsError> {
    if dict.topics.is_empty() {
        return Err(InsightsError::Config("topic dictionary is empty".into()));
    }
    let mut matched: BTreeMap<&str, Vec<MatchedNgram>> = BTreeMap::new();
    let mut counts: BTreeMap<(&str, SentimentClass), u64> = BTreeMap::new();
    for class in SentimentClass::ALL {
        let Some(table) = tables.get(&class) else { continue };
        for (ngram, count) in candidate_ngrams(table, config) {
            for topic in dict.matching_topics(&ngram) {
                *counts.entry((topic, class)).or_insert(0) += count;
                matched.entry(topic).or_default().push(MatchedNgram { ngram: ngram.clone(), segment: class, count });
            }
        }
    }

    let mut profiles = Vec::new();
    for (name, (description, _)) in &dict.topics {
        let rates: BTreeMap<SentimentClass, f64> = SentimentClass::ALL
            .iter()
            .map(|&class| {
                let sentences = tables.get(&class).map_or(0, NgramTable::sentence_count);
                let hits = counts.get(&(name.as_str(), class)).copied().unwrap_or(0);
                let rate = if sentences == 0 { 0.0 } else { hits as f64 / sentences as f64 * 1000.0 };
                (class, rate)
            })
            .collect();
        let p = rates[&SentimentClass::Positive];
        let n = rates[&SentimentClass::Negative];
        if p + n <= 0.0 {
            continue;
        }
        profiles.push(TopicProfile {
            topic: name.clone(),
            description: description.clone(),
            matched_ngrams: matched.remove(name.as_str()).unwrap_or_default(),
            dominant_class: dominant(&rates),
            polarity: round6((p - n) / (p + n)),
            freq_per_kilosentence: rates.into_iter().map(|(c, r)| (c, round6(r))).collect(),
        });
    }
    Ok(profiles)
}

fn dominant(rates: &BTreeMap<SentimentClass, f64>) -> SentimentClass {
    let max = rates.values().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut leaders = rates.iter().filter(|(_, &r)| r == max).map(|(&c, _)| c);
    match (leaders.next(), leaders.next()) {
        (Some(only), None) => only,
        _ => SentimentClass::Neutral,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SevenSElement {
    Strategy,
    Structure,
    Systems,
    SharedValues,
    Skills,
    Style,
    Staff,
}

impl SevenSElement {
    pub const ALL: [SevenSElement; 7] = [
        SevenSElement::Strategy,
        SevenSElement::Structure,
        SevenSElement::Systems,
        SevenSElement::SharedValues,
        SevenSElement::Skills,
        SevenSElement::Style,
        SevenSElement::Staff,
    ];

    pub fn kind(self) -> ElementKind {
        match self {
            SevenSElement::Strategy | SevenSElement::Structure | SevenSElement::Systems => ElementKind::Hard,
            _ => ElementKind::Soft,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SevenSElement::Strategy => "Strategy",
            SevenSElement::Structure => "Structure",
            SevenSElement::Systems => "Systems",
            SevenSElement::SharedValues => "SharedValues",
            SevenSElement::Skills => "Skills",
            SevenSElement::Style => "Style",
            SevenSElement::Staff => "Staff",
        }
    }
}

impl fmt::Display for SevenSElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SevenSElement {
    type Err = InsightsError;

    /// Case-insensitive; spaces, hyphens and underscores are ignored
    /// ("Shared Values" == "SharedValues").
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| !matches!(c, ' ' | '-' | '_')).flat_map(char::to_lowercase).collect();
        SevenSElement::ALL
            .into_iter()
            .find(|e| e.as_str().to_lowercase() == key)
            .ok_or_else(|| InsightsError::Config(format!("{s:?} is not one of the seven 7S elements")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Hard,
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Strength,
    Weakness,
    Mixed,
    NoEvidence,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Strength => "strength",
            Verdict::Weakness => "weakness",
            Verdict::Mixed => "mixed",
            Verdict::NoEvidence => "no-evidence",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictThresholds {
    pub strength: f64,
    pub weakness: f64,
}

impl Default for VerdictThresholds {
    fn default() -> Self {
        VerdictThresholds { strength: 0.2, weakness: -0.2 }
    }
}

impl VerdictThresholds {
    pub fn verdict(&self, polarities: &[f64]) -> Verdict {
        if polarities.is_empty() {
            Verdict::NoEvidence
        } else if polarities.iter().all(|&p| p > self.strength) {
            Verdict::Strength
        } else if polarities.iter().all(|&p| p < self.weakness) {
            Verdict::Weakness
        } else {
            Verdict::Mixed
        }
    }
}

/// Topic name -> 7S element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SevenSMapping(pub BTreeMap<String, SevenSElement>);

impl Default for SevenSMapping {
    /// Promotion -> Strategy; Reservation and Features -> Systems; Safety and
    /// Schedule -> SharedValues; Guided Tour -> Skills; Staff -> Staff.
    /// Structure and Style have no default evidence.
    fn default() -> Self {
        SevenSMapping::from_json(DEFAULT_SEVEN_S).expect("bundled 7S mapping")
    }
}

impl SevenSMapping {
    pub fn from_json(body: &str) -> Result<Self, InsightsError> {
        let raw: BTreeMap<String, String> =
            serde_json::from_str(body).map_err(|e| InsightsError::Config(format!("7S mapping: {e}")))?;
        raw.into_iter()
            .map(|(topic, element)| Ok((topic, element.parse()?)))
            .collect::<Result<_, _>>()
            .map(SevenSMapping)
    }

    pub fn load(path: &Path) -> Result<Self, InsightsError> {
        Self::from_json(&read(path)?)
    }

    /// Every mapped topic must exist in the dictionary.
    pub fn check_topics(&self, dict: &TopicDictionary) -> Result<(), InsightsError> {
        match self.0.keys().find(|t| !dict.topics.contains_key(*t)) {
            Some(t) => Err(InsightsError::Config(format!("7S mapping names unknown topic {t:?}"))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicEvidence {
    pub topic: String,
    pub polarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementAssessment {
    pub kind: ElementKind,
    pub topics: Vec<TopicEvidence>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SevenSAssessment {
    pub elements: BTreeMap<SevenSElement, ElementAssessment>,
    /// Extracted topics that no element claims.
    pub unmapped_topics: Vec<String>,
}

pub fn map_7s(profiles: &[TopicProfile], mapping: &SevenSMapping, thresholds: &VerdictThresholds) -> SevenSAssessment {
    let mut members: BTreeMap<SevenSElement, Vec<TopicEvidence>> = BTreeMap::new();
    let mut unmapped = Vec::new();
    for p in profiles {
        match mapping.0.get(&p.topic) {
            Some(&element) => {
                members.entry(element).or_default().push(TopicEvidence { topic: p.topic.clone(), polarity: p.polarity })
            }
            None => unmapped.push(p.topic.clone()),
        }
    }
    let elements = SevenSElement::ALL
        .into_iter()
        .map(|element| {
            let topics = members.remove(&element).unwrap_or_default();
            let polarities: Vec<f64> = topics.iter().map(|t| t.polarity).collect();
            let verdict = thresholds.verdict(&polarities);
            (element, ElementAssessment { kind: element.kind(), topics, verdict })
        })
        .collect();
    unmapped.sort();
    SevenSAssessment { elements, unmapped_topics: unmapped }
}

fn read(path: &Path) -> Result<String, InsightsError> {
    std::fs::read_to_string(path).map_err(|source| InsightsError::Io { path: path.to_path_buf(), source })
}
