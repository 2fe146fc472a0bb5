//! Sentence splitting, tokenization, stop-word removal and stemming.
//!
//! Every function here is a pure function of its input and the
//! [`PipelineConfig`], so records can be preprocessed in parallel.

pub mod porter;

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::ReviewRecord;

pub use porter::stem;

const DEFAULT_STOP_WORDS: &str = include_str!("../../data/stop_words.txt");
const DEFAULT_ABBREVIATIONS: &str = include_str!("../../data/abbreviations.txt");

#[derive(Debug, Error)]
pub enum TextprepError {
    #[error("cannot read word list {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid preprocessing config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StemmerKind {
    #[default]
    Porter,
    None,
}

impl StemmerKind {
    pub fn apply(self, token: &str) -> String {
        match self {
            // Suffix stripping can expose an apostrophe ("x'ing" -> "x'").
            StemmerKind::Porter => stem(token).trim_end_matches('\'').to_string(),
            StemmerKind::None => token.to_string(),
        }
    }
}

/// Parameters of the preprocessing pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub stop_words: BTreeSet<String>,
    pub stemmer: StemmerKind,
    pub min_token_length: usize,
    pub sentence_abbreviations: BTreeSet<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            stop_words: parse_word_list(DEFAULT_STOP_WORDS),
            stemmer: StemmerKind::Porter,
            min_token_length: 2,
            sentence_abbreviations: parse_word_list(DEFAULT_ABBREVIATIONS),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), TextprepError> {
        if self.min_token_length == 0 {
            return Err(TextprepError::InvalidConfig("min_token_length must be at least 1".into()));
        }
        if let Some(bad) = self.stop_words.iter().find(|w| w.is_empty() || **w != lowercase(w)) {
            return Err(TextprepError::InvalidConfig(format!("stop word {bad:?} is not a non-empty lowercase string")));
        }
        Ok(())
    }

    /// Run the token half of the pipeline (tokenize, lowercase, filter, stem) on
    /// one piece of text.
    pub fn normalize_tokens(&self, text: &str) -> Vec<String> {
        tokenize(text)
            .into_iter()
            .map(lowercase)
            .filter(|t| self.keeps(t))
            .map(|t| self.stemmer.apply(&t))
            // A stem can itself be short or a stop word ("having" -> "have").
            .filter(|t| self.keeps(t))
            .collect()
    }

    fn keeps(&self, token: &str) -> bool {
        token.chars().count() >= self.min_token_length && !self.stop_words.contains(token)
    }
}

/// Parse a word-list file body: one entry per line, `#` starts a comment,
/// blank lines ignored, entries lowercased.
pub fn parse_word_list(body: &str) -> BTreeSet<String> {
    body.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty()).map(lowercase).collect()
}

pub fn load_word_list(path: &Path) -> Result<BTreeSet<String>, TextprepError> {
    let body =
        std::fs::read_to_string(path).map_err(|source| TextprepError::Io { path: path.to_path_buf(), source })?;
    Ok(parse_word_list(&body))
}

/// Simple per-character lowercase mapping; typographic apostrophes become `'`.
pub fn lowercase(s: &str) -> String {
    s.chars().map(|c| if c == '\u{2019}' { '\'' } else { c }).flat_map(char::to_lowercase).collect()
}

/// One sentence after preprocessing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessedSentence {
    pub review_id: String,
    /// Position of the sentence within its review, counted before empty or
    /// repeated sentences were dropped.
    pub sentence_index: usize,
    pub tokens: Vec<String>,
    pub raw: String,
}

/// Split after `.`, `!` or `?` when followed by whitespace, unless the word
/// ending in `.` is a listed abbreviation. Sentences are trimmed and never empty.
pub fn split_sentences(text: &str, config: &PipelineConfig) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut word_start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c.is_whitespace() {
            word_start = i + c.len_utf8();
            continue;
        }
        let Some(&(_, next)) = chars.peek() else { break };
        if !matches!(c, '.' | '!' | '?') || !next.is_whitespace() {
            continue;
        }
        if c == '.' {
            let word = lowercase(&text[word_start..=i]);
            if config.sentence_abbreviations.contains(&word) {
                continue;
            }
        }
        let sentence = text[start..=i].trim();
        if !sentence.is_empty() {
            sentences.push(sentence.to_string());
        }
        start = i + 1;
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        sentences.push(tail.to_string());
    }
    sentences
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Maximal runs of letters and digits; an apostrophe stays inside a token only
/// when a letter sits on both sides. Everything else separates tokens.
pub fn tokenize(sentence: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = sentence.char_indices().collect();
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (pos, &(i, c)) in chars.iter().enumerate() {
        let inside = c.is_alphanumeric()
            || (is_apostrophe(c)
                && start.is_some()
                && pos > 0
                && chars[pos - 1].1.is_alphabetic()
                && chars.get(pos + 1).is_some_and(|&(_, n)| n.is_alphabetic()));
        match (inside, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                tokens.push(&sentence[s..i]);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        tokens.push(&sentence[s..]);
    }
    tokens
}

/// Turn one review into its preprocessed sentences. Sentences left without
/// tokens are dropped, as are later sentences repeating an earlier token list.
pub fn preprocess(record: &ReviewRecord, config: &PipelineConfig) -> Vec<ProcessedSentence> {
    let mut seen: HashSet<Vec<String>> = HashSet::new();
    let mut out = Vec::new();
    for (sentence_index, raw) in split_sentences(&record.text, config).into_iter().enumerate() {
        let tokens = config.normalize_tokens(&raw);
        if tokens.is_empty() || !seen.insert(tokens.clone()) {
            continue;
        }
        out.push(ProcessedSentence { review_id: record.review_id.clone(), sentence_index, tokens, raw });
    }
    out
}
