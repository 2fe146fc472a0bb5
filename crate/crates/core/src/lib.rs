//! Batch opinion mining over star-rated customer reviews.
//!
//! The crate runs a staged pipeline:
//!
//! 1. [`corpus`] loads reviews from CSV or JSONL, validates them and removes duplicates.
//! 2. [`textprep`] splits each review into sentences and turns every sentence into
//!    lowercase, stop-word-free, Porter-stemmed tokens.
//! 3. [`insights`] partitions sentences by rating polarity, and [`ngram`] counts
//!    unigrams, bigrams and trigrams per segment and answers maximum-likelihood
//!    probability queries over those counts.
//! 4. [`insights`] matches frequent n-grams against a topic dictionary, scores topic
//!    polarity and rolls the topics up into a McKinsey 7S assessment.
//! 5. [`report`] orchestrates the stages and renders JSON and Markdown reports.
//!
//! [`fixture`] generates the seeded synthetic corpus used by the tests and the
//! `gen-fixture` command.

#![forbid(unsafe_code)]

pub mod corpus;
pub mod fixture;
pub mod insights;
pub mod ngram;
pub mod report;
pub mod textprep;

pub use corpus::{Corpus, ReviewRecord};
pub use insights::{SentimentClass, SevenSAssessment, TopicDictionary, TopicProfile};
pub use ngram::NgramTable;
pub use report::{Report, RunConfig};
pub use textprep::{PipelineConfig, ProcessedSentence};
