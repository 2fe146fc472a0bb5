//! Pipeline orchestration and report rendering.
//!
//! [`run_pipeline`] runs ingest, dedup, preprocess, segment, count, topic
//! extraction and the 7S roll-up, and assembles a [`Report`]. It owns all
//! parallelism: records are preprocessed and segments are counted on a rayon
//! pool sized by [`RunConfig::threads`]. Every stage is order-preserving or
//! merge-exact, so output does not depend on the thread count.
//!
//! The JSON form has sorted keys and values rounded to 6 decimals, so equal
//! inputs give byte-identical files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{dedup, Corpus, CorpusError, InputFormat};
use crate::insights::{
    extract_topics, map_7s, round6, segment, ExtractConfig, InsightsError, SentimentClass, SevenSAssessment,
    SevenSElement, SevenSMapping, TopicDictionary, TopicProfile, VerdictThresholds,
};
use crate::ngram::{build_table_sharded, NgramOrder, NgramTable};
use crate::textprep::{load_word_list, preprocess, PipelineConfig, StemmerKind, TextprepError};

pub const CONFIG_ENV_VAR: &str = "REVMINE_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Preprocess,
    Segment,
    Count,
    Topics,
    SevenS,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Preprocess => "preprocess",
            Stage::Segment => "segment",
            Stage::Count => "count",
            Stage::Topics => "topics",
            Stage::SevenS => "7s",
            Stage::Output => "output",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Io,
    EmptyCorpus,
    Config,
    Internal,
}

/// A fatal error tagged with the stage that raised it.
#[derive(Debug)]
pub struct PipelineError {
    pub stage: Stage,
    pub kind: ErrorKind,
    pub message: String,
}

impl PipelineError {
    pub fn new(stage: Stage, kind: ErrorKind, message: impl Into<String>) -> Self {
        PipelineError { stage, kind, message: message.into() }
    }

    /// 2 usage, 3 I/O, 4 empty corpus, 5 configuration, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Usage => 2,
            ErrorKind::Io => 3,
            ErrorKind::EmptyCorpus => 4,
            ErrorKind::Config => 5,
            ErrorKind::Internal => 1,
        }
    }

    fn from_corpus(e: CorpusError) -> Self {
        let kind = match e {
            CorpusError::Empty { .. } => ErrorKind::EmptyCorpus,
            CorpusError::Io { .. } | CorpusError::Csv { .. } => ErrorKind::Io,
        };
        PipelineError::new(Stage::Ingest, kind, e.to_string())
    }

    fn from_textprep(stage: Stage, e: TextprepError) -> Self {
        let kind = match e {
            TextprepError::Io { .. } => ErrorKind::Io,
            TextprepError::InvalidConfig(_) => ErrorKind::Config,
        };
        PipelineError::new(stage, kind, e.to_string())
    }

    fn from_insights(stage: Stage, e: InsightsError) -> Self {
        let kind = match e {
            InsightsError::Io { .. } => ErrorKind::Io,
            InsightsError::Config(_) => ErrorKind::Config,
            InsightsError::InvalidRating(_) | InsightsError::DanglingReview(_) => ErrorKind::Internal,
        };
        PipelineError::new(stage, kind, e.to_string())
    }
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.stage, self.message)
    }
}

impl std::error::Error for PipelineError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    Csv,
    Jsonl,
}

impl FileFormat {
    /// Guess from the file extension; anything but `.jsonl`/`.ndjson` is CSV.
    pub fn from_path(path: &Path) -> FileFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => FileFormat::Jsonl,
            _ => FileFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Markdown,
}

/// Everything one `analyze` run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    /// `None` picks the format from each file's extension.
    pub format: Option<FileFormat>,
    pub has_header: bool,
    pub pipeline: PipelineConfig,
    /// `None` uses the built-in topic dictionary.
    pub dictionary: Option<PathBuf>,
    /// `None` uses the built-in 7S mapping.
    pub mapping: Option<PathBuf>,
    pub k: usize,
    pub min_count: u64,
    pub thresholds: VerdictThresholds,
    pub out_dir: PathBuf,
    pub emit: BTreeSet<OutputFormat>,
    /// 0 lets rayon choose.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: Vec::new(),
            format: None,
            has_header: true,
            pipeline: PipelineConfig::default(),
            dictionary: None,
            mapping: None,
            k: 25,
            min_count: 3,
            thresholds: VerdictThresholds::default(),
            out_dir: PathBuf::from("report"),
            emit: BTreeSet::from([OutputFormat::Json, OutputFormat::Markdown]),
            threads: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::new(Stage::Config, ErrorKind::Config, m));
        if self.inputs.is_empty() {
            return bad("at least one input file is required");
        }
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if self.min_count == 0 {
            return bad("min_count must be at least 1");
        }
        if self.emit.is_empty() {
            return bad("at least one output format is required");
        }
        if self.thresholds.weakness > self.thresholds.strength {
            return bad("weakness threshold must not exceed strength threshold");
        }
        self.pipeline.validate().map_err(|e| PipelineError::from_textprep(Stage::Config, e))
    }

    fn sources(&self) -> Vec<(PathBuf, InputFormat)> {
        self.inputs
            .iter()
            .map(|p| {
                let format = match self.format.unwrap_or_else(|| FileFormat::from_path(p)) {
                    FileFormat::Csv => InputFormat::Csv { has_header: self.has_header },
                    FileFormat::Jsonl => InputFormat::Jsonl,
                };
                (p.clone(), format)
            })
            .collect()
    }

    /// Apply a config file, then explicit overrides, on top of the defaults.
    pub fn resolve(file: Option<ConfigFile>, overrides: ConfigFile) -> Result<RunConfig, PipelineError> {
        let mut config = RunConfig::default();
        if let Some(file) = file {
            file.apply(&mut config)?;
        }
        overrides.apply(&mut config)?;
        Ok(config)
    }
}

/// JSON config file mirroring [`RunConfig`]; every field is optional. Word lists,
/// dictionary and mapping are given as file paths.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub inputs: Option<Vec<PathBuf>>,
    pub format: Option<FileFormat>,
    pub has_header: Option<bool>,
    pub stop_words: Option<PathBuf>,
    pub abbreviations: Option<PathBuf>,
    pub stemmer: Option<StemmerKind>,
    pub min_token_length: Option<usize>,
    pub dictionary: Option<PathBuf>,
    pub mapping: Option<PathBuf>,
    pub k: Option<usize>,
    pub min_count: Option<u64>,
    pub strength_threshold: Option<f64>,
    pub weakness_threshold: Option<f64>,
    pub out: Option<PathBuf>,
    pub emit: Option<Vec<OutputFormat>>,
    pub threads: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<ConfigFile, PipelineError> {
        let body = std::fs::read_to_string(path).map_err(|e| {
            PipelineError::new(Stage::Config, ErrorKind::Io, format!("cannot read {}: {e}", path.display()))
        })?;
        serde_json::from_str(&body)
            .map_err(|e| PipelineError::new(Stage::Config, ErrorKind::Config, format!("{}: {e}", path.display())))
    }

    pub fn apply(self, c: &mut RunConfig) -> Result<(), PipelineError> {
        let list = |p: &Path| load_word_list(p).map_err(|e| PipelineError::from_textprep(Stage::Config, e));
        if let Some(v) = self.inputs {
            c.inputs = v;
        }
        if let Some(v) = self.format {
            c.format = Some(v);
        }
        if let Some(v) = self.has_header {
            c.has_header = v;
        }
        if let Some(p) = self.stop_words {
            c.pipeline.stop_words = list(&p)?;
        }
        if let Some(p) = self.abbreviations {
            c.pipeline.sentence_abbreviations = list(&p)?;
        }
        if let Some(v) = self.stemmer {
            c.pipeline.stemmer = v;
        }
        if let Some(v) = self.min_token_length {
            c.pipeline.min_token_length = v;
        }
        if let Some(v) = self.dictionary {
            c.dictionary = Some(v);
        }
        if let Some(v) = self.mapping {
            c.mapping = Some(v);
        }
        if let Some(v) = self.k {
            c.k = v;
        }
        if let Some(v) = self.min_count {
            c.min_count = v;
        }
        if let Some(v) = self.strength_threshold {
            c.thresholds.strength = v;
        }
        if let Some(v) = self.weakness_threshold {
            c.thresholds.weakness = v;
        }
        if let Some(v) = self.out {
            c.out_dir = v;
        }
        if let Some(v) = self.emit {
            c.emit = v.into_iter().collect();
        }
        if let Some(v) = self.threads {
            c.threads = v;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

/// Where a dictionary or mapping came from, plus a digest of its content.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceEcho {
    pub origin: String,
    pub sha256: String,
}

/// The analysis parameters that shape report content. Input paths, output
/// location and thread count are left out so they cannot change the bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub stemmer: StemmerKind,
    pub min_token_length: usize,
    pub stop_word_count: usize,
    pub stop_words_sha256: String,
    pub abbreviations_sha256: String,
    pub dictionary: SourceEcho,
    pub mapping: SourceEcho,
    pub k: usize,
    pub min_count: u64,
    pub thresholds: VerdictThresholds,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionEntry {
    pub row: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub input_rows: usize,
    pub records_kept: usize,
    pub records_rejected: usize,
    pub rejections: Vec<RejectionEntry>,
    pub reviews_per_segment: BTreeMap<SentimentClass, u64>,
    pub sentences_total: u64,
    pub sentences_per_segment: BTreeMap<SentimentClass, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedNgram {
    pub ngram: Vec<String>,
    pub count: u64,
    /// MLE probability of the last token given the preceding ones.
    pub cond_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSummary {
    pub sentence_count: u64,
    pub total_tokens: u64,
    pub distinct_unigrams: u64,
    pub top_bigrams: Vec<RankedNgram>,
    pub top_trigrams: Vec<RankedNgram>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: ToolInfo,
    pub config: ConfigEcho,
    pub input_sha256: String,
    pub corpus: CorpusSummary,
    pub segments: BTreeMap<SentimentClass, SegmentSummary>,
    pub topics: Vec<TopicProfile>,
    pub seven_s: SevenSAssessment,
    pub caveats: Vec<String>,
}

impl Report {
    /// Pretty JSON with every object's keys sorted, newline-terminated.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serialization");
        let mut s = serde_json::to_string_pretty(&value).expect("report serialization");
        s.push('\n');
        s
    }

    pub fn from_json(body: &str) -> serde_json::Result<Report> {
        serde_json::from_str(body)
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn list_digest(words: &BTreeSet<String>) -> String {
    let joined: Vec<&str> = words.iter().map(String::as_str).collect();
    sha256_hex(joined.join("\n").as_bytes())
}

/// Counting stage output shared by `analyze` and `ngrams`.
pub struct Counted {
    pub corpus: Corpus,
    pub sentences_total: u64,
    pub tables: BTreeMap<SentimentClass, NgramTable>,
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool, PipelineError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| PipelineError::new(Stage::Config, ErrorKind::Internal, e.to_string()))
}

/// Ingest, dedup, preprocess, segment and count.
pub fn count_segments(config: &RunConfig) -> Result<Counted, PipelineError> {
    let corpus = Corpus::load(&config.sources()).map_err(PipelineError::from_corpus)?;
    let corpus = dedup(corpus);
    let pool = thread_pool(config.threads)?;
    pool.install(|| {
        let sentences: Vec<_> =
            corpus.records().par_iter().flat_map_iter(|r| preprocess(r, &config.pipeline)).collect();
        let sentences_total = sentences.len() as u64;
        let segments = segment(sentences, &corpus).map_err(|e| PipelineError::from_insights(Stage::Segment, e))?;
        let shards = rayon::current_num_threads();
        let tables = segments.iter().map(|(&class, s)| (class, build_table_sharded(s, shards))).collect();
        Ok(Counted { corpus, sentences_total, tables })
    })
}

fn load_dictionary(config: &RunConfig) -> Result<(TopicDictionary, String), PipelineError> {
    match &config.dictionary {
        None => Ok((TopicDictionary::default(), "built-in".into())),
        Some(p) => TopicDictionary::load(p)
            .map(|d| (d, "file".into()))
            .map_err(|e| PipelineError::from_insights(Stage::Config, e)),
    }
}

fn load_mapping(config: &RunConfig) -> Result<(SevenSMapping, String), PipelineError> {
    match &config.mapping {
        None => Ok((SevenSMapping::default(), "built-in".into())),
        Some(p) => SevenSMapping::load(p)
            .map(|m| (m, "file".into()))
            .map_err(|e| PipelineError::from_insights(Stage::Config, e)),
    }
}

pub fn ranked(table: &NgramTable, order: NgramOrder, k: usize, min_count: u64) -> Vec<RankedNgram> {
    table
        .top_ngrams(order, k, min_count)
        .into_iter()
        .map(|(ngram, count)| {
            let p = match ngram.as_slice() {
                [a, b] => table.cond_prob_bigram(a, b),
                [a, b, c] => table.cond_prob_trigram(a, b, c),
                _ => unreachable!("top_ngrams yields bigrams or trigrams"),
            };
            // A listed n-gram always has a seen history.
            let cond_prob = round6(p.expect("seen history"));
            RankedNgram { ngram, count, cond_prob }
        })
        .collect()
}

/// Run the full analysis described by `config`.
pub fn run_pipeline(config: &RunConfig) -> Result<Report, PipelineError> {
    config.validate()?;
    let (dictionary, dict_origin) = load_dictionary(config)?;
    let (mapping, map_origin) = load_mapping(config)?;
    mapping.check_topics(&dictionary).map_err(|e| PipelineError::from_insights(Stage::Config, e))?;
    let normalized =
        dictionary.normalize(&config.pipeline).map_err(|e| PipelineError::from_insights(Stage::Config, e))?;

    let Counted { corpus, sentences_total, tables } = count_segments(config)?;

    let extract = ExtractConfig { k: config.k, min_count: config.min_count };
    let topics =
        extract_topics(&tables, &normalized, &extract).map_err(|e| PipelineError::from_insights(Stage::Topics, e))?;
    let seven_s = map_7s(&topics, &mapping, &config.thresholds);

    let mut reviews_per_segment: BTreeMap<SentimentClass, u64> = SentimentClass::ALL.iter().map(|&c| (c, 0)).collect();
    for r in corpus.records() {
        let class =
            crate::insights::classify_rating(r.rating).map_err(|e| PipelineError::from_insights(Stage::Segment, e))?;
        *reviews_per_segment.get_mut(&class).expect("all classes") += 1;
    }

    let segments = tables
        .iter()
        .map(|(&class, t)| {
            let summary = SegmentSummary {
                sentence_count: t.sentence_count(),
                total_tokens: t.total_tokens(),
                distinct_unigrams: t.unigrams().count() as u64,
                top_bigrams: ranked(t, NgramOrder::Bigram, config.k, config.min_count),
                top_trigrams: ranked(t, NgramOrder::Trigram, config.k, config.min_count),
            };
            (class, summary)
        })
        .collect();

    let dictionary_json = serde_json::to_string(&dictionary).expect("dictionary serialization");
    let mapping_json = serde_json::to_string(&mapping).expect("mapping serialization");

    Ok(Report {
        tool: ToolInfo { name: env!("CARGO_PKG_NAME").into(), version: env!("CARGO_PKG_VERSION").into() },
        config: ConfigEcho {
            stemmer: config.pipeline.stemmer,
            min_token_length: config.pipeline.min_token_length,
            stop_word_count: config.pipeline.stop_words.len(),
            stop_words_sha256: list_digest(&config.pipeline.stop_words),
            abbreviations_sha256: list_digest(&config.pipeline.sentence_abbreviations),
            dictionary: SourceEcho { origin: dict_origin, sha256: sha256_hex(dictionary_json.as_bytes()) },
            mapping: SourceEcho { origin: map_origin, sha256: sha256_hex(mapping_json.as_bytes()) },
            k: config.k,
            min_count: config.min_count,
            thresholds: config.thresholds,
        },
        input_sha256: corpus.content_digest(),
        corpus: CorpusSummary {
            input_rows: corpus.input_rows(),
            records_kept: corpus.len(),
            records_rejected: corpus.rejected().len(),
            rejections: corpus
                .rejected()
                .iter()
                .map(|r| RejectionEntry { row: r.row, reason: r.reason.to_string() })
                .collect(),
            reviews_per_segment,
            sentences_total,
            sentences_per_segment: tables.iter().map(|(&c, t)| (c, t.sentence_count())).collect(),
        },
        segments,
        topics,
        seven_s,
        caveats: caveats(corpus.rejected().len()),
    })
}

fn caveats(rejected: usize) -> Vec<String> {
    let mut out = vec![
        "Ratings 1-2 are negative, 3 neutral, 4-5 positive. Neutral sentences count toward rates and the dominant class but not toward polarity.".to_string(),
        "Conditional probabilities are unsmoothed maximum-likelihood count ratios; n-grams never span sentences.".to_string(),
        "Structure and Systems are management-side elements that reviews judge only indirectly. Systems evidence here comes solely from booking and feature mentions and may instead be read as not evaluated; Structure has no default evidence.".to_string(),
        "Style has no default topic mapping.".to_string(),
    ];
    if rejected > 0 {
        out.push(format!("{rejected} input rows were rejected during ingestion; see the corpus summary."));
    }
    out
}

/// Write the requested report files into `out_dir`, returning their paths.
pub fn write_outputs(
    report: &Report,
    out_dir: &Path,
    emit: &BTreeSet<OutputFormat>,
) -> Result<Vec<PathBuf>, PipelineError> {
    let io = |p: &Path, e: std::io::Error| {
        PipelineError::new(Stage::Output, ErrorKind::Io, format!("cannot write {}: {e}", p.display()))
    };
    std::fs::create_dir_all(out_dir).map_err(|e| io(out_dir, e))?;
    let mut written = Vec::new();
    for format in emit {
        let (name, body) = match format {
            OutputFormat::Json => ("report.json", report.to_json()),
            OutputFormat::Markdown => ("report.md", render_markdown(report)),
        };
        let path = out_dir.join(name);
        std::fs::write(&path, body).map_err(|e| io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

fn title_case(class: SentimentClass) -> &'static str {
    match class {
        SentimentClass::Negative => "Negative",
        SentimentClass::Neutral => "Neutral",
        SentimentClass::Positive => "Positive",
    }
}

fn escape_cell(s: &str) -> String {
    s.replace('|', "\\|")
}

fn ngram_table(out: &mut String, label: &str, grams: &[RankedNgram]) {
    let _ = writeln!(out, "#### {label}\n");
    if grams.is_empty() {
        let _ = writeln!(out, "_No {} meet the minimum count._\n", label.to_lowercase());
        return;
    }
    out.push_str("| Rank | N-gram | Count | P(last \\| history) |\n|---:|---|---:|---:|\n");
    for (i, g) in grams.iter().enumerate() {
        let _ = writeln!(out, "| {} | {} | {} | {:.6} |", i + 1, escape_cell(&g.ngram.join(" ")), g.count, g.cond_prob);
    }
    out.push('\n');
}

/// Human-readable rendering: corpus summary, n-gram tables, topic matrix, 7S
/// grid, unmapped topics and caveats.
pub fn render_markdown(report: &Report) -> String {
    let mut out = String::new();
    let c = &report.corpus;
    let _ = writeln!(out, "# Review Assessment Report\n");
    let _ = writeln!(
        out,
        "Generated by {} {} from input `{}`.\n",
        report.tool.name, report.tool.version, report.input_sha256
    );

    out.push_str("## Corpus Summary\n\n| Metric | Value |\n|---|---:|\n");
    let _ = writeln!(out, "| Input rows | {} |", c.input_rows);
    let _ = writeln!(out, "| Records kept | {} |", c.records_kept);
    let _ = writeln!(out, "| Records rejected | {} |", c.records_rejected);
    let _ = writeln!(out, "| Sentences | {} |", c.sentences_total);
    for class in SentimentClass::ALL {
        let _ = writeln!(
            out,
            "| {} reviews / sentences | {} / {} |",
            title_case(class),
            c.reviews_per_segment.get(&class).copied().unwrap_or(0),
            c.sentences_per_segment.get(&class).copied().unwrap_or(0)
        );
    }
    out.push('\n');
    if !c.rejections.is_empty() {
        out.push_str("| Rejected row | Reason |\n|---:|---|\n");
        for r in &c.rejections {
            let _ = writeln!(out, "| {} | {} |", r.row, r.reason);
        }
        out.push('\n');
    }

    out.push_str("## Top N-grams per Segment\n\n");
    for class in [SentimentClass::Positive, SentimentClass::Negative, SentimentClass::Neutral] {
        let Some(seg) = report.segments.get(&class) else { continue };
        let _ = writeln!(
            out,
            "### {} ({} sentences, {} tokens)\n",
            title_case(class),
            seg.sentence_count,
            seg.total_tokens
        );
        ngram_table(&mut out, "Bigrams", &seg.top_bigrams);
        ngram_table(&mut out, "Trigrams", &seg.top_trigrams);
    }

    out.push_str("## Key Topics\n\n");
    if report.topics.is_empty() {
        out.push_str("_No topic has positive or negative evidence._\n\n");
    } else {
        out.push_str(
            "| Topic | Negative /1k | Neutral /1k | Positive /1k | Polarity | Dominant | Description |\n\
             |---|---:|---:|---:|---:|---|---|\n",
        );
        for t in &report.topics {
            let rate = |c| t.freq_per_kilosentence.get(&c).copied().unwrap_or(0.0);
            let _ = writeln!(
                out,
                "| {} | {:.3} | {:.3} | {:.3} | {:+.3} | {} | {} |",
                escape_cell(&t.topic),
                rate(SentimentClass::Negative),
                rate(SentimentClass::Neutral),
                rate(SentimentClass::Positive),
                t.polarity,
                t.dominant_class,
                escape_cell(&t.description)
            );
        }
        out.push('\n');
    }

    out.push_str("## 7S Assessment\n\n| Element | Kind | Verdict | Supporting topics |\n|---|---|---|---|\n");
    for element in SevenSElement::ALL {
        let Some(a) = report.seven_s.elements.get(&element) else { continue };
        let topics = if a.topics.is_empty() {
            "-".to_string()
        } else {
            a.topics
                .iter()
                .map(|t| format!("{} ({:+.3})", escape_cell(&t.topic), t.polarity))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let kind = match a.kind {
            crate::insights::ElementKind::Hard => "hard",
            crate::insights::ElementKind::Soft => "soft",
        };
        let _ = writeln!(out, "| {} | {} | {} | {} |", element, kind, a.verdict.as_str(), topics);
    }
    out.push('\n');

    out.push_str("## Unmapped Topics\n\n");
    if report.seven_s.unmapped_topics.is_empty() {
        out.push_str("_None._\n\n");
    } else {
        for t in &report.seven_s.unmapped_topics {
            let _ = writeln!(out, "- {t}");
        }
        out.push('\n');
    }

    out.push_str("## Caveats\n\n");
    for c in &report.caveats {
        let _ = writeln!(out, "- {c}");
    }
    out
}
