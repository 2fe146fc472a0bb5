//! Review ingestion from local CSV and JSONL files.
//!
//! Both loaders reduce every input row to the same five raw fields before
//! validation, so equivalent files load into equal [`Corpus`] values. Rows that
//! fail validation are kept in [`Corpus::rejected`] with a reason; nothing is
//! silently dropped.
//!
//! Duplicate removal keys on the rating plus the review text after trimming,
//! collapsing whitespace runs and case-folding. The first occurrence wins.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("no valid review records ({rejected} rows rejected)")]
    Empty { rejected: usize },
}

/// One rated review as ingested.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewRecord {
    pub review_id: String,
    pub rating: u8,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<String>,
}

impl ReviewRecord {
    /// Key under which two records count as duplicates.
    pub fn dedup_key(&self) -> (u8, String) {
        (self.rating, normalize_text(&self.text))
    }
}

/// Trim, collapse internal whitespace runs to one space, and lowercase.
pub fn normalize_text(text: &str) -> String {
    text.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    ParseError,
    InvalidUtf8,
    MissingId,
    MissingRating,
    NonIntegerRating,
    RatingOutOfRange,
    MissingText,
    InvalidDate,
    DuplicateId,
    Duplicate,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::ParseError => "parse error",
            RejectReason::InvalidUtf8 => "invalid utf-8",
            RejectReason::MissingId => "missing review_id",
            RejectReason::MissingRating => "missing rating",
            RejectReason::NonIntegerRating => "non-integer rating",
            RejectReason::RatingOutOfRange => "rating out of range",
            RejectReason::MissingText => "missing text",
            RejectReason::InvalidDate => "invalid date",
            RejectReason::DuplicateId => "duplicate id",
            RejectReason::Duplicate => "duplicate",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An input row that did not become a record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    /// 1-based data row, counted across all loaded files (header rows and blank
    /// lines excluded).
    pub row: usize,
    /// The row's fields re-encoded as one canonical CSV line, or the original
    /// line when it could not be parsed into fields.
    pub raw: String,
    pub reason: RejectReason,
}

/// Raw field values of one input row, before validation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawRow {
    pub review_id: Option<String>,
    pub rating: Option<String>,
    pub text: Option<String>,
    pub source: Option<String>,
    pub date: Option<String>,
}

impl RawRow {
    fn canonical_line(&self) -> String {
        let fields =
            [&self.review_id, &self.rating, &self.text, &self.source, &self.date].map(|f| f.as_deref().unwrap_or(""));
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        // Writing to a Vec cannot fail.
        writer.write_record(fields).expect("in-memory csv write");
        let bytes = writer.into_inner().expect("in-memory csv flush");
        String::from_utf8_lossy(&bytes).trim_end_matches('\n').to_string()
    }

    fn validate(&self) -> Result<ReviewRecord, RejectReason> {
        let review_id = non_blank(&self.review_id).ok_or(RejectReason::MissingId)?;
        let rating = non_blank(&self.rating).ok_or(RejectReason::MissingRating)?;
        let rating: i64 = rating.trim().parse().map_err(|_| RejectReason::NonIntegerRating)?;
        if !(1..=5).contains(&rating) {
            return Err(RejectReason::RatingOutOfRange);
        }
        let text = non_blank(&self.text).ok_or(RejectReason::MissingText)?;
        let date = non_blank(&self.date).map(|d| d.trim().to_string());
        if let Some(d) = &date {
            chrono::NaiveDate::parse_from_str(d, "%Y-%m-%d").map_err(|_| RejectReason::InvalidDate)?;
        }
        Ok(ReviewRecord {
            review_id: review_id.trim().to_string(),
            rating: rating as u8,
            text: text.to_string(),
            source: non_blank(&self.source).map(|s| s.trim().to_string()),
            date,
        })
    }
}

fn non_blank(field: &Option<String>) -> Option<&str> {
    field.as_deref().filter(|s| !s.trim().is_empty())
}

/// One row as produced by a loader: either fields to validate, or a row-level
/// failure carrying the original text.
pub type LoadedRow = Result<RawRow, (String, RejectReason)>;

/// Validated, deduplicated reviews plus every rejected input row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    records: Vec<ReviewRecord>,
    record_rows: Vec<usize>,
    rejected: Vec<Rejection>,
    index: HashMap<String, usize>,
}

impl Corpus {
    /// Validate loaded rows in order, rejecting malformed rows, later duplicates and
    /// reused ids.
    pub fn from_rows<I>(rows: I) -> Corpus
    where
        I: IntoIterator<Item = LoadedRow>,
    {
        let mut records = Vec::new();
        let mut record_rows = Vec::new();
        let mut rejected = Vec::new();
        let mut seen_keys = HashSet::new();
        let mut index = HashMap::new();

        for (i, row) in rows.into_iter().enumerate() {
            let row_no = i + 1;
            let raw = match row {
                Ok(raw) => raw,
                Err((line, reason)) => {
                    rejected.push(Rejection { row: row_no, raw: line, reason });
                    continue;
                }
            };
            let outcome = raw.validate().and_then(|rec| {
                if seen_keys.contains(&rec.dedup_key()) {
                    Err(RejectReason::Duplicate)
                } else if index.contains_key(&rec.review_id) {
                    Err(RejectReason::DuplicateId)
                } else {
                    Ok(rec)
                }
            });
            match outcome {
                Ok(rec) => {
                    seen_keys.insert(rec.dedup_key());
                    index.insert(rec.review_id.clone(), records.len());
                    records.push(rec);
                    record_rows.push(row_no);
                }
                Err(reason) => rejected.push(Rejection { row: row_no, raw: raw.canonical_line(), reason }),
            }
        }

        Corpus { records, record_rows, rejected, index }
    }

    /// Load and concatenate several files into one corpus. Ids must be unique
    /// and duplicates are detected across all files.
    pub fn load(sources: &[(PathBuf, InputFormat)]) -> Result<Corpus, CorpusError> {
        let mut rows = Vec::new();
        for (path, format) in sources {
            rows.extend(read_rows(path, *format)?);
        }
        Corpus::from_rows(rows).non_empty()
    }

    fn non_empty(self) -> Result<Corpus, CorpusError> {
        if self.records.is_empty() {
            Err(CorpusError::Empty { rejected: self.rejected.len() })
        } else {
            Ok(self)
        }
    }

    pub fn records(&self) -> &[ReviewRecord] {
        &self.records
    }

    pub fn rejected(&self) -> &[Rejection] {
        &self.rejected
    }

    pub fn get(&self, review_id: &str) -> Option<&ReviewRecord> {
        self.index.get(review_id).map(|&i| &self.records[i])
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of input rows this corpus accounts for.
    pub fn input_rows(&self) -> usize {
        self.records.len() + self.rejected.len()
    }

    /// SHA-256 over the canonical encoding of the kept records, hex encoded.
    /// Independent of the file format the records came from.
    pub fn content_digest(&self) -> String {
        let mut hasher = Sha256::new();
        for rec in &self.records {
            for field in [
                rec.review_id.as_str(),
                &rec.rating.to_string(),
                rec.text.as_str(),
                rec.source.as_deref().unwrap_or(""),
                rec.date.as_deref().unwrap_or(""),
            ] {
                hasher.update(field.as_bytes());
                hasher.update([0x1f]);
            }
            hasher.update([0x1e]);
        }
        hex::encode(hasher.finalize())
    }
}

/// Move every later duplicate (same rating and normalized text) into the
/// rejected list. Survivors keep their order; the result is idempotent.
pub fn dedup(corpus: Corpus) -> Corpus {
    let Corpus { records, record_rows, mut rejected, .. } = corpus;
    let mut seen = HashSet::new();
    let mut kept = Vec::with_capacity(records.len());
    let mut kept_rows = Vec::with_capacity(records.len());
    for (rec, row) in records.into_iter().zip(record_rows) {
        if seen.insert(rec.dedup_key()) {
            kept.push(rec);
            kept_rows.push(row);
        } else {
            let raw = RawRow {
                review_id: Some(rec.review_id.clone()),
                rating: Some(rec.rating.to_string()),
                text: Some(rec.text.clone()),
                source: rec.source.clone(),
                date: rec.date.clone(),
            };
            rejected.push(Rejection { row, raw: raw.canonical_line(), reason: RejectReason::Duplicate });
        }
    }
    rejected.sort_by_key(|r| r.row);
    let index = kept.iter().enumerate().map(|(i, r)| (r.review_id.clone(), i)).collect();
    Corpus { records: kept, record_rows: kept_rows, rejected, index }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Csv { has_header: bool },
    Jsonl,
}

fn read_rows(path: &Path, format: InputFormat) -> Result<Vec<LoadedRow>, CorpusError> {
    let io_err = |source| CorpusError::Io { path: path.to_path_buf(), source };
    let file = File::open(path).map_err(io_err)?;
    match format {
        InputFormat::Csv { has_header } => {
            csv_rows(file, has_header).map_err(|source| CorpusError::Csv { path: path.to_path_buf(), source })
        }
        InputFormat::Jsonl => jsonl_rows(BufReader::new(file)).map_err(io_err),
    }
}

/// Load a CSV file with columns `review_id,rating,text[,source][,date]`.
pub fn ingest_csv(path: impl AsRef<Path>, has_header: bool) -> Result<Corpus, CorpusError> {
    Corpus::load(&[(path.as_ref().to_path_buf(), InputFormat::Csv { has_header })])
}

/// Load newline-delimited JSON objects with keys `review_id`, `rating`, `text`
/// and optional `source`, `date`.
pub fn ingest_jsonl(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    Corpus::load(&[(path.as_ref().to_path_buf(), InputFormat::Jsonl)])
}

pub fn csv_rows<R: Read>(input: R, has_header: bool) -> Result<Vec<LoadedRow>, csv::Error> {
    let mut reader = csv::ReaderBuilder::new().has_headers(has_header).flexible(true).from_reader(input);
    let mut rows = Vec::new();
    for result in reader.byte_records() {
        let record = result?;
        let lossy = || record.iter().map(|f| String::from_utf8_lossy(f).into_owned()).collect::<Vec<_>>().join(",");
        if record.len() > 5 {
            rows.push(Err((lossy(), RejectReason::ParseError)));
            continue;
        }
        let mut fields = Vec::with_capacity(5);
        let mut utf8_ok = true;
        for f in record.iter() {
            match std::str::from_utf8(f) {
                Ok(s) => fields.push(Some(s.to_string())),
                Err(_) => {
                    utf8_ok = false;
                    break;
                }
            }
        }
        if !utf8_ok {
            rows.push(Err((lossy(), RejectReason::InvalidUtf8)));
            continue;
        }
        fields.resize(5, None);
        let mut it = fields.into_iter();
        rows.push(Ok(RawRow {
            review_id: it.next().flatten(),
            rating: it.next().flatten(),
            text: it.next().flatten(),
            source: it.next().flatten(),
            date: it.next().flatten(),
        }));
    }
    Ok(rows)
}

pub fn jsonl_rows<R: BufRead>(mut input: R) -> std::io::Result<Vec<LoadedRow>> {
    let mut rows = Vec::new();
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if input.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        let Ok(line) = std::str::from_utf8(&buf) else {
            let lossy = String::from_utf8_lossy(&buf).trim_end().to_string();
            rows.push(Err((lossy, RejectReason::InvalidUtf8)));
            continue;
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        rows.push(parse_json_row(line));
    }
    Ok(rows)
}

fn parse_json_row(line: &str) -> LoadedRow {
    let parse_error = || (line.to_string(), RejectReason::ParseError);
    let value: serde_json::Value = serde_json::from_str(line).map_err(|_| parse_error())?;
    let obj = value.as_object().ok_or_else(parse_error)?;
    let field = |key: &str| -> Option<String> {
        match obj.get(key)? {
            serde_json::Value::Null => None,
            serde_json::Value::String(s) => Some(s.clone()),
            other => Some(other.to_string()),
        }
    };
    Ok(RawRow {
        review_id: field("review_id"),
        rating: field("rating"),
        text: field("text"),
        source: field("source"),
        date: field("date"),
    })
}
