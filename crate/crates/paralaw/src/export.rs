//! Dataset serialization, deterministic shuffling, and statistics.
//!
//! All randomness in the toolkit is drawn from ChaCha8, a counter-based
//! stream cipher RNG, seeded explicitly, so every output is reproducible
//! bit-for-bit across platforms. `tests/rng_vectors.rs` freezes the
//! keystream and shuffle behavior.

use crate::negation::{LabeledStatement, LabeledStatementRecord};
use crate::nfsp::NfspSample;
use crate::nmsp::NmspSample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Record { line: usize, message: String },
}

pub fn write_jsonl<T: Serialize, W: Write>(records: &[T], mut writer: W) -> Result<(), ExportError> {
    for record in records {
        let line = serde_json::to_string(record).map_err(|e| ExportError::Record {
            line: 0,
            message: e.to_string(),
        })?;
        writer.write_all(line.as_bytes())?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<T: DeserializeOwned, R: BufRead>(reader: R) -> Result<Vec<T>, ExportError> {
    let mut records = Vec::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(
            serde_json::from_str(&line).map_err(|e| ExportError::Record {
                line: line_no + 1,
                message: e.to_string(),
            })?,
        );
    }
    Ok(records)
}

/// Escape `\`, tab, and newline for single-line TSV fields.
pub fn escape_tsv(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out
}

pub fn unescape_tsv(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('t') => out.push('\t'),
                Some('n') => out.push('\n'),
                Some('\\') => out.push('\\'),
                Some(other) => {
                    out.push('\\');
                    out.push(other);
                }
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Fixed-column TSV form of a dataset record.
pub trait TsvRecord: Sized {
    fn tsv_fields(&self) -> Vec<String>;
    fn from_tsv_fields(fields: &[&str]) -> Result<Self, String>;
}

impl TsvRecord for NfspSample {
    fn tsv_fields(&self) -> Vec<String> {
        vec![
            escape_tsv(&self.text_a),
            self.lang_a.code().to_string(),
            escape_tsv(&self.text_b),
            self.lang_b.code().to_string(),
            self.label.code().to_string(),
        ]
    }

    fn from_tsv_fields(fields: &[&str]) -> Result<Self, String> {
        if fields.len() != 5 {
            return Err("expected 5 fields".to_string());
        }
        let label = match fields[4] {
            "0" => crate::nfsp::NfspLabel::NotConsecutive,
            "1" => crate::nfsp::NfspLabel::Consecutive,
            other => return Err(format!("bad NFSP label {other:?}")),
        };
        Ok(NfspSample {
            text_a: unescape_tsv(fields[0]),
            lang_a: fields[1].parse()?,
            text_b: unescape_tsv(fields[2]),
            lang_b: fields[3].parse()?,
            label,
            source: Default::default(),
        })
    }
}

impl TsvRecord for NmspSample {
    fn tsv_fields(&self) -> Vec<String> {
        vec![
            escape_tsv(&self.text_a),
            self.lang_a.code().to_string(),
            escape_tsv(&self.text_b),
            self.lang_b.code().to_string(),
            self.label.code().to_string(),
        ]
    }

    fn from_tsv_fields(fields: &[&str]) -> Result<Self, String> {
        if fields.len() != 5 {
            return Err("expected 5 fields".to_string());
        }
        let code: u8 = fields[4].parse().map_err(|_| "bad NMSP label")?;
        let label =
            crate::nmsp::NmspLabel::from_code(code).ok_or_else(|| "bad NMSP label".to_string())?;
        Ok(NmspSample {
            text_a: unescape_tsv(fields[0]),
            lang_a: fields[1].parse()?,
            text_b: unescape_tsv(fields[2]),
            lang_b: fields[3].parse()?,
            label,
            source: Default::default(),
        })
    }
}

impl TsvRecord for LabeledStatement {
    fn tsv_fields(&self) -> Vec<String> {
        let rec = LabeledStatementRecord::from(self);
        vec![
            escape_tsv(&rec.text),
            rec.lang.code().to_string(),
            match rec.label {
                crate::negation::Label::Lawful => "lawful".to_string(),
                crate::negation::Label::Unlawful => "unlawful".to_string(),
            },
            rec.provenance,
            rec.rule_rank.map_or(String::new(), |r| r.to_string()),
        ]
    }

    fn from_tsv_fields(fields: &[&str]) -> Result<Self, String> {
        if fields.len() != 5 {
            return Err("expected 5 fields".to_string());
        }
        let rec = LabeledStatementRecord {
            text: unescape_tsv(fields[0]),
            lang: fields[1].parse()?,
            label: match fields[2] {
                "lawful" => crate::negation::Label::Lawful,
                "unlawful" => crate::negation::Label::Unlawful,
                other => return Err(format!("bad label {other:?}")),
            },
            provenance: fields[3].to_string(),
            rule_rank: if fields[4].is_empty() {
                None
            } else {
                Some(fields[4].parse().map_err(|_| "bad rank")?)
            },
        };
        LabeledStatement::try_from(rec)
    }
}

pub fn write_tsv<T: TsvRecord, W: Write>(records: &[T], mut writer: W) -> Result<(), ExportError> {
    for record in records {
        writeln!(writer, "{}", record.tsv_fields().join("\t"))?;
    }
    Ok(())
}

pub fn read_tsv<T: TsvRecord, R: BufRead>(reader: R) -> Result<Vec<T>, ExportError> {
    let mut records = Vec::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        records.push(T::from_tsv_fields(&fields).map_err(|message| ExportError::Record {
            line: line_no + 1,
            message,
        })?);
    }
    Ok(records)
}

/// Deterministic Fisher-Yates permutation driven by ChaCha8. The multiset
/// of records is preserved; the order is a pure function of the seed.
pub fn shuffle<T>(mut records: Vec<T>, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    records.shuffle(&mut rng);
    records
}

/// A uniform view of any dataset record for statistics purposes.
#[derive(Debug, Clone)]
pub struct StatView {
    pub label: String,
    pub lang_a: String,
    pub lang_b: String,
    pub text_a: String,
    pub text_b: String,
}

impl From<&NfspSample> for StatView {
    fn from(s: &NfspSample) -> Self {
        StatView {
            label: s.label.code().to_string(),
            lang_a: s.lang_a.code().to_string(),
            lang_b: s.lang_b.code().to_string(),
            text_a: s.text_a.clone(),
            text_b: s.text_b.clone(),
        }
    }
}

impl From<&NmspSample> for StatView {
    fn from(s: &NmspSample) -> Self {
        StatView {
            label: s.label.code().to_string(),
            lang_a: s.lang_a.code().to_string(),
            lang_b: s.lang_b.code().to_string(),
            text_a: s.text_a.clone(),
            text_b: s.text_b.clone(),
        }
    }
}

impl From<&LabeledStatement> for StatView {
    fn from(s: &LabeledStatement) -> Self {
        let rec = LabeledStatementRecord::from(s);
        StatView {
            label: match rec.label {
                crate::negation::Label::Lawful => "lawful".to_string(),
                crate::negation::Label::Unlawful => "unlawful".to_string(),
            },
            lang_a: rec.lang.code().to_string(),
            lang_b: String::new(),
            text_a: rec.text,
            text_b: String::new(),
        }
    }
}

/// Best-effort view of an arbitrary JSONL record, for `stats` over files.
pub fn view_from_json(value: &Value) -> Option<StatView> {
    let get = |key: &str| value.get(key);
    let as_string = |v: &Value| match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => other.to_string(),
    };
    let text_a = get("text_a").or_else(|| get("text"))?;
    Some(StatView {
        label: get("label").map(as_string).unwrap_or_default(),
        lang_a: get("lang_a").or_else(|| get("lang")).map(as_string).unwrap_or_default(),
        lang_b: get("lang_b").map(as_string).unwrap_or_default(),
        text_a: as_string(text_a),
        text_b: get("text_b").map(as_string).unwrap_or_default(),
    })
}

pub const HISTOGRAM_BUCKET: usize = 16;
pub const HISTOGRAM_CAP: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StatsReport {
    pub total: usize,
    pub per_label: BTreeMap<String, usize>,
    /// Keyed "lang_a-lang_b" (or just the language for single-text records).
    pub per_language_pair: BTreeMap<String, usize>,
    /// Text lengths in characters, buckets of 16; the final bucket is 512+.
    pub length_histogram: Vec<usize>,
    /// Records whose (text_a, text_b) was already seen.
    pub duplicate_pairs: usize,
}

/// One-pass dataset statistics.
pub fn stats<'a, I>(records: I) -> StatsReport
where
    I: IntoIterator<Item = &'a StatView>,
{
    let buckets = HISTOGRAM_CAP / HISTOGRAM_BUCKET + 1;
    let mut report = StatsReport {
        length_histogram: vec![0; buckets],
        ..Default::default()
    };
    let mut seen: std::collections::HashSet<(String, String)> = Default::default();
    for view in records {
        report.total += 1;
        *report.per_label.entry(view.label.clone()).or_default() += 1;
        let pair_key = if view.lang_b.is_empty() {
            view.lang_a.clone()
        } else {
            format!("{}-{}", view.lang_a, view.lang_b)
        };
        *report.per_language_pair.entry(pair_key).or_default() += 1;
        let mut texts = vec![&view.text_a];
        if !view.text_b.is_empty() {
            texts.push(&view.text_b);
        }
        for text in texts {
            let len = text.chars().count();
            let bucket = (len / HISTOGRAM_BUCKET).min(buckets - 1);
            report.length_histogram[bucket] += 1;
        }
        if !seen.insert((view.text_a.clone(), view.text_b.clone())) {
            report.duplicate_pairs += 1;
        }
    }
    report
}
