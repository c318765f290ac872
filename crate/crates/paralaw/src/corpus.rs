//! Sentence-aligned bilingual corpus ingestion.
//!
//! Corpora enter through one of two canonical formats (a flat TSV and a
//! simplified aligned XML), are NFC-normalized, and come out as an
//! [`AlignedCorpus`]: an ordered collection of documents whose sentence
//! pairs are contiguously indexed translations of one another. All
//! generators downstream read only this structure.

use crate::lang::Language;
use quick_xml::events::Event;
use quick_xml::Reader;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{BufRead, Write};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: expected 5 tab-separated fields")]
    MalformedLine { line: usize },
    #[error("line {line}: empty text field")]
    EmptyText { line: usize },
    #[error("duplicate position {index} in document {doc_id:?}")]
    DuplicatePosition { doc_id: String, index: usize },
    #[error("input is not valid UTF-8")]
    Encoding(#[from] std::str::Utf8Error),
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Json { line: usize, message: String },
}

/// One sentence on one side of an aligned pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    pub language: Language,
    pub doc_id: String,
    pub index: usize,
    pub is_list_item: bool,
}

/// A translation pair: the same position of the same document in both languages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    pub ja: Sentence,
    pub en: Sentence,
}

impl SentencePair {
    pub fn new(doc_id: &str, index: usize, is_list_item: bool, ja: &str, en: &str) -> Self {
        let make = |text: &str, language| Sentence {
            text: text.trim().nfc().collect(),
            language,
            doc_id: doc_id.to_string(),
            index,
            is_list_item,
        };
        SentencePair {
            ja: make(ja, Language::Ja),
            en: make(en, Language::En),
        }
    }

    pub fn doc_id(&self) -> &str {
        &self.ja.doc_id
    }

    pub fn index(&self) -> usize {
        self.ja.index
    }

    pub fn is_list_item(&self) -> bool {
        self.ja.is_list_item
    }

    pub fn side(&self, language: Language) -> &Sentence {
        match language {
            Language::Ja => &self.ja,
            Language::En => &self.en,
        }
    }
}

/// A document: contiguously indexed sentence pairs in original order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub doc_id: String,
    pub pairs: Vec<SentencePair>,
}

/// Ordered documents of sentence-aligned bilingual pairs; the single
/// source for every generator in the toolkit. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AlignedCorpus {
    pub documents: Vec<Document>,
}

impl AlignedCorpus {
    pub fn document(&self, doc_id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.doc_id == doc_id)
    }

    /// Total number of sentence positions across all documents.
    pub fn total_positions(&self) -> usize {
        self.documents.iter().map(|d| d.pairs.len()).sum()
    }

    /// Number of adjacent (i, i+1) position pairs across all documents.
    pub fn adjacent_pairs(&self) -> usize {
        self.documents
            .iter()
            .map(|d| d.pairs.len().saturating_sub(1))
            .sum()
    }

    pub fn pair(&self, doc_id: &str, index: usize) -> Option<&SentencePair> {
        self.document(doc_id).and_then(|d| d.pairs.get(index))
    }
}

fn build_corpus(
    rows: Vec<(String, usize, bool, String, String)>,
    check_declared_positions: bool,
) -> Result<AlignedCorpus, CorpusError> {
    let mut order: Vec<String> = Vec::new();
    let mut grouped: HashMap<String, Vec<(usize, bool, String, String)>> = HashMap::new();
    for (doc_id, index, is_list, ja, en) in rows {
        let entry = grouped.entry(doc_id.clone()).or_insert_with(|| {
            order.push(doc_id.clone());
            Vec::new()
        });
        if check_declared_positions && entry.iter().any(|(i, ..)| *i == index) {
            return Err(CorpusError::DuplicatePosition { doc_id, index });
        }
        entry.push((index, is_list, ja, en));
    }
    let documents = order
        .into_iter()
        .map(|doc_id| {
            let rows = grouped.remove(&doc_id).unwrap();
            let pairs = rows
                .into_iter()
                .enumerate()
                .map(|(idx, (_, is_list, ja, en))| {
                    SentencePair::new(&doc_id, idx, is_list, &ja, &en)
                })
                .collect();
            Document { doc_id, pairs }
        })
        .collect();
    Ok(AlignedCorpus { documents })
}

/// Parse the canonical TSV corpus format.
///
/// Fields per line: `doc_id \t index \t is_list_item(0|1) \t ja_text \t en_text`.
/// Lines starting with `#` and blank lines are ignored. Indices are re-derived
/// 0-based per document in encounter order; the declared index column is only
/// checked for duplicates.
pub fn parse_tsv<R: BufRead>(reader: R) -> Result<AlignedCorpus, CorpusError> {
    let mut rows = Vec::new();
    for (line_no, line) in reader.split(b'\n').enumerate() {
        let line_no = line_no + 1;
        let raw = line?;
        let text = std::str::from_utf8(&raw)?;
        let text = text.strip_suffix('\r').unwrap_or(text);
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != 5 {
            return Err(CorpusError::MalformedLine { line: line_no });
        }
        let index: usize = fields[1]
            .parse()
            .map_err(|_| CorpusError::MalformedLine { line: line_no })?;
        let is_list = match fields[2] {
            "0" => false,
            "1" => true,
            _ => return Err(CorpusError::MalformedLine { line: line_no }),
        };
        if fields[3].trim().is_empty() || fields[4].trim().is_empty() {
            return Err(CorpusError::EmptyText { line: line_no });
        }
        rows.push((
            fields[0].to_string(),
            index,
            is_list,
            fields[3].to_string(),
            fields[4].to_string(),
        ));
    }
    build_corpus(rows, true)
}

/// Write a corpus back to the canonical TSV format. Inverse of [`parse_tsv`]
/// for any valid corpus.
pub fn write_tsv<W: Write>(corpus: &AlignedCorpus, mut writer: W) -> Result<(), CorpusError> {
    for doc in &corpus.documents {
        for pair in &doc.pairs {
            writeln!(
                writer,
                "{}\t{}\t{}\t{}\t{}",
                doc.doc_id,
                pair.index(),
                if pair.is_list_item() { 1 } else { 0 },
                pair.ja.text,
                pair.en.text
            )?;
        }
    }
    Ok(())
}

/// Parse the simplified aligned XML schema.
///
/// Root `<Corpus>`, children `<Doc id="...">`, children `<Pair>` or
/// `<Item><Pair/></Item>`; each `<Pair>` holds exactly one `<Ja>` and one
/// `<En>` text element. Pairs inside `<Item>` are marked as list items.
pub fn parse_aligned_xml<R: BufRead>(reader: R) -> Result<AlignedCorpus, CorpusError> {
    let mut xml = Reader::from_reader(reader);
    xml.config_mut().trim_text(true);
    let mut buf = Vec::new();

    let mut rows: Vec<(String, usize, bool, String, String)> = Vec::new();
    let mut saw_root = false;
    let mut doc_no = 0usize;
    let mut cur_doc: Option<String> = None;
    let mut pair_no = 0usize;
    let mut in_item = false;
    // (is_list, ja, en) of the pair currently being read
    let mut cur_pair: Option<(bool, Option<String>, Option<String>)> = None;
    let mut cur_text_side: Option<Language> = None;

    let schema = |path: String, message: &str| CorpusError::Schema {
        path,
        message: message.to_string(),
    };
    let pair_path =
        |doc: &Option<String>, pair_no: usize| match doc {
            Some(id) => format!("Corpus/Doc[{id}]/Pair[{pair_no}]"),
            None => format!("Corpus/Pair[{pair_no}]"),
        };

    loop {
        match xml.read_event_into(&mut buf) {
            Err(e) => {
                return Err(schema(
                    format!("byte {}", xml.buffer_position()),
                    &e.to_string(),
                ))
            }
            Ok(Event::Eof) => break,
            Ok(Event::Start(e)) => match e.name().as_ref() {
                b"Corpus" => saw_root = true,
                b"Doc" => {
                    doc_no += 1;
                    let id = e
                        .attributes()
                        .flatten()
                        .find(|a| a.key.as_ref() == b"id")
                        .map(|a| String::from_utf8_lossy(&a.value).into_owned());
                    match id {
                        Some(id) => {
                            cur_doc = Some(id);
                            pair_no = 0;
                        }
                        None => {
                            return Err(schema(
                                format!("Corpus/Doc[{doc_no}]"),
                                "missing id attribute",
                            ))
                        }
                    }
                }
                b"Item" => in_item = true,
                b"Pair" => {
                    if cur_doc.is_none() {
                        return Err(schema(
                            "Corpus/Pair".to_string(),
                            "Pair outside of a Doc element",
                        ));
                    }
                    pair_no += 1;
                    cur_pair = Some((in_item, None, None));
                }
                b"Ja" | b"En" => {
                    if cur_pair.is_none() {
                        return Err(schema(
                            pair_path(&cur_doc, pair_no),
                            "text element outside of a Pair",
                        ));
                    }
                    cur_text_side = Some(if e.name().as_ref() == b"Ja" {
                        Language::Ja
                    } else {
                        Language::En
                    });
                }
                other => {
                    return Err(schema(
                        pair_path(&cur_doc, pair_no),
                        &format!(
                            "unexpected element <{}>",
                            String::from_utf8_lossy(other)
                        ),
                    ))
                }
            },
            Ok(Event::Text(t)) => {
                if let (Some(side), Some(pair)) = (cur_text_side, cur_pair.as_mut()) {
                    let text = t
                        .unescape()
                        .map_err(|e| {
                            schema(pair_path(&cur_doc, pair_no), &e.to_string())
                        })?
                        .into_owned();
                    match side {
                        Language::Ja => pair.1 = Some(text),
                        Language::En => pair.2 = Some(text),
                    }
                }
            }
            Ok(Event::End(e)) => match e.name().as_ref() {
                b"Item" => in_item = false,
                b"Ja" | b"En" => cur_text_side = None,
                b"Pair" => {
                    let (is_list, ja, en) = cur_pair.take().unwrap();
                    let path = pair_path(&cur_doc, pair_no);
                    let ja = ja.ok_or_else(|| schema(path.clone(), "missing <Ja> element"))?;
                    let en = en.ok_or_else(|| schema(path.clone(), "missing <En> element"))?;
                    if ja.trim().is_empty() || en.trim().is_empty() {
                        return Err(schema(path, "empty sentence text"));
                    }
                    let doc_id = cur_doc.clone().unwrap();
                    rows.push((doc_id, rows.len(), is_list, ja, en));
                }
                _ => {}
            },
            Ok(_) => {}
        }
        buf.clear();
    }
    if !saw_root {
        return Err(schema("Corpus".to_string(), "missing <Corpus> root element"));
    }
    build_corpus(rows, false)
}

/// Remove every list-item pair, re-index survivors contiguously per
/// document, and drop documents left empty. Idempotent and order-preserving.
pub fn filter_list_statements(corpus: &AlignedCorpus) -> AlignedCorpus {
    let documents = corpus
        .documents
        .iter()
        .filter_map(|doc| {
            let pairs: Vec<SentencePair> = doc
                .pairs
                .iter()
                .filter(|p| !p.is_list_item())
                .enumerate()
                .map(|(idx, p)| {
                    let mut p = p.clone();
                    p.ja.index = idx;
                    p.en.index = idx;
                    p
                })
                .collect();
            (!pairs.is_empty()).then(|| Document {
                doc_id: doc.doc_id.clone(),
                pairs,
            })
        })
        .collect();
    AlignedCorpus { documents }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Violation {
    /// Pair indices within a document are not the contiguous range 0..n.
    Gap {
        doc_id: String,
        expected: usize,
        found: usize,
    },
    /// A pair's sides do not carry the expected languages.
    Language { doc_id: String, index: usize },
    /// A pair's sides disagree on doc_id or index.
    PairMismatch { doc_id: String, index: usize },
    /// A sentence text is empty after trimming.
    EmptyText {
        doc_id: String,
        index: usize,
        language: Language,
    },
    DuplicateDoc { doc_id: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check every type invariant and report each violation with its location.
/// Violations are data, not errors; an empty report means the corpus is valid.
pub fn validate(corpus: &AlignedCorpus) -> ValidationReport {
    let mut violations = Vec::new();
    let mut seen_docs: HashMap<&str, ()> = HashMap::new();
    for doc in &corpus.documents {
        if seen_docs.insert(&doc.doc_id, ()).is_some() {
            violations.push(Violation::DuplicateDoc {
                doc_id: doc.doc_id.clone(),
            });
        }
        for (expected, pair) in doc.pairs.iter().enumerate() {
            let index = pair.index();
            if pair.ja.language != Language::Ja || pair.en.language != Language::En {
                violations.push(Violation::Language {
                    doc_id: doc.doc_id.clone(),
                    index,
                });
            }
            if pair.ja.doc_id != pair.en.doc_id
                || pair.ja.index != pair.en.index
                || pair.ja.doc_id != doc.doc_id
            {
                violations.push(Violation::PairMismatch {
                    doc_id: doc.doc_id.clone(),
                    index,
                });
            }
            if pair.ja.index != expected {
                violations.push(Violation::Gap {
                    doc_id: doc.doc_id.clone(),
                    expected,
                    found: pair.ja.index,
                });
            }
            for side in [&pair.ja, &pair.en] {
                if side.text.trim().is_empty() {
                    violations.push(Violation::EmptyText {
                        doc_id: doc.doc_id.clone(),
                        index,
                        language: side.language,
                    });
                }
            }
        }
    }
    ValidationReport { violations }
}

/// One line of the corpus JSONL interchange format produced by `ingest`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusLine {
    pub doc_id: String,
    pub index: usize,
    pub is_list_item: bool,
    pub ja: String,
    pub en: String,
}

pub fn write_jsonl<W: Write>(corpus: &AlignedCorpus, mut writer: W) -> Result<(), CorpusError> {
    for doc in &corpus.documents {
        for pair in &doc.pairs {
            let line = CorpusLine {
                doc_id: doc.doc_id.clone(),
                index: pair.index(),
                is_list_item: pair.is_list_item(),
                ja: pair.ja.text.clone(),
                en: pair.en.text.clone(),
            };
            serde_json::to_writer(&mut writer, &line).map_err(|e| CorpusError::Json {
                line: 0,
                message: e.to_string(),
            })?;
            writer.write_all(b"\n")?;
        }
    }
    Ok(())
}

pub fn parse_jsonl<R: BufRead>(reader: R) -> Result<AlignedCorpus, CorpusError> {
    let mut rows = Vec::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line_no = line_no + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CorpusLine = serde_json::from_str(&line).map_err(|e| CorpusError::Json {
            line: line_no,
            message: e.to_string(),
        })?;
        rows.push((rec.doc_id, rec.index, rec.is_list_item, rec.ja, rec.en));
    }
    build_corpus(rows, true)
}
