//! Next Foreign Sentence Prediction sample generation.
//!
//! Positives pair each sentence with the opposite-language translation of
//! its successor, in both directions. Negatives pair a random sentence
//! with the translation of a random sentence that is not its true
//! successor. Output is deterministic under (corpus, seed, config).

use crate::corpus::AlignedCorpus;
use crate::lang::Language;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NfspError {
    #[error("corpus has {positions} sentence positions; at least 2 are required for negatives")]
    InsufficientCorpus { positions: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NfspLabel {
    NotConsecutive,
    Consecutive,
}

impl NfspLabel {
    pub fn code(self) -> u8 {
        match self {
            NfspLabel::NotConsecutive => 0,
            NfspLabel::Consecutive => 1,
        }
    }
}

/// Corpus coordinates a sample was generated from. Not part of the wire
/// format; retained in memory so oracles can recheck labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SampleSource {
    #[default]
    Unknown,
    /// Adjacent pair (index_a, index_a + 1) of one document.
    Positive { doc_id: String, index_a: usize },
    /// Randomly drawn anchor and partner coordinates.
    Random {
        doc_a: String,
        index_a: usize,
        doc_b: String,
        index_b: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NfspSample {
    pub text_a: String,
    pub lang_a: Language,
    pub text_b: String,
    pub lang_b: Language,
    #[serde(
        serialize_with = "ser_label",
        deserialize_with = "de_label"
    )]
    pub label: NfspLabel,
    #[serde(skip)]
    pub source: SampleSource,
}

fn ser_label<S: serde::Serializer>(label: &NfspLabel, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u8(label.code())
}

fn de_label<'de, D: serde::Deserializer<'de>>(d: D) -> Result<NfspLabel, D::Error> {
    match u8::deserialize(d)? {
        0 => Ok(NfspLabel::NotConsecutive),
        1 => Ok(NfspLabel::Consecutive),
        other => Err(serde::de::Error::custom(format!(
            "NFSP label must be 0 or 1, got {other}"
        ))),
    }
}

/// Both cross-lingual samples for every adjacent position pair, in
/// document order: (EN_i, JA_{i+1}) then (JA_i, EN_{i+1}).
pub fn generate_positives(corpus: &AlignedCorpus) -> Vec<NfspSample> {
    let mut samples = Vec::with_capacity(2 * corpus.adjacent_pairs());
    for doc in &corpus.documents {
        for window in doc.pairs.windows(2) {
            let (first, second) = (&window[0], &window[1]);
            for lang_a in [Language::En, Language::Ja] {
                samples.push(NfspSample {
                    text_a: first.side(lang_a).text.clone(),
                    lang_a,
                    text_b: second.side(lang_a.opposite()).text.clone(),
                    lang_b: lang_a.opposite(),
                    label: NfspLabel::Consecutive,
                    source: SampleSource::Positive {
                        doc_id: doc.doc_id.clone(),
                        index_a: first.index(),
                    },
                });
            }
        }
    }
    samples
}

/// `count` negative samples: each pairs a uniformly random anchor (in a
/// uniformly random language direction) with the opposite-language text of
/// a uniformly random position that is not the anchor's true successor.
pub fn generate_negatives(
    corpus: &AlignedCorpus,
    seed: u64,
    count: usize,
) -> Result<Vec<NfspSample>, NfspError> {
    let positions: Vec<(usize, usize)> = corpus
        .documents
        .iter()
        .enumerate()
        .flat_map(|(d, doc)| (0..doc.pairs.len()).map(move |i| (d, i)))
        .collect();
    if count > 0 && positions.len() < 2 {
        return Err(NfspError::InsufficientCorpus {
            positions: positions.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(count);
    while samples.len() < count {
        let (da, ia) = positions[rng.gen_range(0..positions.len())];
        let lang_a = if rng.gen_bool(0.5) {
            Language::En
        } else {
            Language::Ja
        };
        let (db, ib) = positions[rng.gen_range(0..positions.len())];
        // reject the true next sentence of the anchor
        if db == da && ib == ia + 1 {
            continue;
        }
        let doc_a = &corpus.documents[da];
        let doc_b = &corpus.documents[db];
        samples.push(NfspSample {
            text_a: doc_a.pairs[ia].side(lang_a).text.clone(),
            lang_a,
            text_b: doc_b.pairs[ib].side(lang_a.opposite()).text.clone(),
            lang_b: lang_a.opposite(),
            label: NfspLabel::NotConsecutive,
            source: SampleSource::Random {
                doc_a: doc_a.doc_id.clone(),
                index_a: ia,
                doc_b: doc_b.doc_id.clone(),
                index_b: ib,
            },
        });
    }
    Ok(samples)
}

/// Full NFSP dataset: all positives plus `round(negative_ratio * positives)`
/// negatives, deterministically shuffled.
pub fn generate(
    corpus: &AlignedCorpus,
    negative_ratio: f64,
    seed: u64,
) -> Result<Vec<NfspSample>, NfspError> {
    assert!(negative_ratio > 0.0, "negative_ratio must be positive");
    let mut samples = generate_positives(corpus);
    let negative_count = (negative_ratio * samples.len() as f64).round() as usize;
    samples.extend(generate_negatives(corpus, seed, negative_count)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    samples.shuffle(&mut rng);
    Ok(samples)
}

/// Default dataset size for a corpus under the default 1:1 ratio.
pub fn default_total(corpus: &AlignedCorpus) -> usize {
    2 * 2 * corpus.adjacent_pairs()
}
