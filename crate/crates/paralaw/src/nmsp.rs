//! Neighbor Multilingual Sentence Prediction sample generation.
//!
//! Four-way classification over sentence pairs drawn from any of the four
//! language combinations. Label semantics, recomputable from coordinates:
//!
//! * `Random` — the two sentences come from different documents
//! * `NormalOrder` — same document, index_b = index_a + 1
//! * `ReverseOrder` — same document, index_b = index_a - 1
//! * `NonContiguous` — same document, |index_a - index_b| >= 2

use crate::corpus::AlignedCorpus;
use crate::lang::Language;
use crate::nfsp;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NmspError {
    #[error("corpus cannot supply any {0:?} sample")]
    InsufficientCorpus(NmspLabel),
    #[error("sample source coordinates not present in corpus: {doc_id:?}[{index}]")]
    UnknownSource { doc_id: String, index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NmspLabel {
    Random,
    NormalOrder,
    ReverseOrder,
    NonContiguous,
}

impl NmspLabel {
    pub const ALL: [NmspLabel; 4] = [
        NmspLabel::Random,
        NmspLabel::NormalOrder,
        NmspLabel::ReverseOrder,
        NmspLabel::NonContiguous,
    ];

    /// Stable wire code: 0=Random, 1=NormalOrder, 2=ReverseOrder, 3=NonContiguous.
    pub fn code(self) -> u8 {
        match self {
            NmspLabel::Random => 0,
            NmspLabel::NormalOrder => 1,
            NmspLabel::ReverseOrder => 2,
            NmspLabel::NonContiguous => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<NmspLabel> {
        NmspLabel::ALL.into_iter().find(|l| l.code() == code)
    }
}

/// Coordinates both sides of a sample were taken from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NmspSource {
    pub doc_a: String,
    pub index_a: usize,
    pub doc_b: String,
    pub index_b: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NmspSample {
    pub text_a: String,
    pub lang_a: Language,
    pub text_b: String,
    pub lang_b: Language,
    #[serde(serialize_with = "ser_label", deserialize_with = "de_label")]
    pub label: NmspLabel,
    #[serde(skip)]
    pub source: NmspSource,
}

fn ser_label<S: serde::Serializer>(label: &NmspLabel, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u8(label.code())
}

fn de_label<'de, D: serde::Deserializer<'de>>(d: D) -> Result<NmspLabel, D::Error> {
    let code = u8::deserialize(d)?;
    NmspLabel::from_code(code)
        .ok_or_else(|| serde::de::Error::custom(format!("NMSP label must be 0..=3, got {code}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LanguageMix {
    /// Uniform over EN-EN, EN-JA, JA-EN, JA-JA.
    Uniform,
    /// Cross-lingual directions only.
    EnjaOnly,
}

impl LanguageMix {
    fn draw(self, rng: &mut ChaCha8Rng) -> (Language, Language) {
        let combos: &[(Language, Language)] = match self {
            LanguageMix::Uniform => &[
                (Language::En, Language::En),
                (Language::En, Language::Ja),
                (Language::Ja, Language::En),
                (Language::Ja, Language::Ja),
            ],
            LanguageMix::EnjaOnly => &[(Language::En, Language::Ja), (Language::Ja, Language::En)],
        };
        combos[rng.gen_range(0..combos.len())]
    }
}

#[derive(Debug, Clone)]
pub struct NmspConfig {
    /// Samples to emit per label, in [`NmspLabel::ALL`] order.
    pub per_label: [usize; 4],
    pub language_mix: LanguageMix,
    pub seed: u64,
}

impl NmspConfig {
    /// Split `total` uniformly over the four labels, earliest labels
    /// taking the remainder.
    pub fn with_total(total: usize, language_mix: LanguageMix, seed: u64) -> Self {
        let base = total / 4;
        let rem = total % 4;
        let mut per_label = [base; 4];
        for slot in per_label.iter_mut().take(rem) {
            *slot += 1;
        }
        NmspConfig {
            per_label,
            language_mix,
            seed,
        }
    }

    /// Default sizing: three times the default NFSP total on the same
    /// corpus, uniform over labels and language combinations.
    pub fn default_for(corpus: &AlignedCorpus, seed: u64) -> Self {
        NmspConfig::with_total(3 * nfsp::default_total(corpus), LanguageMix::Uniform, seed)
    }

    pub fn total(&self) -> usize {
        self.per_label.iter().sum()
    }
}

/// Recompute a sample's label purely from its source coordinates.
pub fn label_oracle(corpus: &AlignedCorpus, sample: &NmspSample) -> Result<NmspLabel, NmspError> {
    let src = &sample.source;
    for (doc_id, index) in [(&src.doc_a, src.index_a), (&src.doc_b, src.index_b)] {
        if corpus.pair(doc_id, index).is_none() {
            return Err(NmspError::UnknownSource {
                doc_id: doc_id.clone(),
                index,
            });
        }
    }
    if src.doc_a != src.doc_b {
        return Ok(NmspLabel::Random);
    }
    Ok(if src.index_b == src.index_a + 1 {
        NmspLabel::NormalOrder
    } else if src.index_a == src.index_b + 1 {
        NmspLabel::ReverseOrder
    } else {
        NmspLabel::NonContiguous
    })
}

/// Generate exactly the configured count per label, deterministically.
pub fn generate(corpus: &AlignedCorpus, config: &NmspConfig) -> Result<Vec<NmspSample>, NmspError> {
    let doc_count = corpus.documents.len();
    let multi: Vec<usize> = (0..doc_count)
        .filter(|&d| corpus.documents[d].pairs.len() >= 2)
        .collect();
    let wide: Vec<usize> = (0..doc_count)
        .filter(|&d| corpus.documents[d].pairs.len() >= 3)
        .collect();

    for label in NmspLabel::ALL {
        let wanted = config.per_label[label.code() as usize];
        let feasible = match label {
            NmspLabel::Random => doc_count >= 2,
            NmspLabel::NormalOrder | NmspLabel::ReverseOrder => !multi.is_empty(),
            NmspLabel::NonContiguous => !wide.is_empty(),
        };
        if wanted > 0 && !feasible {
            return Err(NmspError::InsufficientCorpus(label));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut samples = Vec::with_capacity(config.total());
    for label in NmspLabel::ALL {
        for _ in 0..config.per_label[label.code() as usize] {
            let (da, ia, db, ib) = match label {
                NmspLabel::Random => loop {
                    let da = rng.gen_range(0..doc_count);
                    let db = rng.gen_range(0..doc_count);
                    if da != db {
                        let ia = rng.gen_range(0..corpus.documents[da].pairs.len());
                        let ib = rng.gen_range(0..corpus.documents[db].pairs.len());
                        break (da, ia, db, ib);
                    }
                },
                NmspLabel::NormalOrder => {
                    let d = multi[rng.gen_range(0..multi.len())];
                    let i = rng.gen_range(0..corpus.documents[d].pairs.len() - 1);
                    (d, i, d, i + 1)
                }
                NmspLabel::ReverseOrder => {
                    let d = multi[rng.gen_range(0..multi.len())];
                    let i = rng.gen_range(0..corpus.documents[d].pairs.len() - 1);
                    (d, i + 1, d, i)
                }
                NmspLabel::NonContiguous => loop {
                    let d = wide[rng.gen_range(0..wide.len())];
                    let len = corpus.documents[d].pairs.len();
                    let ia = rng.gen_range(0..len);
                    let ib = rng.gen_range(0..len);
                    if ia.abs_diff(ib) >= 2 {
                        break (d, ia, d, ib);
                    }
                },
            };
            let (lang_a, lang_b) = config.language_mix.draw(&mut rng);
            let doc_a = &corpus.documents[da];
            let doc_b = &corpus.documents[db];
            samples.push(NmspSample {
                text_a: doc_a.pairs[ia].side(lang_a).text.clone(),
                lang_a,
                text_b: doc_b.pairs[ib].side(lang_b).text.clone(),
                lang_b,
                label,
                source: NmspSource {
                    doc_a: doc_a.doc_id.clone(),
                    index_a: ia,
                    doc_b: doc_b.doc_id.clone(),
                    index_b: ib,
                },
            });
        }
    }
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    samples.shuffle(&mut shuffle_rng);
    Ok(samples)
}
