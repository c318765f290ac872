//! Curriculum dataset scheduling.
//!
//! Early phases see originals plus only those negations produced by a
//! restricted rule subset; the final phase always sees the full augmented
//! set. The scheduler emits one dataset per epoch, reshuffled
//! deterministically per (seed, phase, epoch), and leaves the training
//! loop to downstream consumers.

use crate::negation::{LabeledStatement, Provenance};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurriculumError {
    #[error("augmented statement {index} lacks negation provenance")]
    MissingProvenance { index: usize },
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
}

/// Which negation ranks a phase admits. Serialized as the string "all" or
/// a list of ranks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AllowedRanks {
    All,
    Ranks(BTreeSet<usize>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum AllowedRanksRepr {
    Marker(String),
    Ranks(BTreeSet<usize>),
}

impl Serialize for AllowedRanks {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            AllowedRanks::All => AllowedRanksRepr::Marker("all".to_string()).serialize(s),
            AllowedRanks::Ranks(r) => AllowedRanksRepr::Ranks(r.clone()).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for AllowedRanks {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match AllowedRanksRepr::deserialize(d)? {
            AllowedRanksRepr::Marker(m) if m == "all" => Ok(AllowedRanks::All),
            AllowedRanksRepr::Marker(m) => Err(serde::de::Error::custom(format!(
                "expected \"all\" or a list of ranks, got {m:?}"
            ))),
            AllowedRanksRepr::Ranks(r) => Ok(AllowedRanks::Ranks(r)),
        }
    }
}

impl AllowedRanks {
    pub fn admits(&self, rank: usize) -> bool {
        match self {
            AllowedRanks::All => true,
            AllowedRanks::Ranks(ranks) => ranks.contains(&rank),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase {
    pub epochs: u32,
    pub allowed_ranks: AllowedRanks,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurriculumPlan {
    pub phases: Vec<Phase>,
}

impl CurriculumPlan {
    pub fn validate(&self) -> Result<(), CurriculumError> {
        if self.phases.is_empty() {
            return Err(CurriculumError::InvalidPlan(
                "plan must have at least one phase".to_string(),
            ));
        }
        if self.phases.iter().any(|p| p.epochs == 0) {
            return Err(CurriculumError::InvalidPlan(
                "every phase needs at least one epoch".to_string(),
            ));
        }
        if self.phases.last().unwrap().allowed_ranks != AllowedRanks::All {
            return Err(CurriculumError::InvalidPlan(
                "final phase must allow all ranks".to_string(),
            ));
        }
        Ok(())
    }
}

/// The Japanese default schedule: 3 epochs restricted to the first three
/// negation rules, then `remainder_epochs` on the full augmented dataset.
pub fn plan_default_ja(remainder_epochs: u32) -> CurriculumPlan {
    CurriculumPlan {
        phases: vec![
            Phase {
                epochs: 3,
                allowed_ranks: AllowedRanks::Ranks([1, 2, 3].into_iter().collect()),
            },
            Phase {
                epochs: remainder_epochs.max(1),
                allowed_ranks: AllowedRanks::All,
            },
        ],
    }
}

/// One epoch's worth of training data.
#[derive(Debug, Clone)]
pub struct EpochDataset {
    /// 1-based phase number.
    pub phase: usize,
    /// 1-based epoch number within the phase.
    pub epoch: usize,
    pub records: Vec<LabeledStatement>,
}

/// Expand a plan into per-epoch datasets. Every epoch of a phase holds the
/// same records (originals plus admitted negations) in a per-epoch
/// deterministic order.
pub fn materialize(
    plan: &CurriculumPlan,
    originals: &[LabeledStatement],
    augmented: &[LabeledStatement],
    seed: u64,
) -> Result<Vec<EpochDataset>, CurriculumError> {
    plan.validate()?;
    let ranks: Vec<usize> = augmented
        .iter()
        .enumerate()
        .map(|(index, s)| match s.provenance {
            Provenance::Negated(rank) => Ok(rank),
            Provenance::Original => Err(CurriculumError::MissingProvenance { index }),
        })
        .collect::<Result<_, _>>()?;

    let mut out = Vec::new();
    for (phase_no, phase) in plan.phases.iter().enumerate() {
        let phase_no = phase_no + 1;
        let mut base: Vec<LabeledStatement> = originals.to_vec();
        base.extend(
            augmented
                .iter()
                .zip(&ranks)
                .filter(|(_, rank)| phase.allowed_ranks.admits(**rank))
                .map(|(s, _)| s.clone()),
        );
        for epoch_no in 1..=phase.epochs as usize {
            let mut records = base.clone();
            let mut rng = epoch_rng(seed, phase_no, epoch_no);
            records.shuffle(&mut rng);
            out.push(EpochDataset {
                phase: phase_no,
                epoch: epoch_no,
                records,
            });
        }
    }
    Ok(out)
}

fn epoch_rng(seed: u64, phase: usize, epoch: usize) -> ChaCha8Rng {
    // distinct stream per (seed, phase, epoch)
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(phase as u64).to_le_bytes());
    key[16..24].copy_from_slice(&(epoch as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
