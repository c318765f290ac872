//! paralaw: deterministic construction of cross-lingual sentence-level
//! pretraining datasets and negation-augmented lawfulness-classification
//! datasets from sentence-aligned bilingual legal corpora.
//!
//! The toolkit covers five stages, each usable as a library module, a CLI
//! subcommand, or a runnable example (see `examples/`):
//!
//! * [`corpus`] — ingest aligned TSV/XML corpora, filter list statements,
//!   validate alignment invariants
//! * [`negation`] — ordered first-match-once negation rewriting (built-in
//!   English and Japanese rule tables) and label-flipped augmentation
//! * [`nfsp`] / [`nmsp`] — binary and four-way sentence-pair sample
//!   generation with brute-force checkable labels
//! * [`curriculum`] — per-epoch dataset materialization with restricted
//!   negation-rule phases
//! * [`export`] / [`probe`] — serialization, seeded shuffling, dataset
//!   statistics, and a hashed n-gram linear probe that verifies generated
//!   labels are learnable
//!
//! Every operation is a pure function of (inputs, seed); all randomness
//! comes from explicitly seeded ChaCha8 streams.

pub mod cli;
pub mod corpus;
pub mod curriculum;
pub mod export;
pub mod lang;
pub mod negation;
pub mod nfsp;
pub mod nmsp;
pub mod probe;

pub use lang::Language;
