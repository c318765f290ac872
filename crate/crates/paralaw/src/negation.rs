//! Ordered first-match-once negation rewriting.
//!
//! Each language has an ordered rule table; the first rule whose pattern
//! occurs in a statement is applied to the leftmost occurrence, exactly
//! once, and no further rules are consulted. English patterns match at
//! token boundaries, case-sensitively; Japanese patterns are raw substring
//! matches on NFC text. Negating a pre-labeled statement flips its
//! lawfulness label.

use crate::lang::Language;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::BufRead;
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Error)]
pub enum NegationError {
    #[error("rule table line {line}: {message}")]
    RuleFile { line: usize, message: String },
    #[error("rule table for {language}: ranks are not contiguous from 1")]
    BadRanks { language: Language },
    #[error("rule table for {language}: rank {rank} has pattern equal to replacement")]
    PatternEqualsReplacement { language: Language, rank: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One ordered rewrite: replace `pattern` with `replacement`. An empty
/// replacement removes the pattern (plus one adjacent space in English).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegationRule {
    pub pattern: String,
    pub replacement: String,
    pub language: Language,
    /// 1-based position in the rule table; lower ranks are tried first.
    pub rank: usize,
}

/// The English rule table, in table order.
const EN_RULES: &[(&str, &str)] = &[
    ("not", ""),
    ("shall", "shall not"),
    ("should", "should not"),
    ("may", "may not"),
    ("must", "must not"),
    ("is", "is not"),
    ("are", "are not"),
    ("will be", "will not be"),
    ("can", "cannot"),
    ("cannot", "can"),
    ("with", "without"),
    ("without", "with"),
    ("A", "No"),
    ("An", "No"),
];

/// The Japanese rule table, in table order.
const JA_RULES: &[(&str, &str)] = &[
    ("ません", "ます"),
    ("できる", "できない"),
    ("できない", "できる"),
    ("した", "しなかった"),
    ("でない", "である"),
    ("できた", "できなかった"),
    ("させる", "させない"),
    ("ている", "ていない"),
    ("がない", "がある"),
    ("ではない", "ではある"),
    ("ことがある", "ことがない"),
    ("しなければならない", "してはいけません"),
    ("ならない", "なる"),
];

/// The built-in rule table for a language: 14 English rules, 13 Japanese
/// rules, ranked in table order.
pub fn builtin_rules(language: Language) -> Vec<NegationRule> {
    let table = match language {
        Language::En => EN_RULES,
        Language::Ja => JA_RULES,
    };
    table
        .iter()
        .enumerate()
        .map(|(i, (pattern, replacement))| NegationRule {
            pattern: pattern.to_string(),
            replacement: replacement.to_string(),
            language,
            rank: i + 1,
        })
        .collect()
}

/// Load a rule table from TSV with columns `language \t rank \t pattern \t
/// replacement`; an empty replacement encodes removal. Returns rules for
/// every language present, validated for contiguous ranks.
pub fn load_rules<R: BufRead>(reader: R) -> Result<Vec<NegationRule>, NegationError> {
    let mut rules = Vec::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line_no = line_no + 1;
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(NegationError::RuleFile {
                line: line_no,
                message: "expected 4 tab-separated fields".to_string(),
            });
        }
        let language: Language = fields[0].parse().map_err(|e| NegationError::RuleFile {
            line: line_no,
            message: e,
        })?;
        let rank: usize = fields[1].parse().map_err(|_| NegationError::RuleFile {
            line: line_no,
            message: "rank must be a positive integer".to_string(),
        })?;
        if fields[2].is_empty() {
            return Err(NegationError::RuleFile {
                line: line_no,
                message: "pattern must be non-empty".to_string(),
            });
        }
        rules.push(NegationRule {
            pattern: fields[2].nfc().collect(),
            replacement: fields[3].nfc().collect(),
            language,
            rank,
        });
    }
    validate_rules(&rules)?;
    Ok(rules)
}

fn validate_rules(rules: &[NegationRule]) -> Result<(), NegationError> {
    for language in [Language::En, Language::Ja] {
        let mut ranks: Vec<usize> = rules
            .iter()
            .filter(|r| r.language == language)
            .map(|r| r.rank)
            .collect();
        ranks.sort_unstable();
        if !ranks.iter().enumerate().all(|(i, r)| *r == i + 1) {
            return Err(NegationError::BadRanks { language });
        }
        if let Some(r) = rules
            .iter()
            .find(|r| r.language == language && r.pattern == r.replacement)
        {
            return Err(NegationError::PatternEqualsReplacement {
                language,
                rank: r.rank,
            });
        }
    }
    Ok(())
}

/// A successful single-site rewrite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegationResult {
    pub text: String,
    pub applied_rank: usize,
    /// Byte range of the input that was replaced (for removals this
    /// includes the one adjacent space that is deleted with the token).
    pub span: (usize, usize),
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Leftmost occurrence of `pattern` in `text` under the language's match
/// semantics, or None. English requires token boundaries at both pattern
/// edges; Japanese is a plain substring search.
pub fn find_occurrence(text: &str, pattern: &str, language: Language) -> Option<usize> {
    match language {
        Language::Ja => text.find(pattern),
        Language::En => {
            let mut from = 0;
            while let Some(rel) = text[from..].find(pattern) {
                let start = from + rel;
                let end = start + pattern.len();
                let left_ok = text[..start]
                    .chars()
                    .next_back()
                    .map_or(true, |c| !is_word_char(c));
                let right_ok = text[end..].chars().next().map_or(true, |c| !is_word_char(c));
                if left_ok && right_ok {
                    return Some(start);
                }
                // step past this candidate, staying on a char boundary
                from = start + pattern.chars().next().map_or(1, |c| c.len_utf8());
            }
            None
        }
    }
}

/// Apply the first rule (by rank) whose pattern occurs in `text`, at the
/// leftmost occurrence, exactly once. Returns None when no rule matches;
/// such statements cannot be auto-negated and are skipped by callers.
pub fn negate(text: &str, language: Language, rules: &[NegationRule]) -> Option<NegationResult> {
    debug_assert!(!text.is_empty());
    let mut by_rank: Vec<&NegationRule> =
        rules.iter().filter(|r| r.language == language).collect();
    by_rank.sort_by_key(|r| r.rank);
    for rule in by_rank {
        if let Some(start) = find_occurrence(text, &rule.pattern, language) {
            let mut span = (start, start + rule.pattern.len());
            let replacement = rule.replacement.as_str();
            if replacement.is_empty() {
                // removal also deletes one adjacent space: preceding if
                // present, otherwise following, so spacing stays single
                if text[..span.0].ends_with(' ') {
                    span.0 -= 1;
                } else if text[span.1..].starts_with(' ') {
                    span.1 += 1;
                }
            }
            let mut out = String::with_capacity(text.len() + replacement.len());
            out.push_str(&text[..span.0]);
            out.push_str(replacement);
            out.push_str(&text[span.1..]);
            return Some(NegationResult {
                text: out,
                applied_rank: rule.rank,
                span,
            });
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Lawful,
    Unlawful,
}

impl Label {
    pub fn flip(self) -> Label {
        match self {
            Label::Lawful => Label::Unlawful,
            Label::Unlawful => Label::Lawful,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Original,
    /// Produced by the negation rule with this rank.
    Negated(usize),
}

/// A lawfulness-classification record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledStatement {
    pub text: String,
    pub language: Language,
    pub label: Label,
    pub provenance: Provenance,
}

impl LabeledStatement {
    pub fn original(text: &str, language: Language, label: Label) -> Self {
        LabeledStatement {
            text: text.nfc().collect(),
            language,
            label,
            provenance: Provenance::Original,
        }
    }
}

/// JSONL wire form of a [`LabeledStatement`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledStatementRecord {
    pub text: String,
    pub lang: Language,
    pub label: Label,
    pub provenance: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule_rank: Option<usize>,
}

impl From<&LabeledStatement> for LabeledStatementRecord {
    fn from(s: &LabeledStatement) -> Self {
        let (provenance, rule_rank) = match s.provenance {
            Provenance::Original => ("original".to_string(), None),
            Provenance::Negated(rank) => ("negated".to_string(), Some(rank)),
        };
        LabeledStatementRecord {
            text: s.text.clone(),
            lang: s.language,
            label: s.label,
            provenance,
            rule_rank,
        }
    }
}

impl TryFrom<LabeledStatementRecord> for LabeledStatement {
    type Error = String;

    fn try_from(r: LabeledStatementRecord) -> Result<Self, String> {
        let provenance = match (r.provenance.as_str(), r.rule_rank) {
            ("original", None) => Provenance::Original,
            ("negated", Some(rank)) => Provenance::Negated(rank),
            _ => return Err(format!("inconsistent provenance {:?}", r.provenance)),
        };
        Ok(LabeledStatement {
            text: r.text,
            language: r.lang,
            label: r.label,
            provenance,
        })
    }
}

/// Result of [`augment_lawfulness`]: originals first in input order, then
/// one label-flipped negation per negatable original, in input order.
#[derive(Debug, Clone)]
pub struct Augmented {
    pub statements: Vec<LabeledStatement>,
    /// Originals whose text matched no negation rule.
    pub skipped: usize,
}

/// Augment labeled statements by negating each one and reversing its label.
pub fn augment_lawfulness(statements: &[LabeledStatement], rules: &[NegationRule]) -> Augmented {
    let mut out: Vec<LabeledStatement> = statements.to_vec();
    let mut skipped = 0;
    for s in statements {
        match negate(&s.text, s.language, rules) {
            Some(result) => out.push(LabeledStatement {
                text: result.text,
                language: s.language,
                label: s.label.flip(),
                provenance: Provenance::Negated(result.applied_rank),
            }),
            None => skipped += 1,
        }
    }
    Augmented {
        statements: out,
        skipped,
    }
}

/// Deterministic seeded shuffle-and-split. The validation set takes
/// `round(fraction * N)` statements; the rest are training data.
pub fn split_train_validation(
    statements: &[LabeledStatement],
    fraction: f64,
    seed: u64,
) -> (Vec<LabeledStatement>, Vec<LabeledStatement>) {
    assert!(fraction > 0.0 && fraction < 1.0, "fraction must be in (0,1)");
    let mut shuffled = statements.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);
    let val_count = (fraction * statements.len() as f64).round() as usize;
    let train = shuffled.split_off(val_count);
    (train, shuffled)
}
