//! Randomized invariants over the generation and serialization paths.

use paralaw::corpus::{self, filter_list_statements, parse_tsv};
use paralaw::export::{escape_tsv, read_jsonl, shuffle, unescape_tsv, write_jsonl};
use paralaw::lang::Language;
use paralaw::negation::{
    builtin_rules, find_occurrence, negate, split_train_validation, Label, LabeledStatement,
};
use paralaw::nfsp::{NfspLabel, NfspSample, SampleSource};
use proptest::prelude::*;
use std::collections::HashMap;
use std::io::Cursor;

fn word_strategy(lang: Language) -> impl Strategy<Value = String> {
    let bank: &[&str] = match lang {
        Language::En => &[
            "not", "shall", "should", "may", "must", "is", "are", "will", "be", "can", "cannot",
            "with", "without", "A", "An", "court", "party", "apply", "Nothing", "notwithstanding",
        ],
        Language::Ja => &[
            "ません", "できる", "できない", "した", "でない", "できた", "させる", "ている",
            "がない", "ではない", "ことがある", "しなければならない", "ならない", "契約", "は",
            "権利", "を", "。",
        ],
    };
    proptest::sample::select(bank.to_vec()).prop_map(str::to_string)
}

fn sentence_strategy(lang: Language) -> impl Strategy<Value = String> {
    proptest::collection::vec(word_strategy(lang), 1..12).prop_map(move |words| match lang {
        Language::En => words.join(" "),
        Language::Ja => words.concat(),
    })
}

fn sentence_strategy_for(lang: Language) -> BoxedStrategy<String> {
    sentence_strategy(lang).boxed()
}

/// A negation rewrites exactly one site and picks the lowest matching rank.
fn check_single_span(text: &str, lang: Language) {
    let rules = builtin_rules(lang);
    if let Some(result) = negate(text, lang, &rules) {
        let (start, end) = result.span;
        assert!(text.is_char_boundary(start) && text.is_char_boundary(end));
        assert_eq!(&text[..start], &result.text[..start], "prefix changed");
        let suffix = &text[end..];
        assert!(result.text.ends_with(suffix), "suffix changed");
        // rank minimality against the brute-force oracle
        let min_rank = rules
            .iter()
            .filter(|r| find_occurrence(text, &r.pattern, lang).is_some())
            .map(|r| r.rank)
            .min();
        assert_eq!(Some(result.applied_rank), min_rank);
    } else {
        for rule in &rules {
            assert!(
                find_occurrence(text, &rule.pattern, lang).is_none(),
                "rule {} matches but negate returned None",
                rule.rank
            );
        }
    }
}

proptest! {
    #[test]
    fn negate_en_single_span_min_rank(text in sentence_strategy_for(Language::En)) {
        check_single_span(&text, Language::En);
    }

    #[test]
    fn negate_ja_single_span_min_rank(text in sentence_strategy_for(Language::Ja)) {
        check_single_span(&text, Language::Ja);
    }

    #[test]
    fn tsv_escape_round_trips(s in ".*") {
        prop_assert_eq!(unescape_tsv(&escape_tsv(&s)), s.clone());
        prop_assert!(!escape_tsv(&s).contains('\t'));
        prop_assert!(!escape_tsv(&s).contains('\n'));
    }

    #[test]
    fn shuffle_is_a_permutation(v in proptest::collection::vec(0u32..1000, 0..50), seed in 0u64..1000) {
        let shuffled = shuffle(v.clone(), seed);
        let mut a = v;
        let mut b = shuffled;
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn split_is_a_partition(n in 2usize..60, fraction in 0.05f64..0.95, seed in 0u64..100) {
        let statements: Vec<LabeledStatement> = (0..n)
            .map(|i| LabeledStatement::original(
                &format!("Claim {i} is valid."),
                Language::En,
                if i % 2 == 0 { Label::Lawful } else { Label::Unlawful },
            ))
            .collect();
        let (train, valid) = split_train_validation(&statements, fraction, seed);
        prop_assert_eq!(train.len() + valid.len(), n);
        prop_assert_eq!(valid.len(), (fraction * n as f64).round() as usize);
        let mut counts: HashMap<String, i64> = HashMap::new();
        for s in &statements {
            *counts.entry(s.text.clone()).or_default() += 1;
        }
        for s in train.iter().chain(valid.iter()) {
            *counts.entry(s.text.clone()).or_default() -= 1;
        }
        prop_assert!(counts.values().all(|c| *c == 0), "split lost or duplicated records");
    }

    #[test]
    fn corpus_tsv_round_trips(
        docs in 1usize..4,
        sentences in 1usize..6,
        lists in proptest::collection::vec(any::<bool>(), 24),
    ) {
        let mut tsv = String::new();
        for d in 0..docs {
            for s in 0..sentences {
                let flag = lists[d * 6 + s] as u8;
                tsv.push_str(&format!("d{d}\t{s}\t{flag}\tや{d}と{s}。\tWords {d} and {s}.\n"));
            }
        }
        let corpus = parse_tsv(Cursor::new(tsv.into_bytes())).unwrap();
        let mut buf = Vec::new();
        corpus::write_tsv(&corpus, &mut buf).unwrap();
        let reparsed = parse_tsv(Cursor::new(buf)).unwrap();
        prop_assert_eq!(&corpus, &reparsed);

        let filtered = filter_list_statements(&corpus);
        let refiltered = filter_list_statements(&filtered);
        prop_assert_eq!(&filtered, &refiltered, "filtering must be idempotent");
        prop_assert!(filtered
            .documents
            .iter()
            .flat_map(|d| &d.pairs)
            .all(|p| !p.en.is_list_item && !p.ja.is_list_item));
    }

    #[test]
    fn nfsp_jsonl_round_trips(
        texts in proptest::collection::vec("[a-z ]{1,20}", 1..10),
        labels in proptest::collection::vec(any::<bool>(), 10),
    ) {
        let samples: Vec<NfspSample> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| NfspSample {
                text_a: t.clone(),
                lang_a: Language::En,
                text_b: format!("対{i}"),
                lang_b: Language::Ja,
                label: if labels[i] { NfspLabel::Consecutive } else { NfspLabel::NotConsecutive },
                source: SampleSource::Unknown,
            })
            .collect();
        let mut buf = Vec::new();
        write_jsonl(&samples, &mut buf).unwrap();
        let back: Vec<NfspSample> = read_jsonl(Cursor::new(buf)).unwrap();
        prop_assert_eq!(samples, back);
    }
}
