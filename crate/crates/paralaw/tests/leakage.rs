//! Leakage detector: when every sentence in the corpus has the same
//! length, a model that sees only length features must stay at chance.
//! If it beats chance, a length artifact is leaking the labels.

use paralaw::corpus::parse_tsv;
use paralaw::nfsp;
use paralaw::probe;
use std::io::Cursor;

#[test]
fn length_only_probe_stays_at_chance_on_equal_length_data() {
    // single-digit ids keep every sentence the same character length
    let mut tsv = String::new();
    for d in 0..8 {
        for s in 0..9 {
            tsv.push_str(&format!("doc{d}\t{s}\t0\t文{d}の{s}番。\tSentence {s} of doc {d}.\n"));
        }
    }
    let corpus = parse_tsv(Cursor::new(tsv.into_bytes())).unwrap();
    let samples = nfsp::generate(&corpus, 1.0, 77).unwrap();
    assert_eq!(samples.len(), 256);

    let examples: Vec<probe::Example> = samples
        .iter()
        .map(|s| probe::Example {
            features: probe::featurize_length_only(&s.text_a, &s.text_b, 18),
            label: s.label.code() as usize,
        })
        .collect();
    let split = examples.len() * 3 / 4;
    let (train_set, held_out) = examples.split_at(split);
    let config = probe::TrainConfig {
        num_classes: 2,
        epochs: 5,
        seed: 0,
        ..probe::TrainConfig::default()
    };
    let outcome = probe::train(train_set, &config).unwrap();
    let report = probe::evaluate(&outcome.model, held_out).unwrap();
    assert!(
        (report.accuracy - 0.5).abs() <= 0.1,
        "length-only accuracy {} suggests a length artifact",
        report.accuracy
    );
}
