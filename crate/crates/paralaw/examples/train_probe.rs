//! Train the hashed n-gram probe on a generated dataset and evaluate it.

use paralaw::corpus::parse_tsv;
use paralaw::nfsp;
use paralaw::probe;
use std::io::Cursor;

fn main() {
    let mut tsv = String::new();
    for d in 0..60 {
        tsv.push_str(&format!("law{d:02}\t0\t0\t前{d:02}文あいう。\tOpening {d:02} clause.\n"));
        tsv.push_str(&format!("law{d:02}\t1\t0\t後{d:02}文かきく。\tClosing {d:02} clause.\n"));
    }
    let corpus = parse_tsv(Cursor::new(tsv.into_bytes())).expect("parse");
    let samples = nfsp::generate(&corpus, 1.0, 3).expect("generate");

    let examples: Vec<probe::Example> = samples
        .iter()
        .map(|s| probe::Example {
            features: probe::featurize(&s.text_a, s.lang_a, &s.text_b, s.lang_b, 18, (1, 3)),
            label: s.label.code() as usize,
        })
        .collect();
    let split = examples.len() * 3 / 4;
    let (train_set, held_out) = examples.split_at(split);

    let config = probe::TrainConfig::default();
    let outcome = probe::train(train_set, &config).expect("train");
    for (i, loss) in outcome.epoch_losses.iter().enumerate() {
        println!("epoch {}: mean loss {loss:.4}", i + 1);
    }
    let report = probe::evaluate(&outcome.model, held_out).expect("evaluate");
    println!(
        "held-out accuracy {:.3}, per-class {:?}",
        report.accuracy, report.per_class_accuracy
    );

    // sanity-check the analytic gradient at the trained point
    let err = probe::grad_check(&outcome.model, &examples[0], 1e-5, 0);
    println!("gradient check relative error {err:.2e}");
}
