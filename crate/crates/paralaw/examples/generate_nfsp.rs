//! Generate a balanced cross-lingual next-sentence dataset from a toy corpus.

use paralaw::corpus::parse_tsv;
use paralaw::nfsp;
use std::io::Cursor;

fn main() {
    let mut tsv = String::new();
    for d in 0..3 {
        for s in 0..6 {
            tsv.push_str(&format!("law{d}\t{s}\t0\t第{d}法の第{s}文。\tSentence {s} of law {d}.\n"));
        }
    }
    let corpus = parse_tsv(Cursor::new(tsv.into_bytes())).expect("parse");

    let samples = nfsp::generate(&corpus, 1.0, 42).expect("generate");
    println!(
        "{} samples (default total for this corpus: {})",
        samples.len(),
        nfsp::default_total(&corpus)
    );
    for s in samples.iter().take(6) {
        println!(
            "{:?}  [{} -> {}]  {:40}  ||  {}",
            s.label, s.lang_a, s.lang_b, s.text_a, s.text_b
        );
    }
}
