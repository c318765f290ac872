//! Export a dataset in both formats and summarize it.

use paralaw::corpus::parse_tsv;
use paralaw::export::{self, StatView};
use paralaw::nfsp;
use std::io::Cursor;

fn main() {
    let mut tsv = String::new();
    for d in 0..3 {
        for s in 0..5 {
            tsv.push_str(&format!("law{d}\t{s}\t0\t第{d}法の第{s}文。\tSentence {s} of law {d}.\n"));
        }
    }
    let corpus = parse_tsv(Cursor::new(tsv.into_bytes())).expect("parse");
    let samples = nfsp::generate(&corpus, 1.0, 8).expect("generate");

    let mut jsonl = Vec::new();
    export::write_jsonl(&samples, &mut jsonl).expect("jsonl");
    let mut as_tsv = Vec::new();
    export::write_tsv(&samples, &mut as_tsv).expect("tsv");
    println!(
        "{} samples: {} bytes jsonl, {} bytes tsv",
        samples.len(),
        jsonl.len(),
        as_tsv.len()
    );

    let shuffled = export::shuffle(samples.clone(), 8);
    println!("first after shuffle: {}", shuffled[0].text_a);

    let views: Vec<StatView> = samples.iter().map(StatView::from).collect();
    let report = export::stats(&views);
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
}
