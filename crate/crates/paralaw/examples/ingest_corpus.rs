//! Parse an aligned TSV corpus, validate it, and drop list-item statements.

use paralaw::corpus::{filter_list_statements, parse_tsv, validate};
use std::io::Cursor;

fn main() {
    let tsv = "\
# doc_id  index  is_list  ja  en
civ1\t0\t0\t私権は、公共の福祉に適合しなければならない。\tPrivate rights must conform to the public welfare.\n\
civ1\t1\t0\t権利の濫用は、これを許さない。\tNo abuse of rights is permitted.\n\
civ1\t2\t1\t一　未成年者\t(i) a minor\n\
civ2\t0\t0\t年齢二十歳をもって、成年とする。\tThe age of majority is reached when a person reaches the age of 20.\n";

    let corpus = parse_tsv(Cursor::new(tsv.as_bytes().to_vec())).expect("parse");
    let report = validate(&corpus);
    println!(
        "parsed {} documents, {} positions, {} violations",
        corpus.documents.len(),
        corpus.total_positions(),
        report.violations.len()
    );

    let filtered = filter_list_statements(&corpus);
    println!(
        "after list filtering: {} positions",
        filtered.total_positions()
    );
    for doc in &filtered.documents {
        for pair in &doc.pairs {
            println!("{}/{}: {}", doc.doc_id, pair.index(), pair.en.text);
        }
    }
}
