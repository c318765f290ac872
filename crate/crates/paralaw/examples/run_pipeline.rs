//! Drive the full pipeline through the CLI entry point.

use paralaw::cli;

fn main() {
    let dir = tempfile::tempdir().expect("tempdir");
    let input = dir.path().join("corpus.tsv");
    let mut tsv = String::new();
    for d in 0..4 {
        for s in 0..6 {
            tsv.push_str(&format!("law{d}\t{s}\t0\t第{d}法の第{s}文。\tSentence {s} of law {d}.\n"));
        }
    }
    std::fs::write(&input, tsv).expect("write corpus");

    let outdir = dir.path().join("out");
    let code = cli::run([
        "paralaw",
        "pipeline",
        "--input",
        input.to_str().unwrap(),
        "--seed",
        "42",
        "--outdir",
        outdir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);

    for entry in std::fs::read_dir(&outdir).expect("read outdir") {
        let entry = entry.unwrap();
        println!(
            "{}  ({} bytes)",
            entry.file_name().to_string_lossy(),
            entry.metadata().unwrap().len()
        );
    }
    let manifest = std::fs::read_to_string(outdir.join("manifest.json")).unwrap();
    println!("{manifest}");
}
