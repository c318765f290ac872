//! End-to-end runs of every subcommand against a temp workspace.

use paralaw::cli::run;
use std::path::{Path, PathBuf};

struct Workspace {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Workspace {
    fn new() -> Workspace {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        Workspace { _dir: dir, root }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn write_corpus_tsv(&self, name: &str, docs: usize, sentences: usize) -> PathBuf {
        let mut tsv = String::new();
        for d in 0..docs {
            for s in 0..sentences {
                tsv.push_str(&format!(
                    "doc{d}\t{s}\t0\t文{d}の{s}番。\tSentence {s} of doc {d}.\n"
                ));
            }
        }
        let path = self.path(name);
        std::fs::write(&path, tsv).unwrap();
        path
    }
}

fn ok(args: &[&str]) {
    let mut argv = vec!["paralaw"];
    argv.extend(args);
    assert_eq!(run(argv.clone()), 0, "command failed: {argv:?}");
}

fn lines(path: &Path) -> Vec<String> {
    String::from_utf8(std::fs::read(path).unwrap())
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect()
}

#[test]
fn ingest_then_generate_then_stats() {
    let ws = Workspace::new();
    let tsv = ws.write_corpus_tsv("corpus.tsv", 3, 8);
    let corpus = ws.path("corpus.jsonl");
    ok(&["ingest", "--input", tsv.to_str().unwrap(), "--output", corpus.to_str().unwrap()]);
    assert_eq!(lines(&corpus).len(), 24);

    let nfsp = ws.path("nfsp.jsonl");
    ok(&[
        "gen-nfsp",
        "--corpus",
        corpus.to_str().unwrap(),
        "--seed",
        "5",
        "--output",
        nfsp.to_str().unwrap(),
    ]);
    // 3 docs x 7 adjacent pairs x 2 directions, doubled by 1:1 negatives
    assert_eq!(lines(&nfsp).len(), 84);

    let nmsp = ws.path("nmsp.jsonl");
    ok(&[
        "gen-nmsp",
        "--corpus",
        corpus.to_str().unwrap(),
        "--per-label",
        "10,10,10,10",
        "--seed",
        "5",
        "--output",
        nmsp.to_str().unwrap(),
    ]);
    assert_eq!(lines(&nmsp).len(), 40);

    let report = ws.path("stats.json");
    ok(&[
        "stats",
        "--input",
        nfsp.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    let stats: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(stats["total"], 84);
    assert_eq!(stats["per_label"]["0"], 42);
    assert_eq!(stats["per_label"]["1"], 42);
}

#[test]
fn negate_with_split_writes_siblings() {
    let ws = Workspace::new();
    let input = ws.path("statements.jsonl");
    let mut body = String::new();
    for i in 0..20 {
        body.push_str(&format!(
            "{{\"text\":\"Claim {i} is valid.\",\"lang\":\"en\",\"label\":\"lawful\",\"provenance\":\"original\"}}\n"
        ));
    }
    std::fs::write(&input, body).unwrap();
    let output = ws.path("augmented.jsonl");
    ok(&[
        "negate",
        "--lang",
        "en",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
        "--split",
        "0.1",
        "--seed",
        "3",
        "--quiet",
    ]);
    assert_eq!(lines(&output).len(), 40);
    let train = lines(&ws.path("augmented.train.jsonl"));
    let valid = lines(&ws.path("augmented.valid.jsonl"));
    assert_eq!(valid.len(), 4);
    assert_eq!(train.len(), 36);
    // the augmented negations are label-flipped
    let flipped = lines(&output)
        .iter()
        .filter(|l| l.contains("\"unlawful\"") && l.contains("\"negated\""))
        .count();
    assert_eq!(flipped, 20);
}

#[test]
fn curriculum_writes_epoch_files_and_manifest() {
    let ws = Workspace::new();
    let originals = ws.path("originals.jsonl");
    std::fs::write(
        &originals,
        "{\"text\":\"解除できる。\",\"lang\":\"ja\",\"label\":\"lawful\",\"provenance\":\"original\"}\n",
    )
    .unwrap();
    let augmented = ws.path("negated.jsonl");
    std::fs::write(
        &augmented,
        "{\"text\":\"解除できない。\",\"lang\":\"ja\",\"label\":\"unlawful\",\"provenance\":\"negated\",\"rule_rank\":2}\n",
    )
    .unwrap();
    let outdir = ws.path("epochs");
    ok(&[
        "curriculum",
        "--default-ja",
        "--remainder-epochs",
        "2",
        "--originals",
        originals.to_str().unwrap(),
        "--augmented",
        augmented.to_str().unwrap(),
        "--outdir",
        outdir.to_str().unwrap(),
    ]);
    for name in [
        "phase1_epoch1.jsonl",
        "phase1_epoch2.jsonl",
        "phase1_epoch3.jsonl",
        "phase2_epoch1.jsonl",
        "phase2_epoch2.jsonl",
        "manifest.json",
    ] {
        assert!(outdir.join(name).exists(), "{name} missing");
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(outdir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 5);
}

#[test]
fn export_tsv_and_shuffled_jsonl() {
    let ws = Workspace::new();
    let tsv = ws.write_corpus_tsv("corpus.tsv", 2, 5);
    let corpus = ws.path("corpus.jsonl");
    ok(&["ingest", "--input", tsv.to_str().unwrap(), "--output", corpus.to_str().unwrap()]);
    let nfsp = ws.path("nfsp.jsonl");
    ok(&[
        "gen-nfsp",
        "--corpus",
        corpus.to_str().unwrap(),
        "--output",
        nfsp.to_str().unwrap(),
    ]);

    let as_tsv = ws.path("nfsp.tsv");
    ok(&[
        "export",
        "--input",
        nfsp.to_str().unwrap(),
        "--format",
        "tsv",
        "--output",
        as_tsv.to_str().unwrap(),
    ]);
    let tsv_lines = lines(&as_tsv);
    assert_eq!(tsv_lines.len(), lines(&nfsp).len());
    assert!(tsv_lines.iter().all(|l| l.split('\t').count() == 5));

    let shuffled = ws.path("shuffled.jsonl");
    ok(&[
        "export",
        "--input",
        nfsp.to_str().unwrap(),
        "--shuffle",
        "--seed",
        "11",
        "--output",
        shuffled.to_str().unwrap(),
    ]);
    // canonicalize through Value: export re-serializes with sorted keys
    let canonical = |path: &Path| -> Vec<String> {
        lines(path)
            .iter()
            .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap().to_string())
            .collect()
    };
    let mut a = canonical(&nfsp);
    let mut b = canonical(&shuffled);
    assert_ne!(a, b, "shuffle left the order unchanged");
    a.sort();
    b.sort();
    assert_eq!(a, b, "shuffle must be a permutation");
}

#[test]
fn probe_reports_train_and_eval_metrics() {
    let ws = Workspace::new();
    let tsv = ws.write_corpus_tsv("corpus.tsv", 4, 10);
    let corpus = ws.path("corpus.jsonl");
    ok(&["ingest", "--input", tsv.to_str().unwrap(), "--output", corpus.to_str().unwrap()]);
    let train = ws.path("train.jsonl");
    ok(&[
        "gen-nfsp",
        "--corpus",
        corpus.to_str().unwrap(),
        "--seed",
        "1",
        "--output",
        train.to_str().unwrap(),
    ]);
    let eval = ws.path("eval.jsonl");
    ok(&[
        "gen-nfsp",
        "--corpus",
        corpus.to_str().unwrap(),
        "--seed",
        "2",
        "--output",
        eval.to_str().unwrap(),
    ]);
    let report = ws.path("probe.json");
    let model = ws.path("model.json");
    ok(&[
        "probe",
        "--train",
        train.to_str().unwrap(),
        "--eval",
        eval.to_str().unwrap(),
        "--epochs",
        "3",
        "--report",
        report.to_str().unwrap(),
        "--model-out",
        model.to_str().unwrap(),
    ]);
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(report["epoch_losses"].as_array().unwrap().len(), 3);
    assert!(report["eval"]["accuracy"].as_f64().unwrap() > 0.0);
    let model: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&model).unwrap()).unwrap();
    assert_eq!(model["num_classes"], 2);
}

#[test]
fn pipeline_respects_seed_env() {
    let ws = Workspace::new();
    let tsv = ws.write_corpus_tsv("corpus.tsv", 3, 6);
    let out_flag = ws.path("via_flag");
    ok(&[
        "pipeline",
        "--input",
        tsv.to_str().unwrap(),
        "--seed",
        "9",
        "--outdir",
        out_flag.to_str().unwrap(),
    ]);
    let out_env = ws.path("via_env");
    std::env::set_var("PARALAW_SEED", "9");
    ok(&[
        "pipeline",
        "--input",
        tsv.to_str().unwrap(),
        "--outdir",
        out_env.to_str().unwrap(),
    ]);
    std::env::remove_var("PARALAW_SEED");
    for name in ["nfsp.jsonl", "nmsp.jsonl", "manifest.json"] {
        assert_eq!(
            std::fs::read(out_flag.join(name)).unwrap(),
            std::fs::read(out_env.join(name)).unwrap(),
            "{name} differs between --seed and PARALAW_SEED"
        );
    }
}

#[test]
fn malformed_corpus_is_a_data_error() {
    let ws = Workspace::new();
    let bad = ws.path("bad.tsv");
    std::fs::write(&bad, "doc0\t0\tnot-enough-fields\n").unwrap();
    let out = ws.path("out.jsonl");
    assert_eq!(
        run(["paralaw", "ingest", "--input", bad.to_str().unwrap(), "--output", out.to_str().unwrap()]),
        1
    );
}
