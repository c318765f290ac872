//! Command-line entry point wiring the modules into reproducible pipelines.
//!
//! Exit codes: 0 success, 1 data error, 2 usage error. Directory-producing
//! subcommands (`pipeline`, `curriculum`) write a `manifest.json` with the
//! resolved configuration, the seed, and a SHA-256 digest per output file.

use crate::corpus::{self, AlignedCorpus};
use crate::curriculum::{self, CurriculumPlan};
use crate::export::{self, StatView};
use crate::lang::Language;
use crate::negation::{self, LabeledStatement, LabeledStatementRecord, NegationRule};
use crate::nfsp;
use crate::nmsp::{self, LanguageMix, NmspConfig};
use crate::probe;
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "paralaw", version, about = "Cross-lingual legal pretraining dataset toolkit")]
struct Cli {
    /// Seed for all randomized steps.
    #[arg(long, global = true, env = "PARALAW_SEED", default_value_t = 0)]
    seed: u64,
    /// Reserved; generation is currently single-threaded for determinism.
    #[arg(long, global = true, default_value_t = 1, hide = true)]
    threads: usize,
    /// Suppress progress output on stderr.
    #[arg(long, global = true, default_value_t = false)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CorpusFormat {
    Tsv,
    Xml,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportFormat {
    Jsonl,
    Tsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MixArg {
    Uniform,
    EnjaOnly,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse an aligned corpus and emit it as corpus JSONL.
    Ingest(IngestArgs),
    /// Negation-augment labeled statements, optionally splitting train/validation.
    Negate(NegateArgs),
    /// Generate Next Foreign Sentence Prediction samples.
    GenNfsp(GenNfspArgs),
    /// Generate Neighbor Multilingual Sentence Prediction samples.
    GenNmsp(GenNmspArgs),
    /// Materialize per-epoch curriculum dataset files.
    Curriculum(CurriculumArgs),
    /// Re-serialize a dataset, optionally shuffled.
    Export(ExportArgs),
    /// Dataset statistics as a JSON report.
    Stats(StatsArgs),
    /// Train and evaluate the linear probe on generated datasets.
    Probe(ProbeArgs),
    /// Ingest, filter, generate NFSP and NMSP, export, and report stats.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long)]
    input: PathBuf,
    /// Inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<CorpusFormat>,
    /// Remove list-item statements after parsing.
    #[arg(long, default_value_t = false)]
    filter_lists: bool,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct NegateArgs {
    #[arg(long)]
    lang: Language,
    /// Rule table TSV; built-in tables are used when omitted.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Labeled statements JSONL.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Validation fraction; also writes .train/.valid files next to the output.
    #[arg(long)]
    split: Option<f64>,
}

#[derive(Debug, Args)]
struct GenNfspArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    neg_ratio: f64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct GenNmspArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Total sample count, split uniformly over the four labels.
    /// Defaults to 3x the default NFSP total for the corpus.
    #[arg(long, conflicts_with = "per_label")]
    total: Option<usize>,
    /// Exact per-label counts: random,normal,reverse,noncontiguous.
    #[arg(long, value_delimiter = ',')]
    per_label: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value_t = MixArg::Uniform)]
    lang_mix: MixArg,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct CurriculumArgs {
    /// Plan JSON file.
    #[arg(long, conflicts_with = "default_ja")]
    plan: Option<PathBuf>,
    /// Use the built-in Japanese schedule (3 restricted epochs, then all rules).
    #[arg(long, default_value_t = false)]
    default_ja: bool,
    /// Epochs of the final full-data phase under --default-ja.
    #[arg(long, default_value_t = 1)]
    remainder_epochs: u32,
    /// Original labeled statements JSONL.
    #[arg(long)]
    originals: PathBuf,
    /// Negated statements JSONL (provenance "negated" with rule_rank).
    #[arg(long)]
    augmented: PathBuf,
    #[arg(long)]
    outdir: PathBuf,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = ExportFormat::Jsonl)]
    format: ExportFormat,
    #[arg(long, default_value_t = false)]
    shuffle: bool,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    input: PathBuf,
    /// Report file; stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProbeArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    eval: PathBuf,
    #[arg(long, default_value_t = 2)]
    classes: usize,
    #[arg(long, default_value_t = 18)]
    hash_bits: u8,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    /// Report file; stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the trained model as JSON.
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    format: Option<CorpusFormat>,
    #[arg(long, default_value_t = 1.0)]
    neg_ratio: f64,
    #[arg(long)]
    outdir: PathBuf,
}

/// Run the CLI. Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest(args) => ingest(args),
        Command::Negate(args) => negate(args, cli.seed, cli.quiet),
        Command::GenNfsp(args) => gen_nfsp(args, cli.seed),
        Command::GenNmsp(args) => gen_nmsp(args, cli.seed),
        Command::Curriculum(args) => run_curriculum(args, cli.seed),
        Command::Export(args) => export_cmd(args, cli.seed),
        Command::Stats(args) => stats_cmd(args),
        Command::Probe(args) => probe_cmd(args, cli.seed),
        Command::Pipeline(args) => pipeline(args, cli.seed),
    }
}

fn sniff_format(path: &Path, explicit: Option<CorpusFormat>) -> Result<CorpusFormat> {
    if let Some(f) = explicit {
        return Ok(f);
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("tsv") => Ok(CorpusFormat::Tsv),
        Some("xml") => Ok(CorpusFormat::Xml),
        Some("jsonl") => Ok(CorpusFormat::Jsonl),
        _ => bail!(
            "cannot infer corpus format of {}; pass --format",
            path.display()
        ),
    }
}

fn load_corpus(path: &Path, explicit: Option<CorpusFormat>) -> Result<AlignedCorpus> {
    let format = sniff_format(path, explicit)?;
    let reader = BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    );
    let corpus = match format {
        CorpusFormat::Tsv => corpus::parse_tsv(reader)?,
        CorpusFormat::Xml => corpus::parse_aligned_xml(reader)?,
        CorpusFormat::Jsonl => corpus::parse_jsonl(reader)?,
    };
    Ok(corpus)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(BufWriter::new(File::create(path).with_context(|| {
        format!("creating {}", path.display())
    })?))
}

fn ingest(args: &IngestArgs) -> Result<()> {
    let mut corpus = load_corpus(&args.input, args.format)?;
    if args.filter_lists {
        corpus = corpus::filter_list_statements(&corpus);
    }
    let report = corpus::validate(&corpus);
    if !report.is_empty() {
        bail!(
            "corpus fails validation: {}",
            serde_json::to_string(&report)?
        );
    }
    corpus::write_jsonl(&corpus, create(&args.output)?)?;
    Ok(())
}

fn read_statements(path: &Path) -> Result<Vec<LabeledStatement>> {
    let records: Vec<LabeledStatementRecord> =
        export::read_jsonl(BufReader::new(File::open(path).with_context(|| {
            format!("opening {}", path.display())
        })?))?;
    records
        .into_iter()
        .map(|r| LabeledStatement::try_from(r).map_err(anyhow::Error::msg))
        .collect()
}

fn write_statements(statements: &[LabeledStatement], path: &Path) -> Result<()> {
    let records: Vec<LabeledStatementRecord> =
        statements.iter().map(LabeledStatementRecord::from).collect();
    export::write_jsonl(&records, create(path)?)?;
    Ok(())
}

fn load_rules(path: Option<&PathBuf>, lang: Language) -> Result<Vec<NegationRule>> {
    match path {
        Some(p) => Ok(negation::load_rules(BufReader::new(File::open(p)?))?),
        None => Ok(negation::builtin_rules(lang)),
    }
}

fn negate(args: &NegateArgs, seed: u64, quiet: bool) -> Result<()> {
    let statements = read_statements(&args.input)?;
    let rules = load_rules(args.rules.as_ref(), args.lang)?;
    let augmented = negation::augment_lawfulness(&statements, &rules);
    write_statements(&augmented.statements, &args.output)?;
    if let Some(fraction) = args.split {
        let (train, valid) =
            negation::split_train_validation(&augmented.statements, fraction, seed);
        write_statements(&train, &sibling(&args.output, "train")?)?;
        write_statements(&valid, &sibling(&args.output, "valid")?)?;
    }
    if !quiet {
        eprintln!(
            "augmented {} statements ({} skipped, no rule matched)",
            augmented.statements.len(),
            augmented.skipped
        );
    }
    Ok(())
}

fn sibling(path: &Path, tag: &str) -> Result<PathBuf> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .context("output path has no file name")?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("jsonl");
    Ok(path.with_file_name(format!("{stem}.{tag}.{ext}")))
}

fn gen_nfsp(args: &GenNfspArgs, seed: u64) -> Result<()> {
    let corpus = load_corpus(&args.corpus, None)?;
    let samples = nfsp::generate(&corpus, args.neg_ratio, seed)?;
    export::write_jsonl(&samples, create(&args.output)?)?;
    Ok(())
}

fn nmsp_config(args: &GenNmspArgs, corpus: &AlignedCorpus, seed: u64) -> Result<NmspConfig> {
    let mix = match args.lang_mix {
        MixArg::Uniform => LanguageMix::Uniform,
        MixArg::EnjaOnly => LanguageMix::EnjaOnly,
    };
    Ok(match (&args.per_label, args.total) {
        (Some(counts), _) => {
            if counts.len() != 4 {
                bail!("--per-label needs 4 comma-separated counts, got {}", counts.len());
            }
            NmspConfig {
                per_label: [counts[0], counts[1], counts[2], counts[3]],
                language_mix: mix,
                seed,
            }
        }
        (None, Some(total)) => NmspConfig::with_total(total, mix, seed),
        (None, None) => {
            let mut config = NmspConfig::default_for(corpus, seed);
            config.language_mix = mix;
            config
        }
    })
}

fn gen_nmsp(args: &GenNmspArgs, seed: u64) -> Result<()> {
    let corpus = load_corpus(&args.corpus, None)?;
    let config = nmsp_config(args, &corpus, seed)?;
    let samples = nmsp::generate(&corpus, &config)?;
    export::write_jsonl(&samples, create(&args.output)?)?;
    Ok(())
}

fn run_curriculum(args: &CurriculumArgs, seed: u64) -> Result<()> {
    let plan: CurriculumPlan = match (&args.plan, args.default_ja) {
        (Some(path), _) => serde_json::from_reader(BufReader::new(File::open(path)?))?,
        (None, true) => curriculum::plan_default_ja(args.remainder_epochs),
        (None, false) => bail!("pass either --plan FILE or --default-ja"),
    };
    let originals = read_statements(&args.originals)?;
    let augmented = read_statements(&args.augmented)?;
    let epochs = curriculum::materialize(&plan, &originals, &augmented, seed)?;
    std::fs::create_dir_all(&args.outdir)?;
    let mut outputs = Vec::new();
    for epoch in &epochs {
        let path = args
            .outdir
            .join(format!("phase{}_epoch{}.jsonl", epoch.phase, epoch.epoch));
        write_statements(&epoch.records, &path)?;
        outputs.push(path);
    }
    let config = json!({
        "task": "curriculum",
        "plan": plan,
        "originals": args.originals,
        "augmented": args.augmented,
    });
    write_manifest(&args.outdir, seed, config, &outputs)?;
    Ok(())
}

fn read_values(path: &Path) -> Result<Vec<Value>> {
    Ok(export::read_jsonl(BufReader::new(File::open(path).with_context(
        || format!("opening {}", path.display()),
    )?))?)
}

fn export_cmd(args: &ExportArgs, seed: u64) -> Result<()> {
    let mut records = read_values(&args.input)?;
    if args.shuffle {
        records = export::shuffle(records, seed);
    }
    let mut writer = create(&args.output)?;
    match args.format {
        ExportFormat::Jsonl => export::write_jsonl(&records, writer)?,
        ExportFormat::Tsv => {
            for record in &records {
                writeln!(writer, "{}", value_tsv_line(record)?)?;
            }
        }
    }
    Ok(())
}

fn value_tsv_line(record: &Value) -> Result<String> {
    let text = |key: &str| -> String {
        record
            .get(key)
            .and_then(Value::as_str)
            .map(export::escape_tsv)
            .unwrap_or_default()
    };
    let raw = |key: &str| -> String {
        match record.get(key) {
            Some(Value::String(s)) => s.clone(),
            Some(Value::Number(n)) => n.to_string(),
            _ => String::new(),
        }
    };
    if record.get("text_a").is_some() {
        Ok(format!(
            "{}\t{}\t{}\t{}\t{}",
            text("text_a"),
            raw("lang_a"),
            text("text_b"),
            raw("lang_b"),
            raw("label")
        ))
    } else if record.get("text").is_some() {
        Ok(format!(
            "{}\t{}\t{}\t{}\t{}",
            text("text"),
            raw("lang"),
            raw("label"),
            raw("provenance"),
            raw("rule_rank")
        ))
    } else {
        bail!("record has neither text_a nor text field")
    }
}

fn stats_cmd(args: &StatsArgs) -> Result<()> {
    let records = read_values(&args.input)?;
    let views: Vec<StatView> = records
        .iter()
        .enumerate()
        .map(|(i, v)| {
            export::view_from_json(v)
                .with_context(|| format!("record {} has no text fields", i + 1))
        })
        .collect::<Result<_>>()?;
    let report = export::stats(&views);
    emit_report(&serde_json::to_value(&report)?, args.report.as_ref())
}

fn emit_report(report: &Value, path: Option<&PathBuf>) -> Result<()> {
    let rendered = serde_json::to_string_pretty(report)?;
    match path {
        Some(p) => {
            let mut w = create(p)?;
            writeln!(w, "{rendered}")?;
        }
        None => println!("{rendered}"),
    }
    Ok(())
}

#[derive(Debug, serde::Deserialize)]
struct PairRecord {
    text_a: String,
    lang_a: Language,
    text_b: String,
    lang_b: Language,
    label: usize,
}

fn load_examples(path: &Path, classes: usize, hash_bits: u8) -> Result<Vec<probe::Example>> {
    let records: Vec<PairRecord> =
        export::read_jsonl(BufReader::new(File::open(path).with_context(|| {
            format!("opening {}", path.display())
        })?))?;
    records
        .into_iter()
        .map(|r| {
            if r.label >= classes {
                bail!("label {} out of range for {} classes", r.label, classes);
            }
            Ok(probe::Example {
                features: probe::featurize(
                    &r.text_a, r.lang_a, &r.text_b, r.lang_b, hash_bits, (1, 3),
                ),
                label: r.label,
            })
        })
        .collect()
}

fn probe_cmd(args: &ProbeArgs, seed: u64) -> Result<()> {
    if !matches!(args.classes, 2 | 4) {
        bail!("--classes must be 2 or 4");
    }
    let train_set = load_examples(&args.train, args.classes, args.hash_bits)?;
    let eval_set = load_examples(&args.eval, args.classes, args.hash_bits)?;
    let config = probe::TrainConfig {
        num_classes: args.classes,
        hash_bits: args.hash_bits,
        epochs: args.epochs,
        seed,
        ..probe::TrainConfig::default()
    };
    let outcome = probe::train(&train_set, &config)?;
    let train_report = probe::evaluate(&outcome.model, &train_set)?;
    let eval_report = probe::evaluate(&outcome.model, &eval_set)?;
    if let Some(path) = &args.model_out {
        serde_json::to_writer(create(path)?, &outcome.model)?;
    }
    let report = json!({
        "config": {
            "classes": args.classes,
            "hash_bits": args.hash_bits,
            "ngram_range": [1, 3],
            "epochs": args.epochs,
            "seed": seed,
        },
        "epoch_losses": outcome.epoch_losses,
        "train": train_report,
        "eval": eval_report,
    });
    emit_report(&report, args.report.as_ref())
}

fn pipeline(args: &PipelineArgs, seed: u64) -> Result<()> {
    let corpus = load_corpus(&args.input, args.format)?;
    let corpus = corpus::filter_list_statements(&corpus);
    std::fs::create_dir_all(&args.outdir)?;

    let corpus_path = args.outdir.join("corpus.jsonl");
    corpus::write_jsonl(&corpus, create(&corpus_path)?)?;

    let nfsp_samples = nfsp::generate(&corpus, args.neg_ratio, seed)?;
    let nfsp_path = args.outdir.join("nfsp.jsonl");
    export::write_jsonl(&nfsp_samples, create(&nfsp_path)?)?;

    let nmsp_config = NmspConfig::default_for(&corpus, seed);
    let nmsp_samples = nmsp::generate(&corpus, &nmsp_config)?;
    let nmsp_path = args.outdir.join("nmsp.jsonl");
    export::write_jsonl(&nmsp_samples, create(&nmsp_path)?)?;

    let nfsp_views: Vec<StatView> = nfsp_samples.iter().map(StatView::from).collect();
    let nmsp_views: Vec<StatView> = nmsp_samples.iter().map(StatView::from).collect();
    let stats_path = args.outdir.join("stats.json");
    let stats = json!({
        "nfsp": export::stats(&nfsp_views),
        "nmsp": export::stats(&nmsp_views),
    });
    emit_report(&stats, Some(&stats_path))?;

    let config = json!({
        "task": "pipeline",
        "input": args.input,
        "neg_ratio": args.neg_ratio,
        "nmsp_per_label": nmsp_config.per_label,
    });
    write_manifest(
        &args.outdir,
        seed,
        config,
        &[corpus_path, nfsp_path, nmsp_path, stats_path],
    )?;
    Ok(())
}

fn write_manifest(outdir: &Path, seed: u64, config: Value, outputs: &[PathBuf]) -> Result<()> {
    let mut entries = Vec::new();
    for path in outputs {
        let bytes = std::fs::read(path)?;
        let digest = Sha256::digest(&bytes);
        entries.push(json!({
            "path": path.file_name().and_then(|n| n.to_str()).unwrap_or_default(),
            "bytes": bytes.len(),
            "sha256": format!("{digest:x}"),
        }));
    }
    let manifest = json!({
        "seed": seed,
        "config": config,
        "outputs": entries,
    });
    let mut writer = create(&outdir.join("manifest.json"))?;
    writeln!(writer, "{}", serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(run(["paralaw", "--bogus"]), 2);
        assert_eq!(run(["paralaw", "stats"]), 2); // missing required --input
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run(["paralaw", "--help"]), 0);
    }

    #[test]
    fn missing_file_is_data_error() {
        assert_eq!(
            run(["paralaw", "stats", "--input", "/nonexistent/x.jsonl"]),
            1
        );
    }
}
