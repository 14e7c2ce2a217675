//! Command-line interface.
//!
//! Exit codes: 0 success, 1 runtime/I-O/codec error, 2 config or validation
//! error. Progress and warnings go to stderr; stdout carries data when
//! `--out` is omitted. With `--out DIR`, each subcommand writes its data
//! files plus a `manifest.json` that replays to byte-identical data outputs.

use std::borrow::Cow;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::alignment::{score_corpus_with, ScoreOptions, ScoredDocument, TargetProfile};
use crate::bench::run_bench;
use crate::codec::{Codec, CodecSpec};
use crate::corpus::{load_all, load_corpus, CorpusFormat, Document, TokenRule};
use crate::dsir::{self, DEFAULT_BUCKETS, DEFAULT_SMOOTHING};
use crate::eval::{alignment_ce_sweep, compare_methods, EvalOptions, EvalReport};
use crate::manifest::{
    DsirParams, EvalConfig, Method, RunConfig, SelectionManifest, SelectionParams, SweepConfig,
};
use crate::ngram::{cross_entropy, train_ngram_lm, Smoothing};
use crate::selection::{filter_threshold, select_random, select_token_budget, select_top_k};
use crate::synth;
use crate::{Error, Result};

#[derive(Parser)]
#[command(
    name = "zipfit",
    version,
    about = "Compression-based training-data selection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Score every source document against the target corpus
    Score(ScoreArgs),
    /// Score and select a training subset (top-k, token budget, or threshold)
    Select(SelectArgs),
    /// Run the pipeline across a grid of codec algorithms and levels
    Sweep(SweepArgs),
    /// Time zipfit selection against the DSIR baseline
    Bench(BenchArgs),
    /// n-gram evaluation harness: alignment-vs-CE sweep or method comparison
    Eval(EvalArgs),
}

fn parse_format(s: &str) -> std::result::Result<CorpusFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_token_rule(s: &str) -> std::result::Result<TokenRule, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_codec(s: &str) -> std::result::Result<CodecSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    match s {
        "zipfit" => Ok(Method::Zipfit),
        "dsir" => Ok(Method::Dsir),
        "random" => Ok(Method::Random),
        other => Err(format!(
            "unknown method `{other}` (expected zipfit, dsir, or random)"
        )),
    }
}

fn default_workers() -> usize {
    if let Ok(v) = std::env::var("ZIPFIT_WORKERS") {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                return n;
            }
        }
        eprintln!("warning: ignoring invalid ZIPFIT_WORKERS={v}");
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// Flags shared by every subcommand that reads corpora.
#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Compression backend and level, e.g. deflate:6 or reference
    #[arg(long, default_value = "deflate:6", value_parser = parse_codec)]
    pub codec: CodecSpec,

    /// Token counting rule for budgets and manifests
    #[arg(long, default_value = "whitespace", value_parser = parse_token_rule)]
    pub token_rule: TokenRule,

    /// Worker threads (falls back to ZIPFIT_WORKERS, then hardware parallelism)
    #[arg(long)]
    pub workers: Option<usize>,

    /// RNG seed for stochastic steps
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output directory; data goes to stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl CommonArgs {
    fn workers(&self) -> usize {
        self.workers.unwrap_or_else(default_workers)
    }
}

#[derive(Args, Debug, Clone)]
pub struct ScoreArgs {
    /// Source corpus to score
    #[arg(long)]
    pub source: PathBuf,

    #[arg(long, default_value = "jsonl", value_parser = parse_format)]
    pub source_format: CorpusFormat,

    /// Target task corpus
    #[arg(long)]
    pub target: PathBuf,

    #[arg(long, default_value = "jsonl", value_parser = parse_format)]
    pub target_format: CorpusFormat,

    /// Scoring method: zipfit (alignment) or dsir (importance weight)
    #[arg(long, default_value = "zipfit", value_parser = parse_method)]
    pub method: Method,

    /// Cap on candidate bytes fed to the codec (unset = score whole documents)
    #[arg(long)]
    pub max_bytes: Option<usize>,

    /// Emit per-target NCD values in each row
    #[arg(long)]
    pub debug_per_target: bool,

    /// DSIR hash bucket count
    #[arg(long, default_value_t = DEFAULT_BUCKETS)]
    pub buckets: usize,

    /// DSIR add-lambda smoothing
    #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
    pub smoothing: f64,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct SelectArgs {
    /// Source corpus (scored in-process unless --scored is given)
    #[arg(long)]
    pub source: Option<PathBuf>,

    #[arg(long, default_value = "jsonl", value_parser = parse_format)]
    pub source_format: CorpusFormat,

    /// Target task corpus (required unless --scored is given)
    #[arg(long)]
    pub target: Option<PathBuf>,

    #[arg(long, default_value = "jsonl", value_parser = parse_format)]
    pub target_format: CorpusFormat,

    /// Previously scored JSONL (skips the scoring pass)
    #[arg(long)]
    pub scored: Option<PathBuf>,

    /// Keep the k highest-scoring documents
    #[arg(long, group = "selector")]
    pub top_k: Option<usize>,

    /// Keep the rank prefix fitting this token budget
    #[arg(long, group = "selector")]
    pub budget_tokens: Option<u64>,

    /// Keep documents with score strictly above this threshold
    #[arg(long, group = "selector")]
    pub threshold: Option<f64>,

    #[arg(long, default_value = "zipfit", value_parser = parse_method)]
    pub method: Method,

    /// Use deterministic top-k by weight instead of Gumbel resampling (dsir)
    #[arg(long)]
    pub dsir_deterministic: bool,

    /// Include document text in the selected output
    #[arg(long)]
    pub include_text: bool,

    #[arg(long)]
    pub max_bytes: Option<usize>,

    #[arg(long, default_value_t = DEFAULT_BUCKETS)]
    pub buckets: usize,

    #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
    pub smoothing: f64,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[arg(long)]
    pub source: PathBuf,

    #[arg(long, default_value = "jsonl", value_parser = parse_format)]
    pub source_format: CorpusFormat,

    #[arg(long)]
    pub target: PathBuf,

    #[arg(long, default_value = "jsonl", value_parser = parse_format)]
    pub target_format: CorpusFormat,

    /// Comma-separated codec grid, e.g. deflate:1,deflate:6,deflate:9,reference
    #[arg(long, default_value = "deflate:1,deflate:6,deflate:9")]
    pub codecs: String,

    /// Token budget for each cell's selection
    #[arg(long, default_value_t = 4000)]
    pub budget_tokens: u64,

    /// n-gram order for the per-cell evaluator
    #[arg(long, default_value_t = 4)]
    pub order: usize,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    #[arg(long)]
    pub source: PathBuf,

    #[arg(long, default_value = "jsonl", value_parser = parse_format)]
    pub source_format: CorpusFormat,

    #[arg(long)]
    pub target: PathBuf,

    #[arg(long, default_value = "jsonl", value_parser = parse_format)]
    pub target_format: CorpusFormat,

    /// Selection size used for both timed methods
    #[arg(long, default_value_t = 100)]
    pub top_k: usize,

    #[arg(long, default_value_t = DEFAULT_BUCKETS)]
    pub buckets: usize,

    #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
    pub smoothing: f64,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct EvalArgs {
    /// sweep (alignment-vs-CE bins) or compare (zipfit/dsir/random/bottom-k)
    #[arg(long, default_value = "compare")]
    pub mode: String,

    /// Source corpus; omitted = shipped synthetic benchmark
    #[arg(long)]
    pub source: Option<PathBuf>,

    #[arg(long, default_value = "jsonl", value_parser = parse_format)]
    pub source_format: CorpusFormat,

    /// Target corpus; omitted = shipped synthetic benchmark
    #[arg(long)]
    pub target: Option<PathBuf>,

    #[arg(long, default_value = "jsonl", value_parser = parse_format)]
    pub target_format: CorpusFormat,

    /// Alignment bins for sweep mode
    #[arg(long, default_value_t = 5)]
    pub bins: usize,

    /// Per-bin training token budget (sweep mode)
    #[arg(long, default_value_t = 20_000)]
    pub budget_tokens: u64,

    /// Comma-separated token budgets (compare mode)
    #[arg(long, default_value = "10000,20000,40000")]
    pub budgets: String,

    /// n-gram order of the evaluator
    #[arg(long, default_value_t = 4)]
    pub order: usize,

    /// Laplace smoothing of the evaluator
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,

    /// Backoff weight of the evaluator
    #[arg(long, default_value_t = 0.4)]
    pub backoff: f64,

    /// Fraction of the target held out for CE evaluation
    #[arg(long, default_value_t = 0.5)]
    pub holdout: f64,

    /// Emit CSV alongside JSON and the text table
    #[arg(long)]
    pub csv: bool,

    #[command(flatten)]
    pub common: CommonArgs,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Score(args) => cmd_score(args),
        Command::Select(args) => cmd_select(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Eval(args) => cmd_eval(args),
    }
}

/// One output line of scored or selected JSONL. Field presence varies by
/// method and flags; field order is fixed.
#[derive(Serialize)]
struct OutputRow<'a> {
    id: &'a str,
    origin: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    text: Option<Cow<'a, str>>,
    token_count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    alignment: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ncd: Option<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rank: Option<usize>,
}

impl<'a> OutputRow<'a> {
    fn new(doc: &'a ScoredDocument, method: Method, with_score: bool) -> Self {
        OutputRow {
            id: &doc.document.id,
            origin: &doc.document.origin,
            text: None,
            token_count: doc.document.token_count,
            alignment: (with_score && method == Method::Zipfit).then_some(doc.score),
            weight: (with_score && method == Method::Dsir).then_some(doc.score),
            ncd: doc.per_target_ncd.as_deref(),
            rank: doc.rank,
        }
    }

    fn with_text(mut self, text: &'a [u8]) -> Self {
        self.text = Some(String::from_utf8_lossy(text));
        self
    }
}

/// Row shape accepted by `select --scored`.
#[derive(Deserialize)]
struct ScoredRowIn {
    id: String,
    #[serde(default)]
    origin: String,
    token_count: u64,
    #[serde(default)]
    alignment: Option<f64>,
    #[serde(default)]
    weight: Option<f64>,
}

enum DataSink {
    Stdout(BufWriter<std::io::Stdout>),
    File(BufWriter<File>),
}

impl Write for DataSink {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        match self {
            DataSink::Stdout(w) => w.write(buf),
            DataSink::File(w) => w.write(buf),
        }
    }

    fn flush(&mut self) -> std::io::Result<()> {
        match self {
            DataSink::Stdout(w) => w.flush(),
            DataSink::File(w) => w.flush(),
        }
    }
}

/// Open the data sink for a subcommand: `<out>/<name>` or stdout.
fn open_sink(out: &Option<PathBuf>, name: &str) -> Result<(DataSink, Option<PathBuf>)> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::io_path(dir, e))?;
            let path = dir.join(name);
            let file = File::create(&path).map_err(|e| Error::io_path(&path, e))?;
            Ok((DataSink::File(BufWriter::new(file)), Some(path)))
        }
        None => Ok((DataSink::Stdout(BufWriter::new(std::io::stdout())), None)),
    }
}

fn finish_manifest(manifest: &SelectionManifest, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(dir) => manifest.write(&dir.join("manifest.json")),
        None => {
            eprintln!("note: no --out directory; manifest not written");
            Ok(())
        }
    }
}

/// Load the target corpus; any failure (missing file, empty corpus) is a
/// validation error so misconfigured runs exit with code 2.
fn load_target(path: &Path, format: CorpusFormat, rule: TokenRule) -> Result<Vec<Document>> {
    let (docs, _) = load_all(path, format, rule)
        .map_err(|e| Error::validation(format!("target corpus required: {e}")))?;
    if docs.is_empty() {
        return Err(Error::validation(format!(
            "target corpus required: {} contains no documents",
            path.display()
        )));
    }
    Ok(docs)
}

fn write_row(sink: &mut impl Write, row: &OutputRow) -> Result<()> {
    serde_json::to_writer(&mut *sink, row)?;
    sink.write_all(b"\n")?;
    Ok(())
}

fn cmd_score(args: ScoreArgs) -> Result<()> {
    let workers = args.common.workers();
    let config = RunConfig {
        subcommand: "score".into(),
        source: Some(args.source.clone()),
        source_format: args.source_format,
        target: Some(args.target.clone()),
        target_format: args.target_format,
        scored: None,
        codec: args.common.codec,
        token_rule: args.common.token_rule,
        method: args.method,
        selection: None,
        seed: None,
        workers,
        max_bytes: args.max_bytes,
        debug_per_target: args.debug_per_target,
        include_text: false,
        dsir: (args.method == Method::Dsir).then_some(DsirParams {
            buckets: args.buckets,
            smoothing: args.smoothing,
        }),
        out: args.common.out.clone(),
        eval: None,
        sweep: None,
        bench_top_k: None,
    };
    let mut manifest = SelectionManifest::from_config(config);

    let rule = args.common.token_rule;
    let t = Instant::now();
    let target = load_target(&args.target, args.target_format, rule)?;
    manifest.record_phase("load_target", t.elapsed());

    let (mut sink, _) = open_sink(&args.common.out, "scored.jsonl")?;
    let mut rows = 0u64;
    let mut total_tokens = 0u64;

    match args.method {
        Method::Zipfit => {
            let codec = args.common.codec.build()?;
            let t = Instant::now();
            let profile = TargetProfile::build(target, codec.as_ref())?;
            manifest.record_phase("profile", t.elapsed());

            let t = Instant::now();
            let mut source = load_corpus(&args.source, args.source_format, rule)?;
            let opts = ScoreOptions {
                workers,
                max_bytes: args.max_bytes,
                retain_per_target: args.debug_per_target,
            };
            score_corpus_with(&mut source, &profile, codec.as_ref(), &opts, |sd| {
                rows += 1;
                total_tokens += sd.document.token_count;
                write_row(&mut sink, &OutputRow::new(&sd, Method::Zipfit, true))
            })?;
            manifest.record_phase("score", t.elapsed());
            manifest.skipped_inputs = source.skipped();
        }
        Method::Dsir => {
            let t = Instant::now();
            let p = dsir::fit_bucket_distribution(
                target.into_iter().map(Ok),
                args.buckets,
                args.smoothing,
            )?;
            let mut fit_stream = load_corpus(&args.source, args.source_format, rule)?;
            let q =
                dsir::fit_bucket_distribution(&mut fit_stream, args.buckets, args.smoothing)?;
            manifest.record_phase("fit", t.elapsed());

            let t = Instant::now();
            let mut source = load_corpus(&args.source, args.source_format, rule)?;
            let weighted =
                dsir::weigh_corpus(&mut source, &p, &q, args.buckets, workers)?;
            for sd in &weighted {
                rows += 1;
                total_tokens += sd.document.token_count;
                write_row(&mut sink, &OutputRow::new(sd, Method::Dsir, true))?;
            }
            manifest.record_phase("score", t.elapsed());
            manifest.skipped_inputs = source.skipped();
        }
        Method::Random => {
            return Err(Error::validation(
                "`score` needs a scoring method; use --method zipfit or --method dsir",
            ));
        }
    }
    sink.flush()?;
    let _ = total_tokens;
    manifest.scored_docs = Some(rows);
    finish_manifest(&manifest, &args.common.out)?;
    eprintln!("scored {rows} documents");
    Ok(())
}

fn read_scored_file(path: &Path) -> Result<(Vec<ScoredDocument>, Method)> {
    let file = File::open(path).map_err(|e| Error::io_path(path, e))?;
    let mut docs = Vec::new();
    let mut method = Method::Zipfit;
    for (line_no, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: ScoredRowIn = serde_json::from_str(&line).map_err(|e| {
            Error::validation(format!(
                "{}:{}: not a scored row: {e}",
                path.display(),
                line_no + 1
            ))
        })?;
        let score = match (row.alignment, row.weight) {
            (Some(a), _) => a,
            (None, Some(w)) => {
                method = Method::Dsir;
                w
            }
            (None, None) => 0.0,
        };
        docs.push(ScoredDocument {
            document: Document {
                id: row.id,
                text: Vec::new(),
                token_count: row.token_count,
                origin: row.origin,
            },
            score,
            rank: None,
            per_target_ncd: None,
        });
    }
    Ok((docs, method))
}

fn cmd_select(args: SelectArgs) -> Result<()> {
    let workers = args.common.workers();
    let rule = args.common.token_rule;

    let selection_params = match (args.top_k, args.budget_tokens, args.threshold) {
        (Some(k), None, None) => {
            if args.method == Method::Random {
                SelectionParams::Random { k }
            } else {
                SelectionParams::TopK { k }
            }
        }
        (None, Some(budget), None) => SelectionParams::BudgetTokens { budget },
        (None, None, Some(tau)) => SelectionParams::Threshold { tau },
        _ => {
            return Err(Error::validation(
                "exactly one of --top-k, --budget-tokens, or --threshold is required",
            ))
        }
    };

    let stochastic = args.method == Method::Random
        || (args.method == Method::Dsir
            && matches!(selection_params, SelectionParams::TopK { .. } | SelectionParams::Random { .. })
            && !args.dsir_deterministic);

    let config = RunConfig {
        subcommand: "select".into(),
        source: args.source.clone(),
        source_format: args.source_format,
        target: args.target.clone(),
        target_format: args.target_format,
        scored: args.scored.clone(),
        codec: args.common.codec,
        token_rule: rule,
        method: args.method,
        selection: Some(selection_params),
        seed: stochastic.then_some(args.common.seed),
        workers,
        max_bytes: args.max_bytes,
        debug_per_target: false,
        include_text: args.include_text,
        dsir: (args.method == Method::Dsir).then_some(DsirParams {
            buckets: args.buckets,
            smoothing: args.smoothing,
        }),
        out: args.common.out.clone(),
        eval: None,
        sweep: None,
        bench_top_k: None,
    };
    let mut manifest = SelectionManifest::from_config(config);

    // Obtain scored documents: from a scored file, or by scoring in-process.
    let t = Instant::now();
    let scored: Vec<ScoredDocument> = if let Some(scored_path) = &args.scored {
        let (docs, _) = read_scored_file(scored_path)?;
        docs
    } else {
        let source_path = args.source.as_ref().ok_or_else(|| {
            Error::validation("either --scored or --source and --target are required")
        })?;
        match args.method {
            Method::Zipfit => {
                let target_path = args
                    .target
                    .as_ref()
                    .ok_or_else(|| Error::validation("target corpus required"))?;
                let target = load_target(target_path, args.target_format, rule)?;
                let codec = args.common.codec.build()?;
                let profile = TargetProfile::build(target, codec.as_ref())?;
                let mut source = load_corpus(source_path, args.source_format, rule)?;
                let opts = ScoreOptions {
                    workers,
                    max_bytes: args.max_bytes,
                    retain_per_target: false,
                };
                let scored = crate::alignment::score_corpus(
                    &mut source,
                    &profile,
                    codec.as_ref(),
                    &opts,
                )?;
                manifest.skipped_inputs = source.skipped();
                scored
            }
            Method::Dsir => {
                let target_path = args
                    .target
                    .as_ref()
                    .ok_or_else(|| Error::validation("target corpus required"))?;
                let target = load_target(target_path, args.target_format, rule)?;
                let p = dsir::fit_bucket_distribution(
                    target.into_iter().map(Ok),
                    args.buckets,
                    args.smoothing,
                )?;
                let mut fit_stream = load_corpus(source_path, args.source_format, rule)?;
                let q =
                    dsir::fit_bucket_distribution(&mut fit_stream, args.buckets, args.smoothing)?;
                let mut source = load_corpus(source_path, args.source_format, rule)?;
                let weighted = dsir::weigh_corpus(&mut source, &p, &q, args.buckets, workers)?;
                manifest.skipped_inputs = source.skipped();
                weighted
            }
            Method::Random => {
                let mut source = load_corpus(source_path, args.source_format, rule)?;
                let mut docs = Vec::new();
                for doc in &mut source {
                    docs.push(ScoredDocument {
                        document: doc?,
                        score: 0.0,
                        rank: None,
                        per_target_ncd: None,
                    });
                }
                manifest.skipped_inputs = source.skipped();
                docs
            }
        }
    };
    manifest.record_phase("score", t.elapsed());
    manifest.scored_docs = Some(scored.len() as u64);

    let t = Instant::now();
    let selected = match (args.method, selection_params) {
        (Method::Random, SelectionParams::Random { k }) => {
            select_random(scored, k, args.common.seed)?
        }
        (Method::Random, SelectionParams::BudgetTokens { budget }) => {
            // seeded shuffle, then the budget prefix of the shuffled order
            let n = scored.len();
            let shuffled = select_random(scored, n, args.common.seed)?;
            let ordered: Vec<ScoredDocument> = shuffled
                .into_iter()
                .enumerate()
                .map(|(i, mut d)| {
                    d.score = -(i as f64);
                    d.rank = None;
                    d
                })
                .collect();
            select_token_budget(ordered, budget)
        }
        (Method::Random, _) => {
            return Err(Error::validation(
                "--method random supports --top-k (draw size) or --budget-tokens",
            ))
        }
        (Method::Dsir, SelectionParams::TopK { k }) => {
            if k > scored.len() {
                return Err(Error::validation(format!(
                    "cannot select {k} documents from a corpus of {}",
                    scored.len()
                )));
            }
            if args.dsir_deterministic {
                dsir::dsir_select_deterministic(scored, k)?
            } else {
                dsir::dsir_select(scored, k, args.common.seed)?
            }
        }
        (_, SelectionParams::TopK { k }) => select_top_k(scored, k),
        (_, SelectionParams::BudgetTokens { budget }) => select_token_budget(scored, budget),
        (_, SelectionParams::Threshold { tau }) => filter_threshold(scored, tau),
        (_, SelectionParams::Random { .. }) => unreachable!("random params imply random method"),
    };
    manifest.record_phase("select", t.elapsed());

    // Texts for --include-text: either retained from in-process scoring or
    // joined back from the source corpus by id (scored files carry no text).
    let mut selected = selected;
    if args.include_text && selected.iter().any(|d| d.document.text.is_empty()) {
        let source_path = args.source.as_ref().ok_or_else(|| {
            Error::validation("--include-text with --scored also needs --source for the text")
        })?;
        let wanted: std::collections::HashMap<String, usize> = selected
            .iter()
            .enumerate()
            .map(|(i, d)| (d.document.id.clone(), i))
            .collect();
        let mut stream = load_corpus(source_path, args.source_format, rule)?;
        for doc in &mut stream {
            let doc = doc?;
            if let Some(&i) = wanted.get(&doc.id) {
                selected[i].document.text = doc.text;
            }
        }
    }

    let t = Instant::now();
    let (mut sink, _) = open_sink(&args.common.out, "selected.jsonl")?;
    for sd in &selected {
        let mut row = OutputRow::new(sd, args.method, args.method != Method::Random);
        if args.include_text {
            row = row.with_text(&sd.document.text);
        }
        write_row(&mut sink, &row)?;
    }
    sink.flush()?;
    manifest.record_phase("write", t.elapsed());

    manifest.selected_ids = selected.iter().map(|d| d.document.id.clone()).collect();
    manifest.total_tokens = selected.iter().map(|d| d.document.token_count).sum();
    finish_manifest(&manifest, &args.common.out)?;
    eprintln!(
        "selected {} documents ({} tokens)",
        selected.len(),
        manifest.total_tokens
    );
    Ok(())
}

/// One cell of the codec sweep.
#[derive(Debug, Serialize, Deserialize)]
struct SweepRow {
    codec: String,
    algorithm: String,
    raw_level: i32,
    normalized_level: f64,
    available: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    ce_bits_per_byte: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    selected_tokens: Option<u64>,
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let workers = args.common.workers();
    let rule = args.common.token_rule;
    let codec_list: Vec<CodecSpec> = args
        .codecs
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<_>>()?;
    if codec_list.is_empty() {
        return Err(Error::validation("codec grid is empty"));
    }

    let config = RunConfig {
        subcommand: "sweep".into(),
        source: Some(args.source.clone()),
        source_format: args.source_format,
        target: Some(args.target.clone()),
        target_format: args.target_format,
        scored: None,
        codec: args.common.codec,
        token_rule: rule,
        method: Method::Zipfit,
        selection: Some(SelectionParams::BudgetTokens {
            budget: args.budget_tokens,
        }),
        seed: Some(args.common.seed),
        workers,
        max_bytes: None,
        debug_per_target: false,
        include_text: false,
        dsir: None,
        out: args.common.out.clone(),
        eval: None,
        sweep: Some(SweepConfig {
            codecs: codec_list.iter().map(|c| c.to_string()).collect(),
            budget: args.budget_tokens,
            order: args.order,
        }),
        bench_top_k: None,
    };
    let mut manifest = SelectionManifest::from_config(config);

    let t = Instant::now();
    let target = load_target(&args.target, args.target_format, rule)?;
    let (source, skipped) = load_all(&args.source, args.source_format, rule)?;
    manifest.skipped_inputs = skipped;
    manifest.record_phase("load", t.elapsed());

    let (scoring_targets, holdout) =
        crate::eval::split_target(target, 0.5, args.common.seed);
    if scoring_targets.is_empty() || holdout.is_empty() {
        return Err(Error::validation(
            "target corpus too small to split into scoring and holdout sets",
        ));
    }

    let mut rows = Vec::new();
    for spec in &codec_list {
        let cell_started = Instant::now();
        let codec: Box<dyn Codec> = match spec.build() {
            Ok(c) => c,
            Err(Error::CodecUnavailable { algorithm }) => {
                eprintln!("warning: {algorithm} backend unavailable; cell skipped");
                rows.push(SweepRow {
                    codec: spec.to_string(),
                    algorithm: spec.algorithm.name().into(),
                    raw_level: spec.raw_level,
                    normalized_level: spec.normalized_level,
                    available: false,
                    ce_bits_per_byte: None,
                    selected_tokens: None,
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let profile = TargetProfile::build(scoring_targets.clone(), codec.as_ref())?;
        let opts = ScoreOptions {
            workers,
            ..Default::default()
        };
        let scored = crate::alignment::score_corpus(
            source.clone().into_iter().map(Ok),
            &profile,
            codec.as_ref(),
            &opts,
        )?;
        let selected = select_token_budget(scored, args.budget_tokens);
        if selected.is_empty() {
            return Err(Error::validation(format!(
                "budget {} selects nothing under codec {spec}",
                args.budget_tokens
            )));
        }
        let train_docs: Vec<Document> = selected.iter().map(|d| d.document.clone()).collect();
        let model = train_ngram_lm(&train_docs, args.order, Smoothing::default())?;
        let ce = cross_entropy(&model, &holdout)?;
        rows.push(SweepRow {
            codec: spec.to_string(),
            algorithm: spec.algorithm.name().into(),
            raw_level: spec.raw_level,
            normalized_level: spec.normalized_level,
            available: true,
            ce_bits_per_byte: Some(ce),
            selected_tokens: Some(selected.iter().map(|d| d.document.token_count).sum()),
        });
        manifest.record_phase(&format!("cell:{spec}"), cell_started.elapsed());
    }

    let (mut sink, _) = open_sink(&args.common.out, "sweep.json")?;
    serde_json::to_writer_pretty(&mut sink, &rows)?;
    sink.write_all(b"\n")?;
    sink.flush()?;

    eprintln!(
        "{:<14} {:>10} {:>12} {:>12}",
        "codec", "norm_level", "ce(bits/B)", "available"
    );
    for row in &rows {
        eprintln!(
            "{:<14} {:>10.3} {:>12} {:>12}",
            row.codec,
            row.normalized_level,
            row.ce_bits_per_byte
                .map(|c| format!("{c:.4}"))
                .unwrap_or_else(|| "-".into()),
            row.available
        );
    }
    finish_manifest(&manifest, &args.common.out)?;
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let workers = args.common.workers();
    let rule = args.common.token_rule;
    let config = RunConfig {
        subcommand: "bench".into(),
        source: Some(args.source.clone()),
        source_format: args.source_format,
        target: Some(args.target.clone()),
        target_format: args.target_format,
        scored: None,
        codec: args.common.codec,
        token_rule: rule,
        method: Method::Zipfit,
        selection: Some(SelectionParams::TopK { k: args.top_k }),
        seed: None,
        workers,
        max_bytes: None,
        debug_per_target: false,
        include_text: false,
        dsir: Some(DsirParams {
            buckets: args.buckets,
            smoothing: args.smoothing,
        }),
        out: args.common.out.clone(),
        eval: None,
        sweep: None,
        bench_top_k: Some(args.top_k),
    };
    let mut manifest = SelectionManifest::from_config(config);

    let t = Instant::now();
    let target = load_target(&args.target, args.target_format, rule)?;
    let (source, skipped) = load_all(&args.source, args.source_format, rule)?;
    manifest.skipped_inputs = skipped;
    manifest.record_phase("load", t.elapsed());

    let codec = args.common.codec.build()?;
    let t = Instant::now();
    let report = run_bench(
        &source,
        &target,
        args.top_k.min(source.len()),
        codec.as_ref(),
        workers,
        args.buckets,
        args.smoothing,
    )?;
    manifest.record_phase("bench", t.elapsed());

    let (mut sink, _) = open_sink(&args.common.out, "bench.json")?;
    serde_json::to_writer_pretty(&mut sink, &report)?;
    sink.write_all(b"\n")?;
    sink.flush()?;
    eprint!("{}", report.to_table());
    finish_manifest(&manifest, &args.common.out)?;
    Ok(())
}

fn parse_budget_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<u64>()
                .map_err(|_| Error::validation(format!("invalid token budget `{p}`")))
        })
        .collect()
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let workers = args.common.workers();
    let rule = args.common.token_rule;
    if args.mode != "sweep" && args.mode != "compare" {
        return Err(Error::validation(format!(
            "unknown eval mode `{}` (expected sweep or compare)",
            args.mode
        )));
    }
    let budgets = parse_budget_list(&args.budgets)?;
    let synthetic = args.source.is_none() && args.target.is_none();

    let config = RunConfig {
        subcommand: "eval".into(),
        source: args.source.clone(),
        source_format: args.source_format,
        target: args.target.clone(),
        target_format: args.target_format,
        scored: None,
        codec: args.common.codec,
        token_rule: rule,
        method: Method::Zipfit,
        selection: None,
        seed: Some(args.common.seed),
        workers,
        max_bytes: None,
        debug_per_target: false,
        include_text: false,
        dsir: None,
        out: args.common.out.clone(),
        eval: Some(EvalConfig {
            mode: args.mode.clone(),
            bins: args.bins,
            budget: args.budget_tokens,
            budgets: budgets.clone(),
            order: args.order,
            alpha: args.alpha,
            backoff: args.backoff,
            holdout_fraction: args.holdout,
            synthetic,
        }),
        sweep: None,
        bench_top_k: None,
    };
    let mut manifest = SelectionManifest::from_config(config);

    let t = Instant::now();
    let (source, target) = match (&args.source, &args.target) {
        (None, None) => {
            eprintln!("note: using the shipped synthetic benchmark (seed {})", args.common.seed);
            let bench = synth::benchmark_corpus(args.common.seed, rule);
            (bench.source, bench.target)
        }
        (Some(src), Some(tgt)) => {
            let target = load_target(tgt, args.target_format, rule)?;
            let (source, skipped) = load_all(src, args.source_format, rule)?;
            manifest.skipped_inputs = skipped;
            (source, target)
        }
        _ => {
            return Err(Error::validation(
                "--source and --target must be given together (or both omitted for the synthetic benchmark)",
            ))
        }
    };
    manifest.record_phase("load", t.elapsed());

    let codec = args.common.codec.build()?;
    let opts = EvalOptions {
        order: args.order,
        smoothing: Smoothing {
            alpha: args.alpha,
            backoff: args.backoff,
        },
        workers,
        seed: args.common.seed,
        holdout_fraction: args.holdout,
    };

    let t = Instant::now();
    let report: EvalReport = match args.mode.as_str() {
        "sweep" => alignment_ce_sweep(
            source,
            target,
            args.bins,
            args.budget_tokens,
            codec.as_ref(),
            &opts,
        )?,
        _ => compare_methods(source, target, &budgets, codec.as_ref(), &opts)?,
    };
    manifest.record_phase("eval", t.elapsed());

    let (mut sink, _) = open_sink(&args.common.out, "eval.json")?;
    sink.write_all(report.to_json()?.as_bytes())?;
    sink.write_all(b"\n")?;
    sink.flush()?;
    if let Some(dir) = &args.common.out {
        fs::write(dir.join("eval.txt"), report.to_table())
            .map_err(|e| Error::io_path(dir.join("eval.txt"), e))?;
        if args.csv {
            fs::write(dir.join("eval.csv"), report.to_csv())
                .map_err(|e| Error::io_path(dir.join("eval.csv"), e))?;
        }
    }
    eprint!("{}", report.to_table());
    finish_manifest(&manifest, &args.common.out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn budget_list_parses() {
        assert_eq!(parse_budget_list("10,20, 30").unwrap(), vec![10, 20, 30]);
        assert!(parse_budget_list("10,x").is_err());
    }

    #[test]
    fn method_parser_accepts_known_methods() {
        assert_eq!(parse_method("zipfit").unwrap(), Method::Zipfit);
        assert_eq!(parse_method("dsir").unwrap(), Method::Dsir);
        assert_eq!(parse_method("random").unwrap(), Method::Random);
        assert!(parse_method("d4").is_err());
    }
}
