//! Command implementations for the `ckece` binary.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use flate2::read::MultiGzDecoder;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use ckece::corpus::{build_examples, load_dialogues, CorpusRecord};
use ckece::extractor::{ConceptSeparator, ExtractorConfig};
use ckece::knowledge::{ingest_conceptnet, IngestOptions};
use ckece::metrics::{
    corpus_perplexity, distinct_n, emotion_accuracy, GenerationRecord, MetricsReport,
};
use ckece::{
    extract_concepts, Keyword, KnowledgeStore, ScoredTuple, StopwordSet, VadLexicon, VectorStore,
};

#[derive(Debug, Parser)]
#[command(
    name = "ckece",
    version,
    about = "Commonsense and emotional concept extraction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a binary knowledge store from a ConceptNet assertions dump.
    Ingest(IngestArgs),
    /// Extract concept strings for dialogue contexts (JSON lines in and out).
    Extract(ExtractArgs),
    /// Turn an EmpatheticDialogues split into encoder/decoder records.
    ProcessCorpus(CorpusArgs),
    /// Evaluation metrics over generation records.
    #[command(subcommand)]
    Eval(EvalCommand),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "en")]
    pub lang: String,
    #[arg(long)]
    pub output: PathBuf,
    /// Fail on the first malformed line.
    #[arg(long)]
    pub strict: bool,
    /// Input is gzip-compressed (also inferred from a `.gz` suffix).
    #[arg(long)]
    pub gzip: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Separator {
    Semicolon,
    Comma,
}

#[derive(Debug, Args)]
pub struct ResourceArgs {
    /// Store written by `ingest`.
    #[arg(long)]
    pub store: Option<PathBuf>,
    #[arg(long)]
    pub vad: Option<PathBuf>,
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    /// Vector dimension; read from the file when omitted.
    #[arg(long)]
    pub dim: Option<usize>,
    /// One stop word per line; the bundled English list otherwise.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Tuples kept per context.
    #[arg(long, default_value_t = 10)]
    pub max_tuples: usize,
    #[arg(long, default_value_t = 3)]
    pub tuples_per_keyword: usize,
    #[arg(long, default_value_t = 10)]
    pub max_keywords: usize,
    #[arg(long, value_enum, default_value_t = Separator::Semicolon)]
    pub separator: Separator,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub workers: u16,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub resources: ResourceArgs,
    /// JSON lines with a `context` array of turns.
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[command(flatten)]
    pub resources: ResourceArgs,
    #[arg(long)]
    pub dataset_dir: PathBuf,
    /// Split name; reads `<dataset-dir>/<split>.csv`.
    #[arg(long, default_value = "train")]
    pub split: String,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Distinct-n over `response_text`.
    Distinct {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Emotion accuracy over `predicted_emotion` / `gold_emotion`.
    Accuracy {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Token-weighted perplexity over `token_logprobs`.
    Ppl {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Every metric the records support.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(args) => cmd_ingest(&args),
        Command::Extract(args) => cmd_extract(&args),
        Command::ProcessCorpus(args) => cmd_process_corpus(&args),
        Command::Eval(cmd) => cmd_eval(&cmd),
    }
}

fn open(path: &Path, gzip: bool) -> Result<Box<dyn BufRead>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let gz = gzip || path.extension().is_some_and(|e| e == "gz");
    let reader: Box<dyn Read> = if gz {
        Box::new(MultiGzDecoder::new(file))
    } else {
        Box::new(file)
    };
    Ok(Box::new(BufReader::with_capacity(1 << 20, reader)))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Peak resident set size in KiB, where the platform reports it.
pub fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find_map(|l| l.strip_prefix("VmHWM:"))
        .and_then(|v| v.trim().trim_end_matches("kB").trim().parse().ok())
}

pub fn cmd_ingest(args: &IngestArgs) -> Result<()> {
    let started = Instant::now();
    let options = IngestOptions {
        language: args.lang.clone(),
        strict: args.strict,
    };
    let (store, report) = ingest_conceptnet(open(&args.input, args.gzip)?, &options)
        .with_context(|| format!("ingesting {}", args.input.display()))?;
    let mut out = BufWriter::new(
        File::create(&args.output)
            .with_context(|| format!("cannot create {}", args.output.display()))?,
    );
    store.save(&mut out)?;
    out.flush()?;
    if report.malformed > 0 {
        log::warn!(
            "skipped {} malformed lines (first at line {})",
            report.malformed,
            report.first_malformed.unwrap_or(0)
        );
    }
    println!("lines {}", report.lines);
    println!("assertions {}", report.assertions);
    println!("concepts {}", report.concepts);
    println!("other_language {}", report.other_language);
    println!("malformed {}", report.malformed);
    println!("missing_weight {}", report.missing_weight);
    println!("elapsed_seconds {:.3}", started.elapsed().as_secs_f64());
    if let Some(kib) = peak_rss_kib() {
        println!("peak_rss_kib {kib}");
    }
    Ok(())
}

struct Resources {
    store: KnowledgeStore,
    lexicon: VadLexicon,
    vectors: VectorStore,
    stopwords: StopwordSet,
    config: ExtractorConfig,
}

fn vector_dimension(path: &Path) -> Result<usize> {
    let mut first = String::new();
    for line in open(path, false)?.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            first = line;
            break;
        }
    }
    let parts: Vec<&str> = first.split_whitespace().collect();
    match parts.as_slice() {
        [count, dim] if count.parse::<u64>().is_ok() => Ok(dim.parse()?),
        [_, rest @ ..] if !rest.is_empty() => Ok(rest.len()),
        _ => bail!("cannot infer vector dimension from {}", path.display()),
    }
}

impl ResourceArgs {
    fn config(&self) -> Result<ExtractorConfig> {
        let config = ExtractorConfig {
            alpha: self.alpha,
            tuples_per_keyword: self.tuples_per_keyword,
            tuples_per_context: self.max_tuples,
            max_keywords: self.max_keywords,
            separator: match self.separator {
                Separator::Semicolon => ConceptSeparator::Semicolon,
                Separator::Comma => ConceptSeparator::Comma,
            },
            ..ExtractorConfig::default()
        };
        config.validate()?;
        Ok(config)
    }

    fn any(&self) -> bool {
        self.store.is_some() || self.vad.is_some() || self.vectors.is_some()
    }

    fn load(&self) -> Result<Resources> {
        let (Some(store), Some(vad), Some(vectors)) = (&self.store, &self.vad, &self.vectors)
        else {
            bail!("--store, --vad and --vectors are all required");
        };
        let config = self.config()?;
        let store = KnowledgeStore::load(open(store, false)?)
            .with_context(|| format!("loading store {}", store.display()))?;
        let lexicon = VadLexicon::from_reader(open(vad, false)?)
            .with_context(|| format!("loading {}", vad.display()))?;
        let dim = match self.dim {
            Some(d) => d,
            None => vector_dimension(vectors)?,
        };
        let vectors = VectorStore::from_reader(open(vectors, false)?, dim)
            .with_context(|| format!("loading {}", vectors.display()))?;
        let stopwords = match &self.stopwords {
            Some(p) => StopwordSet::from_reader(open(p, false)?)
                .with_context(|| format!("loading {}", p.display()))?,
            None => StopwordSet::bundled(),
        };
        log::info!(
            "loaded {} assertions, {} lexicon entries, {} vectors",
            store.assertion_count(),
            lexicon.len(),
            vectors.len()
        );
        Ok(Resources {
            store,
            lexicon,
            vectors,
            stopwords,
            config,
        })
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers as usize)
            .build()?)
    }
}

#[derive(Debug, Deserialize)]
struct ContextRecord {
    context: Vec<String>,
}

#[derive(Debug, Serialize)]
struct ExtractRecord<'a> {
    keywords: &'a [Keyword],
    tuples: &'a [ScoredTuple],
    rendered: &'a str,
}

pub fn cmd_extract(args: &ExtractArgs) -> Result<()> {
    let res = args.resources.load()?;
    let mut contexts = Vec::new();
    for (i, line) in open(&args.input, false)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ContextRecord =
            serde_json::from_str(&line).with_context(|| format!("input line {}", i + 1))?;
        contexts.push(rec.context.join(" "));
    }

    let lines: Vec<String> = args.resources.pool()?.install(|| {
        contexts
            .par_iter()
            .map(|ctx| {
                let e = extract_concepts(
                    ctx,
                    &res.store,
                    &res.lexicon,
                    &res.vectors,
                    &res.stopwords,
                    &res.config,
                );
                serde_json::to_string(&ExtractRecord {
                    keywords: &e.keywords,
                    tuples: &e.concepts.tuples,
                    rendered: &e.concepts.rendered,
                })
                .expect("records serialize")
            })
            .collect()
    });
    let mut out = sink(args.output.as_deref())?;
    for l in &lines {
        writeln!(out, "{l}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn cmd_process_corpus(args: &CorpusArgs) -> Result<()> {
    let path = args.dataset_dir.join(format!("{}.csv", args.split));
    let dialogues = load_dialogues(open(&path, false)?)
        .with_context(|| format!("reading {}", path.display()))?;
    let examples: Vec<_> = dialogues.iter().flat_map(build_examples).collect();
    let res = if args.resources.any() {
        Some(args.resources.load()?)
    } else {
        log::info!("no knowledge resources given; concept strings left empty");
        None
    };

    let lines: Vec<String> = args.resources.pool()?.install(|| {
        examples
            .par_iter()
            .map(|ex| {
                let concepts = match &res {
                    Some(r) => {
                        extract_concepts(
                            &ex.context.join(" "),
                            &r.store,
                            &r.lexicon,
                            &r.vectors,
                            &r.stopwords,
                            &r.config,
                        )
                        .concepts
                        .rendered
                    }
                    None => String::new(),
                };
                serde_json::to_string(&CorpusRecord::new(ex, concepts)).expect("records serialize")
            })
            .collect()
    });
    let mut out = sink(args.output.as_deref())?;
    for l in &lines {
        writeln!(out, "{l}")?;
    }
    out.flush()?;
    log::info!("{} dialogues, {} examples", dialogues.len(), lines.len());
    Ok(())
}

fn read_records(path: &Path) -> Result<Vec<GenerationRecord>> {
    let mut out = Vec::new();
    for (i, line) in open(path, false)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .with_context(|| format!("{} line {}", path.display(), i + 1))?,
        );
    }
    Ok(out)
}

/// Rounded to 1e-9 so that e.g. 4.000000000000001 prints as 4.0.
fn tidy(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

fn emit(pairs: &[(String, f64)], format: Format) -> Result<()> {
    let mut out = io::stdout().lock();
    match format {
        Format::Text => {
            for (k, v) in pairs {
                writeln!(out, "{k} {:?}", tidy(*v))?;
            }
        }
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> = pairs
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::json!(tidy(*v))))
                .collect();
            writeln!(out, "{}", serde_json::Value::Object(map))?;
        }
    }
    Ok(())
}

pub fn cmd_eval(cmd: &EvalCommand) -> Result<()> {
    match cmd {
        EvalCommand::Distinct { input, n, format } => {
            let recs = read_records(input)?;
            let texts: Vec<&str> = recs.iter().map(|r| r.response_text.as_str()).collect();
            let d = distinct_n(&texts, *n as usize)?;
            emit(
                &[
                    (format!("distinct_{n}"), d),
                    (format!("distinct_{n}_percent"), d * 100.0),
                ],
                *format,
            )
        }
        EvalCommand::Accuracy { input, format } => {
            let recs = read_records(input)?;
            let mut preds = Vec::new();
            let mut golds = Vec::new();
            for (i, r) in recs.iter().enumerate() {
                match (&r.predicted_emotion, &r.gold_emotion) {
                    (Some(p), Some(g)) => {
                        preds.push(p.as_str());
                        golds.push(g.as_str());
                    }
                    _ => bail!("record {} lacks predicted_emotion or gold_emotion", i + 1),
                }
            }
            let acc = emotion_accuracy(&preds, &golds)?;
            emit(&[("emotion_accuracy".into(), acc)], *format)
        }
        EvalCommand::Ppl { input, format } => {
            let recs = read_records(input)?;
            let lps: Vec<&[f64]> = recs
                .iter()
                .filter_map(|r| r.token_logprobs.as_deref())
                .collect();
            let ppl = corpus_perplexity(&lps)?;
            emit(&[("perplexity".into(), ppl)], *format)
        }
        EvalCommand::Report { input, format } => {
            let recs = read_records(input)?;
            let r = MetricsReport::from_records(&recs)?;
            let mut pairs = vec![("records".to_string(), r.records as f64)];
            for (name, v) in [("distinct_1", r.distinct_1), ("distinct_2", r.distinct_2)] {
                if let Some(v) = v {
                    pairs.push((name.into(), v));
                    pairs.push((format!("{name}_percent"), v * 100.0));
                }
            }
            if let Some(v) = r.emotion_accuracy {
                pairs.push(("emotion_accuracy".into(), v));
            }
            if let Some(v) = r.perplexity {
                pairs.push(("perplexity".into(), v));
            }
            emit(&pairs, *format)
        }
    }
}
