//! `preflect` runs the pre-processing pipeline (reorder, factorize,
//! compound, integrate) over annotated corpora, stage by stage or end to
//! end, and scores plain or factored corpora. Data goes to stdout,
//! diagnostics to stderr, so output is pipe-safe.

use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use preflect_core::compound::{CompoundRuleSet, PngLexicon};
use preflect_core::corpus::read::{to_jsonl, JsonlReader, PtbConllReader, ReadError};
use preflect_core::corpus::{factored_line, split_unescaped, AnnotatedSentence};
use preflect_core::eval::{bleu, corpus_stats, meteor_lite, MatchMode, SmoothingPolicy};
use preflect_core::factor::PosSimplificationMap;
use preflect_core::pipeline::{process_sentence, ProcessedSentence, Stages};
use preflect_core::reorder::{parse_ruleset, ReorderRuleSet};

#[derive(Parser)]
#[command(name = "preflect", version, about = "Source-side corpus pre-processing toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run reorder -> factorize -> compound -> integrate in one pass.
    Preprocess {
        #[command(flatten)]
        input: InputArgs,
        /// Reordering rule file; omit to skip the reordering stage.
        #[arg(long)]
        reorder: Option<PathBuf>,
        /// Compounding rule file; omit to skip the compounding stage.
        #[arg(long)]
        compound: Option<PathBuf>,
        #[arg(long)]
        png_lexicon: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Factored)]
        out: OutputFormat,
        /// Write the deletion trace as JSONL to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Reorder sentences only.
    Reorder {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        rules: PathBuf,
        #[arg(long, value_enum, default_value_t = ReorderOutput::Plain)]
        out: ReorderOutput,
    },
    /// Factorize sentences only.
    Factor {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = OutputFormat::Factored)]
        out: OutputFormat,
    },
    /// Factorize and compound, without reordering.
    Compound {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        png_lexicon: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Factored)]
        out: OutputFormat,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Score a hypothesis corpus against a reference corpus.
    Score {
        #[command(subcommand)]
        metric: Metric,
    },
    /// Corpus statistics: sentence/token counts and per-factor vocabulary.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Parse rule and lexicon files and report problems.
    ValidateRules {
        #[arg(long)]
        reorder: Option<PathBuf>,
        #[arg(long)]
        compound: Option<PathBuf>,
        #[arg(long)]
        png_lexicon: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Metric {
    /// Modified n-gram precision with a brevity penalty.
    Bleu {
        #[command(flatten)]
        corpora: ScoreArgs,
        #[arg(long, value_enum, default_value_t = SmoothArg::None)]
        smooth: SmoothArg,
    },
    /// Simplified exact-match METEOR.
    Meteor {
        #[command(flatten)]
        corpora: ScoreArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Surface)]
        mode: ModeArg,
    },
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    hyp: PathBuf,
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Score on this factor index of factored input (0-based).
    #[arg(long)]
    factor: Option<usize>,
}

#[derive(Args)]
struct InputArgs {
    /// Input path, `-` for stdin.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Jsonl)]
    format: InputFormat,
    /// CoNLL dependency file (required with --format ptbconll).
    #[arg(long)]
    deps: Option<PathBuf>,
    /// Report bad sentences on stderr and continue instead of aborting.
    #[arg(long)]
    skip_bad: bool,
    /// Worker threads; the PREFLECT_WORKERS env var overrides this.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    Jsonl,
    Ptbconll,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Factored,
    Plain,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReorderOutput {
    Plain,
    Jsonl,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SmoothArg {
    None,
    Add1,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Surface,
    Lemma,
}

/// Config problems exit 2, data problems exit 1.
enum CliError {
    Config(String),
    Data(String),
}

impl CliError {
    fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
    fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(CliError::Config(msg)) => {
            eprintln!("preflect: {msg}");
            2
        }
        Err(CliError::Data(msg)) => {
            eprintln!("preflect: {msg}");
            1
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Preprocess {
            input,
            reorder,
            compound,
            png_lexicon,
            out,
            trace,
        } => {
            let reorder = reorder.as_deref().map(load_reorder_rules).transpose()?;
            let compound = compound.as_deref().map(load_compound_rules).transpose()?;
            let png = load_png_lexicon(png_lexicon.as_deref())?;
            run_pipeline(
                &input,
                reorder.as_ref(),
                compound.as_ref(),
                &png,
                Emit::Tokens(out),
                trace.as_deref(),
            )
        }
        Command::Reorder { input, rules, out } => {
            let rules = load_reorder_rules(&rules)?;
            let emit = match out {
                ReorderOutput::Plain => Emit::Tokens(OutputFormat::Plain),
                ReorderOutput::Jsonl => Emit::ReorderedJsonl,
            };
            run_pipeline(&input, Some(&rules), None, &PngLexicon::default(), emit, None)
        }
        Command::Factor { input, out } => run_pipeline(
            &input,
            None,
            None,
            &PngLexicon::default(),
            Emit::Tokens(out),
            None,
        ),
        Command::Compound {
            input,
            rules,
            png_lexicon,
            out,
            trace,
        } => {
            let rules = load_compound_rules(&rules)?;
            let png = load_png_lexicon(png_lexicon.as_deref())?;
            run_pipeline(
                &input,
                None,
                Some(&rules),
                &png,
                Emit::Tokens(out),
                trace.as_deref(),
            )
        }
        Command::Score { metric } => score(metric),
        Command::Stats { input } => stats(&input),
        Command::ValidateRules {
            reorder,
            compound,
            png_lexicon,
        } => validate_rules(reorder.as_deref(), compound.as_deref(), png_lexicon.as_deref()),
    }
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))
}

fn load_reorder_rules(path: &Path) -> Result<ReorderRuleSet, CliError> {
    let text = read_to_string(path)?;
    let mut rules = parse_ruleset(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    rules.source_path = Some(path.to_path_buf());
    Ok(rules)
}

fn load_compound_rules(path: &Path) -> Result<CompoundRuleSet, CliError> {
    let text = read_to_string(path)?;
    CompoundRuleSet::parse(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn load_png_lexicon(path: Option<&Path>) -> Result<PngLexicon, CliError> {
    match path {
        None => Ok(PngLexicon::default()),
        Some(p) => {
            let text = read_to_string(p)?;
            PngLexicon::parse(&text).map_err(|e| CliError::config(format!("{}: {e}", p.display())))
        }
    }
}

fn open_reader(path: &Path) -> Result<Box<dyn BufRead>, CliError> {
    if path == Path::new("-") {
        Ok(Box::new(BufReader::new(io::stdin())))
    } else {
        let file = File::open(path)
            .map_err(|e| CliError::config(format!("cannot open {}: {e}", path.display())))?;
        Ok(Box::new(BufReader::new(file)))
    }
}

fn sentence_reader(
    input: &InputArgs,
) -> Result<Box<dyn Iterator<Item = Result<AnnotatedSentence, ReadError>>>, CliError> {
    match input.format {
        InputFormat::Jsonl => {
            if input.deps.is_some() {
                return Err(CliError::config("--deps only applies to --format ptbconll"));
            }
            Ok(Box::new(JsonlReader::new(open_reader(&input.input)?)))
        }
        InputFormat::Ptbconll => {
            let deps = input
                .deps
                .as_ref()
                .ok_or_else(|| CliError::config("--format ptbconll requires --deps"))?;
            Ok(Box::new(PtbConllReader::new(
                open_reader(&input.input)?,
                open_reader(deps)?,
            )))
        }
    }
}

fn worker_count(input: &InputArgs) -> Result<usize, CliError> {
    let n = match std::env::var("PREFLECT_WORKERS") {
        Ok(value) => value
            .parse::<usize>()
            .map_err(|_| CliError::config(format!("bad PREFLECT_WORKERS value {value:?}")))?,
        Err(_) => input.workers,
    };
    if n == 0 {
        return Err(CliError::config("worker count must be at least 1"));
    }
    Ok(n)
}

enum Emit {
    Tokens(OutputFormat),
    ReorderedJsonl,
}

#[derive(Default)]
struct Summary {
    sentences_in: usize,
    sentences_out: usize,
    skipped: usize,
    tokens_in: usize,
    tokens_out: usize,
    rules_fired: usize,
    deletions: usize,
    unknown_pos: usize,
    png_fallbacks: usize,
}

const CHUNK: usize = 512;

fn run_pipeline(
    input: &InputArgs,
    reorder: Option<&ReorderRuleSet>,
    compound: Option<&CompoundRuleSet>,
    png: &PngLexicon,
    emit: Emit,
    trace: Option<&Path>,
) -> Result<(), CliError> {
    let workers = worker_count(input)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::config(format!("cannot start worker pool: {e}")))?;
    let pos_map = PosSimplificationMap::default();
    let stages = Stages {
        reorder,
        compound,
        pos_map: &pos_map,
        png,
    };
    let mut reader = sentence_reader(input)?;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let mut trace_out = trace
        .map(|p| {
            File::create(p)
                .map(BufWriter::new)
                .map_err(|e| CliError::config(format!("cannot create {}: {e}", p.display())))
        })
        .transpose()?;
    let mut summary = Summary::default();

    loop {
        let mut batch = Vec::with_capacity(CHUNK);
        for record in reader.by_ref().take(CHUNK) {
            match record {
                Ok(sentence) => batch.push(sentence),
                Err(e) => {
                    summary.sentences_in += 1;
                    if input.skip_bad {
                        summary.skipped += 1;
                        eprintln!("preflect: skipping: {e}");
                    } else {
                        return Err(CliError::data(e.to_string()));
                    }
                }
            }
        }
        if batch.is_empty() {
            break;
        }
        use rayon::prelude::*;
        let results: Vec<_> = pool.install(|| {
            batch
                .par_iter()
                .map(|sentence| process_sentence(sentence, &stages))
                .collect()
        });
        for (sentence, result) in batch.iter().zip(results) {
            summary.sentences_in += 1;
            summary.tokens_in += sentence.len();
            let processed = match result {
                Ok(p) => p,
                Err(e) => {
                    if input.skip_bad {
                        summary.skipped += 1;
                        eprintln!("preflect: skipping sentence {}: {e}", sentence.id);
                        continue;
                    }
                    return Err(CliError::data(format!("sentence {}: {e}", sentence.id)));
                }
            };
            emit_sentence(&mut out, &emit, &processed)
                .map_err(|e| CliError::data(format!("write error: {e}")))?;
            if let Some(t) = trace_out.as_mut() {
                write_trace(t, &processed).map_err(|e| CliError::data(format!("trace: {e}")))?;
            }
            summary.sentences_out += 1;
            summary.tokens_out += processed.factored.len();
            summary.rules_fired += processed.rules_fired;
            summary.deletions += processed.deletions.len();
            summary.unknown_pos += processed.unknown_pos;
            summary.png_fallbacks += processed.png_fallbacks;
        }
    }
    out.flush()
        .map_err(|e| CliError::data(format!("write error: {e}")))?;
    if let Some(mut t) = trace_out {
        t.flush().map_err(|e| CliError::data(format!("trace: {e}")))?;
    }
    eprintln!(
        "preflect: sentences={} emitted={} skipped={} tokens_in={} tokens_out={} \
         rules_fired={} deletions={} unknown_pos={} png_fallbacks={}",
        summary.sentences_in,
        summary.sentences_out,
        summary.skipped,
        summary.tokens_in,
        summary.tokens_out,
        summary.rules_fired,
        summary.deletions,
        summary.unknown_pos,
        summary.png_fallbacks,
    );
    Ok(())
}

fn emit_sentence(
    out: &mut impl Write,
    emit: &Emit,
    processed: &ProcessedSentence,
) -> io::Result<()> {
    match emit {
        Emit::Tokens(OutputFormat::Factored) => {
            writeln!(out, "{}", factored_line(&processed.factored))
        }
        Emit::Tokens(OutputFormat::Plain) => writeln!(out, "{}", processed.surfaces.join(" ")),
        Emit::ReorderedJsonl => writeln!(out, "{}", to_jsonl(&processed.reordered)),
    }
}

fn write_trace(out: &mut impl Write, processed: &ProcessedSentence) -> io::Result<()> {
    for d in &processed.deletions {
        let record = serde_json::json!({
            "sentence": processed.id,
            "original_index": d.deleted,
            "target_index": d.target,
            "atom": d.atom,
            "rule": d.rule_id,
        });
        writeln!(out, "{record}")?;
    }
    Ok(())
}

fn read_corpus(path: &Path, factor: Option<usize>) -> Result<Vec<Vec<String>>, CliError> {
    let reader = open_reader(path)?;
    let mut corpus = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let mut tokens = Vec::new();
        for tok in line.split_whitespace() {
            let value = match factor {
                None => tok.to_string(),
                Some(k) => {
                    let factors = split_unescaped(tok, '|');
                    factors
                        .get(k)
                        .ok_or_else(|| {
                            CliError::data(format!(
                                "{}:{}: token {tok:?} has no factor {k}",
                                path.display(),
                                i + 1
                            ))
                        })?
                        .clone()
                }
            };
            tokens.push(value);
        }
        corpus.push(tokens);
    }
    Ok(corpus)
}

fn score(metric: Metric) -> Result<(), CliError> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match metric {
        Metric::Bleu { corpora, smooth } => {
            let hyp = read_corpus(&corpora.hyp, corpora.factor)?;
            let reference = read_corpus(&corpora.reference, corpora.factor)?;
            let smoothing = match smooth {
                SmoothArg::None => SmoothingPolicy::None,
                SmoothArg::Add1 => SmoothingPolicy::Add1,
            };
            let report =
                bleu(&hyp, &reference, 4, smoothing).map_err(|e| CliError::data(e.to_string()))?;
            writeln!(out, "metric: bleu").unwrap();
            writeln!(out, "smoothing: {}", report.smoothing).unwrap();
            writeln!(out, "segments: {}", hyp.len()).unwrap();
            writeln!(
                out,
                "hyp_len: {} ref_len: {}",
                report.hyp_length, report.ref_length
            )
            .unwrap();
            for n in 1..=4 {
                let c = report.per_n[n - 1];
                writeln!(
                    out,
                    "p{n}: {}/{} = {:.10} (x100: {:.2})",
                    c.matched,
                    c.total,
                    report.precision(n),
                    report.precision(n) * 100.0
                )
                .unwrap();
            }
            writeln!(out, "bp: {:.10}", report.brevity_penalty).unwrap();
            writeln!(
                out,
                "bleu: {:.10} (x100: {:.2})",
                report.cumulative,
                report.cumulative * 100.0
            )
            .unwrap();
        }
        Metric::Meteor { corpora, mode } => {
            let hyp = read_corpus(&corpora.hyp, corpora.factor)?;
            let reference = read_corpus(&corpora.reference, corpora.factor)?;
            let mode = match mode {
                ModeArg::Surface => MatchMode::Surface,
                ModeArg::Lemma => MatchMode::Lemma,
            };
            let report =
                meteor_lite(&hyp, &reference, mode).map_err(|e| CliError::data(e.to_string()))?;
            writeln!(out, "metric: meteor-lite").unwrap();
            writeln!(out, "mode: {}", report.match_mode).unwrap();
            writeln!(out, "segments: {}", hyp.len()).unwrap();
            writeln!(
                out,
                "hyp_len: {} ref_len: {}",
                report.hyp_length, report.ref_length
            )
            .unwrap();
            writeln!(out, "matches: {} chunks: {}", report.matches, report.chunks).unwrap();
            writeln!(
                out,
                "precision: {:.10} recall: {:.10} f_mean: {:.10}",
                report.precision, report.recall, report.f_mean
            )
            .unwrap();
            writeln!(out, "penalty: {:.10}", report.fragmentation_penalty).unwrap();
            writeln!(
                out,
                "score: {:.10} (x100: {:.2})",
                report.score,
                report.score * 100.0
            )
            .unwrap();
        }
    }
    out.flush().map_err(|e| CliError::data(e.to_string()))?;
    Ok(())
}

fn stats(path: &Path) -> Result<(), CliError> {
    let reader = open_reader(path)?;
    let mut corpus = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let sentence: Vec<Vec<String>> = line
            .split_whitespace()
            .map(|tok| split_unescaped(tok, '|'))
            .collect();
        corpus.push(sentence);
    }
    let stats = corpus_stats(corpus);
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    writeln!(out, "sentences: {}", stats.sentences).unwrap();
    writeln!(out, "tokens: {}", stats.tokens).unwrap();
    writeln!(out, "mean_length: {:.4}", stats.mean_length).unwrap();
    for (k, size) in stats.vocab_per_factor.iter().enumerate() {
        writeln!(out, "vocab_factor_{k}: {size}").unwrap();
    }
    out.flush().map_err(|e| CliError::data(e.to_string()))?;
    Ok(())
}

fn validate_rules(
    reorder: Option<&Path>,
    compound: Option<&Path>,
    png: Option<&Path>,
) -> Result<(), CliError> {
    if reorder.is_none() && compound.is_none() && png.is_none() {
        return Err(CliError::config(
            "nothing to validate: pass --reorder, --compound, or --png-lexicon",
        ));
    }
    if let Some(path) = reorder {
        let rules = load_reorder_rules(path)?;
        println!("reorder rules {}: ok ({} rules)", path.display(), rules.rules.len());
    }
    if let Some(path) = compound {
        let rules = load_compound_rules(path)?;
        println!("compound rules {}: ok ({} rules)", path.display(), rules.rules.len());
    }
    if let Some(path) = png {
        load_png_lexicon(Some(path))?;
        println!("png lexicon {}: ok", path.display());
    }
    Ok(())
}
