//! Command-line surface for the evaluation toolkit.
//!
//! Exit codes: 0 on success, 1 for validation errors (bad inputs, bad
//! flags), 2 for internal errors. Worker count is taken from the
//! `ACR_EVAL_WORKERS` environment variable; output ordering is canonical
//! regardless of scheduling. No network access.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use acr_eval::report::{fingerprint, EP_SKIP_POLICY};
use acr_eval::tokenize::abstraction;
use acr_eval::{
    compare_reports, evaluate, histogram_export, load_report, render_report, stats_report,
    AbstractionMap, BpeModel, Error, HistogramSpec, LexerProfile, MetricKind, OutputFormat,
    RunConfig, Task, TokenSequence,
};

#[derive(Parser)]
#[command(
    name = "acr-eval",
    version,
    about = "Evaluate generated code revisions and review comments against ground truth"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score prediction files against a dataset and write a report.
    Evaluate(EvaluateArgs),
    /// Corpus statistics for a dataset (instance count, new-token ratio).
    Stats(StatsArgs),
    /// Lex, abstract, or BPE-split code from a file or stdin.
    Tokenize(TokenizeArgs),
    /// Merge evaluation reports over the same dataset into one ranking.
    Compare(CompareArgs),
    /// Export a plot-ready Edit Progress histogram from a report.
    Histogram(HistogramArgs),
}

#[derive(Args)]
struct EvaluateArgs {
    /// Task the dataset serves: crb, cra, or rcg.
    #[arg(long)]
    task: Task,
    /// Dataset file (one JSON record per line).
    #[arg(long)]
    dataset: PathBuf,
    /// One prediction file per model (header line with model_name, then
    /// id/prediction records).
    #[arg(long, required = true, num_args = 1..)]
    predictions: Vec<PathBuf>,
    /// Comma-separated metrics: em,ep,ned,bleu. Defaults to em,ep for code
    /// revision tasks and em,bleu for comment generation.
    #[arg(long, value_delimiter = ',')]
    metrics: Vec<MetricKind>,
    /// Lexer profile (only "java").
    #[arg(long, default_value = "java")]
    lexer_profile: String,
    /// Drop comment tokens while lexing.
    #[arg(long)]
    drop_comments: bool,
    /// Fail on unterminated literals instead of recovering.
    #[arg(long)]
    strict_lexing: bool,
    /// Histogram bin width in percentage points (recorded in the config).
    #[arg(long)]
    bin_width: Option<f64>,
    /// Histogram floor in percentage points (recorded in the config).
    #[arg(long, allow_negative_numbers = true)]
    floor: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// report (JSON) or table (per-instance CSV).
    #[arg(long, default_value = "report")]
    format: OutputFormat,
    /// Seed recorded for any sampled diagnostics.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    task: Task,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "java")]
    lexer_profile: String,
    #[arg(long)]
    drop_comments: bool,
    #[arg(long)]
    strict_lexing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TokenizeArgs {
    /// Code file to tokenize; stdin when omitted.
    file: Option<PathBuf>,
    /// lex, abstract, or bpe.
    #[arg(long, default_value = "lex")]
    mode: TokenizeMode,
    /// BPE merge-list file. With --merges, it is trained on the input and
    /// written here first; otherwise it must already exist.
    #[arg(long)]
    bpe_model: Option<PathBuf>,
    /// Train this many merges on the input before splitting it.
    #[arg(long)]
    merges: Option<usize>,
    #[arg(long)]
    drop_comments: bool,
    #[arg(long)]
    strict_lexing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum TokenizeMode {
    Lex,
    Abstract,
    Bpe,
}

#[derive(Args)]
struct CompareArgs {
    /// Two or more report files produced by `evaluate --format report`.
    #[arg(required = true, num_args = 2..)]
    reports: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HistogramArgs {
    /// Report file produced by `evaluate --format report`.
    report: PathBuf,
    /// Bin width in percentage points.
    #[arg(long, default_value_t = 10.0)]
    bin_width: f64,
    /// Scores below this floor are counted but not binned.
    #[arg(long, default_value_t = -50.0, allow_negative_numbers = true)]
    floor: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    if let Ok(workers) = std::env::var("ACR_EVAL_WORKERS") {
        match workers.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                {
                    eprintln!("error: cannot size worker pool: {e}");
                    std::process::exit(2);
                }
            }
            _ => {
                eprintln!("error: ACR_EVAL_WORKERS must be a positive integer, got {workers:?}");
                std::process::exit(1);
            }
        }
    }

    let result = match cli.command {
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Tokenize(args) => cmd_tokenize(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Histogram(args) => cmd_histogram(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn write_output(out: Option<&Path>, contents: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, contents).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{contents}");
            std::io::stdout().flush().map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), Error> {
    let mut config = RunConfig::new(args.task, args.dataset, args.predictions);
    if !args.metrics.is_empty() {
        config.metrics = args.metrics.into_iter().collect();
    }
    config.lexer_profile = args.lexer_profile;
    config.drop_comments = args.drop_comments;
    config.strict_lexing = args.strict_lexing;
    config.ep_skip_policy = EP_SKIP_POLICY.into();
    if args.bin_width.is_some() || args.floor.is_some() {
        let defaults = HistogramSpec::default();
        config.histogram = Some(HistogramSpec {
            bin_width: args.bin_width.unwrap_or(defaults.bin_width),
            floor: args.floor.unwrap_or(defaults.floor),
        });
    }
    config.out = args.out.clone();
    config.format = args.format;
    config.seed = args.seed;

    let report = evaluate(&config)?;
    for model in &report.models {
        if model.missing > 0 {
            eprintln!(
                "note: model {:?}: {} of {} instances had no prediction (excluded from means)",
                model.model_name, model.missing, report.dataset_instances
            );
        }
    }
    let rendered = render_report(&report, config.format)?;
    write_output(args.out.as_deref(), &rendered)
}

fn profile_for(name: &str, drop_comments: bool, strict: bool) -> Result<LexerProfile, Error> {
    if name != "java" {
        return Err(Error::InvalidConfig(format!(
            "unknown lexer profile {name:?} (only \"java\" is available)"
        )));
    }
    Ok(LexerProfile::java()
        .with_drop_comments(drop_comments)
        .with_strict(strict))
}

fn cmd_stats(args: StatsArgs) -> Result<(), Error> {
    let profile = profile_for(&args.lexer_profile, args.drop_comments, args.strict_lexing)?;
    let report = stats_report(&args.dataset, args.task, &profile)?;
    let mut json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::InvalidConfig(format!("cannot serialize stats: {e}")))?;
    json.push('\n');
    write_output(args.out.as_deref(), &json)
}

/// Escape a token for one-token-per-line output (comments and recovered
/// literals can contain newlines and tabs).
fn escape_token(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out
}

fn cmd_tokenize(args: TokenizeArgs) -> Result<(), Error> {
    let code = match &args.file {
        Some(path) => std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?,
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|source| Error::Io {
                    path: "<stdin>".into(),
                    source,
                })?;
            buf
        }
    };
    let profile = profile_for("java", args.drop_comments, args.strict_lexing)?;
    let seq = acr_eval::lex(&code, &profile)?;

    let lines: Vec<String> = match args.mode {
        TokenizeMode::Lex => seq.iter().map(|t| escape_token(&t.text)).collect(),
        TokenizeMode::Abstract => {
            let (abstracted, _) = abstraction::abstract_code(&seq, &AbstractionMap::new());
            abstracted.iter().map(|t| escape_token(&t.text)).collect()
        }
        TokenizeMode::Bpe => {
            let model = bpe_model_for(&args, &seq)?;
            model.apply(&seq).iter().map(|s| escape_token(s)).collect()
        }
    };
    let mut rendered = lines.join("\n");
    if !rendered.is_empty() {
        rendered.push('\n');
    }
    write_output(args.out.as_deref(), &rendered)
}

fn bpe_model_for(args: &TokenizeArgs, input: &TokenSequence) -> Result<BpeModel, Error> {
    let Some(model_path) = &args.bpe_model else {
        return Err(Error::InvalidConfig(
            "--mode bpe needs --bpe-model (add --merges <n> to train one on the input)".into(),
        ));
    };
    match args.merges {
        Some(n) => {
            let model = BpeModel::train(std::slice::from_ref(input), n)?;
            model.save(model_path)?;
            Ok(model)
        }
        None => BpeModel::load(model_path),
    }
}

fn cmd_compare(args: CompareArgs) -> Result<(), Error> {
    let reports = args
        .reports
        .iter()
        .map(|p| load_report(p))
        .collect::<Result<Vec<_>, _>>()?;
    let ranking = compare_reports(&reports)?;
    #[derive(serde::Serialize)]
    struct CompareReport<'a> {
        dataset_sha256: &'a str,
        sources: Vec<String>,
        ranking: &'a acr_eval::RankingComparison,
    }
    let out = CompareReport {
        dataset_sha256: &reports[0].dataset_file.sha256,
        sources: args
            .reports
            .iter()
            .map(|p| fingerprint(p).map(|f| f.sha256))
            .collect::<Result<_, _>>()?,
        ranking: &ranking,
    };
    let mut json = serde_json::to_string_pretty(&out)
        .map_err(|e| Error::InvalidConfig(format!("cannot serialize comparison: {e}")))?;
    json.push('\n');
    write_output(args.out.as_deref(), &json)
}

fn cmd_histogram(args: HistogramArgs) -> Result<(), Error> {
    let report = load_report(&args.report)?;
    let spec = HistogramSpec {
        bin_width: args.bin_width,
        floor: args.floor,
    };
    let csv = histogram_export(&report, &spec)?;
    write_output(args.out.as_deref(), &csv)
}
