//! Evaluation runs: configuration, the evaluate driver, report files, and
//! the derived exports (ranking comparison, histogram, dataset stats).
//!
//! A report embeds the full run configuration and a content hash of every
//! input file, and all collections serialize in a canonical order, so a
//! fixed dataset, prediction set, and configuration always produce byte-
//! identical output regardless of worker scheduling.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    aggregate, compare_rankings, histogram, HistogramSpec, ModelSummary, RankingComparison,
};
use crate::corpus::{
    dataset_stats, load_dataset, load_predictions, DatasetStats, PredictionSet, ReviewInstance,
    Task,
};
use crate::error::{Error, Result};
use crate::metrics::{
    comment_tokens, edit_progress, exact_match, normalized_edit_distance, pair_counts, MetricRow,
};
use crate::tokenize::{lex, LexerProfile, TokenSequence};

/// Which metrics an evaluation run computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Em,
    Ep,
    Ned,
    Bleu,
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::Em => "em",
            MetricKind::Ep => "ep",
            MetricKind::Ned => "ned",
            MetricKind::Bleu => "bleu",
        })
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "em" => Ok(MetricKind::Em),
            "ep" => Ok(MetricKind::Ep),
            "ned" => Ok(MetricKind::Ned),
            "bleu" => Ok(MetricKind::Bleu),
            other => Err(Error::InvalidConfig(format!(
                "unknown metric {other:?} (expected em, ep, ned, or bleu)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Report,
    Table,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "report" => Ok(OutputFormat::Report),
            "table" => Ok(OutputFormat::Table),
            other => Err(Error::InvalidConfig(format!(
                "unknown format {other:?} (expected report or table)"
            ))),
        }
    }
}

/// Missing predictions are never scored; they are excluded from every mean
/// and reported with their ids.
pub const EP_SKIP_POLICY: &str = "exclude-and-count";

/// Everything needed to reproduce an evaluation run. Serialized into every
/// report for provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub task: Task,
    pub dataset: PathBuf,
    pub predictions: Vec<PathBuf>,
    pub metrics: BTreeSet<MetricKind>,
    pub lexer_profile: String,
    pub drop_comments: bool,
    pub strict_lexing: bool,
    /// Fixed policy for instances whose submitted code equals the ground
    /// truth (Edit Progress denominator zero).
    pub ep_skip_policy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram: Option<HistogramSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    /// Reserved for sampled diagnostics; evaluation itself is
    /// deterministic and never draws from it.
    pub seed: u64,
}

impl RunConfig {
    /// A config with the default metric set for the task: EM and EP for the
    /// code-revision tasks, EM and BLEU for comment generation.
    pub fn new(task: Task, dataset: impl Into<PathBuf>, predictions: Vec<PathBuf>) -> Self {
        let metrics = match task {
            Task::Crb | Task::Cra => BTreeSet::from([MetricKind::Em, MetricKind::Ep]),
            Task::Rcg => BTreeSet::from([MetricKind::Em, MetricKind::Bleu]),
        };
        RunConfig {
            task,
            dataset: dataset.into(),
            predictions,
            metrics,
            lexer_profile: "java".into(),
            drop_comments: false,
            strict_lexing: false,
            ep_skip_policy: EP_SKIP_POLICY.into(),
            histogram: None,
            out: None,
            format: OutputFormat::Report,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.metrics.is_empty() {
            return Err(Error::InvalidConfig("no metrics enabled".into()));
        }
        if self.predictions.is_empty() {
            return Err(Error::InvalidConfig("no prediction files given".into()));
        }
        if self.lexer_profile != "java" {
            return Err(Error::InvalidConfig(format!(
                "unknown lexer profile {:?} (only \"java\" is available)",
                self.lexer_profile
            )));
        }
        if self.task == Task::Rcg && self.metrics.contains(&MetricKind::Ep) {
            return Err(Error::InvalidConfig(
                "edit progress needs an initial version to improve on; comment generation has \
                 none (drop `ep` from --metrics)"
                    .into(),
            ));
        }
        Ok(())
    }

    fn profile(&self) -> LexerProfile {
        LexerProfile::java()
            .with_drop_comments(self.drop_comments)
            .with_strict(self.strict_lexing)
    }
}

/// Path plus SHA-256 of the file contents at evaluation time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileFingerprint {
    pub path: String,
    pub sha256: String,
}

pub fn fingerprint(path: &Path) -> Result<FileFingerprint> {
    let mut file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(FileFingerprint {
        path: path.display().to_string(),
        sha256: hex::encode(hasher.finalize()),
    })
}

/// Results for one model: per-instance rows in instance-id order, the
/// aggregate summary, and the accounting of dataset instances the model
/// supplied no prediction for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model_name: String,
    pub predictions_file: FileFingerprint,
    pub evaluated: usize,
    pub missing: usize,
    pub missing_ids: Vec<String>,
    pub summary: ModelSummary,
    pub rows: Vec<MetricRow>,
}

/// A full evaluation run: configuration, input fingerprints, per-model
/// results, and the ranking comparison when at least two models took part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub config: RunConfig,
    pub dataset_file: FileFingerprint,
    pub dataset_instances: usize,
    pub models: Vec<ModelReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranking: Option<RankingComparison>,
}

struct LexedInstance<'a> {
    instance: &'a ReviewInstance,
    submitted: Option<TokenSequence>,
    ground_truth: Option<TokenSequence>,
}

fn lex_for_instance(code: &str, profile: &LexerProfile, id: &str) -> Result<TokenSequence> {
    lex(code, profile).map_err(|e| Error::InstanceLex {
        id: id.to_string(),
        message: e.to_string(),
    })
}

fn score_instance(
    config: &RunConfig,
    profile: &LexerProfile,
    lexed: &LexedInstance<'_>,
    prediction: &str,
) -> Result<MetricRow> {
    let instance = lexed.instance;
    let mut row = MetricRow::new(instance.id.clone());
    let prediction_tokens = if lexed.ground_truth.is_some() {
        Some(lex_for_instance(prediction, profile, &instance.id)?)
    } else {
        None
    };
    if config.metrics.contains(&MetricKind::Em) {
        let truth = lexed.ground_truth.as_ref().expect("lexed for em");
        row.em = Some(exact_match(prediction_tokens.as_ref().unwrap(), truth));
    }
    if config.metrics.contains(&MetricKind::Ep) {
        let submitted = lexed.submitted.as_ref().expect("lexed for ep");
        let truth = lexed.ground_truth.as_ref().expect("lexed for ep");
        row.ep = Some(edit_progress(
            submitted,
            truth,
            prediction_tokens.as_ref().unwrap(),
        ));
    }
    if config.metrics.contains(&MetricKind::Ned) {
        row.ned = Some(normalized_edit_distance(prediction, &instance.ground_truth));
    }
    if config.metrics.contains(&MetricKind::Bleu) {
        row.bleu = Some(pair_counts(
            &comment_tokens(prediction),
            &comment_tokens(&instance.ground_truth),
        ));
    }
    Ok(row)
}

fn evaluate_model(
    config: &RunConfig,
    profile: &LexerProfile,
    lexed: &[LexedInstance<'_>],
    predictions: &PredictionSet,
    predictions_file: FileFingerprint,
) -> Result<ModelReport> {
    let known: BTreeSet<&str> = lexed.iter().map(|l| l.instance.id.as_str()).collect();
    let orphans: Vec<String> = predictions
        .entries
        .keys()
        .filter(|id| !known.contains(id.as_str()))
        .cloned()
        .collect();
    if !orphans.is_empty() {
        return Err(Error::OrphanPredictions { ids: orphans });
    }

    let mut rows: Vec<MetricRow> = lexed
        .par_iter()
        .filter_map(|l| {
            predictions
                .entries
                .get(&l.instance.id)
                .map(|prediction| score_instance(config, profile, l, prediction))
        })
        .collect::<Result<_>>()?;
    rows.sort_unstable_by(|a, b| a.instance_id.cmp(&b.instance_id));

    let missing_ids: Vec<String> = lexed
        .iter()
        .filter(|l| !predictions.entries.contains_key(&l.instance.id))
        .map(|l| l.instance.id.clone())
        .collect();
    if !missing_ids.is_empty() {
        log::warn!(
            "model {:?}: {} dataset instance(s) have no prediction and are excluded",
            predictions.model_name,
            missing_ids.len()
        );
    }

    let summary = if rows.is_empty() {
        ModelSummary {
            model_name: predictions.model_name.clone(),
            n_instances: 0,
            em_pct: None,
            ep_pct: None,
            ep_skipped: 0,
            bleu_pct: None,
            mean_ned: None,
        }
    } else {
        aggregate(&predictions.model_name, &rows)?
    };

    Ok(ModelReport {
        model_name: predictions.model_name.clone(),
        predictions_file,
        evaluated: rows.len(),
        missing: missing_ids.len(),
        missing_ids,
        summary,
        rows,
    })
}

/// Run a full evaluation: load and validate the inputs, score every
/// instance that has a prediction, aggregate per model, and rank models
/// when two or more took part. Deterministic for fixed inputs.
pub fn evaluate(config: &RunConfig) -> Result<EvaluationReport> {
    config.validate()?;
    let profile = config.profile();

    let instances = load_dataset(&config.dataset, config.task)?;
    let dataset_file = fingerprint(&config.dataset)?;

    let needs_tokens =
        config.metrics.contains(&MetricKind::Em) || config.metrics.contains(&MetricKind::Ep);
    let needs_submitted = config.metrics.contains(&MetricKind::Ep);
    let lexed: Vec<LexedInstance<'_>> = instances
        .par_iter()
        .map(|instance| {
            let submitted = if needs_submitted {
                Some(lex_for_instance(
                    &instance.submitted_code,
                    &profile,
                    &instance.id,
                )?)
            } else {
                None
            };
            let ground_truth = if needs_tokens {
                Some(lex_for_instance(
                    &instance.ground_truth,
                    &profile,
                    &instance.id,
                )?)
            } else {
                None
            };
            Ok(LexedInstance {
                instance,
                submitted,
                ground_truth,
            })
        })
        .collect::<Result<_>>()?;

    let mut models = Vec::with_capacity(config.predictions.len());
    for path in &config.predictions {
        let predictions = load_predictions(path)?;
        let file = fingerprint(path)?;
        models.push(evaluate_model(
            config,
            &profile,
            &lexed,
            &predictions,
            file,
        )?);
    }
    models.sort_by(|a, b| a.model_name.cmp(&b.model_name));

    let ranking = if models.len() >= 2 {
        let summaries: Vec<ModelSummary> = models.iter().map(|m| m.summary.clone()).collect();
        Some(compare_rankings(&summaries, config.task))
    } else {
        None
    };

    Ok(EvaluationReport {
        config: config.clone(),
        dataset_file,
        dataset_instances: instances.len(),
        models,
        ranking,
    })
}

/// Serialize a report in the requested format: pretty JSON, or the flat
/// per-instance CSV table.
pub fn render_report(report: &EvaluationReport, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Report => {
            let mut json = serde_json::to_string_pretty(report)
                .map_err(|e| Error::InvalidConfig(format!("cannot serialize report: {e}")))?;
            json.push('\n');
            Ok(json)
        }
        OutputFormat::Table => rows_table(report),
    }
}

fn csv_to_string(writer: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::InvalidConfig(format!("cannot flush csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidConfig(format!("csv not utf-8: {e}")))
}

fn rows_table(report: &EvaluationReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["model", "instance_id", "em", "ep", "ned"];
    header.extend([
        "bleu_clip_1",
        "bleu_clip_2",
        "bleu_clip_3",
        "bleu_clip_4",
        "bleu_total_1",
        "bleu_total_2",
        "bleu_total_3",
        "bleu_total_4",
        "prediction_len",
        "reference_len",
    ]);
    w.write_record(&header)
        .map_err(|e| Error::InvalidConfig(format!("csv: {e}")))?;
    for model in &report.models {
        for row in &model.rows {
            let mut record = vec![
                model.model_name.clone(),
                row.instance_id.clone(),
                row.em.map(|v| v.to_string()).unwrap_or_default(),
                match &row.ep {
                    Some(ep) => ep
                        .as_percent()
                        .map(|p| p.to_string())
                        .unwrap_or_else(|| "skipped".into()),
                    None => String::new(),
                },
                row.ned.map(|v| v.to_string()).unwrap_or_default(),
            ];
            if let Some(bleu) = &row.bleu {
                record.extend(bleu.clipped.iter().map(|v| v.to_string()));
                record.extend(bleu.totals.iter().map(|v| v.to_string()));
                record.push(bleu.prediction_len.to_string());
                record.push(bleu.reference_len.to_string());
            } else {
                record.extend(std::iter::repeat(String::new()).take(10));
            }
            w.write_record(&record)
                .map_err(|e| Error::InvalidConfig(format!("csv: {e}")))?;
        }
    }
    csv_to_string(w)
}

/// Read back a JSON report produced by [`render_report`].
pub fn load_report(path: &Path) -> Result<EvaluationReport> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_reader(std::io::BufReader::new(file)).map_err(|e| Error::MalformedRecord {
        path: path.to_path_buf(),
        line: 0,
        message: format!("not a report file: {e}"),
    })
}

/// Merge the model summaries of several reports over the same task and
/// dataset into one ranking comparison.
pub fn compare_reports(reports: &[EvaluationReport]) -> Result<RankingComparison> {
    if reports.len() < 2 {
        return Err(Error::InvalidConfig(
            "need at least two reports to compare".into(),
        ));
    }
    let first = &reports[0];
    for other in &reports[1..] {
        if other.config.task != first.config.task {
            return Err(Error::FingerprintMismatch {
                message: format!("task {} vs {}", first.config.task, other.config.task),
            });
        }
        if other.dataset_file.sha256 != first.dataset_file.sha256 {
            return Err(Error::FingerprintMismatch {
                message: format!(
                    "dataset hash {} vs {}",
                    first.dataset_file.sha256, other.dataset_file.sha256
                ),
            });
        }
    }
    let mut seen = BTreeSet::new();
    let mut summaries = Vec::new();
    for report in reports {
        for model in &report.models {
            if !seen.insert(model.model_name.clone()) {
                return Err(Error::InvalidConfig(format!(
                    "model {:?} appears in more than one report",
                    model.model_name
                )));
            }
            summaries.push(model.summary.clone());
        }
    }
    Ok(compare_rankings(&summaries, first.config.task))
}

/// Dataset statistics bundled with the input fingerprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub task: Task,
    pub dataset_file: FileFingerprint,
    pub stats: DatasetStats,
}

pub fn stats_report(dataset: &Path, task: Task, profile: &LexerProfile) -> Result<StatsReport> {
    let instances = load_dataset(dataset, task)?;
    Ok(StatsReport {
        task,
        dataset_file: fingerprint(dataset)?,
        stats: dataset_stats(&instances, profile)?,
    })
}

/// Flatten per-model Edit Progress histograms into plot-ready CSV rows
/// (`model,bin_lower,bin_upper,count`). The values below the floor appear
/// as one final `-inf` row per model.
pub fn histogram_export(report: &EvaluationReport, spec: &HistogramSpec) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["model", "bin_lower", "bin_upper", "count"])
        .map_err(|e| Error::InvalidConfig(format!("csv: {e}")))?;
    for model in &report.models {
        let bins = histogram(&model.rows, spec)?;
        for bin in &bins.bins {
            w.write_record([
                model.model_name.as_str(),
                &bin.lower.to_string(),
                &bin.upper.to_string(),
                &bin.count.to_string(),
            ])
            .map_err(|e| Error::InvalidConfig(format!("csv: {e}")))?;
        }
        w.write_record([
            model.model_name.as_str(),
            "-inf",
            &spec.floor.to_string(),
            &bins.omitted_below_floor.to_string(),
        ])
        .map_err(|e| Error::InvalidConfig(format!("csv: {e}")))?;
    }
    csv_to_string(w)
}
