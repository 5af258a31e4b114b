//! Aggregation of metric rows into model summaries, cross-dataset averages,
//! relative improvements, metric-dependent rankings, interrogative-comment
//! subsets, and progress-score histograms.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::{ReviewInstance, Task};
use crate::error::{Error, Result};
use crate::metrics::{score_from_counts, BleuCounts, MetricRow};

/// Per-model aggregate over one dataset (or, via
/// [`average_across_datasets`], over several).
///
/// Percentages keep full precision internally; rounding happens only at
/// display time via [`round_display`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model_name: String,
    pub n_instances: usize,
    /// Mean Exact Match over all rows, as a percentage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub em_pct: Option<f64>,
    /// Mean Edit Progress over the non-skipped rows, as a percentage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ep_pct: Option<f64>,
    /// Rows whose Edit Progress was skipped (submitted code already equal
    /// to the ground truth). Excluded from the mean, always counted.
    pub ep_skipped: usize,
    /// Corpus BLEU as a percentage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bleu_pct: Option<f64>,
    /// Mean normalized edit distance, as a fraction in [0, 1].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_ned: Option<f64>,
}

/// Round a percentage for display to one decimal, half away from zero,
/// matching how results tables are conventionally printed.
pub fn round_display(value: f64) -> f64 {
    (value * 10.0).round() / 10.0
}

/// Aggregate per-instance rows for one model over one dataset.
pub fn aggregate(model_name: &str, rows: &[MetricRow]) -> Result<ModelSummary> {
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    let em_values: Vec<f64> = rows.iter().filter_map(|r| r.em.map(f64::from)).collect();
    let em_pct = mean(&em_values).map(|m| m * 100.0);

    let ep_values: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.ep.as_ref().and_then(|e| e.as_percent()))
        .collect();
    let ep_skipped = rows
        .iter()
        .filter(|r| r.ep.as_ref().is_some_and(|e| e.is_skipped()))
        .count();
    let ep_present = rows.iter().any(|r| r.ep.is_some());
    let ep_pct = if ep_present { mean(&ep_values) } else { None };

    let ned_values: Vec<f64> = rows.iter().filter_map(|r| r.ned).collect();
    let mean_ned = mean(&ned_values);

    let bleu_pct = rows
        .iter()
        .filter_map(|r| r.bleu.as_ref())
        .fold(None::<BleuCounts>, |acc, c| {
            let mut total = acc.unwrap_or_default();
            total.merge(c);
            Some(total)
        })
        .map(|total| score_from_counts(&total) * 100.0);

    Ok(ModelSummary {
        model_name: model_name.to_string(),
        n_instances: rows.len(),
        em_pct,
        ep_pct,
        ep_skipped,
        bleu_pct,
        mean_ned,
    })
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

fn mean_of_present(values: Vec<Option<f64>>) -> Option<f64> {
    let present: Vec<f64> = values.into_iter().flatten().collect();
    mean(&present)
}

/// Unweighted mean of per-dataset summaries -- the "Average" column of a
/// results table. Instance and skipped counts are summed.
pub fn average_across_datasets(
    model_name: &str,
    summaries: &[ModelSummary],
) -> Result<ModelSummary> {
    if summaries.is_empty() {
        return Err(Error::EmptyRows);
    }
    Ok(ModelSummary {
        model_name: model_name.to_string(),
        n_instances: summaries.iter().map(|s| s.n_instances).sum(),
        em_pct: mean_of_present(summaries.iter().map(|s| s.em_pct).collect()),
        ep_pct: mean_of_present(summaries.iter().map(|s| s.ep_pct).collect()),
        ep_skipped: summaries.iter().map(|s| s.ep_skipped).sum(),
        bleu_pct: mean_of_present(summaries.iter().map(|s| s.bleu_pct).collect()),
        mean_ned: mean_of_present(summaries.iter().map(|s| s.mean_ned).collect()),
    })
}

/// Relative improvement of a new score over an old score, in percent.
pub fn relative_improvement(new_score: f64, old_score: f64) -> Result<f64> {
    if old_score == 0.0 {
        return Err(Error::UndefinedImprovement);
    }
    Ok((new_score - old_score) / old_score * 100.0)
}

/// Model orderings under Exact Match and under Edit Progress for one task,
/// with a per-rank agreement flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingComparison {
    pub task: Task,
    pub em_order: Vec<String>,
    pub ep_order: Vec<String>,
    /// `agreement[k]` is true when both orderings put the same model at
    /// rank k.
    pub agreement: Vec<bool>,
}

fn ranked_names(
    summaries: &[ModelSummary],
    key: impl Fn(&ModelSummary) -> Option<f64>,
) -> Vec<String> {
    let mut order: Vec<&ModelSummary> = summaries.iter().collect();
    // Descending by score; models without the metric sort last; ties break
    // on the model name so the ordering is deterministic.
    order.sort_by(|a, b| {
        let ka = key(a).unwrap_or(f64::NEG_INFINITY);
        let kb = key(b).unwrap_or(f64::NEG_INFINITY);
        kb.partial_cmp(&ka)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.model_name.cmp(&b.model_name))
    });
    order.into_iter().map(|s| s.model_name.clone()).collect()
}

/// Rank models by mean EM and by mean EP and flag where the two orderings
/// agree.
pub fn compare_rankings(summaries: &[ModelSummary], task: Task) -> RankingComparison {
    let em_order = ranked_names(summaries, |s| s.em_pct);
    let ep_order = ranked_names(summaries, |s| s.ep_pct);
    let agreement = em_order
        .iter()
        .zip(&ep_order)
        .map(|(a, b)| a == b)
        .collect();
    RankingComparison {
        task,
        em_order,
        ep_order,
        agreement,
    }
}

/// The question words the interrogative classifier looks for.
///
/// The default list holds the interrogative pronouns plus "does". Bare
/// auxiliaries ("is", "did", "could", ...) are deliberately not defaults:
/// they appear in declarative review comments ("whatever you did here is
/// fine") far too often. [`QuestionWords::with_auxiliaries`] opts into the
/// wider list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionWords {
    words: BTreeSet<String>,
}

impl QuestionWords {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(words: I) -> Self {
        QuestionWords {
            words: words.into_iter().map(|w| w.into().to_lowercase()).collect(),
        }
    }

    /// Wider list that additionally treats bare auxiliaries as question
    /// words.
    pub fn with_auxiliaries() -> Self {
        QuestionWords::new([
            "what", "which", "where", "when", "why", "how", "who", "do", "does", "did", "is",
            "are", "can", "could", "should", "would",
        ])
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(|w| w.as_str())
    }

    fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }
}

impl Default for QuestionWords {
    fn default() -> Self {
        QuestionWords::new([
            "what", "which", "where", "when", "why", "how", "who", "does",
        ])
    }
}

/// True iff the lowercased comment contains a configured question word on a
/// word boundary, or ends with a question mark. Word boundaries split on
/// anything non-alphanumeric, so "whatever" never matches "what".
pub fn is_interrogative(comment: &str, config: &QuestionWords) -> bool {
    let trimmed = comment.trim_end();
    if trimmed.ends_with('?') {
        return true;
    }
    comment
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .any(|word| !word.is_empty() && config.contains(word))
}

/// Partition a dataset by whether its comment is interrogative. Instances
/// with no comment go to the non-interrogative side with a warning.
pub fn split_by_interrogative<'a>(
    dataset: &'a [ReviewInstance],
    config: &QuestionWords,
) -> (Vec<&'a ReviewInstance>, Vec<&'a ReviewInstance>) {
    let mut with = Vec::new();
    let mut without = Vec::new();
    for instance in dataset {
        match &instance.comment {
            Some(comment) if is_interrogative(comment, config) => with.push(instance),
            Some(_) => without.push(instance),
            None => {
                log::warn!(
                    "instance {:?} has no comment; routed to the non-interrogative subset",
                    instance.id
                );
                without.push(instance);
            }
        }
    }
    (with, without)
}

/// Histogram layout: fixed-width bins from `floor` up to 100 (the maximum
/// attainable Edit Progress); values below `floor` are counted but omitted
/// from the bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    /// Bin width in percentage points.
    pub bin_width: f64,
    /// Values below this floor are tallied separately instead of binned.
    pub floor: f64,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        HistogramSpec {
            bin_width: 10.0,
            floor: -50.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: u64,
}

/// Binned Edit Progress values for one model. Bin counts plus the omitted
/// count always equal the number of scored rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBins {
    pub bins: Vec<HistogramBin>,
    pub omitted_below_floor: u64,
    /// Scored (non-skipped) rows that entered the histogram.
    pub total: u64,
}

/// Bucket the Edit Progress values of `rows` per `spec`. Skipped rows do
/// not enter the histogram.
pub fn histogram(rows: &[MetricRow], spec: &HistogramSpec) -> Result<HistogramBins> {
    if !(spec.bin_width > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "histogram bin width must be positive, got {}",
            spec.bin_width
        )));
    }
    if !spec.floor.is_finite() || spec.floor > 100.0 {
        return Err(Error::InvalidConfig(format!(
            "histogram floor must be finite and at most 100, got {}",
            spec.floor
        )));
    }
    let n_bins = ((100.0 - spec.floor) / spec.bin_width).floor() as usize + 1;
    let mut bins: Vec<HistogramBin> = (0..n_bins)
        .map(|i| HistogramBin {
            lower: spec.floor + i as f64 * spec.bin_width,
            upper: spec.floor + (i + 1) as f64 * spec.bin_width,
            count: 0,
        })
        .collect();
    let mut omitted = 0u64;
    let mut total = 0u64;
    for value in rows
        .iter()
        .filter_map(|r| r.ep.as_ref().and_then(|e| e.as_percent()))
    {
        total += 1;
        if value < spec.floor {
            omitted += 1;
            continue;
        }
        let idx = (((value - spec.floor) / spec.bin_width).floor() as usize).min(n_bins - 1);
        bins[idx].count += 1;
    }
    Ok(HistogramBins {
        bins,
        omitted_below_floor: omitted,
        total,
    })
}
