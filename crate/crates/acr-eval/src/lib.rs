//! Evaluation toolkit for generation-based code review automation.
//!
//! Given triples of submitted code, reviewer-accepted ground truth, and a
//! model's prediction, the crate computes Exact Match, Edit Progress
//! (relative token-edit reduction toward the ground truth), character-level
//! Normalized Edit Distance, and corpus BLEU, along with the preprocessing
//! strategies such models use (identifier abstraction and byte-pair
//! encoding), corpus statistics, and table-style aggregation.
//!
//! Modules:
//! - [`corpus`]: dataset/prediction ingestion, validation, statistics
//! - [`tokenize`]: the Java-profile lexer, abstraction, and BPE
//! - [`metrics`]: edit distance with scripts, EM, EP, NED, BLEU
//! - [`analysis`]: aggregation, rankings, interrogative subsets, histograms
//! - [`report`]: evaluation runs, report files, and exports

pub mod analysis;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod report;
pub mod tokenize;

pub use analysis::{
    aggregate, average_across_datasets, compare_rankings, histogram, is_interrogative,
    relative_improvement, round_display, split_by_interrogative, HistogramBin, HistogramBins,
    HistogramSpec, ModelSummary, QuestionWords, RankingComparison,
};
pub use corpus::{
    dataset_stats, load_dataset, load_predictions, new_token_ratio, DatasetStats, PredictionSet,
    ReviewInstance, Task,
};
pub use error::{Error, Result};
pub use metrics::{
    bleu, comment_tokens, edit_distance, edit_progress, exact_match, normalized_edit_distance,
    token_edit_distance, EpScore, MetricRow,
};
pub use report::{
    compare_reports, evaluate, histogram_export, load_report, render_report, stats_report,
    EvaluationReport, MetricKind, OutputFormat, RunConfig, StatsReport,
};
pub use tokenize::{
    abstract_code, char_sequence, deabstract, lex, AbstractionMap, BpeModel, LexerProfile, Token,
    TokenKind, TokenSequence,
};
