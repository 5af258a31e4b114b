//! Dataset and prediction ingestion, validation, and corpus statistics.
//!
//! Datasets are line-delimited JSON, one instance per line, so large files
//! stream without whole-file parsing. A prediction file carries a header
//! line naming the model followed by one `{id, prediction}` record per
//! line. Loaded data is immutable and safe to share across evaluation
//! workers.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokenize::{lex, LexerProfile};

/// The three evaluation roles a dataset can serve: revising submitted code
/// before review, revising it against a reviewer comment, or generating the
/// review comment itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Crb,
    Cra,
    Rcg,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Crb => "crb",
            Task::Cra => "cra",
            Task::Rcg => "rcg",
        })
    }
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "crb" => Ok(Task::Crb),
            "cra" => Ok(Task::Cra),
            "rcg" => Ok(Task::Rcg),
            other => Err(Error::InvalidConfig(format!(
                "unknown task {other:?} (expected crb, cra, or rcg)"
            ))),
        }
    }
}

/// One evaluation triple: the submitted code, the accepted revision (or the
/// human-written comment for comment generation), and an optional reviewer
/// comment as extra input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewInstance {
    pub id: String,
    pub submitted_code: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    pub ground_truth: String,
    pub task: Task,
}

/// Raw on-disk record. `task` is optional in the file; when present it must
/// agree with the task the caller asked for.
#[derive(Debug, Deserialize)]
struct DatasetRecord {
    id: String,
    submitted_code: String,
    #[serde(default)]
    comment: Option<String>,
    ground_truth: String,
    #[serde(default)]
    task: Option<Task>,
}

/// A named model's Top-1 predictions keyed by instance id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub model_name: String,
    pub entries: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
struct PredictionHeader {
    model_name: String,
}

#[derive(Debug, Deserialize)]
struct PredictionRecord {
    id: String,
    prediction: String,
}

/// Corpus-level statistics for a loaded dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub n_instances: usize,
    /// Fraction of instances whose ground-truth token set contains at least
    /// one token absent from the submitted code's token set.
    pub new_token_ratio: f64,
    pub mean_tokens_submitted: f64,
    pub mean_tokens_ground_truth: f64,
}

/// Read and validate a dataset from a line-delimited reader. `origin` only
/// labels errors.
pub fn read_dataset<R: BufRead>(
    reader: R,
    task: Task,
    origin: &Path,
) -> Result<Vec<ReviewInstance>> {
    let mut instances = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| Error::Io {
            path: origin.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DatasetRecord =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                path: origin.to_path_buf(),
                line: line_no,
                message: e.to_string(),
            })?;
        if record.id.is_empty() {
            return Err(Error::EmptyField {
                path: origin.to_path_buf(),
                line: line_no,
                id: record.id,
                field: "id",
            });
        }
        if !seen.insert(record.id.clone()) {
            return Err(Error::DuplicateId {
                path: origin.to_path_buf(),
                line: line_no,
                id: record.id,
            });
        }
        if let Some(found) = record.task {
            if found != task {
                return Err(Error::TaskMismatch {
                    path: origin.to_path_buf(),
                    line: line_no,
                    expected: task,
                    found,
                });
            }
        }
        if record.submitted_code.is_empty() {
            return Err(Error::EmptyField {
                path: origin.to_path_buf(),
                line: line_no,
                id: record.id,
                field: "submitted_code",
            });
        }
        if record.ground_truth.is_empty() {
            return Err(Error::EmptyField {
                path: origin.to_path_buf(),
                line: line_no,
                id: record.id,
                field: "ground_truth",
            });
        }
        if task == Task::Cra && record.comment.as_deref().unwrap_or("").is_empty() {
            return Err(Error::MissingComment {
                path: origin.to_path_buf(),
                line: line_no,
                id: record.id,
                task,
            });
        }
        instances.push(ReviewInstance {
            id: record.id,
            submitted_code: record.submitted_code,
            comment: record.comment,
            ground_truth: record.ground_truth,
            task,
        });
    }
    Ok(instances)
}

/// Load and validate a dataset file, in file order.
pub fn load_dataset(path: &Path, task: Task) -> Result<Vec<ReviewInstance>> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_dataset(BufReader::new(file), task, path)
}

/// Serialize instances in the same line-delimited format `load_dataset`
/// reads; `load_dataset . write_dataset` is the identity on validated
/// instances.
pub fn write_dataset<W: Write>(mut writer: W, instances: &[ReviewInstance]) -> Result<()> {
    for instance in instances {
        let line = serde_json::to_string(instance)
            .map_err(|e| Error::InvalidConfig(format!("cannot serialize instance: {e}")))?;
        writeln!(writer, "{line}").map_err(|source| Error::Io {
            path: "<writer>".into(),
            source,
        })?;
    }
    Ok(())
}

pub fn save_dataset(path: &Path, instances: &[ReviewInstance]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_dataset(std::io::BufWriter::new(file), instances)
}

/// Read a prediction set: a header line `{"model_name": ...}` followed by
/// `{"id", "prediction"}` records. An empty file yields an empty set with
/// an empty model name and a warning.
pub fn read_predictions<R: BufRead>(reader: R, origin: &Path) -> Result<PredictionSet> {
    let mut lines = reader.lines().enumerate();
    let header = loop {
        match lines.next() {
            None => {
                log::warn!("{}: empty prediction file", origin.display());
                return Ok(PredictionSet {
                    model_name: String::new(),
                    entries: BTreeMap::new(),
                });
            }
            Some((idx, line)) => {
                let line = line.map_err(|source| Error::Io {
                    path: origin.to_path_buf(),
                    source,
                })?;
                if line.trim().is_empty() {
                    continue;
                }
                break serde_json::from_str::<PredictionHeader>(&line).map_err(|e| {
                    Error::MalformedRecord {
                        path: origin.to_path_buf(),
                        line: idx + 1,
                        message: format!("expected a model_name header: {e}"),
                    }
                })?;
            }
        }
    };
    let mut entries = BTreeMap::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|source| Error::Io {
            path: origin.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: PredictionRecord =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                path: origin.to_path_buf(),
                line: line_no,
                message: e.to_string(),
            })?;
        if entries
            .insert(record.id.clone(), record.prediction)
            .is_some()
        {
            return Err(Error::DuplicateId {
                path: origin.to_path_buf(),
                line: line_no,
                id: record.id,
            });
        }
    }
    if entries.is_empty() {
        log::warn!("{}: prediction file has no records", origin.display());
    }
    Ok(PredictionSet {
        model_name: header.model_name,
        entries,
    })
}

pub fn load_predictions(path: &Path) -> Result<PredictionSet> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_predictions(BufReader::new(file), path)
}

fn token_set(code: &str, profile: &LexerProfile, id: &str) -> Result<HashSet<String>> {
    let seq = lex(code, profile).map_err(|e| Error::InstanceLex {
        id: id.to_string(),
        message: e.to_string(),
    })?;
    Ok(seq.iter().map(|t| t.text.clone()).collect())
}

/// Fraction of instances whose ground truth contains at least one token
/// absent from the submitted code. Token identity is the lexed token text;
/// literals count like any other token.
pub fn new_token_ratio(dataset: &[ReviewInstance], profile: &LexerProfile) -> Result<f64> {
    if dataset.is_empty() {
        return Ok(0.0);
    }
    let mut with_new = 0usize;
    for instance in dataset {
        let submitted = token_set(&instance.submitted_code, profile, &instance.id)?;
        let truth = token_set(&instance.ground_truth, profile, &instance.id)?;
        if truth.iter().any(|t| !submitted.contains(t)) {
            with_new += 1;
        }
    }
    Ok(with_new as f64 / dataset.len() as f64)
}

/// Instance count, new-token ratio, and mean token lengths for a dataset.
pub fn dataset_stats(dataset: &[ReviewInstance], profile: &LexerProfile) -> Result<DatasetStats> {
    let n = dataset.len();
    if n == 0 {
        return Ok(DatasetStats {
            n_instances: 0,
            new_token_ratio: 0.0,
            mean_tokens_submitted: 0.0,
            mean_tokens_ground_truth: 0.0,
        });
    }
    let mut submitted_tokens = 0usize;
    let mut truth_tokens = 0usize;
    for instance in dataset {
        let lex_for = |code: &str| {
            lex(code, profile).map_err(|e| Error::InstanceLex {
                id: instance.id.clone(),
                message: e.to_string(),
            })
        };
        submitted_tokens += lex_for(&instance.submitted_code)?.len();
        truth_tokens += lex_for(&instance.ground_truth)?.len();
    }
    Ok(DatasetStats {
        n_instances: n,
        new_token_ratio: new_token_ratio(dataset, profile)?,
        mean_tokens_submitted: submitted_tokens as f64 / n as f64,
        mean_tokens_ground_truth: truth_tokens as f64 / n as f64,
    })
}
