//! The four evaluation metrics: token-level edit distance with Edit
//! Progress, Exact Match, character-level Normalized Edit Distance, and
//! corpus BLEU.

pub mod bleu;
pub mod edit;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use bleu::{bleu, comment_tokens, pair_counts, score_from_counts, BleuCounts};
pub use edit::{distance, distance_with_script, EditOp, EditScript, EditStep};

use crate::tokenize::TokenSequence;

/// Token-level edit distance between two sequences plus one optimal edit
/// script realizing it. Tokens compare by text only.
pub fn edit_distance(a: &TokenSequence, b: &TokenSequence) -> (usize, EditScript<String>) {
    distance_with_script(&a.texts(), &b.texts())
}

/// Distance-only variant (rolling-array, no script).
pub fn token_edit_distance(a: &TokenSequence, b: &TokenSequence) -> usize {
    distance(&a.texts(), &b.texts())
}

/// An Edit Progress value: a signed percentage, or skipped because the
/// submitted code already equals the ground truth (a zero denominator).
/// Skipped instances are excluded from averages but always counted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpScore {
    Percent(f64),
    Skipped,
}

impl EpScore {
    pub fn as_percent(&self) -> Option<f64> {
        match self {
            EpScore::Percent(p) => Some(*p),
            EpScore::Skipped => None,
        }
    }

    pub fn is_skipped(&self) -> bool {
        matches!(self, EpScore::Skipped)
    }
}

impl Serialize for EpScore {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            EpScore::Percent(p) => serializer.serialize_f64(*p),
            EpScore::Skipped => serializer.serialize_str("skipped"),
        }
    }
}

impl<'de> Deserialize<'de> for EpScore {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(p) => Ok(EpScore::Percent(p)),
            Raw::Text(s) if s == "skipped" => Ok(EpScore::Skipped),
            Raw::Text(s) => Err(D::Error::custom(format!(
                "expected a number or \"skipped\", found {s:?}"
            ))),
        }
    }
}

/// Edit Progress: the relative reduction in token edit distance to the
/// ground truth achieved by the prediction, as a signed percentage.
///
/// 100% means the prediction equals the ground truth, 0% means it is no
/// closer than the submitted code, and negative values mean it moved away.
/// When the submitted code already equals the ground truth the ratio is
/// undefined and the instance is skipped.
pub fn edit_progress(
    submitted: &TokenSequence,
    ground_truth: &TokenSequence,
    prediction: &TokenSequence,
) -> EpScore {
    let baseline = token_edit_distance(submitted, ground_truth);
    if baseline == 0 {
        return EpScore::Skipped;
    }
    let remaining = token_edit_distance(prediction, ground_truth);
    EpScore::Percent((baseline as f64 - remaining as f64) / baseline as f64 * 100.0)
}

/// Exact Match: 1 iff the token text sequences are equal element-wise.
/// Kinds and original spacing never matter.
pub fn exact_match(prediction: &TokenSequence, ground_truth: &TokenSequence) -> u8 {
    let equal = prediction.len() == ground_truth.len()
        && prediction
            .iter()
            .zip(ground_truth)
            .all(|(p, g)| p.text == g.text);
    u8::from(equal)
}

/// Character-level Levenshtein distance divided by the longer string's
/// length; 0 when both strings are empty. Always in [0, 1].
pub fn normalized_edit_distance(x: &str, y: &str) -> f64 {
    let xs: Vec<char> = x.chars().collect();
    let ys: Vec<char> = y.chars().collect();
    let longest = xs.len().max(ys.len());
    if longest == 0 {
        return 0.0;
    }
    distance(&xs, &ys) as f64 / longest as f64
}

/// Per-instance metric values. Fields are present only for metrics that
/// were enabled for the run; BLEU is carried as clipped counts so corpus
/// aggregation stays associative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub instance_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub em: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ep: Option<EpScore>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ned: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bleu: Option<BleuCounts>,
}

impl MetricRow {
    pub fn new(instance_id: impl Into<String>) -> Self {
        MetricRow {
            instance_id: instance_id.into(),
            em: None,
            ep: None,
            ned: None,
            bleu: None,
        }
    }
}
