//! Corpus-level BLEU-4 for generated review comments.
//!
//! Precision counts are clipped per instance and summed over the corpus, so
//! per-instance counts can be folded associatively (and in parallel) before
//! the final score. Precisions for n >= 2 get add-one smoothing; the
//! brevity penalty follows the standard exp(1 - ref/pred) form.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_NGRAM: usize = 4;

/// Clipped n-gram matches and totals contributed by one prediction/reference
/// pair (or summed over many).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BleuCounts {
    /// Clipped matches for n = 1..=4.
    pub clipped: [u64; MAX_NGRAM],
    /// Candidate n-gram totals for n = 1..=4.
    pub totals: [u64; MAX_NGRAM],
    pub prediction_len: u64,
    pub reference_len: u64,
}

impl BleuCounts {
    /// Fold another contribution into this one. Associative and commutative.
    pub fn merge(&mut self, other: &BleuCounts) {
        for n in 0..MAX_NGRAM {
            self.clipped[n] += other.clipped[n];
            self.totals[n] += other.totals[n];
        }
        self.prediction_len += other.prediction_len;
        self.reference_len += other.reference_len;
    }
}

/// Tokenize a natural-language comment on whitespace and punctuation
/// boundaries: alphanumeric runs (underscores included) are words, every
/// other non-whitespace character is its own token.
pub fn comment_tokens(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() || c == '_' {
            word.push(c);
        } else {
            if !word.is_empty() {
                tokens.push(std::mem::take(&mut word));
            }
            if !c.is_whitespace() {
                tokens.push(c.to_string());
            }
        }
    }
    if !word.is_empty() {
        tokens.push(word);
    }
    tokens
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped counts for one prediction/reference token pair.
pub fn pair_counts(prediction: &[String], reference: &[String]) -> BleuCounts {
    let mut counts = BleuCounts {
        prediction_len: prediction.len() as u64,
        reference_len: reference.len() as u64,
        ..BleuCounts::default()
    };
    for n in 1..=MAX_NGRAM {
        let pred = ngram_counts(prediction, n);
        let reference = ngram_counts(reference, n);
        let mut clipped = 0;
        let mut total = 0;
        for (gram, count) in pred {
            total += count;
            clipped += count.min(reference.get(gram).copied().unwrap_or(0));
        }
        counts.clipped[n - 1] = clipped;
        counts.totals[n - 1] = total;
    }
    counts
}

/// Corpus BLEU-4 in [0, 1] from accumulated counts.
pub fn score_from_counts(counts: &BleuCounts) -> f64 {
    if counts.totals[0] == 0 || counts.clipped[0] == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 0..MAX_NGRAM {
        let (clipped, total) = if n == 0 {
            (counts.clipped[0] as f64, counts.totals[0] as f64)
        } else {
            // Add-one smoothing for the higher-order precisions.
            (
                counts.clipped[n] as f64 + 1.0,
                counts.totals[n] as f64 + 1.0,
            )
        };
        log_sum += (clipped / total).ln();
    }
    let brevity = if counts.prediction_len >= counts.reference_len {
        1.0
    } else {
        (1.0 - counts.reference_len as f64 / counts.prediction_len as f64).exp()
    };
    brevity * (log_sum / MAX_NGRAM as f64).exp()
}

/// Corpus BLEU-4 over paired prediction and reference texts.
pub fn bleu(predictions: &[String], references: &[String]) -> Result<f64> {
    if predictions.len() != references.len() {
        return Err(Error::LengthMismatch {
            predictions: predictions.len(),
            references: references.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::LengthMismatch {
            predictions: 0,
            references: 0,
        });
    }
    let mut total = BleuCounts::default();
    for (p, r) in predictions.iter().zip(references) {
        total.merge(&pair_counts(&comment_tokens(p), &comment_tokens(r)));
    }
    Ok(score_from_counts(&total))
}
