//! Levenshtein distance with an optional backtraced edit script.
//!
//! Distance-only calls use a rolling pair of rows; the full matrix is kept
//! only when a script is requested, which matters for large corpora.

use serde::{Deserialize, Serialize};

/// One edit operation relating a source position to a target token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditOp {
    Keep,
    Substitute,
    Delete,
    Insert,
}

/// A step of an edit script. `position` is the index in the source sequence
/// the step applies at (for insertions, the gap before that index);
/// `before` is the consumed source element, `after` the produced target
/// element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditStep<T> {
    pub op: EditOp,
    pub position: usize,
    pub before: Option<T>,
    pub after: Option<T>,
}

/// An optimal operation sequence transforming a source sequence into a
/// target sequence. `cost` counts the non-keep steps and equals the
/// Levenshtein distance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditScript<T> {
    pub steps: Vec<EditStep<T>>,
    pub cost: usize,
}

impl<T: Clone> EditScript<T> {
    /// Replay the script against a source sequence.
    pub fn apply(&self, source: &[T]) -> Vec<T> {
        let mut out = Vec::new();
        let mut i = 0;
        for step in &self.steps {
            match step.op {
                EditOp::Keep => {
                    out.push(source[i].clone());
                    i += 1;
                }
                EditOp::Substitute => {
                    out.push(step.after.clone().expect("substitute has a target"));
                    i += 1;
                }
                EditOp::Delete => {
                    i += 1;
                }
                EditOp::Insert => {
                    out.push(step.after.clone().expect("insert has a target"));
                }
            }
        }
        out
    }
}

/// Unit-cost Levenshtein distance between two sequences.
pub fn distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a == b {
        return 0;
    }
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut prev: Vec<usize> = (0..=short.len()).collect();
    let mut curr = vec![0usize; short.len() + 1];
    for (i, lc) in long.iter().enumerate() {
        curr[0] = i + 1;
        for (j, sc) in short.iter().enumerate() {
            curr[j + 1] = if lc == sc {
                prev[j]
            } else {
                1 + prev[j].min(prev[j + 1]).min(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[short.len()]
}

/// Levenshtein distance plus one optimal edit script.
///
/// The backtrace is deterministic: keeps are taken whenever the elements
/// match, and among equally cheap edits a substitution is preferred over a
/// deletion, and a deletion over an insertion.
pub fn distance_with_script<T: PartialEq + Clone>(a: &[T], b: &[T]) -> (usize, EditScript<T>) {
    let m = a.len();
    let n = b.len();
    let mut dp = vec![vec![0usize; n + 1]; m + 1];
    for (i, row) in dp.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=n {
        dp[0][j] = j;
    }
    for i in 1..=m {
        for j in 1..=n {
            dp[i][j] = if a[i - 1] == b[j - 1] {
                dp[i - 1][j - 1]
            } else {
                1 + dp[i - 1][j - 1].min(dp[i - 1][j]).min(dp[i][j - 1])
            };
        }
    }

    let mut steps = Vec::new();
    let (mut i, mut j) = (m, n);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 && a[i - 1] == b[j - 1] && dp[i][j] == dp[i - 1][j - 1] {
            steps.push(EditStep {
                op: EditOp::Keep,
                position: i - 1,
                before: Some(a[i - 1].clone()),
                after: Some(b[j - 1].clone()),
            });
            i -= 1;
            j -= 1;
        } else if i > 0 && j > 0 && dp[i][j] == dp[i - 1][j - 1] + 1 {
            steps.push(EditStep {
                op: EditOp::Substitute,
                position: i - 1,
                before: Some(a[i - 1].clone()),
                after: Some(b[j - 1].clone()),
            });
            i -= 1;
            j -= 1;
        } else if i > 0 && dp[i][j] == dp[i - 1][j] + 1 {
            steps.push(EditStep {
                op: EditOp::Delete,
                position: i - 1,
                before: Some(a[i - 1].clone()),
                after: None,
            });
            i -= 1;
        } else {
            steps.push(EditStep {
                op: EditOp::Insert,
                position: i,
                before: None,
                after: Some(b[j - 1].clone()),
            });
            j -= 1;
        }
    }
    steps.reverse();
    let cost = steps.iter().filter(|s| s.op != EditOp::Keep).count();
    debug_assert_eq!(cost, dp[m][n]);
    (dp[m][n], EditScript { steps, cost })
}
