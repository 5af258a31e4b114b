//! Byte-pair-encoding subtokenizer.
//!
//! Training greedily merges the most frequent adjacent symbol pair over the
//! corpus; ties break on the lexicographically smaller pair so that a fixed
//! corpus and merge count always produce the same merge list. Every token
//! starts as its characters plus a standalone end-of-token marker, so any
//! token is representable and the concatenation of a token's subtokens is
//! always the token itself.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tokenize::lexer::TokenSequence;

/// Marker appended to each token's symbol sequence before merging. It is a
/// separate symbol, never part of the token text, and is stripped from the
/// emitted subtokens.
pub const END_OF_TOKEN: &str = "</w>";

/// An ordered list of learned merges plus the subtoken vocabulary they
/// generate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpeModel {
    merges: Vec<(String, String)>,
    vocabulary: BTreeSet<String>,
    ranks: HashMap<(String, String), usize>,
}

impl BpeModel {
    fn from_merges(merges: Vec<(String, String)>, base_symbols: BTreeSet<String>) -> Self {
        let mut vocabulary = base_symbols;
        vocabulary.insert(END_OF_TOKEN.to_string());
        for (left, right) in &merges {
            vocabulary.insert(format!("{left}{right}"));
        }
        let ranks = merges
            .iter()
            .enumerate()
            .map(|(i, pair)| (pair.clone(), i))
            .collect();
        BpeModel {
            merges,
            vocabulary,
            ranks,
        }
    }

    /// Learn `num_merges` merges from the token sequences of a corpus.
    ///
    /// Errors if the corpus contains no tokens at all. Fewer merges than
    /// requested are returned when the corpus runs out of adjacent pairs.
    pub fn train(corpus: &[TokenSequence], num_merges: usize) -> Result<Self> {
        let mut word_freq: HashMap<Vec<String>, u64> = HashMap::new();
        let mut base_symbols = BTreeSet::new();
        for seq in corpus {
            for token in seq {
                let mut symbols: Vec<String> = token.text.chars().map(|c| c.to_string()).collect();
                for s in &symbols {
                    base_symbols.insert(s.clone());
                }
                symbols.push(END_OF_TOKEN.to_string());
                *word_freq.entry(symbols).or_insert(0) += 1;
            }
        }
        if word_freq.is_empty() {
            return Err(Error::EmptyCorpus);
        }

        let mut merges = Vec::with_capacity(num_merges);
        for _ in 0..num_merges {
            let mut pair_counts: HashMap<(&str, &str), u64> = HashMap::new();
            for (word, freq) in &word_freq {
                for pair in word.windows(2) {
                    *pair_counts
                        .entry((pair[0].as_str(), pair[1].as_str()))
                        .or_insert(0) += freq;
                }
            }
            // Highest count wins; ties go to the lexicographically smaller pair.
            let Some((&best, _)) = pair_counts
                .iter()
                .max_by(|(pa, ca), (pb, cb)| ca.cmp(cb).then_with(|| pb.cmp(pa)))
            else {
                break;
            };
            let best = (best.0.to_string(), best.1.to_string());
            word_freq = word_freq
                .into_iter()
                .map(|(word, freq)| (merge_word(&word, &best), freq))
                .collect();
            merges.push(best);
        }
        Ok(BpeModel::from_merges(merges, base_symbols))
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn vocabulary(&self) -> &BTreeSet<String> {
        &self.vocabulary
    }

    /// Split a single token into subtokens. Their concatenation equals the
    /// token; a token with no applicable merges falls back to characters.
    pub fn apply_token(&self, token: &str) -> Vec<String> {
        if token.is_empty() {
            return Vec::new();
        }
        let mut symbols: Vec<String> = token.chars().map(|c| c.to_string()).collect();
        symbols.push(END_OF_TOKEN.to_string());
        loop {
            let best = symbols
                .windows(2)
                .filter_map(|pair| self.ranks.get(&(pair[0].clone(), pair[1].clone())).copied())
                .min();
            let Some(rank) = best else { break };
            let pair = &self.merges[rank];
            symbols = merge_word(&symbols, pair);
        }
        strip_marker(symbols)
    }

    /// Split every token of a sequence, flattened in order.
    pub fn apply(&self, seq: &TokenSequence) -> Vec<String> {
        seq.iter().flat_map(|t| self.apply_token(&t.text)).collect()
    }

    /// Write the merge list, one pair per line, left and right separated by
    /// a tab. Tabs, newlines, and backslashes inside symbols are escaped.
    pub fn write<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        for (left, right) in &self.merges {
            writeln!(writer, "{}\t{}", escape(left), escape(right))?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.write(std::io::BufWriter::new(file))
            .map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })
    }

    /// Read a merge list produced by [`BpeModel::write`].
    pub fn read<R: BufRead>(reader: R, origin: &Path) -> Result<Self> {
        let mut merges = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|source| Error::Io {
                path: origin.to_path_buf(),
                source,
            })?;
            if line.is_empty() {
                continue;
            }
            let (left, right) = line
                .split_once('\t')
                .ok_or_else(|| Error::MalformedRecord {
                    path: origin.to_path_buf(),
                    line: idx + 1,
                    message: "expected two tab-separated subtokens".into(),
                })?;
            merges.push((unescape(left), unescape(right)));
        }
        Ok(BpeModel::from_merges(merges, BTreeSet::new()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read(BufReader::new(file), path)
    }
}

/// Replace all non-overlapping occurrences of `pair`, left to right.
fn merge_word(word: &[String], pair: &(String, String)) -> Vec<String> {
    let mut out = Vec::with_capacity(word.len());
    let mut i = 0;
    while i < word.len() {
        if i + 1 < word.len() && word[i] == pair.0 && word[i + 1] == pair.1 {
            out.push(format!("{}{}", pair.0, pair.1));
            i += 2;
        } else {
            out.push(word[i].clone());
            i += 1;
        }
    }
    out
}

/// Remove the end-of-token marker from the final symbol. The marker was
/// appended exactly once and merges keep it at the end, so removing one
/// trailing occurrence restores the original text exactly.
fn strip_marker(mut symbols: Vec<String>) -> Vec<String> {
    if let Some(last) = symbols.last_mut() {
        if let Some(stripped) = last.strip_suffix(END_OF_TOKEN) {
            if stripped.is_empty() {
                symbols.pop();
            } else {
                *last = stripped.to_string();
            }
        }
    }
    symbols
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            _ => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}
