//! Edit-distance based word and character error rates.
//!
//! Words are whitespace-delimited tokens. Characters are grapheme clusters of
//! the whitespace-collapsed text, so single spaces between words count as
//! tokens. Corpus rates pool edit counts and reference lengths across
//! segments rather than averaging per-segment rates.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::ops::{Add, AddAssign};

use serde::Serialize;
use thiserror::Error;
use unicode_segmentation::UnicodeSegmentation;

use crate::corpus::SegmentRecord;
use crate::textnorm::normalize_line;

/// Substitution, deletion and insertion counts turning a reference into a
/// hypothesis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ErrorBreakdown {
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub reference_length: usize,
}

impl ErrorBreakdown {
    pub fn errors(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }

    /// `(S + D + I) / N`. An empty reference gives 0 when the hypothesis is
    /// also empty and `+inf` otherwise (see [`is_undefined`](Self::is_undefined)).
    pub fn rate(&self) -> f64 {
        if self.reference_length > 0 {
            self.errors() as f64 / self.reference_length as f64
        } else if self.insertions == 0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// Empty reference with a non-empty hypothesis.
    pub fn is_undefined(&self) -> bool {
        self.reference_length == 0 && self.insertions > 0
    }
}

impl Add for ErrorBreakdown {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            substitutions: self.substitutions + rhs.substitutions,
            deletions: self.deletions + rhs.deletions,
            insertions: self.insertions + rhs.insertions,
            reference_length: self.reference_length + rhs.reference_length,
        }
    }
}

impl AddAssign for ErrorBreakdown {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for ErrorBreakdown {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

/// Minimal edit breakdown from `reference` to `hypothesis`.
///
/// Among minimal-cost scripts the one with the most substitutions (hence the
/// fewest deletions and insertions) is reported. Common prefixes and suffixes
/// are matched up front; this never changes the cost or the breakdown.
pub fn levenshtein<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> ErrorBreakdown {
    let prefix = reference
        .iter()
        .zip(hypothesis)
        .take_while(|(a, b)| a == b)
        .count();
    let (r, h) = (&reference[prefix..], &hypothesis[prefix..]);
    let suffix = r
        .iter()
        .rev()
        .zip(h.iter().rev())
        .take_while(|(a, b)| a == b)
        .count();
    let (r, h) = (&r[..r.len() - suffix], &h[..h.len() - suffix]);

    // (cost, insertions), compared lexicographically
    let mut row: Vec<(usize, usize)> = (0..=h.len()).map(|j| (j, j)).collect();
    for (i, rt) in r.iter().enumerate() {
        let mut diag = row[0];
        row[0] = (i + 1, 0);
        for (j, ht) in h.iter().enumerate() {
            let up = row[j + 1];
            let sub = (diag.0 + usize::from(rt != ht), diag.1);
            let del = (up.0 + 1, up.1);
            let ins = (row[j].0 + 1, row[j].1 + 1);
            diag = up;
            row[j + 1] = sub.min(del).min(ins);
        }
    }
    let (cost, insertions) = row[h.len()];
    let deletions = insertions + r.len() - h.len();
    ErrorBreakdown {
        substitutions: cost - deletions - insertions,
        deletions,
        insertions,
        reference_length: reference.len(),
    }
}

pub fn word_tokens(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

/// Grapheme clusters of the text with whitespace runs collapsed to one space.
pub fn char_tokens(text: &str) -> Vec<String> {
    let collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed.graphemes(true).map(str::to_owned).collect()
}

pub fn word_breakdown(reference: &str, hypothesis: &str) -> ErrorBreakdown {
    levenshtein(&word_tokens(reference), &word_tokens(hypothesis))
}

pub fn char_breakdown(reference: &str, hypothesis: &str) -> ErrorBreakdown {
    levenshtein(&char_tokens(reference), &char_tokens(hypothesis))
}

/// Word error rate of already-normalized strings.
pub fn wer(reference: &str, hypothesis: &str) -> f64 {
    word_breakdown(reference, hypothesis).rate()
}

/// Character error rate of already-normalized strings.
pub fn cer(reference: &str, hypothesis: &str) -> f64 {
    char_breakdown(reference, hypothesis).rate()
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("hypothesis id {0:?} appears more than once")]
    DuplicateHypothesis(String),
    #[error("hypothesis file line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Parses `id<TAB>text` lines. Blank lines are skipped.
pub fn parse_hypotheses(text: &str) -> Result<Vec<(String, String)>, EvalError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let (id, hyp) = line.split_once('\t').ok_or(EvalError::Format {
                line: i + 1,
                message: "expected `id<TAB>text`".into(),
            })?;
            Ok((id.trim().to_owned(), hyp.to_owned()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentEval {
    pub id: String,
    pub reference: String,
    pub hypothesis: String,
    pub missing_hypothesis: bool,
    pub words: ErrorBreakdown,
    pub chars: ErrorBreakdown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub segments: Vec<SegmentEval>,
    /// Hypothesis ids with no manifest entry (ignored for scoring).
    pub unmatched_hypotheses: Vec<String>,
}

impl EvalReport {
    pub fn from_segments(segments: Vec<SegmentEval>) -> Self {
        Self {
            segments,
            unmatched_hypotheses: Vec::new(),
        }
    }

    pub fn words(&self) -> ErrorBreakdown {
        self.segments.iter().map(|s| s.words).sum()
    }

    pub fn chars(&self) -> ErrorBreakdown {
        self.segments.iter().map(|s| s.chars).sum()
    }

    pub fn wer(&self) -> f64 {
        self.words().rate()
    }

    pub fn cer(&self) -> f64 {
        self.chars().rate()
    }

    pub fn missing(&self) -> usize {
        self.segments.iter().filter(|s| s.missing_hypothesis).count()
    }

    /// Per-segment table followed by pooled totals at six decimals.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let id_width = self.segments.iter().map(|s| s.id.len()).max().unwrap_or(2).max(7);
        let _ = writeln!(
            out,
            "{:<id_width$} {:>6} {:>4} {:>4} {:>4} {:>9} {:>6} {:>4} {:>4} {:>4} {:>9}",
            "segment", "words", "S", "D", "I", "WER", "chars", "S", "D", "I", "CER"
        );
        for s in &self.segments {
            let flag = if s.missing_hypothesis { "  (no hypothesis)" } else { "" };
            let _ = writeln!(
                out,
                "{:<id_width$} {:>6} {:>4} {:>4} {:>4} {:>9} {:>6} {:>4} {:>4} {:>4} {:>9}{flag}",
                s.id,
                s.words.reference_length,
                s.words.substitutions,
                s.words.deletions,
                s.words.insertions,
                format_rate(&s.words),
                s.chars.reference_length,
                s.chars.substitutions,
                s.chars.deletions,
                s.chars.insertions,
                format_rate(&s.chars),
            );
        }
        let (w, c) = (self.words(), self.chars());
        let _ = writeln!(
            out,
            "segments: {}  missing hypotheses: {}  unmatched hypotheses: {}",
            self.segments.len(),
            self.missing(),
            self.unmatched_hypotheses.len()
        );
        let _ = writeln!(out, "WER: {}  ({} errors / {} words)", format_rate(&w), w.errors(), w.reference_length);
        let _ = writeln!(out, "CER: {}  ({} errors / {} chars)", format_rate(&c), c.errors(), c.reference_length);
        out
    }

    /// One JSON object per segment, then a summary object.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for s in &self.segments {
            let mut v = serde_json::to_value(s).expect("segment serializes");
            v["wer"] = json_rate(&s.words);
            v["cer"] = json_rate(&s.chars);
            out.push_str(&v.to_string());
            out.push('\n');
        }
        let (w, c) = (self.words(), self.chars());
        let summary = serde_json::json!({
            "summary": true,
            "segments": self.segments.len(),
            "missing_hypotheses": self.missing(),
            "unmatched_hypotheses": self.unmatched_hypotheses,
            "words": w,
            "chars": c,
            "wer": json_rate(&w),
            "cer": json_rate(&c),
        });
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }
}

fn format_rate(b: &ErrorBreakdown) -> String {
    if b.is_undefined() {
        "undefined".to_owned()
    } else {
        format!("{:.6}", b.rate())
    }
}

fn json_rate(b: &ErrorBreakdown) -> serde_json::Value {
    if b.is_undefined() {
        serde_json::Value::Null
    } else {
        serde_json::json!(b.rate())
    }
}

/// Scores hypotheses against the `normalized_text` of each manifest record.
/// Hypotheses are normalized first. Records without a hypothesis are scored
/// against an empty string and flagged.
pub fn eval_report(
    manifest: &[SegmentRecord],
    hypotheses: &[(String, String)],
) -> Result<EvalReport, EvalError> {
    let mut by_id: HashMap<&str, &str> = HashMap::with_capacity(hypotheses.len());
    for (id, text) in hypotheses {
        if by_id.insert(id.as_str(), text.as_str()).is_some() {
            return Err(EvalError::DuplicateHypothesis(id.clone()));
        }
    }
    let known: BTreeSet<&str> = manifest.iter().map(|r| r.id.as_str()).collect();
    let segments = manifest
        .iter()
        .map(|record| {
            let hyp = by_id.get(record.id.as_str());
            let hypothesis = normalize_line(hyp.copied().unwrap_or_default()).into_string();
            let reference = normalize_line(&record.normalized_text).into_string();
            SegmentEval {
                id: record.id.clone(),
                words: word_breakdown(&reference, &hypothesis),
                chars: char_breakdown(&reference, &hypothesis),
                reference,
                hypothesis,
                missing_hypothesis: hyp.is_none(),
            }
        })
        .collect();
    let mut unmatched: Vec<String> = hypotheses
        .iter()
        .filter(|(id, _)| !known.contains(id.as_str()))
        .map(|(id, _)| id.clone())
        .collect();
    unmatched.sort();
    Ok(EvalReport {
        segments,
        unmatched_hypotheses: unmatched,
    })
}
