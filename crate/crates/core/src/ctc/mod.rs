//! Connectionist temporal classification over per-frame emission lattices.
//!
//! Everything here works on natural-log probabilities. The lattice for a label
//! sequence `y` of length `L` is the usual blank-interleaved sequence of
//! `2L + 1` states: `blank, y[0], blank, y[1], ..., y[L-1], blank`.

mod align;
mod batch;
mod io;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use thiserror::Error;

pub use align::{forced_align, AlignOptions, ForcedAlignment};
pub use batch::{pad_batch, PaddedBatch, PAD_LABEL};
pub use io::{parse_emissions, read_emissions, write_emissions, EmissionFileError, BLANK_TOKEN};

/// Rows of a [`LogProbMatrix`] must have `|logsumexp(row)|` within this bound.
pub const ROW_NORM_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CtcError {
    #[error("invalid label at position {position}: token {token} {reason}")]
    InvalidLabel {
        position: usize,
        token: usize,
        reason: &'static str,
    },
    #[error("labels need at least {required} frames but only {frames} are available")]
    Infeasible { required: usize, frames: usize },
    #[error("invalid emission matrix: {0}")]
    InvalidEmissions(String),
    #[error("cannot pad an empty batch")]
    EmptyBatch,
    #[error("batch item {index} is incompatible: {reason}")]
    IncompatibleBatch { index: usize, reason: String },
}

/// `ln(exp(a) + exp(b))` without leaving log space.
#[inline]
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub fn logsumexp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return max;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Per-frame emission log-probabilities, `T` frames by `V` tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct LogProbMatrix {
    values: Array2<f64>,
    frame_duration: f64,
    blank: usize,
    tokens: Vec<String>,
}

pub(crate) fn check_row(row: ArrayView1<'_, f64>) -> Result<(), String> {
    if let Some(v) = row.iter().find(|v| v.is_nan() || **v > ROW_NORM_TOLERANCE) {
        return Err(format!("entry {v} is not a log-probability"));
    }
    let norm = logsumexp(row.iter().copied());
    if !(norm.abs() <= ROW_NORM_TOLERANCE) {
        return Err(format!("row logsumexp is {norm}, expected 0 within {ROW_NORM_TOLERANCE}"));
    }
    Ok(())
}

impl LogProbMatrix {
    pub fn new(values: Array2<f64>, frame_duration: f64, blank: usize) -> Result<Self, CtcError> {
        let (frames, vocab) = values.dim();
        if frames == 0 {
            return Err(CtcError::InvalidEmissions("no frames".into()));
        }
        if vocab < 2 {
            return Err(CtcError::InvalidEmissions(format!("vocabulary size {vocab} < 2")));
        }
        if !(frame_duration > 0.0 && frame_duration.is_finite()) {
            return Err(CtcError::InvalidEmissions(format!(
                "frame duration {frame_duration} must be positive"
            )));
        }
        if blank >= vocab {
            return Err(CtcError::InvalidEmissions(format!(
                "blank index {blank} outside vocabulary of size {vocab}"
            )));
        }
        for (t, row) in values.axis_iter(Axis(0)).enumerate() {
            check_row(row).map_err(|e| CtcError::InvalidEmissions(format!("frame {t}: {e}")))?;
        }
        Ok(Self {
            values,
            frame_duration,
            blank,
            tokens: Vec::new(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], frame_duration: f64, blank: usize) -> Result<Self, CtcError> {
        let vocab = rows.first().map_or(0, Vec::len);
        if let Some(t) = rows.iter().position(|r| r.len() != vocab) {
            return Err(CtcError::InvalidEmissions(format!(
                "frame {t} has {} entries, expected {vocab}",
                rows[t].len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let values = Array2::from_shape_vec((rows.len(), vocab), flat)
            .map_err(|e| CtcError::InvalidEmissions(e.to_string()))?;
        Self::new(values, frame_duration, blank)
    }

    /// Attach token names, one per vocabulary column.
    pub fn with_tokens(mut self, tokens: Vec<String>) -> Result<Self, CtcError> {
        if tokens.len() != self.vocab_size() {
            return Err(CtcError::InvalidEmissions(format!(
                "{} token names for vocabulary size {}",
                tokens.len(),
                self.vocab_size()
            )));
        }
        self.tokens = tokens;
        Ok(self)
    }

    pub fn num_frames(&self) -> usize {
        self.values.nrows()
    }

    pub fn vocab_size(&self) -> usize {
        self.values.ncols()
    }

    pub fn frame_duration(&self) -> f64 {
        self.frame_duration
    }

    pub fn blank(&self) -> usize {
        self.blank
    }

    /// Token names; empty when the matrix was built without them.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    #[inline]
    pub fn get(&self, frame: usize, token: usize) -> f64 {
        self.values[[frame, token]]
    }

    pub fn duration_sec(&self) -> f64 {
        self.num_frames() as f64 * self.frame_duration
    }

    /// Copy of frames `[start, end)`.
    pub fn slice_frames(&self, start: usize, end: usize) -> Result<Self, CtcError> {
        if start >= end || end > self.num_frames() {
            return Err(CtcError::InvalidEmissions(format!(
                "frame range [{start}, {end}) is empty or exceeds {} frames",
                self.num_frames()
            )));
        }
        Ok(Self {
            values: self.values.slice(ndarray::s![start..end, ..]).to_owned(),
            frame_duration: self.frame_duration,
            blank: self.blank,
            tokens: self.tokens.clone(),
        })
    }
}

/// Target token sequence for one transcript. Never contains the blank.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LabelSequence(Vec<usize>);

impl LabelSequence {
    pub fn new(tokens: Vec<usize>) -> Self {
        Self(tokens)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn validate(&self, vocab_size: usize, blank: usize) -> Result<(), CtcError> {
        for (position, &token) in self.0.iter().enumerate() {
            if token >= vocab_size {
                return Err(CtcError::InvalidLabel {
                    position,
                    token,
                    reason: "is outside the vocabulary",
                });
            }
            if token == blank {
                return Err(CtcError::InvalidLabel {
                    position,
                    token,
                    reason: "is the blank token",
                });
            }
        }
        Ok(())
    }

    /// Fewest frames any alignment can use: one per token plus one blank
    /// between each pair of equal neighbours.
    pub fn min_frames(&self) -> usize {
        self.0.len() + self.0.windows(2).filter(|w| w[0] == w[1]).count()
    }
}

impl From<Vec<usize>> for LabelSequence {
    fn from(tokens: Vec<usize>) -> Self {
        Self(tokens)
    }
}

impl FromIterator<usize> for LabelSequence {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Merge adjacent repeats, then drop blanks.
pub fn collapse(states: &[usize], blank: usize) -> LabelSequence {
    let mut out = Vec::new();
    let mut prev = None;
    for &s in states {
        if Some(s) != prev && s != blank {
            out.push(s);
        }
        prev = Some(s);
    }
    LabelSequence(out)
}

/// One frame-level CTC path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentPath {
    /// Token index per frame. Frames absorbed by the lead-in wildcard are
    /// reported as blank.
    pub states: Vec<usize>,
    /// Number of leading frames assigned to the wildcard (0 when disabled).
    pub lead_in_frames: usize,
}

impl AlignmentPath {
    pub fn collapse(&self, blank: usize) -> LabelSequence {
        collapse(&self.states, blank)
    }
}

/// Frames `[start_frame, end_frame)` occupied by one label token.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TokenSpan {
    pub token: usize,
    pub start_frame: usize,
    pub end_frame: usize,
    /// Sum of the token's per-frame log-probabilities over the span.
    pub score: f64,
}

impl TokenSpan {
    pub fn num_frames(&self) -> usize {
        self.end_frame - self.start_frame
    }
}

/// Blank-interleaved lattice token for state `s`.
#[inline]
fn lattice_token(labels: &[usize], blank: usize, s: usize) -> usize {
    if s % 2 == 0 {
        blank
    } else {
        labels[s / 2]
    }
}

#[inline]
fn can_skip(labels: &[usize], s: usize) -> bool {
    // s -> s + 2 jumps over a blank between two different labels
    s % 2 == 1 && s + 2 < 2 * labels.len() + 1 && labels[s / 2] != labels[s / 2 + 1]
}

/// Forward variables: `alpha[t][s]` is the log-mass of all prefixes ending in
/// state `s` at frame `t`, emission at `t` included.
fn forward(lp: ArrayView2<'_, f64>, labels: &[usize], blank: usize) -> Array2<f64> {
    let frames = lp.nrows();
    let states = 2 * labels.len() + 1;
    let mut alpha = Array2::from_elem((frames, states), f64::NEG_INFINITY);
    alpha[[0, 0]] = lp[[0, blank]];
    if states > 1 {
        alpha[[0, 1]] = lp[[0, labels[0]]];
    }
    for t in 1..frames {
        for s in 0..states {
            let mut acc = alpha[[t - 1, s]];
            if s >= 1 {
                acc = log_add(acc, alpha[[t - 1, s - 1]]);
            }
            if s >= 2 && can_skip(labels, s - 2) {
                acc = log_add(acc, alpha[[t - 1, s - 2]]);
            }
            if acc != f64::NEG_INFINITY {
                alpha[[t, s]] = acc + lp[[t, lattice_token(labels, blank, s)]];
            }
        }
    }
    alpha
}

/// Backward variables: `beta[t][s]` is the log-mass of all suffixes after
/// frame `t` given state `s` at `t`, emission at `t` excluded.
fn backward(lp: ArrayView2<'_, f64>, labels: &[usize], blank: usize) -> Array2<f64> {
    let frames = lp.nrows();
    let states = 2 * labels.len() + 1;
    let mut beta = Array2::from_elem((frames, states), f64::NEG_INFINITY);
    beta[[frames - 1, states - 1]] = 0.0;
    if states > 1 {
        beta[[frames - 1, states - 2]] = 0.0;
    }
    for t in (0..frames - 1).rev() {
        for s in 0..states {
            let step = |next: usize| beta[[t + 1, next]] + lp[[t + 1, lattice_token(labels, blank, next)]];
            let mut acc = step(s);
            if s + 1 < states {
                acc = log_add(acc, step(s + 1));
            }
            if can_skip(labels, s) {
                acc = log_add(acc, step(s + 2));
            }
            beta[[t, s]] = acc;
        }
    }
    beta
}

fn final_log_mass(alpha: &Array2<f64>) -> f64 {
    let (frames, states) = alpha.dim();
    let last = alpha[[frames - 1, states - 1]];
    if states > 1 {
        log_add(last, alpha[[frames - 1, states - 2]])
    } else {
        last
    }
}

/// `ln p(labels | emissions)`, summed over every alignment that collapses to
/// `labels`. Returns negative infinity when the emissions are too short.
pub fn ctc_log_likelihood(emissions: &LogProbMatrix, labels: &LabelSequence) -> Result<f64, CtcError> {
    labels.validate(emissions.vocab_size(), emissions.blank())?;
    if labels.min_frames() > emissions.num_frames() {
        return Ok(f64::NEG_INFINITY);
    }
    let alpha = forward(emissions.values(), labels.as_slice(), emissions.blank());
    Ok(final_log_mass(&alpha))
}

/// Negative log-likelihood; `+inf` when infeasible.
pub fn ctc_loss(emissions: &LogProbMatrix, labels: &LabelSequence) -> Result<f64, CtcError> {
    ctc_log_likelihood(emissions, labels).map(|ll| -ll)
}

/// Row-wise log-softmax of raw scores.
pub fn log_softmax(logits: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = logits.to_owned();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let norm = logsumexp(row.iter().copied());
        row.mapv_inplace(|v| v - norm);
    }
    out
}

/// Gradient of the CTC loss with respect to unnormalized per-frame scores,
/// `softmax(logits) - occupancy`, where occupancy is the posterior of each
/// token at each frame under the forward-backward lattice.
pub fn ctc_gradient(
    logits: ArrayView2<'_, f64>,
    labels: &LabelSequence,
    blank: usize,
) -> Result<Array2<f64>, CtcError> {
    let (frames, vocab) = logits.dim();
    if frames == 0 || vocab < 2 || blank >= vocab {
        return Err(CtcError::InvalidEmissions(format!(
            "logits of shape {frames}x{vocab} with blank {blank}"
        )));
    }
    labels.validate(vocab, blank)?;
    if labels.min_frames() > frames {
        return Err(CtcError::Infeasible {
            required: labels.min_frames(),
            frames,
        });
    }
    let lp = log_softmax(logits);
    let labels = labels.as_slice();
    let alpha = forward(lp.view(), labels, blank);
    let beta = backward(lp.view(), labels, blank);
    let total = final_log_mass(&alpha);
    if total == f64::NEG_INFINITY {
        return Err(CtcError::Infeasible {
            required: labels.len(),
            frames,
        });
    }

    let mut grad = lp.mapv(f64::exp);
    for t in 0..frames {
        for s in 0..alpha.ncols() {
            let occupancy = alpha[[t, s]] + beta[[t, s]] - total;
            if occupancy != f64::NEG_INFINITY {
                grad[[t, lattice_token(labels, blank, s)]] -= occupancy.exp();
            }
        }
    }
    Ok(grad)
}

/// Best-path decoding: per-frame argmax (lowest index wins ties), then collapse.
pub fn greedy_decode(emissions: &LogProbMatrix) -> LabelSequence {
    let path: Vec<usize> = emissions
        .values()
        .axis_iter(Axis(0))
        .map(|row| {
            let mut best = 0;
            for (k, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect();
    collapse(&path, emissions.blank())
}
