//! Synthetic emissions for running the pipeline without an acoustic model.

use ndarray::Array2;

use crate::ctc::{CtcError, LogProbMatrix};
use crate::textnorm::{encode_labels, NormalizedLine, Vocab, BLANK_INDEX};

/// Probability mass spread over the off-path tokens of each frame.
pub const SYNTH_MISS_MASS: f64 = 1e-3;

/// Canonical frame path: each label held for `frames_per_token` frames, with
/// one blank frame between equal neighbours so the path collapses back to
/// `labels`.
pub fn synth_path(labels: &[usize], frames_per_token: usize, blank: usize) -> Vec<usize> {
    let mut path = Vec::with_capacity(labels.len() * (frames_per_token + 1));
    for (i, &l) in labels.iter().enumerate() {
        if i > 0 && labels[i - 1] == l {
            path.push(blank);
        }
        path.extend(std::iter::repeat_n(l, frames_per_token));
    }
    path
}

/// Near-one-hot rows: the path token gets `1 - SYNTH_MISS_MASS`, the rest
/// share `SYNTH_MISS_MASS` evenly.
pub fn emissions_from_path(
    path: &[usize],
    vocab_size: usize,
    blank: usize,
    frame_duration: f64,
) -> Result<LogProbMatrix, CtcError> {
    if vocab_size < 2 {
        return Err(CtcError::InvalidEmissions(format!("vocabulary size {vocab_size} < 2")));
    }
    if let Some(&bad) = path.iter().find(|&&s| s >= vocab_size) {
        return Err(CtcError::InvalidEmissions(format!("path token {bad} outside vocabulary")));
    }
    let hit = (1.0 - SYNTH_MISS_MASS).ln();
    let miss = (SYNTH_MISS_MASS / (vocab_size - 1) as f64).ln();
    let values = Array2::from_shape_fn((path.len(), vocab_size), |(t, v)| if path[t] == v { hit } else { miss });
    LogProbMatrix::new(values, frame_duration, blank)
}

/// Emissions whose greedy decoding is exactly `text`, with the vocabulary's
/// token names attached.
pub fn synth_emissions(
    text: &NormalizedLine,
    vocab: &Vocab,
    frames_per_token: usize,
    frame_duration: f64,
) -> Result<LogProbMatrix, CtcError> {
    if frames_per_token == 0 {
        return Err(CtcError::InvalidEmissions("frames_per_token must be at least 1".into()));
    }
    let labels = encode_labels(text, vocab);
    let path = synth_path(labels.as_slice(), frames_per_token, BLANK_INDEX);
    emissions_from_path(&path, vocab.len(), BLANK_INDEX, frame_duration)?.with_tokens(vocab.tokens().to_vec())
}
