use ndarray::{s, Array2, Array3};

use super::{CtcError, LabelSequence, LogProbMatrix};

/// Label value written into padded label positions.
pub const PAD_LABEL: i64 = -100;

/// Emissions and labels of several utterances padded to common lengths.
///
/// Emission padding rows put all mass on the blank (log 1 = 0 at the blank,
/// negative infinity elsewhere); label padding uses [`PAD_LABEL`].
#[derive(Debug, Clone, PartialEq)]
pub struct PaddedBatch {
    pub emissions: Array3<f64>,
    pub emission_lengths: Vec<usize>,
    pub labels: Array2<i64>,
    pub label_lengths: Vec<usize>,
    pub pad_label: i64,
    pub blank: usize,
    pub frame_duration: f64,
}

impl PaddedBatch {
    pub fn len(&self) -> usize {
        self.emission_lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.emission_lengths.is_empty()
    }

    pub fn max_frames(&self) -> usize {
        self.emissions.dim().1
    }

    /// Item `index` with padding stripped.
    pub fn item(&self, index: usize) -> Result<(LogProbMatrix, LabelSequence), CtcError> {
        let frames = self.emission_lengths[index];
        let emissions = self.emissions.slice(s![index, ..frames, ..]).to_owned();
        let emissions = LogProbMatrix::new(emissions, self.frame_duration, self.blank)?;
        let labels = self
            .labels
            .slice(s![index, ..self.label_lengths[index]])
            .iter()
            .map(|&l| l as usize)
            .collect();
        Ok((emissions, labels))
    }
}

pub fn pad_batch(items: &[(LogProbMatrix, LabelSequence)]) -> Result<PaddedBatch, CtcError> {
    let (first, _) = items.first().ok_or(CtcError::EmptyBatch)?;
    let vocab = first.vocab_size();
    for (index, (em, labels)) in items.iter().enumerate() {
        let reason = if em.vocab_size() != vocab {
            format!("vocabulary size {} differs from {vocab}", em.vocab_size())
        } else if em.frame_duration() != first.frame_duration() {
            format!(
                "frame duration {} differs from {}",
                em.frame_duration(),
                first.frame_duration()
            )
        } else if em.blank() != first.blank() {
            format!("blank index {} differs from {}", em.blank(), first.blank())
        } else {
            labels.validate(vocab, first.blank())?;
            continue;
        };
        return Err(CtcError::IncompatibleBatch { index, reason });
    }

    let max_frames = items.iter().map(|(e, _)| e.num_frames()).max().unwrap_or(0);
    let max_labels = items.iter().map(|(_, l)| l.len()).max().unwrap_or(0);
    let mut emissions = Array3::from_elem((items.len(), max_frames, vocab), f64::NEG_INFINITY);
    emissions.slice_mut(s![.., .., first.blank()]).fill(0.0);
    let mut labels = Array2::from_elem((items.len(), max_labels), PAD_LABEL);
    for (i, (em, lab)) in items.iter().enumerate() {
        emissions
            .slice_mut(s![i, ..em.num_frames(), ..])
            .assign(&em.values());
        for (j, &tok) in lab.as_slice().iter().enumerate() {
            labels[[i, j]] = tok as i64;
        }
    }

    Ok(PaddedBatch {
        emissions,
        emission_lengths: items.iter().map(|(e, _)| e.num_frames()).collect(),
        labels,
        label_lengths: items.iter().map(|(_, l)| l.len()).collect(),
        pad_label: PAD_LABEL,
        blank: first.blank(),
        frame_duration: first.frame_duration(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(frames: usize, vocab: usize) -> LogProbMatrix {
        let v = -(vocab as f64).ln();
        LogProbMatrix::from_rows(&vec![vec![v; vocab]; frames], 0.02, 0).unwrap()
    }

    #[test]
    fn single_item_is_identity() {
        let em = uniform(3, 3);
        let labels: LabelSequence = vec![1, 2].into();
        let batch = pad_batch(&[(em.clone(), labels.clone())]).unwrap();
        assert_eq!(batch.max_frames(), 3);
        assert_eq!(batch.emission_lengths, vec![3]);
        assert_eq!(batch.label_lengths, vec![2]);
        assert_eq!(batch.item(0).unwrap(), (em, labels));
    }

    #[test]
    fn shorter_item_gains_blank_rows() {
        let batch = pad_batch(&[
            (uniform(3, 3), vec![1].into()),
            (uniform(5, 3), vec![1, 2, 1].into()),
        ])
        .unwrap();
        assert_eq!(batch.max_frames(), 5);
        assert_eq!(batch.emission_lengths, vec![3, 5]);
        for t in 3..5 {
            assert_eq!(batch.emissions[[0, t, 0]], 0.0);
            assert_eq!(batch.emissions[[0, t, 1]], f64::NEG_INFINITY);
            assert_eq!(batch.emissions[[0, t, 2]], f64::NEG_INFINITY);
        }
        assert_eq!(batch.labels.row(0).to_vec(), vec![1, PAD_LABEL, PAD_LABEL]);
        assert_eq!(batch.labels.row(1).to_vec(), vec![1, 2, 1]);
    }

    #[test]
    fn rejects_empty_and_mixed_batches() {
        assert_eq!(pad_batch(&[]), Err(CtcError::EmptyBatch));
        assert!(matches!(
            pad_batch(&[(uniform(2, 3), vec![1].into()), (uniform(2, 4), vec![1].into())]),
            Err(CtcError::IncompatibleBatch { index: 1, .. })
        ));
        let other_stride = LogProbMatrix::from_rows(&[vec![-(2f64).ln(); 2]], 0.04, 0).unwrap();
        assert!(matches!(
            pad_batch(&[(uniform(2, 2), vec![1].into()), (other_stride, vec![1].into())]),
            Err(CtcError::IncompatibleBatch { index: 1, .. })
        ));
    }
}
