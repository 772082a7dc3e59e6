use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CorpusError, SegmentRecord, Split};

/// What gets shuffled and assigned as a unit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitUnit {
    #[default]
    Segment,
    /// Whole chapters go to one side, so no chapter's audio appears in both.
    Chapter,
}

fn check_ratio(ratio: f64) -> Result<(), CorpusError> {
    if ratio > 0.0 && ratio < 1.0 {
        Ok(())
    } else {
        Err(CorpusError::Config(format!("split ratio {ratio} is not in (0, 1)")))
    }
}

/// Shuffles indices `0..n` with ChaCha8 seeded from `seed` and marks the
/// first `round(n * ratio)` of them.
fn train_mask(n: usize, ratio: f64, seed: u64) -> Vec<bool> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let train = (n as f64 * ratio).round() as usize;
    let mut mask = vec![false; n];
    for &i in &order[..train] {
        mask[i] = true;
    }
    mask
}

/// Assigns train/test per segment. Output keeps the input order.
pub fn split_dataset(records: Vec<SegmentRecord>, ratio: f64, seed: u64) -> Result<Vec<SegmentRecord>, CorpusError> {
    split_dataset_by(records, ratio, seed, SplitUnit::Segment)
}

/// Like [`split_dataset`], but with [`SplitUnit::Chapter`] the shuffle runs
/// over chapters (sorted by id) and the train share is `round(chapters * ratio)`
/// chapters rather than segments.
pub fn split_dataset_by(
    mut records: Vec<SegmentRecord>,
    ratio: f64,
    seed: u64,
    unit: SplitUnit,
) -> Result<Vec<SegmentRecord>, CorpusError> {
    check_ratio(ratio)?;
    if records.is_empty() {
        return Err(CorpusError::EmptyDataset);
    }
    let side = |train: bool| if train { Split::Train } else { Split::Test };
    match unit {
        SplitUnit::Segment => {
            let mask = train_mask(records.len(), ratio, seed);
            for (r, train) in records.iter_mut().zip(mask) {
                r.split = side(train);
            }
        }
        SplitUnit::Chapter => {
            let mut chapters: BTreeMap<String, bool> =
                records.iter().map(|r| (r.chapter_id().to_string(), false)).collect();
            let mask = train_mask(chapters.len(), ratio, seed);
            for (train, m) in chapters.values_mut().zip(mask) {
                *train = m;
            }
            for r in &mut records {
                r.split = side(chapters[r.chapter_id()]);
            }
        }
    }
    Ok(records)
}
