//! Corpus build: pairing chapter audio with transcripts, verse alignment,
//! quality statistics, filtering, splitting and manifest/CSV output.

mod align;
mod discover;
mod filter;
mod manifest;
mod split;
mod synth;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_segmentation::UnicodeSegmentation;

use crate::ctc::CtcError;

pub use align::{align_chapter, ChapterAlignOptions, ChapterAlignment};
pub use discover::{canonical_key, discover_pairs, ChapterPair, Discovery, Unmatched};
pub use filter::{filter_segments, FilterOutcome, FilterRules, RejectReason, Rejection};
pub use manifest::{
    emit_manifest, emit_metadata_csv, parse_manifest, parse_metadata_csv, read_manifest, write_manifest,
    MetadataRow,
};
pub use split::{split_dataset, split_dataset_by, SplitUnit};
pub use synth::{emissions_from_path, synth_emissions, synth_path, SYNTH_MISS_MASS};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("chapter {chapter}: alignment failed: {source}")]
    Alignment {
        chapter: String,
        #[source]
        source: CtcError,
    },
    #[error("chapter {chapter}: {reason}")]
    Chapter { chapter: String, reason: String },
    #[error("record {id}: {reason}")]
    InvalidRecord { id: String, reason: String },
    #[error("invalid filter rules: {0}")]
    Config(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("record {id} has no train/test split assigned")]
    UnassignedSplit { id: String },
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CorpusError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QualityTag {
    High,
    Low,
    Fixable,
    #[default]
    Untagged,
}

impl QualityTag {
    /// Tags a reviewer can assign.
    pub const ASSIGNABLE: [QualityTag; 3] = [QualityTag::High, QualityTag::Low, QualityTag::Fixable];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::High => "High",
            Self::Low => "Low",
            Self::Fixable => "Fixable",
            Self::Untagged => "Untagged",
        }
    }
}

impl fmt::Display for QualityTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QualityTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "High" => Ok(Self::High),
            "Low" => Ok(Self::Low),
            "Fixable" => Ok(Self::Fixable),
            "Untagged" => Ok(Self::Untagged),
            other => Err(format!("unknown tag {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
    #[default]
    Unassigned,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Train => "train",
            Self::Test => "test",
            Self::Unassigned => "unassigned",
        })
    }
}

/// One manifest entry: a verse-level audio segment and its transcript.
///
/// The first six fields carry the conventional manifest names; everything
/// this toolkit adds is namespaced with `x_`. Unknown fields found while
/// parsing are kept in `extra` and written back out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub audio_start_sec: f64,
    pub audio_filepath: String,
    pub duration: f64,
    pub text: String,
    pub normalized_text: String,
    pub uroman_tokens: String,
    #[serde(rename = "x_word_count", default)]
    pub word_count: usize,
    #[serde(rename = "x_char_count", default)]
    pub char_count: usize,
    #[serde(rename = "x_word_rate", default)]
    pub word_rate: f64,
    #[serde(rename = "x_char_rate", default)]
    pub char_rate: f64,
    #[serde(rename = "x_quality_tag", default)]
    pub quality_tag: QualityTag,
    #[serde(rename = "x_split", default)]
    pub split: Split,
    #[serde(rename = "x_id", default)]
    pub id: String,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl SegmentRecord {
    /// Record with stats left at zero; see [`compute_quality_stats`].
    pub fn new(
        id: impl Into<String>,
        audio_filepath: impl Into<String>,
        audio_start_sec: f64,
        duration: f64,
        text: impl Into<String>,
        normalized_text: impl Into<String>,
        uroman_tokens: impl Into<String>,
    ) -> Self {
        Self {
            audio_start_sec,
            audio_filepath: audio_filepath.into(),
            duration,
            text: text.into(),
            normalized_text: normalized_text.into(),
            uroman_tokens: uroman_tokens.into(),
            word_count: 0,
            char_count: 0,
            word_rate: 0.0,
            char_rate: 0.0,
            quality_tag: QualityTag::Untagged,
            split: Split::Unassigned,
            id: id.into(),
            extra: BTreeMap::new(),
        }
    }

    #[cfg(test)]
    pub(crate) fn for_text(id: &str, normalized: &str) -> Self {
        Self::new(id, format!("{id}.wav"), 0.0, 1.0, normalized, normalized, "")
    }

    /// Chapter part of the id (`Mark_05` for `Mark_05_012`).
    pub fn chapter_id(&self) -> &str {
        self.id.rsplit_once('_').map_or(self.id.as_str(), |(c, _)| c)
    }

    /// File name component of `audio_filepath`.
    pub fn file_name(&self) -> &str {
        self.audio_filepath
            .rsplit(['/', '\\'])
            .next()
            .unwrap_or(&self.audio_filepath)
    }
}

/// Fills word/char counts and rates from `normalized_text` and `duration`.
/// Words are whitespace-delimited; characters are grapheme clusters other
/// than whitespace.
pub fn compute_quality_stats(record: &SegmentRecord) -> Result<SegmentRecord, CorpusError> {
    if !(record.duration > 0.0 && record.duration.is_finite()) {
        return Err(CorpusError::InvalidRecord {
            id: record.id.clone(),
            reason: format!("duration {} is not positive", record.duration),
        });
    }
    let word_count = record.normalized_text.split_whitespace().count();
    let char_count = record
        .normalized_text
        .graphemes(true)
        .filter(|g| !g.chars().all(char::is_whitespace))
        .count();
    Ok(SegmentRecord {
        word_count,
        char_count,
        word_rate: word_count as f64 / record.duration,
        char_rate: char_count as f64 / record.duration,
        ..record.clone()
    })
}
