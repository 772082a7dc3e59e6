//! Reviewer quality tags, kept in an append-only JSON-lines log next to the
//! manifest.
//!
//! Every `set` appends one line and syncs it to disk before updating the
//! in-memory map, so an acknowledged tag survives a crash. Loading replays
//! the log; later lines win.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{QualityTag, SegmentRecord};

#[derive(Debug, Error)]
pub enum TagError {
    #[error("tag must be one of High, Low, Fixable (got {0:?})")]
    InvalidTag(String),
    #[error("{path} line {line}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagEntry {
    pub tag: QualityTag,
    pub note: String,
    pub updated_at: DateTime<Utc>,
}

#[derive(Serialize, Deserialize)]
struct LogLine {
    id: String,
    #[serde(flatten)]
    entry: TagEntry,
}

#[derive(Debug, Default)]
pub struct TagStore {
    entries: BTreeMap<String, TagEntry>,
    log: Option<(PathBuf, File)>,
}

/// Parses an assignable tag name.
pub fn parse_assignable(tag: &str) -> Result<QualityTag, TagError> {
    tag.parse::<QualityTag>()
        .ok()
        .filter(|t| QualityTag::ASSIGNABLE.contains(t))
        .ok_or_else(|| TagError::InvalidTag(tag.to_string()))
}

impl TagStore {
    /// A store that is not backed by a file.
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Replays the log at `path`, creating it if absent. A torn final line
    /// (no trailing newline) is dropped with a warning; any other malformed
    /// line is an error.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, TagError> {
        let path = path.as_ref().to_path_buf();
        let io = |source| TagError::Io {
            path: path.clone(),
            source,
        };
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(io(e)),
        };
        let mut entries = BTreeMap::new();
        let lines: Vec<&str> = text.split('\n').collect();
        let mut valid_len = 0;
        for (i, line) in lines.iter().enumerate() {
            let is_last = i + 1 == lines.len();
            if line.trim().is_empty() {
                if !is_last {
                    valid_len += line.len() + 1;
                }
                continue;
            }
            match serde_json::from_str::<LogLine>(line) {
                Ok(l) if QualityTag::ASSIGNABLE.contains(&l.entry.tag) => {
                    entries.insert(l.id, l.entry);
                    valid_len += line.len() + 1;
                }
                Ok(_) if !is_last => {
                    return Err(TagError::Corrupt {
                        path,
                        line: i + 1,
                        message: "tag is not High, Low or Fixable".into(),
                    })
                }
                Err(e) if !is_last => {
                    return Err(TagError::Corrupt {
                        path,
                        line: i + 1,
                        message: e.to_string(),
                    })
                }
                _ => warn!("{}: dropping incomplete final line {}", path.display(), i + 1),
            }
        }
        let mut file = OpenOptions::new().create(true).append(true).open(&path).map_err(io)?;
        if valid_len < text.len() {
            file.set_len(valid_len as u64).map_err(io)?;
        } else if valid_len > text.len() {
            // last entry is complete but unterminated
            file.write_all(b"\n").map_err(io)?;
        }
        Ok(Self {
            entries,
            log: Some((path, file)),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.log.as_ref().map(|(p, _)| p.as_path())
    }

    /// Upserts a tag, writing it through to the log first.
    pub fn set(&mut self, id: &str, tag: QualityTag, note: &str) -> Result<TagEntry, TagError> {
        if !QualityTag::ASSIGNABLE.contains(&tag) {
            return Err(TagError::InvalidTag(tag.to_string()));
        }
        let entry = TagEntry {
            tag,
            note: note.to_string(),
            updated_at: Utc::now(),
        };
        if let Some((path, file)) = &mut self.log {
            let mut line = serde_json::to_string(&LogLine {
                id: id.to_string(),
                entry: entry.clone(),
            })
            .expect("tag entries always serialize");
            line.push('\n');
            let io = |source| TagError::Io {
                path: path.clone(),
                source,
            };
            file.write_all(line.as_bytes()).map_err(io)?;
            file.sync_data().map_err(io)?;
        }
        self.entries.insert(id.to_string(), entry.clone());
        Ok(entry)
    }

    pub fn get(&self, id: &str) -> Option<&TagEntry> {
        self.entries.get(id)
    }

    pub fn tag_of(&self, id: &str) -> QualityTag {
        self.get(id).map_or(QualityTag::Untagged, |e| e.tag)
    }

    pub fn entries(&self) -> &BTreeMap<String, TagEntry> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Copies stored tags onto records; records without an entry become
    /// `Untagged`.
    pub fn apply(&self, records: &mut [SegmentRecord]) {
        for r in records {
            r.quality_tag = self.tag_of(&r.id);
        }
    }
}
