use std::io::{BufWriter, Write};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{CorpusError, SegmentRecord, Split};

/// Writes one JSON object per line.
pub fn emit_manifest(records: &[SegmentRecord], mut out: impl Write) -> Result<(), CorpusError> {
    let io = |e| CorpusError::io("<manifest>", e);
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| CorpusError::InvalidRecord {
            id: r.id.clone(),
            reason: e.to_string(),
        })?;
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn write_manifest(records: &[SegmentRecord], path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| CorpusError::io(path, e))?;
    emit_manifest(records, BufWriter::new(file))
}

/// Parses JSON-lines manifest text. Blank lines are skipped. Records without
/// an `x_id` get the stem of their audio file as id.
pub fn parse_manifest(text: &str) -> Result<Vec<SegmentRecord>, CorpusError> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut record: SegmentRecord = serde_json::from_str(line).map_err(|e| CorpusError::Manifest {
            line: i + 1,
            message: e.to_string(),
        })?;
        if record.id.is_empty() {
            let name = record.file_name();
            record.id = name.rsplit_once('.').map_or(name, |(stem, _)| stem).to_string();
        }
        if !record.extra.is_empty() {
            let names: Vec<&str> = record.extra.keys().map(String::as_str).collect();
            warn!("manifest line {}: keeping unknown fields {}", i + 1, names.join(", "));
        }
        records.push(record);
    }
    Ok(records)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<SegmentRecord>, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    parse_manifest(&text)
}

/// One row of the training metadata CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataRow {
    pub file_path: String,
    pub transcription: String,
    pub split: String,
    pub file_name: String,
}

/// Writes `file_path,transcription,split,file_name` rows; the transcription
/// is the normalized text. Every record needs a train or test split.
pub fn emit_metadata_csv(records: &[SegmentRecord], out: impl Write) -> Result<(), CorpusError> {
    if let Some(r) = records.iter().find(|r| r.split == Split::Unassigned) {
        return Err(CorpusError::UnassignedSplit { id: r.id.clone() });
    }
    let mut writer = csv::Writer::from_writer(out);
    for r in records {
        writer.serialize(MetadataRow {
            file_path: r.audio_filepath.clone(),
            transcription: r.normalized_text.clone(),
            split: r.split.to_string(),
            file_name: r.file_name().to_string(),
        })?;
    }
    if records.is_empty() {
        writer.write_record(["file_path", "transcription", "split", "file_name"])?;
    }
    writer.flush().map_err(|e| CorpusError::io("<metadata>", e))
}

pub fn parse_metadata_csv(text: &str) -> Result<Vec<MetadataRow>, CorpusError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["file_path", "transcription", "split", "file_name"] {
        return Err(CorpusError::Manifest {
            line: 1,
            message: format!("unexpected CSV header {:?}", headers.iter().collect::<Vec<_>>()),
        });
    }
    Ok(reader.deserialize().collect::<Result<Vec<MetadataRow>, _>>()?)
}
