use std::path::PathBuf;

use log::warn;

use super::{compute_quality_stats, ChapterPair, CorpusError, SegmentRecord};
use crate::ctc::{forced_align, AlignOptions, ForcedAlignment, LabelSequence, LogProbMatrix};
use crate::textnorm::{
    encode_labels, normalize_line_with, romanize, NormalizeOptions, NormalizedLine, OverrideTable, Vocab,
    BLANK_INDEX, DELIMITER_INDEX,
};

#[derive(Debug, Clone, Default)]
pub struct ChapterAlignOptions {
    pub align: AlignOptions,
    pub normalize: NormalizeOptions,
    pub overrides: OverrideTable,
    /// Directory the per-verse WAV files will be written to; only used to
    /// fill `audio_filepath`.
    pub segment_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct ChapterAlignment {
    /// One record per non-empty verse, in verse order.
    pub records: Vec<SegmentRecord>,
    /// Frame ranges `[start, end)` matching `records`.
    pub frame_spans: Vec<(usize, usize)>,
    /// 1-based line numbers of verses that normalized to nothing.
    pub skipped_verses: Vec<usize>,
    pub alignment: ForcedAlignment,
}

struct Verse {
    line: usize,
    raw: String,
    normalized: NormalizedLine,
    first_label: usize,
    last_label: usize,
}

/// Force-aligns a whole chapter and cuts it into verses.
///
/// Verses are joined with the word delimiter into one label sequence. A
/// verse spans from the first frame of its first token to the last frame of
/// its last token, so the delimiter frames between verses belong to neither.
pub fn align_chapter(
    pair: &ChapterPair,
    emissions: &LogProbMatrix,
    vocab: &Vocab,
    options: &ChapterAlignOptions,
) -> Result<ChapterAlignment, CorpusError> {
    let chapter = &pair.chapter_id;
    let fail = |reason: String| CorpusError::Chapter {
        chapter: chapter.clone(),
        reason,
    };
    if emissions.vocab_size() != vocab.len() {
        return Err(fail(format!(
            "emissions have {} columns but the vocabulary has {} tokens",
            emissions.vocab_size(),
            vocab.len()
        )));
    }
    if !emissions.tokens().is_empty() && emissions.tokens() != vocab.tokens() {
        return Err(fail("emission token names differ from the vocabulary".into()));
    }
    if emissions.blank() != BLANK_INDEX {
        return Err(fail(format!("emission blank index is {}, expected {BLANK_INDEX}", emissions.blank())));
    }

    let mut labels = Vec::new();
    let mut verses = Vec::new();
    let mut skipped_verses = Vec::new();
    for (i, raw) in pair.verse_lines.iter().enumerate() {
        let normalized = normalize_line_with(raw, options.normalize);
        if normalized.is_empty() {
            warn!("{chapter}: verse line {} normalizes to nothing, skipping", i + 1);
            skipped_verses.push(i + 1);
            continue;
        }
        if !labels.is_empty() {
            labels.push(DELIMITER_INDEX);
        }
        let first_label = labels.len();
        labels.extend(encode_labels(&normalized, vocab).into_vec());
        verses.push(Verse {
            line: i + 1,
            raw: raw.clone(),
            normalized,
            first_label,
            last_label: labels.len() - 1,
        });
    }
    if verses.is_empty() {
        return Err(fail("no verse has any text after normalization".into()));
    }

    let alignment = forced_align(emissions, &LabelSequence::new(labels), &options.align).map_err(|source| {
        CorpusError::Alignment {
            chapter: chapter.clone(),
            source,
        }
    })?;

    let fd = emissions.frame_duration();
    let mut records = Vec::with_capacity(verses.len());
    let mut frame_spans = Vec::with_capacity(verses.len());
    for verse in verses {
        let start = alignment.spans[verse.first_label].start_frame;
        let end = alignment.spans[verse.last_label].end_frame;
        let id = format!("{chapter}_{:03}", verse.line);
        let path = options.segment_dir.join(format!("{id}.wav"));
        let record = SegmentRecord::new(
            id,
            path.to_string_lossy(),
            start as f64 * fd,
            (end - start) as f64 * fd,
            verse.raw,
            verse.normalized.as_str(),
            romanize(&verse.normalized, &options.overrides),
        );
        records.push(compute_quality_stats(&record)?);
        frame_spans.push((start, end));
    }
    Ok(ChapterAlignment {
        records,
        frame_spans,
        skipped_verses,
        alignment,
    })
}
