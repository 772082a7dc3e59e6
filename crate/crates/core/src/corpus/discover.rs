use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use regex::Regex;

use super::CorpusError;

/// USFM book codes of the New Testament and the names used in chapter ids.
const BOOKS: [(&str, &str); 27] = [
    ("MAT", "Matthew"),
    ("MRK", "Mark"),
    ("LUK", "Luke"),
    ("JHN", "John"),
    ("ACT", "Acts"),
    ("ROM", "Romans"),
    ("1CO", "1Corinthians"),
    ("2CO", "2Corinthians"),
    ("GAL", "Galatians"),
    ("EPH", "Ephesians"),
    ("PHP", "Philippians"),
    ("COL", "Colossians"),
    ("1TH", "1Thessalonians"),
    ("2TH", "2Thessalonians"),
    ("1TI", "1Timothy"),
    ("2TI", "2Timothy"),
    ("TIT", "Titus"),
    ("PHM", "Philemon"),
    ("HEB", "Hebrews"),
    ("JAS", "James"),
    ("1PE", "1Peter"),
    ("2PE", "2Peter"),
    ("1JN", "1John"),
    ("2JN", "2John"),
    ("3JN", "3John"),
    ("JUD", "Jude"),
    ("REV", "Revelation"),
];

/// Distribution audio, e.g. `B01__01_Matthew__IKKTBLN1DA`.
static BIBLE_AUDIO: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[AB]\d+__(\d+)_([A-Za-z0-9]+?)_+[A-Za-z0-9]+$").unwrap());
/// Per-chapter text export, e.g. `ikkNT_070_MAT_01_read`.
static BOOK_CODE_TEXT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[A-Za-z]+_\d+_([0-9A-Z]{3})_(\d+)_read$").unwrap());
static CANONICAL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^([A-Za-z0-9]+)_(\d+)$").unwrap());

const AUDIO_EXTENSIONS: [&str; 2] = ["wav", "mp3"];
const TEXT_EXTENSIONS: [&str; 1] = ["txt"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChapterPair {
    /// `Book_NN`, e.g. `Matthew_01`.
    pub chapter_id: String,
    pub audio_path: PathBuf,
    pub text_path: PathBuf,
    /// Non-empty transcript lines in file order, trimmed.
    pub verse_lines: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unmatched {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Discovery {
    /// Sorted by chapter id.
    pub pairs: Vec<ChapterPair>,
    pub unmatched: Vec<Unmatched>,
}

fn canonical_book(name: &str) -> String {
    BOOKS
        .iter()
        .find(|(_, book)| book.eq_ignore_ascii_case(name))
        .map_or_else(|| name.to_string(), |(_, book)| book.to_string())
}

fn chapter_number(digits: &str) -> Option<String> {
    digits.parse::<u32>().ok().map(|n| format!("{n:02}"))
}

/// Canonical `Book_NN` key for a file name (extension ignored), or a reason
/// the name was not recognized.
pub fn canonical_key(file_name: &str) -> Result<String, String> {
    let stem = Path::new(file_name)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(file_name);
    if let Some(c) = BIBLE_AUDIO.captures(stem) {
        let chapter = chapter_number(&c[1]).ok_or("chapter number out of range")?;
        return Ok(format!("{}_{chapter}", canonical_book(&c[2])));
    }
    if let Some(c) = BOOK_CODE_TEXT.captures(stem) {
        let code = &c[1];
        let book = BOOKS
            .iter()
            .find(|(k, _)| *k == code)
            .map(|(_, b)| *b)
            .ok_or_else(|| format!("unknown book code {code}"))?;
        let chapter = chapter_number(&c[2]).ok_or("chapter number out of range")?;
        return Ok(format!("{book}_{chapter}"));
    }
    if let Some(c) = CANONICAL.captures(stem) {
        let chapter = chapter_number(&c[2]).ok_or("chapter number out of range")?;
        return Ok(format!("{}_{chapter}", canonical_book(&c[1])));
    }
    Err("file name does not follow a known chapter naming scheme".into())
}

fn list_files(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| CorpusError::io(dir, e))? {
        let entry = entry.map_err(|e| CorpusError::io(dir, e))?;
        let path = entry.path();
        if path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn has_extension(path: &Path, allowed: &[&str]) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| allowed.iter().any(|a| a.eq_ignore_ascii_case(e)))
}

fn key_files(
    files: Vec<PathBuf>,
    extensions: &[&str],
    kind: &str,
    unmatched: &mut Vec<Unmatched>,
) -> BTreeMap<String, PathBuf> {
    let mut keyed: BTreeMap<String, PathBuf> = BTreeMap::new();
    for path in files {
        if !has_extension(&path, extensions) {
            unmatched.push(Unmatched {
                path,
                reason: format!("not a {kind} file"),
            });
            continue;
        }
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        match canonical_key(name) {
            Ok(key) => {
                if let Some(first) = keyed.get(&key) {
                    unmatched.push(Unmatched {
                        reason: format!("duplicate {kind} for {key} (already have {})", first.display()),
                        path,
                    });
                } else {
                    keyed.insert(key, path);
                }
            }
            Err(reason) => unmatched.push(Unmatched { path, reason }),
        }
    }
    keyed
}

/// Matches chapter audio and transcripts by canonical key. Nothing on disk
/// is renamed or written; files that cannot be paired are reported in
/// [`Discovery::unmatched`].
pub fn discover_pairs(audio_dir: impl AsRef<Path>, text_dir: impl AsRef<Path>) -> Result<Discovery, CorpusError> {
    let mut unmatched = Vec::new();
    let audio = key_files(list_files(audio_dir.as_ref())?, &AUDIO_EXTENSIONS, "audio", &mut unmatched);
    let mut texts = key_files(list_files(text_dir.as_ref())?, &TEXT_EXTENSIONS, "text", &mut unmatched);

    let mut pairs = Vec::new();
    for (key, audio_path) in audio {
        let Some(text_path) = texts.remove(&key) else {
            unmatched.push(Unmatched {
                path: audio_path,
                reason: format!("no transcript for {key}"),
            });
            continue;
        };
        let content = std::fs::read_to_string(&text_path).map_err(|e| CorpusError::io(&text_path, e))?;
        let verse_lines: Vec<String> = content
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect();
        if verse_lines.is_empty() {
            unmatched.push(Unmatched {
                path: text_path,
                reason: "transcript has no text".into(),
            });
            continue;
        }
        pairs.push(ChapterPair {
            chapter_id: key,
            audio_path,
            text_path,
            verse_lines,
        });
    }
    for (key, path) in texts {
        unmatched.push(Unmatched {
            path,
            reason: format!("no audio for {key}"),
        });
    }
    unmatched.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(Discovery { pairs, unmatched })
}
