//! Transcript normalization, romanization, vocabularies and label encoding.
//!
//! Punctuation is every character in the Unicode punctuation categories
//! (Pc, Pd, Ps, Pe, Pi, Pf, Po) plus the ASCII characters `:;!?()[]"'`
//! (all of which are already Unicode punctuation). Digits are the Unicode
//! decimal digits (Nd). Both are deleted outright, not replaced by spaces.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use thiserror::Error;
use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::UnicodeNormalization;
use unicode_segmentation::UnicodeSegmentation;

use crate::ctc::LabelSequence;

pub const BLANK: &str = "<pad>";
pub const UNKNOWN: &str = "<unk>";
pub const WORD_DELIMITER: &str = "|";
pub const BLANK_INDEX: usize = 0;
pub const UNKNOWN_INDEX: usize = 1;
pub const DELIMITER_INDEX: usize = 2;

const EXTRA_PUNCTUATION: &str = ":;!?()[]\"'";

#[derive(Debug, Error)]
pub enum TextError {
    #[error("cannot build a vocabulary from an empty corpus")]
    EmptyCorpus,
    #[error("{path}: line {line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A transcript line after normalization: lowercase, no punctuation or
/// digits, single internal spaces, trimmed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NormalizedLine(String);

impl NormalizedLine {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Wraps text that is already known to be normalized.
    pub fn from_normalized(text: impl Into<String>) -> Self {
        Self(text.into())
    }

    pub fn graphemes(&self) -> impl Iterator<Item = &str> {
        self.0.graphemes(true)
    }
}

impl fmt::Display for NormalizedLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for NormalizedLine {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalizeOptions {
    pub lowercase: bool,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        Self { lowercase: true }
    }
}

pub fn is_punctuation(c: char) -> bool {
    use GeneralCategory::*;
    EXTRA_PUNCTUATION.contains(c)
        || matches!(
            get_general_category(c),
            ConnectorPunctuation
                | DashPunctuation
                | OpenPunctuation
                | ClosePunctuation
                | InitialPunctuation
                | FinalPunctuation
                | OtherPunctuation
        )
}

fn is_decimal_digit(c: char) -> bool {
    get_general_category(c) == GeneralCategory::DecimalNumber
}

fn is_combining_mark(c: char) -> bool {
    use GeneralCategory::*;
    matches!(
        get_general_category(c),
        NonspacingMark | SpacingMark | EnclosingMark
    )
}

pub fn normalize_line(raw: &str) -> NormalizedLine {
    normalize_line_with(raw, NormalizeOptions::default())
}

pub fn normalize_line_with(raw: &str, options: NormalizeOptions) -> NormalizedLine {
    let kept: String = raw
        .chars()
        .filter(|&c| !is_punctuation(c) && !is_decimal_digit(c))
        .collect();
    let cased = if options.lowercase { kept.to_lowercase() } else { kept };
    NormalizedLine(cased.split_whitespace().collect::<Vec<_>>().join(" "))
}

/// Normalizes every line, dropping empty results and exact duplicates
/// (first occurrence kept).
pub fn normalize_corpus<S: AsRef<str>>(lines: &[S]) -> Vec<NormalizedLine> {
    normalize_corpus_with(lines, NormalizeOptions::default())
}

pub fn normalize_corpus_with<S: AsRef<str>>(lines: &[S], options: NormalizeOptions) -> Vec<NormalizedLine> {
    let mut seen = BTreeSet::new();
    lines
        .iter()
        .map(|l| normalize_line_with(l.as_ref(), options))
        .filter(|l| !l.is_empty() && seen.insert(l.clone()))
        .collect()
}

/// Replacement spellings for characters left outside basic Latin once
/// combining marks are stripped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverrideTable(BTreeMap<char, String>);

impl Default for OverrideTable {
    fn default() -> Self {
        let pairs = [
            ('ɛ', "e"),
            ('ɔ', "o"),
            ('ŋ', "ng"),
            ('ɲ', "ny"),
            ('ƙ', "k"),
            ('ɓ', "b"),
            ('ɗ', "d"),
            ('ß', "ss"),
            ('æ', "ae"),
            ('œ', "oe"),
            ('ø', "o"),
            ('đ', "d"),
            ('ł', "l"),
            ('ı', "i"),
        ];
        Self(pairs.into_iter().map(|(c, s)| (c, s.to_owned())).collect())
    }
}

impl OverrideTable {
    pub fn empty() -> Self {
        Self(BTreeMap::new())
    }

    pub fn insert(&mut self, from: char, to: impl Into<String>) {
        self.0.insert(from, to.into());
    }

    pub fn get(&self, c: char) -> Option<&str> {
        self.0.get(&c).map(String::as_str)
    }

    /// Parses `from<TAB>to` lines; blank lines and `#` comments are skipped.
    /// Entries extend the default table.
    pub fn parse(text: &str, origin: &str) -> Result<Self, TextError> {
        let mut table = Self::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: &str| TextError::Format {
                path: origin.to_owned(),
                line: i + 1,
                message: message.to_owned(),
            };
            let (from, to) = line.split_once('\t').ok_or_else(|| err("expected `from<TAB>to`"))?;
            let mut chars = from.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => table.insert(c, to),
                _ => return Err(err("`from` must be a single character")),
            }
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TextError> {
        let path = path.as_ref();
        Self::parse(&std::fs::read_to_string(path)?, &path.display().to_string())
    }
}

/// Romanized token string: canonical decomposition, combining marks removed,
/// remaining non-ASCII characters mapped through `table` (or dropped), then
/// one character per token, with `|` standing for each word gap.
pub fn romanize(text: &NormalizedLine, table: &OverrideTable) -> String {
    let mut tokens: Vec<String> = Vec::new();
    for word in text.as_str().split(' ') {
        let mut word_tokens = Vec::new();
        for c in word.nfd().filter(|&c| !is_combining_mark(c)) {
            if c.is_ascii_alphabetic() {
                word_tokens.push(c.to_ascii_lowercase().to_string());
            } else if let Some(mapped) = table.get(c) {
                word_tokens.extend(mapped.chars().filter(|m| !m.is_whitespace()).map(String::from));
            }
        }
        if word_tokens.is_empty() {
            continue;
        }
        if !tokens.is_empty() {
            tokens.push(WORD_DELIMITER.to_owned());
        }
        tokens.append(&mut word_tokens);
    }
    tokens.join(" ")
}

/// Ordered token inventory. Indices 0, 1 and 2 are always `<pad>` (blank),
/// `<unk>` and `|` (word delimiter).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    fn from_tokens_unchecked(tokens: Vec<String>) -> Self {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self { tokens, index }
    }

    /// Validates reserved positions and uniqueness.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self, String> {
        let reserved = [BLANK, UNKNOWN, WORD_DELIMITER];
        for (i, r) in reserved.iter().enumerate() {
            if tokens.get(i).map(String::as_str) != Some(*r) {
                return Err(format!("token {i} must be {r:?}"));
            }
        }
        let mut seen = BTreeSet::new();
        for (i, t) in tokens.iter().enumerate() {
            if !seen.insert(t.as_str()) {
                return Err(format!("token {t:?} at index {i} is a duplicate"));
            }
            if i >= reserved.len() && t.graphemes(true).count() != 1 {
                return Err(format!("token {t:?} at index {i} is not a single grapheme cluster"));
            }
        }
        Ok(Self::from_tokens_unchecked(tokens))
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(String::as_str)
    }

    /// Text for a label sequence: the delimiter becomes a space, blanks are
    /// skipped, and the result is whitespace-collapsed.
    pub fn decode(&self, labels: &[usize]) -> String {
        let mut out = String::new();
        for &l in labels {
            match l {
                BLANK_INDEX => {}
                DELIMITER_INDEX => out.push(' '),
                _ => out.push_str(self.token(l).unwrap_or(UNKNOWN)),
            }
        }
        out.split_whitespace().collect::<Vec<_>>().join(" ")
    }

    /// One token per line; index = line number - 1.
    pub fn to_file_string(&self) -> String {
        let mut s = self.tokens.join("\n");
        s.push('\n');
        s
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, TextError> {
        let tokens: Vec<String> = text.lines().map(str::to_owned).collect();
        Self::from_tokens(tokens).map_err(|message| TextError::Format {
            path: origin.to_owned(),
            line: 0,
            message,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TextError> {
        let path = path.as_ref();
        Self::parse(&std::fs::read_to_string(path)?, &path.display().to_string())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TextError> {
        std::fs::write(path, self.to_file_string())?;
        Ok(())
    }
}

/// Reserved tokens followed by the sorted distinct grapheme clusters of the
/// corpus (whitespace excluded).
pub fn build_vocab(corpus: &[NormalizedLine]) -> Result<Vocab, TextError> {
    if corpus.is_empty() {
        return Err(TextError::EmptyCorpus);
    }
    let reserved = [BLANK, UNKNOWN, WORD_DELIMITER];
    let graphemes: BTreeSet<&str> = corpus
        .iter()
        .flat_map(|l| l.graphemes())
        .filter(|g| !g.chars().all(char::is_whitespace) && !reserved.contains(g))
        .collect();
    let tokens = reserved
        .iter()
        .copied()
        .chain(graphemes)
        .map(str::to_owned)
        .collect();
    Ok(Vocab::from_tokens_unchecked(tokens))
}

/// One label per grapheme cluster; spaces become the word delimiter and
/// unseen clusters become `<unk>`.
pub fn encode_labels(text: &NormalizedLine, vocab: &Vocab) -> LabelSequence {
    text.graphemes()
        .map(|g| {
            if g.chars().all(char::is_whitespace) {
                DELIMITER_INDEX
            } else {
                vocab.index_of(g).filter(|&i| i != BLANK_INDEX).unwrap_or(UNKNOWN_INDEX)
            }
        })
        .collect()
}
