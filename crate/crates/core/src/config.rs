//! TOML configuration shared by the command-line tool and the review
//! server. Every key is optional; missing keys take the defaults below.
//!
//! ```toml
//! [align]
//! wildcard = false
//! wildcard_logprob = -0.6931471805599453   # ln 0.5
//!
//! [text]
//! lowercase = true
//! romanization_overrides = "overrides.tsv"
//!
//! [audio]
//! target_dbfs = -1.0
//!
//! [filter]
//! min_duration = 1.0
//! max_duration = 30.0
//! min_word_rate = 0.4
//! max_word_rate = 6.0
//! min_char_rate = 2.0
//! max_char_rate = 30.0
//! require_tag_high = true
//!
//! [split]
//! ratio = 0.8
//! seed = 0        # ChaCha8 stream seed; same seed, same split on any machine
//! unit = "segment" # or "chapter"
//!
//! [review]
//! port = 8517
//! peak_buckets = 800
//! static_dir = "review_ui/dist"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::{DEFAULT_PEAK_BUCKETS, DEFAULT_TARGET_DBFS};
use crate::corpus::{FilterRules, SplitUnit};
use crate::ctc::AlignOptions;
use crate::textnorm::{NormalizeOptions, OverrideTable, TextError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}: {source}")]
    Parse {
        origin: String,
        #[source]
        source: toml::de::Error,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Text(#[from] TextError),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub align: AlignConfig,
    pub text: TextConfig,
    pub audio: AudioConfig,
    pub filter: FilterRules,
    pub split: SplitConfig,
    pub review: ReviewConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignConfig {
    pub wildcard: bool,
    pub wildcard_logprob: f64,
}

impl Default for AlignConfig {
    fn default() -> Self {
        let d = AlignOptions::default();
        Self {
            wildcard: d.wildcard,
            wildcard_logprob: d.wildcard_logprob,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextConfig {
    pub lowercase: bool,
    /// Tab-separated `char<TAB>replacement` file replacing the built-in
    /// romanization table.
    pub romanization_overrides: Option<PathBuf>,
}

impl Default for TextConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            romanization_overrides: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AudioConfig {
    pub target_dbfs: f64,
}

impl Default for AudioConfig {
    fn default() -> Self {
        Self {
            target_dbfs: DEFAULT_TARGET_DBFS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub ratio: f64,
    pub seed: u64,
    pub unit: SplitUnit,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            ratio: 0.8,
            seed: 0,
            unit: SplitUnit::Segment,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReviewConfig {
    pub port: u16,
    pub peak_buckets: usize,
    pub static_dir: Option<PathBuf>,
}

impl Default for ReviewConfig {
    fn default() -> Self {
        Self {
            port: 8517,
            peak_buckets: DEFAULT_PEAK_BUCKETS,
            static_dir: None,
        }
    }
}

impl Config {
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text).map_err(|source| ConfigError::Parse {
            origin: origin.to_string(),
            source,
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Loads a config file; relative paths inside it are resolved against
    /// the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::parse(&text, &path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut config.text.romanization_overrides, &mut config.review.static_dir]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.align.wildcard_logprob <= 0.0) {
            return Err(ConfigError::Invalid(format!(
                "align.wildcard_logprob {} must be a log-probability (<= 0)",
                self.align.wildcard_logprob
            )));
        }
        if !(self.split.ratio > 0.0 && self.split.ratio < 1.0) {
            return Err(ConfigError::Invalid(format!("split.ratio {} is not in (0, 1)", self.split.ratio)));
        }
        if !self.audio.target_dbfs.is_finite() || self.audio.target_dbfs > 0.0 {
            return Err(ConfigError::Invalid(format!(
                "audio.target_dbfs {} must be at most 0",
                self.audio.target_dbfs
            )));
        }
        if self.review.peak_buckets == 0 {
            return Err(ConfigError::Invalid("review.peak_buckets must be at least 1".into()));
        }
        self.filter
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn align_options(&self) -> AlignOptions {
        AlignOptions {
            wildcard: self.align.wildcard,
            wildcard_logprob: self.align.wildcard_logprob,
        }
    }

    pub fn normalize_options(&self) -> NormalizeOptions {
        NormalizeOptions {
            lowercase: self.text.lowercase,
        }
    }

    pub fn override_table(&self) -> Result<OverrideTable, ConfigError> {
        match &self.text.romanization_overrides {
            Some(path) => Ok(OverrideTable::load(path)?),
            None => Ok(OverrideTable::default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = Config::parse("", "test").unwrap();
        assert_eq!(c, Config::default());
        assert_eq!(c.review.port, 8517);
        assert_eq!(c.split.ratio, 0.8);
        assert_eq!(c.filter.min_duration, Some(1.0));
        assert!((c.align.wildcard_logprob - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn partial_sections_merge_with_defaults() {
        let c = Config::parse("[split]\nseed = 9\nunit = \"chapter\"\n[filter]\nrequire_tag_high = false\n", "t").unwrap();
        assert_eq!(c.split.seed, 9);
        assert_eq!(c.split.unit, SplitUnit::Chapter);
        assert_eq!(c.split.ratio, 0.8);
        assert!(!c.filter.require_tag_high);
        assert_eq!(c.filter.max_char_rate, Some(30.0));
    }

    #[test]
    fn rejects_unknown_and_invalid_keys() {
        assert!(matches!(Config::parse("[split]\nratoi = 0.5\n", "t"), Err(ConfigError::Parse { .. })));
        assert!(matches!(Config::parse("colour = 1\n", "t"), Err(ConfigError::Parse { .. })));
        assert!(matches!(Config::parse("[split]\nratio = 1.5\n", "t"), Err(ConfigError::Invalid(_))));
        assert!(matches!(
            Config::parse("[filter]\nmin_duration = 5.0\nmax_duration = 2.0\n", "t"),
            Err(ConfigError::Invalid(_))
        ));
        assert!(Config::parse("[align]\nwildcard_logprob = 0.3\n", "t").is_err());
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("versekit.toml");
        std::fs::write(&path, "[text]\nromanization_overrides = \"ov.tsv\"\n").unwrap();
        let c = Config::load(&path).unwrap();
        assert_eq!(c.text.romanization_overrides, Some(dir.path().join("ov.tsv")));
    }
}
