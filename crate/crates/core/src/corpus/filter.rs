use std::fmt;

use serde::{Deserialize, Serialize};

use super::{CorpusError, QualityTag, SegmentRecord};

/// Keep/reject thresholds. `None` disables a bound; bounds are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterRules {
    pub min_duration: Option<f64>,
    pub max_duration: Option<f64>,
    pub min_word_rate: Option<f64>,
    pub max_word_rate: Option<f64>,
    pub min_char_rate: Option<f64>,
    pub max_char_rate: Option<f64>,
    pub require_tag_high: bool,
}

impl Default for FilterRules {
    fn default() -> Self {
        Self {
            min_duration: Some(1.0),
            max_duration: Some(30.0),
            min_word_rate: Some(0.4),
            max_word_rate: Some(6.0),
            min_char_rate: Some(2.0),
            max_char_rate: Some(30.0),
            require_tag_high: true,
        }
    }
}

impl FilterRules {
    /// Rules that keep everything.
    pub fn disabled() -> Self {
        Self {
            min_duration: None,
            max_duration: None,
            min_word_rate: None,
            max_word_rate: None,
            min_char_rate: None,
            max_char_rate: None,
            require_tag_high: false,
        }
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        for (name, min, max) in [
            ("duration", self.min_duration, self.max_duration),
            ("word_rate", self.min_word_rate, self.max_word_rate),
            ("char_rate", self.min_char_rate, self.max_char_rate),
        ] {
            if [min, max].iter().flatten().any(|v| v.is_nan()) {
                return Err(CorpusError::Config(format!("{name} bound is NaN")));
            }
            if let (Some(lo), Some(hi)) = (min, max) {
                if lo > hi {
                    return Err(CorpusError::Config(format!("min_{name} {lo} exceeds max_{name} {hi}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RejectReason {
    DurationBelow { min: f64, value: f64 },
    DurationAbove { max: f64, value: f64 },
    WordRateBelow { min: f64, value: f64 },
    WordRateAbove { max: f64, value: f64 },
    CharRateBelow { min: f64, value: f64 },
    CharRateAbove { max: f64, value: f64 },
    NotHigh { tag: QualityTag },
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DurationBelow { min, value } => write!(f, "duration {value:.3}s below {min}s"),
            Self::DurationAbove { max, value } => write!(f, "duration {value:.3}s above {max}s"),
            Self::WordRateBelow { min, value } => write!(f, "word rate {value:.3}/s below {min}/s"),
            Self::WordRateAbove { max, value } => write!(f, "word rate {value:.3}/s above {max}/s"),
            Self::CharRateBelow { min, value } => write!(f, "char rate {value:.3}/s below {min}/s"),
            Self::CharRateAbove { max, value } => write!(f, "char rate {value:.3}/s above {max}/s"),
            Self::NotHigh { tag } => write!(f, "tagged {tag}, not High"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    pub record: SegmentRecord,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterOutcome {
    pub kept: Vec<SegmentRecord>,
    pub rejected: Vec<Rejection>,
}

fn first_violation(r: &SegmentRecord, rules: &FilterRules) -> Option<RejectReason> {
    use RejectReason::*;
    let checks = [
        (rules.min_duration, r.duration, true),
        (rules.max_duration, r.duration, false),
        (rules.min_word_rate, r.word_rate, true),
        (rules.max_word_rate, r.word_rate, false),
        (rules.min_char_rate, r.char_rate, true),
        (rules.max_char_rate, r.char_rate, false),
    ];
    for (i, (bound, value, is_min)) in checks.into_iter().enumerate() {
        let Some(bound) = bound else { continue };
        let violated = if is_min { value < bound } else { value > bound };
        if violated {
            return Some(match i {
                0 => DurationBelow { min: bound, value },
                1 => DurationAbove { max: bound, value },
                2 => WordRateBelow { min: bound, value },
                3 => WordRateAbove { max: bound, value },
                4 => CharRateBelow { min: bound, value },
                _ => CharRateAbove { max: bound, value },
            });
        }
    }
    if rules.require_tag_high && r.quality_tag != QualityTag::High {
        return Some(NotHigh { tag: r.quality_tag });
    }
    None
}

/// Splits records into kept and rejected, preserving input order in both.
/// Rules are checked in the order duration, word rate, char rate, tag, and a
/// rejection reports the first one violated.
pub fn filter_segments(records: Vec<SegmentRecord>, rules: &FilterRules) -> Result<FilterOutcome, CorpusError> {
    rules.validate()?;
    let mut outcome = FilterOutcome::default();
    for record in records {
        match first_violation(&record, rules) {
            None => outcome.kept.push(record),
            Some(reason) => outcome.rejected.push(Rejection { record, reason }),
        }
    }
    Ok(outcome)
}
