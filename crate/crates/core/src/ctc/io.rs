//! Text emission-matrix files.
//!
//! ```text
//! T V frame_duration_sec
//! <pad> a b c ...            (V tokens; `<pad>` marks the blank)
//! -0.1 -2.9 -4.0 ...         (T lines of V log-probabilities)
//! ```

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use thiserror::Error;

use super::{check_row, LogProbMatrix};

pub const BLANK_TOKEN: &str = "<pad>";

#[derive(Debug, Error)]
pub enum EmissionFileError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_err(line: usize, message: impl Into<String>) -> EmissionFileError {
    EmissionFileError::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_emissions(text: &str) -> Result<LogProbMatrix, EmissionFileError> {
    let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));

    let header = lines.next().unwrap_or_default();
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(parse_err(1, "expected `T V frame_duration_sec`"));
    }
    let frames: usize = fields[0]
        .parse()
        .map_err(|_| parse_err(1, format!("bad frame count {:?}", fields[0])))?;
    let vocab: usize = fields[1]
        .parse()
        .map_err(|_| parse_err(1, format!("bad vocabulary size {:?}", fields[1])))?;
    let frame_duration: f64 = fields[2]
        .parse()
        .map_err(|_| parse_err(1, format!("bad frame duration {:?}", fields[2])))?;
    if frames == 0 || vocab < 2 {
        return Err(parse_err(1, "need at least one frame and two tokens"));
    }
    if !(frame_duration > 0.0 && frame_duration.is_finite()) {
        return Err(parse_err(1, "frame duration must be positive"));
    }

    let tokens: Vec<String> = lines
        .next()
        .unwrap_or_default()
        .split_whitespace()
        .map(str::to_owned)
        .collect();
    if tokens.len() != vocab {
        return Err(parse_err(2, format!("expected {vocab} tokens, found {}", tokens.len())));
    }
    let blank = tokens
        .iter()
        .position(|t| t == BLANK_TOKEN)
        .ok_or_else(|| parse_err(2, format!("no {BLANK_TOKEN} token")))?;

    let mut values = Array2::zeros((frames, vocab));
    for t in 0..frames {
        let line_no = t + 3;
        let line = lines
            .next()
            .ok_or_else(|| parse_err(line_no, format!("missing frame {t} of {frames}")))?;
        let mut n = 0;
        for field in line.split_whitespace() {
            if n == vocab {
                return Err(parse_err(line_no, format!("more than {vocab} values")));
            }
            values[[t, n]] = field
                .parse::<f64>()
                .map_err(|_| parse_err(line_no, format!("bad value {field:?}")))?;
            n += 1;
        }
        if n != vocab {
            return Err(parse_err(line_no, format!("expected {vocab} values, found {n}")));
        }
        check_row(values.row(t)).map_err(|e| parse_err(line_no, e))?;
    }
    if let Some((i, _)) = lines.enumerate().find(|(_, l)| !l.trim().is_empty()) {
        return Err(parse_err(frames + 3 + i, "unexpected content after the last frame"));
    }

    LogProbMatrix::new(values, frame_duration, blank)
        .and_then(|m| m.with_tokens(tokens))
        .map_err(|e| parse_err(1, e.to_string()))
}

pub fn read_emissions(path: impl AsRef<Path>) -> Result<LogProbMatrix, EmissionFileError> {
    parse_emissions(&std::fs::read_to_string(path)?)
}

/// Writes `emissions` in the text format. Matrices without token names get
/// `<pad>` at the blank and their column index elsewhere.
pub fn write_emissions(emissions: &LogProbMatrix, mut out: impl Write) -> std::io::Result<()> {
    let mut buf = String::new();
    let _ = writeln!(
        buf,
        "{} {} {}",
        emissions.num_frames(),
        emissions.vocab_size(),
        emissions.frame_duration()
    );
    let tokens: Vec<String> = if emissions.tokens().is_empty() {
        (0..emissions.vocab_size())
            .map(|k| if k == emissions.blank() { BLANK_TOKEN.to_owned() } else { k.to_string() })
            .collect()
    } else {
        emissions.tokens().to_vec()
    };
    let _ = writeln!(buf, "{}", tokens.join(" "));
    for row in emissions.values().rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(buf, "{}", line.join(" "));
    }
    out.write_all(buf.as_bytes())
}
