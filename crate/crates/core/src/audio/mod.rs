//! WAV ingestion, conversion to mono 16 kHz, peak normalization and cutting.

mod resample;
mod wav;

use thiserror::Error;

pub use resample::{resample, SincResampler};
pub use wav::{decode_wav, encode_wav, load_wav, write_wav};

pub const TARGET_SAMPLE_RATE: u32 = 16_000;
pub const DEFAULT_TARGET_DBFS: f64 = -1.0;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("malformed WAV at byte {offset}: {message}")]
    Malformed { offset: usize, message: String },
    #[error("unsupported audio format: {0}")]
    Unsupported(String),
    #[error("invalid audio buffer: {0}")]
    InvalidBuffer(String),
    #[error("span [{start_sec:.3}s, {end_sec:.3}s) is outside the {duration_sec:.3}s buffer")]
    OutOfRange {
        start_sec: f64,
        end_sec: f64,
        duration_sec: f64,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Interleaved samples in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f32>,
    sample_rate: u32,
    channels: usize,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f32>, sample_rate: u32, channels: usize) -> Result<Self, AudioError> {
        if channels == 0 {
            return Err(AudioError::InvalidBuffer("zero channels".into()));
        }
        if sample_rate == 0 {
            return Err(AudioError::InvalidBuffer("zero sample rate".into()));
        }
        if samples.len() % channels != 0 {
            return Err(AudioError::InvalidBuffer(format!(
                "{} samples do not divide into {channels} channels",
                samples.len()
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
            channels,
        })
    }

    pub fn mono(samples: Vec<f32>, sample_rate: u32) -> Result<Self, AudioError> {
        Self::new(samples, sample_rate, 1)
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f32> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Samples per channel.
    pub fn frames(&self) -> usize {
        self.samples.len() / self.channels
    }

    pub fn duration_sec(&self) -> f64 {
        self.frames() as f64 / self.sample_rate as f64
    }

    pub fn peak(&self) -> f32 {
        self.samples.iter().fold(0.0f32, |m, s| m.max(s.abs()))
    }
}

/// Averages channels and resamples to 16 kHz. Mono 16 kHz input is returned
/// unchanged.
pub fn to_mono_16k(buf: &AudioBuffer) -> AudioBuffer {
    let mono: Vec<f32> = if buf.channels == 1 {
        buf.samples.clone()
    } else {
        buf.samples
            .chunks_exact(buf.channels)
            .map(|frame| (frame.iter().map(|&s| s as f64).sum::<f64>() / buf.channels as f64) as f32)
            .collect()
    };
    AudioBuffer {
        samples: resample(&mono, buf.sample_rate, TARGET_SAMPLE_RATE),
        sample_rate: TARGET_SAMPLE_RATE,
        channels: 1,
    }
}

/// Scales so that the largest `|sample|` equals `10^(target_dbfs / 20)`.
/// All-zero buffers are returned unchanged.
pub fn peak_normalize(buf: &AudioBuffer, target_dbfs: f64) -> AudioBuffer {
    let peak = buf.peak() as f64;
    if peak == 0.0 {
        return buf.clone();
    }
    let gain = 10f64.powf(target_dbfs / 20.0) / peak;
    AudioBuffer {
        samples: buf.samples.iter().map(|&s| (s as f64 * gain) as f32).collect(),
        sample_rate: buf.sample_rate,
        channels: buf.channels,
    }
}

fn sample_index(time_sec: f64, sample_rate: u32, len: usize) -> usize {
    ((time_sec * sample_rate as f64).round().max(0.0) as usize).min(len)
}

/// Cuts `[start_sec, end_sec)` from a mono buffer. Sample indices are
/// `round(time * rate)` clipped to the buffer; `slack_sec` past the end is
/// tolerated.
pub fn cut_seconds(
    buf: &AudioBuffer,
    start_sec: f64,
    end_sec: f64,
    slack_sec: f64,
) -> Result<AudioBuffer, AudioError> {
    if buf.channels != 1 {
        return Err(AudioError::InvalidBuffer(format!(
            "cutting needs mono audio, got {} channels",
            buf.channels
        )));
    }
    let duration_sec = buf.duration_sec();
    if !(start_sec >= 0.0 && start_sec < end_sec) || end_sec > duration_sec + slack_sec + 1e-9 {
        return Err(AudioError::OutOfRange {
            start_sec,
            end_sec,
            duration_sec,
        });
    }
    let len = buf.samples.len();
    let a = sample_index(start_sec, buf.sample_rate, len);
    let b = sample_index(end_sec, buf.sample_rate, len);
    Ok(AudioBuffer {
        samples: buf.samples[a..b].to_vec(),
        sample_rate: buf.sample_rate,
        channels: 1,
    })
}

/// Samples for frames `[start_frame, end_frame)` of an emission matrix with
/// the given frame duration. One frame of slack is allowed past the end.
pub fn cut_segment(
    buf: &AudioBuffer,
    start_frame: usize,
    end_frame: usize,
    frame_duration: f64,
) -> Result<AudioBuffer, AudioError> {
    if start_frame >= end_frame {
        return Err(AudioError::OutOfRange {
            start_sec: start_frame as f64 * frame_duration,
            end_sec: end_frame as f64 * frame_duration,
            duration_sec: buf.duration_sec(),
        });
    }
    cut_seconds(
        buf,
        start_frame as f64 * frame_duration,
        end_frame as f64 * frame_duration,
        frame_duration,
    )
}

pub const DEFAULT_PEAK_BUCKETS: usize = 800;

/// `(min, max)` sample pairs over `min(buckets, frames)` contiguous buckets
/// of the first channel, for waveform drawing.
pub fn waveform_peaks(buf: &AudioBuffer, buckets: usize) -> Vec<(f32, f32)> {
    let mono: Vec<f32> = buf.samples.iter().step_by(buf.channels).copied().collect();
    let n = mono.len();
    let buckets = buckets.min(n);
    (0..buckets)
        .map(|i| {
            let chunk = &mono[i * n / buckets..(i + 1) * n / buckets];
            chunk
                .iter()
                .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s)))
        })
        .collect()
}
