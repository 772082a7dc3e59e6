//! Minimal RIFF/WAVE reader and PCM-16 writer.

use std::io::Write;
use std::path::Path;

use super::{AudioBuffer, AudioError};

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

fn malformed(offset: usize, message: impl Into<String>) -> AudioError {
    AudioError::Malformed {
        offset,
        message: message.into(),
    }
}

fn u16_at(bytes: &[u8], offset: usize) -> Result<u16, AudioError> {
    bytes
        .get(offset..offset + 2)
        .map(|b| u16::from_le_bytes([b[0], b[1]]))
        .ok_or_else(|| malformed(offset, "unexpected end of file"))
}

fn u32_at(bytes: &[u8], offset: usize) -> Result<u32, AudioError> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| malformed(offset, "unexpected end of file"))
}

fn looks_like_mp3(bytes: &[u8]) -> bool {
    bytes.starts_with(b"ID3") || (bytes.len() >= 2 && bytes[0] == 0xFF && bytes[1] & 0xE0 == 0xE0)
}

struct Format {
    tag: u16,
    channels: u16,
    sample_rate: u32,
    bits: u16,
}

/// Decodes a RIFF/WAVE file holding 16-bit integer or 32-bit float PCM.
/// 16-bit samples are scaled by 1/32768, so -32768 maps to exactly -1.0.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioBuffer, AudioError> {
    if looks_like_mp3(bytes) {
        return Err(AudioError::Unsupported(
            "MP3 input; convert to WAV first (e.g. `ffmpeg -i in.mp3 -ac 1 -ar 16000 out.wav`)".into(),
        ));
    }
    if bytes.get(0..4) != Some(b"RIFF") {
        return Err(malformed(0, "missing RIFF magic"));
    }
    u32_at(bytes, 4)?;
    if bytes.get(8..12) != Some(b"WAVE") {
        return Err(malformed(8, "missing WAVE form type"));
    }

    let mut format: Option<Format> = None;
    let mut offset = 12;
    while offset < bytes.len() {
        let id = bytes
            .get(offset..offset + 4)
            .ok_or_else(|| malformed(offset, "truncated chunk header"))?;
        let size = u32_at(bytes, offset + 4)? as usize;
        let body = offset + 8;
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(malformed(offset + 4, format!("fmt chunk of {size} bytes is too short")));
                }
                let mut tag = u16_at(bytes, body)?;
                let bits = u16_at(bytes, body + 14)?;
                if tag == FORMAT_EXTENSIBLE {
                    if size < 40 {
                        return Err(malformed(offset + 4, "extensible fmt chunk is too short"));
                    }
                    // the first two bytes of the sub-format GUID carry the format tag
                    tag = u16_at(bytes, body + 24)?;
                }
                format = Some(Format {
                    tag,
                    channels: u16_at(bytes, body + 2)?,
                    sample_rate: u32_at(bytes, body + 4)?,
                    bits,
                });
            }
            b"data" => {
                let fmt = format.ok_or_else(|| malformed(offset, "data chunk before fmt chunk"))?;
                if fmt.channels == 0 {
                    return Err(malformed(22, "zero channels"));
                }
                if fmt.sample_rate == 0 {
                    return Err(malformed(24, "zero sample rate"));
                }
                let data = bytes
                    .get(body..body + size)
                    .ok_or_else(|| malformed(offset + 4, format!("data chunk of {size} bytes runs past end of file")))?;
                let samples: Vec<f32> = match (fmt.tag, fmt.bits) {
                    (FORMAT_PCM, 16) => data
                        .chunks_exact(2)
                        .map(|b| i16::from_le_bytes([b[0], b[1]]) as f32 / 32768.0)
                        .collect(),
                    (FORMAT_FLOAT, 32) => data
                        .chunks_exact(4)
                        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]).clamp(-1.0, 1.0))
                        .collect(),
                    (tag, bits) => {
                        return Err(AudioError::Unsupported(format!(
                            "format tag {tag} with {bits} bits per sample (need 16-bit PCM or 32-bit float)"
                        )))
                    }
                };
                let channels = fmt.channels as usize;
                let whole = samples.len() - samples.len() % channels;
                let mut samples = samples;
                samples.truncate(whole);
                return AudioBuffer::new(samples, fmt.sample_rate, channels);
            }
            _ => {}
        }
        // chunks are word aligned
        offset = body + size + (size & 1);
    }
    Err(malformed(bytes.len(), "no data chunk"))
}

pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioBuffer, AudioError> {
    let path = path.as_ref();
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("mp3"))
    {
        return Err(AudioError::Unsupported(format!(
            "{} is MP3; convert to WAV first",
            path.display()
        )));
    }
    decode_wav(&std::fs::read(path)?)
}

fn quantize(sample: f32) -> i16 {
    (sample as f64 * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

/// Encodes as little-endian 16-bit PCM.
pub fn encode_wav(buf: &AudioBuffer) -> Vec<u8> {
    let data_len = buf.samples().len() * 2;
    let channels = buf.channels() as u16;
    let block_align = channels * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&buf.sample_rate().to_le_bytes());
    out.extend_from_slice(&(buf.sample_rate() * block_align as u32).to_le_bytes());
    out.extend_from_slice(&block_align.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in buf.samples() {
        out.extend_from_slice(&quantize(s).to_le_bytes());
    }
    out
}

pub fn write_wav(buf: &AudioBuffer, path: impl AsRef<Path>) -> Result<(), AudioError> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(&encode_wav(buf))?;
    Ok(())
}
