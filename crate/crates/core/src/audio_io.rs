//! WAV ingestion and analysis-segment extraction.
//!
//! Decoding accepts RIFF/WAVE integer PCM (8, 16, 24 or 32 bit) and 32/64-bit
//! float payloads with any channel count; unknown chunks are skipped. Channels are downmixed to mono by
//! the per-frame arithmetic mean. Integer samples are divided by the
//! magnitude of the type's most negative value (128, 32768, ...), so the
//! decoded range is [-1, 1). No resampling is ever performed.

use std::path::Path;

use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("{path}: cannot read file: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed WAV header: {detail}")]
    Malformed { path: String, detail: String },
    #[error("{path}: unsupported compression (fmt format_tag = {format_tag})")]
    UnsupportedCodec { path: String, format_tag: String },
    #[error("{path}: unsupported sample format ({detail})")]
    UnsupportedSampleFormat { path: String, detail: String },
    #[error("{path}: data chunk holds no samples")]
    EmptyPayload { path: String },
    #[error("{label}: clip contains no samples")]
    EmptyClip { label: String },
    #[error("sample rate must be positive")]
    ZeroSampleRate,
    #[error("{label}: sample {index} = {value} lies outside [-1, 1]")]
    OutOfRange {
        label: String,
        index: usize,
        value: f64,
    },
    #[error(
        "{label}: insufficient duration: available {available_s:.3} s, requested {requested_s:.3} s"
    )]
    InsufficientDuration {
        label: String,
        available_s: f64,
        requested_s: f64,
    },
    #[error("invalid segment parameter: {0}")]
    InvalidSegment(String),
}

/// Decoded mono audio.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip<T> {
    samples: Vec<T>,
    sample_rate: u32,
    source: String,
}

impl<T: Scalar> AudioClip<T> {
    /// Builds a clip after checking that it is non-empty, the rate is positive
    /// and every sample is a finite value in [-1, 1].
    pub fn new(
        samples: Vec<T>,
        sample_rate: u32,
        source: impl Into<String>,
    ) -> Result<Self, AudioError> {
        let source = source.into();
        if sample_rate == 0 {
            return Err(AudioError::ZeroSampleRate);
        }
        if samples.is_empty() {
            return Err(AudioError::EmptyClip { label: source });
        }
        if let Some((index, v)) = samples
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && v.abs() <= T::one()))
        {
            return Err(AudioError::OutOfRange {
                label: source,
                index,
                value: v.as_f64(),
            });
        }
        Ok(Self {
            samples,
            sample_rate,
            source,
        })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    /// Multiplies every sample by `gain`; fails if the result leaves [-1, 1].
    pub fn scaled(&self, gain: T) -> Result<Self, AudioError> {
        Self::new(
            self.samples.iter().map(|&s| s * gain).collect(),
            self.sample_rate,
            self.source.clone(),
        )
    }

    /// Cuts the analysis segment described by `seg`.
    pub fn extract_segment(&self, seg: &SegmentSpec) -> Result<Self, AudioError> {
        seg.validate()?;
        let rate = f64::from(self.sample_rate);
        let want = (seg.duration_s * rate).round() as usize;
        let skip = (seg.offset_s * rate).round() as usize;
        if want == 0 {
            return Err(AudioError::InvalidSegment(format!(
                "duration {} s is shorter than one sample",
                seg.duration_s
            )));
        }
        if want + skip > self.samples.len() {
            return Err(AudioError::InsufficientDuration {
                label: self.source.clone(),
                available_s: self.duration_s(),
                requested_s: seg.duration_s + seg.offset_s,
            });
        }
        let start = match seg.anchor {
            Anchor::Start => skip,
            Anchor::End => self.samples.len() - skip - want,
        };
        Ok(Self {
            samples: self.samples[start..start + want].to_vec(),
            sample_rate: self.sample_rate,
            source: self.source.clone(),
        })
    }
}

/// Which end of the recording the segment is measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Anchor {
    Start,
    /// Default: the start of an angry recording holds the transition from
    /// the normal state, so the tail is kept.
    #[default]
    End,
}

impl std::str::FromStr for Anchor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "start" => Ok(Anchor::Start),
            "end" => Ok(Anchor::End),
            other => Err(format!("unknown anchor {other:?} (expected start or end)")),
        }
    }
}

impl std::fmt::Display for Anchor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Anchor::Start => "start",
            Anchor::End => "end",
        })
    }
}

/// Segment length and placement. `offset_s` is discarded from the anchored
/// end before the window is taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentSpec {
    pub duration_s: f64,
    pub anchor: Anchor,
    pub offset_s: f64,
}

impl Default for SegmentSpec {
    fn default() -> Self {
        Self {
            duration_s: 30.0,
            anchor: Anchor::End,
            offset_s: 0.0,
        }
    }
}

impl SegmentSpec {
    pub fn validate(&self) -> Result<(), AudioError> {
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(AudioError::InvalidSegment(format!(
                "duration must be positive, got {}",
                self.duration_s
            )));
        }
        if !(self.offset_s.is_finite() && self.offset_s >= 0.0) {
            return Err(AudioError::InvalidSegment(format!(
                "offset must be non-negative, got {}",
                self.offset_s
            )));
        }
        Ok(())
    }
}

/// Decodes a WAV file into a mono clip.
pub fn decode_wav<T: Scalar>(path: impl AsRef<Path>) -> Result<AudioClip<T>, AudioError> {
    let path = path.as_ref();
    let label = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|source| AudioError::Io {
        path: label.clone(),
        source,
    })?;
    decode_wav_bytes(&bytes, label)
}

#[derive(Debug, Clone, Copy)]
struct FmtChunk {
    format_tag: u16,
    channels: u16,
    sample_rate: u32,
    block_align: u16,
    bits_per_sample: u16,
}

const WAVE_FORMAT_PCM: u16 = 0x0001;
const WAVE_FORMAT_IEEE_FLOAT: u16 = 0x0003;
const WAVE_FORMAT_EXTENSIBLE: u16 = 0xFFFE;

fn le_u16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn le_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn parse_fmt(body: &[u8], label: &str) -> Result<FmtChunk, AudioError> {
    let malformed = |detail: String| AudioError::Malformed {
        path: label.to_string(),
        detail,
    };
    if body.len() < 16 {
        return Err(malformed(format!(
            "fmt chunk size = {}, need at least 16",
            body.len()
        )));
    }
    let mut fmt = FmtChunk {
        format_tag: le_u16(body, 0),
        channels: le_u16(body, 2),
        sample_rate: le_u32(body, 4),
        block_align: le_u16(body, 12),
        bits_per_sample: le_u16(body, 14),
    };
    if fmt.format_tag == WAVE_FORMAT_EXTENSIBLE {
        if body.len() < 40 {
            return Err(malformed(format!(
                "fmt chunk size = {} too small for WAVE_FORMAT_EXTENSIBLE",
                body.len()
            )));
        }
        // First two bytes of the sub-format GUID carry the actual codec.
        fmt.format_tag = le_u16(body, 24);
    }
    if fmt.format_tag != WAVE_FORMAT_PCM && fmt.format_tag != WAVE_FORMAT_IEEE_FLOAT {
        return Err(AudioError::UnsupportedCodec {
            path: label.to_string(),
            format_tag: format!("{:#06x}", fmt.format_tag),
        });
    }
    if fmt.channels == 0 {
        return Err(malformed("channels = 0".into()));
    }
    if fmt.sample_rate == 0 {
        return Err(malformed("sample_rate = 0".into()));
    }
    let supported = match fmt.format_tag {
        WAVE_FORMAT_PCM => matches!(fmt.bits_per_sample, 8 | 16 | 24 | 32),
        _ => matches!(fmt.bits_per_sample, 32 | 64),
    };
    if !supported {
        return Err(AudioError::UnsupportedSampleFormat {
            path: label.to_string(),
            detail: format!(
                "format_tag = {:#06x} with bits_per_sample = {}",
                fmt.format_tag, fmt.bits_per_sample
            ),
        });
    }
    let expected = u32::from(fmt.channels) * u32::from(fmt.bits_per_sample / 8);
    if u32::from(fmt.block_align) != expected {
        return Err(malformed(format!(
            "block_align = {}, expected {expected}",
            fmt.block_align
        )));
    }
    Ok(fmt)
}

fn decode_wav_bytes<T: Scalar>(bytes: &[u8], label: String) -> Result<AudioClip<T>, AudioError> {
    let malformed = |detail: String| AudioError::Malformed {
        path: label.clone(),
        detail,
    };
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" {
        return Err(malformed("no RIFF tag at offset 0".into()));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(malformed("no WAVE tag at offset 8".into()));
    }
    let mut fmt = None;
    let mut data = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let len = le_u32(bytes, pos + 4) as usize;
        let body = pos + 8;
        let Some(end) = body.checked_add(len).filter(|&e| e <= bytes.len()) else {
            return Err(malformed(format!(
                "chunk {:?} declares {len} bytes, only {} remain",
                String::from_utf8_lossy(id),
                bytes.len() - body
            )));
        };
        match id {
            b"fmt " if fmt.is_none() => fmt = Some(parse_fmt(&bytes[body..end], &label)?),
            b"data" if data.is_none() => data = Some(&bytes[body..end]),
            _ => {}
        }
        // Chunks are word aligned; odd sizes carry one pad byte.
        pos = end + (len & 1);
    }
    let fmt = fmt.ok_or_else(|| malformed("no fmt chunk".into()))?;
    let data = data.ok_or_else(|| malformed("no data chunk".into()))?;

    let channels = usize::from(fmt.channels);
    let width = usize::from(fmt.bits_per_sample / 8);
    let frame_bytes = channels * width;
    // A trailing partial frame is ignored.
    let frames = data.len() / frame_bytes;
    if frames == 0 {
        return Err(AudioError::EmptyPayload { path: label });
    }
    let sample = |s: &[u8]| -> f64 {
        match (fmt.format_tag, width) {
            (WAVE_FORMAT_PCM, 1) => (f64::from(s[0]) - 128.0) / 128.0,
            (WAVE_FORMAT_PCM, 2) => f64::from(i16::from_le_bytes([s[0], s[1]])) / 32768.0,
            (WAVE_FORMAT_PCM, 3) => {
                f64::from(i32::from_le_bytes([0, s[0], s[1], s[2]]) >> 8) / 8_388_608.0
            }
            (WAVE_FORMAT_PCM, _) => {
                f64::from(i32::from_le_bytes([s[0], s[1], s[2], s[3]])) / 2_147_483_648.0
            }
            (_, 4) => f64::from(f32::from_le_bytes([s[0], s[1], s[2], s[3]])),
            _ => f64::from_le_bytes(s[..8].try_into().expect("8-byte sample")),
        }
    };
    let inv = 1.0 / channels as f64;
    let mono: Vec<T> = data[..frames * frame_bytes]
        .chunks_exact(frame_bytes)
        .map(|frame| {
            let sum: f64 = frame.chunks_exact(width).map(sample).sum();
            T::lit(if channels == 1 { sum } else { sum * inv })
        })
        .collect();
    AudioClip::new(mono, fmt.sample_rate, label)
}
