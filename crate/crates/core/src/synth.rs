//! Deterministic test audio with known spectra, the direct DFT oracle and a
//! WAV encoder.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha
//! 0.3), whose output stream is fixed by its published algorithm, so
//! fixtures are stable across platforms and releases.
//!
//! Filtered noise is built as a dense sum of sinusoids on the grid
//! `j * sample_rate / L` (`L` = next power of two >= clip length), each with
//! the gain of the band it falls in and a uniformly random phase, evaluated
//! with one inverse FFT. Its expected power spectrum is exactly the band
//! envelope.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::audio_io::{AudioClip, AudioError};
use crate::lts::fft_in_place;
use crate::Scalar;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("frequency {frequency_hz} Hz is not below the Nyquist frequency {nyquist_hz} Hz")]
    Aliasing { frequency_hz: f64, nyquist_hz: f64 },
    #[error("component amplitudes sum to {sum}, peak would exceed 1")]
    AmplitudeOverflow { sum: f64 },
    #[error("invalid synth spec: {0}")]
    Invalid(String),
    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("cannot write {path}: {detail}")]
    Write { path: String, detail: String },
    #[error(transparent)]
    Audio(#[from] AudioError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    Sine,
    MultiSine,
    FilteredNoise,
}

impl FromStr for SynthKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "sine" => Ok(Self::Sine),
            "multi_sine" => Ok(Self::MultiSine),
            "filtered_noise" => Ok(Self::FilteredNoise),
            other => Err(format!(
                "unknown kind {other:?} (expected sine, multi_sine or filtered_noise)"
            )),
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sine => "sine",
            Self::MultiSine => "multi_sine",
            Self::FilteredNoise => "filtered_noise",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tone {
    pub frequency_hz: f64,
    pub amplitude: f64,
}

/// Half-open band `[lo_hz, hi_hz)` with a gain in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lo_hz: f64,
    pub hi_hz: f64,
    pub gain_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub components: Vec<Tone>,
    pub envelope: Vec<Band>,
    pub duration_s: f64,
    pub sample_rate: u32,
    pub seed: u64,
    /// Peak magnitude filtered noise is normalized to.
    pub peak: f64,
}

impl SynthSpec {
    pub fn sine(frequency_hz: f64, amplitude: f64, duration_s: f64, sample_rate: u32) -> Self {
        Self {
            kind: SynthKind::Sine,
            components: vec![Tone {
                frequency_hz,
                amplitude,
            }],
            envelope: Vec::new(),
            duration_s,
            sample_rate,
            seed: 0,
            peak: 0.5,
        }
    }

    pub fn multi_sine(components: Vec<Tone>, duration_s: f64, sample_rate: u32) -> Self {
        Self {
            kind: SynthKind::MultiSine,
            components,
            ..Self::sine(0.0, 0.0, duration_s, sample_rate)
        }
    }

    pub fn filtered_noise(
        envelope: Vec<Band>,
        duration_s: f64,
        sample_rate: u32,
        seed: u64,
    ) -> Self {
        Self {
            kind: SynthKind::FilteredNoise,
            components: Vec::new(),
            envelope,
            seed,
            ..Self::sine(0.0, 0.0, duration_s, sample_rate)
        }
    }

    pub fn sample_count(&self) -> usize {
        (self.duration_s * f64::from(self.sample_rate)).round() as usize
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.sample_rate == 0 {
            return Err(SynthError::Invalid("sample_rate must be positive".into()));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) || self.sample_count() == 0 {
            return Err(SynthError::Invalid(format!(
                "duration_s must give at least one sample, got {}",
                self.duration_s
            )));
        }
        let nyquist = f64::from(self.sample_rate) / 2.0;
        match self.kind {
            SynthKind::Sine | SynthKind::MultiSine => {
                if self.kind == SynthKind::Sine && self.components.len() != 1 {
                    return Err(SynthError::Invalid(format!(
                        "sine takes exactly one component, got {}",
                        self.components.len()
                    )));
                }
                if self.components.is_empty() {
                    return Err(SynthError::Invalid("no components".into()));
                }
                for t in &self.components {
                    if !(t.frequency_hz >= 0.0 && t.frequency_hz.is_finite()) {
                        return Err(SynthError::Invalid(format!(
                            "bad frequency {}",
                            t.frequency_hz
                        )));
                    }
                    if t.frequency_hz >= nyquist {
                        return Err(SynthError::Aliasing {
                            frequency_hz: t.frequency_hz,
                            nyquist_hz: nyquist,
                        });
                    }
                    if !t.amplitude.is_finite() {
                        return Err(SynthError::Invalid(format!(
                            "bad amplitude {}",
                            t.amplitude
                        )));
                    }
                }
                let sum: f64 = self.components.iter().map(|t| t.amplitude.abs()).sum();
                if sum > 1.0 {
                    return Err(SynthError::AmplitudeOverflow { sum });
                }
            }
            SynthKind::FilteredNoise => {
                if self.envelope.is_empty() {
                    return Err(SynthError::Invalid(
                        "filtered_noise needs at least one band".into(),
                    ));
                }
                for b in &self.envelope {
                    if !(b.lo_hz >= 0.0 && b.lo_hz < b.hi_hz && b.gain_db.is_finite()) {
                        return Err(SynthError::Invalid(format!(
                            "bad band {}-{}:{}",
                            b.lo_hz, b.hi_hz, b.gain_db
                        )));
                    }
                    if b.hi_hz > nyquist {
                        return Err(SynthError::Aliasing {
                            frequency_hz: b.hi_hz,
                            nyquist_hz: nyquist,
                        });
                    }
                }
                if !(self.peak > 0.0 && self.peak <= 1.0) {
                    return Err(SynthError::AmplitudeOverflow { sum: self.peak });
                }
            }
        }
        Ok(())
    }

    /// Parses the `key = value` config form.
    ///
    /// ```text
    /// kind = filtered_noise
    /// duration_s = 30
    /// sample_rate = 44100
    /// seed = 7
    /// bands = 0-5512.5:0, 5512.5-22050:-12
    /// ```
    ///
    /// Sine kinds use `components = 1000:0.5, 2500:0.25` (Hz:amplitude).
    pub fn from_config_str(text: &str) -> Result<Self, SynthError> {
        let mut spec = Self::sine(1000.0, 0.5, 1.0, 44100);
        spec.components.clear();
        let mut kind = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |msg: String| SynthError::Parse { line, msg };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {content:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| -> Result<f64, SynthError> {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| err(format!("{key}: cannot parse {v:?}")))
            };
            match key {
                "kind" => kind = Some(value.parse::<SynthKind>().map_err(err)?),
                "duration_s" => spec.duration_s = num(value)?,
                "sample_rate" => {
                    spec.sample_rate = value
                        .parse()
                        .map_err(|_| err(format!("sample_rate: cannot parse {value:?}")))?
                }
                "seed" => {
                    spec.seed = value
                        .parse()
                        .map_err(|_| err(format!("seed: cannot parse {value:?}")))?
                }
                "peak" => spec.peak = num(value)?,
                "components" => {
                    spec.components = split_list(value)
                        .map(|item| {
                            let (f, a) = item.split_once(':').ok_or_else(|| {
                                err(format!("component {item:?} is not Hz:amplitude"))
                            })?;
                            Ok(Tone {
                                frequency_hz: num(f)?,
                                amplitude: num(a)?,
                            })
                        })
                        .collect::<Result<_, SynthError>>()?
                }
                "bands" => {
                    spec.envelope = split_list(value)
                        .map(|item| {
                            let (range, gain) = item.split_once(':').ok_or_else(|| {
                                err(format!("band {item:?} is not lo-hi:gain_db"))
                            })?;
                            let (lo, hi) = range
                                .split_once('-')
                                .ok_or_else(|| err(format!("band range {range:?} is not lo-hi")))?;
                            Ok(Band {
                                lo_hz: num(lo)?,
                                hi_hz: num(hi)?,
                                gain_db: num(gain)?,
                            })
                        })
                        .collect::<Result<_, SynthError>>()?
                }
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        spec.kind = kind.ok_or_else(|| SynthError::Parse {
            line: 0,
            msg: "missing 'kind'".into(),
        })?;
        spec.validate()?;
        Ok(spec)
    }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Renders the clip described by `spec`.
pub fn generate<T: Scalar>(spec: &SynthSpec) -> Result<AudioClip<T>, SynthError> {
    spec.validate()?;
    let n = spec.sample_count();
    let rate = f64::from(spec.sample_rate);
    let samples: Vec<f64> = match spec.kind {
        SynthKind::Sine | SynthKind::MultiSine => (0..n)
            .map(|i| {
                spec.components
                    .iter()
                    .map(|t| {
                        t.amplitude
                            * (2.0 * std::f64::consts::PI * t.frequency_hz * i as f64 / rate).sin()
                    })
                    .sum()
            })
            .collect(),
        SynthKind::FilteredNoise => shaped_noise(spec, n, rate),
    };
    let label = format!("synth:{}:seed={}", spec.kind, spec.seed);
    Ok(AudioClip::new(
        samples.into_iter().map(T::lit).collect(),
        spec.sample_rate,
        label,
    )?)
}

fn shaped_noise(spec: &SynthSpec, n: usize, rate: f64) -> Vec<f64> {
    let len = n.next_power_of_two().max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut buf = vec![Complex::new(0.0f64, 0.0); len];
    for j in 1..len / 2 {
        // One phase per grid point regardless of the envelope, so editing a
        // band never reshuffles the others.
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let freq = j as f64 * rate / len as f64;
        if let Some(band) = spec
            .envelope
            .iter()
            .find(|b| freq >= b.lo_hz && freq < b.hi_hz)
        {
            let c = Complex::from_polar(10f64.powf(band.gain_db / 20.0), phase);
            buf[j] = c;
            buf[len - j] = c.conj();
        }
    }
    fft_in_place(&mut buf, true);
    let mut out: Vec<f64> = buf[..n].iter().map(|c| c.re).collect();
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        let g = spec.peak / peak;
        for v in &mut out {
            *v = (*v * g).clamp(-1.0, 1.0);
        }
    }
    out
}

/// Direct `O(N^2)` evaluation of the one-sided DFT, bins `0..=N/2`.
///
/// Phases are reduced exactly as `(m * n) mod N` and evaluated in `f64`
/// from a table, independently of the FFT code path.
pub fn dft_oracle<T: Scalar>(frame: &[T]) -> Vec<Complex<T>> {
    let n = frame.len();
    if n == 0 {
        return Vec::new();
    }
    let table: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let a = -2.0 * std::f64::consts::PI * j as f64 / n as f64;
            (a.cos(), a.sin())
        })
        .collect();
    let x: Vec<f64> = frame.iter().map(|v| v.as_f64()).collect();
    (0..=n / 2)
        .map(|m| {
            let (mut re, mut im) = (0.0f64, 0.0f64);
            let mut idx = 0usize;
            for &v in &x {
                let (c, s) = table[idx];
                re += v * c;
                im += v * s;
                idx += m;
                if idx >= n {
                    idx -= n;
                }
            }
            Complex::new(T::lit(re), T::lit(im))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Pcm16,
    Pcm24,
    Float32,
    Float64,
}

impl FromStr for BitDepth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "16" => Ok(Self::Pcm16),
            "24" => Ok(Self::Pcm24),
            "float32" | "f32" | "32f" => Ok(Self::Float32),
            "float64" | "f64" | "64f" => Ok(Self::Float64),
            other => Err(format!(
                "unknown bit depth {other:?} (expected 16, 24, float32 or float64)"
            )),
        }
    }
}

/// Writes `clip` as a mono RIFF/WAVE file.
///
/// Integer depths quantize with `round(x * 2^(b-1))`, clamped to the code
/// range, so decoding recovers every sample within one quantization step.
/// `Float64` stores `f64` samples exactly.
pub fn encode_wav<T: Scalar>(
    clip: &AudioClip<T>,
    depth: BitDepth,
    path: impl AsRef<Path>,
) -> Result<(), SynthError> {
    let path = path.as_ref();
    if depth == BitDepth::Float64 {
        return write_float64(clip, path);
    }
    let wrap = |e: hound::Error| SynthError::Write {
        path: path.display().to_string(),
        detail: e.to_string(),
    };
    let (bits, format) = match depth {
        BitDepth::Pcm16 => (16, hound::SampleFormat::Int),
        BitDepth::Pcm24 => (24, hound::SampleFormat::Int),
        BitDepth::Float32 => (32, hound::SampleFormat::Float),
        BitDepth::Float64 => unreachable!("handled above"),
    };
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate(),
        bits_per_sample: bits,
        sample_format: format,
    };
    let mut w = hound::WavWriter::create(path, spec).map_err(wrap)?;
    match depth {
        BitDepth::Float32 => {
            for s in clip.samples() {
                w.write_sample(s.to_f32().unwrap_or(0.0)).map_err(wrap)?;
            }
        }
        BitDepth::Pcm16 | BitDepth::Pcm24 | BitDepth::Float64 => {
            let full = f64::from(1u32 << (bits - 1));
            for s in clip.samples() {
                let q = (s.as_f64() * full).round().clamp(-full, full - 1.0) as i32;
                w.write_sample(q).map_err(wrap)?;
            }
        }
    }
    w.finalize().map_err(wrap)
}

/// IEEE-float WAV with 64-bit samples: 18-byte `fmt ` chunk and a `fact` chunk.
fn write_float64<T: Scalar>(clip: &AudioClip<T>, path: &Path) -> Result<(), SynthError> {
    let n = clip.len();
    let data_len = u32::try_from(n * 8)
        .ok()
        .filter(|&d| d <= u32::MAX - 58)
        .ok_or_else(|| SynthError::Write {
            path: path.display().to_string(),
            detail: format!("{n} samples exceed the RIFF size limit"),
        })?;
    let rate = clip.sample_rate();
    let mut out = Vec::with_capacity(58 + n * 8);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(50 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&18u32.to_le_bytes());
    out.extend_from_slice(&3u16.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(rate * 8).to_le_bytes());
    out.extend_from_slice(&8u16.to_le_bytes());
    out.extend_from_slice(&64u16.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(b"fact");
    out.extend_from_slice(&4u32.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for s in clip.samples() {
        out.extend_from_slice(&s.as_f64().to_le_bytes());
    }
    std::fs::write(path, out).map_err(|e| SynthError::Write {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}
