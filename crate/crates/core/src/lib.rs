//! Long-term-spectrum (LTS) speaker comparison.
//!
//! The pipeline runs in stages, each with an inspectable artifact:
//!
//! 1. [`audio_io`] decodes WAV files into mono clips and cuts the analysis
//!    segment.
//! 2. [`lts`] turns a segment into a frame-averaged, Hanning-windowed power
//!    spectrum expressed in dB.
//! 3. [`correlation`] compares two spectra with the Bravais-Pearson
//!    coefficient and the standard deviation of the level differences.
//! 4. [`stats`] and [`harness`] aggregate a whole study (normal/angry
//!    recording trios per subject) into summary tables and the offset
//!    fraction towards a different-speaker baseline.
//!
//! [`synth`] produces deterministic test audio with known spectra and holds
//! the direct DFT used to check the FFT.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`). The aliases
//! exported here fix the scalar to `f64`, which is what the command-line
//! tool uses.

pub mod audio_io;
pub mod correlation;
pub mod harness;
pub mod lts;
mod scalar;
pub mod stats;
pub mod synth;

pub use scalar::Scalar;

pub type AudioClip = audio_io::AudioClip<f64>;
pub type AudioClipF32 = audio_io::AudioClip<f32>;
pub type Spectrum = lts::Spectrum<f64>;
pub type SpectrumF32 = lts::Spectrum<f32>;
pub type LtsConfig = lts::LtsConfig<f64>;
pub type ComparisonResult = correlation::ComparisonResult<f64>;
pub type SummaryStats = stats::SummaryStats<f64>;
pub type Baselines = stats::Baselines<f64>;
pub type AngerDistribution = stats::AngerDistribution<f64>;
pub type StudyConfig = harness::StudyConfig<f64>;
pub type StudyReport = harness::StudyReport<f64>;
pub type SubjectRow = harness::SubjectRow<f64>;
pub type SynthSpec = synth::SynthSpec;
