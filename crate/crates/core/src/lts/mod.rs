//! Long-term spectrum: frame-averaged Hanning-windowed power spectrum in dB.
//!
//! A clip is cut into `fft_size` frames at `hop` spacing (the trailing
//! partial frame is dropped). Each frame is windowed and transformed, the
//! per-bin power `|X_m|^2 / sum(w^2)` is averaged linearly over frames, and
//! the mean power is converted to dB with a floor relative to the strongest
//! bin: `10 log10(P_m + floor * P_max)`.

mod fft;
mod text;
mod window;

use std::fmt;

use thiserror::Error;

use crate::audio_io::AudioClip;
use crate::Scalar;

pub(crate) use fft::fft_in_place;
pub use fft::fft_real;
pub use text::{read_spectrum, write_spectrum, SpectrumTextError};
pub use window::hanning_window;

#[derive(Debug, Error, PartialEq)]
pub enum LtsError {
    #[error("FFT length must be a power of two >= 2, got {0}")]
    NotPowerOfTwo(usize),
    #[error("window length must be >= 2, got {0}")]
    WindowTooShort(usize),
    #[error("hop must lie in 1..={fft_size}, got {hop}")]
    BadHop { hop: usize, fft_size: usize },
    #[error("power floor must be positive and finite, got {0}")]
    BadFloor(f64),
    #[error("{label}: clip of {len} samples is shorter than one {fft_size}-sample frame")]
    ClipTooShort {
        label: String,
        len: usize,
        fft_size: usize,
    },
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
}

/// Frequency grid of a spectrum. Two spectra are comparable only when their
/// axes are identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Axis {
    pub fft_size: usize,
    pub sample_rate: u32,
    pub start_bin: usize,
    pub k: usize,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "fft_size={} sample_rate={} start_bin={} k={}",
            self.fft_size, self.sample_rate, self.start_bin, self.k
        )
    }
}

/// A k-channel level vector on the one-sided FFT grid, in dB.
///
/// Channel `i` sits at FFT bin `start_bin + i`, i.e. at
/// `(start_bin + i) * sample_rate / fft_size` Hz. The grid is kept as
/// integers so `freq_step * fft_size == sample_rate` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    levels: Vec<T>,
    fft_size: usize,
    sample_rate: u32,
    start_bin: usize,
}

impl<T: Scalar> Spectrum<T> {
    pub fn new(
        levels: Vec<T>,
        fft_size: usize,
        sample_rate: u32,
        start_bin: usize,
    ) -> Result<Self, LtsError> {
        if fft_size < 2 {
            return Err(LtsError::InvalidSpectrum(format!(
                "fft_size {fft_size} < 2"
            )));
        }
        if sample_rate == 0 {
            return Err(LtsError::InvalidSpectrum("sample_rate is 0".into()));
        }
        if levels.len() < 2 {
            return Err(LtsError::InvalidSpectrum(format!(
                "need at least 2 channels, got {}",
                levels.len()
            )));
        }
        if start_bin + levels.len() > fft_size / 2 + 1 {
            return Err(LtsError::InvalidSpectrum(format!(
                "start_bin {start_bin} + k {} exceeds {} one-sided bins",
                levels.len(),
                fft_size / 2 + 1
            )));
        }
        if let Some(i) = levels.iter().position(|v| !v.is_finite()) {
            return Err(LtsError::InvalidSpectrum(format!(
                "level at channel {i} is not finite"
            )));
        }
        Ok(Self {
            levels,
            fft_size,
            sample_rate,
            start_bin,
        })
    }

    pub fn levels(&self) -> &[T] {
        &self.levels
    }

    pub fn k(&self) -> usize {
        self.levels.len()
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn start_bin(&self) -> usize {
        self.start_bin
    }

    pub fn freq_step_hz(&self) -> f64 {
        f64::from(self.sample_rate) / self.fft_size as f64
    }

    pub fn frequency_hz(&self, channel: usize) -> f64 {
        (self.start_bin + channel) as f64 * f64::from(self.sample_rate) / self.fft_size as f64
    }

    pub fn axis(&self) -> Axis {
        Axis {
            fft_size: self.fft_size,
            sample_rate: self.sample_rate,
            start_bin: self.start_bin,
            k: self.levels.len(),
        }
    }

    /// Channel holding the highest level (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.levels.iter().enumerate() {
            if *v > self.levels[best] {
                best = i;
            }
        }
        best
    }
}

/// Window shape. Only the Hanning window is offered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    Hanning,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LtsConfig<T> {
    pub fft_size: usize,
    pub window: Window,
    pub hop: usize,
    pub include_dc: bool,
    /// Floor added to every bin, as a fraction of the strongest mean power.
    pub power_floor: T,
}

impl<T: Scalar> Default for LtsConfig<T> {
    fn default() -> Self {
        Self::with_fft_size(4096)
    }
}

impl<T: Scalar> LtsConfig<T> {
    /// Defaults with the given FFT size and a half-frame hop.
    pub fn with_fft_size(fft_size: usize) -> Self {
        Self {
            fft_size,
            window: Window::Hanning,
            hop: (fft_size / 2).max(1),
            include_dc: false,
            power_floor: T::lit(1e-12),
        }
    }

    pub fn validate(&self) -> Result<(), LtsError> {
        if self.fft_size < 2 || !self.fft_size.is_power_of_two() {
            return Err(LtsError::NotPowerOfTwo(self.fft_size));
        }
        if self.hop == 0 || self.hop > self.fft_size {
            return Err(LtsError::BadHop {
                hop: self.hop,
                fft_size: self.fft_size,
            });
        }
        if !(self.power_floor.is_finite() && self.power_floor > T::zero()) {
            return Err(LtsError::BadFloor(self.power_floor.as_f64()));
        }
        Ok(())
    }

    /// Number of frames a clip of `len` samples yields.
    pub fn frame_count(&self, len: usize) -> usize {
        if len < self.fft_size {
            0
        } else {
            (len - self.fft_size) / self.hop + 1
        }
    }

    /// Number of channels in the resulting spectrum.
    pub fn channels(&self) -> usize {
        self.fft_size / 2 + usize::from(self.include_dc)
    }
}

/// Computes the long-term spectrum of `clip`.
pub fn compute_lts<T: Scalar>(
    clip: &AudioClip<T>,
    cfg: &LtsConfig<T>,
) -> Result<Spectrum<T>, LtsError> {
    cfg.validate()?;
    let n = cfg.fft_size;
    let frames = cfg.frame_count(clip.len());
    if frames == 0 {
        return Err(LtsError::ClipTooShort {
            label: clip.source().to_string(),
            len: clip.len(),
            fft_size: n,
        });
    }
    let window: Vec<T> = match cfg.window {
        Window::Hanning => hanning_window(n)?,
    };
    let norm = window.iter().map(|&w| w * w).sum::<T>();
    let bins = n / 2 + 1;
    let mut acc = vec![T::zero(); bins];
    let mut buf = Vec::with_capacity(n);
    for f in 0..frames {
        let frame = &clip.samples()[f * cfg.hop..f * cfg.hop + n];
        buf.clear();
        buf.extend(
            frame
                .iter()
                .zip(&window)
                .map(|(&x, &w)| num_complex::Complex::new(x * w, T::zero())),
        );
        fft_in_place(&mut buf, false);
        for (a, c) in acc.iter_mut().zip(&buf[..bins]) {
            *a = *a + c.norm_sqr() / norm;
        }
    }
    let count = T::from_usize_lossy(frames);
    let mean: Vec<T> = acc.into_iter().map(|p| p / count).collect();
    let start_bin = usize::from(!cfg.include_dc);
    let peak = mean[start_bin..].iter().copied().fold(T::zero(), T::max);
    let floor = if peak > T::zero() {
        cfg.power_floor * peak
    } else {
        cfg.power_floor
    };
    let ten = T::lit(10.0);
    let levels = mean[start_bin..]
        .iter()
        .map(|&p| ten * (p + floor).log10())
        .collect();
    Spectrum::new(levels, n, clip.sample_rate(), start_bin)
}
