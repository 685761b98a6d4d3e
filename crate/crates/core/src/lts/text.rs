//! Plain-text spectrum interchange.
//!
//! ```text
//! # fft_size=4096, sample_rate=44100, start_bin=1
//! # frequency_hz<TAB>level_db
//! 10.7666015625<TAB>-63.25
//! ...
//! ```
//!
//! Levels are written with the shortest representation that parses back to
//! the same value, so a write/read cycle is lossless.

use std::io::{BufRead, Write};

use thiserror::Error;

use super::{LtsError, Spectrum};
use crate::Scalar;

#[derive(Debug, Error)]
pub enum SpectrumTextError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Invalid(#[from] LtsError),
}

fn parse_err(line: usize, msg: impl Into<String>) -> SpectrumTextError {
    SpectrumTextError::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn write_spectrum<T: Scalar, W: Write>(spec: &Spectrum<T>, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "# fft_size={}, sample_rate={}, start_bin={}",
        spec.fft_size(),
        spec.sample_rate(),
        spec.start_bin()
    )?;
    writeln!(out, "# frequency_hz\tlevel_db")?;
    for (i, level) in spec.levels().iter().enumerate() {
        writeln!(out, "{}\t{}", spec.frequency_hz(i), level)?;
    }
    out.flush()
}

pub fn read_spectrum<T: Scalar, R: BufRead>(input: R) -> Result<Spectrum<T>, SpectrumTextError> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty input, expected '# fft_size=...' header"))?;
    let header = header?;
    let body = header
        .strip_prefix('#')
        .ok_or_else(|| parse_err(1, "header must start with '#'"))?;
    let (mut fft_size, mut sample_rate, mut start_bin) = (None, None, None);
    for field in body.split(|c: char| c == ',' || c.is_whitespace()) {
        if field.is_empty() {
            continue;
        }
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| parse_err(1, format!("expected key=value, got {field:?}")))?;
        let bad = |_| parse_err(1, format!("{key}: cannot parse {value:?}"));
        match key {
            "fft_size" => fft_size = Some(value.parse::<usize>().map_err(bad)?),
            "sample_rate" => sample_rate = Some(value.parse::<u32>().map_err(bad)?),
            "start_bin" => start_bin = Some(value.parse::<usize>().map_err(bad)?),
            other => return Err(parse_err(1, format!("unknown header key {other:?}"))),
        }
    }
    let missing = |k: &str| parse_err(1, format!("header lacks {k}"));
    let fft_size = fft_size.ok_or_else(|| missing("fft_size"))?;
    let sample_rate = sample_rate.ok_or_else(|| missing("sample_rate"))?;
    let start_bin = start_bin.ok_or_else(|| missing("start_bin"))?;
    let step = f64::from(sample_rate) / fft_size.max(1) as f64;

    let mut levels = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut cols = trimmed.split('\t');
        let (freq, level) = match (cols.next(), cols.next(), cols.next()) {
            (Some(f), Some(l), None) => (f.trim(), l.trim()),
            _ => return Err(parse_err(lineno, "expected 'frequency_hz<TAB>level_db'")),
        };
        let freq: f64 = freq
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad frequency {freq:?}")))?;
        let expected = (start_bin + levels.len()) as f64 * step;
        if (freq - expected).abs() > 1e-6 * step.max(1.0) {
            return Err(parse_err(
                lineno,
                format!("frequency {freq} Hz off the grid, expected {expected} Hz"),
            ));
        }
        let level: T = level
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad level {level:?}")))?;
        levels.push(level);
    }
    Ok(Spectrum::new(levels, fft_size, sample_rate, start_bin)?)
}
