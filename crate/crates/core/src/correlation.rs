//! Spectrum similarity: Bravais-Pearson coefficient and SDDD.
//!
//! `R = (1/k) * sum((S_i - M_S)(S'_i - M_S')) / (sigma_S * sigma_S')`
//! with population (divide-by-k) standard deviations, which makes R the
//! ordinary Pearson coefficient, bounded by 1 and invariant under any
//! positive affine change of either spectrum's levels.
//!
//! SDDD, the standard deviation of the per-channel level differences
//! `D_i = S_i - S'_i`, is `sqrt((1/k) * sum((D_i - M_D)^2))`. Smaller means
//! more similar; a constant dB offset between the spectra leaves it at 0.
//! The formula is reconstructed from the measure's name; no canonical
//! definition was available.

use thiserror::Error;

use crate::lts::{Axis, Spectrum};
use crate::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum CompareError {
    #[error("frequency axes differ: [{left}] vs [{right}]")]
    AxisMismatch { left: Axis, right: Axis },
    #[error("{which} spectrum is constant (zero variance); correlation undefined")]
    ZeroVariance { which: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonResult<T> {
    pub r: T,
    pub sddd: T,
    pub k: usize,
}

fn check_axes<T: Scalar>(a: &Spectrum<T>, b: &Spectrum<T>) -> Result<(), CompareError> {
    if a.axis() != b.axis() {
        return Err(CompareError::AxisMismatch {
            left: a.axis(),
            right: b.axis(),
        });
    }
    Ok(())
}

fn mean<T: Scalar>(v: &[T]) -> T {
    v.iter().copied().sum::<T>() / T::from_usize_lossy(v.len())
}

/// True when the centred sum of squares is indistinguishable from round-off
/// of a constant vector.
fn is_degenerate<T: Scalar>(v: &[T], centred_ss: T) -> bool {
    let scale = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let k = T::from_usize_lossy(v.len());
    let tol = T::epsilon() * scale * k;
    centred_ss <= tol * tol
}

/// Bravais-Pearson correlation of two spectra on identical axes.
pub fn pearson_r<T: Scalar>(s: &Spectrum<T>, s_prime: &Spectrum<T>) -> Result<T, CompareError> {
    check_axes(s, s_prime)?;
    pearson_levels(s.levels(), s_prime.levels())
}

pub(crate) fn pearson_levels<T: Scalar>(a: &[T], b: &[T]) -> Result<T, CompareError> {
    debug_assert_eq!(a.len(), b.len());
    let k = T::from_usize_lossy(a.len());
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab = sab + dx * dy;
        saa = saa + dx * dx;
        sbb = sbb + dy * dy;
    }
    if is_degenerate(a, saa) {
        return Err(CompareError::ZeroVariance { which: "first" });
    }
    if is_degenerate(b, sbb) {
        return Err(CompareError::ZeroVariance { which: "second" });
    }
    let sigma_a = (saa / k).sqrt();
    let sigma_b = (sbb / k).sqrt();
    Ok(sab / (k * sigma_a * sigma_b))
}

/// Standard deviation of the level differences between two spectra.
pub fn sddd<T: Scalar>(s: &Spectrum<T>, s_prime: &Spectrum<T>) -> Result<T, CompareError> {
    check_axes(s, s_prime)?;
    let diffs: Vec<T> = s
        .levels()
        .iter()
        .zip(s_prime.levels())
        .map(|(&x, &y)| x - y)
        .collect();
    let m = mean(&diffs);
    let ss = diffs.iter().map(|&d| (d - m) * (d - m)).sum::<T>();
    Ok((ss / T::from_usize_lossy(diffs.len())).sqrt())
}

/// Both measures for one ordered pair.
pub fn compare<T: Scalar>(
    s: &Spectrum<T>,
    s_prime: &Spectrum<T>,
) -> Result<ComparisonResult<T>, CompareError> {
    Ok(ComparisonResult {
        r: pearson_r(s, s_prime)?,
        sddd: sddd(s, s_prime)?,
        k: s.k(),
    })
}
