use super::LtsError;
use crate::Scalar;

/// Periodic Hanning window, `w[n] = 0.5 (1 - cos(2 pi n / N))`.
///
/// The periodic form (denominator `N`, not `N - 1`) tiles exactly under
/// 50 % overlap and integrates to `N / 2`.
pub fn hanning_window<T: Scalar>(n: usize) -> Result<Vec<T>, LtsError> {
    if n < 2 {
        return Err(LtsError::WindowTooShort(n));
    }
    Ok((0..n)
        .map(|i| {
            let phase = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            T::lit(0.5 * (1.0 - phase.cos()))
        })
        .collect())
}
