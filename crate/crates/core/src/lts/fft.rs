//! Iterative radix-2 FFT.

use num_complex::Complex;

use super::LtsError;
use crate::Scalar;

/// In-place forward (`inverse = false`) or unnormalized inverse transform of
/// a power-of-two-length buffer.
pub(crate) fn fft_in_place<T: Scalar>(buf: &mut [Complex<T>], inverse: bool) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    if n < 2 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    // Twiddles are evaluated in f64 for every scalar type; f32 accumulation
    // still loses precision but starts from correctly rounded roots.
    let sign = if inverse { 1.0 } else { -1.0 };
    let half = n / 2;
    let twiddles: Vec<Complex<T>> = (0..half)
        .map(|k| {
            let a = sign * 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            Complex::new(T::lit(a.cos()), T::lit(a.sin()))
        })
        .collect();
    let mut len = 2;
    while len <= n {
        let step = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let w = twiddles[k * step];
                let a = buf[start + k];
                let b = buf[start + k + len / 2] * w;
                buf[start + k] = a + b;
                buf[start + k + len / 2] = a - b;
            }
        }
        len <<= 1;
    }
}

/// One-sided spectrum of a real frame: bins `0..=N/2` of
/// `X[m] = sum_n x[n] exp(-2 pi i m n / N)`.
pub fn fft_real<T: Scalar>(frame: &[T]) -> Result<Vec<Complex<T>>, LtsError> {
    let n = frame.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(LtsError::NotPowerOfTwo(n));
    }
    let mut buf: Vec<Complex<T>> = frame.iter().map(|&x| Complex::new(x, T::zero())).collect();
    fft_in_place(&mut buf, false);
    buf.truncate(n / 2 + 1);
    Ok(buf)
}
