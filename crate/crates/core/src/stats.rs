//! Summary statistics over per-subject coefficients, anger-rating
//! distributions and the offset fraction towards a different speaker.

use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("cannot summarize an empty sample")]
    Empty,
    #[error("value {index} is not finite")]
    NonFinite { index: usize },
    #[error("baselines must satisfy r_same > r_diff (got r_same = {r_same}, r_diff = {r_diff})")]
    DegenerateBaselines { r_same: f64, r_diff: f64 },
    #[error("anger rating {rating} at position {index} is outside 1..=5")]
    RatingOutOfRange { index: usize, rating: i64 },
}

/// Mean, sample standard deviation and standard error of the mean.
///
/// `sd` divides by `n - 1` and `se = sd / sqrt(n)`; both are `None` for a
/// single observation. `sd_population` divides by `n` and is kept alongside
/// because some published tables print that convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats<T> {
    pub n: usize,
    pub mean: T,
    pub sd: Option<T>,
    pub se: Option<T>,
    pub sd_population: T,
}

/// `sd / sqrt(n)`.
pub fn standard_error<T: Scalar>(sd: T, n: usize) -> T {
    sd / T::from_usize_lossy(n).sqrt()
}

/// Summarizes `values`. The values are sorted before accumulation so the
/// result is bit-identical under any permutation of the input.
pub fn summarize<T: Scalar>(values: &[T]) -> Result<SummaryStats<T>, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite { index });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values are ordered"));
    let n = sorted.len();
    let nf = T::from_usize_lossy(n);
    let mean = sorted.iter().copied().sum::<T>() / nf;
    let ss = sorted.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>();
    let sd_population = (ss / nf).sqrt();
    let (sd, se) = if n >= 2 {
        let sd = (ss / T::from_usize_lossy(n - 1)).sqrt();
        (Some(sd), Some(standard_error(sd, n)))
    } else {
        (None, None)
    };
    Ok(SummaryStats {
        n,
        mean,
        sd,
        se,
        sd_population,
    })
}

/// Reference correlations: same speaker (`r_same`) and different speakers
/// (`r_diff`), both recorded under normal conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baselines<T> {
    pub r_same: T,
    pub r_diff: T,
}

impl<T: Scalar> Default for Baselines<T> {
    fn default() -> Self {
        Self {
            r_same: T::lit(0.955),
            r_diff: T::lit(0.890),
        }
    }
}

impl<T: Scalar> Baselines<T> {
    pub fn new(r_same: T, r_diff: T) -> Result<Self, StatsError> {
        let b = Self { r_same, r_diff };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), StatsError> {
        if self.r_same > self.r_diff && self.r_same.is_finite() && self.r_diff.is_finite() {
            Ok(())
        } else {
            Err(StatsError::DegenerateBaselines {
                r_same: self.r_same.as_f64(),
                r_diff: self.r_diff.as_f64(),
            })
        }
    }
}

/// Fraction of the same-to-different-speaker gap covered by `r_observed`:
/// `(r_same - r_observed) / (r_same - r_diff)`. Values outside [0, 1] are
/// returned unchanged.
pub fn offset_fraction<T: Scalar>(r_observed: T, b: &Baselines<T>) -> Result<T, StatsError> {
    b.validate()?;
    Ok((b.r_same - r_observed) / (b.r_same - b.r_diff))
}

/// Counts per rating level 1..=5 plus summary statistics of the ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct AngerDistribution<T> {
    pub counts: [usize; 5],
    pub stats: SummaryStats<T>,
}

impl<T> AngerDistribution<T> {
    pub fn count(&self, level: u8) -> usize {
        match level {
            1..=5 => self.counts[usize::from(level - 1)],
            _ => 0,
        }
    }
}

pub fn anger_distribution<T: Scalar>(ratings: &[i64]) -> Result<AngerDistribution<T>, StatsError> {
    let mut counts = [0usize; 5];
    for (index, &rating) in ratings.iter().enumerate() {
        if !(1..=5).contains(&rating) {
            return Err(StatsError::RatingOutOfRange { index, rating });
        }
        counts[(rating - 1) as usize] += 1;
    }
    let values: Vec<T> = ratings.iter().map(|&r| T::lit(r as f64)).collect();
    Ok(AngerDistribution {
        counts,
        stats: summarize(&values)?,
    })
}
