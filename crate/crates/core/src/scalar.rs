//! Numeric abstraction for scores and corpus statistics.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::Num;

/// A number type that metric and statistics code can be computed in.
///
/// Floating point types give the usual reporting numbers; `Ratio<i64>` keeps
/// every score exact, which is what the hand-checked fixtures compare against.
pub trait Scalar: Num + Copy + PartialOrd + Debug {
    /// Lossless conversion of a tally.
    fn from_count(n: u64) -> Self;

    fn to_f64(self) -> f64;

    fn ratio(num: u64, den: u64) -> Self {
        if den == 0 {
            Self::zero()
        } else {
            Self::from_count(num) / Self::from_count(den)
        }
    }

    /// Harmonic mean of `a` and `b`, zero when both are zero.
    fn harmonic(a: Self, b: Self) -> Self {
        let sum = a + b;
        if sum == Self::zero() {
            Self::zero()
        } else {
            let two = Self::one() + Self::one();
            two * a * b / sum
        }
    }

    /// Arithmetic mean, zero for an empty slice.
    fn mean(values: &[Self]) -> Self {
        if values.is_empty() {
            return Self::zero();
        }
        let total = values.iter().fold(Self::zero(), |acc, v| acc + *v);
        total / Self::from_count(values.len() as u64)
    }
}

impl Scalar for f64 {
    fn from_count(n: u64) -> Self {
        n as f64
    }

    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    fn from_count(n: u64) -> Self {
        n as f32
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for Ratio<i64> {
    fn from_count(n: u64) -> Self {
        Ratio::from_integer(i64::try_from(n).expect("tally exceeds i64"))
    }

    fn to_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

impl Scalar for Ratio<i128> {
    fn from_count(n: u64) -> Self {
        Ratio::from_integer(n as i128)
    }

    fn to_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}
