use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{BoundError, BoundValue};
use crate::weight::WeightFunction;

/// Field used to evaluate bounds and exact probabilities.
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Whether arithmetic in this field is exact.
    const EXACT: bool;

    /// `w(l0 + count)`.
    fn weight(w: &WeightFunction, l0: f64, count: u64) -> Result<Self, BoundError>;

    fn from_u64(n: u64) -> Self;

    /// A value not below `x` (exactly `x` for binary-representable input).
    fn from_f64(x: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn to_value(&self) -> BoundValue;

    fn factorial(n: u64) -> Self {
        (1..=n).fold(Self::one(), |acc, i| acc * Self::from_u64(i))
    }

    fn powi(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| acc * self.clone())
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn weight(w: &WeightFunction, l0: f64, count: u64) -> Result<Self, BoundError> {
        let x = BigRational::from_float(l0).map(|b| b + BigRational::from_integer(BigInt::from(count)));
        x.as_ref()
            .and_then(|x| w.evaluate_exact(x))
            .ok_or_else(|| BoundError::NotRational {
                weight: w.to_string(),
                x: format!("{}", l0 + count as f64),
            })
    }

    fn from_u64(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite value")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_value(&self) -> BoundValue {
        BoundValue::exact(self)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn weight(w: &WeightFunction, l0: f64, count: u64) -> Result<Self, BoundError> {
        Ok(w.evaluate(l0 + count as f64)?)
    }

    fn from_u64(n: u64) -> Self {
        n as f64
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_value(&self) -> BoundValue {
        BoundValue::approximate(*self)
    }
}
