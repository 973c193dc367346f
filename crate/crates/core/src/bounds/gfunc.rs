//! Slowly growing multipliers that keep a summable sequence summable.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Roots;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::BoundError;
use crate::weight::{Neumaier, SeriesSpec, WeightFamily, WeightFunction};

/// A summable sequence `(p_l)_{l >= 1}` with a certified tail bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum TailSequence {
    /// `p_l = (numerator / denominator)^l`.
    Geometric { numerator: u64, denominator: u64 },
    /// `p_l = 1 / (l + shift)^exponent`.
    PowerLaw { exponent: u32, shift: u64 },
    /// `p_l = 1 / w(l + initial)`.
    Weight { weight: WeightFunction, initial: f64 },
}

impl fmt::Display for TailSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailSequence::Geometric { numerator, denominator } => write!(f, "({numerator}/{denominator})^l"),
            TailSequence::PowerLaw { exponent, shift } => write!(f, "1/(l+{shift})^{exponent}"),
            TailSequence::Weight { weight, initial } => write!(f, "1/w(l+{initial}) with w={weight}"),
        }
    }
}

/// Search limit for breakpoints that are located numerically.
const NUMERIC_SEARCH_LIMIT: u64 = 1 << 40;

impl TailSequence {
    /// Uses the exact power-law tail when `w` is an integer power and the
    /// shift is a non-negative integer.
    pub fn from_weight(weight: &WeightFunction, initial: f64) -> Self {
        if let WeightFamily::Power { exponent } = weight.family() {
            let shift = initial + weight.offset();
            if exponent.fract() == 0.0 && *exponent >= 2.0 && *exponent <= 64.0 && shift.fract() == 0.0 && shift >= 0.0 {
                return TailSequence::PowerLaw {
                    exponent: *exponent as u32,
                    shift: shift as u64,
                };
            }
        }
        TailSequence::Weight {
            weight: weight.clone(),
            initial,
        }
    }

    fn validate(&self) -> Result<(), BoundError> {
        match self {
            TailSequence::Geometric { numerator, denominator } if *denominator == 0 || numerator >= denominator => Err(
                BoundError::Precondition(format!("geometric ratio {numerator}/{denominator} must lie in [0,1)")),
            ),
            TailSequence::PowerLaw { exponent, .. } if *exponent < 2 => {
                Err(BoundError::Certification(format!("power law with exponent {exponent} is not summable")))
            }
            TailSequence::Weight { weight, initial } => {
                if weight.classify(*initial).reciprocal_summable.holds() {
                    Ok(())
                } else {
                    Err(BoundError::Certification(format!("1/w is not summable for {weight}")))
                }
            }
            _ => Ok(()),
        }
    }

    pub fn term(&self, l: u64) -> Result<f64, BoundError> {
        Ok(match self {
            TailSequence::Geometric { numerator, denominator } => {
                (*numerator as f64 / *denominator as f64).powf(l as f64)
            }
            TailSequence::PowerLaw { exponent, shift } => ((l + shift) as f64).powi(-(*exponent as i32)),
            TailSequence::Weight { weight, initial } => 1.0 / weight.evaluate(l as f64 + initial)?,
        })
    }

    /// Upper bound on `sum_{l >= n} p_l` as a float.
    pub fn tail_upper(&self, n: u64) -> Result<f64, BoundError> {
        let n = n.max(1);
        Ok(match self {
            TailSequence::Geometric { numerator, denominator } => {
                let r = *numerator as f64 / *denominator as f64;
                r.powf(n as f64) / (1.0 - r) * (1.0 + 1e-12)
            }
            TailSequence::PowerLaw { exponent, shift } => {
                let s = *exponent as f64;
                let y = (2 * n + 2 * shift - 1) as f64;
                2f64.powf(s - 1.0) / ((s - 1.0) * y.powf(s - 1.0)) * (1.0 + 1e-12)
            }
            TailSequence::Weight { weight, initial } => self.weight_tail(weight, *initial, n, 1e-12)?,
        })
    }

    fn weight_tail(&self, w: &WeightFunction, initial: f64, n: u64, tolerance: f64) -> Result<f64, BoundError> {
        Ok(w.series_upper(SeriesSpec::reciprocal(initial, n), tolerance)?.hi)
    }

    /// Whether `sum_{l >= n} p_l < 2^-level` is certified.
    pub fn tail_below(&self, n: &BigUint, level: u64) -> Result<bool, BoundError> {
        match self {
            TailSequence::Geometric { numerator, denominator } => {
                // (a/b)^n / (1 - a/b) < 2^-level  <=>  a^n 2^level b < (b-a) b^n
                let n = to_u32(n)?;
                let a = BigUint::from(*numerator);
                let b = BigUint::from(*denominator);
                let lhs = (a.pow(n) * b.clone()) << to_usize(level)?;
                let rhs = (b.clone() - a) * b.pow(n);
                Ok(lhs < rhs)
            }
            TailSequence::PowerLaw { exponent, shift } => {
                // 2^(s-1) / ((s-1) y^(s-1)) < 2^-level with y = 2n + 2h - 1
                let s1 = exponent - 1;
                let y: BigUint = (n << 1usize) + BigUint::from(2 * shift) - BigUint::one();
                let lhs = BigUint::one() << to_usize(s1 as u64 + level)?;
                Ok(lhs < BigUint::from(s1) * y.pow(s1))
            }
            TailSequence::Weight { weight, initial } => {
                let n = n.to_u64().ok_or_else(|| BoundError::Certification("index beyond u64".into()))?;
                let target = 2f64.powi(-(level as i32));
                Ok(self.weight_tail(weight, *initial, n, target / 8.0)? < target)
            }
        }
    }

    /// Smallest `n >= 1` with `sum_{l >= n} p_l < 2^-level`, as certified by
    /// the tail bound.
    pub fn breakpoint(&self, level: u64) -> Result<BigUint, BoundError> {
        let candidate = match self {
            TailSequence::Geometric { numerator, denominator } => {
                let (a, b) = (*numerator as f64, *denominator as f64);
                if a == 0.0 {
                    BigUint::one()
                } else {
                    let est = (level as f64 * std::f64::consts::LN_2 + (b / (b - a)).ln()) / (b / a).ln();
                    BigUint::from((est.floor() as u64).saturating_sub(2).max(1))
                }
            }
            TailSequence::PowerLaw { exponent, shift } => {
                let s1 = exponent - 1;
                let t = BigUint::one() << to_usize(s1 as u64 + level)?;
                let mut r: BigUint = Roots::nth_root(&(t.clone() / BigUint::from(s1)), s1);
                while BigUint::from(s1) * r.pow(s1) <= t {
                    r += 1u32;
                }
                // y = 2n + 2h - 1 >= r
                let offset = BigUint::from(2 * shift);
                let num = r + BigUint::one();
                if num <= offset {
                    BigUint::one()
                } else {
                    let n: BigUint = (num - offset + BigUint::one()) >> 1usize;
                    n.max(BigUint::one())
                }
            }
            TailSequence::Weight { .. } => {
                let mut hi = 1u64;
                while !self.tail_below(&BigUint::from(hi), level)? {
                    if hi >= NUMERIC_SEARCH_LIMIT {
                        return Err(BoundError::Certification(format!(
                            "breakpoint for level {level} lies beyond {NUMERIC_SEARCH_LIMIT}"
                        )));
                    }
                    hi *= 2;
                }
                let mut lo = hi / 2;
                while lo + 1 < hi {
                    let mid = lo + (hi - lo) / 2;
                    if self.tail_below(&BigUint::from(mid), level)? {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                BigUint::from(hi)
            }
        };
        let mut n = candidate;
        while !self.tail_below(&n, level)? {
            n += 1u32;
        }
        while n > BigUint::one() && self.tail_below(&(n.clone() - 1u32), level)? {
            n -= 1u32;
        }
        Ok(n)
    }
}

fn to_u32(n: &BigUint) -> Result<u32, BoundError> {
    n.to_u32()
        .ok_or_else(|| BoundError::Certification(format!("exponent {n} too large for exact geometric tails")))
}

fn to_usize(n: u64) -> Result<usize, BoundError> {
    usize::try_from(n).map_err(|_| BoundError::Certification(format!("shift {n} too large")))
}

/// How a block's inequality was established.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum BlockCheck {
    /// The block was summed term by term; `upper` bounds the weighted sum.
    Direct { terms: u64, upper: f64 },
    /// The tail from the block start is certified below `2^-N^m`.
    Tail,
}

/// One block `[start, end)` on which `g = 2^m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GBlock {
    pub m: u32,
    pub start: BigUint,
    pub end: BigUint,
    /// The target `2^-(N^m - m)` as a power of two exponent.
    pub target_log2: i64,
    pub check: Option<BlockCheck>,
    pub holds: Option<bool>,
}

/// A non-decreasing unbounded step function `g` with `sum g(l) p_l <= mass`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GFunction {
    pub sequence: TailSequence,
    pub base: u32,
    /// `n_{N^m}` for `m = 0, 1, ...`.
    pub breakpoints: Vec<BigUint>,
    pub blocks: Vec<GBlock>,
    /// Certified upper bound on `sum_l g(l) p_l`.
    pub mass: f64,
}

impl GFunction {
    /// `g(l)` as a power-of-two exponent; `None` beyond the last breakpoint.
    pub fn log2_value(&self, l: &BigUint) -> Option<u32> {
        if l >= self.breakpoints.last()? {
            return None;
        }
        Some(self.breakpoints.iter().rposition(|b| b <= l).map_or(0, |m| m as u32))
    }

    pub fn value(&self, l: &BigUint) -> Option<BigUint> {
        self.log2_value(l).map(|m| BigUint::one() << m as usize)
    }

    /// Smallest index where `g` exceeds `threshold`.
    pub fn first_index_exceeding(&self, threshold: f64) -> Option<BigUint> {
        let m = (0..self.breakpoints.len()).find(|&m| 2f64.powi(m as i32) > threshold)?;
        (m + 1 < self.breakpoints.len()).then(|| self.breakpoints[m].clone())
    }

    pub fn is_monotone(&self) -> bool {
        self.breakpoints.windows(2).all(|w| w[0] <= w[1])
    }
}

/// Direct summation is used for blocks with at most this many terms.
pub const DIRECT_BLOCK_LIMIT: u64 = 1_000_000;

/// Builds `g` from `blocks + 1` breakpoints `n_{N^m}` and checks the
/// per-block inequality on the first `checked` blocks.
pub fn construct_g(sequence: TailSequence, base: u32, blocks: u32, checked: u32) -> Result<GFunction, BoundError> {
    sequence.validate()?;
    if base < 2 {
        return Err(BoundError::OutOfRange(format!("base must be at least 2, got {base}")));
    }
    let mut levels = Vec::new();
    for m in 0..=blocks {
        let level = (base as u64)
            .checked_pow(m)
            .filter(|&l| l <= 1 << 24)
            .ok_or_else(|| BoundError::OutOfRange(format!("level {base}^{m} is too large")))?;
        levels.push(level);
    }
    let breakpoints: Vec<BigUint> = levels.iter().map(|&l| sequence.breakpoint(l)).collect::<Result<_, _>>()?;

    let mut out = Vec::new();
    for m in 0..blocks {
        let start = breakpoints[m as usize].clone();
        let end = breakpoints[m as usize + 1].clone();
        let level = levels[m as usize];
        let target_log2 = m as i64 - level as i64;
        let (check, holds) = if m < checked {
            let (c, h) = check_block(&sequence, m, &start, &end, level)?;
            (Some(c), Some(h))
        } else {
            (None, None)
        };
        out.push(GBlock {
            m,
            start,
            end,
            target_log2,
            check,
            holds,
        });
    }

    // l < n_N carries g = 1 and contributes at most the whole series; block
    // m >= 1 contributes less than 2^(m - N^m).
    let mut mass = sequence.tail_upper(1)?;
    let mut m = 1i32;
    loop {
        let level = (base as f64).powi(m);
        let term = 2f64.powf(m as f64 - level);
        if term < 1e-30 {
            mass += 2.0 * term;
            break;
        }
        mass += term;
        m += 1;
    }
    Ok(GFunction {
        sequence,
        base,
        breakpoints,
        blocks: out,
        mass: mass * (1.0 + 1e-12),
    })
}

fn check_block(
    sequence: &TailSequence,
    m: u32,
    start: &BigUint,
    end: &BigUint,
    level: u64,
) -> Result<(BlockCheck, bool), BoundError> {
    let len = if end > start { end - start } else { BigUint::zero() };
    if let (Some(a), Some(b), Some(n)) = (start.to_u64(), end.to_u64(), len.to_u64()) {
        if n <= DIRECT_BLOCK_LIMIT {
            let mut acc = Neumaier::default();
            for l in a..b {
                acc.add(sequence.term(l)?);
            }
            let upper = acc.total() * 2f64.powi(m as i32) * (1.0 + 1e-12);
            let holds = upper < 2f64.powf(m as f64 - level as f64);
            return Ok((BlockCheck::Direct { terms: n, upper }, holds));
        }
    }
    Ok((BlockCheck::Tail, sequence.tail_below(start, level)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn geometric_breakpoints() {
        let s = TailSequence::Geometric {
            numerator: 1,
            denominator: 2,
        };
        for l in 0..40 {
            assert_eq!(s.breakpoint(l).unwrap(), big(l + 2), "level {l}");
        }
    }

    #[test]
    fn power_law_breakpoints() {
        let inv_sq = TailSequence::PowerLaw { exponent: 2, shift: 0 };
        let shifted = TailSequence::PowerLaw { exponent: 2, shift: 1 };
        for l in 0..30 {
            assert_eq!(inv_sq.breakpoint(l).unwrap(), big((1 << l) + 1));
            assert_eq!(shifted.breakpoint(l).unwrap(), big(1 << l).max(big(1)));
        }
        let cubic = TailSequence::PowerLaw { exponent: 3, shift: 0 };
        for l in 0..20 {
            let n = cubic.breakpoint(l).unwrap();
            let exact_tail = |n: u64| -> f64 { (n..n + 2_000_000).map(|i| (i as f64).powi(-3)).sum() };
            assert!(exact_tail(n.to_u64().unwrap()) < 2f64.powi(-(l as i32)));
        }
    }

    #[test]
    fn from_weight_uses_exact_tails() {
        let w = WeightFunction::power(2.0).unwrap();
        assert_eq!(
            TailSequence::from_weight(&w, 1.0),
            TailSequence::PowerLaw { exponent: 2, shift: 1 }
        );
        let w = WeightFunction::power(2.5).unwrap();
        assert!(matches!(TailSequence::from_weight(&w, 1.0), TailSequence::Weight { .. }));
    }

    #[test]
    fn numeric_breakpoints_agree_with_exact_ones() {
        let exact = TailSequence::PowerLaw { exponent: 3, shift: 1 };
        let numeric = TailSequence::Weight {
            weight: WeightFunction::power(3.0).unwrap(),
            initial: 1.0,
        };
        for l in 0..12 {
            let e = exact.breakpoint(l).unwrap();
            let n = numeric.breakpoint(l).unwrap();
            assert!(n <= e, "level {l}: numeric {n} exact {e}");
        }
    }

    #[test]
    fn g_is_monotone_unbounded_with_finite_mass() {
        for seq in [
            TailSequence::Geometric {
                numerator: 1,
                denominator: 2,
            },
            TailSequence::PowerLaw { exponent: 2, shift: 0 },
            TailSequence::from_weight(&WeightFunction::power(2.0).unwrap(), 1.0),
        ] {
            let g = construct_g(seq.clone(), 2, 21, 10).unwrap();
            assert!(g.is_monotone());
            assert!(g.first_index_exceeding(1e6).is_some(), "{seq}");
            assert!(g.mass.is_finite());
            for b in g.blocks.iter().take(10) {
                assert_eq!(b.holds, Some(true), "{seq} block {}", b.m);
            }
            assert_eq!(g.log2_value(&big(0)), Some(0));
        }
    }
}
