use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::report::FLOAT_SLACK;
use super::{BoundError, BoundValue, Scalar};
use crate::weight::{Interval, WeightFunction};

/// Upper limit on the parts of an ordered tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cap {
    Finite(u64),
    Infinite,
}

impl Cap {
    fn limit(self, a: u64) -> u64 {
        match self {
            Cap::Finite(c) => c.min(a),
            Cap::Infinite => a,
        }
    }
}

struct PartitionSum<'a, S> {
    reciprocal: &'a [S],
    memo: HashMap<(u32, u64, u64), S>,
}

impl<S: Scalar> PartitionSum<'_, S> {
    /// Sum over `cap >= h_1 >= ... >= h_slots >= 0` with total `budget`.
    fn eval(&mut self, slots: u32, budget: u64, cap: u64) -> S {
        if slots == 0 {
            return if budget == 0 { S::one() } else { S::zero() };
        }
        let cap = cap.min(budget);
        if budget > slots as u64 * cap {
            return S::zero();
        }
        if let Some(v) = self.memo.get(&(slots, budget, cap)) {
            return v.clone();
        }
        let lowest = budget.div_ceil(slots as u64);
        let mut total = S::zero();
        for h in lowest..=cap {
            let rest = self.eval(slots - 1, budget - h, h);
            if !rest.is_zero() {
                total = total + self.reciprocal[h as usize].clone() * rest;
            }
        }
        self.memo.insert((slots, budget, cap), total.clone());
        total
    }
}

fn reciprocals<S: Scalar>(w: &WeightFunction, b: f64, upto: u64) -> Result<Vec<S>, BoundError> {
    (0..=upto).map(|h| Ok(S::one() / S::weight(w, b, h)?)).collect()
}

/// Sum over non-increasing `m`-tuples of non-negative integers bounded by `c`
/// with total `a` of `prod_j 1/w(b + h_j)`; zero when no tuple exists.
pub fn q_m<S: Scalar>(m: u32, a: u64, b: f64, c: Cap, w: &WeightFunction) -> Result<S, BoundError> {
    if m == 0 {
        return Err(BoundError::OutOfRange("Q_m needs m >= 1".into()));
    }
    let cap = c.limit(a);
    if a > m as u64 * cap {
        return Ok(S::zero());
    }
    let reciprocal = reciprocals::<S>(w, b, cap)?;
    let mut dp = PartitionSum {
        reciprocal: &reciprocal,
        memo: HashMap::new(),
    };
    Ok(dp.eval(m, a, cap))
}

/// [`q_m`] by listing every admissible tuple.
pub fn q_m_enumerated<S: Scalar>(m: u32, a: u64, b: f64, c: Cap, w: &WeightFunction) -> Result<S, BoundError> {
    if m == 0 {
        return Err(BoundError::OutOfRange("Q_m needs m >= 1".into()));
    }
    let cap = c.limit(a);
    let reciprocal = reciprocals::<S>(w, b, cap)?;
    let mut tuple = Vec::with_capacity(m as usize);
    let mut total = S::zero();
    fn walk<S: Scalar>(tuple: &mut Vec<u64>, m: usize, left: u64, max: u64, rec: &[S], total: &mut S) {
        if tuple.len() == m {
            if left == 0 {
                let term = tuple.iter().fold(S::one(), |acc, &h| acc * rec[h as usize].clone());
                *total = total.clone() + term;
            }
            return;
        }
        for h in 0..=max.min(left) {
            tuple.push(h);
            walk(tuple, m, left - h, h, rec, total);
            tuple.pop();
        }
    }
    walk(&mut tuple, m as usize, a, cap, &reciprocal, &mut total);
    Ok(total)
}

/// Both sides of `sum_{s=0}^{j} Q_m(s + a; b; c) <= c(b)^m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CBoundCheck {
    pub m: u32,
    pub a: u64,
    pub j: u64,
    pub b: f64,
    pub cap: Cap,
    pub lhs: BoundValue,
    /// Enclosure of `c(b)^m`.
    pub rhs: Interval,
    pub passed: bool,
}

pub fn c_bound_check<S: Scalar>(
    m: u32,
    a: u64,
    j: u64,
    b: f64,
    c: Cap,
    w: &WeightFunction,
) -> Result<CBoundCheck, BoundError> {
    let mut lhs = S::zero();
    for s in 0..=j {
        lhs = lhs + q_m::<S>(m, s + a, b, c, w)?;
    }
    let cb = w.tail_sum_c(b, 1e-12)?;
    let rhs = Interval::new(cb.lower.powi(m as i32), cb.upper.powi(m as i32));
    let lhs_hi = lhs.to_f64() * (1.0 + FLOAT_SLACK);
    Ok(CBoundCheck {
        m,
        a,
        j,
        b,
        cap: c,
        passed: lhs_hi <= rhs.lo,
        lhs: lhs.to_value(),
        rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn examples() {
        let w = WeightFunction::power(2.0).unwrap();
        assert_eq!(q_m::<BigRational>(1, 3, 1.0, Cap::Finite(5), &w).unwrap(), r(1, 16));
        assert_eq!(q_m::<BigRational>(2, 2, 1.0, Cap::Finite(2), &w).unwrap(), r(25, 144));
        assert_eq!(q_m::<BigRational>(2, 5, 1.0, Cap::Finite(2), &w).unwrap(), r(0, 1));
        let osc = WeightFunction::oscillating_power(1.0).unwrap();
        assert_eq!(q_m::<BigRational>(2, 5, 1.0, Cap::Finite(2), &osc).unwrap(), r(0, 1));
    }

    #[test]
    fn dp_matches_enumeration_small() {
        let w = WeightFunction::power(3.0).unwrap();
        for m in 1..=3 {
            for a in 0..=9 {
                for c in [Cap::Finite(0), Cap::Finite(2), Cap::Finite(4), Cap::Infinite] {
                    let dp = q_m::<BigRational>(m, a, 2.0, c, &w).unwrap();
                    let en = q_m_enumerated::<BigRational>(m, a, 2.0, c, &w).unwrap();
                    assert_eq!(dp, en, "m={m} a={a} c={c:?}");
                }
            }
        }
    }

    #[test]
    fn c_bound_examples() {
        let w = WeightFunction::power(2.0).unwrap();
        let one = c_bound_check::<BigRational>(1, 0, 10, 1.0, Cap::Infinite, &w).unwrap();
        assert!(one.passed);
        let partial: f64 = (1..=11).map(|i| 1.0 / (i * i) as f64).sum();
        assert!((one.lhs.approx() - partial).abs() < 1e-15);
        assert!(c_bound_check::<BigRational>(2, 3, 5, 1.0, Cap::Infinite, &w).unwrap().passed);
        let first = c_bound_check::<BigRational>(1, 0, 0, 1.0, Cap::Infinite, &w).unwrap();
        assert_eq!(first.lhs.approx(), 1.0);
        assert!(first.passed);
    }
}
