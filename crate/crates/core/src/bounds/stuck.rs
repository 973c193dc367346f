use serde::{Deserialize, Serialize};

use super::BoundError;
use crate::weight::{Interval, SeriesSpec, Verdict, WeightAssignment};

/// Lower bounds on the probability that the walk locks onto a freshly
/// reached edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StuckProbability {
    pub degree: usize,
    /// `sup_e w(l0_e)`.
    pub sup_initial_weight: f64,
    /// Enclosure of the largest `sum_{i>=1} 1/w(i + l0)` over the assignment.
    pub series: Interval,
    /// `exp(-2 D sup w(l0) sum_{i>=1} 1/w(i + l0))`, certified lower end.
    pub p: f64,
    pub p_interval: Interval,
    /// `prod_{i>=1} (1 + D sup w(l0) / w(i + l0))^-2`, certified lower end.
    pub product_form: f64,
    pub product_interval: Interval,
}

const SERIES_TOLERANCE: f64 = 1e-12;

pub fn stuck_probability_p(degree: usize, assignment: &WeightAssignment) -> Result<StuckProbability, BoundError> {
    if degree == 0 {
        return Err(BoundError::OutOfRange("degree bound must be positive".into()));
    }
    let sup = assignment.sup_initial_weight()?;
    let d = degree as f64;
    let mut series = Interval::point(0.0);
    let mut product = Interval::point(1.0);
    for (w, l0) in assignment.distinct_pairs() {
        if w.classify(l0).reciprocal_summable != Verdict::Holds {
            return Err(BoundError::Precondition(format!("{w} is not reciprocally summable")));
        }
        let s = w.weighted_tail_sum(0.0, l0, SERIES_TOLERANCE)?;
        if s.upper > series.hi {
            series = s.interval();
        }

        let scale = d * sup;
        let mut n = 1024u64;
        let tail = loop {
            let t = w.series_upper(SeriesSpec::reciprocal(l0, n), SERIES_TOLERANCE)?;
            if scale * t.hi <= 1e-10 || n >= 1 << 22 {
                break t;
            }
            n *= 2;
        };
        let mut log_sum = 0.0;
        for i in 1..n {
            log_sum += (scale / w.evaluate(l0 + i as f64)?).ln_1p();
        }
        let slack = log_sum * 1e-13;
        let lo = (-2.0 * (log_sum + slack + scale * tail.hi)).exp();
        let hi = (-2.0 * (log_sum - slack)).exp();
        if lo < product.lo {
            product = Interval::new(lo, hi);
        }
    }
    let p_interval = Interval::new((-2.0 * d * sup * series.hi).exp(), (-2.0 * d * sup * series.lo).exp());
    Ok(StuckProbability {
        degree,
        sup_initial_weight: sup,
        series,
        p: p_interval.lo,
        p_interval,
        product_form: product.lo,
        product_interval: product,
    })
}

/// `(1 - p)^[n/2]`, bounding the chance that the walk ever gets further
/// than `n` from its start.
pub fn escape_bound(n: u64, p: f64) -> Result<f64, BoundError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(BoundError::OutOfRange(format!("p must lie in (0,1), got {p}")));
    }
    if n == 0 {
        return Err(BoundError::OutOfRange("n must be at least 1".into()));
    }
    Ok((1.0 - p).powf((n / 2) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::WeightFunction;

    #[test]
    fn cubic_weight_on_the_line() {
        let a = WeightAssignment::uniform(WeightFunction::power(3.0).unwrap(), 1.0).unwrap();
        let s = stuck_probability_p(2, &a).unwrap();
        let zeta3_minus_one = 0.202_056_903_159_594_3;
        assert!(s.series.contains(zeta3_minus_one));
        assert!((s.p - (-4.0 * zeta3_minus_one).exp()).abs() < 1e-10);
        assert!((s.p - 0.4456).abs() < 1e-4);
        assert!(s.product_form >= s.p);
        assert!((s.product_form - 0.4733).abs() < 1e-3, "{s:?}");
    }

    #[test]
    fn geometric_weight() {
        let a = WeightAssignment::uniform(WeightFunction::exponential(std::f64::consts::LN_2).unwrap(), 0.0).unwrap();
        let s = stuck_probability_p(1, &a).unwrap();
        assert!((s.p - (-2.0f64).exp()).abs() < 1e-10);
        assert!(s.product_form >= s.p);
    }

    #[test]
    fn non_summable_is_rejected() {
        let a = WeightAssignment::uniform(WeightFunction::power(1.0).unwrap(), 1.0).unwrap();
        assert!(stuck_probability_p(2, &a).is_err());
    }

    #[test]
    fn escape_examples() {
        assert_eq!(escape_bound(1, 0.3).unwrap(), 1.0);
        assert_eq!(escape_bound(4, 0.5).unwrap(), 0.25);
        let p = (-4.0 * 0.202_056_903_159_594_3f64).exp();
        assert!((escape_bound(10, p).unwrap() - 0.0524).abs() < 2e-4);
        assert!(escape_bound(3, 1.0).is_err());
    }
}
