//! Reinforcement weight functions, summability classification and certified
//! tail sums.
//!
//! Every infinite sum returned from here is an interval: explicit partial
//! sums are combined with a family-specific analytic remainder bound, so a
//! value is never the result of bare truncation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeId, VertexId};

const TERM_BUDGET: u64 = 1 << 26;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("invalid weight parameter: {0}")]
    InvalidParameter(String),
    #[error("weight argument {0} outside the domain [0, inf)")]
    Domain(f64),
    #[error("weight at {x} is not positive")]
    NonPositive { x: f64 },
    #[error("weight at {x} overflows f64 (ln w = {ln_value}); use log-space weights")]
    Overflow { x: f64, ln_value: f64 },
    #[error("table weight needs an integer argument, got {0}")]
    NonIntegerTableArgument(f64),
    #[error("argument {x} lies beyond the table of length {len} and no tail law was declared")]
    BeyondTable { x: f64, len: usize },
    #[error("tail diverges: {0}")]
    TailDiverges(String),
    #[error("summability cannot be decided for {0}")]
    Unclassifiable(String),
    #[error("tolerance {tolerance} unreachable within the term budget; best interval [{lower}, {upper}]")]
    ToleranceUnreachable { tolerance: f64, lower: f64, upper: f64 },
    #[error("cannot parse weight spec {spec:?}: {message}")]
    Parse { spec: String, message: String },
}

/// Declared growth law `w(x) = coefficient * x^exponent * ln(x+1)^log_exponent`
/// used past the end of a user table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailLaw {
    pub coefficient: f64,
    pub exponent: f64,
    pub log_exponent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserTable {
    /// `values[i]` is the weight at integer argument `i`.
    pub values: Vec<f64>,
    pub tail: Option<TailLaw>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum WeightFamily {
    /// `x^exponent`
    Power { exponent: f64 },
    /// `x^exponent * ln(x+1)^log_exponent`
    PowerLog { exponent: f64, log_exponent: f64 },
    /// `exp(rate * x)`
    Exponential { rate: f64 },
    /// `x^(1+exponent) / (2 + (-1)^floor(x))`
    OscillatingPower { exponent: f64 },
    /// `exp(x * (2 + (-1)^floor(x)))`
    OscillatingExp,
    Table(UserTable),
}

/// A weight function `x -> family(x + offset)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct WeightFunction {
    family: WeightFamily,
    offset: f64,
}

/// Outcome of a summability test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Undetermined,
}

impl Verdict {
    fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }

    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }
}

/// Whether initial weights are integers, the regime in which reciprocal
/// summability alone is known to suffice for attraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialWeightRegime {
    Integer,
    Real,
}

impl InitialWeightRegime {
    pub fn of(l0: f64) -> Self {
        if l0.fract() == 0.0 {
            InitialWeightRegime::Integer
        } else {
            InitialWeightRegime::Real
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummabilityClass {
    /// `sum 1/w(i)` converges.
    pub reciprocal_summable: Verdict,
    /// `sum i/w(i + l0)` converges.
    pub linear_moment_summable: Verdict,
    /// `sum sqrt(i)/w(i + l0)` converges.
    pub half_moment_summable: Verdict,
    /// `sup i/w(i + l0)` is finite.
    pub linear_ratio_bounded: Verdict,
    pub initial_weight: f64,
    pub regime: InitialWeightRegime,
    pub note: Option<String>,
}

impl SummabilityClass {
    /// Checks the implication chain linear moment => half moment =>
    /// reciprocal, and linear moment => bounded linear ratio.
    pub fn implications_hold(&self) -> bool {
        let implies = |a: Verdict, b: Verdict| !(a == Verdict::Holds && b == Verdict::Fails);
        implies(self.linear_moment_summable, self.half_moment_summable)
            && implies(self.half_moment_summable, self.reciprocal_summable)
            && implies(self.linear_moment_summable, self.linear_ratio_bounded)
    }
}

/// Closed interval of reals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    fn scale(self, c: f64) -> Self {
        if c >= 0.0 {
            Interval::new(self.lo * c, self.hi * c)
        } else {
            Interval::new(self.hi * c, self.lo * c)
        }
    }

    fn add(self, o: Interval) -> Self {
        Interval::new(self.lo + o.lo, self.hi + o.hi)
    }

    /// Widens by a relative amount on each side (bounds are non-negative
    /// sums in every caller).
    fn widen(self, rel: f64) -> Self {
        Interval::new(self.lo - rel * self.lo.abs(), self.hi + rel * self.hi.abs())
    }
}

/// A series value with its certified enclosure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedSum {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// Number of explicitly summed terms.
    pub terms: u64,
    /// Enclosure of the analytic remainder.
    pub remainder: Interval,
}

impl CertifiedSum {
    pub fn interval(&self) -> Interval {
        Interval::new(self.lower, self.upper)
    }
}

/// Series `sum_{j >= start} j^alpha / w(shift + stride * j)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesSpec {
    pub alpha: f64,
    pub shift: f64,
    pub stride: u32,
    pub start: u64,
}

impl SeriesSpec {
    pub fn reciprocal(shift: f64, start: u64) -> Self {
        SeriesSpec {
            alpha: 0.0,
            shift,
            stride: 1,
            start,
        }
    }
}

/// Compensated (Neumaier) accumulator.
#[derive(Clone, Copy, Default, Debug)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

fn parity_sign(y: f64) -> f64 {
    if (y.floor() as i64).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `sum 1/(x^(rho-alpha) ln(x+1)^beta)`-type convergence test.
fn moment_converges(rho: f64, beta: f64, alpha: f64) -> bool {
    let sigma = rho - alpha;
    sigma > 1.0 || (sigma == 1.0 && beta > 1.0)
}

fn ratio_bounded(rho: f64, beta: f64) -> bool {
    rho > 1.0 || (rho == 1.0 && beta >= 0.0)
}

impl WeightFunction {
    pub fn new(family: WeightFamily, offset: f64) -> Result<Self, WeightError> {
        let bad = |m: String| Err(WeightError::InvalidParameter(m));
        if !offset.is_finite() || offset < 0.0 {
            return bad(format!("offset must be finite and >= 0, got {offset}"));
        }
        match &family {
            WeightFamily::Power { exponent } | WeightFamily::OscillatingPower { exponent } => {
                if !exponent.is_finite() {
                    return bad(format!("exponent must be finite, got {exponent}"));
                }
                if matches!(family, WeightFamily::OscillatingPower { .. }) && *exponent < -1.0 {
                    return bad(format!("oscillating exponent must be >= -1, got {exponent}"));
                }
            }
            WeightFamily::PowerLog { exponent, log_exponent } => {
                if !exponent.is_finite() || !log_exponent.is_finite() {
                    return bad("power-log parameters must be finite".into());
                }
                if *log_exponent < 0.0 {
                    return bad(format!("log exponent must be >= 0, got {log_exponent}"));
                }
            }
            WeightFamily::Exponential { rate } => {
                if !rate.is_finite() {
                    return bad(format!("rate must be finite, got {rate}"));
                }
            }
            WeightFamily::OscillatingExp => {}
            WeightFamily::Table(t) => {
                if t.values.is_empty() {
                    return bad("table must contain at least one value".into());
                }
                if let Some(v) = t.values.iter().find(|v| !v.is_finite() || **v <= 0.0) {
                    return bad(format!("table values must be finite and positive, found {v}"));
                }
                if let Some(l) = &t.tail {
                    if !(l.coefficient.is_finite() && l.coefficient > 0.0)
                        || !l.exponent.is_finite()
                        || !(l.log_exponent.is_finite() && l.log_exponent >= 0.0)
                    {
                        return bad("tail law needs coefficient > 0, finite exponent, log exponent >= 0".into());
                    }
                }
            }
        }
        Ok(WeightFunction { family, offset })
    }

    pub fn power(exponent: f64) -> Result<Self, WeightError> {
        Self::new(WeightFamily::Power { exponent }, 0.0)
    }

    /// `(x + 1)^exponent`, positive at zero.
    pub fn shifted_power(exponent: f64) -> Result<Self, WeightError> {
        Self::new(WeightFamily::Power { exponent }, 1.0)
    }

    pub fn power_log(exponent: f64, log_exponent: f64) -> Result<Self, WeightError> {
        Self::new(WeightFamily::PowerLog { exponent, log_exponent }, 0.0)
    }

    pub fn exponential(rate: f64) -> Result<Self, WeightError> {
        Self::new(WeightFamily::Exponential { rate }, 0.0)
    }

    pub fn oscillating_power(exponent: f64) -> Result<Self, WeightError> {
        Self::new(WeightFamily::OscillatingPower { exponent }, 0.0)
    }

    pub fn oscillating_exp() -> Self {
        WeightFunction {
            family: WeightFamily::OscillatingExp,
            offset: 0.0,
        }
    }

    pub fn table(values: Vec<f64>, tail: Option<TailLaw>) -> Result<Self, WeightError> {
        Self::new(WeightFamily::Table(UserTable { values, tail }), 0.0)
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `w(x)`.
    pub fn evaluate(&self, x: f64) -> Result<f64, WeightError> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(WeightError::Domain(x));
        }
        let y = x + self.offset;
        let v = match &self.family {
            WeightFamily::Power { exponent } => powr(y, *exponent),
            WeightFamily::PowerLog { exponent, log_exponent } => {
                powr(y, *exponent) * powr(y.ln_1p(), *log_exponent)
            }
            WeightFamily::Exponential { rate } => (rate * y).exp(),
            WeightFamily::OscillatingPower { exponent } => powr(y, 1.0 + exponent) / (2.0 + parity_sign(y)),
            WeightFamily::OscillatingExp => (y * (2.0 + parity_sign(y))).exp(),
            WeightFamily::Table(t) => {
                let (value, _) = table_value(t, y)?;
                value
            }
        };
        if v.is_infinite() {
            return Err(WeightError::Overflow {
                x,
                ln_value: self.ln_evaluate(x)?,
            });
        }
        if !(v > 0.0) {
            return Err(WeightError::NonPositive { x });
        }
        Ok(v)
    }

    /// `ln w(x)`, finite for every positive weight.
    pub fn ln_evaluate(&self, x: f64) -> Result<f64, WeightError> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(WeightError::Domain(x));
        }
        let y = x + self.offset;
        let lnpow = |r: f64| if r == 0.0 { 0.0 } else { r * y.ln() };
        let v = match &self.family {
            WeightFamily::Power { exponent } => lnpow(*exponent),
            WeightFamily::PowerLog { exponent, log_exponent } => {
                let lp = if *log_exponent == 0.0 { 0.0 } else { log_exponent * y.ln_1p().ln() };
                lnpow(*exponent) + lp
            }
            WeightFamily::Exponential { rate } => rate * y,
            WeightFamily::OscillatingPower { exponent } => lnpow(1.0 + exponent) - (2.0 + parity_sign(y)).ln(),
            WeightFamily::OscillatingExp => y * (2.0 + parity_sign(y)),
            WeightFamily::Table(t) => {
                let (_, ln) = table_value(t, y)?;
                ln
            }
        };
        if v.is_nan() || v == f64::NEG_INFINITY {
            return Err(WeightError::NonPositive { x });
        }
        Ok(v)
    }

    /// `w(x)` as an exact rational when it is rational at `x`.
    pub fn evaluate_exact(&self, x: &BigRational) -> Option<BigRational> {
        if x.is_negative() {
            return None;
        }
        let y = x + BigRational::from_float(self.offset)?;
        let int_exp = |r: f64| -> Option<i32> {
            (r.fract() == 0.0 && (0.0..=256.0).contains(&r)).then_some(r as i32)
        };
        let v = match &self.family {
            WeightFamily::Power { exponent } => num_traits::pow::Pow::pow(&y, int_exp(*exponent)?),
            WeightFamily::PowerLog { exponent, log_exponent } if *log_exponent == 0.0 => {
                num_traits::pow::Pow::pow(&y, int_exp(*exponent)?)
            }
            WeightFamily::Exponential { rate } if *rate == 0.0 => BigRational::one(),
            WeightFamily::OscillatingPower { exponent } => {
                let num = num_traits::pow::Pow::pow(&y, int_exp(1.0 + exponent)?);
                let odd = y.floor().to_integer() % BigInt::from(2) != BigInt::zero();
                let den = if odd { 1 } else { 3 };
                num / BigRational::from_integer(BigInt::from(den))
            }
            WeightFamily::Table(t) => {
                if !y.is_integer() {
                    return None;
                }
                let i = y.to_integer().to_usize()?;
                BigRational::from_float(*t.values.get(i)?)?
            }
            _ => return None,
        };
        (v > BigRational::zero()).then_some(v)
    }

    /// Whether `sum_i i^alpha / w(i + b)` converges (independent of `b`).
    pub fn moment_summable(&self, alpha: f64) -> Verdict {
        match &self.family {
            WeightFamily::Power { exponent } => Verdict::from_bool(moment_converges(*exponent, 0.0, alpha)),
            WeightFamily::PowerLog { exponent, log_exponent } => {
                Verdict::from_bool(moment_converges(*exponent, *log_exponent, alpha))
            }
            WeightFamily::Exponential { rate } => Verdict::from_bool(*rate > 0.0),
            WeightFamily::OscillatingPower { exponent } => {
                Verdict::from_bool(moment_converges(1.0 + exponent, 0.0, alpha))
            }
            WeightFamily::OscillatingExp => Verdict::Holds,
            WeightFamily::Table(t) => match &t.tail {
                Some(l) => Verdict::from_bool(moment_converges(l.exponent, l.log_exponent, alpha)),
                None => Verdict::Undetermined,
            },
        }
    }

    fn ratio_bounded(&self) -> Verdict {
        match &self.family {
            WeightFamily::Power { exponent } => Verdict::from_bool(ratio_bounded(*exponent, 0.0)),
            WeightFamily::PowerLog { exponent, log_exponent } => {
                Verdict::from_bool(ratio_bounded(*exponent, *log_exponent))
            }
            WeightFamily::Exponential { rate } => Verdict::from_bool(*rate > 0.0),
            WeightFamily::OscillatingPower { exponent } => Verdict::from_bool(ratio_bounded(1.0 + exponent, 0.0)),
            WeightFamily::OscillatingExp => Verdict::Holds,
            WeightFamily::Table(t) => match &t.tail {
                Some(l) => Verdict::from_bool(ratio_bounded(l.exponent, l.log_exponent)),
                None => Verdict::Undetermined,
            },
        }
    }

    /// Summability conditions of `w` at initial weight `l0`.
    pub fn classify(&self, l0: f64) -> SummabilityClass {
        let note = match &self.family {
            WeightFamily::Table(t) if t.tail.is_none() => {
                Some("unclassifiable: user table without a declared tail law".to_string())
            }
            _ if InitialWeightRegime::of(l0) == InitialWeightRegime::Real => Some(
                "non-integer initial weight: reciprocal summability alone is not known to suffice".to_string(),
            ),
            _ => None,
        };
        let class = SummabilityClass {
            reciprocal_summable: self.moment_summable(0.0),
            linear_moment_summable: self.moment_summable(1.0),
            half_moment_summable: self.moment_summable(0.5),
            linear_ratio_bounded: self.ratio_bounded(),
            initial_weight: l0,
            regime: InitialWeightRegime::of(l0),
            note,
        };
        assert!(class.implications_hold(), "summability implication chain broken for {self}: {class:?}");
        class
    }

    fn require_summable(&self, alpha: f64) -> Result<(), WeightError> {
        match self.moment_summable(alpha) {
            Verdict::Holds => Ok(()),
            Verdict::Fails => Err(WeightError::TailDiverges(format!(
                "sum of i^{alpha}/w(i+b) diverges for {self}"
            ))),
            Verdict::Undetermined => Err(WeightError::Unclassifiable(self.to_string())),
        }
    }

    /// `c(b) = sum_{l >= 0} 1/w(l + b)` to absolute accuracy `tolerance`.
    pub fn tail_sum_c(&self, b: f64, tolerance: f64) -> Result<CertifiedSum, WeightError> {
        self.series(SeriesSpec::reciprocal(b, 0), tolerance)
    }

    /// `sum_{i >= 1} i^alpha / w(i + b)` to absolute accuracy `tolerance`.
    pub fn weighted_tail_sum(&self, alpha: f64, b: f64, tolerance: f64) -> Result<CertifiedSum, WeightError> {
        self.series(
            SeriesSpec {
                alpha,
                shift: b,
                stride: 1,
                start: 1,
            },
            tolerance,
        )
    }

    /// Evaluates a series with a certified enclosure of half-width at most
    /// `tolerance`.
    pub fn series(&self, spec: SeriesSpec, tolerance: f64) -> Result<CertifiedSum, WeightError> {
        if !(tolerance > 0.0) {
            return Err(WeightError::InvalidParameter(format!("tolerance must be > 0, got {tolerance}")));
        }
        if spec.stride == 0 || !(spec.alpha >= 0.0) || !(spec.shift >= 0.0) {
            return Err(WeightError::InvalidParameter(format!("bad series specification {spec:?}")));
        }
        self.require_summable(spec.alpha)?;
        let s = spec.shift + self.offset;
        let tau = spec.stride as f64;
        let term = |j: u64| -> Result<f64, WeightError> {
            let jf = j as f64;
            let num = if spec.alpha == 0.0 { 1.0 } else { jf.powf(spec.alpha) };
            if num == 0.0 {
                return Ok(0.0);
            }
            let x = spec.shift + tau * jf;
            match self.evaluate(x) {
                Ok(w) => Ok(num / w),
                Err(WeightError::Overflow { ln_value, .. }) => Ok((num.ln() - ln_value).exp()),
                Err(e) => Err(e),
            }
        };

        let mut acc = Neumaier::default();
        let mut j = spec.start;
        let mut n = spec.start.max(self.remainder_start(spec.alpha, s, tau)).max(spec.start + 16);
        let mut best: Interval;
        loop {
            while j < n {
                acc.add(term(j)?);
                j += 1;
            }
            let partial = acc.total();
            let terms = j - spec.start;
            let slack = partial * (16.0 * f64::EPSILON) * (1.0 + terms as f64 * f64::EPSILON);
            let rem = self
                .remainder(spec.alpha, s, tau, n)
                .ok_or_else(|| WeightError::Unclassifiable(self.to_string()))?
                .widen(1e-12);
            let total = Interval::new(partial - slack + rem.lo, partial + slack + rem.hi);
            let total = Interval::new(total.lo.max(0.0), total.hi);
            best = total;
            if total.width() <= 2.0 * tolerance {
                return Ok(CertifiedSum {
                    value: total.mid(),
                    lower: total.lo,
                    upper: total.hi,
                    terms,
                    remainder: rem,
                });
            }
            if terms >= TERM_BUDGET {
                break;
            }
            n = (2 * n).max(n + 16);
        }
        Err(WeightError::ToleranceUnreachable {
            tolerance,
            lower: best.lo,
            upper: best.hi,
        })
    }

    /// Enclosure of `sum_{j >= start} j^alpha / w(shift + stride*j)` whose
    /// upper end is always valid, tightened until the width drops below
    /// `tolerance` or the term budget runs out.
    pub fn series_upper(&self, spec: SeriesSpec, tolerance: f64) -> Result<Interval, WeightError> {
        match self.series(spec, tolerance) {
            Ok(s) => Ok(s.interval()),
            Err(WeightError::ToleranceUnreachable { lower, upper, .. }) => Ok(Interval::new(lower, upper)),
            Err(e) => Err(e),
        }
    }

    /// Smallest `N` from which [`Self::remainder`] is valid.
    fn remainder_start(&self, alpha: f64, s: f64, tau: f64) -> u64 {
        let decreasing_from = |rho: f64| -> u64 {
            if alpha == 0.0 {
                1
            } else {
                (alpha * s / (tau * (rho - alpha))).floor() as u64 + 1
            }
        };
        match &self.family {
            WeightFamily::Power { .. } => 1,
            WeightFamily::PowerLog { .. } => 2,
            WeightFamily::OscillatingPower { exponent } => decreasing_from(1.0 + exponent).max(1),
            WeightFamily::Exponential { rate } => {
                if alpha == 0.0 {
                    0
                } else {
                    let q = (-rate * tau).exp();
                    // need ((N+1)/N)^alpha * q < 1
                    let lim = 1.0 / ((-(q.ln()) / alpha).exp() - 1.0);
                    lim.floor() as u64 + 2
                }
            }
            WeightFamily::OscillatingExp => {
                if alpha == 0.0 {
                    0
                } else {
                    let lim = 1.0 / ((tau / alpha).exp() - 1.0);
                    lim.floor() as u64 + 2
                }
            }
            WeightFamily::Table(t) => {
                let len = t.values.len() as f64;
                (((len - s) / tau).ceil().max(0.0) as u64 + 2).max(2)
            }
        }
    }

    /// Enclosure of the tail `sum_{j >= n} j^alpha / base(s + tau*j)`.
    fn remainder(&self, alpha: f64, s: f64, tau: f64, n: u64) -> Option<Interval> {
        let nf = n as f64;
        match &self.family {
            WeightFamily::Power { exponent } => Some(power_tail(alpha, *exponent, s, tau, nf)),
            WeightFamily::PowerLog { exponent, log_exponent } => {
                Some(power_log_tail(alpha, *exponent, *log_exponent, s, tau, nf))
            }
            WeightFamily::OscillatingPower { exponent } => {
                let rho = 1.0 + exponent;
                let base = power_tail(alpha, rho, s, tau, nf);
                let sign = parity_sign(s);
                if (tau as u64).is_multiple_of(2) {
                    Some(base.scale(2.0 + sign))
                } else {
                    let a_n = nf.powf(alpha) * (s + tau * nf).powf(-rho);
                    let first_sign = sign * if n.is_multiple_of(2) { 1.0 } else { -1.0 };
                    let alt = if first_sign > 0.0 {
                        Interval::new(0.0, a_n)
                    } else {
                        Interval::new(-a_n, 0.0)
                    };
                    Some(base.scale(2.0).add(alt))
                }
            }
            WeightFamily::Exponential { rate } => {
                let q = (-rate * tau).exp();
                let t_n = nf.powf(alpha) * (-rate * (s + tau * nf)).exp();
                if alpha == 0.0 {
                    let v = t_n / (1.0 - q);
                    Some(Interval::new(v, v).widen(8.0 * f64::EPSILON))
                } else {
                    let r = ((nf + 1.0) / nf).powf(alpha) * q;
                    (r < 1.0).then(|| Interval::new(t_n, t_n / (1.0 - r)))
                }
            }
            WeightFamily::OscillatingExp => {
                let t_n = nf.powf(alpha) * (-(s + tau * nf)).exp();
                let r = if alpha == 0.0 { 1.0 } else { ((nf + 1.0) / nf).powf(alpha) } * (-tau).exp();
                (r < 1.0).then(|| Interval::new(0.0, t_n / (1.0 - r)))
            }
            WeightFamily::Table(t) => {
                if s + tau * (nf - 1.0) < t.values.len() as f64 {
                    return None;
                }
                let law = t.tail.as_ref()?;
                let tail = if law.log_exponent == 0.0 {
                    power_tail(alpha, law.exponent, s, tau, nf)
                } else {
                    power_log_tail(alpha, law.exponent, law.log_exponent, s, tau, nf)
                };
                Some(tail.scale(1.0 / law.coefficient))
            }
        }
    }
}

fn powr(y: f64, r: f64) -> f64 {
    if r == 0.0 {
        1.0
    } else if r.fract() == 0.0 && r.abs() <= 64.0 {
        y.powi(r as i32)
    } else {
        y.powf(r)
    }
}

fn table_value(t: &UserTable, y: f64) -> Result<(f64, f64), WeightError> {
    if y.fract() != 0.0 {
        return Err(WeightError::NonIntegerTableArgument(y));
    }
    if let Some(v) = t.values.get(y as usize) {
        return Ok((*v, v.ln()));
    }
    match &t.tail {
        Some(l) => {
            let ln = l.coefficient.ln()
                + if l.exponent == 0.0 { 0.0 } else { l.exponent * y.ln() }
                + if l.log_exponent == 0.0 { 0.0 } else { l.log_exponent * y.ln_1p().ln() };
            Ok((ln.exp(), ln))
        }
        None => Err(WeightError::BeyondTable {
            x: y,
            len: t.values.len(),
        }),
    }
}

/// `sum_{j >= n} j^alpha (s + tau j)^(-rho)` for `rho - alpha > 1`, `s >= 0`.
fn power_tail(alpha: f64, rho: f64, s: f64, tau: f64, n: f64) -> Interval {
    let sigma = rho - alpha;
    let x_n = s + tau * n;
    let scale = tau.powf(-alpha);
    let shrink = if alpha == 0.0 { 1.0 } else { (tau * n / x_n).powf(alpha) };
    let upper = (s + tau * (n - 0.5)).powf(1.0 - sigma) / (tau * (sigma - 1.0));
    let lower = x_n.powf(1.0 - sigma) / (tau * (sigma - 1.0)) + 0.5 * x_n.powf(-sigma);
    Interval::new(scale * shrink * lower, scale * upper)
}

/// `int_X^inf x^(-sigma) ln(x+1)^(-beta) dx` enclosure.
fn power_log_integral(sigma: f64, beta: f64, x: f64) -> Interval {
    let l = x.ln_1p();
    if sigma > 1.0 {
        let core = x.powf(1.0 - sigma) * l.powf(-beta);
        Interval::new(core / (sigma - 1.0 + beta / l), core / (sigma - 1.0))
    } else {
        let core = l.powf(1.0 - beta) / (beta - 1.0);
        Interval::new(core, core * (1.0 + 1.0 / x))
    }
}

/// `sum_{j >= n} j^alpha (s+tau j)^(-rho) ln(s+tau j+1)^(-beta)`.
fn power_log_tail(alpha: f64, rho: f64, beta: f64, s: f64, tau: f64, n: f64) -> Interval {
    let sigma = rho - alpha;
    let x_n = s + tau * n;
    let scale = tau.powf(-alpha);
    let shrink = if alpha == 0.0 { 1.0 } else { (tau * n / x_n).powf(alpha) };
    let lo = power_log_integral(sigma, beta, x_n).lo / tau;
    let hi = power_log_integral(sigma, beta, s + tau * (n - 1.0)).hi / tau;
    Interval::new(scale * shrink * lo, scale * hi)
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

impl fmt::Display for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            WeightFamily::Power { exponent } => write!(f, "power:{}", fmt_num(*exponent))?,
            WeightFamily::PowerLog { exponent, log_exponent } => {
                write!(f, "powerlog:{}:{}", fmt_num(*exponent), fmt_num(*log_exponent))?
            }
            WeightFamily::Exponential { rate } => write!(f, "exp:{}", fmt_num(*rate))?,
            WeightFamily::OscillatingPower { exponent } => write!(f, "oscpow:{}", fmt_num(*exponent))?,
            WeightFamily::OscillatingExp => write!(f, "oscexp")?,
            WeightFamily::Table(t) => {
                let vals: Vec<String> = t.values.iter().map(|v| fmt_num(*v)).collect();
                write!(f, "table:{}", vals.join(","))?;
                if let Some(l) = &t.tail {
                    write!(
                        f,
                        ";tail={}:{}:{}",
                        fmt_num(l.coefficient),
                        fmt_num(l.exponent),
                        fmt_num(l.log_exponent)
                    )?;
                }
            }
        }
        if self.offset != 0.0 {
            write!(f, "@{}", fmt_num(self.offset))?;
        }
        Ok(())
    }
}

impl FromStr for WeightFunction {
    type Err = WeightError;

    /// Grammar: `power:R`, `powerlog:R:B`, `exp:L`, `oscpow:R`, `oscexp`,
    /// `table:v0,v1,...[;tail=C:R:B]`, each optionally followed by `@OFFSET`.
    fn from_str(spec: &str) -> Result<Self, Self::Err> {
        let perr = |m: &str| WeightError::Parse {
            spec: spec.to_string(),
            message: m.to_string(),
        };
        let trimmed = spec.trim();
        let (body, offset) = match trimmed.rsplit_once('@') {
            Some((b, o)) => (b, o.parse::<f64>().map_err(|_| perr("bad offset after '@'"))?),
            None => (trimmed, 0.0),
        };
        let num = |t: &str| t.parse::<f64>().map_err(|_| perr(&format!("bad number {t:?}")));
        let parts: Vec<&str> = body.split(':').collect();
        let family = match parts.as_slice() {
            ["power", r] => WeightFamily::Power { exponent: num(r)? },
            ["powerlog", r, b] => WeightFamily::PowerLog {
                exponent: num(r)?,
                log_exponent: num(b)?,
            },
            ["exp", l] => WeightFamily::Exponential { rate: num(l)? },
            ["oscpow", r] => WeightFamily::OscillatingPower { exponent: num(r)? },
            ["oscexp"] => WeightFamily::OscillatingExp,
            ["table", ..] => {
                let rest = body.strip_prefix("table:").unwrap();
                let (vals, tail) = match rest.split_once(";tail=") {
                    Some((v, t)) => (v, Some(t)),
                    None => (rest, None),
                };
                let values = vals.split(',').map(|v| num(v.trim())).collect::<Result<Vec<_>, _>>()?;
                let tail = match tail {
                    Some(t) => {
                        let p: Vec<&str> = t.split(':').collect();
                        if p.len() != 3 {
                            return Err(perr("tail law must be C:R:B"));
                        }
                        Some(TailLaw {
                            coefficient: num(p[0])?,
                            exponent: num(p[1])?,
                            log_exponent: num(p[2])?,
                        })
                    }
                    None => None,
                };
                WeightFamily::Table(UserTable { values, tail })
            }
            [name, ..] => return Err(perr(&format!("unknown weight family {name:?}"))),
            [] => return Err(perr("empty spec")),
        };
        WeightFunction::new(family, offset).map_err(|e| perr(&e.to_string()))
    }
}

impl TryFrom<String> for WeightFunction {
    type Error = WeightError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<WeightFunction> for String {
    fn from(w: WeightFunction) -> String {
        w.to_string()
    }
}

/// An edge or a vertex, depending on the reinforcement kind.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ElementKey {
    Edge(EdgeId),
    Vertex(VertexId),
}

/// Per-element weight functions and initial weights with shared defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightAssignment {
    default_weight: WeightFunction,
    default_initial: f64,
    weight_overrides: BTreeMap<ElementKey, WeightFunction>,
    initial_overrides: BTreeMap<ElementKey, f64>,
}

impl WeightAssignment {
    pub fn uniform(weight: WeightFunction, initial: f64) -> Result<Self, WeightError> {
        let a = WeightAssignment {
            default_weight: weight,
            default_initial: initial,
            weight_overrides: BTreeMap::new(),
            initial_overrides: BTreeMap::new(),
        };
        a.validate()?;
        Ok(a)
    }

    pub fn with_weight(mut self, key: ElementKey, weight: WeightFunction) -> Result<Self, WeightError> {
        self.weight_overrides.insert(key, weight);
        self.validate()?;
        Ok(self)
    }

    pub fn with_initial(mut self, key: ElementKey, initial: f64) -> Result<Self, WeightError> {
        self.initial_overrides.insert(key, initial);
        self.validate()?;
        Ok(self)
    }

    pub fn default_weight(&self) -> &WeightFunction {
        &self.default_weight
    }

    pub fn default_initial(&self) -> f64 {
        self.default_initial
    }

    pub fn weight_for(&self, key: &ElementKey) -> &WeightFunction {
        self.weight_overrides.get(key).unwrap_or(&self.default_weight)
    }

    pub fn initial_for(&self, key: &ElementKey) -> f64 {
        self.initial_overrides.get(key).copied().unwrap_or(self.default_initial)
    }

    pub fn is_uniform(&self) -> bool {
        self.weight_overrides.is_empty() && self.initial_overrides.is_empty()
    }

    /// Every distinct `(w, l0)` pair an element can carry.
    pub fn distinct_pairs(&self) -> Vec<(&WeightFunction, f64)> {
        let mut out = vec![(&self.default_weight, self.default_initial)];
        for (k, w) in &self.weight_overrides {
            out.push((w, self.initial_for(k)));
        }
        for (k, l0) in &self.initial_overrides {
            out.push((self.weight_for(k), *l0));
        }
        out
    }

    /// `sup_e w_e(l0_e)`, a maximum over finitely many assignments.
    pub fn sup_initial_weight(&self) -> Result<f64, WeightError> {
        self.distinct_pairs()
            .into_iter()
            .map(|(w, l0)| w.evaluate(l0))
            .try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))
    }

    fn validate(&self) -> Result<(), WeightError> {
        for (w, l0) in self.distinct_pairs() {
            if !l0.is_finite() || l0 < 0.0 {
                return Err(WeightError::InvalidParameter(format!(
                    "initial weight must be finite and >= 0, got {l0}"
                )));
            }
            match w.evaluate(l0) {
                Ok(_) | Err(WeightError::Overflow { .. }) => {}
                Err(e) => {
                    return Err(WeightError::InvalidParameter(format!(
                        "{w} is not positive at the initial weight {l0}: {e}"
                    )))
                }
            }
        }
        Ok(())
    }
}
