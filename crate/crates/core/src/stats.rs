//! Binomial confidence intervals, goodness-of-fit tests and seed derivation.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Golden-ratio increment of the splitmix64 generator.
pub const SEED_INCREMENT: u64 = 0x9E37_79B9_7F4A_7C15;

/// One round of the splitmix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(SEED_INCREMENT);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replica `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index.wrapping_mul(SEED_INCREMENT))
}

/// Success count with a two-sided Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
}

impl Proportion {
    pub fn wilson(successes: u64, trials: u64, confidence: f64) -> Self {
        if trials == 0 {
            return Proportion {
                successes,
                trials,
                estimate: f64::NAN,
                ci_low: 0.0,
                ci_high: 1.0,
                confidence,
            };
        }
        let z = normal_quantile(0.5 + confidence / 2.0);
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = z * z;
        let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
        let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        Proportion {
            successes,
            trials,
            estimate: p,
            ci_low: (centre - half).max(0.0),
            ci_high: (centre + half).min(1.0),
            confidence,
        }
    }

    /// Binomial standard error of the point estimate.
    pub fn std_error(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        (self.estimate * (1.0 - self.estimate) / self.trials as f64).sqrt()
    }
}

pub fn normal_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(p)
}

/// Pearson chi-square goodness-of-fit result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub significance: f64,
    pub passed: bool,
}

/// Tests observed counts against expected probabilities. Cells with zero
/// expected probability must have zero counts; they do not add degrees of
/// freedom.
pub fn chi_square_gof(observed: &[u64], expected: &[f64], significance: f64) -> ChiSquareTest {
    assert_eq!(observed.len(), expected.len());
    let n: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    let mut impossible = false;
    for (&o, &p) in observed.iter().zip(expected) {
        if p <= 0.0 {
            impossible |= o > 0;
            continue;
        }
        cells += 1;
        let e = p * n as f64;
        stat += (o as f64 - e).powi(2) / e;
    }
    let dof = cells.saturating_sub(1);
    let p_value = if impossible {
        0.0
    } else if dof == 0 {
        1.0
    } else {
        1.0 - ChiSquared::new(dof as f64).expect("positive dof").cdf(stat)
    };
    ChiSquareTest {
        statistic: stat,
        degrees_of_freedom: dof,
        p_value,
        significance,
        passed: p_value >= significance,
    }
}

/// Total-variation distance between two empirical distributions given as
/// count vectors over the same cells.
pub fn total_variation(a: &[u64], b: &[u64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    if na == 0 || nb == 0 {
        return if na == nb { 0.0 } else { 1.0 };
    }
    0.5 * a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x as f64 / na as f64 - y as f64 / nb as f64).abs())
        .sum::<f64>()
}
