//! Exponential-clock embedding.
//!
//! Every competing element carries a stream of independent alarms: the
//! `j`-th alarm of element `e` rings `E_j / w(l0 + stride * j)` after the
//! previous one. Racing the current clocks reproduces the one-step law of the
//! sequential walk, and on a star the complete clock sequences decide the
//! whole infinite future at once.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphFamily, GraphModel, VertexId};
use crate::stats::{derive_seed, Proportion};
use crate::walk::{WalkError, WalkKind, WalkState};
use crate::weight::{ElementKey, SeriesSpec, Verdict, WeightError, WeightFamily, WeightFunction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RubinError {
    #[error("star race needs a star graph, got {0:?}")]
    NotAStar(GraphFamily),
    #[error("weight {0} is not reciprocally summable at this initial weight")]
    NotSummable(String),
    #[error("replica count must be positive")]
    NoReplicas,
    #[error(transparent)]
    Weight(#[from] WeightError),
}

/// Alarm times of a single element.
#[derive(Clone, Debug, PartialEq)]
pub struct ClockStream {
    pub element: ElementKey,
    /// Number of alarms already consumed.
    pub consumed: u64,
    /// Time of the most recent alarm (zero before the first).
    pub time: f64,
    initial: f64,
    stride: u32,
}

impl ClockStream {
    pub fn new(element: ElementKey, initial: f64, stride: u32) -> Self {
        ClockStream {
            element,
            consumed: 0,
            time: 0.0,
            initial,
            stride,
        }
    }

    /// Consumes the next alarm and returns its absolute time.
    pub fn advance<R: Rng + ?Sized>(&mut self, w: &WeightFunction, rng: &mut R) -> Result<f64, WeightError> {
        let x = self.initial + self.stride as f64 * self.consumed as f64;
        let e: f64 = rng.sample(Exp1);
        self.time += e / w.evaluate(x)?;
        self.consumed += 1;
        Ok(self.time)
    }
}

/// One step of the race sampler; returns the new current vertex.
pub fn embedded_step(state: &mut WalkState) -> Result<VertexId, WalkError> {
    state.embedded_step()?;
    Ok(state.current_vertex().clone())
}

/// Settings for [`star_stuck_probability`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarRaceOptions {
    pub kind: WalkKind,
    pub replicas: u64,
    pub seed: u64,
    pub confidence: f64,
    /// Target for the tail-mean correction relative to the total mean clock
    /// time of one element.
    pub relative_tail: f64,
}

impl Default for StarRaceOptions {
    fn default() -> Self {
        StarRaceOptions {
            kind: WalkKind::Edge,
            replicas: 10_000,
            seed: 0,
            confidence: 0.95,
            relative_tail: 1e-3,
        }
    }
}

/// Outcome of a star race experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarRaceReport {
    pub leaves: usize,
    pub replicas: u64,
    /// How many replicas each leaf edge (in leaf order) attracted.
    pub attractor_counts: Vec<u64>,
    /// Replicas in which some element's full clock sequence finished first.
    pub attractor_exists: Proportion,
    /// The winner's full sequence finished before every rival's second alarm.
    pub stuck: Proportion,
    /// The winner's full sequence finished before every rival's first alarm.
    pub immediate_lock: Proportion,
    /// Replicas whose decisive comparisons fell within the truncation error.
    pub uncertain: u64,
    /// Number of alarms sampled explicitly per element.
    pub truncation: u64,
    /// Deterministic tail mean added to every sampled total time.
    pub tail_mean: f64,
    /// Bound on the standard deviation of the neglected tail.
    pub tail_sd: f64,
    /// Mean total clock time of one element.
    pub mean_total_time: f64,
    /// Empirical mean of the total clock time over all elements and replicas.
    pub empirical_total_time: f64,
    pub empirical_total_time_se: f64,
}

/// Alarm-index stride of a star: an ERRW excursion to a leaf crosses its
/// edge twice, a VRRW excursion visits the leaf once.
pub fn star_stride(kind: WalkKind) -> u32 {
    match kind {
        WalkKind::Edge => 2,
        WalkKind::Vertex => 1,
    }
}

fn increasing(w: &WeightFunction) -> bool {
    match w.family() {
        WeightFamily::Power { .. } | WeightFamily::PowerLog { .. } | WeightFamily::Exponential { .. } => true,
        WeightFamily::Table(_) | WeightFamily::OscillatingPower { .. } | WeightFamily::OscillatingExp => false,
    }
}

struct Truncation {
    explicit: u64,
    tail_mean: f64,
    tail_sd: f64,
    total_mean: f64,
}

fn choose_truncation(w: &WeightFunction, l0: f64, stride: u32, relative: f64) -> Result<Truncation, RubinError> {
    let spec = |start| SeriesSpec {
        alpha: 0.0,
        shift: l0,
        stride,
        start,
    };
    let total = w.series(spec(0), 1e-9)?.value;
    let mut j = 32u64;
    loop {
        let tail = w.series(spec(j), 1e-12_f64.max(relative * total * 1e-3))?;
        if tail.upper <= relative * total || j >= 1 << 22 {
            let max_term = if increasing(w) {
                1.0 / w.evaluate(l0 + stride as f64 * j as f64)?
            } else {
                tail.upper
            };
            return Ok(Truncation {
                explicit: j,
                tail_mean: tail.value,
                tail_sd: (tail.upper * max_term).sqrt(),
                total_mean: total,
            });
        }
        j *= 2;
    }
}

struct Race {
    totals: Vec<f64>,
    first: Vec<f64>,
    second: Vec<f64>,
}

fn race(w: &WeightFunction, l0: f64, stride: u32, leaves: usize, t: &Truncation, seed: u64) -> Result<Race, WeightError> {
    let mut r = Race {
        totals: Vec::with_capacity(leaves),
        first: Vec::with_capacity(leaves),
        second: Vec::with_capacity(leaves),
    };
    for leaf in 0..leaves {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, leaf as u64));
        let mut clock = ClockStream::new(ElementKey::Vertex(VertexId::label(leaf as i64 + 1)), l0, stride);
        let a0 = clock.advance(w, &mut rng)?;
        let a1 = clock.advance(w, &mut rng)?;
        while clock.consumed < t.explicit {
            clock.advance(w, &mut rng)?;
        }
        r.first.push(a0);
        r.second.push(a1);
        r.totals.push(clock.time + t.tail_mean);
    }
    Ok(r)
}

/// Monte Carlo estimate of the eventual behaviour of a reinforced walk on a
/// star, sampled through complete clock sequences.
pub fn star_stuck_probability(
    graph: &GraphModel,
    w: &WeightFunction,
    l0: f64,
    options: &StarRaceOptions,
) -> Result<StarRaceReport, RubinError> {
    let leaves = match graph.family() {
        GraphFamily::Star { leaves } => *leaves,
        other => return Err(RubinError::NotAStar(other.clone())),
    };
    if options.replicas == 0 {
        return Err(RubinError::NoReplicas);
    }
    if w.classify(l0).reciprocal_summable != Verdict::Holds {
        return Err(RubinError::NotSummable(w.to_string()));
    }
    let stride = star_stride(options.kind);
    let trunc = choose_truncation(w, l0, stride, options.relative_tail)?;
    let margin = 6.0 * std::f64::consts::SQRT_2 * trunc.tail_sd;

    struct Outcome {
        winner: usize,
        stuck: bool,
        lock: bool,
        uncertain: bool,
        total_sum: f64,
        total_sq: f64,
    }
    let outcomes: Vec<Outcome> = (0..options.replicas)
        .into_par_iter()
        .map(|i| -> Result<Outcome, WeightError> {
            let r = race(w, l0, stride, leaves, &trunc, derive_seed(options.seed, i))?;
            let (winner, best) = r
                .totals
                .iter()
                .copied()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("at least one leaf");
            let rivals = |v: &[f64]| {
                v.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != winner)
                    .map(|(_, &x)| x)
                    .fold(f64::INFINITY, f64::min)
            };
            let runner_up = rivals(&r.totals);
            let second = rivals(&r.second);
            let first = rivals(&r.first);
            let uncertain = (runner_up - best).abs() < margin
                || (second - best).abs() < margin
                || (first - best).abs() < margin;
            Ok(Outcome {
                winner,
                stuck: best < second,
                lock: best < first,
                uncertain,
                total_sum: r.totals.iter().sum(),
                total_sq: r.totals.iter().map(|x| x * x).sum(),
            })
        })
        .collect::<Result<_, _>>()?;

    let n = options.replicas;
    let mut attractor_counts = vec![0u64; leaves];
    let (mut stuck, mut lock, mut uncertain) = (0u64, 0u64, 0u64);
    let (mut s1, mut s2) = (0.0, 0.0);
    for o in &outcomes {
        attractor_counts[o.winner] += 1;
        stuck += o.stuck as u64;
        lock += o.lock as u64;
        uncertain += o.uncertain as u64;
        s1 += o.total_sum;
        s2 += o.total_sq;
    }
    let m = (n * leaves as u64) as f64;
    let mean = s1 / m;
    let var = (s2 / m - mean * mean).max(0.0) * m / (m - 1.0).max(1.0);
    Ok(StarRaceReport {
        leaves,
        replicas: n,
        attractor_counts,
        attractor_exists: Proportion::wilson(n, n, options.confidence),
        stuck: Proportion::wilson(stuck, n, options.confidence),
        immediate_lock: Proportion::wilson(lock, n, options.confidence),
        uncertain,
        truncation: trunc.explicit,
        tail_mean: trunc.tail_mean,
        tail_sd: trunc.tail_sd,
        mean_total_time: trunc.total_mean,
        empirical_total_time: mean,
        empirical_total_time_se: (var / m).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::chi_square_gof;
    use crate::weight::WeightAssignment;
    use std::sync::Arc;

    #[test]
    fn race_matches_transition_law() {
        let g = Arc::new(GraphModel::star(2).unwrap());
        let a = Arc::new(WeightAssignment::uniform("power:2".parse().unwrap(), 1.0).unwrap());
        let mut base = WalkState::new(WalkKind::Edge, g, a, 5).unwrap();
        // rates 9 and 1 at the centre
        base.set_configuration(0, &[2, 0]).unwrap();
        let (law, _) = base.transition_distribution();
        assert!((law[0].1 - 0.9).abs() < 1e-12);
        let mut obs = vec![0u64; law.len()];
        for i in 0..100_000u64 {
            let mut s = base.clone();
            s.reseed(i);
            let v = embedded_step(&mut s).unwrap();
            obs[law.iter().position(|(u, _)| *u == v).unwrap()] += 1;
        }
        let expected: Vec<f64> = law.iter().map(|x| x.1).collect();
        assert!(chi_square_gof(&obs, &expected, 1e-3).passed, "{obs:?}");
    }

    #[test]
    fn symmetric_star_splits_evenly() {
        let g = GraphModel::star(2).unwrap();
        let w: WeightFunction = "power:2".parse().unwrap();
        let opts = StarRaceOptions {
            replicas: 20_000,
            seed: 1,
            ..Default::default()
        };
        let r = star_stuck_probability(&g, &w, 1.0, &opts).unwrap();
        let p = Proportion::wilson(r.attractor_counts[0], r.replicas, 0.999);
        assert!(p.ci_low < 0.5 && 0.5 < p.ci_high, "{p:?}");
    }

    #[test]
    fn star_three_always_has_an_attractor() {
        let g = GraphModel::star(3).unwrap();
        let w: WeightFunction = "power:2".parse().unwrap();
        let opts = StarRaceOptions {
            replicas: 4000,
            seed: 2,
            ..Default::default()
        };
        let r = star_stuck_probability(&g, &w, 1.0, &opts).unwrap();
        assert_eq!(r.attractor_exists.estimate, 1.0);
        assert!(r.stuck.estimate >= r.immediate_lock.estimate);
        assert_eq!(r.attractor_counts.iter().sum::<u64>(), 4000);
    }

    #[test]
    fn non_summable_weight_is_rejected() {
        let g = GraphModel::star(2).unwrap();
        let w: WeightFunction = "power:1".parse().unwrap();
        let err = star_stuck_probability(&g, &w, 1.0, &StarRaceOptions::default()).unwrap_err();
        assert!(matches!(err, RubinError::NotSummable(_)));
        let err = star_stuck_probability(&GraphModel::triangle(), &"power:2".parse().unwrap(), 1.0, &StarRaceOptions::default())
            .unwrap_err();
        assert!(matches!(err, RubinError::NotAStar(_)));
    }

    #[test]
    fn mean_clock_time_matches_reciprocal_sum() {
        let g = GraphModel::star(2).unwrap();
        let w: WeightFunction = "power:2".parse().unwrap();
        let opts = StarRaceOptions {
            kind: WalkKind::Vertex,
            replicas: 20_000,
            seed: 3,
            ..Default::default()
        };
        let r = star_stuck_probability(&g, &w, 1.0, &opts).unwrap();
        let c = w.tail_sum_c(1.0, 1e-10).unwrap().value;
        assert!((r.mean_total_time - c).abs() < 1e-8);
        assert!((r.empirical_total_time - c).abs() < 4.0 * r.empirical_total_time_se, "{r:?}");
    }

    #[test]
    fn clock_alarms_increase() {
        let w: WeightFunction = "power:2".parse().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut c = ClockStream::new(ElementKey::Vertex(VertexId::label(0)), 1.0, 1);
        let mut last = 0.0;
        for _ in 0..100 {
            let t = c.advance(&w, &mut rng).unwrap();
            assert!(t > last);
            last = t;
        }
        assert_eq!(c.consumed, 100);
    }
}
