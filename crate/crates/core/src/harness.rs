//! Replicated Monte Carlo experiments.
//!
//! Replica `i` of an ensemble with master seed `s` always runs with seed
//! [`derive_seed`]`(s, i)`, and results are folded in replica order, so an
//! ensemble is reproducible bit for bit regardless of the worker count.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{
    errw_orderstat_bound, escape_bound, stuck_probability_p, vrrw_orderstat_bound, BoundError, Scalar, StuckProbability,
};
use crate::graph::{EdgeId, GraphError, GraphModel, GraphSpec, VertexId};
use crate::stats::{chi_square_gof, derive_seed, total_variation, ChiSquareTest, Proportion};
use crate::walk::{run, Engine, RunOptions, Stride, WalkError, WalkKind, WalkState, WeightMode};
use crate::weight::{WeightAssignment, WeightError, WeightFunction};

/// Version tag embedded in every serialized result.
pub const SCHEMA_VERSION: u32 = 1;

/// Caveat attached to every reported stabilization step.
pub const LOWER_ESTIMATE_CAVEAT: &str =
    "stabilization steps are lower estimates of the attraction time, which is not observable at a finite horizon";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error("window {window} exceeds the trajectory length {steps}")]
    WindowTooLong { window: u64, steps: u64 },
    #[error("window must be at least 1")]
    EmptyWindow,
    #[error("configuration mismatch: {0}")]
    Mismatch(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// What the walk is attracted to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum AttractingSet {
    Edge { edge: String },
    Vertices { first: String, second: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttractionVerdict {
    pub detected: bool,
    pub attracting_set: Option<AttractingSet>,
    /// First step of the final run on the attracting set; a lower estimate
    /// of the attraction time.
    pub stabilization_step: Option<u64>,
    pub window: u64,
}

impl AttractionVerdict {
    pub fn attracted(kind: WalkKind, edge: EdgeId, stabilization_step: u64, window: u64) -> Self {
        let set = match kind {
            WalkKind::Edge => AttractingSet::Edge { edge: edge.to_string() },
            WalkKind::Vertex => {
                let (a, b) = edge.endpoints();
                AttractingSet::Vertices {
                    first: a.to_string(),
                    second: b.to_string(),
                }
            }
        };
        AttractionVerdict {
            detected: true,
            attracting_set: Some(set),
            stabilization_step: Some(stabilization_step),
            window,
        }
    }

    pub fn not_detected(window: u64) -> Self {
        AttractionVerdict {
            detected: false,
            attracting_set: None,
            stabilization_step: None,
            window,
        }
    }
}

/// Checks whether the last `window` steps of `trajectory` (vertices
/// `I_0..I_K`) stay on a single edge, i.e. visit exactly two vertices.
pub fn detect_attraction(kind: WalkKind, trajectory: &[VertexId], window: u64) -> Result<AttractionVerdict, HarnessError> {
    if window == 0 {
        return Err(HarnessError::EmptyWindow);
    }
    let steps = trajectory.len().saturating_sub(1) as u64;
    if window > steps {
        return Err(HarnessError::WindowTooLong { window, steps });
    }
    let last = trajectory.len() - 1;
    let edge = EdgeId::new(trajectory[last - 1].clone(), trajectory[last].clone());
    let on_edge = |i: usize| edge.contains(&trajectory[i - 1]) && edge.contains(&trajectory[i]) && trajectory[i - 1] != trajectory[i];
    let mut start = last;
    while start > 1 && on_edge(start - 1) {
        start -= 1;
    }
    let run_length = (last - start + 1) as u64;
    if run_length >= window {
        Ok(AttractionVerdict::attracted(kind, edge, start as u64, window))
    } else {
        Ok(AttractionVerdict::not_detected(window))
    }
}

/// Settings of one ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub graph: GraphSpec,
    pub kind: WalkKind,
    pub weight: WeightFunction,
    pub initial_weight: f64,
    pub replicas: u64,
    pub horizon: u64,
    /// Attraction window; defaults to [`default_window`].
    pub window: Option<u64>,
    pub engine: Engine,
    pub seed: u64,
}

/// `max(10^4, K/10)`, falling back to `max(1, K/10)` when that would
/// exceed half the horizon.
pub fn default_window(horizon: u64) -> u64 {
    let tenth = horizon / 10;
    let preferred = tenth.max(10_000);
    if preferred <= horizon / 2 {
        preferred
    } else {
        tenth.max(1).min(horizon)
    }
}

impl EnsembleConfig {
    pub fn resolved_window(&self) -> u64 {
        self.window.unwrap_or_else(|| default_window(self.horizon))
    }

    /// 1-based index of the monitored order statistic.
    pub fn orderstat_index(&self) -> usize {
        match self.kind {
            WalkKind::Edge => 2,
            WalkKind::Vertex => 3,
        }
    }

    fn prepare(&self) -> Result<(Arc<GraphModel>, Arc<WeightAssignment>), HarnessError> {
        let w = self.resolved_window();
        if w == 0 && self.horizon > 0 {
            return Err(HarnessError::EmptyWindow);
        }
        if w > self.horizon {
            return Err(HarnessError::WindowTooLong {
                window: w,
                steps: self.horizon,
            });
        }
        let graph = Arc::new(self.graph.build()?);
        let assignment = Arc::new(WeightAssignment::uniform(self.weight.clone(), self.initial_weight)?);
        Ok((graph, assignment))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicaResult {
    pub index: u64,
    pub seed: u64,
    pub verdict: Option<AttractionVerdict>,
    /// `R_K^2` for edge walks, `R_K^3` for vertex walks.
    pub order_statistic: Option<u64>,
    pub max_radius: Option<u64>,
    pub weight_mode: Option<WeightMode>,
    pub error: Option<String>,
}

impl ReplicaResult {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub schema_version: u32,
    pub config: EnsembleConfig,
    pub window: u64,
    pub orderstat_index: usize,
    pub replicas: Vec<ReplicaResult>,
    pub failed: u64,
    /// Attraction fraction over the replicas that did not fail.
    pub attraction: Proportion,
    /// Empirical counts of the monitored order statistic.
    pub orderstat_table: BTreeMap<u64, u64>,
}

/// Confidence level used for all reported intervals.
pub const CONFIDENCE: f64 = 0.95;

fn run_replica(
    config: &EnsembleConfig,
    graph: &Arc<GraphModel>,
    assignment: &Arc<WeightAssignment>,
    window: u64,
    index: u64,
) -> ReplicaResult {
    let seed = derive_seed(config.seed, index);
    let outcome = (|| -> Result<ReplicaResult, WalkError> {
        let mut state = WalkState::new(config.kind, graph.clone(), assignment.clone(), seed)?;
        let options = RunOptions {
            horizon: config.horizon,
            engine: config.engine,
            stride: Stride::Every(u64::MAX),
            window: (config.horizon > 0).then_some(window),
        };
        let summary = run(&mut state, &options, &mut [])?;
        Ok(ReplicaResult {
            index,
            seed,
            verdict: summary.attraction,
            order_statistic: Some(state.order_statistics().get(config.orderstat_index())),
            max_radius: Some(summary.range_radius_max),
            weight_mode: Some(summary.weight_mode),
            error: None,
        })
    })();
    outcome.unwrap_or_else(|e| ReplicaResult {
        index,
        seed,
        verdict: None,
        order_statistic: None,
        max_radius: None,
        weight_mode: None,
        error: Some(e.to_string()),
    })
}

/// Runs `f` on a pool with `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    match workers {
        None => Ok(f()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| HarnessError::Pool(e.to_string())),
    }
}

pub fn run_ensemble(config: &EnsembleConfig) -> Result<EnsembleResult, HarnessError> {
    let (graph, assignment) = config.prepare()?;
    let window = config.resolved_window();
    let replicas: Vec<ReplicaResult> = (0..config.replicas)
        .into_par_iter()
        .map(|i| run_replica(config, &graph, &assignment, window, i))
        .collect();
    let mut table = BTreeMap::new();
    let (mut ok, mut detected, mut failed) = (0u64, 0u64, 0u64);
    for r in &replicas {
        if r.failed() {
            failed += 1;
            continue;
        }
        ok += 1;
        if r.verdict.as_ref().is_some_and(|v| v.detected) {
            detected += 1;
        }
        if let Some(v) = r.order_statistic {
            *table.entry(v).or_insert(0) += 1;
        }
    }
    Ok(EnsembleResult {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        window,
        orderstat_index: config.orderstat_index(),
        replicas,
        failed,
        attraction: Proportion::wilson(detected, ok, CONFIDENCE),
        orderstat_table: table,
    })
}

/// Analytic order-statistic bounds for one configuration, indexed by value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderstatBoundTable {
    pub graph: GraphSpec,
    pub kind: WalkKind,
    pub weight: WeightFunction,
    pub initial_weight: f64,
    pub k: u64,
    pub values: BTreeMap<u64, f64>,
}

fn orderstat_values<S: Scalar>(
    kind: WalkKind,
    edges: usize,
    vertices: usize,
    w: &WeightFunction,
    l0: f64,
    k: u64,
) -> Result<BTreeMap<u64, f64>, BoundError> {
    let mut out = BTreeMap::new();
    match kind {
        WalkKind::Edge => {
            for l in 0..=k / 2 {
                out.insert(l, errw_orderstat_bound::<S>(edges, vertices, w, l0, k, l)?.to_f64());
            }
        }
        WalkKind::Vertex => {
            for l in 0..=k / 3 {
                out.insert(l, vrrw_orderstat_bound::<S>(vertices, w, l0, k, l)?.to_f64());
            }
        }
    }
    Ok(out)
}

/// Bound table for the monitored order statistic at `k`.
pub fn orderstat_bound_table(
    graph: &GraphSpec,
    kind: WalkKind,
    weight: &WeightFunction,
    initial_weight: f64,
    k: u64,
) -> Result<OrderstatBoundTable, HarnessError> {
    let model = graph.build()?;
    let fg = model
        .finite()
        .ok_or_else(|| HarnessError::Precondition("order-statistic bounds need a finite graph".into()))?;
    let (e, v) = (fg.edge_count(), fg.vertex_count());
    let values = match orderstat_values::<BigRational>(kind, e, v, weight, initial_weight, k) {
        Ok(v) => v,
        Err(BoundError::NotRational { .. }) => orderstat_values::<f64>(kind, e, v, weight, initial_weight, k)?,
        Err(err) => return Err(err.into()),
    };
    Ok(OrderstatBoundTable {
        graph: graph.clone(),
        kind,
        weight: weight.clone(),
        initial_weight,
        k,
        values,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderstatRow {
    pub value: u64,
    pub frequency: Proportion,
    pub bound: f64,
    /// The lower confidence limit exceeds the bound.
    pub violation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderstatComparison {
    pub orderstat_index: usize,
    pub k: u64,
    pub rows: Vec<OrderstatRow>,
    pub violations: usize,
}

pub fn compare_orderstat_bound(
    ensemble: &EnsembleResult,
    bounds: &OrderstatBoundTable,
) -> Result<OrderstatComparison, HarnessError> {
    let c = &ensemble.config;
    if c.graph != bounds.graph
        || c.kind != bounds.kind
        || c.weight != bounds.weight
        || c.initial_weight != bounds.initial_weight
        || c.horizon != bounds.k
    {
        return Err(HarnessError::Mismatch(format!(
            "ensemble ({}, {}, {}, l0={}, K={}) vs bounds ({}, {}, {}, l0={}, k={})",
            c.graph, c.kind, c.weight, c.initial_weight, c.horizon, bounds.graph, bounds.kind, bounds.weight, bounds.initial_weight, bounds.k
        )));
    }
    let n: u64 = ensemble.orderstat_table.values().sum();
    let rows: Vec<OrderstatRow> = bounds
        .values
        .iter()
        .map(|(&value, &bound)| {
            let hits = ensemble.orderstat_table.get(&value).copied().unwrap_or(0);
            let frequency = Proportion::wilson(hits, n, CONFIDENCE);
            OrderstatRow {
                value,
                violation: hits > 0 && frequency.ci_low > bound,
                frequency,
                bound,
            }
        })
        .collect();
    Ok(OrderstatComparison {
        orderstat_index: ensemble.orderstat_index,
        k: bounds.k,
        violations: rows.iter().filter(|r| r.violation).count(),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeRow {
    pub radius: u64,
    pub exceedance: Proportion,
    pub bound: f64,
    /// `freq <= bound + 3 * sqrt(freq (1 - freq) / N)`.
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeReport {
    pub stuck: StuckProbability,
    pub rows: Vec<EscapeRow>,
    pub monotone: bool,
}

/// Empirical `P(max_k |I_k| > n)` against `(1 - p)^[n/2]`.
pub fn escape_statistics(ensemble: &EnsembleResult, radii: &[u64]) -> Result<EscapeReport, HarnessError> {
    let c = &ensemble.config;
    let graph = c.graph.build()?;
    if graph.is_finite() {
        return Err(HarnessError::Precondition("escape statistics need an infinite graph".into()));
    }
    if c.kind != WalkKind::Edge {
        return Err(HarnessError::Precondition("escape statistics are defined for edge walks".into()));
    }
    let assignment = WeightAssignment::uniform(c.weight.clone(), c.initial_weight)?;
    let stuck = stuck_probability_p(graph.degree_bound(), &assignment)?;
    let radii_seen: Vec<u64> = ensemble.replicas.iter().filter_map(|r| r.max_radius).collect();
    let n = radii_seen.len() as u64;
    let mut rows = Vec::new();
    for &radius in radii {
        let hits = radii_seen.iter().filter(|&&m| m > radius).count() as u64;
        let exceedance = Proportion::wilson(hits, n, CONFIDENCE);
        let bound = escape_bound(radius, stuck.p)?;
        let f = exceedance.estimate;
        let slack = 3.0 * (f * (1.0 - f) / n.max(1) as f64).sqrt();
        rows.push(EscapeRow {
            radius,
            consistent: n == 0 || f <= bound + slack,
            exceedance,
            bound,
        });
    }
    let mut sorted = rows.clone();
    sorted.sort_by_key(|r| r.radius);
    let monotone = sorted.windows(2).all(|w| w[1].exceedance.successes <= w[0].exceedance.successes);
    Ok(EscapeReport { stuck, rows, monotone })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    /// Inclusive lower edge.
    pub from: u64,
    /// Exclusive upper edge.
    pub to: u64,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttractionTimeHistogram {
    pub detected: u64,
    pub bins: Vec<HistogramBin>,
    pub caveat: String,
}

/// Histogram of stabilization steps over dyadic bins `[2^j, 2^(j+1))`.
pub fn attraction_time_histogram(ensemble: &EnsembleResult) -> AttractionTimeHistogram {
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    let mut detected = 0;
    for v in ensemble.replicas.iter().filter_map(|r| r.verdict.as_ref()) {
        if let (true, Some(s)) = (v.detected, v.stabilization_step) {
            detected += 1;
            *counts.entry(s.max(1).ilog2()).or_insert(0) += 1;
        }
    }
    AttractionTimeHistogram {
        detected,
        bins: counts
            .into_iter()
            .map(|(j, count)| HistogramBin {
                from: 1 << j,
                to: 1u64.checked_shl(j + 1).unwrap_or(u64::MAX),
                count,
            })
            .collect(),
        caveat: LOWER_ESTIMATE_CAVEAT.to_string(),
    }
}

/// Counts of complete `k`-step paths (as dense vertex indices) over
/// `replicas` runs of one engine.
pub fn empirical_path_law(
    graph: &Arc<GraphModel>,
    kind: WalkKind,
    assignment: &Arc<WeightAssignment>,
    k: u64,
    replicas: u64,
    seed: u64,
    engine: Engine,
) -> Result<HashMap<Vec<usize>, u64>, HarnessError> {
    let paths: Vec<Vec<usize>> = (0..replicas)
        .into_par_iter()
        .map(|i| -> Result<Vec<usize>, WalkError> {
            let mut s = WalkState::new(kind, graph.clone(), assignment.clone(), derive_seed(seed, i))?;
            let mut path = Vec::with_capacity(k as usize + 1);
            path.push(s.current_index());
            for _ in 0..k {
                s.step_with(engine)?;
                path.push(s.current_index());
            }
            Ok(path)
        })
        .collect::<Result<_, _>>()?;
    let mut law = HashMap::new();
    for p in paths {
        *law.entry(p).or_insert(0) += 1;
    }
    Ok(law)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneStepCheck {
    pub vertex: usize,
    pub counts: Vec<u64>,
    pub test: ChiSquareTest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerEquivalence {
    pub k: u64,
    pub replicas: u64,
    pub total_variation: f64,
    pub one_step: Vec<OneStepCheck>,
}

/// Compares the sequential and race samplers on full `k`-step path laws and
/// on one-step laws from the given configurations.
#[allow(clippy::too_many_arguments)]
pub fn sampler_equivalence(
    graph: &Arc<GraphModel>,
    kind: WalkKind,
    assignment: &Arc<WeightAssignment>,
    k: u64,
    replicas: u64,
    seed: u64,
    states: &[(usize, Vec<u64>)],
    significance: f64,
) -> Result<SamplerEquivalence, HarnessError> {
    let seq = empirical_path_law(graph, kind, assignment, k, replicas, seed, Engine::Sequential)?;
    let race = empirical_path_law(graph, kind, assignment, k, replicas, seed ^ 0x5EED, Engine::Rubin)?;
    let mut cells: Vec<&Vec<usize>> = seq.keys().chain(race.keys()).collect();
    cells.sort();
    cells.dedup();
    let a: Vec<u64> = cells.iter().map(|c| seq.get(*c).copied().unwrap_or(0)).collect();
    let b: Vec<u64> = cells.iter().map(|c| race.get(*c).copied().unwrap_or(0)).collect();
    let tv = total_variation(&a, &b);

    let mut one_step = Vec::new();
    for (j, (vertex, counts)) in states.iter().enumerate() {
        let mut base = WalkState::new(kind, graph.clone(), assignment.clone(), 0)?;
        base.set_configuration(*vertex, counts)?;
        let (law, _) = base.transition_distribution();
        let observed: Vec<u64> = (0..replicas)
            .into_par_iter()
            .map(|i| -> Result<usize, WalkError> {
                let mut s = base.clone();
                s.reseed(derive_seed(seed.wrapping_add(j as u64 + 1), i));
                s.embedded_step()?;
                Ok(law.iter().position(|(v, _)| v == s.current_vertex()).expect("neighbour"))
            })
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .fold(vec![0u64; law.len()], |mut acc, i| {
                acc[i] += 1;
                acc
            });
        let expected: Vec<f64> = law.iter().map(|x| x.1).collect();
        one_step.push(OneStepCheck {
            vertex: *vertex,
            counts: counts.clone(),
            test: chi_square_gof(&observed, &expected, significance),
        });
    }
    Ok(SamplerEquivalence {
        k,
        replicas,
        total_variation: tv,
        one_step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[i64]) -> Vec<VertexId> {
        v.iter().map(|&i| VertexId::label(i)).collect()
    }

    fn config(graph: &str, kind: WalkKind, w: &str, k: u64, n: u64) -> EnsembleConfig {
        EnsembleConfig {
            graph: graph.parse().unwrap(),
            kind,
            weight: w.parse().unwrap(),
            initial_weight: 1.0,
            replicas: n,
            horizon: k,
            window: None,
            engine: Engine::Sequential,
            seed: 7,
        }
    }

    #[test]
    fn detection_examples() {
        let w = 5u64;
        let mut t = ids(&[0, 2, 1, 2]);
        for i in 0..10 * w {
            t.push(VertexId::label(if i % 2 == 0 { 0 } else { 2 }));
        }
        let v = detect_attraction(WalkKind::Edge, &t, w).unwrap();
        assert!(v.detected);
        assert_eq!(
            v.attracting_set,
            Some(AttractingSet::Edge {
                edge: EdgeId::new(VertexId::label(0), VertexId::label(2)).to_string()
            })
        );
        assert_eq!(v.stabilization_step, Some(4));

        let three = ids(&[0, 1, 2, 1, 0, 1, 2]);
        assert!(!detect_attraction(WalkKind::Vertex, &three, 4).unwrap().detected);
        assert!(matches!(
            detect_attraction(WalkKind::Edge, &three, 7),
            Err(HarnessError::WindowTooLong { .. })
        ));
    }

    #[test]
    fn streaming_monitor_agrees_with_trajectory_check() {
        for seed in 0..20 {
            let g = Arc::new(GraphModel::cycle(5).unwrap());
            let a = Arc::new(WeightAssignment::uniform("power:1.2".parse().unwrap(), 1.0).unwrap());
            let mut s = WalkState::new(WalkKind::Vertex, g, a, seed).unwrap();
            let mut traj = vec![s.current_vertex().clone()];
            for _ in 0..200 {
                s.step().unwrap();
                traj.push(s.current_vertex().clone());
            }
            for w in [1, 5, 20, 100] {
                assert_eq!(s.attraction_verdict(w), detect_attraction(WalkKind::Vertex, &traj, w).unwrap());
            }
        }
    }

    #[test]
    fn empty_ensemble() {
        let r = run_ensemble(&config("triangle", WalkKind::Edge, "power:2", 100, 0)).unwrap();
        assert!(r.replicas.is_empty());
        assert_eq!(r.attraction.trials, 0);
        let h = attraction_time_histogram(&r);
        assert!(h.bins.is_empty() && !h.caveat.is_empty());
    }

    #[test]
    fn ensemble_is_deterministic_across_worker_counts() {
        let c = config("path:5", WalkKind::Vertex, "power:3", 2000, 50);
        let a = with_workers(Some(1), || run_ensemble(&c)).unwrap().unwrap();
        let b = with_workers(Some(4), || run_ensemble(&c)).unwrap().unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let h = attraction_time_histogram(&a);
        assert_eq!(h.bins.iter().map(|b| b.count).sum::<u64>(), h.detected);
        assert_eq!(h, attraction_time_histogram(&b));
    }

    #[test]
    fn attraction_fraction_does_not_drop_with_horizon() {
        let mut c = config("triangle", WalkKind::Edge, "power:1.5", 2000, 300);
        c.window = Some(500);
        let short = run_ensemble(&c).unwrap();
        c.horizon = 4000;
        let long = run_ensemble(&c).unwrap();
        let slack = 3.0 * short.attraction.std_error();
        assert!(long.attraction.estimate >= short.attraction.estimate - slack);
    }

    #[test]
    fn orderstat_comparison_and_negative_control() {
        let c = config("triangle", WalkKind::Edge, "power:2", 50, 20_000);
        let ens = run_ensemble(&c).unwrap();
        let table = orderstat_bound_table(&c.graph, c.kind, &c.weight, 1.0, 50).unwrap();
        let cmp = compare_orderstat_bound(&ens, &table).unwrap();
        assert_eq!(cmp.violations, 0);
        let row1 = cmp.rows.iter().find(|r| r.value == 1).unwrap();
        assert!(row1.frequency.estimate <= row1.bound);
        let mut corrupted = table.clone();
        for v in corrupted.values.values_mut() {
            *v *= 1e-6;
        }
        assert!(compare_orderstat_bound(&ens, &corrupted).unwrap().violations > 0);
        let mut other = table;
        other.k = 51;
        assert!(matches!(compare_orderstat_bound(&ens, &other), Err(HarnessError::Mismatch(_))));
    }

    #[test]
    fn escape_rows() {
        let c = config("lattice:1", WalkKind::Edge, "power:3", 2000, 400);
        let ens = run_ensemble(&c).unwrap();
        let rep = escape_statistics(&ens, &[1, 2, 4, 6]).unwrap();
        assert_eq!(rep.rows[0].bound, 1.0);
        assert!(rep.rows.iter().all(|r| r.consistent));
        assert!(rep.monotone);
        let finite = run_ensemble(&config("triangle", WalkKind::Edge, "power:3", 100, 2)).unwrap();
        assert!(escape_statistics(&finite, &[1]).is_err());
    }
}
