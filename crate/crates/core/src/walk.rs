//! Sequential ERRW and VRRW simulation.
//!
//! A [`WalkState`] owns a replica-local arena of the vertices and elements
//! (edges or vertices) it has discovered. On finite graphs the arena is
//! filled up front and indexed exactly like the [`FiniteGraph`]; on infinite
//! graphs it grows as the walk explores. Each element caches its current
//! weight so a step costs one weight evaluation.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeId, FiniteGraph, GraphError, GraphModel, VertexId};
use crate::harness::AttractionVerdict;
use crate::weight::{ElementKey, WeightAssignment, WeightError, WeightFunction};

/// Weights above this switch the replica to log-space transition weights.
pub const LOG_SPACE_THRESHOLD: f64 = 1e300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkKind {
    Edge,
    Vertex,
}

impl fmt::Display for WalkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WalkKind::Edge => "edge",
            WalkKind::Vertex => "vertex",
        })
    }
}

impl FromStr for WalkKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "edge" | "errw" => Ok(WalkKind::Edge),
            "vertex" | "vrrw" => Ok(WalkKind::Vertex),
            _ => Err(format!("unknown walk kind {s:?} (expected edge or vertex)")),
        }
    }
}

/// Which sampler chooses the next vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Inverse CDF with one uniform draw per step.
    Sequential,
    /// Exponential race between the competing elements.
    Rubin,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Sequential => "sequential",
            Engine::Rubin => "rubin",
        })
    }
}

impl FromStr for Engine {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sequential" => Ok(Engine::Sequential),
            "rubin" => Ok(Engine::Rubin),
            _ => Err(format!("unknown engine {s:?} (expected sequential or rubin)")),
        }
    }
}

/// Representation of cached weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    Linear,
    LogSpace,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("vertex {0} has no neighbors")]
    Isolated(VertexId),
    #[error("configuration does not match the graph: {0}")]
    BadConfiguration(String),
}

/// Traversal counts sorted non-increasingly, padded with zeros.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrderStats(pub Vec<u64>);

impl OrderStats {
    pub fn from_counts(counts: impl IntoIterator<Item = u64>, len: usize) -> Self {
        let mut v: Vec<u64> = counts.into_iter().collect();
        v.resize(v.len().max(len), 0);
        v.sort_unstable_by(|a, b| b.cmp(a));
        OrderStats(v)
    }

    /// The `i`-th largest count (1-based); zero beyond the scope.
    pub fn get(&self, i: usize) -> u64 {
        assert!(i >= 1, "order statistics are 1-based");
        self.0.get(i - 1).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }
}

/// Tracks the current run of consecutive traversals of one undirected edge.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct EdgeRun {
    edge: Option<(u32, u32)>,
    start: u64,
}

#[derive(Clone, Debug)]
struct Arena {
    keys: Vec<VertexId>,
    index: HashMap<VertexId, u32>,
    adjacency: Vec<Option<Box<[(u32, u32)]>>>,
    distance: Vec<u64>,
    edge_index: HashMap<(u32, u32), u32>,
    edge_ends: Vec<(u32, u32)>,
    counts: Vec<u64>,
    cached: Vec<f64>,
    initial: Vec<f64>,
    weight_of: Vec<u16>,
}

/// State of one ERRW or VRRW replica.
#[derive(Clone)]
pub struct WalkState {
    kind: WalkKind,
    graph: Arc<GraphModel>,
    assignment: Arc<WeightAssignment>,
    weights: Vec<WeightFunction>,
    arena: Arena,
    finite: bool,
    current: u32,
    step: u64,
    mode: WeightMode,
    max_radius: u64,
    run: EdgeRun,
    rng: ChaCha8Rng,
    seed: u64,
}

impl fmt::Debug for WalkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WalkState")
            .field("kind", &self.kind)
            .field("current", &self.current_vertex())
            .field("step", &self.step)
            .field("mode", &self.mode)
            .finish()
    }
}

impl WalkState {
    pub fn new(
        kind: WalkKind,
        graph: Arc<GraphModel>,
        assignment: Arc<WeightAssignment>,
        seed: u64,
    ) -> Result<Self, WalkError> {
        let mut state = WalkState {
            kind,
            finite: graph.is_finite(),
            graph,
            weights: vec![assignment.default_weight().clone()],
            assignment,
            arena: Arena {
                keys: Vec::new(),
                index: HashMap::new(),
                adjacency: Vec::new(),
                distance: Vec::new(),
                edge_index: HashMap::new(),
                edge_ends: Vec::new(),
                counts: Vec::new(),
                cached: Vec::new(),
                initial: Vec::new(),
                weight_of: Vec::new(),
            },
            current: 0,
            step: 0,
            mode: WeightMode::Linear,
            max_radius: 0,
            run: EdgeRun::default(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
        };
        if let Some(fg) = state.graph.finite().cloned() {
            state.load_finite(&fg)?;
            state.current = fg.root() as u32;
        } else {
            let root = state.graph.root().clone();
            state.current = state.intern(root)?;
        }
        state.expand(state.current)?;
        if state.arena.adjacency[state.current as usize]
            .as_ref()
            .is_some_and(|a| a.is_empty())
        {
            return Err(WalkError::Isolated(state.current_vertex().clone()));
        }
        Ok(state)
    }

    fn weight_index(&mut self, key: &ElementKey) -> u16 {
        let w = self.assignment.weight_for(key);
        if let Some(i) = self.weights.iter().position(|x| x == w) {
            return i as u16;
        }
        self.weights.push(w.clone());
        (self.weights.len() - 1) as u16
    }

    fn push_element(&mut self, key: ElementKey) -> Result<u32, WalkError> {
        let wi = self.weight_index(&key);
        let l0 = self.assignment.initial_for(&key);
        let idx = self.arena.counts.len() as u32;
        self.arena.counts.push(0);
        self.arena.initial.push(l0);
        self.arena.weight_of.push(wi);
        self.arena.cached.push(0.0);
        self.refresh(idx)?;
        Ok(idx)
    }

    fn load_finite(&mut self, fg: &FiniteGraph) -> Result<(), WalkError> {
        let n = fg.vertex_count();
        for i in 0..n {
            let key = fg.vertex(i).clone();
            self.arena.index.insert(key.clone(), i as u32);
            self.arena.keys.push(key.clone());
            self.arena.distance.push(fg.distance(i));
            self.arena.adjacency.push(Some(
                fg.adjacent(i)
                    .iter()
                    .map(|&(j, e)| {
                        let elem = match self.kind {
                            WalkKind::Edge => e as u32,
                            WalkKind::Vertex => j as u32,
                        };
                        (j as u32, elem)
                    })
                    .collect(),
            ));
            if self.kind == WalkKind::Vertex {
                self.push_element(ElementKey::Vertex(key))?;
            }
        }
        if self.kind == WalkKind::Edge {
            for (e, &(i, j)) in fg.edges().iter().enumerate() {
                self.arena.edge_index.insert((i as u32, j as u32), e as u32);
                self.arena.edge_ends.push((i as u32, j as u32));
                self.push_element(ElementKey::Edge(fg.edge_id(e)))?;
            }
        }
        Ok(())
    }

    fn intern(&mut self, key: VertexId) -> Result<u32, WalkError> {
        if let Some(&i) = self.arena.index.get(&key) {
            return Ok(i);
        }
        let dist = self.graph.graph_distance(&key)?;
        let i = self.arena.keys.len() as u32;
        self.arena.index.insert(key.clone(), i);
        self.arena.keys.push(key.clone());
        self.arena.adjacency.push(None);
        self.arena.distance.push(dist);
        if self.kind == WalkKind::Vertex {
            let e = self.push_element(ElementKey::Vertex(key))?;
            debug_assert_eq!(e, i);
        }
        Ok(i)
    }

    fn expand(&mut self, v: u32) -> Result<(), WalkError> {
        if self.arena.adjacency[v as usize].is_some() {
            return Ok(());
        }
        let key = self.arena.keys[v as usize].clone();
        let nbrs = self.graph.neighbors(&key)?;
        let mut list = Vec::with_capacity(nbrs.len());
        for nk in nbrs {
            let u = self.intern(nk)?;
            let elem = match self.kind {
                WalkKind::Vertex => u,
                WalkKind::Edge => {
                    let pair = (v.min(u), v.max(u));
                    match self.arena.edge_index.get(&pair) {
                        Some(&e) => e,
                        None => {
                            let id = EdgeId::new(key.clone(), self.arena.keys[u as usize].clone());
                            let e = self.push_element(ElementKey::Edge(id))?;
                            self.arena.edge_index.insert(pair, e);
                            self.arena.edge_ends.push(pair);
                            e
                        }
                    }
                }
            };
            list.push((u, elem));
        }
        self.arena.adjacency[v as usize] = Some(list.into_boxed_slice());
        Ok(())
    }

    /// Recomputes the cached weight of element `e`, switching the replica to
    /// log space on overflow.
    fn refresh(&mut self, e: u32) -> Result<(), WalkError> {
        let e = e as usize;
        let w = &self.weights[self.arena.weight_of[e] as usize];
        let x = self.arena.initial[e] + self.arena.counts[e] as f64;
        match self.mode {
            WeightMode::Linear => match w.evaluate(x) {
                Ok(v) if v <= LOG_SPACE_THRESHOLD => self.arena.cached[e] = v,
                Ok(_) | Err(WeightError::Overflow { .. }) => {
                    self.switch_to_log_space()?;
                }
                Err(err) => return Err(err.into()),
            },
            WeightMode::LogSpace => self.arena.cached[e] = w.ln_evaluate(x)?,
        }
        Ok(())
    }

    fn switch_to_log_space(&mut self) -> Result<(), WalkError> {
        self.mode = WeightMode::LogSpace;
        for e in 0..self.arena.counts.len() {
            let w = &self.weights[self.arena.weight_of[e] as usize];
            self.arena.cached[e] = w.ln_evaluate(self.arena.initial[e] + self.arena.counts[e] as f64)?;
        }
        Ok(())
    }

    pub fn kind(&self) -> WalkKind {
        self.kind
    }

    pub fn graph(&self) -> &Arc<GraphModel> {
        &self.graph
    }

    pub fn assignment(&self) -> &Arc<WeightAssignment> {
        &self.assignment
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Replaces the random stream, keeping the configuration.
    pub fn reseed(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.seed = seed;
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn weight_mode(&self) -> WeightMode {
        self.mode
    }

    pub fn current_vertex(&self) -> &VertexId {
        &self.arena.keys[self.current as usize]
    }

    /// Dense index of the current vertex (the [`FiniteGraph`] index on
    /// finite graphs).
    pub fn current_index(&self) -> usize {
        self.current as usize
    }

    /// Largest graph distance from the root visited so far.
    pub fn range_radius(&self) -> u64 {
        self.max_radius
    }

    /// Traversal counts (`X_k - l0`) indexed by element; on finite graphs the
    /// index is the edge (ERRW) or vertex (VRRW) index of the [`FiniteGraph`].
    pub fn counts(&self) -> &[u64] {
        &self.arena.counts
    }

    pub fn element_key(&self, e: usize) -> ElementKey {
        match self.kind {
            WalkKind::Vertex => ElementKey::Vertex(self.arena.keys[e].clone()),
            WalkKind::Edge => {
                let (a, b) = self.arena.edge_ends[e];
                ElementKey::Edge(EdgeId::new(
                    self.arena.keys[a as usize].clone(),
                    self.arena.keys[b as usize].clone(),
                ))
            }
        }
    }

    /// Distance from the root of every vertex touched by element `e`.
    pub fn element_distance(&self, e: usize) -> u64 {
        match self.kind {
            WalkKind::Vertex => self.arena.distance[e],
            WalkKind::Edge => {
                let (a, b) = self.arena.edge_ends[e];
                self.arena.distance[a as usize].max(self.arena.distance[b as usize])
            }
        }
    }

    /// Number of elements in scope: all of them on finite graphs, the
    /// discovered ones otherwise.
    pub fn scope_len(&self) -> usize {
        self.arena.counts.len()
    }

    pub fn order_statistics(&self) -> OrderStats {
        OrderStats::from_counts(self.arena.counts.iter().copied(), self.scope_len())
    }

    /// Sets counts, position and step index on a finite graph.
    pub fn set_configuration(&mut self, current: usize, counts: &[u64]) -> Result<(), WalkError> {
        if !self.finite {
            return Err(WalkError::BadConfiguration("configurations can only be set on finite graphs".into()));
        }
        if counts.len() != self.arena.counts.len() || current >= self.arena.keys.len() {
            return Err(WalkError::BadConfiguration(format!(
                "expected {} counts and a vertex index below {}",
                self.arena.counts.len(),
                self.arena.keys.len()
            )));
        }
        self.arena.counts.copy_from_slice(counts);
        self.current = current as u32;
        self.step = counts.iter().sum();
        self.mode = WeightMode::Linear;
        for e in 0..counts.len() {
            self.refresh(e as u32)?;
        }
        Ok(())
    }

    fn incident(&self) -> &[(u32, u32)] {
        self.arena.adjacency[self.current as usize]
            .as_deref()
            .expect("current vertex is expanded")
    }

    /// One-step law from the current state, in neighbor order, together with
    /// the weight representation used to compute it.
    pub fn transition_distribution(&self) -> (Vec<(VertexId, f64)>, WeightMode) {
        let inc = self.incident();
        let c = &self.arena.cached;
        let probs: Vec<f64> = match self.mode {
            WeightMode::Linear => {
                let total: f64 = inc.iter().map(|&(_, e)| c[e as usize]).sum();
                inc.iter().map(|&(_, e)| c[e as usize] / total).collect()
            }
            WeightMode::LogSpace => {
                let m = inc.iter().map(|&(_, e)| c[e as usize]).fold(f64::NEG_INFINITY, f64::max);
                let w: Vec<f64> = inc.iter().map(|&(_, e)| (c[e as usize] - m).exp()).collect();
                let total: f64 = w.iter().sum();
                w.into_iter().map(|x| x / total).collect()
            }
        };
        let out = inc
            .iter()
            .zip(probs)
            .map(|(&(u, _), p)| (self.arena.keys[u as usize].clone(), p))
            .collect();
        (out, self.mode)
    }

    /// Inverse-CDF choice among the incident elements.
    fn sample_sequential(&mut self) -> usize {
        let deg = self.incident().len();
        let u: f64 = self.rng.random();
        let inc = self.arena.adjacency[self.current as usize].as_deref().unwrap();
        let c = &self.arena.cached;
        match self.mode {
            WeightMode::Linear => {
                let total: f64 = inc.iter().map(|&(_, e)| c[e as usize]).sum();
                let target = u * total;
                let mut acc = 0.0;
                for (i, &(_, e)) in inc.iter().enumerate() {
                    acc += c[e as usize];
                    if target < acc {
                        return i;
                    }
                }
                deg - 1
            }
            WeightMode::LogSpace => {
                let m = inc.iter().map(|&(_, e)| c[e as usize]).fold(f64::NEG_INFINITY, f64::max);
                let total: f64 = inc.iter().map(|&(_, e)| (c[e as usize] - m).exp()).sum();
                let target = u * total;
                let mut acc = 0.0;
                for (i, &(_, e)) in inc.iter().enumerate() {
                    acc += (c[e as usize] - m).exp();
                    if target < acc {
                        return i;
                    }
                }
                deg - 1
            }
        }
    }

    /// Exponential race: each competitor rings after `Exp(1) / weight`.
    fn sample_race(&mut self) -> usize {
        let inc = self.arena.adjacency[self.current as usize].as_deref().unwrap();
        let c = &self.arena.cached;
        let mut best = (f64::INFINITY, 0usize);
        for (i, &(_, e)) in inc.iter().enumerate() {
            let draw: f64 = self.rng.sample(Exp1);
            let t = match self.mode {
                WeightMode::Linear => draw / c[e as usize],
                WeightMode::LogSpace => draw.ln() - c[e as usize],
            };
            if t < best.0 {
                best = (t, i);
            }
        }
        best.1
    }

    /// Moves along the `choice`-th incident element.
    fn advance(&mut self, choice: usize) -> Result<(), WalkError> {
        let (u, e) = self.incident()[choice];
        self.arena.counts[e as usize] += 1;
        self.refresh(e)?;
        let v = self.current;
        let pair = (v.min(u), v.max(u));
        self.step += 1;
        if self.run.edge != Some(pair) {
            self.run = EdgeRun {
                edge: Some(pair),
                start: self.step,
            };
        }
        self.current = u;
        if !self.finite {
            self.expand(u)?;
        }
        let d = self.arena.distance[u as usize];
        if d > self.max_radius {
            self.max_radius = d;
        }
        Ok(())
    }

    /// One step of the sequential sampler.
    pub fn step(&mut self) -> Result<(), WalkError> {
        let i = self.sample_sequential();
        self.advance(i)
    }

    /// One step of the exponential-race sampler.
    pub fn embedded_step(&mut self) -> Result<(), WalkError> {
        let i = self.sample_race();
        self.advance(i)
    }

    pub fn step_with(&mut self, engine: Engine) -> Result<(), WalkError> {
        match engine {
            Engine::Sequential => self.step(),
            Engine::Rubin => self.embedded_step(),
        }
    }

    /// The edge traversed in the current run of identical traversals and the
    /// step at which that run began.
    pub fn current_run(&self) -> Option<(EdgeId, u64)> {
        self.run.edge.map(|(a, b)| {
            (
                EdgeId::new(self.arena.keys[a as usize].clone(), self.arena.keys[b as usize].clone()),
                self.run.start,
            )
        })
    }

    /// Attraction verdict for the final `window` steps.
    pub fn attraction_verdict(&self, window: u64) -> AttractionVerdict {
        let detected = window >= 1
            && window <= self.step
            && self.run.edge.is_some()
            && self.run.start + window <= self.step + 1;
        match (detected, self.current_run()) {
            (true, Some((edge, start))) => AttractionVerdict::attracted(self.kind, edge, start, window),
            _ => AttractionVerdict::not_detected(window),
        }
    }

    /// Non-zero counts keyed by element.
    pub fn sparse_counts(&self) -> Vec<ElementCount> {
        self.arena
            .counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(e, &c)| ElementCount {
                element: match self.element_key(e) {
                    ElementKey::Edge(id) => id.to_string(),
                    ElementKey::Vertex(v) => v.to_string(),
                },
                count: c,
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementCount {
    pub element: String,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: u64,
    pub order_stats: OrderStats,
}

/// When observers are called.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stride {
    /// Steps `1, 2, 4, 8, ...` and the final step.
    Geometric,
    /// Every `n` steps and the final step.
    Every(u64),
}

impl Stride {
    fn fires(&self, k: u64) -> bool {
        match *self {
            Stride::Geometric => k.is_power_of_two(),
            Stride::Every(n) => n > 0 && k.is_multiple_of(n),
        }
    }
}

/// Callback invoked at snapshot steps.
pub trait Observer {
    fn observe(&mut self, state: &WalkState);
}

impl<F: FnMut(&WalkState)> Observer for F {
    fn observe(&mut self, state: &WalkState) {
        self(state)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub horizon: u64,
    pub engine: Engine,
    pub stride: Stride,
    pub window: Option<u64>,
}

impl RunOptions {
    pub fn new(horizon: u64) -> Self {
        RunOptions {
            horizon,
            engine: Engine::Sequential,
            stride: Stride::Geometric,
            window: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub seed: u64,
    pub kind: WalkKind,
    pub engine: Engine,
    pub graph: String,
    pub weight: String,
    pub initial_weight: f64,
    pub horizon: u64,
    pub final_vertex: String,
    pub final_counts: Vec<ElementCount>,
    pub order_stats_snapshots: Vec<Snapshot>,
    pub range_radius_max: u64,
    pub weight_mode: WeightMode,
    pub attraction: Option<AttractionVerdict>,
}

/// Runs `options.horizon` steps, calling each observer at the stride steps
/// and once more after the last step.
pub fn run(
    state: &mut WalkState,
    options: &RunOptions,
    observers: &mut [&mut dyn Observer],
) -> Result<TrajectorySummary, WalkError> {
    let mut snapshots = Vec::new();
    let start = state.step;
    for i in 1..=options.horizon {
        state.step_with(options.engine)?;
        if options.stride.fires(i) && i != options.horizon {
            snapshots.push(Snapshot {
                step: state.step,
                order_stats: state.order_statistics(),
            });
            for o in observers.iter_mut() {
                o.observe(state);
            }
        }
    }
    snapshots.push(Snapshot {
        step: state.step,
        order_stats: state.order_statistics(),
    });
    for o in observers.iter_mut() {
        o.observe(state);
    }
    debug_assert_eq!(state.step, start + options.horizon);
    Ok(TrajectorySummary {
        seed: state.seed,
        kind: state.kind,
        engine: options.engine,
        graph: describe_graph(&state.graph),
        weight: state.assignment.default_weight().to_string(),
        initial_weight: state.assignment.default_initial(),
        horizon: options.horizon,
        final_vertex: state.current_vertex().to_string(),
        final_counts: state.sparse_counts(),
        order_stats_snapshots: snapshots,
        range_radius_max: state.range_radius(),
        weight_mode: state.mode,
        attraction: options.window.map(|w| state.attraction_verdict(w)),
    })
}

pub fn describe_graph(g: &GraphModel) -> String {
    format!("{:?} rooted at {}", g.family(), g.root())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphModel;
    use proptest::prelude::*;

    fn state(kind: WalkKind, g: GraphModel, w: &str, l0: f64, seed: u64) -> WalkState {
        let a = WeightAssignment::uniform(w.parse().unwrap(), l0).unwrap();
        WalkState::new(kind, Arc::new(g), Arc::new(a), seed).unwrap()
    }

    fn probs(s: &WalkState) -> Vec<(i64, f64)> {
        s.transition_distribution().0.into_iter().map(|(v, p)| (v.0[0], p)).collect()
    }

    #[test]
    fn errw_transition_examples() {
        let g = GraphModel::path(3).unwrap().with_root(VertexId::label(1)).unwrap();
        let mut s = state(WalkKind::Edge, g, "power:2", 1.0, 1);
        assert_eq!(probs(&s), vec![(0, 0.5), (2, 0.5)]);
        // after b -> a -> b the edge {a,b} carries two traversals
        s.set_configuration(1, &[2, 0]).unwrap();
        let p = probs(&s);
        assert!((p[0].1 - 0.9).abs() < 1e-12 && (p[1].1 - 0.1).abs() < 1e-12);
    }

    #[test]
    fn vrrw_transition_example() {
        let g = GraphModel::path(3).unwrap().with_root(VertexId::label(1)).unwrap();
        let mut s = state(WalkKind::Vertex, g, "power:2", 1.0, 1);
        // b -> a -> b: a visited once, b visited once, c never
        s.set_configuration(1, &[1, 1, 0]).unwrap();
        let p = probs(&s);
        assert!((p[0].1 - 0.8).abs() < 1e-12 && (p[1].1 - 0.2).abs() < 1e-12);
    }

    #[test]
    fn step_bookkeeping() {
        for kind in [WalkKind::Edge, WalkKind::Vertex] {
            let mut s = state(kind, GraphModel::cycle(5).unwrap(), "power:2", 1.0, 3);
            for _ in 0..50 {
                let before = s.counts().to_vec();
                let old = s.current_index();
                s.step().unwrap();
                let new = s.current_index();
                let changed: Vec<usize> = (0..before.len()).filter(|&e| s.counts()[e] != before[e]).collect();
                assert_eq!(changed.len(), 1);
                let e = changed[0];
                assert_eq!(s.counts()[e], before[e] + 1);
                match kind {
                    WalkKind::Edge => {
                        let fg = s.graph().finite().unwrap().clone();
                        assert_eq!(fg.edges()[e], (old.min(new), old.max(new)));
                    }
                    WalkKind::Vertex => assert_eq!(e, new),
                }
                assert_eq!(s.counts().iter().sum::<u64>(), s.step_index());
            }
        }
    }

    #[test]
    fn run_examples() {
        let mut s = state(WalkKind::Edge, GraphModel::star(3).unwrap(), "power:2", 1.0, 5);
        let initial = s.order_statistics();
        let sum0 = run(&mut s.clone(), &RunOptions::new(0), &mut []).unwrap();
        assert_eq!(sum0.order_stats_snapshots.last().unwrap().order_stats, initial);
        assert!(sum0.final_counts.is_empty());
        let sum = run(&mut s, &RunOptions::new(10), &mut []).unwrap();
        assert_eq!(sum.final_counts.iter().map(|c| c.count).sum::<u64>(), 10);

        let mk = || state(WalkKind::Edge, GraphModel::path(5).unwrap(), "power:2", 1.0, 42);
        let a = run(&mut mk(), &RunOptions::new(1000), &mut []).unwrap();
        let b = run(&mut mk(), &RunOptions::new(1000), &mut []).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn observers_fire_on_geometric_stride() {
        let mut s = state(WalkKind::Vertex, GraphModel::cycle(4).unwrap(), "power:3", 1.0, 9);
        let mut steps = Vec::new();
        let mut obs = |st: &WalkState| steps.push(st.step_index());
        let summary = run(&mut s, &RunOptions::new(20), &mut [&mut obs]).unwrap();
        assert_eq!(steps, vec![1, 2, 4, 8, 16, 20]);
        assert_eq!(summary.order_stats_snapshots.len(), 6);
    }

    #[test]
    fn order_statistics_examples() {
        assert_eq!(OrderStats::from_counts([5, 2, 5], 3).0, vec![5, 5, 2]);
        let s = state(WalkKind::Edge, GraphModel::triangle(), "power:2", 1.0, 0);
        assert_eq!(s.order_statistics().0, vec![0, 0, 0]);
        let mut s = state(WalkKind::Vertex, GraphModel::cycle(4).unwrap(), "power:2", 1.0, 11);
        for _ in 0..100 {
            s.step().unwrap();
        }
        check_vertex_order_bounds(&s.order_statistics(), 100, 4);
    }

    fn check_vertex_order_bounds(r: &OrderStats, k: u64, n: u64) {
        assert!(k / n <= r.get(1) && r.get(1) <= k.div_ceil(2), "{r:?}");
        let lo2 = k.saturating_sub(1) / (2 * (n - 1));
        assert!(lo2 <= r.get(2) && r.get(2) <= k / 2, "{r:?}");
    }

    #[test]
    fn lazy_lattice_walk_stays_consistent() {
        let mut s = state(WalkKind::Edge, GraphModel::lattice(2).unwrap(), "power:1.5", 1.0, 4);
        for _ in 0..2000 {
            s.step().unwrap();
        }
        assert_eq!(s.counts().iter().sum::<u64>(), 2000);
        for e in 0..s.scope_len() {
            if s.counts()[e] > 0 {
                assert!(s.element_distance(e) <= 2001);
            }
        }
        assert!(s.range_radius() >= 1);
    }

    #[test]
    fn exponential_weights_switch_to_log_space() {
        let mut s = state(WalkKind::Edge, GraphModel::path(3).unwrap(), "exp:10", 0.0, 2);
        for _ in 0..200 {
            s.step().unwrap();
        }
        assert_eq!(s.weight_mode(), WeightMode::LogSpace);
        let (d, mode) = s.transition_distribution();
        assert_eq!(mode, WeightMode::LogSpace);
        assert!((d.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_step_frequencies_match_law() {
        let mut base = state(WalkKind::Edge, GraphModel::triangle(), "power:2", 1.0, 77);
        base.set_configuration(0, &[2, 1, 0]).unwrap();
        let (law, _) = base.transition_distribution();
        let n = 100_000u64;
        let mut hits = 0u64;
        let mut probe = base.clone();
        for _ in 0..n {
            let mut s = probe.clone();
            s.step().unwrap();
            if s.current_vertex() == &law[0].0 {
                hits += 1;
            }
            probe.rng = s.rng.clone();
        }
        let p = law[0].1;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!(((hits as f64 / n as f64) - p).abs() <= 3.0 * sigma);
    }

    fn configs() -> impl Strategy<Value = (WalkKind, GraphModel, String, u64)> {
        let graphs = prop_oneof![
            (3usize..8).prop_map(|n| GraphModel::cycle(n).unwrap()),
            (2usize..8).prop_map(|n| GraphModel::path(n).unwrap()),
            (1usize..6).prop_map(|n| GraphModel::star(n).unwrap()),
            (2usize..6).prop_map(|n| GraphModel::complete(n).unwrap()),
            Just(GraphModel::lattice(1).unwrap()),
            Just(GraphModel::regular_tree(2).unwrap()),
        ];
        let weights = prop_oneof![
            (1.0f64..4.0).prop_map(|r| format!("power:{r}")),
            (0.1f64..2.0).prop_map(|l| format!("exp:{l}")),
            Just("oscpow:1".to_string()),
        ];
        (
            prop_oneof![Just(WalkKind::Edge), Just(WalkKind::Vertex)],
            graphs,
            weights,
            any::<u64>(),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn conservation_and_monotone_order_stats((kind, g, w, seed) in configs()) {
            let mut s = state(kind, g, &w, 1.0, seed);
            let mut prev = s.order_statistics();
            for k in 1..=300u64 {
                s.step().unwrap();
                prop_assert_eq!(s.counts().iter().sum::<u64>(), k);
                let r = s.order_statistics();
                for i in 1..=prev.0.len() {
                    prop_assert!(r.get(i) >= prev.get(i));
                }
                prev = r;
            }
        }

        #[test]
        fn scale_invariance_of_transitions(counts in proptest::collection::vec(0u64..20, 3), at in 0usize..3) {
            let mut a = state(WalkKind::Edge, GraphModel::triangle(), "power:2", 1.0, 0);
            let law7 = WeightFunction::table((0..64).map(|i: i32| 7.0 * f64::from(i.max(1)).powi(2)).collect(), None).unwrap();
            let mut b = WalkState::new(
                WalkKind::Edge,
                Arc::new(GraphModel::triangle()),
                Arc::new(WeightAssignment::uniform(law7, 1.0).unwrap()),
                0,
            ).unwrap();
            a.set_configuration(at, &counts).unwrap();
            b.set_configuration(at, &counts).unwrap();
            let (pa, _) = a.transition_distribution();
            let (pb, _) = b.transition_distribution();
            for (x, y) in pa.iter().zip(&pb) {
                prop_assert_eq!(&x.0, &y.0);
                prop_assert!((x.1 - y.1).abs() < 1e-12);
            }
        }

        #[test]
        fn vrrw_bipartite_decoupling(n in 2usize..5, seed in any::<u64>()) {
            let g = GraphModel::cycle(2 * n).unwrap();
            let (u1, _) = g.is_bipartite().unwrap().parts.unwrap();
            let fg = g.finite().unwrap().clone();
            let side: Vec<bool> = (0..fg.vertex_count()).map(|i| u1.contains(fg.vertex(i))).collect();
            let mut s = state(WalkKind::Vertex, g, "power:2", 1.0, seed);
            for _ in 0..500 {
                s.step().unwrap();
                let (mut a, mut b) = (0i64, 0i64);
                for (v, &c) in s.counts().iter().enumerate() {
                    if side[v] { a += c as i64 } else { b += c as i64 }
                }
                prop_assert!((a - b).abs() <= 2);
            }
        }
    }
}
