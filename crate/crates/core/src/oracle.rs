//! Exhaustive enumeration of walk paths with exact probabilities.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use thiserror::Error;

use crate::bounds::{BoundError, Scalar};
use crate::graph::{FiniteGraph, GraphModel};
use crate::walk::WalkKind;
use crate::weight::{ElementKey, WeightAssignment};

/// Largest number of paths (`D^k`) the oracle will enumerate.
pub const PATH_BUDGET: u128 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("path budget exceeded: {paths} > {budget}")]
    Budget { paths: u128, budget: u128 },
    #[error("the oracle needs a finite graph")]
    Infinite,
    #[error("vertex {0} has no neighbours")]
    Isolated(usize),
    #[error(transparent)]
    Arithmetic(#[from] BoundError),
}

/// One enumerated path with its probability and final counts.
#[derive(Clone, Debug, PartialEq)]
pub struct PathAtom<S> {
    /// Dense vertex indices `I_0, ..., I_k`.
    pub vertices: Vec<usize>,
    /// Traversal counts at time `k`, indexed by edge or vertex.
    pub counts: Vec<u64>,
    pub probability: S,
}

impl<S> PathAtom<S> {
    pub fn last(&self) -> usize {
        *self.vertices.last().expect("paths contain the start vertex")
    }
}

/// Element reinforced by moving to `u` along edge `e`.
fn pick(kind: WalkKind, u: usize, e: usize) -> usize {
    match kind {
        WalkKind::Edge => e,
        WalkKind::Vertex => u,
    }
}

struct Enumerator<'a, S> {
    graph: &'a FiniteGraph,
    kind: WalkKind,
    /// weights[e][c] = w_e(l0_e + c)
    weights: Vec<Vec<S>>,
    k: usize,
    path: Vec<usize>,
    counts: Vec<u64>,
    out: Vec<PathAtom<S>>,
}

impl<S: Scalar> Enumerator<'_, S> {
    fn dfs(&mut self, prob: S) {
        if self.path.len() == self.k + 1 {
            self.out.push(PathAtom {
                vertices: self.path.clone(),
                counts: self.counts.clone(),
                probability: prob,
            });
            return;
        }
        let v = *self.path.last().unwrap();
        let adj = self.graph.adjacent(v);
        let mut total = S::zero();
        for &(u, e) in adj {
            let x = pick(self.kind, u, e);
            total = total + self.weights[x][self.counts[x] as usize].clone();
        }
        for &(u, e) in adj {
            let x = pick(self.kind, u, e);
            let step = self.weights[x][self.counts[x] as usize].clone() / total.clone();
            self.counts[x] += 1;
            self.path.push(u);
            self.dfs(prob.clone() * step);
            self.path.pop();
            self.counts[x] -= 1;
        }
    }
}

fn weight_table<S: Scalar>(
    graph: &FiniteGraph,
    kind: WalkKind,
    assignment: &WeightAssignment,
    k: usize,
) -> Result<Vec<Vec<S>>, BoundError> {
    let keys: Vec<ElementKey> = match kind {
        WalkKind::Edge => (0..graph.edge_count()).map(|e| ElementKey::Edge(graph.edge_id(e))).collect(),
        WalkKind::Vertex => graph.vertices().iter().cloned().map(ElementKey::Vertex).collect(),
    };
    keys.iter()
        .map(|key| {
            let w = assignment.weight_for(key);
            let l0 = assignment.initial_for(key);
            (0..=k as u64).map(|c| S::weight(w, l0, c)).collect()
        })
        .collect()
}

/// Every `k`-step path from the root with its exact probability.
pub fn enumerate_paths<S: Scalar>(
    graph: &GraphModel,
    kind: WalkKind,
    assignment: &WeightAssignment,
    k: usize,
) -> Result<Vec<PathAtom<S>>, OracleError> {
    let fg = graph.finite().ok_or(OracleError::Infinite)?;
    let d = fg.max_degree() as u128;
    let paths = (0..k).try_fold(1u128, |acc, _| acc.checked_mul(d)).unwrap_or(u128::MAX);
    if paths > PATH_BUDGET {
        return Err(OracleError::Budget {
            paths,
            budget: PATH_BUDGET,
        });
    }
    if let Some(v) = (0..fg.vertex_count()).find(|&v| fg.degree(v) == 0) {
        return Err(OracleError::Isolated(v));
    }
    let weights = weight_table::<S>(fg, kind, assignment, k)?;
    let elements = weights.len();
    let root = fg.root();
    let fresh = |first: Option<(usize, usize)>| -> Enumerator<'_, S> {
        let mut en = Enumerator {
            graph: fg,
            kind,
            weights: weights.clone(),
            k,
            path: vec![root],
            counts: vec![0; elements],
            out: Vec::new(),
        };
        if let Some((u, e)) = first {
            let x = pick(kind, u, e);
            en.counts[x] += 1;
            en.path.push(u);
        }
        en
    };
    if k == 0 {
        let mut en = fresh(None);
        en.dfs(S::one());
        return Ok(en.out);
    }
    // shard over the first step
    let adj = fg.adjacent(root);
    let total = adj.iter().fold(S::zero(), |acc, &(u, e)| {
        acc + weights[pick(kind, u, e)][0].clone()
    });
    let shards: Vec<Vec<PathAtom<S>>> = adj
        .par_iter()
        .map(|&(u, e)| {
            let p = weights[pick(kind, u, e)][0].clone() / total.clone();
            let mut en = fresh(Some((u, e)));
            en.dfs(p);
            en.out
        })
        .collect();
    Ok(shards.into_iter().flatten().collect())
}

/// Total probability of the paths satisfying `predicate`.
pub fn exact_event_probability<S: Scalar>(paths: &[PathAtom<S>], predicate: impl Fn(&PathAtom<S>) -> bool) -> S {
    paths
        .iter()
        .filter(|p| predicate(p))
        .fold(S::zero(), |acc, p| acc + p.probability.clone())
}

/// Exact law of the `i`-th largest count (1-based).
pub fn exact_orderstat_distribution<S: Scalar>(paths: &[PathAtom<S>], i: usize) -> BTreeMap<u64, S> {
    assert!(i >= 1, "order statistics are 1-based");
    let mut out: BTreeMap<u64, S> = BTreeMap::new();
    for p in paths {
        let mut sorted = p.counts.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let value = sorted.get(i - 1).copied().unwrap_or(0);
        let slot = out.entry(value).or_insert_with(S::zero);
        *slot = slot.clone() + p.probability.clone();
    }
    out
}

/// Exact law of `(counts, I_k)`.
pub fn exact_joint_law<S: Scalar>(paths: &[PathAtom<S>]) -> HashMap<(Vec<u64>, usize), S> {
    let mut out: HashMap<(Vec<u64>, usize), S> = HashMap::new();
    for p in paths {
        let slot = out.entry((p.counts.clone(), p.last())).or_insert_with(S::zero);
        *slot = slot.clone() + p.probability.clone();
    }
    out
}

/// Exact law of the sorted count vector.
pub fn exact_sorted_counts_law<S: Scalar>(paths: &[PathAtom<S>]) -> HashMap<Vec<u64>, S> {
    let mut out: HashMap<Vec<u64>, S> = HashMap::new();
    for p in paths {
        let mut sorted = p.counts.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let slot = out.entry(sorted).or_insert_with(S::zero);
        *slot = slot.clone() + p.probability.clone();
    }
    out
}

/// One-step law from vertex `at` with the given counts, in adjacency order.
pub fn one_step_law<S: Scalar>(
    graph: &GraphModel,
    kind: WalkKind,
    assignment: &WeightAssignment,
    counts: &[u64],
    at: usize,
) -> Result<Vec<(usize, S)>, OracleError> {
    let fg = graph.finite().ok_or(OracleError::Infinite)?;
    let horizon = counts.iter().copied().max().unwrap_or(0) as usize;
    let weights = weight_table::<S>(fg, kind, assignment, horizon)?;
    let adj = fg.adjacent(at);
    let pick = |u, e| pick(kind, u, e);
    let total = adj
        .iter()
        .fold(S::zero(), |acc, &(u, e)| acc + weights[pick(u, e)][counts[pick(u, e)] as usize].clone());
    Ok(adj
        .iter()
        .map(|&(u, e)| (u, weights[pick(u, e)][counts[pick(u, e)] as usize].clone() / total.clone()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::WeightFunction;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, Zero};

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn linear() -> WeightAssignment {
        WeightAssignment::uniform(WeightFunction::power(1.0).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn triangle_examples() {
        let g = GraphModel::triangle();
        let one = enumerate_paths::<BigRational>(&g, WalkKind::Edge, &linear(), 1).unwrap();
        assert_eq!(one.len(), 2);
        assert!(one.iter().all(|p| p.probability == r(1, 2)));

        let two = enumerate_paths::<BigRational>(&g, WalkKind::Edge, &linear(), 2).unwrap();
        let back = two.iter().find(|p| p.vertices == vec![0, 1, 0]).unwrap();
        assert_eq!(back.probability, r(1, 3));
        assert_eq!(exact_event_probability(&two, |_| true), BigRational::one());

        let fg = g.finite().unwrap();
        let e01 = fg.edge_index(0, 1).unwrap();
        let event = exact_event_probability(&two, |p| p.counts[e01] == 2 && p.last() == 0);
        assert_eq!(event, r(1, 3));
        let impossible = exact_event_probability(&two, |p| p.counts.iter().sum::<u64>() != 2);
        assert!(impossible.is_zero());
    }

    #[test]
    fn orderstat_distributions() {
        let g = GraphModel::triangle();
        let zero = enumerate_paths::<BigRational>(&g, WalkKind::Edge, &linear(), 0).unwrap();
        let d0 = exact_orderstat_distribution(&zero, 1);
        assert_eq!(d0.len(), 1);
        assert_eq!(d0[&0], BigRational::one());

        let two = enumerate_paths::<BigRational>(&g, WalkKind::Edge, &linear(), 2).unwrap();
        let d = exact_orderstat_distribution(&two, 1);
        let twice = exact_event_probability(&two, |p| p.counts.contains(&2));
        assert_eq!(d[&2], twice);
        assert_eq!(d.values().fold(BigRational::zero(), |a, b| a + b), BigRational::one());
    }

    #[test]
    fn budget() {
        let g = GraphModel::complete(4).unwrap();
        assert!(enumerate_paths::<f64>(&g, WalkKind::Edge, &linear(), 15).is_err());
        assert!(matches!(
            enumerate_paths::<f64>(&GraphModel::lattice(1).unwrap(), WalkKind::Edge, &linear(), 2),
            Err(OracleError::Infinite)
        ));
    }

    #[test]
    fn float_paths_sum_to_one() {
        let g = GraphModel::cycle(5).unwrap();
        let a = WeightAssignment::uniform("powerlog:1.5:2".parse().unwrap(), 1.0).unwrap();
        for kind in [WalkKind::Edge, WalkKind::Vertex] {
            let paths = enumerate_paths::<f64>(&g, kind, &a, 9).unwrap();
            let total = exact_event_probability(&paths, |_| true);
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
