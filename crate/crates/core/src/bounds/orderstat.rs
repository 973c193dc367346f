use serde::{Deserialize, Serialize};

use super::{q_m, BoundError, Cap, Scalar};
use crate::graph::GraphModel;
use crate::weight::{SeriesSpec, Verdict, WeightFunction};

/// `|V| * n! / w(l0)`.
pub fn errw_orderstat_constant<S: Scalar>(edges: usize, vertices: usize, w: &WeightFunction, l0: f64) -> Result<S, BoundError> {
    Ok(S::from_u64(vertices as u64) * S::factorial(edges as u64) / S::weight(w, l0, 0)?)
}

/// Bound on `P(R_k^2 = l2)` for an edge-reinforced walk on a graph with
/// `edges` edges and `vertices` vertices, all initial weights equal to `l0`.
pub fn errw_orderstat_bound<S: Scalar>(
    edges: usize,
    vertices: usize,
    w: &WeightFunction,
    l0: f64,
    k: u64,
    l2: u64,
) -> Result<S, BoundError> {
    if edges < 3 {
        return Err(BoundError::OutOfRange(format!("need at least 3 edges, got {edges}")));
    }
    if l2 > k / 2 {
        return Err(BoundError::OutOfRange(format!("second order statistic {l2} exceeds [k/2] = {}", k / 2)));
    }
    let c = errw_orderstat_constant::<S>(edges, vertices, w, l0)?;
    let mut bracket = S::one() / S::weight(w, l0, l2)?;
    let from = (k / edges as u64).max(l2);
    for i in from..=k - l2 {
        let q = q_m::<S>(edges as u32 - 2, k - i - l2, l0, Cap::Infinite, w)?;
        if !q.is_zero() {
            bracket = bracket + q / S::weight(w, l0, i)?;
        }
    }
    Ok(c * bracket)
}

/// Constant of the vertex order-statistic bound: `n * n! / w(l0)` for three
/// vertices and `(n-1) * n * n! / w(l0) * max(1, c(l0))^(n-3)` beyond, with
/// `c(l0)` replaced by a certified upper bound.
pub fn vrrw_orderstat_constant<S: Scalar>(vertices: usize, w: &WeightFunction, l0: f64) -> Result<S, BoundError> {
    let n = vertices as u64;
    let base = S::from_u64(n) * S::factorial(n) / S::weight(w, l0, 0)?;
    if vertices == 3 {
        return Ok(base);
    }
    let c_upper = w.series_upper(SeriesSpec::reciprocal(l0, 0), 1e-12)?.hi.max(1.0);
    Ok(base * S::from_u64(n - 1) * S::from_f64(c_upper).powi(vertices as u32 - 3))
}

/// Bound on `P(R_k^3 = l3)` for a vertex-reinforced walk on `vertices`
/// vertices with common initial weight `l0`.
pub fn vrrw_orderstat_bound<S: Scalar>(
    vertices: usize,
    w: &WeightFunction,
    l0: f64,
    k: u64,
    l3: u64,
) -> Result<S, BoundError> {
    if vertices < 3 {
        return Err(BoundError::OutOfRange(format!("need at least 3 vertices, got {vertices}")));
    }
    if l3 > k / 3 {
        return Err(BoundError::OutOfRange(format!("third order statistic {l3} exceeds [k/3] = {}", k / 3)));
    }
    let c = vrrw_orderstat_constant::<S>(vertices, w, l0)?;
    let mut bracket = S::from_u64(l3) / S::weight(w, l0, l3)?;
    for i in l3..=k - l3 {
        bracket = bracket + S::one() / S::weight(w, l0, i)?;
    }
    Ok(c * bracket)
}

/// Constant shared by the bipartite, triangle-free and linear-ratio bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideBoundConstant {
    pub value: f64,
    pub formula: String,
}

impl SideBoundConstant {
    /// `(n-1) * n * n! / w(l0) * max(1, c(l0), s(l0))^(n-3)` with
    /// `s(l0) = sum_{i>=1} sqrt(i) / w(i + l0)`.
    fn new(vertices: usize, w: &WeightFunction, l0: f64) -> Result<Self, BoundError> {
        let n = vertices as f64;
        let fact: f64 = (1..=vertices).map(|i| i as f64).product();
        let c = w.series_upper(SeriesSpec::reciprocal(l0, 0), 1e-10)?.hi;
        let s = w
            .series_upper(
                SeriesSpec {
                    alpha: 0.5,
                    shift: l0,
                    stride: 1,
                    start: 1,
                },
                1e-8,
            )?
            .hi;
        let growth = c.max(s).max(1.0);
        let value = (n - 1.0) * n * fact / w.evaluate(l0)? * growth.powi(vertices.saturating_sub(3) as i32);
        Ok(SideBoundConstant {
            value,
            formula: format!(
                "(n-1)*n*n!/w(l0)*max(1,c(l0),s(l0))^(n-3) with n={vertices}, c(l0)<={c:.12}, s(l0)<={s:.12}"
            ),
        })
    }
}

fn check_side(vertices: usize, k: u64, l3: u64) -> Result<(), BoundError> {
    if vertices < 3 {
        return Err(BoundError::OutOfRange(format!("need at least 3 vertices, got {vertices}")));
    }
    if k == 0 {
        return Err(BoundError::OutOfRange("k must be at least 1".into()));
    }
    if l3 > k / 3 {
        return Err(BoundError::OutOfRange(format!("third order statistic {l3} exceeds [k/3] = {}", k / 3)));
    }
    Ok(())
}

fn half_moment_form(vertices: usize, w: &WeightFunction, l0: f64, k: u64, l3: u64) -> Result<(f64, SideBoundConstant), BoundError> {
    if w.moment_summable(0.5) != Verdict::Holds {
        return Err(BoundError::Precondition(format!("sum sqrt(i)/w(i+l0) must converge for {w}")));
    }
    check_side(vertices, k, l3)?;
    let c = SideBoundConstant::new(vertices, w, l0)?;
    let mut sum = 0.0;
    for i in l3..=k - l3 {
        sum += 1.0 / w.evaluate(l0 + i as f64)?;
    }
    let first = (l3 as f64).sqrt() / w.evaluate(l0 + l3 as f64)?;
    Ok((c.value * (first + sum / (k as f64).sqrt()), c))
}

fn finite_vertex_count(graph: &GraphModel) -> Result<usize, BoundError> {
    graph
        .finite()
        .map(|g| g.vertex_count())
        .ok_or_else(|| BoundError::Precondition("graph must be finite".into()))
}

/// Bound on `P(R_k^3 = l3)` for a vertex-reinforced walk on a finite
/// bipartite graph under a summable half moment.
pub fn bipartite_orderstat_bound(
    graph: &GraphModel,
    w: &WeightFunction,
    l0: f64,
    k: u64,
    l3: u64,
) -> Result<(f64, SideBoundConstant), BoundError> {
    let n = finite_vertex_count(graph)?;
    let parts = graph.is_bipartite()?;
    let (u1, u2) = parts.parts.ok_or(BoundError::NotBipartite)?;
    if u1.len() + u2.len() != n {
        return Err(BoundError::Precondition("bipartition does not cover the graph".into()));
    }
    half_moment_form(n, w, l0, k, l3)
}

/// Same shape as [`bipartite_orderstat_bound`] for triangle-free graphs.
pub fn triangle_free_orderstat_bound(
    graph: &GraphModel,
    w: &WeightFunction,
    l0: f64,
    k: u64,
    l3: u64,
) -> Result<(f64, SideBoundConstant), BoundError> {
    let n = finite_vertex_count(graph)?;
    if !graph.is_triangle_free()? {
        return Err(BoundError::NotTriangleFree);
    }
    half_moment_form(n, w, l0, k, l3)
}

/// Bound `C / w(l3 + l0)` on a bipartite graph when `sup_i i / w(i + l0)`
/// is finite.
pub fn bipbip_orderstat_bound(
    graph: &GraphModel,
    w: &WeightFunction,
    l0: f64,
    k: u64,
    l3: u64,
) -> Result<(f64, SideBoundConstant), BoundError> {
    let n = finite_vertex_count(graph)?;
    if !graph.is_bipartite()?.bipartite {
        return Err(BoundError::NotBipartite);
    }
    let class = w.classify(l0);
    if class.reciprocal_summable != Verdict::Holds || class.linear_ratio_bounded != Verdict::Holds {
        return Err(BoundError::Precondition(format!(
            "{w} must be reciprocally summable with bounded i/w(i+l0)"
        )));
    }
    check_side(n, k, l3)?;
    let c = SideBoundConstant::new(n, w, l0)?;
    Ok((c.value / w.evaluate(l0 + l3 as f64)?, c))
}
