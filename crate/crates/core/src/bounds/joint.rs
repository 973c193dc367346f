use super::{BoundError, Scalar};
use crate::graph::FiniteGraph;
use crate::weight::{ElementKey, WeightAssignment};

fn check_counts(counts: &[u64], expected_len: usize, k: u64) -> Result<(), BoundError> {
    if counts.len() != expected_len {
        return Err(BoundError::WrongLength {
            expected: expected_len,
            got: counts.len(),
        });
    }
    let total: u64 = counts.iter().sum();
    if total != k {
        return Err(BoundError::CountMismatch { expected: k, got: total });
    }
    Ok(())
}

fn minimum<S: Scalar>(values: impl IntoIterator<Item = S>) -> S {
    values
        .into_iter()
        .reduce(|a, b| if b < a { b } else { a })
        .expect("non-empty neighbourhood")
}

/// Path-independent upper bound on `P(X_k - l0 = counts, I_k = landing)` for
/// the edge-reinforced walk. `counts` is indexed by edge.
pub fn errw_joint_bound<S: Scalar>(
    graph: &FiniteGraph,
    assignment: &WeightAssignment,
    counts: &[u64],
    landing: usize,
    k: u64,
) -> Result<S, BoundError> {
    check_counts(counts, graph.edge_count(), k)?;
    let weight = |e: usize, c: u64| -> Result<S, BoundError> {
        let key = ElementKey::Edge(graph.edge_id(e));
        S::weight(assignment.weight_for(&key), assignment.initial_for(&key), c)
    };
    let mut initial = S::one();
    let mut current = S::one();
    for (e, &c) in counts.iter().enumerate() {
        initial = initial * weight(e, 0)?;
        current = current * weight(e, c)?;
    }
    let start_min = minimum(
        graph
            .adjacent(graph.root())
            .iter()
            .map(|&(_, e)| weight(e, 0))
            .collect::<Result<Vec<S>, _>>()?,
    );
    let mut around = S::zero();
    for &(_, e) in graph.adjacent(landing) {
        around = around + weight(e, counts[e])?;
    }
    Ok(initial / start_min * (around / current))
}

/// Path-independent upper bound on `P(X_k - l0 = counts, I_k = landing)` for
/// the vertex-reinforced walk. `counts` is indexed by vertex.
pub fn vrrw_joint_bound<S: Scalar>(
    graph: &FiniteGraph,
    assignment: &WeightAssignment,
    counts: &[u64],
    landing: usize,
    k: u64,
) -> Result<S, BoundError> {
    check_counts(counts, graph.vertex_count(), k)?;
    let weight = |v: usize, c: u64| -> Result<S, BoundError> {
        let key = ElementKey::Vertex(graph.vertex(v).clone());
        S::weight(assignment.weight_for(&key), assignment.initial_for(&key), c)
    };
    let root = graph.root();
    let mut initial = S::one();
    let mut current = S::one();
    for (v, &c) in counts.iter().enumerate() {
        if v != root {
            initial = initial * weight(v, 0)?;
        }
        if v != landing {
            current = current * weight(v, c)?;
        }
    }
    let start_min = minimum(
        graph
            .adjacent(root)
            .iter()
            .map(|&(u, _)| weight(u, 0))
            .collect::<Result<Vec<S>, _>>()?,
    );
    let mut around = S::zero();
    for &(u, _) in graph.adjacent(landing) {
        around = around + weight(u, counts[u])?;
    }
    Ok(initial / start_min * (around / current))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphModel, VertexId};
    use crate::weight::WeightFunction;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::One;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn errw_triangle_example() {
        let g = GraphModel::triangle();
        let fg = g.finite().unwrap();
        let a = WeightAssignment::uniform(WeightFunction::power(1.0).unwrap(), 1.0).unwrap();
        let e01 = fg.edge_index(0, 1).unwrap();
        let mut counts = vec![0; 3];
        counts[e01] = 2;
        let b: BigRational = errw_joint_bound(fg, &a, &counts, 0, 2).unwrap();
        assert_eq!(b, r(4, 3));
        let base: BigRational = errw_joint_bound(fg, &a, &[0, 0, 0], 0, 0).unwrap();
        assert!(base >= BigRational::one());
        assert!(errw_joint_bound::<BigRational>(fg, &a, &counts, 0, 3).is_err());
    }

    #[test]
    fn vrrw_path_example() {
        let g = GraphModel::path(3).unwrap().with_root(VertexId::label(1)).unwrap();
        let fg = g.finite().unwrap();
        let a = WeightAssignment::uniform(WeightFunction::shifted_power(1.0).unwrap(), 0.0).unwrap();
        let b: BigRational = vrrw_joint_bound(fg, &a, &[1, 0, 0], 0, 1).unwrap();
        assert_eq!(b, r(1, 1));
        assert!(b >= r(1, 2));
        let base: BigRational = vrrw_joint_bound(fg, &a, &[0, 0, 0], 1, 0).unwrap();
        assert!(base >= BigRational::one());
    }

    #[test]
    fn landing_vertex_is_left_out_of_the_denominator() {
        let g = GraphModel::path(3).unwrap().with_root(VertexId::label(1)).unwrap();
        let fg = g.finite().unwrap();
        let w = WeightFunction::power(2.0).unwrap();
        let a = WeightAssignment::uniform(w.clone(), 1.0).unwrap();
        let doubled = WeightAssignment::uniform(w, 1.0)
            .unwrap()
            .with_weight(
                ElementKey::Vertex(VertexId::label(0)),
                WeightFunction::table((0..16).map(|i: i32| 2.0 * f64::from(i.max(1) * i.max(1))).collect(), None).unwrap(),
            )
            .unwrap();
        // landing on a: its weight enters only through the initial product
        let counts = [2, 1, 0];
        let plain: BigRational = vrrw_joint_bound(fg, &a, &counts, 0, 3).unwrap();
        let twice: BigRational = vrrw_joint_bound(fg, &doubled, &counts, 0, 3).unwrap();
        assert_eq!(twice, plain * r(2, 1));
    }
}
