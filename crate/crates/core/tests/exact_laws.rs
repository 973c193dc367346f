use num_bigint::BigInt;
use num_rational::BigRational;

use rrw_core::graph::GraphSpec;
use rrw_core::oracle::{enumerate_paths, exact_event_probability, exact_orderstat_distribution};
use rrw_core::walk::WalkKind;
use rrw_core::weight::{WeightAssignment, WeightFunction};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn orderstat_law(graph: &str, kind: WalkKind, w: WeightFunction, k: usize, i: usize) -> Vec<(u64, BigRational)> {
    let g = graph.parse::<GraphSpec>().unwrap().build().unwrap();
    let a = WeightAssignment::uniform(w, 1.0).unwrap();
    let paths = enumerate_paths::<BigRational>(&g, kind, &a, k).unwrap();
    exact_orderstat_distribution(&paths, i)
        .into_iter()
        .filter(|(_, p)| *p != q(0, 1))
        .collect()
}

#[test]
fn triangle_edge_walk_quadratic_weight_four_steps() {
    let w = || WeightFunction::power(2.0).unwrap();
    assert_eq!(
        orderstat_law("triangle", WalkKind::Edge, w(), 4, 1),
        vec![(2, q(11, 65)), (3, q(846, 5525)), (4, q(288, 425))]
    );
    assert_eq!(
        orderstat_law("triangle", WalkKind::Edge, w(), 4, 2),
        vec![(0, q(288, 425)), (1, q(5777, 27625)), (2, q(184, 1625))]
    );
}

#[test]
fn path_vertex_walk_cubic_weight_six_steps() {
    let w = WeightFunction::power(3.0).unwrap();
    assert_eq!(orderstat_law("path:4", WalkKind::Vertex, w.clone(), 6, 3), vec![(0, q(39, 49)), (1, q(10, 49))]);

    let g = "path:4".parse::<GraphSpec>().unwrap().build().unwrap();
    let a = WeightAssignment::uniform(w, 1.0).unwrap();
    let paths = enumerate_paths::<BigRational>(&g, WalkKind::Vertex, &a, 6).unwrap();
    assert_eq!(exact_event_probability(&paths, |p| p.last() == 0), q(7853, 15876));
}

#[test]
fn complete_graph_oscillating_weight_five_steps() {
    let w = WeightFunction::oscillating_power(1.0).unwrap();
    assert_eq!(
        orderstat_law("complete:4", WalkKind::Edge, w, 5, 2),
        vec![(0, q(80, 363)), (1, q(99191, 154275)), (2, q(7028, 51425))]
    );
}
