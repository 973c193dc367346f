//! Analytic bounds on reinforced-walk laws.
//!
//! Every bound is generic over a [`Scalar`]: [`BigRational`] for exact
//! comparisons whenever the weight is rational on the integer arguments that
//! appear, and [`f64`] otherwise.

mod gfunc;
mod joint;
mod orderstat;
mod partitions;
mod permuted;
mod report;
mod scalar;
mod stuck;

pub use gfunc::{construct_g, GBlock, GFunction, TailSequence};
pub use joint::{errw_joint_bound, vrrw_joint_bound};
pub use orderstat::{
    bipartite_orderstat_bound, bipbip_orderstat_bound, errw_orderstat_bound, errw_orderstat_constant,
    triangle_free_orderstat_bound, vrrw_orderstat_bound, vrrw_orderstat_constant, SideBoundConstant,
};
pub use partitions::{c_bound_check, q_m, q_m_enumerated, Cap, CBoundCheck};
pub use permuted::{permuted_orderstat_bound, PermutedBound, PERMUTATION_LIMIT};
pub use report::{bound_report, BoundReport, BoundValue, NamedBound, REPORT_ROWS};
pub use scalar::Scalar;
pub use stuck::{escape_bound, stuck_probability_p, StuckProbability};

use thiserror::Error;

use crate::graph::GraphError;
use crate::weight::WeightError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("weight {weight} is not rational at {x}")]
    NotRational { weight: String, x: String },
    #[error("counts sum to {got}, expected {expected}")]
    CountMismatch { expected: u64, got: u64 },
    #[error("expected {expected} counts, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("{0}")]
    OutOfRange(String),
    #[error("graph is not bipartite")]
    NotBipartite,
    #[error("graph contains a triangle")]
    NotTriangleFree,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
    #[error("tail certification unavailable: {0}")]
    Certification(String),
}
