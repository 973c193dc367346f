//! Simulation and exact verification of strongly reinforced random walks.
//!
//! The crate covers edge-reinforced (ERRW) and vertex-reinforced (VRRW)
//! walks on finite graphs and on lazily generated infinite graphs of bounded
//! degree. It provides:
//!
//! * [`graph`]: graph models and structural predicates,
//! * [`weight`]: weight functions with summability classes and certified tail sums,
//! * [`walk`]: the sequential walk engine,
//! * [`rubin`]: the exponential-clock sampler,
//! * [`bounds`]: exact and certified analytic bounds,
//! * [`oracle`]: brute-force path enumeration,
//! * [`harness`]: replicated Monte Carlo experiments,
//! * [`verify`]: named verification grids.

pub mod bounds;
pub mod graph;
pub mod harness;
pub mod oracle;
pub mod rubin;
pub mod stats;
pub mod verify;
pub mod walk;
pub mod weight;

pub use graph::{EdgeId, GraphModel, GraphSpec, VertexId};
pub use walk::{WalkKind, WalkState};
pub use weight::{WeightAssignment, WeightFunction};
