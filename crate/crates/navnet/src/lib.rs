//! Dynamic navigating-net index over a mutable point set, with
//! approximate furthest-neighbor queries and clustering solvers built on
//! top of it.
//!
//! The crate is organized bottom-up:
//!
//! - [`metric`]: points, Euclidean and distance-matrix backends, query
//!   sets, and the aspect-ratio scan.
//! - [`oracle`]: brute-force reference solvers (exact furthest neighbor,
//!   exact k-center in both metric and Euclidean flavors, exact minimum
//!   enclosing ball) used to validate everything else.
//! - [`net`]: the navigating net itself — a hierarchy of geometric-scale
//!   nets over the live points supporting insert, delete, and structural
//!   self-checks.
//! - [`afn`]: scale-descent approximate furthest-neighbor-from-a-set
//!   queries over the net, with per-query trace statistics.
//! - [`kcenter`]: the three solvers: greedy metric k-center, Euclidean
//!   minimum enclosing ball, and Euclidean k-center via guess
//!   enumeration.
//! - [`harness`]: text-format I/O, workload generation, trace replay, and
//!   benchmarking used by the CLI.

pub mod afn;
pub mod harness;
pub mod kcenter;
pub mod metric;
pub mod net;
pub mod oracle;

pub use afn::{afn, afn_traced, next_frontier, Frontier, QueryError, QueryStats};
pub use kcenter::{
    euclidean_kcenter, greedy_kcenter, meb, verify_coverage, Centers, CoverSolution, SolverError,
    SolverStats,
};
pub use metric::{MetricBackend, MetricPoint, Payload, PointId, QuerySet};
pub use net::{InvariantReport, NavigatingNet, NetError, Scale};
