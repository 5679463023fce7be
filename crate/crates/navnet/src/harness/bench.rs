//! Wall-clock measurement of updates and queries, reported as CSV.
//!
//! One row per measured op, no aggregation and no assertions — downstream
//! tooling decides what the numbers mean. Columns:
//!
//! ```text
//! n,D,delta,op,wall_ns,afn_iterations,max_frontier,scale_count
//! ```
//!
//! `n` is the live point count when the op ran, `delta` is the aspect
//! ratio (largest over smallest pairwise distance) of the full instance,
//! and the two frontier columns are zero for insert rows. An empty
//! workload produces just the header. Timings use the monotonic process
//! clock; everything else in the row is deterministic.

use std::time::Instant;

use super::{fmt_f64, HarnessError};
use crate::afn::afn;
use crate::metric::{aspect_ratio, MetricBackend, MetricPoint, QuerySet};
use crate::net::NavigatingNet;

/// Header line of the benchmark CSV.
pub const BENCH_HEADER: &str = "n,D,delta,op,wall_ns,afn_iterations,max_frontier,scale_count";

/// A benchmark workload: build a net from `points` (optionally timing
/// each insert), then time each furthest-neighbor query.
#[derive(Clone, Debug)]
pub struct BenchSpec {
    pub gamma: f64,
    pub points: Vec<MetricPoint>,
    /// `(eps, query set)` pairs, run in order against the built net.
    pub queries: Vec<(f64, QuerySet)>,
    /// When set, each insert contributes a CSV row.
    pub measure_inserts: bool,
}

/// Runs the workload and returns the CSV document (Euclidean points
/// only).
pub fn run_bench(spec: &BenchSpec) -> Result<String, HarnessError> {
    let dim = match spec.points.first() {
        Some(p) => p
            .coords()
            .ok_or_else(|| {
                HarnessError::Invalid("bench points must carry coordinates".into())
            })?
            .len(),
        None => 1,
    };
    let backend =
        MetricBackend::euclidean(dim).map_err(|e| HarnessError::Invalid(e.to_string()))?;
    let delta = if spec.points.len() >= 2 {
        aspect_ratio(&backend, &spec.points).map_err(|e| HarnessError::Invalid(e.to_string()))?
    } else {
        1.0
    };
    let mut net = NavigatingNet::new(backend, spec.gamma)
        .map_err(|e| HarnessError::Invalid(e.to_string()))?;
    let mut out = String::from(BENCH_HEADER);
    out.push('\n');
    for p in &spec.points {
        let p = p.clone();
        let start = Instant::now();
        net.insert(p)
            .map_err(|e| HarnessError::Invalid(e.to_string()))?;
        let wall_ns = start.elapsed().as_nanos();
        if spec.measure_inserts {
            push_row(&mut out, &net, dim, delta, "insert", wall_ns, 0, 0);
        }
    }
    for (eps, qs) in &spec.queries {
        let start = Instant::now();
        let (_, _, stats) =
            afn(&net, qs, *eps).map_err(|e| HarnessError::Invalid(e.to_string()))?;
        let wall_ns = start.elapsed().as_nanos();
        push_row(
            &mut out,
            &net,
            dim,
            delta,
            "afn",
            wall_ns,
            stats.iterations,
            stats.max_frontier,
        );
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn push_row(
    out: &mut String,
    net: &NavigatingNet,
    dim: usize,
    delta: f64,
    op: &str,
    wall_ns: u128,
    iterations: usize,
    max_frontier: usize,
) {
    out.push_str(&format!(
        "{},{},{},{},{},{},{},{}\n",
        net.len(),
        dim,
        fmt_f64(delta),
        op,
        wall_ns,
        iterations,
        max_frontier,
        net.scale_count()
    ));
}
