//! Clustering solvers built on furthest-neighbor queries.
//!
//! Three solvers share the same shape — repeatedly ask the net for a
//! point far from the current centers, then refine the centers — and
//! return a [`CoverSolution`]: centers, a radius certified to cover
//! every live point, and the accumulated query measurements.
//!
//! - [`greedy_kcenter`]: k centers chosen from the points themselves by
//!   furthest-point traversal; radius within (2+ε) of the optimal
//!   k-center radius, in any metric.
//! - [`meb`]: a single Euclidean center (not necessarily a point) within
//!   (1+ε) of the minimum enclosing ball radius, found by ⌊6/ε⌋ steps of
//!   a guarded walk toward the current furthest point.
//! - [`euclidean_kcenter`]: k Euclidean centers found by running the
//!   ball walk for every assignment of steps to center slots and
//!   keeping the best certified outcome; within twice the optimal
//!   radius at ε = 1.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::afn::{afn, QueryError, QueryStats};
use crate::metric::{MetricBackend, MetricError, MetricPoint, PointId, QuerySet};
use crate::net::NavigatingNet;

/// Upper bound on the number of assignment sequences
/// [`euclidean_kcenter`] is willing to enumerate.
pub const DEFAULT_GUESS_BUDGET: u64 = 1_000_000;

/// Errors from the clustering solvers.
#[derive(Error, Debug)]
pub enum SolverError {
    #[error("the net contains no points")]
    EmptyNet,
    #[error("k must be at least 1, got {0}")]
    InvalidK(usize),
    #[error("epsilon must be a positive finite value, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("epsilon {0} is too large: the walk would take zero steps (requires epsilon <= 6)")]
    EpsilonTooLarge(f64),
    #[error("this solver requires the euclidean backend")]
    NotEuclidean,
    #[error("assignment enumeration needs {guesses} sequences, over the budget of {budget}")]
    BudgetExceeded { guesses: u128, budget: u64 },
    #[error("center id {0} is not a live point")]
    UnknownCenter(PointId),
    #[error("point {id} is at distance {dist} from the centers, outside the radius {radius}")]
    CoverageFailure { id: PointId, dist: f64, radius: f64 },
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Centers are either live point ids (greedy) or free Euclidean
/// locations (ball walks).
#[derive(Clone, Debug, PartialEq)]
pub enum Centers {
    Ids(Vec<PointId>),
    Coords(Vec<Vec<f64>>),
}

impl Centers {
    pub fn len(&self) -> usize {
        match self {
            Centers::Ids(v) => v.len(),
            Centers::Coords(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Accumulated furthest-neighbor query measurements for one solver run.
#[derive(Clone, Debug, Default)]
pub struct SolverStats {
    /// Number of furthest-neighbor queries issued.
    pub queries: usize,
    /// Total descent iterations over all queries.
    pub iterations: usize,
    /// Largest frontier seen by any query.
    pub max_frontier: usize,
}

impl SolverStats {
    fn absorb(&mut self, qs: &QueryStats) {
        self.queries += 1;
        self.iterations += qs.iterations;
        self.max_frontier = self.max_frontier.max(qs.max_frontier);
    }
}

/// A set of centers with a radius certified to cover every live point.
#[derive(Clone, Debug)]
pub struct CoverSolution {
    pub centers: Centers,
    pub radius: f64,
    pub stats: SolverStats,
}

fn check_eps(eps: f64) -> Result<(), SolverError> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(SolverError::NonPositiveEpsilon(eps));
    }
    Ok(())
}

fn smallest_id_point(net: &NavigatingNet) -> MetricPoint {
    net.snapshot_points()
        .into_iter()
        .next()
        .expect("non-empty net")
}

/// Number of walk steps per center: the floor of 6/ε evaluated on the
/// actual f64 ε.
fn walk_steps(eps: f64) -> usize {
    (6.0 / eps).floor() as usize
}

/// Walk-coefficient for moving the center toward the furthest point:
/// the fraction of the segment covered in one step, derived from the
/// current guard value δ.
fn step_lambda(delta: f64, eps3: f64) -> f64 {
    let a = 1.0 + eps3;
    (delta * delta + a * a - 1.0) / (2.0 * a * a)
}

/// Next guard value of the ball walk. The inner square can dip below
/// zero by rounding when the walk has converged; it is clamped so the
/// guard stays real (at zero the walk stops moving meaningfully).
pub fn next_delta(delta: f64, eps: f64) -> f64 {
    let a = 1.0 + eps / 3.0;
    let q = (1.0 + a * a - delta * delta) / (2.0 * a);
    (1.0 - q * q).max(0.0).sqrt()
}

/// Greedy k-center over the live points: starts from the smallest id,
/// repeatedly adds the (approximately) furthest point from the chosen
/// centers, and certifies the final radius with one more query. The
/// radius is within (2+ε) of the optimal k-center radius.
pub fn greedy_kcenter(
    net: &NavigatingNet,
    k: usize,
    eps: f64,
) -> Result<CoverSolution, SolverError> {
    if net.is_empty() {
        return Err(SolverError::EmptyNet);
    }
    if k == 0 {
        return Err(SolverError::InvalidK(k));
    }
    check_eps(eps)?;
    let eps5 = eps / 5.0;
    let mut stats = SolverStats::default();
    let mut center_ids: Vec<PointId> = vec![smallest_id_point(net).id];
    loop {
        let c = QuerySet::new(
            center_ids
                .iter()
                .map(|id| net.point(*id).expect("centers are live").clone())
                .collect(),
        )?;
        let (q, d, qs) = afn(net, &c, eps5)?;
        stats.absorb(&qs);
        if center_ids.len() == k || d == 0.0 {
            // The last query doubles as the radius certificate: every
            // point is within (1+ε/5)·d of the centers.
            return Ok(CoverSolution {
                centers: Centers::Ids(center_ids),
                radius: (1.0 + eps5) * d,
                stats,
            });
        }
        center_ids.push(q);
    }
}

/// (1+ε)-approximate minimum enclosing ball of the live points
/// (Euclidean backend only). Runs ⌊6/ε⌋ steps of a center walk, each
/// step moving toward the current approximate furthest point, and keeps
/// the best certified ball seen.
pub fn meb(net: &NavigatingNet, eps: f64) -> Result<CoverSolution, SolverError> {
    if net.is_empty() {
        return Err(SolverError::EmptyNet);
    }
    check_eps(eps)?;
    let dim = match net.backend() {
        MetricBackend::Euclidean { dim } => *dim,
        MetricBackend::Matrix { .. } => return Err(SolverError::NotEuclidean),
    };
    let steps = walk_steps(eps);
    if steps == 0 {
        return Err(SolverError::EpsilonTooLarge(eps));
    }
    let eps3 = eps / 3.0;
    let mut stats = SolverStats::default();
    let mut m: Vec<f64> = smallest_id_point(net)
        .coords()
        .expect("euclidean point has coordinates")
        .to_vec();
    let mut delta = 1.0_f64;
    let mut best_r = f64::INFINITY;
    let mut best_c = m.clone();
    for _ in 0..steps {
        let c = QuerySet::new(vec![MetricPoint::euclidean(0, m.clone())])?;
        let (pid, d, qs) = afn(net, &c, eps3)?;
        stats.absorb(&qs);
        let r = (1.0 + eps3) * d;
        if r < best_r {
            best_r = r;
            best_c = m.clone();
        }
        let target = net
            .point(pid)
            .expect("query answers are live")
            .coords()
            .expect("euclidean point has coordinates");
        let lambda = step_lambda(delta, eps3);
        for j in 0..dim {
            m[j] += (target[j] - m[j]) * lambda;
        }
        delta = next_delta(delta, eps);
    }
    Ok(CoverSolution {
        centers: Centers::Coords(vec![best_c]),
        radius: best_r,
        stats,
    })
}

/// Iterator over all assignment sequences f : {1..t} → {0..k-1} in
/// lexicographic order (first step most significant).
pub fn enumerate_guesses(k: usize, t: usize) -> GuessIter {
    GuessIter {
        k,
        next: Some(vec![0; t]),
    }
}

pub struct GuessIter {
    k: usize,
    next: Option<Vec<usize>>,
}

impl Iterator for GuessIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.next.take()?;
        // odometer increment on the least-significant (last) position
        let mut succ = cur.clone();
        let mut pos = succ.len();
        loop {
            if pos == 0 {
                break; // wrapped: cur was the last sequence
            }
            pos -= 1;
            if succ[pos] + 1 < self.k {
                succ[pos] += 1;
                for s in &mut succ[pos + 1..] {
                    *s = 0;
                }
                self.next = Some(succ);
                break;
            }
        }
        Some(cur)
    }
}

/// Euclidean k-center with free centers: runs the ball walk once per
/// assignment of the k·⌊6/ε⌋ steps to center slots and keeps the best
/// certified solution (ties to the first sequence in lexicographic
/// order). Some assignment routes each step to the cluster of the point
/// it found, which runs a separate ball walk per optimal cluster; at
/// ε = 1 the returned radius is within twice the optimal k-center
/// radius. Uses [`DEFAULT_GUESS_BUDGET`].
pub fn euclidean_kcenter(
    net: &NavigatingNet,
    k: usize,
    eps: f64,
) -> Result<CoverSolution, SolverError> {
    euclidean_kcenter_with_budget(net, k, eps, DEFAULT_GUESS_BUDGET)
}

/// [`euclidean_kcenter`] with an explicit bound on how many assignment
/// sequences may be enumerated (k raised to k·⌊6/ε⌋).
pub fn euclidean_kcenter_with_budget(
    net: &NavigatingNet,
    k: usize,
    eps: f64,
    budget: u64,
) -> Result<CoverSolution, SolverError> {
    if net.is_empty() {
        return Err(SolverError::EmptyNet);
    }
    if k == 0 {
        return Err(SolverError::InvalidK(k));
    }
    check_eps(eps)?;
    let dim = match net.backend() {
        MetricBackend::Euclidean { dim } => *dim,
        MetricBackend::Matrix { .. } => return Err(SolverError::NotEuclidean),
    };
    let per_center = walk_steps(eps);
    if per_center == 0 {
        return Err(SolverError::EpsilonTooLarge(eps));
    }
    let t = k * per_center;
    let guesses = (k as u128)
        .checked_pow(t as u32)
        .unwrap_or(u128::MAX);
    if guesses > budget as u128 {
        return Err(SolverError::BudgetExceeded { guesses, budget });
    }
    let eps3 = eps / 3.0;
    let p1: Vec<f64> = smallest_id_point(net)
        .coords()
        .expect("euclidean point has coordinates")
        .to_vec();
    let mut stats = SolverStats::default();
    let mut best: Option<(Vec<Vec<f64>>, f64)> = None;
    for f in enumerate_guesses(k, t) {
        // One walk per sequence: slot j holds the center being grown
        // for cluster j, plus its guard value. All slots start
        // undefined and are created the first time the sequence
        // touches them, by placing that step's query answer; the fixed
        // start point only seeds the first query. (Walking a slot that
        // was pre-filled with the start point would drag it toward
        // whatever cluster the first answer lies in, and the walk's
        // shrinking steps could never recover — the per-cluster
        // guarantee needs every slot to begin at a point of the
        // cluster the guess routes to it.)
        let mut slots: Vec<Option<(Vec<f64>, f64)>> = vec![None; k];
        let mut run_best: Option<(Vec<Vec<f64>>, f64)> = None;
        for &j in &f {
            let mut defined: Vec<Vec<f64>> = slots
                .iter()
                .flatten()
                .map(|(m, _)| m.clone())
                .collect();
            if defined.is_empty() {
                defined.push(p1.clone());
            }
            let c = QuerySet::new(
                defined
                    .iter()
                    .map(|m| MetricPoint::euclidean(0, m.clone()))
                    .collect(),
            )?;
            let (pid, d, qs) = afn(net, &c, eps3)?;
            stats.absorb(&qs);
            let r = (1.0 + eps3) * d;
            if run_best.as_ref().map_or(true, |(_, br)| r < *br) {
                run_best = Some((defined, r));
            }
            let target = net
                .point(pid)
                .expect("query answers are live")
                .coords()
                .expect("euclidean point has coordinates")
                .to_vec();
            match &mut slots[j] {
                Some((m, delta)) => {
                    let lambda = step_lambda(*delta, eps3);
                    for x in 0..dim {
                        m[x] += (target[x] - m[x]) * lambda;
                    }
                    *delta = next_delta(*delta, eps);
                }
                None => {
                    slots[j] = Some((target, 1.0));
                }
            }
        }
        let (run_c, run_r) = run_best.expect("at least one walk step");
        if best.as_ref().map_or(true, |(_, br)| run_r < *br) {
            best = Some((run_c, run_r));
        }
    }
    let (centers, radius) = best.expect("at least one sequence");
    Ok(CoverSolution {
        centers: Centers::Coords(centers),
        radius,
        stats,
    })
}

/// Exhaustively checks that every live point is within the solution
/// radius of some center.
pub fn verify_coverage(net: &NavigatingNet, sol: &CoverSolution) -> Result<(), SolverError> {
    if net.is_empty() {
        return Err(SolverError::EmptyNet);
    }
    let centers: Vec<MetricPoint> = match &sol.centers {
        Centers::Ids(ids) => {
            let mut pts = Vec::with_capacity(ids.len());
            let mut seen = BTreeSet::new();
            for id in ids {
                if !seen.insert(*id) {
                    continue;
                }
                match net.point(*id) {
                    Some(p) => pts.push(p.clone()),
                    None => return Err(SolverError::UnknownCenter(*id)),
                }
            }
            pts
        }
        Centers::Coords(cs) => cs
            .iter()
            .enumerate()
            .map(|(i, c)| MetricPoint::euclidean(i as u64, c.clone()))
            .collect(),
    };
    let qs = QuerySet::new(centers)?;
    for p in net.snapshot_points() {
        let d = net.backend().dist_to_set(&p, &qs)?;
        if d > sol.radius {
            return Err(SolverError::CoverageFailure {
                id: p.id,
                dist: d,
                radius: sol.radius,
            });
        }
    }
    Ok(())
}
