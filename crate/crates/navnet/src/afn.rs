//! Approximate furthest-neighbor-from-a-set queries by scale descent.
//!
//! Given the net hierarchy over the live points and a query set C, the
//! search keeps a frontier Z_r ⊆ Y_r of candidate net members, starting
//! with the single top point. One descent step refines the frontier one
//! scale down: it expands the navigation lists of the current members
//! and keeps exactly the entries y with
//!
//! d(y, C) ≥ (max_{z ∈ Z_r} d(z, C)) − r.
//!
//! The current best candidate always survives the step (it is in its own
//! list and trivially passes the threshold), so frontiers are never
//! empty. Descent stops once the scale is no longer strictly above
//! max(ε/2 · max d(z, C), r_min); the returned point is the frontier
//! member furthest from C (ties to the smallest id) and its distance is
//! at least max_{p ∈ P} d(p, C) / (1 + ε).
//!
//! Distances from net points to C are cached per query, so each live
//! point is evaluated against C at most once per call.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::metric::{MetricError, PointId, QuerySet};
use crate::net::{two_pow, NavigatingNet, NetError, Scale};

/// Errors from furthest-neighbor queries.
#[derive(Error, Debug)]
pub enum QueryError {
    #[error("the net contains no points")]
    EmptyNet,
    #[error("epsilon must be a positive finite value, got {0}")]
    NonPositiveEpsilon(f64),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// A descent frontier: a subset of the net at one scale, with each
/// member's distance to the query set cached.
#[derive(Clone, Debug)]
pub struct Frontier {
    scale: Scale,
    members: BTreeMap<PointId, f64>,
}

impl Frontier {
    /// The starting frontier: the single top point at the top scale.
    pub fn start(net: &NavigatingNet, c: &QuerySet) -> Result<Frontier, QueryError> {
        if net.is_empty() {
            return Err(QueryError::EmptyNet);
        }
        for q in c.points() {
            net.backend().check_point(q)?;
        }
        let top = net.top().expect("non-empty net has a top point");
        let d = net
            .backend()
            .dist_to_set_unchecked(net.member_point(top), c);
        Ok(Frontier {
            scale: net.r_max().expect("non-empty net has a top scale"),
            members: BTreeMap::from([(top, d)]),
        })
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Member ids in ascending order.
    pub fn ids(&self) -> Vec<PointId> {
        self.members.keys().copied().collect()
    }

    /// The cached distance from `id` to the query set, if `id` is in the
    /// frontier.
    pub fn distance(&self, id: PointId) -> Option<f64> {
        self.members.get(&id).copied()
    }

    /// Largest cached distance to the query set over the frontier.
    pub fn max_distance(&self) -> f64 {
        self.members.values().fold(f64::NEG_INFINITY, |a, &d| a.max(d))
    }

    /// The member furthest from the query set, ties to the smallest id.
    fn argmax(&self) -> (PointId, f64) {
        let mut best: Option<(PointId, f64)> = None;
        for (&id, &d) in &self.members {
            match best {
                Some((_, bd)) if d <= bd => {}
                _ => best = Some((id, d)),
            }
        }
        best.expect("argmax of a non-empty frontier")
    }
}

/// Per-query measurements. `iterations` counts visited frontiers, so it
/// always equals `start_scale.exponent() - end_scale.exponent() + 1` and
/// `frontier_sizes.len()`.
#[derive(Clone, Debug)]
pub struct QueryStats {
    pub iterations: usize,
    pub max_frontier: usize,
    pub start_scale: Scale,
    pub end_scale: Scale,
    pub frontier_sizes: Vec<usize>,
}

/// Refines a frontier one scale down: expands members' navigation lists
/// and keeps the entries within the current maximum distance minus the
/// current scale. Exposed so the step can be checked against brute-force
/// recomputation.
pub fn next_frontier(
    net: &NavigatingNet,
    frontier: &Frontier,
    c: &QuerySet,
) -> Result<Frontier, QueryError> {
    let mut cache = frontier.members.clone();
    refine(net, frontier, c, &mut cache)
}

fn refine(
    net: &NavigatingNet,
    frontier: &Frontier,
    c: &QuerySet,
    cache: &mut BTreeMap<PointId, f64>,
) -> Result<Frontier, QueryError> {
    let e = frontier.scale.exponent();
    let keep = frontier.max_distance() - frontier.scale.value();
    let mut next: BTreeMap<PointId, f64> = BTreeMap::new();
    for &z in frontier.members.keys() {
        let list = net
            .list_ref(e, z)
            .ok_or(NetError::NotInLevel { id: z, exponent: e })?;
        for &y in list {
            if next.contains_key(&y) {
                continue;
            }
            let d = match cache.get(&y) {
                Some(&d) => d,
                None => {
                    let d = net
                        .backend()
                        .dist_to_set_unchecked(net.member_point(y), c);
                    cache.insert(y, d);
                    d
                }
            };
            if d >= keep {
                next.insert(y, d);
            }
        }
    }
    Ok(Frontier {
        scale: frontier.scale.half(),
        members: next,
    })
}

fn descend(
    net: &NavigatingNet,
    c: &QuerySet,
    eps: f64,
    mut trace: Option<&mut Vec<Frontier>>,
) -> Result<(PointId, f64, QueryStats), QueryError> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(QueryError::NonPositiveEpsilon(eps));
    }
    let mut frontier = Frontier::start(net, c)?;
    let mut cache = frontier.members.clone();
    let e_min = net.r_min().expect("non-empty net").exponent();
    let start_scale = frontier.scale;
    let mut frontier_sizes = vec![frontier.len()];
    if let Some(t) = trace.as_deref_mut() {
        t.push(frontier.clone());
    }
    // Descend while the scale is strictly above both ε/2 times the
    // current maximum distance and the bottom scale.
    loop {
        let e = frontier.scale.exponent();
        if e <= e_min || two_pow(e) <= 0.5 * eps * frontier.max_distance() {
            break;
        }
        frontier = refine(net, &frontier, c, &mut cache)?;
        frontier_sizes.push(frontier.len());
        if let Some(t) = trace.as_deref_mut() {
            t.push(frontier.clone());
        }
    }
    let (id, d) = frontier.argmax();
    let stats = QueryStats {
        iterations: frontier_sizes.len(),
        max_frontier: frontier_sizes.iter().copied().max().unwrap_or(0),
        start_scale,
        end_scale: frontier.scale,
        frontier_sizes,
    };
    Ok((id, d, stats))
}

/// Returns a live point whose distance from the query set is at least
/// max_p d(p, C) / (1 + ε), together with that distance and the descent
/// measurements.
pub fn afn(
    net: &NavigatingNet,
    c: &QuerySet,
    eps: f64,
) -> Result<(PointId, f64, QueryStats), QueryError> {
    descend(net, c, eps, None)
}

/// Like [`afn`], additionally returning every visited frontier in
/// descent order (top scale first).
pub fn afn_traced(
    net: &NavigatingNet,
    c: &QuerySet,
    eps: f64,
) -> Result<(PointId, f64, QueryStats, Vec<Frontier>), QueryError> {
    let mut frontiers = Vec::new();
    let (id, d, stats) = descend(net, c, eps, Some(&mut frontiers))?;
    Ok((id, d, stats, frontiers))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{MetricBackend, MetricPoint};
    use crate::oracle::fn_exact;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line_net(xs: &[f64]) -> NavigatingNet {
        let pts: Vec<MetricPoint> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| MetricPoint::euclidean(i as u64, vec![x]))
            .collect();
        NavigatingNet::build(MetricBackend::euclidean(1).unwrap(), 4.0, &pts).unwrap()
    }

    fn query(coords: &[f64]) -> QuerySet {
        QuerySet::from_coords(coords.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn single_point_answers_immediately() {
        let net = line_net(&[5.0]);
        let (id, d, stats) = afn(&net, &query(&[0.0]), 0.5).unwrap();
        assert_eq!(id, PointId(0));
        assert_eq!(d, 5.0);
        assert_eq!(stats.iterations, 1);
        assert_eq!(stats.start_scale, stats.end_scale);
    }

    #[test]
    fn two_point_descent_finds_the_far_point() {
        let net = line_net(&[0.0, 10.0]);
        let (id, d, stats) = afn(&net, &query(&[0.0]), 0.5).unwrap();
        assert_eq!(id, PointId(1));
        assert_eq!(d, 10.0);
        // band is [1, 4]; descent stops at 2^1 = 2 because
        // 2 > 0.25 · 10 fails there and nowhere above.
        assert_eq!(stats.start_scale, Scale(4));
        assert_eq!(stats.end_scale, Scale(1));
        assert_eq!(stats.iterations, 4);
    }

    #[test]
    fn stats_shape_is_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.gen_range(2..60);
            let pts: Vec<MetricPoint> = (0..n)
                .map(|i| {
                    MetricPoint::euclidean(
                        i,
                        vec![rng.gen::<f64>() * 50.0, rng.gen::<f64>() * 50.0],
                    )
                })
                .collect();
            let net =
                NavigatingNet::build(MetricBackend::euclidean(2).unwrap(), 4.0, &pts).unwrap();
            let c = QuerySet::from_coords(vec![vec![rng.gen::<f64>() * 50.0, 25.0]]).unwrap();
            let (_, _, stats, frontiers) = afn_traced(&net, &c, 0.3).unwrap();
            assert_eq!(
                stats.iterations,
                (stats.start_scale.exponent() - stats.end_scale.exponent() + 1) as usize
            );
            assert_eq!(stats.iterations, stats.frontier_sizes.len());
            assert_eq!(
                stats.max_frontier,
                stats.frontier_sizes.iter().copied().max().unwrap()
            );
            assert_eq!(frontiers.len(), stats.iterations);
            // each frontier is a subset of the net at its scale
            for f in &frontiers {
                for id in f.ids() {
                    assert!(net.list_ref(f.scale().exponent(), id).is_some());
                }
            }
        }
    }

    #[test]
    fn approximation_holds_against_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for trial in 0..200 {
            let n = rng.gen_range(2..80);
            let pts: Vec<MetricPoint> = (0..n)
                .map(|i| {
                    MetricPoint::euclidean(
                        i,
                        vec![rng.gen::<f64>() * 100.0, rng.gen::<f64>() * 100.0],
                    )
                })
                .collect();
            let net =
                NavigatingNet::build(MetricBackend::euclidean(2).unwrap(), 4.0, &pts).unwrap();
            let m = rng.gen_range(1..=3);
            let c = QuerySet::from_coords(
                (0..m)
                    .map(|_| vec![rng.gen::<f64>() * 100.0, rng.gen::<f64>() * 100.0])
                    .collect(),
            )
            .unwrap();
            let eps = [0.1, 0.5, 1.0][trial % 3];
            let (id, d, _) = afn(&net, &c, eps).unwrap();
            let (_, exact) = fn_exact(net.backend(), &net.snapshot_points(), &c).unwrap();
            assert!(d <= exact * (1.0 + 1e-12), "returned more than the maximum");
            assert!(
                d * (1.0 + eps) >= exact * (1.0 - 1e-9),
                "trial {trial}: approximation failed: got {d}, exact {exact}, eps {eps}"
            );
            // the returned distance is the true distance of the point
            let back = net
                .backend()
                .dist_to_set_unchecked(net.point(id).unwrap(), &c);
            assert_eq!(d, back);
        }
    }

    #[test]
    fn next_frontier_matches_brute_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<MetricPoint> = (0..40)
            .map(|i| {
                MetricPoint::euclidean(i, vec![rng.gen::<f64>() * 30.0, rng.gen::<f64>() * 30.0])
            })
            .collect();
        let net = NavigatingNet::build(MetricBackend::euclidean(2).unwrap(), 4.0, &pts).unwrap();
        let c = QuerySet::from_coords(vec![vec![15.0, 15.0]]).unwrap();
        let mut frontier = Frontier::start(&net, &c).unwrap();
        let e_min = net.r_min().unwrap().exponent();
        while frontier.scale().exponent() > e_min {
            let next = next_frontier(&net, &frontier, &c).unwrap();
            // brute recomputation of the refinement rule
            let keep = frontier.max_distance() - frontier.scale().value();
            let mut expected: Vec<PointId> = Vec::new();
            for z in frontier.ids() {
                for &y in net.list_ref(frontier.scale().exponent(), z).unwrap() {
                    let d = net
                        .backend()
                        .dist_to_set_unchecked(net.member_point(y), &c);
                    if d >= keep && !expected.contains(&y) {
                        expected.push(y);
                    }
                }
            }
            expected.sort();
            assert_eq!(next.ids(), expected);
            // the current best candidate always survives
            let (best, _) = frontier.argmax();
            assert!(next.distance(best).is_some());
            frontier = next;
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let empty = NavigatingNet::new(MetricBackend::euclidean(1).unwrap(), 4.0).unwrap();
        assert!(matches!(
            afn(&empty, &query(&[0.0]), 0.5),
            Err(QueryError::EmptyNet)
        ));
        let net = line_net(&[0.0, 1.0]);
        for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                afn(&net, &query(&[0.0]), bad),
                Err(QueryError::NonPositiveEpsilon(_))
            ));
        }
        // dimension mismatch in the query set
        let c = QuerySet::from_coords(vec![vec![0.0, 0.0]]).unwrap();
        assert!(matches!(afn(&net, &c, 0.5), Err(QueryError::Metric(_))));
    }
}
