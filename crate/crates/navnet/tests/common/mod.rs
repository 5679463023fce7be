//! Shared fixtures for the integration suite: seeded instance
//! generators, net builders, and a random-metric factory.

#![allow(dead_code)]

use navnet::harness::gen::{generate, Distribution, GenParams};
use navnet::{MetricBackend, MetricPoint, NavigatingNet, QuerySet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform points in the unit cube, ids 0..n-1.
pub fn uniform_points(n: usize, dim: usize, seed: u64) -> Vec<MetricPoint> {
    generate(
        Distribution::UniformCube,
        n,
        dim,
        seed,
        &GenParams::default(),
    )
    .expect("valid generator request")
}

/// Gaussian blobs along the first axis, ids 0..n-1.
pub fn cluster_points(
    n: usize,
    dim: usize,
    seed: u64,
    clusters: usize,
    spread: f64,
    separation: f64,
) -> Vec<MetricPoint> {
    generate(
        Distribution::GaussianClusters,
        n,
        dim,
        seed,
        &GenParams {
            clusters,
            spread,
            separation,
        },
    )
    .expect("valid generator request")
}

/// Builds a Euclidean net (γ = 4) over the given coordinate points.
pub fn build_net(points: &[MetricPoint]) -> NavigatingNet {
    let dim = points
        .first()
        .and_then(|p| p.coords())
        .map(|c| c.len())
        .unwrap_or(1);
    let backend = MetricBackend::euclidean(dim).expect("positive dimension");
    NavigatingNet::build(backend, 4.0, points).expect("buildable instance")
}

/// A query set of `m` uniform points inside `[lo, hi]^dim`.
pub fn random_query_set(dim: usize, m: usize, seed: u64, lo: f64, hi: f64) -> QuerySet {
    let mut r = rng(seed);
    let coords: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..dim).map(|_| r.gen_range(lo..=hi)).collect())
        .collect();
    QuerySet::from_coords(coords).expect("non-empty query set")
}

/// A random finite metric: integer edge weights on the complete graph,
/// closed under shortest paths, so the triangle inequality holds exactly.
pub fn random_metric_matrix(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    let mut d = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = r.gen_range(1..=32) as f64;
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for via in 0..n {
        for i in 0..n {
            for j in 0..n {
                let relaxed = d[i][via] + d[via][j];
                if relaxed < d[i][j] {
                    d[i][j] = relaxed;
                }
            }
        }
    }
    d
}

/// Builds a matrix-backed net over rows 0..n-1 of a random closed metric.
pub fn matrix_instance(n: usize, seed: u64) -> (NavigatingNet, Vec<MetricPoint>) {
    let rows = random_metric_matrix(n, seed);
    let points: Vec<MetricPoint> = (0..n)
        .map(|i| MetricPoint::matrix_row(i as u64, i))
        .collect();
    let backend = MetricBackend::matrix(rows).expect("valid matrix");
    let net = NavigatingNet::build(backend, 4.0, &points).expect("buildable instance");
    (net, points)
}
