//! Seeded point-set generators.
//!
//! Each generator is a pure function of `(distribution, n, dim, seed,
//! params)`, so the same invocation always produces the same point set.
//! Ids are assigned `0..n-1` in generation order.

use super::HarnessError;
use crate::metric::MetricPoint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as RandDistribution, Normal};

/// Built-in point-set shapes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distribution {
    /// Independent uniform coordinates in `[0, 1)`.
    UniformCube,
    /// Gaussian blobs spaced along the first axis; the blob spacing and
    /// width control the spread between the largest and smallest
    /// inter-point distances.
    GaussianClusters,
    /// Collinear points at integer positions along the first axis.
    Line,
    /// An integer lattice filled in row-major order.
    Grid,
}

impl Distribution {
    /// Parses the CLI spelling of a distribution name.
    pub fn parse(name: &str) -> Option<Distribution> {
        match name {
            "uniform-cube" => Some(Distribution::UniformCube),
            "gaussian-clusters" => Some(Distribution::GaussianClusters),
            "line" => Some(Distribution::Line),
            "grid" => Some(Distribution::Grid),
            _ => None,
        }
    }

    /// The CLI spelling of this distribution.
    pub fn name(&self) -> &'static str {
        match self {
            Distribution::UniformCube => "uniform-cube",
            Distribution::GaussianClusters => "gaussian-clusters",
            Distribution::Line => "line",
            Distribution::Grid => "grid",
        }
    }
}

/// Knobs for [`Distribution::GaussianClusters`]; ignored by the other
/// distributions.
#[derive(Clone, Copy, Debug)]
pub struct GenParams {
    /// Number of blobs; points are assigned round-robin.
    pub clusters: usize,
    /// Standard deviation of each coordinate within a blob.
    pub spread: f64,
    /// Distance between consecutive blob centers along the first axis.
    pub separation: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            clusters: 2,
            spread: 0.1,
            separation: 10.0,
        }
    }
}

/// Generates `n` points of dimension `dim` from the given distribution
/// and seed.
pub fn generate(
    dist: Distribution,
    n: usize,
    dim: usize,
    seed: u64,
    params: &GenParams,
) -> Result<Vec<MetricPoint>, HarnessError> {
    if n == 0 {
        return Err(HarnessError::Invalid("point count must be at least 1".into()));
    }
    if dim == 0 {
        return Err(HarnessError::Invalid("dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    match dist {
        Distribution::UniformCube => {
            for i in 0..n {
                let coords: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
                points.push(MetricPoint::euclidean(i as u64, coords));
            }
        }
        Distribution::GaussianClusters => {
            if params.clusters == 0 {
                return Err(HarnessError::Invalid("cluster count must be at least 1".into()));
            }
            if !(params.spread.is_finite() && params.spread > 0.0) {
                return Err(HarnessError::Invalid("cluster spread must be positive".into()));
            }
            if !(params.separation.is_finite() && params.separation >= 0.0) {
                return Err(HarnessError::Invalid(
                    "cluster separation must be non-negative".into(),
                ));
            }
            let normal = Normal::new(0.0, params.spread)
                .map_err(|e| HarnessError::Invalid(format!("bad spread: {e}")))?;
            for i in 0..n {
                let cluster = i % params.clusters;
                let mut coords: Vec<f64> =
                    (0..dim).map(|_| normal.sample(&mut rng)).collect();
                coords[0] += cluster as f64 * params.separation;
                points.push(MetricPoint::euclidean(i as u64, coords));
            }
        }
        Distribution::Line => {
            for i in 0..n {
                let mut coords = vec![0.0; dim];
                coords[0] = i as f64;
                points.push(MetricPoint::euclidean(i as u64, coords));
            }
        }
        Distribution::Grid => {
            // Smallest side length whose dim-power holds n sites.
            let mut side = 1usize;
            while side.pow(dim as u32) < n {
                side += 1;
            }
            for i in 0..n {
                let mut coords = vec![0.0; dim];
                let mut rest = i;
                // Row-major: the last axis varies fastest.
                for axis in (0..dim).rev() {
                    coords[axis] = (rest % side) as f64;
                    rest /= side;
                }
                points.push(MetricPoint::euclidean(i as u64, coords));
            }
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{aspect_ratio, MetricBackend, PointId};

    #[test]
    fn names_round_trip() {
        for d in [
            Distribution::UniformCube,
            Distribution::GaussianClusters,
            Distribution::Line,
            Distribution::Grid,
        ] {
            assert_eq!(Distribution::parse(d.name()), Some(d));
        }
        assert_eq!(Distribution::parse("circle"), None);
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let params = GenParams::default();
        let a = generate(Distribution::UniformCube, 20, 3, 42, &params).unwrap();
        let b = generate(Distribution::UniformCube, 20, 3, 42, &params).unwrap();
        let c = generate(Distribution::UniformCube, 20, 3, 43, &params).unwrap();
        for (pa, pb) in a.iter().zip(&b) {
            assert_eq!(pa.id, pb.id);
            assert_eq!(pa.coords().unwrap(), pb.coords().unwrap());
        }
        assert!(a
            .iter()
            .zip(&c)
            .any(|(pa, pc)| pa.coords().unwrap() != pc.coords().unwrap()));
    }

    #[test]
    fn line_is_integers_on_first_axis() {
        let pts = generate(Distribution::Line, 3, 2, 0, &GenParams::default()).unwrap();
        assert_eq!(pts.len(), 3);
        for (i, p) in pts.iter().enumerate() {
            assert_eq!(p.id, PointId(i as u64));
            assert_eq!(p.coords().unwrap(), &[i as f64, 0.0]);
        }
    }

    #[test]
    fn grid_fills_row_major_without_duplicates() {
        let pts = generate(Distribution::Grid, 6, 2, 0, &GenParams::default()).unwrap();
        // side = 3 for n = 6 in 2 dimensions.
        assert_eq!(pts[0].coords().unwrap(), &[0.0, 0.0]);
        assert_eq!(pts[1].coords().unwrap(), &[0.0, 1.0]);
        assert_eq!(pts[2].coords().unwrap(), &[0.0, 2.0]);
        assert_eq!(pts[3].coords().unwrap(), &[1.0, 0.0]);
        let mut seen: Vec<_> = pts
            .iter()
            .map(|p| {
                p.coords()
                    .unwrap()
                    .iter()
                    .map(|x| x.to_bits())
                    .collect::<Vec<_>>()
            })
            .collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 6);
    }

    #[test]
    fn cluster_separation_controls_spread_ratio() {
        let params = GenParams {
            clusters: 2,
            spread: 0.01,
            separation: 100.0,
        };
        let pts = generate(Distribution::GaussianClusters, 40, 2, 7, &params).unwrap();
        let backend = MetricBackend::euclidean(2).unwrap();
        let ratio = aspect_ratio(&backend, &pts).unwrap();
        assert!(ratio >= 100.0, "aspect ratio {ratio} too small");
    }

    #[test]
    fn rejects_degenerate_requests() {
        let p = GenParams::default();
        assert!(generate(Distribution::Line, 0, 2, 0, &p).is_err());
        assert!(generate(Distribution::Line, 5, 0, 0, &p).is_err());
        let bad = GenParams {
            clusters: 0,
            ..GenParams::default()
        };
        assert!(generate(Distribution::GaussianClusters, 5, 2, 0, &bad).is_err());
        let flat = GenParams {
            spread: 0.0,
            ..GenParams::default()
        };
        assert!(generate(Distribution::GaussianClusters, 5, 2, 0, &flat).is_err());
    }
}
