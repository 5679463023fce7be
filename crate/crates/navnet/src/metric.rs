//! Points, metric backends, and set-distance primitives.
//!
//! Every other module works on top of two pieces defined here: a point
//! (a stable id plus a location payload) and a metric backend that knows
//! how to measure distances between payloads. Two backends are provided:
//! Euclidean L2 over fixed-dimension coordinate vectors, and an explicit
//! symmetric distance matrix for arbitrary finite metrics.
//!
//! Distances are computed and compared in plain `f64` with no epsilon
//! fuzzing; wherever an argmax/argmin is taken elsewhere in the crate,
//! ties are broken by smallest [`PointId`] so that results are
//! reproducible bit for bit.

use std::fmt;

use thiserror::Error;

/// Stable identifier of a point within one point set.
///
/// Ids are unique among live points and are never reused after a deletion
/// within the lifetime of one index (the index enforces this).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PointId(pub u64);

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Location of a point: coordinates for the Euclidean backend, or a row
/// index into an explicit distance matrix.
#[derive(Clone, PartialEq, Debug)]
pub enum Payload {
    Coords(Vec<f64>),
    Row(usize),
}

/// A point: identity plus location.
#[derive(Clone, PartialEq, Debug)]
pub struct MetricPoint {
    pub id: PointId,
    pub payload: Payload,
}

impl MetricPoint {
    /// Convenience constructor for a Euclidean point.
    pub fn euclidean(id: u64, coords: Vec<f64>) -> Self {
        MetricPoint {
            id: PointId(id),
            payload: Payload::Coords(coords),
        }
    }

    /// Convenience constructor for a distance-matrix point.
    pub fn matrix_row(id: u64, row: usize) -> Self {
        MetricPoint {
            id: PointId(id),
            payload: Payload::Row(row),
        }
    }

    /// The coordinate vector, if this is a Euclidean point.
    pub fn coords(&self) -> Option<&[f64]> {
        match &self.payload {
            Payload::Coords(c) => Some(c),
            Payload::Row(_) => None,
        }
    }
}

/// Errors from distance evaluation, validation, and set primitives.
#[derive(Error, Debug)]
pub enum MetricError {
    #[error("dimension mismatch: backend expects {expected}, point {id} has {got}")]
    DimensionMismatch {
        id: PointId,
        expected: usize,
        got: usize,
    },
    #[error("matrix row {row} of point {id} out of range for a {size}x{size} matrix")]
    RowOutOfRange {
        id: PointId,
        row: usize,
        size: usize,
    },
    #[error("point {id} has a {got} payload but the backend is {expected}")]
    PayloadMismatch {
        id: PointId,
        expected: &'static str,
        got: &'static str,
    },
    #[error("point {id} has a non-finite coordinate")]
    NonFiniteCoordinate { id: PointId },
    #[error("a query set must contain at least one point")]
    EmptyQuerySet,
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("aspect ratio needs at least 2 points, got {got}")]
    TooFewPoints { got: usize },
    #[error("zero minimum distance: points {a} and {b} share a location")]
    ZeroMinDistance { a: PointId, b: PointId },
    #[error("invalid distance matrix: {reason}")]
    InvalidMatrix { reason: String },
}

/// The metric space (X, d).
///
/// `Euclidean` is L2 over `R^dim`. `Matrix` is an arbitrary finite metric
/// given by a symmetric nonnegative matrix with zero diagonal; the
/// triangle inequality is not checked here per call (the oracle module
/// offers an exhaustive check for small matrices).
#[derive(Clone, Debug)]
pub enum MetricBackend {
    Euclidean { dim: usize },
    Matrix { dist: Vec<Vec<f64>> },
}

impl MetricBackend {
    /// Euclidean backend over `R^dim`, `dim >= 1`.
    pub fn euclidean(dim: usize) -> Result<Self, MetricError> {
        if dim == 0 {
            return Err(MetricError::ZeroDimension);
        }
        Ok(MetricBackend::Euclidean { dim })
    }

    /// Explicit-matrix backend. Validates shape, symmetry, zero diagonal,
    /// nonnegativity, and finiteness.
    pub fn matrix(dist: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        let n = dist.len();
        if n == 0 {
            return Err(MetricError::InvalidMatrix {
                reason: "matrix is empty".to_string(),
            });
        }
        for (i, row) in dist.iter().enumerate() {
            if row.len() != n {
                return Err(MetricError::InvalidMatrix {
                    reason: format!("row {} has length {}, expected {}", i, row.len(), n),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(MetricError::InvalidMatrix {
                        reason: format!("entry ({i}, {j}) is not finite"),
                    });
                }
                if v < 0.0 {
                    return Err(MetricError::InvalidMatrix {
                        reason: format!("entry ({i}, {j}) is negative"),
                    });
                }
            }
            if dist[i][i] != 0.0 {
                return Err(MetricError::InvalidMatrix {
                    reason: format!("diagonal entry ({i}, {i}) is nonzero"),
                });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if dist[i][j] != dist[j][i] {
                    return Err(MetricError::InvalidMatrix {
                        reason: format!("entries ({i}, {j}) and ({j}, {i}) differ"),
                    });
                }
            }
        }
        Ok(MetricBackend::Matrix { dist })
    }

    /// Human-readable backend kind, used in error messages and configs.
    pub fn kind(&self) -> &'static str {
        match self {
            MetricBackend::Euclidean { .. } => "euclidean",
            MetricBackend::Matrix { .. } => "matrix",
        }
    }

    /// Coordinate dimension for the Euclidean backend, matrix size otherwise.
    pub fn dim(&self) -> usize {
        match self {
            MetricBackend::Euclidean { dim } => *dim,
            MetricBackend::Matrix { dist } => dist.len(),
        }
    }

    /// Validates that a point belongs to this backend: payload kind,
    /// dimension/row range, and finite coordinates.
    pub fn check_point(&self, p: &MetricPoint) -> Result<(), MetricError> {
        match (self, &p.payload) {
            (MetricBackend::Euclidean { dim }, Payload::Coords(c)) => {
                if c.len() != *dim {
                    return Err(MetricError::DimensionMismatch {
                        id: p.id,
                        expected: *dim,
                        got: c.len(),
                    });
                }
                for &x in c {
                    if !x.is_finite() {
                        return Err(MetricError::NonFiniteCoordinate { id: p.id });
                    }
                }
                Ok(())
            }
            (MetricBackend::Matrix { dist }, Payload::Row(r)) => {
                if *r >= dist.len() {
                    return Err(MetricError::RowOutOfRange {
                        id: p.id,
                        row: *r,
                        size: dist.len(),
                    });
                }
                Ok(())
            }
            (MetricBackend::Euclidean { .. }, Payload::Row(_)) => {
                Err(MetricError::PayloadMismatch {
                    id: p.id,
                    expected: "euclidean",
                    got: "matrix-row",
                })
            }
            (MetricBackend::Matrix { .. }, Payload::Coords(_)) => {
                Err(MetricError::PayloadMismatch {
                    id: p.id,
                    expected: "matrix",
                    got: "coordinates",
                })
            }
        }
    }

    /// d(a, b). Both points must belong to this backend.
    pub fn distance(&self, a: &MetricPoint, b: &MetricPoint) -> Result<f64, MetricError> {
        self.check_point(a)?;
        self.check_point(b)?;
        Ok(self.distance_unchecked(a, b))
    }

    /// d(a, b) for points already validated against this backend.
    pub(crate) fn distance_unchecked(&self, a: &MetricPoint, b: &MetricPoint) -> f64 {
        match (self, &a.payload, &b.payload) {
            (MetricBackend::Euclidean { .. }, Payload::Coords(x), Payload::Coords(y)) => {
                let mut sum = 0.0;
                for i in 0..x.len() {
                    let d = x[i] - y[i];
                    sum += d * d;
                }
                sum.sqrt()
            }
            (MetricBackend::Matrix { dist }, Payload::Row(i), Payload::Row(j)) => dist[*i][*j],
            _ => unreachable!("points validated against a different backend"),
        }
    }

    /// d(q, C) = min over c in C of d(q, c).
    pub fn dist_to_set(&self, q: &MetricPoint, c: &QuerySet) -> Result<f64, MetricError> {
        self.check_point(q)?;
        for p in c.points() {
            self.check_point(p)?;
        }
        Ok(self.dist_to_set_unchecked(q, c))
    }

    /// d(q, C) for a point and query set already validated.
    pub(crate) fn dist_to_set_unchecked(&self, q: &MetricPoint, c: &QuerySet) -> f64 {
        let mut best = f64::INFINITY;
        for p in c.points() {
            let d = self.distance_unchecked(q, p);
            if d < best {
                best = d;
            }
        }
        best
    }
}

/// The non-empty query set C. Its points need not belong to any indexed
/// set; their ids carry no meaning and are never used for tie-breaking.
#[derive(Clone, Debug)]
pub struct QuerySet {
    points: Vec<MetricPoint>,
}

impl QuerySet {
    /// Wraps a non-empty list of points.
    pub fn new(points: Vec<MetricPoint>) -> Result<Self, MetricError> {
        if points.is_empty() {
            return Err(MetricError::EmptyQuerySet);
        }
        Ok(QuerySet { points })
    }

    /// Builds a Euclidean query set from raw coordinate vectors.
    pub fn from_coords(coords: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        let points = coords
            .into_iter()
            .enumerate()
            .map(|(i, c)| MetricPoint::euclidean(i as u64, c))
            .collect();
        QuerySet::new(points)
    }

    pub fn points(&self) -> &[MetricPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // enforced non-empty at construction
    }
}

/// Aspect ratio of a point set: max pairwise distance over min pairwise
/// distance, by exhaustive O(n^2) scan. Oracle-grade; used in tests and
/// benches only.
pub fn aspect_ratio(backend: &MetricBackend, points: &[MetricPoint]) -> Result<f64, MetricError> {
    if points.len() < 2 {
        return Err(MetricError::TooFewPoints { got: points.len() });
    }
    for p in points {
        backend.check_point(p)?;
    }
    let mut d_min = f64::INFINITY;
    let mut d_max = 0.0_f64;
    let mut min_pair = (points[0].id, points[1].id);
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = backend.distance_unchecked(&points[i], &points[j]);
            if d < d_min {
                d_min = d;
                min_pair = (points[i].id, points[j].id);
            }
            if d > d_max {
                d_max = d;
            }
        }
    }
    if d_min == 0.0 {
        return Err(MetricError::ZeroMinDistance {
            a: min_pair.0,
            b: min_pair.1,
        });
    }
    Ok(d_max / d_min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(id: u64, coords: &[f64]) -> MetricPoint {
        MetricPoint::euclidean(id, coords.to_vec())
    }

    #[test]
    fn pythagorean_pair() {
        let b = MetricBackend::euclidean(2).unwrap();
        let d = b.distance(&pt(0, &[0.0, 0.0]), &pt(1, &[3.0, 4.0])).unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn identity_is_zero() {
        let b = MetricBackend::euclidean(3).unwrap();
        let p = pt(7, &[1.5, -2.25, 0.5]);
        assert_eq!(b.distance(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn matrix_lookup() {
        let mut m = vec![vec![0.0; 6]; 6];
        m[2][5] = 3.25;
        m[5][2] = 3.25;
        let b = MetricBackend::matrix(m).unwrap();
        let d = b
            .distance(&MetricPoint::matrix_row(0, 2), &MetricPoint::matrix_row(1, 5))
            .unwrap();
        assert_eq!(d, 3.25);
    }

    #[test]
    fn symmetry_on_random_pairs() {
        let b = MetricBackend::euclidean(4).unwrap();
        let a = pt(0, &[0.1, 0.2, 0.3, 0.4]);
        let c = pt(1, &[-1.0, 2.0, -3.0, 4.0]);
        assert_eq!(
            b.distance(&a, &c).unwrap().to_bits(),
            b.distance(&c, &a).unwrap().to_bits()
        );
    }

    #[test]
    fn dist_to_set_minimum_of_two() {
        let b = MetricBackend::euclidean(2).unwrap();
        let c = QuerySet::new(vec![pt(0, &[1.0, 0.0]), pt(1, &[5.0, 0.0])]).unwrap();
        let d = b.dist_to_set(&pt(9, &[0.0, 0.0]), &c).unwrap();
        assert_eq!(d, 1.0);
    }

    #[test]
    fn dist_to_set_member_is_zero() {
        let b = MetricBackend::euclidean(1).unwrap();
        let c = QuerySet::new(vec![pt(0, &[2.0]), pt(1, &[7.0])]).unwrap();
        assert_eq!(b.dist_to_set(&pt(5, &[7.0]), &c).unwrap(), 0.0);
    }

    #[test]
    fn dist_to_set_matches_naive_scan() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let b = MetricBackend::euclidean(2).unwrap();
        for _ in 0..25 {
            let q = pt(100, &[rng.gen::<f64>(), rng.gen::<f64>()]);
            let cs: Vec<MetricPoint> = (0..3)
                .map(|i| pt(i, &[rng.gen::<f64>(), rng.gen::<f64>()]))
                .collect();
            let naive = cs
                .iter()
                .map(|c| b.distance(&q, c).unwrap())
                .fold(f64::INFINITY, f64::min);
            let c = QuerySet::new(cs).unwrap();
            assert_eq!(b.dist_to_set(&q, &c).unwrap(), naive);
        }
    }

    #[test]
    fn aspect_ratio_line_example() {
        let b = MetricBackend::euclidean(1).unwrap();
        let pts = vec![pt(0, &[0.0]), pt(1, &[1.0]), pt(2, &[3.0])];
        assert_eq!(aspect_ratio(&b, &pts).unwrap(), 3.0);
    }

    #[test]
    fn aspect_ratio_two_points_is_one() {
        let b = MetricBackend::euclidean(2).unwrap();
        let pts = vec![pt(0, &[0.0, 0.0]), pt(1, &[2.0, 1.0])];
        assert_eq!(aspect_ratio(&b, &pts).unwrap(), 1.0);
    }

    #[test]
    fn aspect_ratio_rejects_small_and_duplicate_sets() {
        let b = MetricBackend::euclidean(1).unwrap();
        assert!(matches!(
            aspect_ratio(&b, &[pt(0, &[1.0])]),
            Err(MetricError::TooFewPoints { got: 1 })
        ));
        let dup = vec![pt(0, &[1.0]), pt(1, &[1.0]), pt(2, &[4.0])];
        assert!(matches!(
            aspect_ratio(&b, &dup),
            Err(MetricError::ZeroMinDistance { .. })
        ));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let b = MetricBackend::euclidean(2).unwrap();
        let err = b.distance(&pt(0, &[0.0, 0.0]), &pt(1, &[1.0])).unwrap_err();
        assert!(matches!(err, MetricError::DimensionMismatch { got: 1, .. }));
    }

    #[test]
    fn matrix_row_out_of_range_is_an_error() {
        let b = MetricBackend::matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let err = b
            .distance(&MetricPoint::matrix_row(0, 0), &MetricPoint::matrix_row(1, 2))
            .unwrap_err();
        assert!(matches!(err, MetricError::RowOutOfRange { row: 2, .. }));
    }

    #[test]
    fn matrix_validation_catches_defects() {
        assert!(MetricBackend::matrix(vec![]).is_err());
        // not square
        assert!(MetricBackend::matrix(vec![vec![0.0, 1.0], vec![1.0]]).is_err());
        // asymmetric
        assert!(MetricBackend::matrix(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        // nonzero diagonal
        assert!(MetricBackend::matrix(vec![vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
        // negative entry
        assert!(MetricBackend::matrix(vec![vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        // non-finite entry
        assert!(MetricBackend::matrix(vec![vec![0.0, f64::NAN], vec![f64::NAN, 0.0]]).is_err());
    }

    #[test]
    fn payload_mismatch_is_an_error() {
        let b = MetricBackend::euclidean(2).unwrap();
        let err = b
            .distance(&pt(0, &[0.0, 0.0]), &MetricPoint::matrix_row(1, 0))
            .unwrap_err();
        assert!(matches!(err, MetricError::PayloadMismatch { .. }));
    }

    #[test]
    fn non_finite_coordinates_are_rejected() {
        let b = MetricBackend::euclidean(1).unwrap();
        let err = b.check_point(&pt(0, &[f64::INFINITY])).unwrap_err();
        assert!(matches!(err, MetricError::NonFiniteCoordinate { .. }));
    }

    #[test]
    fn query_set_must_be_non_empty() {
        assert!(matches!(
            QuerySet::new(vec![]),
            Err(MetricError::EmptyQuerySet)
        ));
    }

    /// Compensated (Kahan) summation reference for the squared norm; the
    /// plain loop must agree to 1e-12 relative error for D <= 16.
    #[test]
    fn euclidean_against_compensated_reference() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for dim in [2usize, 8, 16] {
            let b = MetricBackend::euclidean(dim).unwrap();
            for _ in 0..50 {
                let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1e3..1e3)).collect();
                let y: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1e3..1e3)).collect();
                let d = b
                    .distance(&pt(0, &x), &pt(1, &y))
                    .unwrap();
                // Kahan-summed reference
                let mut sum = 0.0_f64;
                let mut carry = 0.0_f64;
                for i in 0..dim {
                    let term = (x[i] - y[i]) * (x[i] - y[i]) - carry;
                    let t = sum + term;
                    carry = (t - sum) - term;
                    sum = t;
                }
                let reference = sum.sqrt();
                assert!((d - reference).abs() <= 1e-12 * reference.max(1.0));
            }
        }
    }
}
