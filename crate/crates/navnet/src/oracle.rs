//! Brute-force reference solvers.
//!
//! Everything in this module computes exact answers by exhaustive
//! enumeration, subject to hard size guards. These functions are the
//! ground truth that the approximate index and solvers are tested
//! against, so they deliberately share no code with them: a bug in the
//! main algorithms cannot hide behind a bug repeated here.
//!
//! Guards are hard errors rather than silent fallbacks — a reference
//! solver must never quietly become approximate.

use std::collections::HashMap;

use thiserror::Error;

use crate::metric::{MetricBackend, MetricError, MetricPoint, PointId, QuerySet};

/// Errors from the reference solvers.
#[derive(Error, Debug)]
pub enum OracleError {
    #[error("point set must be non-empty")]
    EmptyPointSet,
    #[error("{what} exceeds the brute-force guard: limit {limit}, got {got}")]
    SizeGuard {
        what: &'static str,
        limit: usize,
        got: usize,
    },
    #[error("k must be at least 1")]
    InvalidK,
    #[error("this solver requires the euclidean backend")]
    NotEuclidean,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// The object that achieves an oracle's reported value.
#[derive(Clone, Debug)]
pub enum Witness {
    /// The furthest point.
    Point(PointId),
    /// An optimal center set (subset of the input points).
    Centers(Vec<PointId>),
    /// An optimal enclosing ball: its center and the input points on its
    /// boundary that determine it.
    Ball { center: Vec<f64>, support: Vec<PointId> },
    /// An optimal grouping of the input points, one group per ball.
    Partition(Vec<Vec<PointId>>),
}

/// Value plus the witness that re-evaluates to it.
#[derive(Clone, Debug)]
pub struct OracleResult {
    pub value: f64,
    pub witness: Witness,
}

/// Exact furthest neighbor from a query set: the point of `points`
/// maximizing d(p, C), ties broken by smallest id. O(|P||C|).
pub fn fn_exact(
    backend: &MetricBackend,
    points: &[MetricPoint],
    c: &QuerySet,
) -> Result<(PointId, f64), OracleError> {
    if points.is_empty() {
        return Err(OracleError::EmptyPointSet);
    }
    for p in points {
        backend.check_point(p)?;
    }
    for p in c.points() {
        backend.check_point(p)?;
    }
    let mut best_id = points[0].id;
    let mut best_d = f64::NEG_INFINITY;
    for p in points {
        let d = backend.dist_to_set_unchecked(p, c);
        if d > best_d || (d == best_d && p.id < best_id) {
            best_d = d;
            best_id = p.id;
        }
    }
    Ok((best_id, best_d))
}

/// Exact k-center with centers drawn from the point set: minimizes
/// max_p d(p, C) over all C ⊆ P with |C| ≤ k, by enumerating center
/// subsets (sizes ascending, lexicographic by id order; first optimum
/// wins). Guards: |P| ≤ 40, k ≤ 3.
pub fn kcenter_exact_metric(
    backend: &MetricBackend,
    points: &[MetricPoint],
    k: usize,
) -> Result<OracleResult, OracleError> {
    if points.is_empty() {
        return Err(OracleError::EmptyPointSet);
    }
    if k == 0 {
        return Err(OracleError::InvalidK);
    }
    if points.len() > 40 {
        return Err(OracleError::SizeGuard {
            what: "point count",
            limit: 40,
            got: points.len(),
        });
    }
    if k > 3 {
        return Err(OracleError::SizeGuard {
            what: "k",
            limit: 3,
            got: k,
        });
    }
    for p in points {
        backend.check_point(p)?;
    }
    let mut pts: Vec<&MetricPoint> = points.iter().collect();
    pts.sort_by_key(|p| p.id);
    let n = pts.len();
    let mut table = vec![vec![0.0_f64; n]; n];
    for i in 0..n {
        for j in 0..n {
            table[i][j] = backend.distance_unchecked(pts[i], pts[j]);
        }
    }
    let mut best = f64::INFINITY;
    let mut best_centers: Vec<PointId> = Vec::new();
    for m in 1..=k.min(n) {
        for_each_combination(n, m, |idx| {
            let mut radius = 0.0_f64;
            for row in &table {
                let mut nearest = f64::INFINITY;
                for &c in idx {
                    if row[c] < nearest {
                        nearest = row[c];
                    }
                }
                if nearest > radius {
                    radius = nearest;
                    if radius >= best {
                        return; // cannot strictly improve
                    }
                }
            }
            if radius < best {
                best = radius;
                best_centers = idx.iter().map(|&i| pts[i].id).collect();
            }
        });
    }
    Ok(OracleResult {
        value: best,
        witness: Witness::Centers(best_centers),
    })
}

/// Exact minimum enclosing ball in R^D, D ≤ 3, by enumerating all
/// candidate support subsets of size ≤ D+1 and keeping the smallest
/// circumscribing ball that covers every point. Guards: D ≤ 3, |P| ≤ 500.
pub fn meb_exact(
    backend: &MetricBackend,
    points: &[MetricPoint],
) -> Result<OracleResult, OracleError> {
    let dim = match backend {
        MetricBackend::Euclidean { dim } => *dim,
        MetricBackend::Matrix { .. } => return Err(OracleError::NotEuclidean),
    };
    if dim > 3 {
        return Err(OracleError::SizeGuard {
            what: "dimension",
            limit: 3,
            got: dim,
        });
    }
    if points.is_empty() {
        return Err(OracleError::EmptyPointSet);
    }
    if points.len() > 500 {
        return Err(OracleError::SizeGuard {
            what: "point count",
            limit: 500,
            got: points.len(),
        });
    }
    for p in points {
        backend.check_point(p)?;
    }
    let mut pts: Vec<&MetricPoint> = points.iter().collect();
    pts.sort_by_key(|p| p.id);
    let pts3: Vec<[f64; 3]> = pts.iter().map(|p| pad3(p.coords().unwrap())).collect();
    let (center, radius, support) = smallest_ball(&pts3, dim);
    Ok(OracleResult {
        value: radius,
        witness: Witness::Ball {
            center: center[..dim].to_vec(),
            support: support.iter().map(|&i| pts[i].id).collect(),
        },
    })
}

/// Exact Euclidean k-center with unrestricted centers: enumerates all
/// partitions of P into ≤ k groups and minimizes the largest group MEB
/// radius. Guards: |P| ≤ 20, k ≤ 3, D ≤ 3.
pub fn kcenter_exact_euclidean(
    backend: &MetricBackend,
    points: &[MetricPoint],
    k: usize,
) -> Result<OracleResult, OracleError> {
    let dim = match backend {
        MetricBackend::Euclidean { dim } => *dim,
        MetricBackend::Matrix { .. } => return Err(OracleError::NotEuclidean),
    };
    if dim > 3 {
        return Err(OracleError::SizeGuard {
            what: "dimension",
            limit: 3,
            got: dim,
        });
    }
    if points.is_empty() {
        return Err(OracleError::EmptyPointSet);
    }
    if k == 0 {
        return Err(OracleError::InvalidK);
    }
    if points.len() > 20 {
        return Err(OracleError::SizeGuard {
            what: "point count",
            limit: 20,
            got: points.len(),
        });
    }
    if k > 3 {
        return Err(OracleError::SizeGuard {
            what: "k",
            limit: 3,
            got: k,
        });
    }
    for p in points {
        backend.check_point(p)?;
    }
    let mut pts: Vec<&MetricPoint> = points.iter().collect();
    pts.sort_by_key(|p| p.id);
    let pts3: Vec<[f64; 3]> = pts.iter().map(|p| pad3(p.coords().unwrap())).collect();
    let n = pts3.len();

    let mut search = PartitionSearch {
        pts3: &pts3,
        dim,
        k: k.min(n),
        n,
        memo: HashMap::new(),
        best: f64::INFINITY,
        best_assign: vec![0; n],
        assign: vec![0; n],
    };
    let mut masks = vec![0_u32; k.min(n)];
    search.recurse(0, 0, 0.0, &mut masks);

    let nblocks = search.best_assign.iter().copied().max().unwrap_or(0) + 1;
    let mut blocks: Vec<Vec<PointId>> = vec![Vec::new(); nblocks];
    for (i, &b) in search.best_assign.iter().enumerate() {
        blocks[b].push(pts[i].id);
    }
    Ok(OracleResult {
        value: search.best,
        witness: Witness::Partition(blocks),
    })
}

/// Exhaustive triangle-inequality scan over an explicit distance matrix;
/// returns the first triple (i, j, via) with d[i][j] > d[i][via] +
/// d[via][j], or None if the matrix is metric.
pub fn verify_triangle_inequality(dist: &[Vec<f64>]) -> Option<(usize, usize, usize)> {
    let n = dist.len();
    for i in 0..n {
        for j in 0..n {
            for via in 0..n {
                if dist[i][j] > dist[i][via] + dist[via][j] {
                    return Some((i, j, via));
                }
            }
        }
    }
    None
}

/// Depth-first enumeration of partitions of {0..n} into ≤ k groups, in
/// restricted-growth order (point i joins an existing group or opens the
/// next one), pruned by the best radius found so far. Group MEB radii are
/// memoized by membership bitmask; radii only grow as a group gains
/// points, so a branch whose current worst group already ties the best
/// complete partition can never strictly improve and is cut.
struct PartitionSearch<'a> {
    pts3: &'a [[f64; 3]],
    dim: usize,
    k: usize,
    n: usize,
    memo: HashMap<u32, f64>,
    best: f64,
    best_assign: Vec<usize>,
    assign: Vec<usize>,
}

impl PartitionSearch<'_> {
    fn radius_of(&mut self, mask: u32) -> f64 {
        if let Some(&r) = self.memo.get(&mask) {
            return r;
        }
        let sub: Vec<[f64; 3]> = (0..self.n)
            .filter(|&t| mask & (1 << t) != 0)
            .map(|t| self.pts3[t])
            .collect();
        let (_, r, _) = smallest_ball(&sub, self.dim);
        self.memo.insert(mask, r);
        r
    }

    fn recurse(&mut self, i: usize, groups_open: usize, cur_max: f64, masks: &mut [u32]) {
        if cur_max >= self.best {
            return;
        }
        if i == self.n {
            self.best = cur_max;
            self.best_assign.copy_from_slice(&self.assign);
            return;
        }
        let choices = (groups_open + 1).min(self.k);
        for g in 0..choices {
            let saved = masks[g];
            masks[g] |= 1 << i;
            let r = self.radius_of(masks[g]);
            self.assign[i] = g;
            let open = if g == groups_open { groups_open + 1 } else { groups_open };
            self.recurse(i + 1, open, cur_max.max(r), masks);
            masks[g] = saved;
        }
    }
}

/// Visits all m-subsets of {0..n} in lexicographic order.
fn for_each_combination(n: usize, m: usize, mut f: impl FnMut(&[usize])) {
    if m == 0 || m > n {
        return;
    }
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        f(&idx);
        let mut i = m;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < n - m + i {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn pad3(coords: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    out[..coords.len()].copy_from_slice(coords);
    out
}

fn dist3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Smallest ball covering all of `pts`, found by enumerating candidate
/// support subsets of size 1..=dim+1 (sizes ascending, lexicographic
/// within a size), skipping affinely dependent subsets, and keeping the
/// smallest circumscribing ball that covers everything. The optimum has
/// an affinely independent support of size ≤ dim+1, so it is always
/// among the candidates. Returns (center, radius, support indices).
fn smallest_ball(pts: &[[f64; 3]], dim: usize) -> ([f64; 3], f64, Vec<usize>) {
    let n = pts.len();
    let mut best_r = f64::INFINITY;
    let mut best_center = pts[0];
    let mut best_support = vec![0];
    for m in 1..=(dim + 1).min(n) {
        for_each_combination(n, m, |idx| {
            let Some((center, radius)) = circumball(pts, idx) else {
                return;
            };
            if radius >= best_r {
                return;
            }
            // 1e-12 relative slack absorbs roundoff in the circumcenter
            // solve; it is far below every tolerance used against this
            // oracle.
            let limit = radius * (1.0 + 1e-12);
            for p in pts {
                if dist3(p, &center) > limit {
                    return;
                }
            }
            best_r = radius;
            best_center = center;
            best_support = idx.to_vec();
        });
    }
    (best_center, best_r, best_support)
}

/// The unique ball having all the chosen points on its boundary with
/// center in their affine hull. None if the points are (numerically)
/// affinely dependent; such a subset is never the support of the optimum.
fn circumball(pts: &[[f64; 3]], idx: &[usize]) -> Option<([f64; 3], f64)> {
    let m = idx.len();
    let p0 = pts[idx[0]];
    if m == 1 {
        return Some((p0, 0.0));
    }
    if m == 2 {
        let p1 = pts[idx[1]];
        let center = [
            (p0[0] + p1[0]) / 2.0,
            (p0[1] + p1[1]) / 2.0,
            (p0[2] + p1[2]) / 2.0,
        ];
        return Some((center, dist3(&center, &p0)));
    }
    // Center = p0 + sum_i lambda_i v_i with v_i = p_i - p0; equidistance
    // |c - p_i| = |c - p0| reduces to the linear system G lambda = b with
    // G_ij = v_i . v_j and b_i = |v_i|^2 / 2.
    let q = m - 1;
    let mut v = [[0.0_f64; 3]; 3];
    for i in 0..q {
        for t in 0..3 {
            v[i][t] = pts[idx[i + 1]][t] - p0[t];
        }
    }
    let mut g = [[0.0_f64; 3]; 3];
    let mut b = [0.0_f64; 3];
    let mut g_scale = 0.0_f64;
    for i in 0..q {
        for j in 0..q {
            g[i][j] = dot3(&v[i], &v[j]);
            g_scale = g_scale.max(g[i][j].abs());
        }
        b[i] = dot3(&v[i], &v[i]) / 2.0;
    }
    let lambda = solve_small(&mut g, &mut b, q, g_scale)?;
    let mut center = p0;
    for i in 0..q {
        for t in 0..3 {
            center[t] += lambda[i] * v[i][t];
        }
    }
    Some((center, dist3(&center, &p0)))
}

/// Gaussian elimination with partial pivoting on a q x q system, q ≤ 3.
/// Returns None when a pivot is negligible relative to the matrix scale.
fn solve_small(g: &mut [[f64; 3]; 3], b: &mut [f64; 3], q: usize, scale: f64) -> Option<[f64; 3]> {
    let eps = 1e-12 * scale.max(f64::MIN_POSITIVE);
    for col in 0..q {
        let mut piv = col;
        for r in (col + 1)..q {
            if g[r][col].abs() > g[piv][col].abs() {
                piv = r;
            }
        }
        if g[piv][col].abs() <= eps {
            return None;
        }
        if piv != col {
            g.swap(piv, col);
            b.swap(piv, col);
        }
        for r in (col + 1)..q {
            let f = g[r][col] / g[col][col];
            for c2 in col..q {
                g[r][c2] -= f * g[col][c2];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0_f64; 3];
    for col in (0..q).rev() {
        let mut s = b[col];
        for c2 in (col + 1)..q {
            s -= g[col][c2] * x[c2];
        }
        x[col] = s / g[col][col];
    }
    Some(x)
}
