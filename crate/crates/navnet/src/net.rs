//! The dynamic net hierarchy over a mutable point set.
//!
//! The structure maintains, for a geometric ladder of scales r = 2^e, a
//! chain of nested point sets Y_e ("the net at scale 2^e") with:
//!
//! - nesting: Y_e ⊆ Y_{e-1};
//! - packing: distinct members of Y_e are at distance ≥ 2^e;
//! - covering: every member of Y_{e-1} is within 2^e of some member of
//!   Y_e (which chains into d(z, Y_e) < 2·2^e for every live z);
//! - navigation lists: each y ∈ Y_e stores exactly the members of
//!   Y_{e-1} within γ·2^e of it.
//!
//! Only the informative scale band is materialized. The bottom exponent
//! `e_min` is the largest one with γ·2^e below the minimum pairwise
//! distance: there the net is the whole point set and every list is the
//! singleton {owner}, so everything below is represented implicitly. The
//! top exponent `e_max` is the smallest one whose net is a single point.
//!
//! All mutation is done by local repair: an insert descends the lists to
//! find everything near the new point, joins each level until the point
//! is covered, and extends the ladder when needed; a delete promotes
//! surviving points to re-cover the hole, working bottom-up. An
//! exhaustive `verify_invariants` recomputes every property from scratch
//! and is the oracle the repair logic is tested against.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::metric::{MetricBackend, MetricError, MetricPoint, PointId};

/// A scale r = 2^exponent. All scale arithmetic is integer arithmetic on
/// exponents; the floating-point value is derived on demand.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Scale(pub i32);

impl Scale {
    /// The value 2^exponent as f64 (exact for all exponents in range).
    pub fn value(self) -> f64 {
        two_pow(self.0)
    }

    pub fn exponent(self) -> i32 {
        self.0
    }

    pub fn half(self) -> Scale {
        Scale(self.0 - 1)
    }

    pub fn double(self) -> Scale {
        Scale(self.0 + 1)
    }
}

pub(crate) fn two_pow(e: i32) -> f64 {
    2.0_f64.powi(e)
}

/// Largest exponent e with 2^e strictly below x. Requires x > 0, finite.
pub(crate) fn exponent_strictly_below(x: f64) -> i32 {
    debug_assert!(x > 0.0 && x.is_finite());
    let mut e = x.log2().floor() as i32;
    while two_pow(e) >= x {
        e -= 1;
    }
    while two_pow(e + 1) < x {
        e += 1;
    }
    e
}

/// Smallest exponent e with 2^e ≥ x. Requires x > 0, finite.
pub(crate) fn exponent_at_least(x: f64) -> i32 {
    debug_assert!(x > 0.0 && x.is_finite());
    let mut e = x.log2().ceil() as i32;
    while two_pow(e) < x {
        e += 1;
    }
    while two_pow(e - 1) >= x {
        e -= 1;
    }
    e
}

/// Errors from net construction and mutation.
#[derive(Error, Debug)]
pub enum NetError {
    #[error("gamma must be a finite value >= 4, got {0}")]
    GammaTooSmall(f64),
    #[error("point id {0} is already live")]
    DuplicateId(PointId),
    #[error("point id {0} was deleted earlier and ids are never reused")]
    RetiredId(PointId),
    #[error("point {0} coincides with live point {1}; duplicate locations are rejected")]
    DuplicateLocation(PointId, PointId),
    #[error("point id {0} is not live")]
    UnknownId(PointId),
    #[error("point {id} is not a net member at scale exponent {exponent}")]
    NotInLevel { id: PointId, exponent: i32 },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Outcome of the exhaustive structural self-check. Violations are
/// report content, never panics or errors.
#[derive(Clone, Debug)]
pub struct InvariantReport {
    pub pass: bool,
    pub first_violation: Option<String>,
}

/// One materialized scale: its net members, and one navigation list per
/// member. `nonsingleton_lists` is maintained incrementally so that the
/// bottom-of-ladder check is O(1).
#[derive(Clone, Debug, Default)]
struct Level {
    members: BTreeSet<PointId>,
    lists: BTreeMap<PointId, BTreeSet<PointId>>,
    nonsingleton_lists: usize,
}

impl Level {
    fn add_owner(&mut self, y: PointId, list: BTreeSet<PointId>) {
        debug_assert!(!self.members.contains(&y));
        if list.len() > 1 {
            self.nonsingleton_lists += 1;
        }
        self.members.insert(y);
        self.lists.insert(y, list);
    }

    fn remove_owner(&mut self, y: PointId) {
        if let Some(list) = self.lists.remove(&y) {
            if list.len() > 1 {
                self.nonsingleton_lists -= 1;
            }
        }
        self.members.remove(&y);
    }

    fn list_add(&mut self, y: PointId, z: PointId) {
        let list = self.lists.get_mut(&y).expect("every member owns a list");
        if list.insert(z) && list.len() == 2 {
            self.nonsingleton_lists += 1;
        }
    }

    fn list_remove(&mut self, y: PointId, z: PointId) {
        let list = self.lists.get_mut(&y).expect("every member owns a list");
        if list.remove(&z) && list.len() == 1 {
            self.nonsingleton_lists -= 1;
        }
    }

    fn is_all_singleton(&self) -> bool {
        self.nonsingleton_lists == 0
    }
}

/// The dynamic net hierarchy. See the module docs for the maintained
/// properties; `verify_invariants` recomputes all of them exhaustively.
#[derive(Clone, Debug)]
pub struct NavigatingNet {
    backend: MetricBackend,
    gamma: f64,
    registry: BTreeMap<PointId, MetricPoint>,
    retired: BTreeSet<PointId>,
    levels: BTreeMap<i32, Level>,
    e_min: i32,
    e_max: i32,
    rebuild_on_delete: bool,
}

impl NavigatingNet {
    /// An empty net. `gamma` is the navigation-list radius multiplier;
    /// it must be ≥ 4 (4 is the usual choice: it is the smallest value
    /// for which descent traversals are complete).
    pub fn new(backend: MetricBackend, gamma: f64) -> Result<Self, NetError> {
        if !(gamma.is_finite() && gamma >= 4.0) {
            return Err(NetError::GammaTooSmall(gamma));
        }
        Ok(NavigatingNet {
            backend,
            gamma,
            registry: BTreeMap::new(),
            retired: BTreeSet::new(),
            levels: BTreeMap::new(),
            e_min: 0,
            e_max: 0,
            rebuild_on_delete: false,
        })
    }

    /// Builds a net by inserting `points` in ascending id order.
    pub fn build(
        backend: MetricBackend,
        gamma: f64,
        points: &[MetricPoint],
    ) -> Result<Self, NetError> {
        let mut net = NavigatingNet::new(backend, gamma)?;
        let mut sorted: Vec<&MetricPoint> = points.iter().collect();
        sorted.sort_by_key(|p| p.id);
        for p in sorted {
            net.insert(p.clone())?;
        }
        Ok(net)
    }

    /// When set, `delete` rebuilds the whole net from the survivors
    /// instead of repairing in place. Intended for differential testing
    /// of the repair path only.
    pub fn with_rebuild_on_delete(mut self, flag: bool) -> Self {
        self.rebuild_on_delete = flag;
        self
    }

    pub fn len(&self) -> usize {
        self.registry.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registry.is_empty()
    }

    pub fn contains(&self, id: PointId) -> bool {
        self.registry.contains_key(&id)
    }

    pub fn point(&self, id: PointId) -> Option<&MetricPoint> {
        self.registry.get(&id)
    }

    /// All live points in ascending id order.
    pub fn snapshot_points(&self) -> Vec<MetricPoint> {
        self.registry.values().cloned().collect()
    }

    /// The single net member at the top scale.
    pub fn top(&self) -> Option<PointId> {
        if self.registry.is_empty() {
            None
        } else {
            Some(self.top_id())
        }
    }

    /// Smallest scale at which the net is a single point.
    pub fn r_max(&self) -> Option<Scale> {
        if self.registry.is_empty() {
            None
        } else {
            Some(Scale(self.e_max))
        }
    }

    /// The bottom materialized scale: the largest one with γ·2^e below
    /// the minimum pairwise distance. Below it, every net equals the
    /// full point set and every list is {owner}.
    pub fn r_min(&self) -> Option<Scale> {
        if self.registry.is_empty() {
            None
        } else {
            Some(Scale(self.e_min))
        }
    }

    /// Number of materialized scales.
    pub fn scale_count(&self) -> usize {
        if self.registry.is_empty() {
            0
        } else {
            (self.e_max - self.e_min + 1) as usize
        }
    }

    /// Longest navigation list over all materialized scales.
    pub fn max_list_len(&self) -> usize {
        self.levels
            .values()
            .flat_map(|level| level.lists.values())
            .map(|l| l.len())
            .max()
            .unwrap_or(0)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn backend(&self) -> &MetricBackend {
        &self.backend
    }

    fn top_id(&self) -> PointId {
        *self.levels[&self.e_max]
            .members
            .iter()
            .next()
            .expect("top level of a non-empty net has one member")
    }

    /// Direct list access for traversals; `None` when the id does not
    /// own a list at that exponent.
    pub(crate) fn list_ref(&self, exponent: i32, y: PointId) -> Option<&BTreeSet<PointId>> {
        self.levels.get(&exponent)?.lists.get(&y)
    }

    pub(crate) fn member_point(&self, id: PointId) -> &MetricPoint {
        &self.registry[&id]
    }

    fn dist_cached(&self, cache: &mut BTreeMap<PointId, f64>, p: &MetricPoint, id: PointId) -> f64 {
        if let Some(&d) = cache.get(&id) {
            return d;
        }
        let d = self.backend.distance_unchecked(p, &self.registry[&id]);
        cache.insert(id, d);
        d
    }

    /// The navigation list of `y` at scale `r`. Below the materialized
    /// band the list is implicitly {y}; above it only the top point has
    /// a (singleton) list.
    pub fn navigation_list(&self, y: PointId, r: Scale) -> Result<BTreeSet<PointId>, NetError> {
        if !self.registry.contains_key(&y) {
            return Err(NetError::UnknownId(y));
        }
        let e = r.exponent();
        if e < self.e_min {
            return Ok(BTreeSet::from([y]));
        }
        if e > self.e_max {
            if y == self.top_id() {
                return Ok(BTreeSet::from([y]));
            }
            return Err(NetError::NotInLevel { id: y, exponent: e });
        }
        match self.levels[&e].lists.get(&y) {
            Some(list) => Ok(list.clone()),
            None => Err(NetError::NotInLevel { id: y, exponent: e }),
        }
    }

    /// One line per (scale, owner): `L <exponent> <owner-id> : <ids>`,
    /// exponents ascending, owners ascending, list ids ascending.
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        for (&e, level) in &self.levels {
            for (y, list) in &level.lists {
                let ids: Vec<String> = list.iter().map(|z| z.0.to_string()).collect();
                writeln!(out, "L {} {} : {}", e, y.0, ids.join(" ")).unwrap();
            }
        }
        out
    }

    /// Inserts a new point. The id must never have been used before and
    /// the location must not coincide with any live point.
    pub fn insert(&mut self, p: MetricPoint) -> Result<(), NetError> {
        self.backend.check_point(&p)?;
        if self.registry.contains_key(&p.id) {
            return Err(NetError::DuplicateId(p.id));
        }
        if self.retired.contains(&p.id) {
            return Err(NetError::RetiredId(p.id));
        }
        if self.registry.is_empty() {
            // First point: bootstrap a one-level ladder at exponent 0.
            self.e_min = 0;
            self.e_max = 0;
            let mut level = Level::default();
            level.add_owner(p.id, BTreeSet::from([p.id]));
            self.levels.clear();
            self.levels.insert(0, level);
            self.registry.insert(p.id, p);
            return Ok(());
        }

        let mut cache: BTreeMap<PointId, f64> = BTreeMap::new();
        let old_top = self.top_id();
        let d_top = self.dist_cached(&mut cache, &p, old_top);

        // Descend the ladder collecting, per scale, every net member
        // within 2γ·2^e of p ("reach sets"). Seed: the top point at
        // e_max. Step: candidates at e are the list entries of the reach
        // set one level up — closure holds because any member within the
        // radius at e has a covering ancestor within the radius at e+1,
        // and that ancestor's list contains it (needs γ ≥ 2).
        let mut reach: BTreeMap<i32, BTreeMap<PointId, f64>> = BTreeMap::new();
        {
            let mut cur: BTreeMap<PointId, f64> = BTreeMap::new();
            if d_top <= 2.0 * self.gamma * two_pow(self.e_max) {
                cur.insert(old_top, d_top);
            }
            reach.insert(self.e_max, cur);
            for e in (self.e_min..self.e_max).rev() {
                let threshold = 2.0 * self.gamma * two_pow(e);
                let mut next: BTreeMap<PointId, f64> = BTreeMap::new();
                let above: Vec<PointId> = reach[&(e + 1)].keys().copied().collect();
                for z in above {
                    let list: Vec<PointId> =
                        self.levels[&(e + 1)].lists[&z].iter().copied().collect();
                    for w in list {
                        if next.contains_key(&w) {
                            continue;
                        }
                        let d = self.dist_cached(&mut cache, &p, w);
                        if d <= threshold {
                            next.insert(w, d);
                        }
                    }
                }
                reach.insert(e, next);
            }
        }

        // The bottom net is the whole point set, so the bottom reach set
        // sees the true nearest neighbor whenever it is within range.
        let (nearest_d, nearest_id) = reach[&self.e_min]
            .iter()
            .fold((f64::INFINITY, p.id), |(bd, bi), (&id, &d)| {
                if d < bd {
                    (d, id)
                } else {
                    (bd, bi)
                }
            });
        if nearest_d == 0.0 {
            return Err(NetError::DuplicateLocation(p.id, nearest_id));
        }

        // If p lands within γ·2^e_min of an existing point, the bottom
        // of the ladder is no longer below the minimum pairwise
        // distance: extend it downward until it is.
        if nearest_d <= self.gamma * two_pow(self.e_min) {
            let new_e_min = exponent_strictly_below(nearest_d / self.gamma);
            debug_assert!(new_e_min < self.e_min);
            let base_members: Vec<PointId> =
                self.levels[&self.e_min].members.iter().copied().collect();
            for e in new_e_min..self.e_min {
                let mut level = Level::default();
                for &y in &base_members {
                    level.add_owner(y, BTreeSet::from([y]));
                }
                self.levels.insert(e, level);
            }
            // Extend the reach sets over the new scales: the nets there
            // all equal the full point set, and every qualifying point
            // already sits in the old bottom reach set, so plain
            // re-filtering is complete.
            for e in (new_e_min..self.e_min).rev() {
                let threshold = 2.0 * self.gamma * two_pow(e);
                let next: BTreeMap<PointId, f64> = reach[&(e + 1)]
                    .iter()
                    .filter(|&(_, &d)| d <= threshold)
                    .map(|(&id, &d)| (id, d))
                    .collect();
                reach.insert(e, next);
            }
            self.e_min = new_e_min;
        }

        // p joins every net from the bottom up until it is covered: the
        // first exponent where some member is within 2^e of p stops the
        // climb (p is covered there; below it, p keeps packing because
        // the nearest member is strictly further than 2^e).
        let mut e_p = self.e_max;
        for (&e, level_reach) in &reach {
            let near = level_reach.values().fold(f64::INFINITY, |a, &d| a.min(d));
            if near <= two_pow(e) {
                e_p = e - 1;
                break;
            }
        }

        let join_hi = e_p.min(self.e_max);
        for e in self.e_min..=join_hi {
            // The candidate radius one level down (2γ·2^{e-1}) equals
            // this level's list radius (γ·2^e) exactly, so p's own list
            // is the whole lower reach set plus p itself.
            let mut own_list: BTreeSet<PointId> = if e == self.e_min {
                BTreeSet::new()
            } else {
                reach[&(e - 1)].keys().copied().collect()
            };
            own_list.insert(p.id);
            self.levels.get_mut(&e).unwrap().add_owner(p.id, own_list);
        }
        // Existing owners within γ·2^e adopt p into their lists at every
        // scale whose list domain now contains p.
        let owner_hi = (e_p + 1).min(self.e_max);
        for e in self.e_min..=owner_hi {
            let threshold = self.gamma * two_pow(e);
            let adopters: Vec<PointId> = reach[&e]
                .iter()
                .filter(|&(_, &d)| d <= threshold)
                .map(|(&y, _)| y)
                .collect();
            let level = self.levels.get_mut(&e).unwrap();
            for y in adopters {
                level.list_add(y, p.id);
            }
        }

        if e_p >= self.e_max {
            // p was never covered: it reached the top scale, which now
            // holds two points. Extend the ladder until one covers the
            // other. p is uncovered at e_max, so d_top > 2^e_max and the
            // new top exponent is strictly higher.
            let new_e_max = exponent_at_least(d_top).max(self.e_max + 1);
            let pair = [old_top, p.id];
            for e in (self.e_max + 1)..new_e_max {
                let threshold = self.gamma * two_pow(e);
                let mut level = Level::default();
                for &y in &pair {
                    let mut list = BTreeSet::from([y]);
                    if d_top <= threshold {
                        list.insert(if y == old_top { p.id } else { old_top });
                    }
                    level.add_owner(y, list);
                }
                self.levels.insert(e, level);
            }
            let keeper = old_top.min(p.id);
            let mut level = Level::default();
            level.add_owner(keeper, BTreeSet::from([old_top, p.id]));
            self.levels.insert(new_e_max, level);
            self.e_max = new_e_max;
        }

        self.registry.insert(p.id, p);
        self.normalize_bottom();
        Ok(())
    }

    /// Deletes a live point, repairing the hierarchy around the hole
    /// (or rebuilding from scratch when `with_rebuild_on_delete` is on).
    pub fn delete(&mut self, id: PointId) -> Result<(), NetError> {
        if !self.registry.contains_key(&id) {
            return Err(NetError::UnknownId(id));
        }
        if self.rebuild_on_delete {
            let survivors: Vec<MetricPoint> = self
                .registry
                .values()
                .filter(|p| p.id != id)
                .cloned()
                .collect();
            self.registry.clear();
            self.levels.clear();
            self.retired.insert(id);
            for p in survivors {
                self.insert(p)
                    .expect("re-inserting surviving points cannot fail");
            }
            return Ok(());
        }
        if self.registry.len() == 1 {
            self.registry.clear();
            self.levels.clear();
            self.retired.insert(id);
            self.e_min = 0;
            self.e_max = 0;
            return Ok(());
        }

        let q = self.registry[&id].clone();
        let mut cache: BTreeMap<PointId, f64> = BTreeMap::new();

        // Affected sets: per scale, every net member within c·2^e of q,
        // c = 2γ+2. This radius is wide enough to contain every owner
        // whose list mentions q, every candidate cover for a point q was
        // covering, and every list entry a promoted point needs.
        let c = 2.0 * self.gamma + 2.0;
        let mut affected: BTreeMap<i32, BTreeMap<PointId, f64>> = BTreeMap::new();
        {
            let top = self.top_id();
            let d_top = self.dist_cached(&mut cache, &q, top);
            let mut cur: BTreeMap<PointId, f64> = BTreeMap::new();
            if d_top <= c * two_pow(self.e_max) {
                cur.insert(top, d_top);
            }
            affected.insert(self.e_max, cur);
            for e in (self.e_min..self.e_max).rev() {
                let threshold = c * two_pow(e);
                let mut next: BTreeMap<PointId, f64> = BTreeMap::new();
                let above: Vec<PointId> = affected[&(e + 1)].keys().copied().collect();
                for z in above {
                    let list: Vec<PointId> =
                        self.levels[&(e + 1)].lists[&z].iter().copied().collect();
                    for w in list {
                        if next.contains_key(&w) {
                            continue;
                        }
                        let d = self.dist_cached(&mut cache, &q, w);
                        if d <= threshold {
                            next.insert(w, d);
                        }
                    }
                }
                affected.insert(e, next);
            }
        }

        let mut e_q = self.e_min;
        for e in (self.e_min..=self.e_max).rev() {
            if self.levels[&e].members.contains(&id) {
                e_q = e;
                break;
            }
        }

        self.registry.remove(&id);
        self.retired.insert(id);
        for e in self.e_min..=e_q {
            self.levels.get_mut(&e).unwrap().remove_owner(id);
        }
        let owner_hi = (e_q + 1).min(self.e_max);
        for e in self.e_min..=owner_hi {
            let owners: Vec<PointId> = affected[&e]
                .keys()
                .copied()
                .filter(|y| *y != id && self.levels[&e].members.contains(y))
                .collect();
            let level = self.levels.get_mut(&e).unwrap();
            for y in owners {
                level.list_remove(y, id);
            }
        }

        // Bottom-up repair: at each scale, any point one level down that
        // q may have been covering (it is within 2^e of q, or was itself
        // just promoted below) gets a cover check; uncovered points are
        // promoted into this scale, with a fresh list and registration
        // in the lists one level up. Promotions at e feed the candidate
        // set at e+1.
        let mut promoted_prev: BTreeMap<PointId, f64> = BTreeMap::new();
        for e in (self.e_min + 1)..=self.e_max {
            let r = two_pow(e);
            let mut cand: BTreeMap<PointId, f64> = BTreeMap::new();
            for (&z, &d) in &affected[&(e - 1)] {
                if d <= r && self.levels[&(e - 1)].members.contains(&z) {
                    cand.insert(z, d);
                }
            }
            for (&z, &d) in &promoted_prev {
                cand.insert(z, d);
            }
            let mut promoted_now: BTreeMap<PointId, f64> = BTreeMap::new();
            for (&z, &dz) in &cand {
                if self.levels[&e].members.contains(&z) {
                    continue;
                }
                let zp = self.registry[&z].clone();
                let mut covered = false;
                for y in affected[&e].keys().chain(promoted_now.keys()) {
                    if !self.levels[&e].members.contains(y) {
                        continue;
                    }
                    if self.backend.distance_unchecked(&zp, &self.registry[y]) <= r {
                        covered = true;
                        break;
                    }
                }
                if covered {
                    continue;
                }
                // Promote z into the net at this scale.
                let list_radius = self.gamma * r;
                let mut list = BTreeSet::from([z]);
                let lower: Vec<PointId> = affected[&(e - 1)]
                    .keys()
                    .chain(promoted_prev.keys())
                    .copied()
                    .collect();
                for w in lower {
                    if w == z || !self.levels[&(e - 1)].members.contains(&w) {
                        continue;
                    }
                    if self.backend.distance_unchecked(&zp, &self.registry[&w]) <= list_radius {
                        list.insert(w);
                    }
                }
                self.levels.get_mut(&e).unwrap().add_owner(z, list);
                if e + 1 <= self.e_max {
                    let up_radius = self.gamma * two_pow(e + 1);
                    let ups: Vec<PointId> = affected[&(e + 1)]
                        .keys()
                        .copied()
                        .filter(|y| self.levels[&(e + 1)].members.contains(y))
                        .collect();
                    for y in ups {
                        if self.backend.distance_unchecked(&zp, &self.registry[&y]) <= up_radius {
                            self.levels.get_mut(&(e + 1)).unwrap().list_add(y, z);
                        }
                    }
                }
                promoted_now.insert(z, dz);
            }
            promoted_prev = promoted_now;
        }

        // If the old top scale now holds several points (q was the top,
        // or promotions surfaced), grow the ladder until one remains.
        while self.levels[&self.e_max].members.len() > 1 {
            let e_new = self.e_max + 1;
            let r_new = two_pow(e_new);
            let below: Vec<PointId> = self.levels[&self.e_max].members.iter().copied().collect();
            let mut kept: Vec<PointId> = Vec::new();
            for &y in &below {
                let yp = &self.registry[&y];
                let blocked = kept
                    .iter()
                    .any(|&k| self.backend.distance_unchecked(yp, &self.registry[&k]) < r_new);
                if !blocked {
                    kept.push(y);
                }
            }
            let list_radius = self.gamma * r_new;
            let mut level = Level::default();
            for &y in &kept {
                let yp = self.registry[&y].clone();
                let mut list = BTreeSet::new();
                for &z in &below {
                    if self.backend.distance_unchecked(&yp, &self.registry[&z]) <= list_radius {
                        list.insert(z);
                    }
                }
                level.add_owner(y, list);
            }
            self.levels.insert(e_new, level);
            self.e_max = e_new;
        }

        self.normalize_top();
        self.normalize_bottom();
        Ok(())
    }

    /// Drops redundant top scales: while the two highest levels are both
    /// single-point, the upper one carries no information.
    fn normalize_top(&mut self) {
        while self.e_max > self.e_min
            && self.levels[&self.e_max].members.len() == 1
            && self.levels[&(self.e_max - 1)].members.len() == 1
        {
            self.levels.remove(&self.e_max);
            self.e_max -= 1;
        }
    }

    /// Raises the bottom scale while the level above it is still "all
    /// points, all lists singleton" — i.e. still below the minimum
    /// pairwise distance — keeping the bottom exponent maximal.
    fn normalize_bottom(&mut self) {
        while self.e_min < self.e_max {
            let next = &self.levels[&(self.e_min + 1)];
            if next.members.len() == self.registry.len() && next.is_all_singleton() {
                self.levels.remove(&self.e_min);
                self.e_min += 1;
            } else {
                break;
            }
        }
    }

    /// Exhaustively recomputes every structural property from the
    /// registry and reports the first violation found. O(n² · scales);
    /// intended for tests and explicit verification requests.
    pub fn verify_invariants(&self) -> InvariantReport {
        match self.check_invariants() {
            Ok(()) => InvariantReport {
                pass: true,
                first_violation: None,
            },
            Err(msg) => InvariantReport {
                pass: false,
                first_violation: Some(msg),
            },
        }
    }

    fn check_invariants(&self) -> Result<(), String> {
        if self.registry.is_empty() {
            if !self.levels.is_empty() {
                return Err("registry is empty but scales are materialized".to_string());
            }
            return Ok(());
        }
        let keys: Vec<i32> = self.levels.keys().copied().collect();
        let want: Vec<i32> = (self.e_min..=self.e_max).collect();
        if keys != want {
            return Err(format!(
                "materialized exponents {:?} do not form the range [{}, {}]",
                keys, self.e_min, self.e_max
            ));
        }
        for (&e, level) in &self.levels {
            if level.members.len() != level.lists.len()
                || !level.members.iter().all(|y| level.lists.contains_key(y))
            {
                return Err(format!(
                    "scale 2^{e}: member set and list owners disagree"
                ));
            }
            let actual = level.lists.values().filter(|l| l.len() > 1).count();
            if actual != level.nonsingleton_lists {
                return Err(format!(
                    "scale 2^{e}: cached non-singleton list count {} but found {}",
                    level.nonsingleton_lists, actual
                ));
            }
            for y in &level.members {
                if !self.registry.contains_key(y) {
                    return Err(format!("scale 2^{e}: member {y} is not a live point"));
                }
            }
            for (y, list) in &level.lists {
                for z in list {
                    if !self.registry.contains_key(z) {
                        return Err(format!(
                            "scale 2^{e}: list of {y} contains dead id {z}"
                        ));
                    }
                }
            }
        }
        let bottom = &self.levels[&self.e_min];
        if bottom.members.len() != self.registry.len() {
            return Err(format!(
                "bottom scale 2^{} holds {} of {} live points",
                self.e_min,
                bottom.members.len(),
                self.registry.len()
            ));
        }
        if self.levels[&self.e_max].members.len() != 1 {
            return Err(format!(
                "top scale 2^{} holds {} points, expected exactly 1",
                self.e_max,
                self.levels[&self.e_max].members.len()
            ));
        }
        // Nesting.
        for e in (self.e_min + 1)..=self.e_max {
            for y in &self.levels[&e].members {
                if !self.levels[&(e - 1)].members.contains(y) {
                    return Err(format!(
                        "nesting violated: {y} is in the net at 2^{e} but not at 2^{}",
                        e - 1
                    ));
                }
            }
        }
        // Packing: members of one scale are pairwise ≥ that scale apart.
        for (&e, level) in &self.levels {
            let r = two_pow(e);
            let ms: Vec<&MetricPoint> = level.members.iter().map(|y| &self.registry[y]).collect();
            for i in 0..ms.len() {
                for j in (i + 1)..ms.len() {
                    let d = self.backend.distance_unchecked(ms[i], ms[j]);
                    if d < r {
                        return Err(format!(
                            "packing violated at scale 2^{e}: d({}, {}) = {d} < {r}",
                            ms[i].id, ms[j].id
                        ));
                    }
                }
            }
        }
        // Covering: each member one level down is within 2^e of the net.
        for e in (self.e_min + 1)..=self.e_max {
            let r = two_pow(e);
            for z in &self.levels[&(e - 1)].members {
                let zp = &self.registry[z];
                let near = self.levels[&e]
                    .members
                    .iter()
                    .map(|y| self.backend.distance_unchecked(zp, &self.registry[y]))
                    .fold(f64::INFINITY, f64::min);
                if near > r {
                    return Err(format!(
                        "covering violated at scale 2^{e}: {z} is {near} from the net, limit {r}"
                    ));
                }
            }
        }
        // Global covering: every live point is strictly within 2·2^e of
        // the net at every scale.
        for (&e, level) in &self.levels {
            let limit = 2.0 * two_pow(e);
            for (z, zp) in &self.registry {
                let near = level
                    .members
                    .iter()
                    .map(|y| self.backend.distance_unchecked(zp, &self.registry[y]))
                    .fold(f64::INFINITY, f64::min);
                if near >= limit {
                    return Err(format!(
                        "global covering violated at scale 2^{e}: d({z}, net) = {near} >= {limit}"
                    ));
                }
            }
        }
        // Navigation lists: exactly the members one level down within
        // γ·2^e of the owner (the level below the bottom is the whole
        // point set).
        for (&e, level) in &self.levels {
            let radius = self.gamma * two_pow(e);
            let below: Vec<PointId> = if e == self.e_min {
                self.registry.keys().copied().collect()
            } else {
                self.levels[&(e - 1)].members.iter().copied().collect()
            };
            for (y, list) in &level.lists {
                let yp = &self.registry[y];
                let mut expected = BTreeSet::new();
                for z in &below {
                    if self.backend.distance_unchecked(yp, &self.registry[z]) <= radius {
                        expected.insert(*z);
                    }
                }
                if *list != expected {
                    let have: Vec<u64> = list.iter().map(|i| i.0).collect();
                    let want: Vec<u64> = expected.iter().map(|i| i.0).collect();
                    return Err(format!(
                        "navigation list mismatch at scale 2^{e} for owner {y}: has {have:?}, expected {want:?}"
                    ));
                }
            }
        }
        // Band tightness: bottom as high as possible, top as low as
        // possible.
        if self.e_min < self.e_max {
            let next = &self.levels[&(self.e_min + 1)];
            if next.members.len() == self.registry.len() && next.is_all_singleton() {
                return Err(format!(
                    "bottom scale 2^{} is not maximal: the level above is still all points with singleton lists",
                    self.e_min
                ));
            }
            if self.levels[&(self.e_max - 1)].members.len() == 1 {
                return Err(format!(
                    "top scale 2^{} is not minimal: the level below is already a single point",
                    self.e_max
                ));
            }
        }
        Ok(())
    }
}
