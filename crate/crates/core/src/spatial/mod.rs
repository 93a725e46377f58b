//! Immutable spatial indices over axis-aligned boxes.
//!
//! Three partitioning schemes share one query surface ([`SpatialIndex`]):
//! a loose-bounds [`Octree`], a median-split [`Bvh`] and an axis-aligned
//! [`AxisBsp`]. [`BruteForce`] answers the same queries by scanning every
//! object and serves as the reference they are checked against.
//!
//! Every node of every tree records the union of the boxes stored beneath it,
//! so pruning a subtree never discards an object the per-object test would
//! keep. Frustum results therefore equal the brute-force scan exactly, not
//! merely conservatively.

mod aabb;
mod bsp;
mod bvh;
mod frustum;
mod octree;
pub mod workload;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use glam::DVec3;
use thiserror::Error;

pub use aabb::Aabb;
pub use bsp::AxisBsp;
pub use bvh::Bvh;
pub use frustum::{Frustum, Plane};
pub use octree::Octree;

pub type ObjectId = u32;

/// Unordered pair stored as `(low, high)`.
pub type IdPair = (ObjectId, ObjectId);

#[derive(Debug, Error, PartialEq)]
pub enum SpatialError {
    #[error("object {0} has a non-finite or inverted AABB")]
    InvalidAabb(ObjectId),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Traversal counters, for comparing indices against a linear scan.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryStats {
    pub nodes_visited: usize,
    pub objects_tested: usize,
}

pub trait SpatialIndex: Send + Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn node_count(&self) -> usize;

    fn query_frustum_counted(&self, frustum: &Frustum, stats: &mut QueryStats) -> BTreeSet<ObjectId>;

    /// Ids whose box is not entirely behind any frustum plane.
    fn query_frustum(&self, frustum: &Frustum) -> BTreeSet<ObjectId> {
        self.query_frustum_counted(frustum, &mut QueryStats::default())
    }

    /// Ids whose box overlaps `bounds` (closed intervals).
    fn query_aabb(&self, bounds: &Aabb) -> BTreeSet<ObjectId>;

    /// Box hits along a unit-direction ray, ordered by entry distance then id.
    fn query_ray(&self, origin: DVec3, direction: DVec3, max_t: f64) -> Vec<(ObjectId, f64)>;

    /// All overlapping pairs, touching included.
    fn broadphase_pairs(&self) -> BTreeSet<IdPair>;

    /// One node per line, indented by depth.
    fn dump(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexKind {
    Octree,
    Bvh,
    Bsp,
}

impl IndexKind {
    pub const ALL: [IndexKind; 3] = [IndexKind::Octree, IndexKind::Bvh, IndexKind::Bsp];
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndexKind::Octree => "octree",
            IndexKind::Bvh => "bvh",
            IndexKind::Bsp => "bsp",
        })
    }
}

impl FromStr for IndexKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "octree" => Ok(IndexKind::Octree),
            "bvh" => Ok(IndexKind::Bvh),
            "bsp" => Ok(IndexKind::Bsp),
            other => Err(format!("unknown index kind '{other}' (expected octree, bvh or bsp)")),
        }
    }
}

/// Depth and leaf capacity used when callers do not care.
pub const DEFAULT_MAX_DEPTH: usize = 8;
pub const DEFAULT_LEAF_CAPACITY: usize = 8;

pub fn build_index(kind: IndexKind, objects: &[(ObjectId, Aabb)]) -> Result<Box<dyn SpatialIndex>, SpatialError> {
    Ok(match kind {
        IndexKind::Octree => Box::new(Octree::build(objects, DEFAULT_MAX_DEPTH, DEFAULT_LEAF_CAPACITY)?),
        IndexKind::Bvh => Box::new(Bvh::build(objects)?),
        IndexKind::Bsp => Box::new(AxisBsp::build(objects, DEFAULT_MAX_DEPTH + 4, DEFAULT_LEAF_CAPACITY)?),
    })
}

pub(crate) fn check_objects(objects: &[(ObjectId, Aabb)]) -> Result<(), SpatialError> {
    match objects.iter().find(|(_, b)| !b.is_valid()) {
        Some((id, _)) => Err(SpatialError::InvalidAabb(*id)),
        None => Ok(()),
    }
}

pub(crate) fn ordered_pair(a: ObjectId, b: ObjectId) -> IdPair {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub(crate) fn sort_hits(hits: &mut Vec<(ObjectId, f64)>) {
    hits.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    hits.dedup_by_key(|h| h.0);
}

pub(crate) fn fmt_box(b: &Aabb) -> String {
    use crate::scene_format::format_number as n;
    format!(
        "[{} {} {} .. {} {} {}]",
        n(b.min.x),
        n(b.min.y),
        n(b.min.z),
        n(b.max.x),
        n(b.max.y),
        n(b.max.z)
    )
}

/// Linear scan over all objects. Used as the reference answer for the tree
/// indices.
#[derive(Debug, Clone, Default)]
pub struct BruteForce {
    objects: Vec<(ObjectId, Aabb)>,
}

impl BruteForce {
    pub fn build(objects: &[(ObjectId, Aabb)]) -> Result<Self, SpatialError> {
        check_objects(objects)?;
        Ok(BruteForce { objects: objects.to_vec() })
    }
}

impl SpatialIndex for BruteForce {
    fn len(&self) -> usize {
        self.objects.len()
    }

    fn node_count(&self) -> usize {
        self.objects.len()
    }

    fn query_frustum_counted(&self, frustum: &Frustum, stats: &mut QueryStats) -> BTreeSet<ObjectId> {
        stats.nodes_visited += self.objects.len();
        stats.objects_tested += self.objects.len();
        self.objects.iter().filter(|(_, b)| frustum.intersects_aabb(b)).map(|(id, _)| *id).collect()
    }

    fn query_aabb(&self, bounds: &Aabb) -> BTreeSet<ObjectId> {
        self.objects.iter().filter(|(_, b)| b.overlaps(bounds)).map(|(id, _)| *id).collect()
    }

    fn query_ray(&self, origin: DVec3, direction: DVec3, max_t: f64) -> Vec<(ObjectId, f64)> {
        let mut hits: Vec<_> = self
            .objects
            .iter()
            .filter_map(|(id, b)| b.ray_enter(origin, direction, max_t).map(|t| (*id, t)))
            .collect();
        sort_hits(&mut hits);
        hits
    }

    fn broadphase_pairs(&self) -> BTreeSet<IdPair> {
        let mut out = BTreeSet::new();
        for (i, (a, ba)) in self.objects.iter().enumerate() {
            for (b, bb) in &self.objects[i + 1..] {
                if a != b && ba.overlaps(bb) {
                    out.insert(ordered_pair(*a, *b));
                }
            }
        }
        out
    }

    fn dump(&self) -> String {
        self.objects.iter().map(|(id, b)| format!("object {id} {}\n", fmt_box(b))).collect()
    }
}

#[cfg(test)]
mod tests;
