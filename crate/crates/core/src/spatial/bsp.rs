use std::collections::BTreeSet;
use std::fmt::Write as _;

use glam::DVec3;

use super::octree::union_of;
use super::*;

const AXIS_NAMES: [&str; 3] = ["x", "y", "z"];

#[derive(Debug, Clone)]
enum Node {
    Leaf { bounds: Aabb, items: Vec<u32> },
    Split { bounds: Aabb, axis: usize, at: f64, left: u32, right: u32 },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Split { bounds, .. } => bounds,
        }
    }
}

/// Axis-aligned binary space partition (kd-style). Each split plane sits at
/// the median centroid on the longest axis of the centroid spread; boxes that
/// straddle it go to both sides.
#[derive(Debug, Clone)]
pub struct AxisBsp {
    objects: Vec<(ObjectId, Aabb)>,
    nodes: Vec<Node>,
    region: Option<Aabb>,
    max_depth: usize,
    leaf_capacity: usize,
}

impl AxisBsp {
    pub fn build(objects: &[(ObjectId, Aabb)], max_depth: usize, leaf_capacity: usize) -> Result<Self, SpatialError> {
        if leaf_capacity == 0 {
            return Err(SpatialError::InvalidParameter("leaf_capacity must be >= 1"));
        }
        check_objects(objects)?;
        let region = union_of(objects.iter().map(|(_, b)| *b));
        let mut bsp = AxisBsp { objects: objects.to_vec(), nodes: Vec::new(), region, max_depth, leaf_capacity };
        if let Some(region) = region {
            bsp.build_node(region, (0..objects.len() as u32).collect(), 0);
        }
        Ok(bsp)
    }

    fn build_node(&mut self, region: Aabb, items: Vec<u32>, depth: usize) -> u32 {
        let index = self.nodes.len() as u32;
        let bounds = union_of(items.iter().map(|&i| self.objects[i as usize].1)).expect("node holds items");
        if items.len() <= self.leaf_capacity || depth >= self.max_depth {
            self.nodes.push(Node::Leaf { bounds, items });
            return index;
        }
        let centroids: Vec<DVec3> = items.iter().map(|&i| self.objects[i as usize].1.center()).collect();
        let spread = Aabb::from_points(centroids.iter().copied()).expect("non-empty");
        let axis = if spread.extents().max_element() > 0.0 { spread.longest_axis() } else { region.longest_axis() };
        let at = median(centroids.iter().map(|c| c[axis]).collect()).clamp(region.min[axis], region.max[axis]);

        let (mut left_items, mut right_items) = (Vec::new(), Vec::new());
        for &i in &items {
            let b = &self.objects[i as usize].1;
            if b.min[axis] <= at {
                left_items.push(i);
            }
            if b.max[axis] >= at {
                right_items.push(i);
            }
        }
        if left_items.len() == items.len() && right_items.len() == items.len() {
            // Every box straddles the plane; splitting further cannot separate them.
            self.nodes.push(Node::Leaf { bounds, items });
            return index;
        }
        let (mut left_region, mut right_region) = (region, region);
        left_region.max[axis] = at;
        right_region.min[axis] = at;

        self.nodes.push(Node::Leaf { bounds, items: Vec::new() });
        let left = self.build_side(left_region, left_items, depth + 1);
        let right = self.build_side(right_region, right_items, depth + 1);
        self.nodes[index as usize] = Node::Split { bounds, axis, at, left, right };
        index
    }

    fn build_side(&mut self, region: Aabb, items: Vec<u32>, depth: usize) -> u32 {
        if items.is_empty() {
            let index = self.nodes.len() as u32;
            // Empty leaf: a degenerate box at the region corner, never matched by culling
            // because no object is listed.
            self.nodes.push(Node::Leaf { bounds: Aabb { min: region.min, max: region.min }, items });
            return index;
        }
        self.build_node(region, items, depth)
    }

    /// Region covered by the root (union of all boxes).
    pub fn region(&self) -> Option<Aabb> {
        self.region
    }

    /// `(axis, coordinate)` of the root split, if the root is not a leaf.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes.first()? {
            Node::Split { axis, at, .. } => Some((*axis, *at)),
            Node::Leaf { .. } => None,
        }
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn leaf_capacity(&self) -> usize {
        self.leaf_capacity
    }

    /// `(depth, object ids)` per leaf in left-to-right order.
    pub fn leaves(&self) -> Vec<(usize, Vec<ObjectId>)> {
        let mut out = Vec::new();
        self.walk(|node, depth| {
            if let Node::Leaf { items, .. } = node {
                out.push((depth, items.iter().map(|&i| self.objects[i as usize].0).collect()));
            }
            true
        });
        out
    }

    fn walk<F: FnMut(&Node, usize) -> bool>(&self, mut visit: F) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![(0u32, 0usize)];
        while let Some((i, depth)) = stack.pop() {
            let node = &self.nodes[i as usize];
            if visit(node, depth) {
                if let Node::Split { left, right, .. } = node {
                    stack.push((*right, depth + 1));
                    stack.push((*left, depth + 1));
                }
            }
        }
    }

    fn leaf_items(node: &Node) -> &[u32] {
        match node {
            Node::Leaf { items, .. } => items,
            Node::Split { .. } => &[],
        }
    }
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

impl SpatialIndex for AxisBsp {
    fn len(&self) -> usize {
        self.objects.len()
    }

    fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn query_frustum_counted(&self, frustum: &Frustum, stats: &mut QueryStats) -> BTreeSet<ObjectId> {
        let mut out = BTreeSet::new();
        self.walk(|node, _| {
            stats.nodes_visited += 1;
            let items = Self::leaf_items(node);
            if matches!(node, Node::Leaf { .. }) && items.is_empty() {
                return false;
            }
            if !frustum.intersects_aabb(node.bounds()) {
                return false;
            }
            for &i in items {
                stats.objects_tested += 1;
                let (id, b) = &self.objects[i as usize];
                if frustum.intersects_aabb(b) {
                    out.insert(*id);
                }
            }
            true
        });
        out
    }

    fn query_aabb(&self, bounds: &Aabb) -> BTreeSet<ObjectId> {
        let mut out = BTreeSet::new();
        self.walk(|node, _| {
            if !node.bounds().overlaps(bounds) {
                return false;
            }
            for &i in Self::leaf_items(node) {
                let (id, b) = &self.objects[i as usize];
                if b.overlaps(bounds) {
                    out.insert(*id);
                }
            }
            true
        });
        out
    }

    fn query_ray(&self, origin: DVec3, direction: DVec3, max_t: f64) -> Vec<(ObjectId, f64)> {
        let mut hits = Vec::new();
        self.walk(|node, _| {
            if node.bounds().ray_enter(origin, direction, max_t).is_none() {
                return false;
            }
            for &i in Self::leaf_items(node) {
                let (id, b) = &self.objects[i as usize];
                if let Some(t) = b.ray_enter(origin, direction, max_t) {
                    hits.push((*id, t));
                }
            }
            true
        });
        sort_hits(&mut hits);
        hits
    }

    fn broadphase_pairs(&self) -> BTreeSet<IdPair> {
        let mut out = BTreeSet::new();
        for node in &self.nodes {
            let items = Self::leaf_items(node);
            for (k, &i) in items.iter().enumerate() {
                let (a, ba) = &self.objects[i as usize];
                for &j in &items[k + 1..] {
                    let (b, bb) = &self.objects[j as usize];
                    if a != b && ba.overlaps(bb) {
                        out.insert(ordered_pair(*a, *b));
                    }
                }
            }
        }
        out
    }

    fn dump(&self) -> String {
        let mut out = String::new();
        self.walk(|node, depth| {
            let pad = "  ".repeat(depth);
            match node {
                Node::Leaf { items, .. } => {
                    let ids: Vec<String> = items.iter().map(|&i| self.objects[i as usize].0.to_string()).collect();
                    let _ = writeln!(out, "{pad}leaf ids={}", ids.join(","));
                }
                Node::Split { axis, at, .. } => {
                    let _ = writeln!(
                        out,
                        "{pad}split {}={}",
                        AXIS_NAMES[*axis],
                        crate::scene_format::format_number(*at)
                    );
                }
            }
            true
        });
        out
    }
}
