use std::collections::BTreeSet;
use std::fmt::Write as _;

use glam::DVec3;

use super::*;

#[derive(Debug, Clone)]
enum Node {
    Leaf { slot: u32, bounds: Aabb },
    Internal { bounds: Aabb, left: u32, right: u32 },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Internal { bounds, .. } => bounds,
        }
    }
}

/// Binary bounding volume hierarchy with one object per leaf, built by
/// recursive median split on the longest axis of the centroid bounds.
#[derive(Debug, Clone)]
pub struct Bvh {
    objects: Vec<(ObjectId, Aabb)>,
    nodes: Vec<Node>,
}

impl Bvh {
    pub fn build(objects: &[(ObjectId, Aabb)]) -> Result<Self, SpatialError> {
        check_objects(objects)?;
        let mut bvh = Bvh { objects: objects.to_vec(), nodes: Vec::with_capacity(2 * objects.len()) };
        if !objects.is_empty() {
            let mut slots: Vec<u32> = (0..objects.len() as u32).collect();
            bvh.build_node(&mut slots);
        }
        Ok(bvh)
    }

    fn build_node(&mut self, slots: &mut [u32]) -> u32 {
        let index = self.nodes.len() as u32;
        if let [slot] = *slots {
            let bounds = self.objects[slot as usize].1;
            self.nodes.push(Node::Leaf { slot, bounds });
            return index;
        }
        // Placeholder, patched once both children exist.
        self.nodes.push(Node::Leaf { slot: u32::MAX, bounds: self.objects[slots[0] as usize].1 });
        let centroid = |s: u32| self.objects[s as usize].1.center();
        let cb = Aabb::from_points(slots.iter().map(|&s| centroid(s))).expect("non-empty");
        let axis = cb.longest_axis();
        let objects = &self.objects;
        slots.sort_by(|&a, &b| {
            objects[a as usize].1.center()[axis]
                .total_cmp(&objects[b as usize].1.center()[axis])
                .then(a.cmp(&b))
        });
        let mid = slots.len() / 2;
        let (lo, hi) = slots.split_at_mut(mid);
        let left = self.build_node(lo);
        let right = self.build_node(hi);
        let bounds = self.nodes[left as usize].bounds().union(self.nodes[right as usize].bounds());
        self.nodes[index as usize] = Node::Internal { bounds, left, right };
        index
    }

    pub fn root_bounds(&self) -> Option<Aabb> {
        self.nodes.first().map(|n| *n.bounds())
    }

    /// Number of leaves (equals the number of objects).
    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// True iff every internal node's box is exactly the union of its children.
    pub fn check_unions(&self) -> bool {
        self.nodes.iter().all(|n| match n {
            Node::Leaf { .. } => true,
            Node::Internal { bounds, left, right } => {
                *bounds == self.nodes[*left as usize].bounds().union(self.nodes[*right as usize].bounds())
            }
        })
    }

    /// Ancestor/descendant box pairs violating containment, expected empty.
    pub fn containment_violations(&self) -> usize {
        let mut bad = 0;
        for n in &self.nodes {
            if let Node::Internal { bounds, left, right } = n {
                for c in [left, right] {
                    if !bounds.contains(self.nodes[*c as usize].bounds()) {
                        bad += 1;
                    }
                }
            }
        }
        bad
    }

    fn walk<F: FnMut(&Node, usize) -> bool>(&self, mut visit: F) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![(0u32, 0usize)];
        while let Some((i, depth)) = stack.pop() {
            let node = &self.nodes[i as usize];
            if visit(node, depth) {
                if let Node::Internal { left, right, .. } = node {
                    stack.push((*right, depth + 1));
                    stack.push((*left, depth + 1));
                }
            }
        }
    }

    fn cross_pairs(&self, a: u32, b: u32, out: &mut BTreeSet<IdPair>) {
        let (na, nb) = (&self.nodes[a as usize], &self.nodes[b as usize]);
        if !na.bounds().overlaps(nb.bounds()) {
            return;
        }
        match (na, nb) {
            (Node::Leaf { slot: sa, .. }, Node::Leaf { slot: sb, .. }) => {
                let (ia, ib) = (self.objects[*sa as usize].0, self.objects[*sb as usize].0);
                if ia != ib {
                    out.insert(ordered_pair(ia, ib));
                }
            }
            (Node::Internal { left, right, .. }, Node::Leaf { .. }) => {
                self.cross_pairs(*left, b, out);
                self.cross_pairs(*right, b, out);
            }
            (_, Node::Internal { left, right, .. }) => {
                self.cross_pairs(a, *left, out);
                self.cross_pairs(a, *right, out);
            }
        }
    }

    fn self_pairs(&self, n: u32, out: &mut BTreeSet<IdPair>) {
        if let Node::Internal { left, right, .. } = &self.nodes[n as usize] {
            self.self_pairs(*left, out);
            self.self_pairs(*right, out);
            self.cross_pairs(*left, *right, out);
        }
    }
}

impl SpatialIndex for Bvh {
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
            if !frustum.intersects_aabb(node.bounds()) {
                return false;
            }
            if let Node::Leaf { slot, .. } = node {
                stats.objects_tested += 1;
                out.insert(self.objects[*slot as usize].0);
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
            if let Node::Leaf { slot, .. } = node {
                out.insert(self.objects[*slot as usize].0);
            }
            true
        });
        out
    }

    fn query_ray(&self, origin: DVec3, direction: DVec3, max_t: f64) -> Vec<(ObjectId, f64)> {
        let mut hits = Vec::new();
        self.walk(|node, _| match node.bounds().ray_enter(origin, direction, max_t) {
            None => false,
            Some(t) => {
                if let Node::Leaf { slot, .. } = node {
                    hits.push((self.objects[*slot as usize].0, t));
                }
                true
            }
        });
        sort_hits(&mut hits);
        hits
    }

    fn broadphase_pairs(&self) -> BTreeSet<IdPair> {
        let mut out = BTreeSet::new();
        if !self.nodes.is_empty() {
            self.self_pairs(0, &mut out);
        }
        out
    }

    fn dump(&self) -> String {
        let mut out = String::new();
        self.walk(|node, depth| {
            let pad = "  ".repeat(depth);
            match node {
                Node::Leaf { slot, bounds } => {
                    let _ = writeln!(out, "{pad}leaf {} id={}", fmt_box(bounds), self.objects[*slot as usize].0);
                }
                Node::Internal { bounds, .. } => {
                    let _ = writeln!(out, "{pad}node {}", fmt_box(bounds));
                }
            }
            true
        });
        out
    }
}
