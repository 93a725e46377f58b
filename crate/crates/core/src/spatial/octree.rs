use std::collections::BTreeSet;
use std::fmt::Write as _;

use glam::DVec3;

use super::*;

/// Root cell margin around the union of all boxes.
const ROOT_INFLATION: f64 = 1e-6;

#[derive(Debug, Clone)]
struct Cell {
    region: Aabb,
    /// Union of every box stored in this subtree.
    bounds: Aabb,
    depth: usize,
    children: [Option<u32>; 8],
    /// Object slots, only filled in leaves.
    items: Vec<u32>,
}

impl Cell {
    fn is_leaf(&self) -> bool {
        self.children.iter().all(Option::is_none)
    }
}

/// Octree whose cells split into octants when they hold more than
/// `leaf_capacity` objects. A box straddling cell boundaries is stored in
/// every leaf it overlaps.
#[derive(Debug, Clone)]
pub struct Octree {
    objects: Vec<(ObjectId, Aabb)>,
    cells: Vec<Cell>,
    max_depth: usize,
    leaf_capacity: usize,
}

impl Octree {
    pub fn build(objects: &[(ObjectId, Aabb)], max_depth: usize, leaf_capacity: usize) -> Result<Self, SpatialError> {
        if leaf_capacity == 0 {
            return Err(SpatialError::InvalidParameter("leaf_capacity must be >= 1"));
        }
        check_objects(objects)?;
        let mut tree = Octree { objects: objects.to_vec(), cells: Vec::new(), max_depth, leaf_capacity };
        if let Some(root) = union_of(objects.iter().map(|(_, b)| *b)) {
            let items: Vec<u32> = (0..objects.len() as u32).collect();
            tree.build_cell(root.inflate(ROOT_INFLATION), items, 0);
        }
        Ok(tree)
    }

    fn build_cell(&mut self, region: Aabb, items: Vec<u32>, depth: usize) -> u32 {
        let bounds = union_of(items.iter().map(|&i| self.objects[i as usize].1)).expect("cell holds items");
        let index = self.cells.len() as u32;
        self.cells.push(Cell { region, bounds, depth, children: [None; 8], items: Vec::new() });
        if items.len() <= self.leaf_capacity || depth >= self.max_depth {
            self.cells[index as usize].items = items;
            return index;
        }
        let c = region.center();
        let mut octants = Vec::with_capacity(8);
        for octant in 0..8 {
            let pick = |bit: usize, axis: usize| {
                if octant & bit == 0 {
                    (region.min[axis], c[axis])
                } else {
                    (c[axis], region.max[axis])
                }
            };
            let (x0, x1) = pick(1, 0);
            let (y0, y1) = pick(2, 1);
            let (z0, z1) = pick(4, 2);
            let child_region = Aabb::new(DVec3::new(x0, y0, z0), DVec3::new(x1, y1, z1));
            let child_items: Vec<u32> =
                items.iter().copied().filter(|&i| self.objects[i as usize].1.overlaps(&child_region)).collect();
            if !child_items.is_empty() {
                octants.push((octant, child_region, child_items));
            }
        }
        // Boxes covering the cell's centre land in every octant; splitting them
        // again only multiplies cells, so the cell stays a leaf.
        if octants.len() > 1 && octants.iter().all(|(_, _, ci)| ci.len() == items.len()) {
            self.cells[index as usize].items = items;
            return index;
        }
        for (octant, child_region, child_items) in octants {
            let child = self.build_cell(child_region, child_items, depth + 1);
            self.cells[index as usize].children[octant] = Some(child);
        }
        index
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn leaf_capacity(&self) -> usize {
        self.leaf_capacity
    }

    /// Deepest level reached by any cell (0 for a single leaf).
    pub fn depth(&self) -> usize {
        self.cells.iter().map(|c| c.depth).max().unwrap_or(0)
    }

    /// `(region, depth, object ids)` for every leaf, in construction order.
    pub fn leaves(&self) -> Vec<(Aabb, usize, Vec<ObjectId>)> {
        self.cells
            .iter()
            .filter(|c| c.is_leaf())
            .map(|c| (c.region, c.depth, c.items.iter().map(|&i| self.objects[i as usize].0).collect()))
            .collect()
    }

    /// `(region, bounds)` for every cell, used by containment checks.
    pub fn cells(&self) -> Vec<(Aabb, Aabb)> {
        self.cells.iter().map(|c| (c.region, c.bounds)).collect()
    }

    fn walk<F: FnMut(&Cell) -> bool>(&self, mut visit: F) {
        if self.cells.is_empty() {
            return;
        }
        let mut stack = vec![0u32];
        while let Some(i) = stack.pop() {
            let cell = &self.cells[i as usize];
            if visit(cell) {
                stack.extend(cell.children.iter().rev().flatten());
            }
        }
    }
}

pub(crate) fn union_of(boxes: impl IntoIterator<Item = Aabb>) -> Option<Aabb> {
    boxes.into_iter().reduce(|a, b| a.union(&b))
}

impl SpatialIndex for Octree {
    fn len(&self) -> usize {
        self.objects.len()
    }

    fn node_count(&self) -> usize {
        self.cells.len()
    }

    fn query_frustum_counted(&self, frustum: &Frustum, stats: &mut QueryStats) -> BTreeSet<ObjectId> {
        let mut out = BTreeSet::new();
        self.walk(|cell| {
            stats.nodes_visited += 1;
            if !frustum.intersects_aabb(&cell.bounds) {
                return false;
            }
            for &i in &cell.items {
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
        self.walk(|cell| {
            if !cell.bounds.overlaps(bounds) {
                return false;
            }
            for &i in &cell.items {
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
        self.walk(|cell| {
            if cell.bounds.ray_enter(origin, direction, max_t).is_none() {
                return false;
            }
            for &i in &cell.items {
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
        for cell in self.cells.iter().filter(|c| c.is_leaf()) {
            for (k, &i) in cell.items.iter().enumerate() {
                let (a, ba) = &self.objects[i as usize];
                for &j in &cell.items[k + 1..] {
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
        self.walk(|cell| {
            let pad = "  ".repeat(cell.depth);
            if cell.is_leaf() {
                let ids: Vec<String> = cell.items.iter().map(|&i| self.objects[i as usize].0.to_string()).collect();
                let _ = writeln!(out, "{pad}leaf {} ids={}", fmt_box(&cell.region), ids.join(","));
            } else {
                let _ = writeln!(out, "{pad}cell {}", fmt_box(&cell.region));
            }
            true
        });
        out
    }
}
