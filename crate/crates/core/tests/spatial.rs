use std::collections::BTreeSet;

use glam::{DQuat, DVec3, EulerRot};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vekit::spatial::workload::{random_boxes, random_frustum};
use vekit::spatial::*;

fn overlaps(a: &Aabb, b: &Aabb) -> bool {
    (0..3).all(|i| a.min[i] <= b.max[i] && b.min[i] <= a.max[i])
}

fn pair_oracle(objects: &[(ObjectId, Aabb)]) -> BTreeSet<IdPair> {
    let mut out = BTreeSet::new();
    for i in 0..objects.len() {
        for j in i + 1..objects.len() {
            if overlaps(&objects[i].1, &objects[j].1) {
                let (a, b) = (objects[i].0, objects[j].0);
                out.insert((a.min(b), a.max(b)));
            }
        }
    }
    out
}

/// Slab entry distance, clamped to 0 for rays starting inside.
fn ray_oracle(b: &Aabb, o: DVec3, d: DVec3, max_t: f64) -> Option<f64> {
    let (mut t0, mut t1) = (0.0f64, max_t);
    for i in 0..3 {
        if d[i] == 0.0 {
            if o[i] < b.min[i] || o[i] > b.max[i] {
                return None;
            }
            continue;
        }
        let (a, c) = ((b.min[i] - o[i]) / d[i], (b.max[i] - o[i]) / d[i]);
        t0 = t0.max(a.min(c));
        t1 = t1.min(a.max(c));
    }
    (t0 <= t1).then_some(t0)
}

fn indices(objects: &[(ObjectId, Aabb)]) -> Vec<(IndexKind, Box<dyn SpatialIndex>)> {
    IndexKind::ALL.into_iter().map(|k| (k, build_index(k, objects).unwrap())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn every_query_matches_the_oracle(seed in any::<u64>(), n in 0usize..400) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let objects = random_boxes(&mut rng, n, 60.0);
        let region = Aabb::new(DVec3::ZERO, DVec3::splat(60.0));
        let idx = indices(&objects);

        let pairs = pair_oracle(&objects);
        for (kind, index) in &idx {
            prop_assert_eq!(&index.broadphase_pairs(), &pairs, "{}", kind);
        }
        for _ in 0..5 {
            let f = random_frustum(&mut rng, &region);
            let visible: BTreeSet<ObjectId> =
                objects.iter().filter(|(_, b)| f.intersects_aabb(b)).map(|(id, _)| *id).collect();
            let c = DVec3::new(rng.random_range(0.0..60.0), rng.random_range(0.0..60.0), rng.random_range(0.0..60.0));
            let probe = Aabb::from_center_half_extents(c, DVec3::splat(rng.random_range(0.5..10.0)));
            let inside: BTreeSet<ObjectId> =
                objects.iter().filter(|(_, b)| overlaps(b, &probe)).map(|(id, _)| *id).collect();
            let dir = DVec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                .normalize();
            let mut hits: Vec<(ObjectId, f64)> =
                objects.iter().filter_map(|(id, b)| ray_oracle(b, c, dir, 50.0).map(|t| (*id, t))).collect();
            hits.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            for (kind, index) in &idx {
                prop_assert_eq!(&index.query_frustum(&f), &visible, "{}", kind);
                prop_assert_eq!(&index.query_aabb(&probe), &inside, "{}", kind);
                let got = index.query_ray(c, dir, 50.0);
                prop_assert_eq!(got.len(), hits.len(), "{}", kind);
                for (g, h) in got.iter().zip(&hits) {
                    prop_assert!(g.0 == h.0 && (g.1 - h.1).abs() <= 1e-9, "{}: {:?} vs {:?}", kind, g, h);
                }
            }
        }
    }

    #[test]
    fn trees_contain_what_they_store(seed in any::<u64>(), n in 1usize..300) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let objects = random_boxes(&mut rng, n, 40.0);
        let bvh = Bvh::build(&objects).unwrap();
        prop_assert!(bvh.check_unions());
        prop_assert_eq!(bvh.containment_violations(), 0);

        let octree = Octree::build(&objects, DEFAULT_MAX_DEPTH, DEFAULT_LEAF_CAPACITY).unwrap();
        let mut listed = BTreeSet::new();
        for (cell, _, ids) in octree.leaves() {
            for id in ids {
                prop_assert!(overlaps(&objects[id as usize].1, &cell), "object {} outside its cell", id);
                listed.insert(id);
            }
        }
        prop_assert_eq!(listed.len(), n);
        for (_, bounds) in octree.cells() {
            prop_assert!(bounds.is_valid());
        }

        let bsp = AxisBsp::build(&objects, DEFAULT_MAX_DEPTH + 4, DEFAULT_LEAF_CAPACITY).unwrap();
        let stored: BTreeSet<ObjectId> = bsp.leaves().into_iter().flat_map(|(_, ids)| ids).collect();
        prop_assert_eq!(stored.len(), n);
    }

    #[test]
    fn identical_inputs_dump_identically(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let objects = random_boxes(&mut rng, 120, 30.0);
        for ((_, a), (_, b)) in indices(&objects).iter().zip(indices(&objects).iter()) {
            prop_assert_eq!(a.dump(), b.dump());
        }
    }
}

#[test]
fn large_scene_frustum_visits_under_a_fifth_of_a_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(100_000);
    let objects = random_boxes(&mut rng, 100_000, 2000.0);
    let frustums: Vec<Frustum> = (0..10)
        .map(|_| {
            let eye = DVec3::new(rng.random_range(0.0..2000.0), rng.random_range(0.0..2000.0), rng.random_range(0.0..2000.0));
            let q = DQuat::from_euler(EulerRot::YXZ, rng.random_range(-3.1..3.1), rng.random_range(-1.5..1.5), 0.0);
            Frustum::from_pose(eye, q, 1.0, 1.5, 0.1, 200.0)
        })
        .collect();
    for (kind, index) in indices(&objects) {
        let mut stats = QueryStats::default();
        for f in &frustums {
            index.query_frustum_counted(f, &mut stats);
        }
        let scan = objects.len() * frustums.len();
        assert!(stats.nodes_visited * 5 < scan, "{kind}: {} of {scan}", stats.nodes_visited);
    }
}
