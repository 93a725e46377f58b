use glam::{DQuat, DVec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn unit_box(c: DVec3) -> Aabb {
    Aabb::from_center_half_extents(c, DVec3::splat(0.5))
}

fn random_boxes(rng: &mut ChaCha8Rng, n: usize, extent: f64) -> Vec<(ObjectId, Aabb)> {
    (0..n as u32)
        .map(|id| {
            let c = DVec3::new(rng.random_range(0.0..extent), rng.random_range(0.0..extent), rng.random_range(0.0..extent));
            let h = DVec3::new(rng.random_range(0.1..2.0), rng.random_range(0.1..2.0), rng.random_range(0.1..2.0));
            (id, Aabb::from_center_half_extents(c, h))
        })
        .collect()
}

fn all_indices(objects: &[(ObjectId, Aabb)]) -> Vec<Box<dyn SpatialIndex>> {
    vec![
        Box::new(Octree::build(objects, 8, 8).unwrap()),
        Box::new(Bvh::build(objects).unwrap()),
        Box::new(AxisBsp::build(objects, 12, 4).unwrap()),
    ]
}

#[test]
fn empty_index_answers_nothing() {
    let f = Frustum::from_pose(DVec3::ZERO, DQuat::IDENTITY, 1.0, 1.0, 0.1, 100.0);
    for index in all_indices(&[]) {
        assert!(index.is_empty());
        assert!(index.query_frustum(&f).is_empty());
        assert!(index.query_ray(DVec3::ZERO, DVec3::Z, 10.0).is_empty());
        assert!(index.broadphase_pairs().is_empty());
        assert!(index.query_aabb(&unit_box(DVec3::ZERO)).is_empty());
    }
}

#[test]
fn single_object_is_single_leaf() {
    let objects = [(7, unit_box(DVec3::ONE))];
    let oct = Octree::build(&objects, 8, 1).unwrap();
    assert_eq!(oct.depth(), 0);
    assert_eq!(oct.leaves().len(), 1);
    let bvh = Bvh::build(&objects).unwrap();
    assert_eq!(bvh.leaf_count(), 1);
}

#[test]
fn two_disjoint_boxes_bvh() {
    let a = unit_box(DVec3::ZERO);
    let b = unit_box(DVec3::new(5.0, 0.0, 0.0));
    let bvh = Bvh::build(&[(0, a), (1, b)]).unwrap();
    assert_eq!(bvh.root_bounds(), Some(a.union(&b)));
    assert_eq!(bvh.leaf_count(), 2);
    assert!(bvh.broadphase_pairs().is_empty());
}

#[test]
fn touching_faces_make_a_pair() {
    let a = Aabb::new(DVec3::ZERO, DVec3::ONE);
    let b = Aabb::new(DVec3::new(1.0, 0.0, 0.0), DVec3::new(2.0, 1.0, 1.0));
    for index in all_indices(&[(0, a), (1, b)]) {
        assert_eq!(index.broadphase_pairs().into_iter().collect::<Vec<_>>(), vec![(0, 1)]);
    }
}

#[test]
fn bsp_first_split_is_median_on_x() {
    let objects: Vec<_> = (1..=8).map(|i| (i as u32, unit_box(DVec3::new(i as f64, 0.0, 0.0)))).collect();
    let bsp = AxisBsp::build(&objects, 8, 2).unwrap();
    let (axis, at) = bsp.root_split().unwrap();
    // Centroids 1..8: even count, median is the mean of 4 and 5.
    let mut xs: Vec<f64> = objects.iter().map(|(_, b)| b.center().x).collect();
    xs.sort_by(f64::total_cmp);
    assert_eq!(axis, 0);
    assert_eq!(at, (xs[3] + xs[4]) / 2.0);
}

#[test]
fn duplicates_are_retained_and_terminate() {
    let objects: Vec<_> = (0..50).map(|i| (i, unit_box(DVec3::splat(3.0)))).collect();
    for index in all_indices(&objects) {
        assert_eq!(index.query_aabb(&unit_box(DVec3::splat(3.0))).len(), 50);
        assert_eq!(index.broadphase_pairs().len(), 50 * 49 / 2);
    }
    let oct = Octree::build(&objects, 5, 4).unwrap();
    assert!(oct.depth() <= 5);
}

#[test]
fn octree_capacity_respected_and_leaves_overlap_their_objects() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let objects: Vec<_> = (0..1000u32)
        .map(|id| {
            let c = DVec3::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0), rng.random_range(0.0..100.0));
            (id, unit_box(c))
        })
        .collect();
    let oct = Octree::build(&objects, 8, 8).unwrap();
    let mut seen = std::collections::BTreeSet::new();
    for (region, depth, ids) in oct.leaves() {
        assert!(ids.len() <= 8 || depth == 8);
        for id in ids {
            assert!(objects[id as usize].1.overlaps(&region));
            seen.insert(id);
        }
    }
    assert_eq!(seen.len(), 1000);
    // Every leaf overlapped by an object lists it.
    let leaves = oct.leaves();
    for (id, b) in objects.iter().step_by(7) {
        for (region, _, ids) in &leaves {
            assert_eq!(b.overlaps(region), ids.contains(id));
        }
    }
}

#[test]
fn ray_orders_by_distance() {
    let a = Aabb::new(DVec3::new(2.0, -1.0, -1.0), DVec3::new(3.0, 1.0, 1.0));
    let b = Aabb::new(DVec3::new(5.0, -1.0, -1.0), DVec3::new(6.0, 1.0, 1.0));
    let objects = [(9, b), (4, a)];
    for index in all_indices(&objects) {
        assert_eq!(index.query_ray(DVec3::ZERO, DVec3::X, 100.0), vec![(4, 2.0), (9, 5.0)]);
        assert!(index.query_ray(DVec3::ZERO, DVec3::Y, 100.0).is_empty());
        assert_eq!(index.query_ray(DVec3::new(2.5, 0.0, 0.0), DVec3::Y, 100.0), vec![(4, 0.0)]);
    }
}

#[test]
fn indices_agree_with_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let objects = random_boxes(&mut rng, 1000, 100.0);
    let brute = BruteForce::build(&objects).unwrap();
    let indices = all_indices(&objects);
    for _ in 0..100 {
        let eye = DVec3::new(rng.random_range(-20.0..120.0), rng.random_range(-20.0..120.0), rng.random_range(-20.0..120.0));
        let q = DQuat::from_euler(
            glam::EulerRot::YXZ,
            rng.random_range(-3.1..3.1),
            rng.random_range(-1.5..1.5),
            rng.random_range(-0.5..0.5),
        );
        let f = Frustum::from_pose(eye, q, rng.random_range(0.3..2.0), rng.random_range(0.5..2.5), 0.1, rng.random_range(5.0..150.0));
        let expected = brute.query_frustum(&f);
        for index in &indices {
            assert_eq!(index.query_frustum(&f), expected);
        }
        let dir = (q * DVec3::Z).normalize();
        let expected = brute.query_ray(eye, dir, 80.0);
        for index in &indices {
            assert_eq!(index.query_ray(eye, dir, 80.0), expected);
        }
    }
    let pairs = brute.broadphase_pairs();
    for index in &indices {
        assert_eq!(index.broadphase_pairs(), pairs);
    }
}

#[test]
fn bvh_nodes_are_exact_unions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let bvh = Bvh::build(&random_boxes(&mut rng, 300, 50.0)).unwrap();
    assert!(bvh.check_unions());
    assert_eq!(bvh.containment_violations(), 0);
}

#[test]
fn dumps_are_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let objects = random_boxes(&mut rng, 64, 20.0);
    for (a, b) in all_indices(&objects).iter().zip(all_indices(&objects).iter()) {
        assert_eq!(a.dump(), b.dump());
        assert!(!a.dump().is_empty());
    }
}

#[test]
fn rejects_bad_input() {
    let bad = Aabb { min: DVec3::ONE, max: DVec3::ZERO };
    assert_eq!(Bvh::build(&[(3, bad)]).unwrap_err(), SpatialError::InvalidAabb(3));
    let nan = Aabb { min: DVec3::splat(f64::NAN), max: DVec3::ONE };
    assert!(Octree::build(&[(1, nan)], 4, 4).is_err());
    assert!(AxisBsp::build(&[], 4, 0).is_err());
}

#[test]
fn frustum_visits_fraction_of_linear_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let objects: Vec<_> = (0..20_000u32)
        .map(|id| {
            let c = DVec3::new(rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0));
            (id, unit_box(c))
        })
        .collect();
    let f = Frustum::from_pose(DVec3::splat(500.0), DQuat::IDENTITY, 0.8, 1.3, 0.1, 100.0);
    for index in all_indices(&objects) {
        let mut stats = QueryStats::default();
        index.query_frustum_counted(&f, &mut stats);
        assert!(stats.nodes_visited + stats.objects_tested < objects.len() / 5, "{stats:?}");
    }
}
