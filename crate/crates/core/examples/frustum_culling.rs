//! Build each spatial index over the same random boxes and compare their
//! frustum answers and traversal cost against a linear scan.

use glam::{DQuat, DVec3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vekit::spatial::workload::random_boxes;
use vekit::spatial::*;

fn main() -> Result<(), SpatialError> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let objects = random_boxes(&mut rng, 50_000, 1000.0);
    let eye = DVec3::new(500.0, 500.0, 200.0);
    let frustum = Frustum::from_pose(eye, DQuat::from_rotation_y(0.3), 1.0, 16.0 / 9.0, 0.1, 250.0);

    let brute = BruteForce::build(&objects)?;
    let expected = brute.query_frustum(&frustum);
    println!("{} of {} boxes visible", expected.len(), objects.len());

    for kind in IndexKind::ALL {
        let index = build_index(kind, &objects)?;
        let mut stats = QueryStats::default();
        let visible = index.query_frustum_counted(&frustum, &mut stats);
        println!(
            "{kind:>6}: {} nodes, visited {} nodes and tested {} boxes, same set: {}",
            index.node_count(),
            stats.nodes_visited,
            stats.objects_tested,
            visible == expected
        );
    }

    let dense = random_boxes(&mut rng, 2000, 100.0);
    let bvh = Bvh::build(&dense)?;
    println!("broadphase over 2000 boxes in a 100 m cube: {} overlapping pairs", bvh.broadphase_pairs().len());
    let hits = bvh.query_ray(DVec3::ZERO, DVec3::ONE.normalize(), 200.0);
    println!("diagonal ray hits {} boxes, first {:?}", hits.len(), hits.first());
    Ok(())
}
