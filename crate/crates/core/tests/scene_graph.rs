use glam::{DMat4, DQuat, DVec3};
use proptest::prelude::*;
use vekit::scene_graph::{NodeId, SceneError, Transform, World};

fn quat() -> impl Strategy<Value = DQuat> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter("non-degenerate", |(x, y, z, w)| (x * x + y * y + z * z + w * w).sqrt() > 0.1)
        .prop_map(|(x, y, z, w)| DQuat::from_xyzw(x, y, z, w).normalize())
}

fn vec3(scale: f64) -> impl Strategy<Value = DVec3> {
    (-scale..scale, -scale..scale, -scale..scale).prop_map(|(x, y, z)| DVec3::new(x, y, z))
}

fn uniform_transform() -> impl Strategy<Value = Transform> {
    (vec3(10.0), quat(), 0.25f64..2.0).prop_map(|(p, q, s)| Transform::new(p, q, DVec3::splat(s)))
}

fn any_transform() -> impl Strategy<Value = Transform> {
    (vec3(10.0), quat(), vec3(1.0)).prop_map(|(p, q, s)| Transform::new(p, q, s.abs() + DVec3::splat(0.1)))
}

fn matrix(t: &Transform) -> DMat4 {
    DMat4::from_translation(t.position) * DMat4::from_quat(t.orientation) * DMat4::from_scale(t.scale)
}

/// Root of `id` by walking parent links, or `None` if the walk loops.
fn root_of(world: &World, id: NodeId) -> Option<NodeId> {
    let mut cur = id;
    for _ in 0..=world.len() {
        match world.node(cur).unwrap().parent {
            None => return Some(cur),
            Some(p) => cur = p,
        }
    }
    None
}

fn in_subtree(world: &World, id: NodeId, top: NodeId) -> bool {
    let mut cur = Some(id);
    while let Some(c) = cur {
        if c == top {
            return true;
        }
        cur = world.node(c).unwrap().parent;
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn chain_matches_matrix_product(locals in proptest::collection::vec(uniform_transform(), 5)) {
        let mut w = World::default();
        let mut parent = None;
        let mut oracle = DMat4::IDENTITY;
        for (i, t) in locals.iter().enumerate() {
            parent = Some(w.add_node(&format!("n{i}"), *t, parent).unwrap());
            oracle *= matrix(t);
        }
        let got = w.world_transform(parent.unwrap()).unwrap().to_matrix();
        for (a, b) in got.to_cols_array().iter().zip(oracle.to_cols_array()) {
            prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", got, oracle);
        }
    }

    #[test]
    fn identity_parent_passes_local_through(local in any_transform()) {
        let mut w = World::default();
        let p = w.add_node("p", Transform::IDENTITY, None).unwrap();
        let c = w.add_node("c", local, Some(p)).unwrap();
        prop_assert_eq!(w.world_transform(c).unwrap(), local);
    }

    #[test]
    fn reparenting_keeps_a_forest(
        parents in proptest::collection::vec(proptest::option::of(0usize..12), 12),
        moves in proptest::collection::vec((0usize..12, proptest::option::of(0usize..12)), 40),
    ) {
        let mut w = World::default();
        let mut ids = Vec::new();
        for (i, p) in parents.iter().enumerate() {
            let parent = p.filter(|&p| p < i).map(|p| ids[p]);
            ids.push(w.add_node(&format!("n{i}"), Transform::IDENTITY, parent).unwrap());
        }
        for (child, parent) in moves {
            let (child, parent) = (ids[child], parent.map(|p| ids[p]));
            let would_cycle = parent.is_some_and(|p| in_subtree(&w, p, child));
            match w.reparent(child, parent) {
                Err(SceneError::Cycle { .. }) => prop_assert!(would_cycle),
                Err(e) => prop_assert!(false, "{e}"),
                Ok(()) => prop_assert!(!would_cycle),
            }
        }
        let mut reached = vec![0usize; ids.len()];
        let mut stack: Vec<NodeId> = w.roots().to_vec();
        while let Some(n) = stack.pop() {
            reached[n.0 as usize] += 1;
            stack.extend(w.node(n).unwrap().children.iter().copied());
        }
        prop_assert!(reached.iter().all(|&r| r == 1), "{:?}", reached);
        for &id in &ids {
            let root = root_of(&w, id);
            prop_assert!(root.is_some_and(|r| w.roots().contains(&r)));
        }
    }

    #[test]
    fn edits_stay_inside_the_subtree(
        locals in proptest::collection::vec(any_transform(), 10),
        parents in proptest::collection::vec(proptest::option::of(0usize..10), 10),
        edited in 0usize..10,
        replacement in any_transform(),
    ) {
        let mut w = World::default();
        let mut ids = Vec::new();
        for (i, (t, p)) in locals.iter().zip(&parents).enumerate() {
            let parent = p.filter(|&p| p < i).map(|p| ids[p]);
            ids.push(w.add_node(&format!("n{i}"), *t, parent).unwrap());
        }
        let before: Vec<Transform> = ids.iter().map(|&id| w.world_transform(id).unwrap()).collect();
        w.set_local_transform(ids[edited], replacement).unwrap();
        for (i, &id) in ids.iter().enumerate() {
            if !in_subtree(&w, id, ids[edited]) {
                prop_assert_eq!(w.world_transform(id).unwrap(), before[i]);
            }
        }
    }
}

#[test]
fn invalid_transforms_are_rejected() {
    let mut w = World::default();
    let squashed = Transform::new(DVec3::ZERO, DQuat::IDENTITY, DVec3::new(1.0, 0.0, 1.0));
    assert!(w.add_node("a", squashed, None).is_err());
    let unnormalized = Transform::new(DVec3::ZERO, DQuat::from_xyzw(0.0, 0.0, 0.0, 2.0), DVec3::ONE);
    assert!(w.add_node("b", unnormalized, None).is_err());
    assert!(w.is_empty());
}
