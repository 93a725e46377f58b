use std::collections::BTreeSet;

use glam::{DMat3, DQuat, DVec3};

use super::geometry::any_perpendicular;
use super::narrowphase::{core_proximity, manifold, pair_cores, proximity, ManifoldPoint, Proximity};
use super::shape::{CollisionShape, Core, Pose};
use super::PhysicsError;
use crate::scene_graph::NodeId;
use crate::spatial::{Aabb, Bvh, ObjectId, SpatialIndex};

pub type BodyId = u32;

/// Every group bit set.
pub const ALL_GROUPS: u32 = u32::MAX;

/// Conservative-advancement stopping distance for sweeps.
pub const SWEEP_TOLERANCE: f64 = 1e-4;

const MAX_ADVANCEMENT_STEPS: usize = 64;
/// Closing speeds below this do not bounce.
const RESTITUTION_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyKind {
    Static,
    Dynamic,
    Kinematic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub friction: f64,
    pub restitution: f64,
}

impl Default for Material {
    fn default() -> Self {
        Material { friction: 0.5, restitution: 0.0 }
    }
}

#[derive(Debug, Clone)]
pub struct BodyDesc {
    pub kind: BodyKind,
    pub shape: CollisionShape,
    pub pose: Pose,
    /// Required for dynamic bodies, ignored otherwise.
    pub mass: Option<f64>,
    pub material: Material,
    pub skin_width: f64,
    pub group: u8,
    pub linked_node: Option<NodeId>,
}

impl BodyDesc {
    pub fn new(kind: BodyKind, shape: CollisionShape, pose: Pose) -> Self {
        BodyDesc {
            kind,
            shape,
            pose,
            mass: None,
            material: Material::default(),
            skin_width: crate::scene_format::DEFAULT_SKIN_WIDTH,
            group: 0,
            linked_node: None,
        }
    }

    pub fn dynamic(shape: CollisionShape, pose: Pose, mass: f64) -> Self {
        BodyDesc { mass: Some(mass), ..BodyDesc::new(BodyKind::Dynamic, shape, pose) }
    }

    pub fn fixed(shape: CollisionShape, pose: Pose) -> Self {
        BodyDesc::new(BodyKind::Static, shape, pose)
    }

    pub fn with_group(mut self, group: u8) -> Self {
        self.group = group;
        self
    }

    pub fn with_material(mut self, material: Material) -> Self {
        self.material = material;
        self
    }

    pub fn with_skin(mut self, skin: f64) -> Self {
        self.skin_width = skin;
        self
    }

    pub fn with_node(mut self, node: NodeId) -> Self {
        self.linked_node = Some(node);
        self
    }
}

#[derive(Debug, Clone)]
pub struct RigidBody {
    pub id: BodyId,
    pub kind: BodyKind,
    pub shape: CollisionShape,
    pub pose: Pose,
    pub linear_velocity: DVec3,
    pub angular_velocity: DVec3,
    /// Zero for static and kinematic bodies.
    pub mass: f64,
    pub inverse_inertia: DMat3,
    pub material: Material,
    pub skin_width: f64,
    pub group: u8,
    pub linked_node: Option<NodeId>,
    inv_mass: f64,
    pose_generation: u64,
}

impl RigidBody {
    pub fn inverse_mass(&self) -> f64 {
        self.inv_mass
    }

    /// Incremented every time the pose is written.
    pub fn pose_generation(&self) -> u64 {
        self.pose_generation
    }

    pub fn aabb(&self) -> Aabb {
        self.shape.aabb(&self.pose)
    }

    fn world_inverse_inertia(&self) -> DMat3 {
        if self.inv_mass == 0.0 {
            return DMat3::ZERO;
        }
        let r = DMat3::from_quat(self.pose.orientation);
        r * self.inverse_inertia * r.transpose()
    }

    fn velocity_at(&self, r: DVec3) -> DVec3 {
        self.linear_velocity + self.angular_velocity.cross(r)
    }
}

/// Contact between two bodies; `normal` points from `body_a` into `body_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    pub body_a: BodyId,
    pub body_b: BodyId,
    pub point: DVec3,
    pub normal: DVec3,
    pub penetration_depth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitReport {
    pub source: BodyId,
    pub other: BodyId,
    pub other_group: u8,
    /// Unit vector from `source` into `other`.
    pub normal: DVec3,
    /// Impulse delivered to `other`.
    pub applied_impulse: DVec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub iterations: usize,
    /// Fraction of excess penetration removed per step.
    pub baumgarte: f64,
    pub slop: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { iterations: 8, baumgarte: 0.2, slop: 0.005 }
    }
}

#[derive(Debug, Clone)]
pub struct SweepQuery<'a> {
    pub shape: &'a CollisionShape,
    pub pose: Pose,
    pub displacement: DVec3,
    /// Groups the sweep may hit.
    pub group_mask: u32,
    pub exclude: &'a [BodyId],
    /// The swept shape stops when it comes within this distance.
    pub skin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepHit {
    /// Fraction of the displacement travelled before the hit.
    pub t: f64,
    /// Surface normal of the obstacle, pointing back toward the swept shape.
    pub normal: DVec3,
    pub other: BodyId,
    /// Contact point on the obstacle's surface.
    pub point: DVec3,
}

#[derive(Debug, Clone)]
struct ContactPoint {
    a: usize,
    b: usize,
    normal: DVec3,
    separation: f64,
    ra: DVec3,
    rb: DVec3,
    tangents: [DVec3; 2],
    normal_mass: f64,
    tangent_mass: [f64; 2],
    target: f64,
    friction: f64,
    normal_impulse: f64,
    tangent_impulse: [f64; 2],
    pair: usize,
}

#[derive(Debug, Clone)]
pub struct PhysicsWorld {
    gravity: DVec3,
    bodies: Vec<Option<RigidBody>>,
    group_matrix: [u32; 32],
    pub solver: SolverConfig,
    events: Vec<HitReport>,
}

impl PhysicsWorld {
    pub fn new(gravity: DVec3) -> Self {
        PhysicsWorld { gravity, bodies: Vec::new(), group_matrix: [ALL_GROUPS; 32], solver: SolverConfig::default(), events: Vec::new() }
    }

    pub fn gravity(&self) -> DVec3 {
        self.gravity
    }

    pub fn set_gravity(&mut self, gravity: DVec3) {
        self.gravity = gravity;
    }

    pub fn add_body(&mut self, desc: BodyDesc) -> Result<BodyId, PhysicsError> {
        desc.shape.validate()?;
        if !desc.pose.is_finite() || !desc.skin_width.is_finite() || desc.skin_width < 0.0 {
            return Err(PhysicsError::NonFinite);
        }
        if desc.group > 31 {
            return Err(PhysicsError::GroupOutOfRange(desc.group as u32));
        }
        let m = desc.material;
        if !(0.0..=1.0).contains(&m.friction) || !(0.0..=1.0).contains(&m.restitution) {
            return Err(PhysicsError::InvalidShape("material coefficients must lie in [0, 1]".into()));
        }
        let (mass, inv_mass, inverse_inertia) = match desc.kind {
            BodyKind::Dynamic => {
                if matches!(desc.shape, CollisionShape::TriMesh(_)) {
                    return Err(PhysicsError::InvalidShape("triangle meshes may only be static".into()));
                }
                let mass = desc.mass.ok_or_else(|| PhysicsError::InvalidMass("dynamic body needs a mass".into()))?;
                if !(mass.is_finite() && mass > 0.0) {
                    return Err(PhysicsError::InvalidMass(format!("mass must be positive, got {mass}")));
                }
                (mass, 1.0 / mass, desc.shape.inverse_inertia(mass))
            }
            BodyKind::Static | BodyKind::Kinematic => (0.0, 0.0, DMat3::ZERO),
        };
        let id = self.bodies.len() as BodyId;
        let orientation = desc.pose.orientation.normalize();
        self.bodies.push(Some(RigidBody {
            id,
            kind: desc.kind,
            shape: desc.shape,
            pose: Pose::new(desc.pose.position, orientation),
            linear_velocity: DVec3::ZERO,
            angular_velocity: DVec3::ZERO,
            mass,
            inverse_inertia,
            material: desc.material,
            skin_width: desc.skin_width,
            group: desc.group,
            linked_node: desc.linked_node,
            inv_mass,
            pose_generation: 0,
        }));
        Ok(id)
    }

    /// Removes a body. Ids of other bodies are unaffected and never reused.
    pub fn remove_body(&mut self, id: BodyId) -> Result<RigidBody, PhysicsError> {
        self.bodies.get_mut(id as usize).and_then(Option::take).ok_or(PhysicsError::UnknownBody(id))
    }

    pub fn body(&self, id: BodyId) -> Option<&RigidBody> {
        self.bodies.get(id as usize).and_then(Option::as_ref)
    }

    fn body_mut(&mut self, id: BodyId) -> Result<&mut RigidBody, PhysicsError> {
        self.bodies.get_mut(id as usize).and_then(Option::as_mut).ok_or(PhysicsError::UnknownBody(id))
    }

    /// Live bodies in ascending id order.
    pub fn bodies(&self) -> impl Iterator<Item = &RigidBody> {
        self.bodies.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.bodies().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Moves a kinematic or dynamic body.
    pub fn set_pose(&mut self, id: BodyId, pose: Pose) -> Result<(), PhysicsError> {
        if !pose.is_finite() {
            return Err(PhysicsError::NonFinite);
        }
        let body = self.body_mut(id)?;
        if body.kind == BodyKind::Static {
            return Err(PhysicsError::ImmovableBody(id));
        }
        body.pose = Pose::new(pose.position, pose.orientation.normalize());
        body.pose_generation += 1;
        Ok(())
    }

    /// Replaces the shape of a kinematic body.
    pub fn set_shape(&mut self, id: BodyId, shape: CollisionShape) -> Result<(), PhysicsError> {
        shape.validate()?;
        let body = self.body_mut(id)?;
        if body.kind != BodyKind::Kinematic {
            return Err(PhysicsError::ImmovableBody(id));
        }
        body.shape = shape;
        Ok(())
    }

    pub fn set_linear_velocity(&mut self, id: BodyId, v: DVec3) -> Result<(), PhysicsError> {
        if !v.is_finite() {
            return Err(PhysicsError::NonFinite);
        }
        let body = self.body_mut(id)?;
        if body.kind == BodyKind::Dynamic {
            body.linear_velocity = v;
        }
        Ok(())
    }

    pub fn set_angular_velocity(&mut self, id: BodyId, w: DVec3) -> Result<(), PhysicsError> {
        if !w.is_finite() {
            return Err(PhysicsError::NonFinite);
        }
        let body = self.body_mut(id)?;
        if body.kind == BodyKind::Dynamic {
            body.angular_velocity = w;
        }
        Ok(())
    }

    pub fn set_material(&mut self, id: BodyId, material: Material) -> Result<(), PhysicsError> {
        self.body_mut(id)?.material = material;
        Ok(())
    }

    /// Applies an impulse at a world point. Returns false (and does nothing)
    /// for static and kinematic bodies.
    pub fn apply_impulse(&mut self, id: BodyId, impulse: DVec3, point: DVec3) -> Result<bool, PhysicsError> {
        if !impulse.is_finite() || !point.is_finite() {
            return Err(PhysicsError::NonFinite);
        }
        let body = self.body_mut(id)?;
        if body.kind != BodyKind::Dynamic {
            return Ok(false);
        }
        let r = point - body.pose.position;
        let inv_i = body.world_inverse_inertia();
        body.linear_velocity += impulse * body.inv_mass;
        body.angular_velocity += inv_i * r.cross(impulse);
        Ok(true)
    }

    pub fn set_group_interaction(&mut self, g1: u32, g2: u32, enabled: bool) -> Result<(), PhysicsError> {
        for g in [g1, g2] {
            if g > 31 {
                return Err(PhysicsError::GroupOutOfRange(g));
            }
        }
        if enabled {
            self.group_matrix[g1 as usize] |= 1 << g2;
            self.group_matrix[g2 as usize] |= 1 << g1;
        } else {
            self.group_matrix[g1 as usize] &= !(1 << g2);
            self.group_matrix[g2 as usize] &= !(1 << g1);
        }
        Ok(())
    }

    pub fn groups_interact(&self, g1: u8, g2: u8) -> bool {
        g1 < 32 && g2 < 32 && self.group_matrix[g1 as usize] & (1 << g2) != 0
    }

    /// Bit mask of the groups `group` interacts with.
    pub fn interaction_mask(&self, group: u8) -> u32 {
        self.group_matrix.get(group as usize).copied().unwrap_or(0)
    }

    /// Hit reports produced by the last step.
    pub fn events(&self) -> &[HitReport] {
        &self.events
    }

    /// Advances the simulation by `dt`. On a non-finite result the world is
    /// restored to its state before the call.
    pub fn step(&mut self, dt: f64) -> Result<Vec<HitReport>, PhysicsError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(PhysicsError::InvalidTimeStep(dt));
        }
        let snapshot = self.bodies.clone();
        match self.step_inner(dt) {
            Ok(events) => {
                self.events = events.clone();
                Ok(events)
            }
            Err(e) => {
                self.bodies = snapshot;
                self.events.clear();
                Err(e)
            }
        }
    }

    fn step_inner(&mut self, dt: f64) -> Result<Vec<HitReport>, PhysicsError> {
        let g = self.gravity;
        for body in self.bodies.iter_mut().flatten() {
            if body.kind == BodyKind::Dynamic {
                body.linear_velocity += g * dt;
            }
        }

        let pairs = self.candidate_pairs();
        let mut points = Vec::new();
        let mut pair_ids = Vec::new();
        for (ia, ib) in pairs {
            let (a, b) = (self.bodies[ia].as_ref().unwrap(), self.bodies[ib].as_ref().unwrap());
            let margin = a.skin_width.max(b.skin_width);
            let m = manifold(&a.shape, &a.pose, &b.shape, &b.pose, margin)?;
            if m.is_empty() {
                continue;
            }
            let pair = pair_ids.len();
            pair_ids.push((ia, ib));
            for p in m {
                points.push(self.prepare_point(ia, ib, &p, dt, pair));
            }
        }

        self.solve(&mut points);
        self.project(&points);

        for body in self.bodies.iter_mut().flatten() {
            if body.kind != BodyKind::Dynamic {
                continue;
            }
            body.pose.position += body.linear_velocity * dt;
            let w = body.angular_velocity;
            if w != DVec3::ZERO {
                let q = body.pose.orientation;
                let dq = DQuat::from_xyzw(w.x, w.y, w.z, 0.0) * q;
                body.pose.orientation = DQuat::from_xyzw(
                    q.x + 0.5 * dt * dq.x,
                    q.y + 0.5 * dt * dq.y,
                    q.z + 0.5 * dt * dq.z,
                    q.w + 0.5 * dt * dq.w,
                )
                .normalize();
            }
            body.pose_generation += 1;
            if !(body.pose.is_finite() && body.linear_velocity.is_finite() && body.angular_velocity.is_finite()) {
                return Err(PhysicsError::NonFiniteState(body.id));
            }
        }

        let mut events = Vec::new();
        for (pair, &(ia, ib)) in pair_ids.iter().enumerate() {
            let pts: Vec<&ContactPoint> = points.iter().filter(|p| p.pair == pair).collect();
            if !pts.iter().any(|p| p.separation <= 0.0) {
                continue;
            }
            let deepest = pts.iter().min_by(|x, y| x.separation.total_cmp(&y.separation)).unwrap();
            let impulse = pts.iter().fold(DVec3::ZERO, |acc, p| {
                acc + p.normal * p.normal_impulse + p.tangents[0] * p.tangent_impulse[0] + p.tangents[1] * p.tangent_impulse[1]
            });
            let b = self.bodies[ib].as_ref().unwrap();
            events.push(HitReport {
                source: ia as BodyId,
                other: ib as BodyId,
                other_group: b.group,
                normal: deepest.normal,
                applied_impulse: impulse,
            });
        }
        Ok(events)
    }

    /// Broadphase pairs (ascending ids) with at least one dynamic body and an
    /// enabled group pair.
    fn candidate_pairs(&self) -> Vec<(usize, usize)> {
        let boxes: Vec<(ObjectId, Aabb)> =
            self.bodies().map(|b| (b.id, b.aabb().inflate(b.skin_width))).collect();
        let Ok(bvh) = Bvh::build(&boxes) else { return Vec::new() };
        bvh.broadphase_pairs()
            .into_iter()
            .filter(|&(a, b)| {
                let (ba, bb) = (self.body(a).unwrap(), self.body(b).unwrap());
                (ba.kind == BodyKind::Dynamic || bb.kind == BodyKind::Dynamic) && self.groups_interact(ba.group, bb.group)
            })
            .map(|(a, b)| (a as usize, b as usize))
            .collect()
    }

    fn prepare_point(&self, ia: usize, ib: usize, p: &ManifoldPoint, dt: f64, pair: usize) -> ContactPoint {
        let (a, b) = (self.bodies[ia].as_ref().unwrap(), self.bodies[ib].as_ref().unwrap());
        let n = p.normal;
        let ra = p.point - a.pose.position;
        let rb = p.point - b.pose.position;
        let (ia_w, ib_w) = (a.world_inverse_inertia(), b.world_inverse_inertia());
        let eff = |dir: DVec3| {
            let k = a.inv_mass
                + b.inv_mass
                + dir.dot((ia_w * ra.cross(dir)).cross(ra))
                + dir.dot((ib_w * rb.cross(dir)).cross(rb));
            if k > 0.0 {
                1.0 / k
            } else {
                0.0
            }
        };
        let t1 = any_perpendicular(n);
        let t2 = n.cross(t1);
        let vn = (b.velocity_at(rb) - a.velocity_at(ra)).dot(n);
        let target = if p.separation > 0.0 {
            // Speculative: may close the gap this step but not more.
            -p.separation / dt
        } else {
            let e = a.material.restitution.min(b.material.restitution);
            if vn < -RESTITUTION_THRESHOLD {
                -e * vn
            } else {
                0.0
            }
        };
        ContactPoint {
            a: ia,
            b: ib,
            normal: n,
            separation: p.separation,
            ra,
            rb,
            tangents: [t1, t2],
            normal_mass: eff(n),
            tangent_mass: [eff(t1), eff(t2)],
            target,
            friction: (a.material.friction * b.material.friction).sqrt(),
            normal_impulse: 0.0,
            tangent_impulse: [0.0, 0.0],
            pair,
        }
    }

    fn apply_pair_impulse(&mut self, c: &ContactPoint, impulse: DVec3) {
        for (idx, r, sign) in [(c.a, c.ra, -1.0), (c.b, c.rb, 1.0)] {
            let body = self.bodies[idx].as_mut().unwrap();
            if body.inv_mass == 0.0 {
                continue;
            }
            let inv_i = body.world_inverse_inertia();
            body.linear_velocity += impulse * (sign * body.inv_mass);
            body.angular_velocity += inv_i * r.cross(impulse * sign);
        }
    }

    fn relative_velocity(&self, c: &ContactPoint) -> DVec3 {
        let a = self.bodies[c.a].as_ref().unwrap();
        let b = self.bodies[c.b].as_ref().unwrap();
        b.velocity_at(c.rb) - a.velocity_at(c.ra)
    }

    fn solve(&mut self, points: &mut [ContactPoint]) {
        for _ in 0..self.solver.iterations {
            for c in points.iter_mut() {
                let vn = self.relative_velocity(c).dot(c.normal);
                let delta = c.normal_mass * (c.target - vn);
                let total = (c.normal_impulse + delta).max(0.0);
                let applied = total - c.normal_impulse;
                c.normal_impulse = total;
                if applied != 0.0 {
                    self.apply_pair_impulse(c, c.normal * applied);
                }
                let limit = c.friction * c.normal_impulse;
                for k in 0..2 {
                    let vt = self.relative_velocity(c).dot(c.tangents[k]);
                    let delta = -c.tangent_mass[k] * vt;
                    let total = (c.tangent_impulse[k] + delta).clamp(-limit, limit);
                    let applied = total - c.tangent_impulse[k];
                    c.tangent_impulse[k] = total;
                    if applied != 0.0 {
                        self.apply_pair_impulse(c, c.tangents[k] * applied);
                    }
                }
            }
        }
    }

    /// Moves penetrating pairs apart by `baumgarte` of the depth beyond the
    /// slop, split by inverse mass. Velocities are untouched.
    fn project(&mut self, points: &[ContactPoint]) {
        let beta = self.solver.baumgarte;
        if beta == 0.0 {
            return;
        }
        let mut done: BTreeSet<usize> = BTreeSet::new();
        for c in points {
            if !done.insert(c.pair) {
                continue;
            }
            let deepest =
                points.iter().filter(|p| p.pair == c.pair).min_by(|x, y| x.separation.total_cmp(&y.separation)).unwrap();
            let excess = -deepest.separation - self.solver.slop;
            if excess <= 0.0 {
                continue;
            }
            let (ma, mb) = (self.bodies[c.a].as_ref().unwrap().inv_mass, self.bodies[c.b].as_ref().unwrap().inv_mass);
            let total = ma + mb;
            if total == 0.0 {
                continue;
            }
            let shift = deepest.normal * (beta * excess / total);
            if ma > 0.0 {
                let body = self.bodies[c.a].as_mut().unwrap();
                body.pose.position -= shift * ma;
            }
            if mb > 0.0 {
                let body = self.bodies[c.b].as_mut().unwrap();
                body.pose.position += shift * mb;
            }
        }
    }

    /// Resolves one contact in isolation: velocity impulses (restitution and
    /// friction) followed by positional correction.
    pub fn resolve(&mut self, contact: &Contact, dt: f64) -> Result<(), PhysicsError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(PhysicsError::InvalidTimeStep(dt));
        }
        let (ia, ib) = (contact.body_a as usize, contact.body_b as usize);
        self.body(contact.body_a).ok_or(PhysicsError::UnknownBody(contact.body_a))?;
        self.body(contact.body_b).ok_or(PhysicsError::UnknownBody(contact.body_b))?;
        let mp = ManifoldPoint {
            point: contact.point,
            normal: contact.normal.normalize(),
            separation: -contact.penetration_depth.max(0.0),
        };
        let mut points = vec![self.prepare_point(ia, ib, &mp, dt, 0)];
        self.solve(&mut points);
        self.project(&points);
        Ok(())
    }

    /// Current contacts between all permitted pairs (deepest point per pair,
    /// touching included), ascending by pair.
    pub fn contacts(&self) -> Result<Vec<Contact>, PhysicsError> {
        let mut out = Vec::new();
        for (ia, ib) in self.candidate_pairs() {
            let (a, b) = (self.bodies[ia].as_ref().unwrap(), self.bodies[ib].as_ref().unwrap());
            if let Some(p) = proximity(&a.shape, &a.pose, &b.shape, &b.pose, 0.0)? {
                out.push(Contact {
                    body_a: a.id,
                    body_b: b.id,
                    point: p.point,
                    normal: p.normal,
                    penetration_depth: -p.distance,
                });
            }
        }
        Ok(out)
    }

    /// Bodies within `margin` of a shape, with their deepest proximity. The
    /// proximity normal points from the query shape into the body.
    pub fn query_proximity(
        &self,
        shape: &CollisionShape,
        pose: &Pose,
        group_mask: u32,
        exclude: &[BodyId],
        margin: f64,
    ) -> Result<Vec<(BodyId, Proximity)>, PhysicsError> {
        let region = shape.aabb(pose).inflate(margin.max(0.0));
        let mut out = Vec::new();
        for body in self.bodies() {
            if exclude.contains(&body.id) || group_mask & (1 << body.group) == 0 || !body.aabb().overlaps(&region) {
                continue;
            }
            if let Some(p) = proximity(shape, pose, &body.shape, &body.pose, margin)? {
                out.push((body.id, p));
            }
        }
        Ok(out)
    }

    /// Earliest time of impact of a translating shape against permitted
    /// bodies, by conservative advancement. `None` when the path is free.
    ///
    /// A shape that starts within `skin` of a body it is moving toward hits
    /// at `t = 0`; one moving away from it ignores that body.
    pub fn sweep(&self, query: &SweepQuery<'_>) -> Result<Option<SweepHit>, PhysicsError> {
        if !query.displacement.is_finite() || !query.pose.is_finite() {
            return Err(PhysicsError::NonFinite);
        }
        let d = query.displacement;
        let end = Pose::new(query.pose.position + d, query.pose.orientation);
        let region = query.shape.aabb(&query.pose).union(&query.shape.aabb(&end)).inflate(query.skin.max(0.0) + SWEEP_TOLERANCE);
        let mut best: Option<SweepHit> = None;
        for body in self.bodies() {
            if query.exclude.contains(&body.id) || query.group_mask & (1 << body.group) == 0 {
                continue;
            }
            if !body.aabb().overlaps(&region) {
                continue;
            }
            let cores = pair_cores(query.shape, &query.pose, &body.shape, &body.pose, (region.extents().max_element()).max(0.0))?;
            for (moving, other) in cores {
                if let Some((t, p)) = advance(&moving, &other, d, query.skin) {
                    let better = match &best {
                        None => true,
                        Some(h) => t < h.t || (t == h.t && body.id < h.other),
                    };
                    if better {
                        best = Some(SweepHit { t, normal: -p.normal, other: body.id, point: p.point + p.normal * (p.distance / 2.0) });
                    }
                }
            }
        }
        Ok(best)
    }
}

fn translated(core: &Core, by: DVec3) -> Core {
    match core {
        Core::Segment { a, b, radius } => Core::Segment { a: *a + by, b: *b + by, radius: *radius },
        Core::Box { pose, half } => Core::Box { pose: Pose::new(pose.position + by, pose.orientation), half: *half },
        Core::Hull { pose, hull } => Core::Hull { pose: Pose::new(pose.position + by, pose.orientation), hull: hull.clone() },
        Core::Triangle(t) => Core::Triangle([t[0] + by, t[1] + by, t[2] + by]),
    }
}

/// Conservative advancement of `moving` along `d` toward `other` until the
/// gap is within `skin + SWEEP_TOLERANCE`.
fn advance(moving: &Core, other: &Core, d: DVec3, skin: f64) -> Option<(f64, Proximity)> {
    let mut t = 0.0;
    for _ in 0..MAX_ADVANCEMENT_STEPS {
        let p = core_proximity(&translated(moving, d * t), other);
        let gap = p.distance - skin;
        let closing = d.dot(p.normal);
        if gap <= SWEEP_TOLERANCE {
            if t == 0.0 && closing <= 1e-12 {
                return None;
            }
            return Some((t, p));
        }
        if closing <= 0.0 {
            return None;
        }
        t += gap / closing;
        if t > 1.0 {
            return None;
        }
    }
    None
}
