//! Kinematic capsule character controller.
//!
//! Characters are kinematic capsule bodies moved by sweeps, never by the
//! solver. Each [`ControllerRegistry::simulate`] call runs:
//!
//! 1. a horizontal collide-and-slide pass with auto-stepping,
//! 2. a vertical pass carrying gravity (or a jump),
//! 3. a downward ground probe that sets `grounded` and keeps the capsule
//!    hovering one skin width above its support,
//! 4. push impulses and hit reports for the bodies touched.
//!
//! Positions are foot points: the capsule centre sits
//! `radius + height / 2` above the foot. Yaw is about +Y, yaw 0 faces +Z.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use glam::DVec3;
use thiserror::Error;

use crate::math::{yaw_forward, yaw_quat};
use crate::physics::{
    BodyDesc, BodyId, BodyKind, CollisionShape, HitReport, PhysicsError, PhysicsWorld, Pose, SweepHit, SweepQuery,
};
use crate::scene_graph::{CharacterSpawn, NodeId, SceneError, Transform, World};

pub type CharacterId = u32;

/// Upper bound on sweep iterations per pass.
pub const MAX_SLIDES: usize = 4;
/// Ground contacts within this distance beyond the skin count as support.
pub const GROUND_TOLERANCE: f64 = 1e-3;
/// Crouch lower bound as a fraction of the standing height.
pub const MIN_HEIGHT_FRACTION: f64 = 0.4;

const PROBE_RADIUS: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum CharacterError {
    #[error("a controller registry already exists for this world")]
    RegistryExists,
    #[error("registry is bound to a different world")]
    WrongWorld,
    #[error("invalid character description: {0}")]
    InvalidDesc(String),
    #[error("spawn position is blocked (penetration {0:.4} m)")]
    SpawnBlocked(f64),
    #[error("unknown character {0}")]
    UnknownCharacter(CharacterId),
    #[error("non-finite input")]
    NonFinite,
    #[error("height {height} outside [{min}, {max}]")]
    OutOfBounds { height: f64, min: f64, max: f64 },
    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error(transparent)]
    Scene(#[from] SceneError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacterDesc {
    pub capsule_radius: f64,
    /// Cylinder segment length, caps excluded.
    pub capsule_height: f64,
    pub mass: f64,
    pub step_offset: f64,
    /// Steepest walkable surface, radians from vertical.
    pub slope_limit: f64,
    pub skin: f64,
    pub group: u8,
    pub walkable_groups: u32,
    pub push_strength: f64,
    pub eye_height: f64,
}

impl Default for CharacterDesc {
    fn default() -> Self {
        CharacterDesc {
            capsule_radius: 0.4,
            capsule_height: 1.0,
            mass: 80.0,
            step_offset: 0.3,
            slope_limit: std::f64::consts::FRAC_PI_4,
            skin: 0.025,
            group: 0,
            walkable_groups: u32::MAX,
            push_strength: 1.0,
            eye_height: 1.6,
        }
    }
}

impl CharacterDesc {
    pub fn validate(&self) -> Result<(), CharacterError> {
        let bad = |m: String| Err(CharacterError::InvalidDesc(m));
        let finite = [
            self.capsule_radius,
            self.capsule_height,
            self.mass,
            self.step_offset,
            self.slope_limit,
            self.skin,
            self.push_strength,
            self.eye_height,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("non-finite parameter".into());
        }
        if self.capsule_radius <= 0.0 || self.capsule_height <= 0.0 {
            return bad("capsule dimensions must be positive".into());
        }
        if self.mass <= 0.0 {
            return bad(format!("mass {} must be positive", self.mass));
        }
        if self.step_offset < 0.0 || self.step_offset >= self.capsule_height / 2.0 + self.capsule_radius {
            return bad(format!("step offset {} must lie in [0, height/2 + radius)", self.step_offset));
        }
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&self.slope_limit) {
            return bad(format!("slope limit {} must lie in [0, pi/2)", self.slope_limit));
        }
        if self.skin < 0.0 || self.skin >= self.capsule_radius {
            return bad(format!("skin {} must lie in [0, radius)", self.skin));
        }
        if self.group > 31 {
            return bad(format!("group {} out of range", self.group));
        }
        if self.push_strength < 0.0 {
            return bad("push strength must be non-negative".into());
        }
        Ok(())
    }

    /// Description for a scene node marked `controller=character`.
    ///
    /// Optional shape parameters: `stepOffset`, `slopeLimit` (degrees),
    /// `pushStrength`, `eyeHeight`, `walkableGroups` (bit mask).
    pub fn from_spawn(spawn: &CharacterSpawn) -> Result<CharacterDesc, CharacterError> {
        let mut desc = CharacterDesc {
            capsule_radius: spawn.radius,
            capsule_height: spawn.height,
            mass: spawn.mass,
            skin: spawn.skin,
            group: spawn.group,
            ..CharacterDesc::default()
        };
        for (name, value) in &spawn.params {
            let num = || value.parse::<f64>().map_err(|_| CharacterError::InvalidDesc(format!("{name}={value}")));
            match name.as_str() {
                "stepOffset" => desc.step_offset = num()?,
                "slopeLimit" => desc.slope_limit = num()?.to_radians(),
                "pushStrength" => desc.push_strength = num()?,
                "eyeHeight" => desc.eye_height = num()?,
                "walkableGroups" => {
                    desc.walkable_groups =
                        value.parse().map_err(|_| CharacterError::InvalidDesc(format!("{name}={value}")))?
                }
                _ => {}
            }
        }
        desc.validate()?;
        Ok(desc)
    }

    pub fn center_offset(&self, height: f64) -> DVec3 {
        DVec3::new(0.0, self.capsule_radius + height / 2.0, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacterState {
    pub id: CharacterId,
    pub desc: CharacterDesc,
    /// Foot point.
    pub position: DVec3,
    pub yaw: f64,
    /// Movement intent set by [`ControllerRegistry::set_velocity`].
    pub velocity: DVec3,
    /// Accumulated gravity (or jump) speed along +Y.
    pub vertical_speed: f64,
    pub grounded: bool,
    pub current_height: f64,
    pub linked_node: NodeId,
    pub body: BodyId,
}

impl CharacterState {
    pub fn center(&self) -> DVec3 {
        self.position + self.desc.center_offset(self.current_height)
    }

    pub fn shape(&self) -> CollisionShape {
        CollisionShape::capsule(self.desc.capsule_radius, self.current_height / 2.0)
    }

    pub fn forward(&self) -> DVec3 {
        yaw_forward(self.yaw)
    }
}

pub type CallbackHandle = u32;

type HitCallback = Box<dyn FnMut(&HitReport) + Send>;

/// The controller registry. At most one may be alive per [`World`].
pub struct ControllerRegistry {
    world_id: u64,
    slot: Arc<AtomicBool>,
    characters: Vec<CharacterState>,
    callbacks: Vec<(CallbackHandle, u32, HitCallback)>,
    next_callback: CallbackHandle,
}

impl std::fmt::Debug for ControllerRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ControllerRegistry")
            .field("world_id", &self.world_id)
            .field("characters", &self.characters)
            .field("callbacks", &self.callbacks.len())
            .finish()
    }
}

impl Drop for ControllerRegistry {
    fn drop(&mut self) {
        self.slot.store(false, Ordering::SeqCst);
    }
}

impl ControllerRegistry {
    pub fn create(world: &World) -> Result<ControllerRegistry, CharacterError> {
        let slot = world.registry_slot().clone();
        if slot.compare_exchange(false, true, Ordering::SeqCst, Ordering::SeqCst).is_err() {
            return Err(CharacterError::RegistryExists);
        }
        Ok(ControllerRegistry {
            world_id: world.id(),
            slot,
            characters: Vec::new(),
            callbacks: Vec::new(),
            next_callback: 0,
        })
    }

    fn check_world(&self, world: &World) -> Result<(), CharacterError> {
        if world.id() == self.world_id {
            Ok(())
        } else {
            Err(CharacterError::WrongWorld)
        }
    }

    pub fn characters(&self) -> &[CharacterState] {
        &self.characters
    }

    pub fn get(&self, id: CharacterId) -> Result<&CharacterState, CharacterError> {
        self.characters.get(id as usize).ok_or(CharacterError::UnknownCharacter(id))
    }

    fn get_mut(&mut self, id: CharacterId) -> Result<&mut CharacterState, CharacterError> {
        self.characters.get_mut(id as usize).ok_or(CharacterError::UnknownCharacter(id))
    }

    /// Registers a character at a foot position. A shallow initial overlap
    /// (up to the skin width) is pushed out once; deeper overlaps fail.
    /// Without `node` a new root node is created for it.
    pub fn add_character(
        &mut self,
        world: &mut World,
        desc: CharacterDesc,
        position: DVec3,
        yaw: f64,
        node: Option<NodeId>,
    ) -> Result<CharacterId, CharacterError> {
        self.check_world(world)?;
        desc.validate()?;
        if !position.is_finite() || !yaw.is_finite() {
            return Err(CharacterError::NonFinite);
        }
        let shape = CollisionShape::capsule(desc.capsule_radius, desc.capsule_height / 2.0);
        let mask = world.physics.interaction_mask(desc.group);
        let mut foot = position;
        let deepest = |foot: DVec3| -> Result<Option<(f64, DVec3)>, CharacterError> {
            let pose = Pose::from_position(foot + desc.center_offset(desc.capsule_height));
            let found = world.physics.query_proximity(&shape, &pose, mask, &[], 0.0)?;
            Ok(found.into_iter().map(|(_, p)| (p.distance, p.normal)).min_by(|a, b| a.0.total_cmp(&b.0)))
        };
        if let Some((distance, normal)) = deepest(foot)? {
            if distance < -1e-9 {
                if -distance > desc.skin {
                    return Err(CharacterError::SpawnBlocked(-distance));
                }
                foot += normal * distance;
                if let Some((d, _)) = deepest(foot)? {
                    if d < -1e-9 {
                        return Err(CharacterError::SpawnBlocked(-d));
                    }
                }
            }
        }

        let id = self.characters.len() as CharacterId;
        let node = match node {
            Some(n) => {
                world.node(n)?;
                n
            }
            None => world.add_node(&format!("character{id}"), Transform::from_position(foot), None)?,
        };
        let pose = Pose::new(foot + desc.center_offset(desc.capsule_height), yaw_quat(yaw));
        let body = world.physics.add_body(
            BodyDesc::new(BodyKind::Kinematic, shape, pose).with_group(desc.group).with_skin(desc.skin).with_node(node),
        )?;
        self.characters.push(CharacterState {
            id,
            current_height: desc.capsule_height,
            desc,
            position: foot,
            yaw,
            velocity: DVec3::ZERO,
            vertical_speed: 0.0,
            grounded: false,
            linked_node: node,
            body,
        });
        Ok(id)
    }

    pub fn set_velocity(&mut self, id: CharacterId, v: DVec3) -> Result<(), CharacterError> {
        if !v.is_finite() {
            return Err(CharacterError::NonFinite);
        }
        self.get_mut(id)?.velocity = v;
        Ok(())
    }

    pub fn set_yaw(&mut self, id: CharacterId, yaw: f64) -> Result<(), CharacterError> {
        if !yaw.is_finite() {
            return Err(CharacterError::NonFinite);
        }
        self.get_mut(id)?.yaw = yaw;
        Ok(())
    }

    /// Starts a jump with the given upward speed. Ignored while airborne.
    pub fn jump(&mut self, id: CharacterId, speed: f64) -> Result<bool, CharacterError> {
        if !speed.is_finite() {
            return Err(CharacterError::NonFinite);
        }
        let c = self.get_mut(id)?;
        if !c.grounded {
            return Ok(false);
        }
        c.vertical_speed = speed;
        c.grounded = false;
        Ok(true)
    }

    /// Observes hit reports whose `other_group` is in `group_mask`.
    pub fn subscribe(&mut self, group_mask: u32, callback: impl FnMut(&HitReport) + Send + 'static) -> CallbackHandle {
        let handle = self.next_callback;
        self.next_callback += 1;
        self.callbacks.push((handle, group_mask, Box::new(callback)));
        handle
    }

    pub fn unsubscribe(&mut self, handle: CallbackHandle) -> bool {
        let before = self.callbacks.len();
        self.callbacks.retain(|(h, _, _)| *h != handle);
        self.callbacks.len() != before
    }

    /// Moves one character by its intent velocity plus gravity. Returns one
    /// hit report per body touched, in ascending body id.
    pub fn simulate(&mut self, world: &mut World, id: CharacterId, dt: f64) -> Result<Vec<HitReport>, CharacterError> {
        self.check_world(world)?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(CharacterError::InvalidTimeStep(dt));
        }
        let mut state = self.get(id)?.clone();
        let gravity = world.physics.gravity();
        let mover = Mover::new(&world.physics, &state);

        let mut vertical_speed = state.vertical_speed;
        if state.grounded && vertical_speed < 0.0 {
            vertical_speed = 0.0;
        }
        vertical_speed += gravity.y * dt;

        let mut hits = Vec::new();
        let horizontal = DVec3::new(state.velocity.x, 0.0, state.velocity.z) * dt;
        let mut foot = mover.move_horizontal(state.position, horizontal, state.grounded, &mut hits);
        let vertical = DVec3::new(0.0, (state.velocity.y + vertical_speed) * dt, 0.0);
        let (f, vertical_hit) = mover.move_vertical(foot, vertical, &mut hits);
        foot = f;
        if vertical_hit == VerticalHit::Ceiling {
            vertical_speed = 0.0;
        }
        let mut grounded = false;
        if vertical_speed <= 0.0 {
            if let Some(gap) = mover.probe_ground(foot) {
                foot = mover.hover(foot, gap);
                grounded = true;
            }
            grounded |= vertical_hit == VerticalHit::Support;
        }
        if grounded {
            vertical_speed = 0.0;
        }
        state.position = foot;
        state.grounded = grounded;
        state.vertical_speed = vertical_speed;
        if !(foot.is_finite() && vertical_speed.is_finite()) {
            return Err(CharacterError::NonFinite);
        }

        let mut touched: BTreeMap<BodyId, SweepHit> = BTreeMap::new();
        for hit in hits {
            touched.entry(hit.other).or_insert(hit);
        }
        let mut reports = Vec::new();
        for (other, hit) in touched {
            let Some(body) = world.physics.body(other) else { continue };
            let (kind, group) = (body.kind, body.group);
            let horizontal = DVec3::new(-hit.normal.x, 0.0, -hit.normal.z);
            let (normal, impulse) = if horizontal.length() > 1e-6 {
                let n = horizontal.normalize();
                let j = if kind == BodyKind::Dynamic { compute_push_impulse(&state, n) } else { DVec3::ZERO };
                (n, j)
            } else {
                (-hit.normal, DVec3::ZERO)
            };
            if impulse != DVec3::ZERO {
                world.physics.apply_impulse(other, impulse, hit.point)?;
            }
            reports.push(HitReport {
                source: state.body,
                other,
                other_group: group,
                normal,
                applied_impulse: impulse,
            });
        }

        world.physics.set_pose(state.body, Pose::new(state.center(), yaw_quat(state.yaw)))?;
        self.characters[id as usize] = state;
        for report in &reports {
            for (_, mask, callback) in &mut self.callbacks {
                if *mask & (1u32 << report.other_group) != 0 {
                    callback(report);
                }
            }
        }
        Ok(reports)
    }

    /// Simulates every character in ascending id.
    pub fn simulate_all(&mut self, world: &mut World, dt: f64) -> Result<Vec<HitReport>, CharacterError> {
        let mut out = Vec::new();
        for id in 0..self.characters.len() as CharacterId {
            out.extend(self.simulate(world, id, dt)?);
        }
        Ok(out)
    }

    /// Copies the character's foot point and yaw onto its scene node.
    pub fn render(&self, world: &mut World, id: CharacterId) -> Result<(), CharacterError> {
        self.check_world(world)?;
        let c = self.get(id)?;
        world.set_world_pose(c.linked_node, c.position, yaw_quat(c.yaw))?;
        Ok(())
    }

    pub fn render_all(&self, world: &mut World) -> Result<(), CharacterError> {
        for id in 0..self.characters.len() as CharacterId {
            self.render(world, id)?;
        }
        Ok(())
    }

    /// Changes the cylinder height with the foot anchored. Shrinking always
    /// succeeds; growing returns `false` and changes nothing when the taller
    /// capsule would come within half a skin width of an obstacle.
    pub fn resize_volume(&mut self, world: &mut World, id: CharacterId, new_height: f64) -> Result<bool, CharacterError> {
        self.check_world(world)?;
        let c = self.get(id)?;
        let (min, max) = (MIN_HEIGHT_FRACTION * c.desc.capsule_height, c.desc.capsule_height);
        if !(new_height.is_finite() && new_height >= min - 1e-12 && new_height <= max + 1e-12) {
            return Err(CharacterError::OutOfBounds { height: new_height, min, max });
        }
        let new_height = new_height.clamp(min, max);
        if new_height == c.current_height {
            return Ok(true);
        }
        let shape = CollisionShape::capsule(c.desc.capsule_radius, new_height / 2.0);
        let pose = Pose::new(c.position + c.desc.center_offset(new_height), yaw_quat(c.yaw));
        if new_height > c.current_height {
            let mask = world.physics.interaction_mask(c.desc.group);
            let clearance = 0.5 * c.desc.skin;
            let found = world.physics.query_proximity(&shape, &pose, mask, &[c.body], clearance)?;
            if found.iter().any(|(_, p)| p.distance < clearance) {
                return Ok(false);
            }
        }
        let body = c.body;
        world.physics.set_shape(body, shape)?;
        world.physics.set_pose(body, pose)?;
        self.get_mut(id)?.current_height = new_height;
        Ok(true)
    }
}

/// `J = k m max(0, v . n) n` for a character pushing along the horizontal
/// unit normal `n` (character into body).
pub fn compute_push_impulse(character: &CharacterState, normal: DVec3) -> DVec3 {
    let d = &character.desc;
    normal * (d.push_strength * d.mass * character.velocity.dot(normal).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VerticalHit {
    None,
    Ceiling,
    Support,
}

/// Sweep helpers bound to one character's capsule.
struct Mover<'a> {
    physics: &'a PhysicsWorld,
    shape: CollisionShape,
    offset: DVec3,
    exclude: [BodyId; 1],
    mask: u32,
    walkable_groups: u32,
    cos_limit: f64,
    skin: f64,
    step_offset: f64,
}

impl<'a> Mover<'a> {
    fn new(physics: &'a PhysicsWorld, c: &CharacterState) -> Self {
        Mover {
            physics,
            shape: c.shape(),
            offset: c.desc.center_offset(c.current_height),
            exclude: [c.body],
            mask: physics.interaction_mask(c.desc.group),
            walkable_groups: c.desc.walkable_groups,
            cos_limit: libm::cos(c.desc.slope_limit),
            skin: c.desc.skin,
            step_offset: c.desc.step_offset,
        }
    }

    fn sweep_with(&self, shape: &CollisionShape, center: DVec3, displacement: DVec3, skin: f64) -> Option<SweepHit> {
        let query = SweepQuery {
            shape,
            pose: Pose::from_position(center),
            displacement,
            group_mask: self.mask,
            exclude: &self.exclude,
            skin,
        };
        // Sweeps only fail on non-finite input, which callers exclude.
        self.physics.sweep(&query).ok().flatten()
    }

    fn sweep(&self, foot: DVec3, displacement: DVec3) -> Option<SweepHit> {
        self.sweep_with(&self.shape, foot + self.offset, displacement, self.skin)
    }

    fn group_walkable(&self, hit: &SweepHit) -> bool {
        self.physics.body(hit.other).is_some_and(|b| self.walkable_groups & (1u32 << b.group) != 0)
    }

    fn walkable_contact(&self, hit: &SweepHit) -> bool {
        self.group_walkable(hit) && hit.normal.y >= self.cos_limit - 1e-12
    }

    /// Walkable support: the contact normal, or for edge contacts the surface
    /// just beyond the contact point, is within the slope limit.
    fn walkable_support(&self, hit: &SweepHit, foot: DVec3) -> bool {
        if !self.group_walkable(hit) {
            return false;
        }
        if hit.normal.y >= self.cos_limit - 1e-12 {
            return true;
        }
        self.surface_normal(hit, foot + self.offset).y >= self.cos_limit - 1e-12
    }

    /// Normal of the surface slightly past the contact point, found by
    /// dropping a tiny sphere onto it.
    fn surface_normal(&self, hit: &SweepHit, center: DVec3) -> DVec3 {
        let away = DVec3::new(hit.point.x - center.x, 0.0, hit.point.z - center.z);
        if away.length() < 1e-9 {
            return hit.normal;
        }
        let start = hit.point + away.normalize() * 0.02 + DVec3::new(0.0, 0.05, 0.0);
        let probe = CollisionShape::sphere(PROBE_RADIUS);
        match self.sweep_with(&probe, start, DVec3::new(0.0, -0.1, 0.0), 0.0) {
            Some(h) if h.other == hit.other => h.normal,
            _ => hit.normal,
        }
    }

    fn move_horizontal(&self, mut foot: DVec3, displacement: DVec3, grounded: bool, hits: &mut Vec<SweepHit>) -> DVec3 {
        let mut remaining = displacement;
        for _ in 0..MAX_SLIDES {
            if remaining.length() < 1e-12 {
                break;
            }
            let Some(hit) = self.sweep(foot, remaining) else {
                foot += remaining;
                break;
            };
            foot += remaining * hit.t;
            hits.push(hit);
            let left = remaining * (1.0 - hit.t);
            let walkable = self.walkable_contact(&hit);
            if grounded && !walkable && self.step_offset > 0.0 && hit.point.y - (foot.y - self.skin) <= self.step_offset {
                if let Some((landed, rest)) = self.try_step(foot, left, hits) {
                    foot = landed;
                    remaining = rest;
                    continue;
                }
            }
            let mut n = hit.normal;
            if !walkable {
                n.y = 0.0;
                n = n.normalize_or_zero();
            }
            remaining = left - n * left.dot(n).min(0.0);
            remaining.y = remaining.y.max(0.0);
        }
        foot
    }

    /// Raise, move, drop. Succeeds only on a walkable landing.
    fn try_step(&self, foot: DVec3, left: DVec3, hits: &mut Vec<SweepHit>) -> Option<(DVec3, DVec3)> {
        let raise = self.step_offset + self.skin;
        let up = DVec3::new(0.0, raise, 0.0);
        let rise = self.sweep(foot, up).map_or(raise, |h| raise * h.t);
        if rise < 1e-9 {
            return None;
        }
        let raised = foot + DVec3::new(0.0, rise, 0.0);
        let forward = self.sweep(raised, left);
        let frac = forward.map_or(1.0, |h| h.t);
        if (left * frac).length() < 1e-9 {
            return None;
        }
        let over = raised + left * frac;
        let down = DVec3::new(0.0, -2.0 * rise, 0.0);
        let landing = self.sweep(over, down)?;
        let landed = over + down * landing.t;
        if !self.walkable_support(&landing, landed) {
            return None;
        }
        hits.extend(forward);
        Some((landed, left * (1.0 - frac)))
    }

    fn move_vertical(&self, mut foot: DVec3, displacement: DVec3, hits: &mut Vec<SweepHit>) -> (DVec3, VerticalHit) {
        let mut remaining = displacement;
        let mut outcome = VerticalHit::None;
        for _ in 0..MAX_SLIDES {
            if remaining.length() < 1e-12 {
                break;
            }
            let Some(hit) = self.sweep(foot, remaining) else {
                foot += remaining;
                break;
            };
            foot += remaining * hit.t;
            hits.push(hit);
            if remaining.y > 0.0 {
                outcome = VerticalHit::Ceiling;
            } else if self.walkable_support(&hit, foot) {
                outcome = VerticalHit::Support;
                break;
            }
            let left = remaining * (1.0 - hit.t);
            remaining = left - hit.normal * left.dot(hit.normal).min(0.0);
        }
        (foot, outcome)
    }

    /// Moves the foot so the support gap becomes the skin width, lifting
    /// only as far as the space above allows.
    fn hover(&self, foot: DVec3, gap: f64) -> DVec3 {
        if gap >= self.skin {
            let down = DVec3::new(0.0, self.skin - gap, 0.0);
            return foot + down * self.sweep(foot, down).map_or(1.0, |h| h.t);
        }
        let up = DVec3::new(0.0, self.skin - gap, 0.0);
        foot + up * self.sweep(foot, up).map_or(1.0, |h| h.t)
    }

    /// Gap to a walkable support below, if within the skin plus tolerance.
    fn probe_ground(&self, foot: DVec3) -> Option<f64> {
        let reach = 2.0 * self.skin + GROUND_TOLERANCE;
        let hit = self.sweep_with(&self.shape, foot + self.offset, DVec3::new(0.0, -reach, 0.0), 0.0)?;
        let gap = hit.t * reach;
        (gap <= self.skin + GROUND_TOLERANCE && self.walkable_support(&hit, foot)).then_some(gap)
    }
}
