//! Two-node camera rigs: a camera node that always looks at a target node.
//!
//! * Chasing: the camera sits at `chase_offset` in the character's yaw
//!   frame and looks at the point the character is looking at,
//!   `foot + (0, eye_height, 0) + 2 m * yaw_forward`.
//! * Fixed: the camera stays at `fixed_position` and looks at the
//!   character's eye point.
//! * First person: the camera rides the character at `foot + eye_offset`
//!   with the character's yaw.
//!
//! [`CameraRig::update`] only reads the world. [`CameraRig::apply`] writes
//! the resulting pose back onto the rig's nodes.

use std::fmt;
use std::str::FromStr;

use glam::{DQuat, DVec3};
use thiserror::Error;

use crate::character::{CharacterId, CharacterState, ControllerRegistry};
use crate::math::{look_at, rotate_yaw, yaw_forward, yaw_quat, FORWARD};
use crate::scene_graph::{NodeId, SceneError, Transform, World};

/// Distance ahead of the character of the chasing look-at point.
pub const LOOK_AHEAD: f64 = 2.0;

#[derive(Debug, Error)]
pub enum CameraError {
    #[error("unknown character {0}")]
    UnknownCharacter(CharacterId),
    #[error("bad camera parameters: {0}")]
    BadParams(String),
    #[error("camera node {0} no longer exists")]
    DanglingNode(NodeId),
    #[error(transparent)]
    Scene(#[from] SceneError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CameraMode {
    Chasing,
    Fixed,
    FirstPerson,
}

impl CameraMode {
    pub const ALL: [CameraMode; 3] = [CameraMode::Chasing, CameraMode::Fixed, CameraMode::FirstPerson];

    pub fn as_str(self) -> &'static str {
        match self {
            CameraMode::Chasing => "chasing",
            CameraMode::Fixed => "fixed",
            CameraMode::FirstPerson => "first_person",
        }
    }
}

impl fmt::Display for CameraMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CameraMode {
    type Err = CameraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CameraMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| CameraError::BadParams(format!("unknown camera mode '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraParams {
    pub chase_offset: DVec3,
    pub fixed_position: DVec3,
    pub eye_offset: DVec3,
    pub up_hint: DVec3,
}

impl Default for CameraParams {
    fn default() -> Self {
        CameraParams {
            chase_offset: DVec3::new(0.0, 2.0, -4.0),
            fixed_position: DVec3::new(10.0, 10.0, 10.0),
            eye_offset: DVec3::new(0.0, 1.6, 0.0),
            up_hint: DVec3::Y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    pub position: DVec3,
    pub orientation: DQuat,
}

impl CameraPose {
    pub fn forward(&self) -> DVec3 {
        self.orientation * FORWARD
    }

    pub fn up(&self) -> DVec3 {
        self.orientation * DVec3::Y
    }

    pub fn right(&self) -> DVec3 {
        self.forward().cross(self.up())
    }
}

#[derive(Debug, Clone)]
pub struct CameraRig {
    mode: CameraMode,
    character: CharacterId,
    character_node: NodeId,
    camera_node: NodeId,
    target_node: NodeId,
    params: CameraParams,
    last_orientation: Option<DQuat>,
}

impl CameraRig {
    /// Creates the camera and target nodes for `character`.
    pub fn attach(
        world: &mut World,
        registry: &ControllerRegistry,
        mode: CameraMode,
        character: CharacterId,
        params: CameraParams,
    ) -> Result<CameraRig, CameraError> {
        let c = registry.get(character).map_err(|_| CameraError::UnknownCharacter(character))?;
        let vectors = [params.chase_offset, params.fixed_position, params.eye_offset, params.up_hint];
        if vectors.iter().any(|v| !v.is_finite()) {
            return Err(CameraError::BadParams("non-finite vector".into()));
        }
        let up_hint = params
            .up_hint
            .try_normalize()
            .ok_or_else(|| CameraError::BadParams("up hint must be non-zero".into()))?;
        if mode == CameraMode::Chasing && params.chase_offset.length() < 1e-9 {
            return Err(CameraError::BadParams("chasing camera needs a non-zero offset".into()));
        }
        let character_node = c.linked_node;
        let camera_node = world.add_node(&format!("camera{character}"), Transform::IDENTITY, None)?;
        let target_node = world.add_node(&format!("camera{character}_target"), Transform::IDENTITY, None)?;
        let mut rig = CameraRig {
            mode,
            character,
            character_node,
            camera_node,
            target_node,
            params: CameraParams { up_hint, ..params },
            last_orientation: None,
        };
        let pose = rig.update(world, registry)?;
        rig.apply(world, &pose, registry)?;
        Ok(rig)
    }

    pub fn mode(&self) -> CameraMode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: CameraMode) {
        self.mode = mode;
    }

    pub fn params(&self) -> &CameraParams {
        &self.params
    }

    pub fn character(&self) -> CharacterId {
        self.character
    }

    /// The node the view is taken from; the character's own node in first
    /// person.
    pub fn camera_node(&self) -> NodeId {
        match self.mode {
            CameraMode::FirstPerson => self.character_node,
            _ => self.camera_node,
        }
    }

    pub fn target_node(&self) -> NodeId {
        self.target_node
    }

    /// World-space point the camera looks at.
    pub fn target_point(&self, c: &CharacterState) -> DVec3 {
        let eye = c.position + DVec3::new(0.0, c.desc.eye_height, 0.0);
        match self.mode {
            CameraMode::Chasing => eye + yaw_forward(c.yaw) * LOOK_AHEAD,
            CameraMode::Fixed => eye,
            CameraMode::FirstPerson => c.position + self.params.eye_offset + yaw_forward(c.yaw) * LOOK_AHEAD,
        }
    }

    /// Computes this frame's pose. Only the rig's fallback orientation is
    /// updated; the world is not touched.
    pub fn update(&mut self, world: &World, registry: &ControllerRegistry) -> Result<CameraPose, CameraError> {
        for node in [self.camera_node, self.target_node] {
            world.node(node).map_err(|_| CameraError::DanglingNode(node))?;
        }
        let c = registry.get(self.character).map_err(|_| CameraError::UnknownCharacter(self.character))?;
        let pose = match self.mode {
            CameraMode::FirstPerson => {
                CameraPose { position: c.position + self.params.eye_offset, orientation: yaw_quat(c.yaw) }
            }
            CameraMode::Chasing | CameraMode::Fixed => {
                let position = match self.mode {
                    CameraMode::Chasing => c.position + rotate_yaw(self.params.chase_offset, c.yaw),
                    _ => self.params.fixed_position,
                };
                let target = self.target_point(c);
                let orientation = if target.distance(position) > 1e-9 {
                    look_at(position, target, self.params.up_hint)
                } else {
                    None
                };
                let orientation = orientation.or(self.last_orientation).unwrap_or(DQuat::IDENTITY);
                CameraPose { position, orientation }
            }
        };
        self.last_orientation = Some(pose.orientation);
        Ok(pose)
    }

    /// Moves the camera and target nodes to match `pose`. In first person
    /// the camera is the character node, which the controller owns.
    pub fn apply(&self, world: &mut World, pose: &CameraPose, registry: &ControllerRegistry) -> Result<(), CameraError> {
        let c = registry.get(self.character).map_err(|_| CameraError::UnknownCharacter(self.character))?;
        let target = self.target_point(c);
        world
            .set_world_pose(self.camera_node, pose.position, pose.orientation)
            .map_err(|_| CameraError::DanglingNode(self.camera_node))?;
        world
            .set_world_pose(self.target_node, target, DQuat::IDENTITY)
            .map_err(|_| CameraError::DanglingNode(self.target_node))?;
        Ok(())
    }
}
