//! Rigid-body and collision core.
//!
//! Bodies are static, dynamic or kinematic and carry one [`CollisionShape`].
//! [`PhysicsWorld::step`] runs semi-implicit Euler with BVH broadphase,
//! group filtering, manifold narrowphase and a sequential-impulse solver.
//! [`PhysicsWorld::sweep`] casts a shape by conservative advancement and is
//! what the character controller moves with.

mod geometry;
mod gjk;
mod narrowphase;
mod shape;
mod world;

use thiserror::Error;

pub use geometry::{box_sdf, closest_point_on_triangle, closest_segment_segment};
pub use narrowphase::{box_signed_distance, narrowphase, proximity, ManifoldPoint, Proximity, ShapeContact};
pub use shape::{CollisionShape, ConvexHull, Pose, TriMesh};
pub use world::{
    BodyDesc, BodyId, BodyKind, Contact, HitReport, Material, PhysicsWorld, RigidBody, SolverConfig, SweepHit,
    SweepQuery, ALL_GROUPS, SWEEP_TOLERANCE,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhysicsError {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("invalid mass: {0}")]
    InvalidMass(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("non-finite state detected in body {0}; step rolled back")]
    NonFiniteState(BodyId),
    #[error("non-finite input")]
    NonFinite,
    #[error("unknown body {0}")]
    UnknownBody(BodyId),
    #[error("collision group {0} out of range 0..=31")]
    GroupOutOfRange(u32),
    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),
    #[error("body {0} is static and cannot be moved")]
    ImmovableBody(BodyId),
}
