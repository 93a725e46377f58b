//! State sampling, canonical state text and the running trace digest.

use std::fmt::Write as _;

use glam::{DQuat, DVec3};
use sha2::{Digest, Sha256};

use crate::camera::CameraPose;
use crate::character::{CharacterId, ControllerRegistry};
use crate::physics::{BodyId, BodyKind, HitReport};
use crate::scene_format::format_number as num;
use crate::scene_graph::{NodeId, World};

#[derive(Debug, Clone, PartialEq)]
pub struct BodySample {
    pub id: BodyId,
    pub position: DVec3,
    pub orientation: DQuat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacterSample {
    pub id: CharacterId,
    pub position: DVec3,
    pub yaw: f64,
    pub grounded: bool,
}

/// Everything that enters the digest for one instant.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateSample {
    pub bodies: Vec<BodySample>,
    pub characters: Vec<CharacterSample>,
    pub camera: Option<CameraPose>,
}

impl StateSample {
    /// Dynamic bodies in ascending id, characters in ascending id.
    pub fn capture(world: &World, registry: Option<&ControllerRegistry>, camera: Option<&CameraPose>) -> StateSample {
        let bodies = world
            .physics
            .bodies()
            .filter(|b| b.kind == BodyKind::Dynamic)
            .map(|b| BodySample { id: b.id, position: b.pose.position, orientation: b.pose.orientation })
            .collect();
        let characters = registry
            .map(|r| {
                r.characters()
                    .iter()
                    .map(|c| CharacterSample { id: c.id, position: c.position, yaw: c.yaw, grounded: c.grounded })
                    .collect()
            })
            .unwrap_or_default();
        StateSample { bodies, characters, camera: camera.copied() }
    }

    /// Canonical text, one `B`, `C` or `CAM` line per record.
    pub fn lines(&self) -> String {
        let mut out = String::new();
        for b in &self.bodies {
            let (p, q) = (b.position, b.orientation);
            let _ = writeln!(
                out,
                "B {} {} {} {} {} {} {} {}",
                b.id,
                num(p.x),
                num(p.y),
                num(p.z),
                num(q.w),
                num(q.x),
                num(q.y),
                num(q.z)
            );
        }
        for c in &self.characters {
            let p = c.position;
            let _ = writeln!(out, "C {} {} {} {} {} {}", c.id, num(p.x), num(p.y), num(p.z), num(c.yaw), u8::from(c.grounded));
        }
        if let Some(cam) = &self.camera {
            let (p, q) = (cam.position, cam.orientation);
            let _ = writeln!(
                out,
                "CAM {} {} {} {} {} {} {}",
                num(p.x),
                num(p.y),
                num(p.z),
                num(q.w),
                num(q.x),
                num(q.y),
                num(q.z)
            );
        }
        out
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.lines().as_bytes()))
    }
}

/// SHA-256 of the canonical state text as 64 lowercase hex digits.
pub fn hash_state(world: &World, registry: Option<&ControllerRegistry>, camera: Option<&CameraPose>) -> String {
    StateSample::capture(world, registry, camera).digest()
}

/// Digest of a world with no dynamic bodies, characters or camera.
pub const EMPTY_STATE_DIGEST: &str = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855";

#[derive(Debug, Clone, PartialEq)]
pub struct SoundEvent {
    pub frame: u64,
    pub node: NodeId,
    pub file: String,
}

/// A character hit together with the inputs of its push impulse.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacterHit {
    pub frame: u64,
    pub character: CharacterId,
    pub velocity: DVec3,
    pub mass: f64,
    pub push_strength: f64,
    pub report: HitReport,
}

/// Sampled frames plus a digest chain.
///
/// The chain starts at the digest of the initial state; each sample `s`
/// advances it to `sha256(previous_hex || "F <frame>\n" || lines(s))`.
#[derive(Debug, Clone)]
pub struct StateTrace {
    pub samples: Vec<(u64, StateSample)>,
    pub sounds: Vec<SoundEvent>,
    pub body_hits: Vec<(u64, HitReport)>,
    pub character_hits: Vec<CharacterHit>,
    pub warnings: Vec<String>,
    /// Input events handed to the dispatcher, bound or not.
    pub dispatched: usize,
    digest: String,
}

impl StateTrace {
    pub fn new(initial: &StateSample) -> StateTrace {
        StateTrace {
            samples: Vec::new(),
            sounds: Vec::new(),
            body_hits: Vec::new(),
            character_hits: Vec::new(),
            warnings: Vec::new(),
            dispatched: 0,
            digest: initial.digest(),
        }
    }

    pub fn record(&mut self, frame: u64, sample: StateSample) {
        let mut h = Sha256::new();
        h.update(self.digest.as_bytes());
        h.update(format!("F {frame}\n").as_bytes());
        h.update(sample.lines().as_bytes());
        self.digest = hex::encode(h.finalize());
        self.samples.push((frame, sample));
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    /// The trace file: `vetrace 1`, one `F` section per sample, `DIGEST`.
    pub fn to_text(&self) -> String {
        let mut out = String::from("vetrace 1\n");
        for (frame, sample) in &self.samples {
            let _ = writeln!(out, "F {frame}");
            out.push_str(&sample.lines());
        }
        let _ = writeln!(out, "DIGEST {}", self.digest);
        out
    }
}
