//! Deterministic fixed-step frame loop.
//!
//! Each frame runs, in order:
//!
//! 1. input dispatch for the events scripted at this frame,
//! 2. `frame_started` listeners,
//! 3. physics step, then dynamic body poses copied to their nodes,
//! 4. character simulation in ascending id,
//! 5. character render (foot pose onto the character node),
//! 6. camera update and apply,
//! 7. `frame_ended` listeners,
//! 8. a trace sample when `frame % trace_stride == 0`.
//!
//! Nothing reads a clock and nothing draws random numbers, so a run is a
//! pure function of the world, the script and the config.

mod input;
mod trace;

use std::path::Path;

use glam::DVec3;
use thiserror::Error;

pub use input::{parse_script, Device, InputBinding, InputEvent, InputKind, Intent};
pub use trace::{
    hash_state, BodySample, CharacterHit, CharacterSample, SoundEvent, StateSample, StateTrace, EMPTY_STATE_DIGEST,
};

use crate::camera::{CameraError, CameraMode, CameraParams, CameraPose, CameraRig};
use crate::character::{CharacterDesc, CharacterError, CharacterId, ControllerRegistry};
use crate::math::yaw_of;
use crate::physics::PhysicsError;
use crate::scene_format::{parse_scenes, FormatError, SceneDocument};
use crate::scene_graph::{SceneError, World};

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("script line {line}: {message}")]
    Script { line: usize, message: String },
    #[error("bindings line {line}: {message}")]
    Binding { line: usize, message: String },
    #[error("script is not sorted by frame at event {0}")]
    UnsortedScript(usize),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("listeners cannot be changed during a frame")]
    MidFrameMutation,
    #[error("scene document has no scenes")]
    NoScene,
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error(transparent)]
    Character(#[from] CharacterError),
    #[error(transparent)]
    Camera(#[from] CameraError),
    #[error("frame {frame}: {source}")]
    AtFrame {
        frame: u64,
        #[source]
        source: Box<RuntimeError>,
    },
}

impl RuntimeError {
    /// Frame at which a simulation error happened.
    pub fn frame(&self) -> Option<u64> {
        match self {
            RuntimeError::AtFrame { frame, .. } => Some(*frame),
            _ => None,
        }
    }

    fn at(self, frame: u64) -> RuntimeError {
        RuntimeError::AtFrame { frame, source: Box::new(self) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub frames: u64,
    pub trace_stride: u64,
    /// Seed for generated demo content. The loop itself draws nothing.
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { dt: 1.0 / 60.0, frames: 600, trace_stride: 1, seed: 0 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), RuntimeError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(RuntimeError::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if self.trace_stride == 0 {
            return Err(RuntimeError::InvalidConfig("trace stride must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Input,
    FrameStarted,
    Physics,
    CharacterSimulate,
    CharacterRender,
    Camera,
    FrameEnded,
    TraceSample,
}

/// What a listener sees of the running frame.
pub struct FrameContext<'a> {
    pub frame: u64,
    pub world: &'a mut World,
    pub registry: &'a mut ControllerRegistry,
    /// Phases already entered this frame, the current one last.
    pub phases: &'a [Phase],
}

impl FrameContext<'_> {
    /// Always fails: the listener list is frozen while a frame runs.
    pub fn register_listener(
        &mut self,
        _order_key: i64,
        _listener: Box<dyn FrameListener>,
    ) -> Result<ListenerHandle, RuntimeError> {
        Err(RuntimeError::MidFrameMutation)
    }
}

pub trait FrameListener {
    fn frame_started(&mut self, _ctx: &mut FrameContext<'_>) {}
    fn frame_ended(&mut self, _ctx: &mut FrameContext<'_>) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ListenerHandle(u64);

struct ListenerEntry {
    handle: ListenerHandle,
    order_key: i64,
    listener: Box<dyn FrameListener>,
}

/// A world, its character registry, an optional camera rig and the loop
/// state that drives them.
pub struct Simulation {
    pub world: World,
    pub registry: ControllerRegistry,
    pub rig: Option<CameraRig>,
    pub binding: InputBinding,
    /// Character that receives input.
    pub controlled: Option<CharacterId>,
    listeners: Vec<ListenerEntry>,
    next_listener: u64,
    held: Vec<String>,
    camera_pose: Option<CameraPose>,
    frame_phases: Vec<Phase>,
    phase_log: Option<Vec<(u64, Phase)>>,
}

impl std::fmt::Debug for Simulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Simulation")
            .field("world", &self.world.id())
            .field("characters", &self.registry.characters().len())
            .field("listeners", &self.listeners.len())
            .finish()
    }
}

impl Simulation {
    /// Wraps an existing setup. The camera pose starts as whatever the rig
    /// computes for the current state.
    pub fn new(
        world: World,
        registry: ControllerRegistry,
        mut rig: Option<CameraRig>,
    ) -> Result<Simulation, RuntimeError> {
        let camera_pose = match rig.as_mut() {
            Some(r) => Some(r.update(&world, &registry)?),
            None => None,
        };
        let controlled = match &rig {
            Some(r) => Some(r.character()),
            None => (!registry.characters().is_empty()).then_some(0),
        };
        Ok(Simulation {
            world,
            registry,
            rig,
            binding: InputBinding::default(),
            controlled,
            listeners: Vec::new(),
            next_listener: 0,
            held: Vec::new(),
            camera_pose,
            frame_phases: Vec::new(),
            phase_log: None,
        })
    }

    /// Spawns a character at every `controller=character` node of the world
    /// and attaches a chasing camera to the first one.
    pub fn from_world(mut world: World) -> Result<Simulation, RuntimeError> {
        let mut registry = ControllerRegistry::create(&world)?;
        for spawn in world.character_spawns().to_vec() {
            let desc = CharacterDesc::from_spawn(&spawn)?;
            let t = world.world_transform(spawn.node)?;
            let foot = t.position - desc.center_offset(desc.capsule_height);
            registry.add_character(&mut world, desc, foot, yaw_of(t.orientation), Some(spawn.node))?;
        }
        let rig = if registry.characters().is_empty() {
            None
        } else {
            Some(CameraRig::attach(&mut world, &registry, CameraMode::Chasing, 0, CameraParams::default())?)
        };
        Simulation::new(world, registry, rig)
    }

    /// Instantiates the first scene of a document. Mesh assets resolve
    /// against `base_dir`.
    pub fn from_document(doc: &SceneDocument, base_dir: &Path) -> Result<Simulation, RuntimeError> {
        let scene = doc.scenes.first().ok_or(RuntimeError::NoScene)?;
        Simulation::from_world(World::instantiate_with_assets(doc, &scene.name, base_dir)?)
    }

    /// Reads, instantiates and wraps a scene file.
    pub fn load(path: &Path) -> Result<Simulation, RuntimeError> {
        let bytes = std::fs::read(path)
            .map_err(|e| RuntimeError::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        let doc = parse_scenes(&bytes)?;
        Simulation::from_document(&doc, path.parent().unwrap_or(Path::new(".")))
    }

    /// Adds a listener. Lower keys run first; equal keys run in
    /// registration order.
    pub fn register_listener(&mut self, order_key: i64, listener: Box<dyn FrameListener>) -> ListenerHandle {
        let handle = ListenerHandle(self.next_listener);
        self.next_listener += 1;
        let at = self.listeners.partition_point(|e| e.order_key <= order_key);
        self.listeners.insert(at, ListenerEntry { handle, order_key, listener });
        handle
    }

    pub fn unregister_listener(&mut self, handle: ListenerHandle) -> bool {
        let before = self.listeners.len();
        self.listeners.retain(|e| e.handle != handle);
        self.listeners.len() != before
    }

    /// Starts recording every phase entered, tagged with its frame.
    pub fn enable_phase_log(&mut self) {
        self.phase_log = Some(Vec::new());
    }

    pub fn phase_log(&self) -> &[(u64, Phase)] {
        self.phase_log.as_deref().unwrap_or(&[])
    }

    /// Latest camera pose, if a rig is attached.
    pub fn camera_pose(&self) -> Option<&CameraPose> {
        self.camera_pose.as_ref()
    }

    /// Digest of the current state.
    pub fn hash_state(&self) -> String {
        hash_state(&self.world, Some(&self.registry), self.camera_pose.as_ref())
    }

    /// Runs `config.frames` frames from frame 0. Events scripted at or
    /// after `config.frames` are never dispatched.
    pub fn run(&mut self, script: &[InputEvent], config: &SimConfig) -> Result<StateTrace, RuntimeError> {
        config.validate()?;
        if let Some(i) = script.windows(2).position(|w| w[0].frame > w[1].frame) {
            return Err(RuntimeError::UnsortedScript(i + 1));
        }
        let initial = StateSample::capture(&self.world, Some(&self.registry), self.camera_pose.as_ref());
        let mut trace = StateTrace::new(&initial);
        for node in self.world.nodes() {
            for sound in &node.attachments.sounds {
                trace.sounds.push(SoundEvent { frame: 0, node: node.id, file: sound.file.clone() });
            }
        }
        let mut cursor = 0;
        for frame in 0..config.frames {
            let end = cursor + script[cursor..].partition_point(|e| e.frame <= frame);
            self.frame(frame, &script[cursor..end], config, &mut trace).map_err(|e| e.at(frame))?;
            cursor = end;
        }
        Ok(trace)
    }

    fn enter(&mut self, frame: u64, phase: Phase) {
        self.frame_phases.push(phase);
        if let Some(log) = &mut self.phase_log {
            log.push((frame, phase));
        }
    }

    fn frame(
        &mut self,
        frame: u64,
        events: &[InputEvent],
        config: &SimConfig,
        trace: &mut StateTrace,
    ) -> Result<(), RuntimeError> {
        self.frame_phases.clear();

        self.enter(frame, Phase::Input);
        for event in events {
            trace.dispatched += 1;
            self.dispatch(frame, event, &mut trace.warnings)?;
        }
        self.apply_held()?;

        self.enter(frame, Phase::FrameStarted);
        self.notify(frame, true);

        self.enter(frame, Phase::Physics);
        for report in self.world.physics.step(config.dt)? {
            trace.body_hits.push((frame, report));
        }
        self.world.sync_from_physics()?;

        self.enter(frame, Phase::CharacterSimulate);
        for id in 0..self.registry.characters().len() as CharacterId {
            let reports = self.registry.simulate(&mut self.world, id, config.dt)?;
            let c = self.registry.get(id)?;
            for report in reports {
                trace.character_hits.push(CharacterHit {
                    frame,
                    character: id,
                    velocity: c.velocity,
                    mass: c.desc.mass,
                    push_strength: c.desc.push_strength,
                    report,
                });
            }
        }

        self.enter(frame, Phase::CharacterRender);
        self.registry.render_all(&mut self.world)?;

        self.enter(frame, Phase::Camera);
        if let Some(rig) = &mut self.rig {
            let pose = rig.update(&self.world, &self.registry)?;
            rig.apply(&mut self.world, &pose, &self.registry)?;
            self.camera_pose = Some(pose);
        }

        self.enter(frame, Phase::FrameEnded);
        self.notify(frame, false);

        if frame.is_multiple_of(config.trace_stride) {
            self.enter(frame, Phase::TraceSample);
            trace.record(frame, StateSample::capture(&self.world, Some(&self.registry), self.camera_pose.as_ref()));
        }
        Ok(())
    }

    fn notify(&mut self, frame: u64, started: bool) {
        let mut listeners = std::mem::take(&mut self.listeners);
        let mut ctx = FrameContext {
            frame,
            world: &mut self.world,
            registry: &mut self.registry,
            phases: &self.frame_phases,
        };
        for entry in &mut listeners {
            if started {
                entry.listener.frame_started(&mut ctx);
            } else {
                entry.listener.frame_ended(&mut ctx);
            }
        }
        self.listeners = listeners;
    }

    fn dispatch(&mut self, frame: u64, event: &InputEvent, warnings: &mut Vec<String>) -> Result<(), RuntimeError> {
        let device = match event.device {
            Device::Keyboard => "keyboard",
            Device::Mouse => "mouse",
        };
        if event.kind == InputKind::Move {
            match (self.binding.axes.get(&event.code), self.controlled) {
                (Some(scale), Some(id)) => {
                    let yaw = self.registry.get(id)?.yaw + event.value * scale;
                    self.registry.set_yaw(id, yaw)?;
                }
                (Some(_), None) => warnings.push(format!("frame {frame}: no character for axis {}", event.code)),
                (None, _) => warnings.push(format!("frame {frame}: no binding for {device} axis {}", event.code)),
            }
            return Ok(());
        }
        let Some(intent) = self.binding.keys.get(&event.code).copied() else {
            warnings.push(format!("frame {frame}: no binding for {device} key {}", event.code));
            return Ok(());
        };
        match event.kind {
            InputKind::Press => {
                if !self.held.contains(&event.code) {
                    self.held.push(event.code.clone());
                }
                match intent {
                    Intent::Jump(speed) => {
                        if let Some(id) = self.controlled {
                            self.registry.jump(id, speed)?;
                        }
                    }
                    Intent::Camera(mode) => {
                        if let Some(rig) = &mut self.rig {
                            rig.set_mode(mode);
                        }
                    }
                    _ => {}
                }
            }
            InputKind::Release => self.held.retain(|c| c != &event.code),
            InputKind::Move => unreachable!(),
        }
        Ok(())
    }

    /// Turns the held keys into a velocity and a crouch height. Standing
    /// back up is retried every frame until there is room.
    fn apply_held(&mut self) -> Result<(), RuntimeError> {
        let Some(id) = self.controlled else { return Ok(()) };
        let c = self.registry.get(id)?;
        let velocity = self.binding.movement(&self.held, c.yaw);
        let full = c.desc.capsule_height;
        let min = crate::character::MIN_HEIGHT_FRACTION * full;
        let wanted = self.binding.crouch_fraction(&self.held).map_or(full, |f| (f * full).clamp(min, full));
        let current = c.current_height;
        self.registry.set_velocity(id, DVec3::new(velocity.x, 0.0, velocity.z))?;
        if wanted != current {
            self.registry.resize_volume(&mut self.world, id, wanted)?;
        }
        Ok(())
    }
}
