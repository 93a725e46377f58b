//! Frame-indexed input scripts and key bindings.
//!
//! Script lines are `frame device kind code [value]`:
//!
//! ```text
//! # walk, then turn
//! 0 keyboard press W
//! 60 keyboard release W
//! 120 mouse move yaw -0.25
//! ```
//!
//! Binding lines map codes to intents:
//!
//! ```text
//! key W = move_forward 2.0
//! key Space = jump 4.0
//! key C = crouch 0.55
//! key 1 = camera chasing
//! axis yaw = turn 1.0
//! max_speed 3.0
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use glam::DVec3;

use super::RuntimeError;
use crate::camera::CameraMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Device {
    Keyboard,
    Mouse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Press,
    Release,
    Move,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputEvent {
    pub frame: u64,
    pub device: Device,
    pub kind: InputKind,
    pub code: String,
    /// Axis delta, `Move` events only.
    pub value: f64,
}

impl fmt::Display for InputEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let device = match self.device {
            Device::Keyboard => "keyboard",
            Device::Mouse => "mouse",
        };
        let kind = match self.kind {
            InputKind::Press => "press",
            InputKind::Release => "release",
            InputKind::Move => "move",
        };
        write!(f, "{} {device} {kind} {}", self.frame, self.code)?;
        if self.kind == InputKind::Move {
            write!(f, " {}", crate::scene_format::format_number(self.value))?;
        }
        Ok(())
    }
}

fn script_error(line: usize, message: impl Into<String>) -> RuntimeError {
    RuntimeError::Script { line, message: message.into() }
}

/// Parses a script. Events are ordered by frame, keeping line order within
/// a frame.
pub fn parse_script(text: &str) -> Result<Vec<InputEvent>, RuntimeError> {
    let mut events = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() < 4 {
            return Err(script_error(line, "expected `frame device kind code [value]`"));
        }
        let frame: u64 = fields[0].parse().map_err(|_| script_error(line, format!("bad frame '{}'", fields[0])))?;
        let device = match fields[1] {
            "keyboard" => Device::Keyboard,
            "mouse" => Device::Mouse,
            other => return Err(script_error(line, format!("unknown device '{other}'"))),
        };
        let kind = match fields[2] {
            "press" => InputKind::Press,
            "release" => InputKind::Release,
            "move" => InputKind::Move,
            other => return Err(script_error(line, format!("unknown event kind '{other}'"))),
        };
        let code = fields[3].to_string();
        let value = match (kind, fields.get(4)) {
            (InputKind::Move, Some(v)) => {
                let v: f64 = v.parse().map_err(|_| script_error(line, format!("bad value '{v}'")))?;
                if !v.is_finite() {
                    return Err(script_error(line, "value must be finite"));
                }
                v
            }
            (InputKind::Move, None) => return Err(script_error(line, "move events need a value")),
            (_, None) => 0.0,
            (_, Some(_)) => return Err(script_error(line, "only move events carry a value")),
        };
        if fields.len() > 5 {
            return Err(script_error(line, "trailing fields"));
        }
        events.push(InputEvent { frame, device, kind, code, value });
    }
    events.sort_by_key(|e| e.frame);
    Ok(events)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Intent {
    /// Speed in m/s.
    MoveForward(f64),
    MoveBack(f64),
    StrafeLeft(f64),
    StrafeRight(f64),
    /// Take-off speed in m/s.
    Jump(f64),
    /// Held height as a fraction of the standing height.
    Crouch(f64),
    Camera(CameraMode),
}

impl Intent {
    fn parse(name: &str, value: Option<&str>, line: usize) -> Result<Intent, RuntimeError> {
        let num = |default: f64| -> Result<f64, RuntimeError> {
            match value {
                None => Ok(default),
                Some(v) => v
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite() && *x >= 0.0)
                    .ok_or_else(|| binding_error(line, format!("bad value '{v}'"))),
            }
        };
        Ok(match name {
            "move_forward" => Intent::MoveForward(num(2.0)?),
            "move_back" => Intent::MoveBack(num(2.0)?),
            "strafe_left" => Intent::StrafeLeft(num(2.0)?),
            "strafe_right" => Intent::StrafeRight(num(2.0)?),
            "jump" => Intent::Jump(num(4.0)?),
            "crouch" => {
                let f = num(0.55)?;
                if !(0.0..=1.0).contains(&f) {
                    return Err(binding_error(line, "crouch fraction must lie in [0, 1]"));
                }
                Intent::Crouch(f)
            }
            "camera" => {
                let mode = value.ok_or_else(|| binding_error(line, "camera needs a mode"))?;
                Intent::Camera(CameraMode::from_str(mode).map_err(|e| binding_error(line, e.to_string()))?)
            }
            other => return Err(binding_error(line, format!("unknown intent '{other}'"))),
        })
    }
}

fn binding_error(line: usize, message: impl Into<String>) -> RuntimeError {
    RuntimeError::Binding { line, message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputBinding {
    pub keys: BTreeMap<String, Intent>,
    /// Axis name to radians of yaw per unit of axis delta.
    pub axes: BTreeMap<String, f64>,
    /// Cap on the magnitude of the combined movement velocity.
    pub max_speed: f64,
}

impl Default for InputBinding {
    fn default() -> Self {
        let keys = [
            ("W", Intent::MoveForward(2.0)),
            ("S", Intent::MoveBack(2.0)),
            ("A", Intent::StrafeLeft(2.0)),
            ("D", Intent::StrafeRight(2.0)),
            ("Space", Intent::Jump(4.0)),
            ("C", Intent::Crouch(0.55)),
            ("X", Intent::Crouch(0.4)),
            ("1", Intent::Camera(CameraMode::Chasing)),
            ("2", Intent::Camera(CameraMode::Fixed)),
            ("3", Intent::Camera(CameraMode::FirstPerson)),
        ];
        InputBinding {
            keys: keys.into_iter().map(|(k, i)| (k.to_string(), i)).collect(),
            axes: [("yaw".to_string(), 1.0)].into_iter().collect(),
            max_speed: 2.0,
        }
    }
}

impl InputBinding {
    pub fn parse(text: &str) -> Result<InputBinding, RuntimeError> {
        let mut binding = InputBinding { keys: BTreeMap::new(), axes: BTreeMap::new(), max_speed: f64::INFINITY };
        let mut explicit_max = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            match fields.as_slice() {
                ["max_speed", v] => {
                    binding.max_speed = v
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite() && *x > 0.0)
                        .ok_or_else(|| binding_error(line, format!("bad max_speed '{v}'")))?;
                    explicit_max = true;
                }
                ["key", code, "=", intent, rest @ ..] if rest.len() <= 1 => {
                    let intent = Intent::parse(intent, rest.first().copied(), line)?;
                    binding.keys.insert(code.to_string(), intent);
                }
                ["axis", code, "=", "turn", rest @ ..] if rest.len() <= 1 => {
                    let scale = match rest.first() {
                        None => 1.0,
                        Some(v) => v
                            .parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .ok_or_else(|| binding_error(line, format!("bad scale '{v}'")))?,
                    };
                    binding.axes.insert(code.to_string(), scale);
                }
                _ => return Err(binding_error(line, "expected `key CODE = INTENT [VALUE]`, `axis CODE = turn [SCALE]` or `max_speed V`")),
            }
        }
        if !explicit_max {
            binding.max_speed = binding.keys.values().filter_map(|i| i.move_speed()).fold(0.0, f64::max);
        }
        Ok(binding)
    }

    /// Horizontal velocity for the held keys in the frame of `yaw`.
    pub fn movement(&self, held: &[String], yaw: f64) -> DVec3 {
        let forward = crate::math::yaw_forward(yaw);
        let right = forward.cross(DVec3::Y);
        let mut v = DVec3::ZERO;
        for code in held {
            v += match self.keys.get(code) {
                Some(Intent::MoveForward(s)) => forward * *s,
                Some(Intent::MoveBack(s)) => -forward * *s,
                Some(Intent::StrafeLeft(s)) => -right * *s,
                Some(Intent::StrafeRight(s)) => right * *s,
                _ => DVec3::ZERO,
            };
        }
        let speed = v.length();
        if speed > self.max_speed {
            v *= self.max_speed / speed;
        }
        v
    }

    /// Smallest crouch fraction among the held keys.
    pub fn crouch_fraction(&self, held: &[String]) -> Option<f64> {
        held.iter()
            .filter_map(|c| match self.keys.get(c) {
                Some(Intent::Crouch(f)) => Some(*f),
                _ => None,
            })
            .reduce(f64::min)
    }
}

impl Intent {
    fn move_speed(&self) -> Option<f64> {
        match self {
            Intent::MoveForward(s) | Intent::MoveBack(s) | Intent::StrafeLeft(s) | Intent::StrafeRight(s) => Some(*s),
            _ => None,
        }
    }
}
