//! Headless virtual-environment toolkit.
//!
//! The crate is organised bottom-up: [`scene_format`] reads and writes scene
//! documents, [`scene_graph`] instantiates them, [`spatial`] indexes bounds,
//! [`physics`] and [`character`] move things, [`camera`] follows them and
//! [`runtime`] drives the fixed-step frame loop. [`cli`] wraps the pieces
//! used by the `vekit` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod math;
pub mod scene_format;
pub mod spatial;
pub mod physics;
pub mod scene_graph;
pub mod character;
pub mod camera;
pub mod runtime;
pub mod cli;
