//! Plain-text indexed triangle meshes used for convex and trimesh shapes.
//!
//! ```text
//! # comment
//! v 0 0 0
//! v 1 0 0
//! v 0 1 0
//! f 1 2 3
//! ```
//! Indices are 1-based.

use std::path::{Path, PathBuf};

use glam::DVec3;
use thiserror::Error;

use crate::spatial::Aabb;

/// Triangles with area below this are dropped on load.
pub const DEGENERATE_AREA: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("cannot read mesh asset {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("mesh has no valid triangles")]
    EmptyMesh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMeshData {
    pub vertices: Vec<DVec3>,
    pub triangles: Vec<[u32; 3]>,
    /// Number of zero-area faces removed while loading.
    pub dropped_degenerate: usize,
}

impl TriangleMeshData {
    pub fn bounds(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter().copied()).expect("mesh has vertices")
    }

    pub fn triangle(&self, i: usize) -> [DVec3; 3] {
        let [a, b, c] = self.triangles[i];
        [self.vertices[a as usize], self.vertices[b as usize], self.vertices[c as usize]]
    }
}

pub fn load_mesh_asset(path: impl AsRef<Path>) -> Result<TriangleMeshData, MeshError> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|source| MeshError::Io { path: path.to_path_buf(), source })?;
    parse_mesh_asset(&text)
}

pub fn parse_mesh_asset(text: &str) -> Result<TriangleMeshData, MeshError> {
    let mut vertices = Vec::new();
    let mut faces: Vec<(usize, [u64; 3])> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let tag = parts.next().unwrap_or("");
        let fields: Vec<&str> = parts.collect();
        let err = |message: String| MeshError::Format { line: line_no, message };
        if fields.len() != 3 {
            return Err(err(format!("expected 3 fields after '{tag}', found {}", fields.len())));
        }
        match tag {
            "v" => {
                let mut xyz = [0.0; 3];
                for (slot, f) in xyz.iter_mut().zip(&fields) {
                    let v: f64 = f.parse().map_err(|_| err(format!("bad coordinate '{f}'")))?;
                    if !v.is_finite() {
                        return Err(err(format!("non-finite coordinate '{f}'")));
                    }
                    *slot = v;
                }
                vertices.push(DVec3::from_array(xyz));
            }
            "f" => {
                let mut idx = [0u64; 3];
                for (slot, f) in idx.iter_mut().zip(&fields) {
                    let v: u64 = f.parse().map_err(|_| err(format!("bad vertex index '{f}'")))?;
                    if v == 0 {
                        return Err(err("vertex indices are 1-based".into()));
                    }
                    *slot = v;
                }
                faces.push((line_no, idx));
            }
            other => return Err(err(format!("unknown record '{other}'"))),
        }
    }

    let mut triangles = Vec::with_capacity(faces.len());
    let mut dropped = 0;
    for (line, idx) in faces {
        if let Some(bad) = idx.iter().find(|&&v| v as usize > vertices.len()) {
            return Err(MeshError::Format {
                line,
                message: format!("vertex index {bad} exceeds vertex count {}", vertices.len()),
            });
        }
        let tri = idx.map(|v| (v - 1) as u32);
        let [a, b, c] = tri.map(|v| vertices[v as usize]);
        if 0.5 * (b - a).cross(c - a).length() < DEGENERATE_AREA {
            dropped += 1;
            continue;
        }
        triangles.push(tri);
    }
    if triangles.is_empty() || vertices.len() < 3 {
        return Err(MeshError::EmptyMesh);
    }
    Ok(TriangleMeshData { vertices, triangles, dropped_degenerate: dropped })
}
