//! Software rendering of synthetic frames.
//!
//! A pinhole camera, a z-buffer, perspective-correct texture coordinates and
//! near-uniform diffuse shading. There is no anti-aliasing: every pixel is
//! either the exact background color or was written by a triangle, which
//! keeps exact-match background masking sound.

mod camera;
mod raster;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

pub use camera::{project, CameraIntrinsics, Projection, Resolution};
pub use raster::{rasterize, RenderSettings, TextureFilter, MIN_SHADE, NEAR_PLANE};

use crate::mesh_io::{write_ppm, RasterImage, TriangleMesh};
use crate::pose::PoseSet;

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("pose set is empty")]
    NoPoses,
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    BadResolution { width: usize, height: usize },
    #[error("vertical field of view must be in (0, 180) degrees, got {0}")]
    BadFov(f64),
    #[error("lighting must be in (0, 1], got {0}")]
    BadLighting(f64),
}

/// Renders one frame per pose, in pose order. Frames are rendered in
/// parallel.
pub fn render_rig(
    mesh: &TriangleMesh,
    poses: &PoseSet,
    intrinsics: &CameraIntrinsics,
    settings: &RenderSettings,
) -> Result<Vec<RasterImage>, RenderError> {
    if poses.is_empty() {
        return Err(RenderError::NoPoses);
    }
    settings.validate()?;
    Ok(poses
        .poses
        .par_iter()
        .map(|pose| rasterize(mesh, pose, intrinsics, settings))
        .collect())
}

/// `frame_0000.ppm`, `frame_0001.ppm`, ...
pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:04}.ppm")
}

/// Writes frames as `frame_NNNN.ppm` in list order.
pub fn write_frames(frames: &[RasterImage], dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    frames
        .iter()
        .enumerate()
        .map(|(i, frame)| {
            let path = dir.join(frame_file_name(i));
            fs::write(&path, write_ppm(frame))?;
            Ok(path)
        })
        .collect()
}
