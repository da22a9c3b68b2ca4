use nalgebra::{Matrix3, Point3, Vector3};

use super::RenderError;
use crate::geometry::tan_deg;
use crate::pose::CameraPose;

/// Pinhole intrinsics shared by every frame of a rig.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    width: usize,
    height: usize,
    vertical_fov_deg: f64,
}

/// Frame sizes used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Resolution {
    pub width: usize,
    pub height: usize,
}

impl Resolution {
    pub const P1080: Resolution = Resolution::new(1920, 1080);
    pub const P1440: Resolution = Resolution::new(2560, 1440);
    pub const P2160: Resolution = Resolution::new(3840, 2160);

    pub const fn new(width: usize, height: usize) -> Self {
        Self { width, height }
    }

    /// Parses `WxH` (e.g. `2560x1440`) or the names `1080p`, `1440p`, `4k`.
    pub fn parse(text: &str) -> Option<Self> {
        match text.trim().to_ascii_lowercase().as_str() {
            "1080p" => Some(Self::P1080),
            "1440p" => Some(Self::P1440),
            "4k" | "2160p" => Some(Self::P2160),
            other => {
                let (w, h) = other.split_once('x')?;
                Some(Self::new(w.trim().parse().ok()?, h.trim().parse().ok()?))
            }
        }
    }
}

impl std::fmt::Display for Resolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

impl CameraIntrinsics {
    pub fn new(width: usize, height: usize, vertical_fov_deg: f64) -> Result<Self, RenderError> {
        if width == 0 || height == 0 {
            return Err(RenderError::BadResolution { width, height });
        }
        if !(vertical_fov_deg > 0.0 && vertical_fov_deg < 180.0) {
            return Err(RenderError::BadFov(vertical_fov_deg));
        }
        Ok(Self {
            width,
            height,
            vertical_fov_deg,
        })
    }

    pub fn from_resolution(res: Resolution, vertical_fov_deg: f64) -> Result<Self, RenderError> {
        Self::new(res.width, res.height, vertical_fov_deg)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn vertical_fov_deg(&self) -> f64 {
        self.vertical_fov_deg
    }

    /// Focal length in pixels: `(height/2) / tan(vfov/2)`.
    pub fn focal_px(&self) -> f64 {
        (self.height as f64 / 2.0) / tan_deg(self.vertical_fov_deg / 2.0)
    }

    pub fn horizontal_fov_deg(&self) -> f64 {
        let aspect = self.width as f64 / self.height as f64;
        2.0 * (aspect * tan_deg(self.vertical_fov_deg / 2.0))
            .atan()
            .to_degrees()
    }

    pub fn principal_point(&self) -> (f64, f64) {
        (self.width as f64 / 2.0, self.height as f64 / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    /// Pixel coordinates (x right, y down, origin at the top-left image
    /// corner) and positive depth along the view axis.
    Visible {
        x: f64,
        y: f64,
        depth: f64,
    },
    Behind,
}

/// World-to-camera rotation of a pose.
pub(crate) fn world_to_camera(pose: &CameraPose) -> Matrix3<f64> {
    pose.rotation.to_rotation_matrix().into_inner().transpose()
}

pub(crate) fn to_camera(
    world_to_cam: &Matrix3<f64>,
    pose: &CameraPose,
    point: &Point3<f64>,
) -> Vector3<f64> {
    world_to_cam * (point - pose.position)
}

pub fn project(
    point: &Point3<f64>,
    pose: &CameraPose,
    intrinsics: &CameraIntrinsics,
) -> Projection {
    let pc = to_camera(&world_to_camera(pose), pose, point);
    if pc.z >= 0.0 {
        return Projection::Behind;
    }
    let f = intrinsics.focal_px();
    let (cx, cy) = intrinsics.principal_point();
    let depth = -pc.z;
    Projection::Visible {
        x: cx + f * pc.x / depth,
        y: cy - f * pc.y / depth,
        depth,
    }
}
