//! Camera rig construction: smallest enclosing sphere, camera distance,
//! Fibonacci-sphere placement and look-at orientation.

mod camera;
mod fibonacci;
mod rig;
mod ses;

use thiserror::Error;

pub use camera::{camera_radius, look_at, tan_deg, LOOK_AT_POLE_TOLERANCE};
pub use fibonacci::fibonacci_sphere;
pub use rig::{
    build_rig, generate_rig, CameraRig, CameraRigSpec, DEFAULT_POSE_COUNT, DEFAULT_VERTICAL_FOV_DEG,
};
pub use ses::{welzl_ses, welzl_ses_seeded, Sphere};

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("point set is empty")]
    EmptyInput,
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("vertical field of view must be in (0, 180) degrees, got {0}")]
    InvalidFov(f64),
    #[error("sphere radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("point count must be at least 1")]
    ZeroCount,
    #[error("camera position coincides with its target")]
    EyeAtTarget,
}
