use rand::seq::SliceRandom;
use rand::Rng;

use super::camera::{camera_radius, check_fov, look_at};
use super::fibonacci::fibonacci_sphere;
use super::ses::{welzl_ses_seeded, Sphere};
use super::GeometryError;
use crate::mesh_io::TriangleMesh;
use crate::pose::{CameraPose, PoseSet};
use crate::rng::{self, Stream};

pub const DEFAULT_POSE_COUNT: usize = 100;
pub const DEFAULT_VERTICAL_FOV_DEG: f64 = 23.0;

/// How to place cameras around a mesh.
///
/// Rolls are drawn from SplitMix64 streams keyed on `seed`; the same seed
/// always yields the same rig, but the stream is not meant to match other
/// implementations draw for draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraRigSpec {
    pub count: usize,
    pub vertical_fov_deg: f64,
    pub seed: u64,
}

impl Default for CameraRigSpec {
    fn default() -> Self {
        Self {
            count: DEFAULT_POSE_COUNT,
            vertical_fov_deg: DEFAULT_VERTICAL_FOV_DEG,
            seed: 0,
        }
    }
}

impl CameraRigSpec {
    /// Half the vertical field of view, in radians.
    pub fn theta(&self) -> f64 {
        (self.vertical_fov_deg / 2.0).to_radians()
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.count == 0 {
            return Err(GeometryError::ZeroCount);
        }
        check_fov(self.vertical_fov_deg)
    }
}

/// A generated rig together with the sphere it was built around.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraRig {
    pub ses: Sphere,
    pub camera_radius: f64,
    pub poses: PoseSet,
}

pub fn generate_rig(mesh: &TriangleMesh, spec: &CameraRigSpec) -> Result<PoseSet, GeometryError> {
    build_rig(mesh, spec).map(|rig| rig.poses)
}

/// Places `spec.count` cameras on a Fibonacci sphere of radius
/// `R_SES / tan(vfov/2)` around the mesh's smallest enclosing sphere, each
/// looking at the sphere center with a uniform random roll, then shuffles
/// their order. Frame indices follow the shuffled order.
pub fn build_rig(mesh: &TriangleMesh, spec: &CameraRigSpec) -> Result<CameraRig, GeometryError> {
    spec.validate()?;
    let ses = welzl_ses_seeded(&mesh.vertices, spec.seed)?;
    let distance = camera_radius(ses.radius, spec.vertical_fov_deg)?;

    let mut roll_rng = rng::stream(spec.seed, Stream::Roll);
    let mut poses = fibonacci_sphere(spec.count)?
        .into_iter()
        .map(|dir| {
            let position = ses.center + dir * distance;
            let roll_deg = roll_rng.random_range(0.0..360.0);
            let rotation = look_at(&position, &ses.center, roll_deg)?;
            Ok(CameraPose {
                frame: 0,
                position,
                rotation,
                roll_deg,
                vertical_fov_deg: spec.vertical_fov_deg,
            })
        })
        .collect::<Result<Vec<_>, GeometryError>>()?;

    poses.shuffle(&mut rng::stream(spec.seed, Stream::Shuffle));
    for (frame, pose) in poses.iter_mut().enumerate() {
        pose.frame = frame;
    }
    Ok(CameraRig {
        ses,
        camera_radius: distance,
        poses: PoseSet::new(poses),
    })
}
