use nalgebra::{Point3, UnitQuaternion, Vector3};
use rand::seq::index;
use rand_distr::{Distribution, Normal};

use super::PipelineError;
use crate::alignment::{apply_transform, SimilarityTransform};
use crate::geometry::{camera_radius, welzl_ses_seeded};
use crate::mesh_io::TriangleMesh;
use crate::pose::{CameraPose, PoseSet};
use crate::rng::{self, Stream};

/// Similarity applied to the degraded mesh and its estimated poses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub scale: f64,
    /// Euler angles (roll, pitch, yaw) in degrees.
    pub rotation_deg: [f64; 3],
    /// Translation as a fraction of the SES radius.
    pub translation: [f64; 3],
}

impl Default for Perturbation {
    fn default() -> Self {
        Self {
            scale: 1.0,
            rotation_deg: [0.0; 3],
            translation: [0.0; 3],
        }
    }
}

impl Perturbation {
    pub fn transform(&self, ses_radius: f64) -> SimilarityTransform {
        let [r, p, y] = self.rotation_deg.map(f64::to_radians);
        SimilarityTransform::from_scale_rotation_translation(
            self.scale,
            UnitQuaternion::from_euler_angles(r, p, y),
            Vector3::from(self.translation) * ses_radius,
        )
    }
}

/// Controlled stand-in for an external reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegradeParams {
    /// Gaussian vertex noise per axis, as a fraction of the SES radius.
    pub vertex_noise_sigma: f64,
    /// Fraction of triangles kept, in `(0, 1]`.
    pub decimation_ratio: f64,
    pub perturb: Option<Perturbation>,
    /// Gaussian noise on estimated camera positions, as a fraction of the
    /// camera radius.
    pub pose_noise_sigma: f64,
    pub seed: u64,
}

impl Default for DegradeParams {
    fn default() -> Self {
        Self {
            vertex_noise_sigma: 0.0,
            decimation_ratio: 1.0,
            perturb: None,
            pose_noise_sigma: 0.0,
            seed: 0,
        }
    }
}

impl DegradeParams {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::InvalidDegrade(m.to_string()));
        let non_negative = |x: f64| x.is_finite() && x >= 0.0;
        if !non_negative(self.vertex_noise_sigma) {
            return bad("vertex noise must be non-negative");
        }
        if !non_negative(self.pose_noise_sigma) {
            return bad("pose noise must be non-negative");
        }
        if !(self.decimation_ratio > 0.0 && self.decimation_ratio <= 1.0) {
            return bad("decimation ratio must be in (0, 1]");
        }
        if let Some(p) = &self.perturb {
            if !(p.scale.is_finite() && p.scale > 0.0) {
                return bad("perturbation scale must be positive");
            }
            if !p
                .rotation_deg
                .iter()
                .chain(&p.translation)
                .all(|x| x.is_finite())
            {
                return bad("perturbation must be finite");
            }
        }
        Ok(())
    }
}

/// Keeps a seeded uniform subset of triangles and drops vertices and UVs no
/// longer referenced.
fn decimate(mesh: &TriangleMesh, ratio: f64, seed: u64) -> Result<TriangleMesh, PipelineError> {
    let total = mesh.triangles.len();
    let keep = (ratio * total as f64).round() as usize;
    if keep == 0 {
        return Err(PipelineError::DecimatedAway);
    }
    if keep >= total {
        return Ok(mesh.clone());
    }
    let mut picked =
        index::sample(&mut rng::stream(seed, Stream::Decimate), total, keep).into_vec();
    picked.sort_unstable();

    let compact = |count: usize, faces: &mut dyn Iterator<Item = [usize; 3]>| {
        let mut remap = vec![usize::MAX; count];
        let mut order = Vec::new();
        let faces: Vec<[usize; 3]> = faces
            .map(|f| {
                f.map(|i| {
                    if remap[i] == usize::MAX {
                        remap[i] = order.len();
                        order.push(i);
                    }
                    remap[i]
                })
            })
            .collect();
        (faces, order)
    };
    let (triangles, used) = compact(
        mesh.vertices.len(),
        &mut picked.iter().map(|&t| mesh.triangles[t]),
    );
    let mut out = TriangleMesh {
        name: mesh.name.clone(),
        vertices: used.iter().map(|&i| mesh.vertices[i]).collect(),
        triangles,
        uvs: Vec::new(),
        uv_triangles: Vec::new(),
        material: mesh.material.clone(),
    };
    if mesh.has_uvs() {
        let (uv_triangles, used_uv) = compact(
            mesh.uvs.len(),
            &mut picked.iter().map(|&t| mesh.uv_triangles[t]),
        );
        out.uvs = used_uv.iter().map(|&i| mesh.uvs[i]).collect();
        out.uv_triangles = uv_triangles;
    }
    Ok(out)
}

/// Produces a synthetic "reconstruction" of `mesh` and matching estimated
/// poses.
///
/// Order: vertex noise, decimation, then the perturbation similarity applied
/// to both mesh and a copy of `gt_poses`, then pose noise. With default
/// parameters the outputs equal the inputs.
pub fn degrade_mesh(
    mesh: &TriangleMesh,
    gt_poses: &PoseSet,
    params: &DegradeParams,
) -> Result<(TriangleMesh, PoseSet), PipelineError> {
    params.validate()?;
    let ses = welzl_ses_seeded(&mesh.vertices, params.seed)
        .map_err(|e| PipelineError::Geometry(e.to_string()))?;
    let mut out = mesh.clone();
    let mut poses = gt_poses.clone();

    if params.vertex_noise_sigma > 0.0 {
        let normal = Normal::new(0.0, params.vertex_noise_sigma * ses.radius)
            .map_err(|e| PipelineError::InvalidDegrade(e.to_string()))?;
        let mut rng = rng::stream(params.seed, Stream::VertexNoise);
        for v in &mut out.vertices {
            *v += Vector3::from_fn(|_, _| normal.sample(&mut rng));
        }
    }
    if params.decimation_ratio < 1.0 {
        out = decimate(&out, params.decimation_ratio, params.seed)?;
    }
    if let Some(p) = &params.perturb {
        let t = p.transform(ses.radius);
        out = apply_transform(&out, &t);
        for pose in &mut poses.poses {
            pose.position = t.apply(&pose.position);
            pose.rotation = t.rotation() * pose.rotation;
        }
    }
    if params.pose_noise_sigma > 0.0 {
        if let Some(first) = gt_poses.iter().next() {
            let r_cam = camera_radius(ses.radius, first.vertical_fov_deg)
                .map_err(|e| PipelineError::Geometry(e.to_string()))?;
            let normal = Normal::new(0.0, params.pose_noise_sigma * r_cam)
                .map_err(|e| PipelineError::InvalidDegrade(e.to_string()))?;
            let mut rng = rng::stream(params.seed, Stream::PoseNoise);
            for pose in &mut poses.poses {
                let jitter: Vector3<f64> = Vector3::from_fn(|_, _| normal.sample(&mut rng));
                *pose = CameraPose {
                    position: Point3::from(pose.position.coords + jitter),
                    ..*pose
                };
            }
        }
    }
    Ok((out, poses))
}
