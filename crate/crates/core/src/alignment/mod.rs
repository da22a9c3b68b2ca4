//! Similarity alignment of a reconstruction onto ground truth.
//!
//! Rough alignment works on camera positions only: translate the estimated
//! centroid onto the ground-truth centroid, scale about it, then rotate about
//! it with Kabsch. Point-to-point ICP on mesh vertices refines the result.

mod icp;
mod kabsch;
mod transform;

use thiserror::Error;

pub use icp::{icp_refine, IcpParams, IcpResult};
pub use kabsch::{kabsch, paired_rms, rough_align, rough_align_points};
pub use transform::SimilarityTransform;

use crate::mesh_io::TriangleMesh;
use crate::pose::PoseSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlignmentError {
    #[error("pose count mismatch: {estimated} estimated vs {ground_truth} ground truth")]
    CountMismatch {
        estimated: usize,
        ground_truth: usize,
    },
    #[error("at least 3 points are required, got {0}")]
    TooFewPoints(usize),
    #[error("estimated positions all coincide with their centroid; scale is undefined")]
    ZeroScale,
    #[error("points are collinear or coincident; rotation is undetermined")]
    Degenerate,
    #[error("non-finite coordinates")]
    NonFinite,
    #[error("ICP parameters must all be positive")]
    InvalidParams,
    #[error("clouds too far apart — rough alignment required first")]
    TooFarApart,
}

/// Maps every vertex through `transform`; connectivity, UVs and material are
/// untouched.
pub fn apply_transform(mesh: &TriangleMesh, transform: &SimilarityTransform) -> TriangleMesh {
    let mut out = mesh.clone();
    if !transform.is_identity() {
        for v in &mut out.vertices {
            *v = transform.apply(v);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentReport {
    pub rough: SimilarityTransform,
    /// Rigid ICP correction applied after `rough`; identity if ICP failed.
    pub icp: SimilarityTransform,
    /// Pose-space RMS between transformed estimated and ground-truth
    /// positions.
    pub rough_rms: f64,
    /// Vertex-space correspondence RMS after ICP, if it ran.
    pub icp_rms: Option<f64>,
    pub icp_iterations: usize,
    pub icp_failed: bool,
    pub icp_error: Option<AlignmentError>,
}

impl AlignmentReport {
    /// `rough` followed by `icp`.
    pub fn total(&self) -> SimilarityTransform {
        self.rough.then(&self.icp)
    }
}

/// Rough-aligns `recon` using the paired pose sets, then refines it onto
/// `gt_mesh` with ICP. An ICP failure keeps the rough result and sets
/// `icp_failed`.
pub fn align_reconstruction(
    recon: &TriangleMesh,
    estimated: &PoseSet,
    ground_truth: &PoseSet,
    gt_mesh: &TriangleMesh,
    params: &IcpParams,
) -> Result<(TriangleMesh, AlignmentReport), AlignmentError> {
    let rough = rough_align(estimated, ground_truth)?;
    let mapped: Vec<_> = estimated.iter().map(|p| rough.apply(&p.position)).collect();
    let rough_rms = paired_rms(&mapped, &ground_truth.positions());
    let roughed = apply_transform(recon, &rough);

    let mut report = AlignmentReport {
        rough,
        icp: SimilarityTransform::identity(),
        rough_rms,
        icp_rms: None,
        icp_iterations: 0,
        icp_failed: false,
        icp_error: None,
    };
    match icp_refine(&roughed.vertices, &gt_mesh.vertices, params) {
        Ok(res) => {
            report.icp = res.transform;
            report.icp_rms = Some(res.rms);
            report.icp_iterations = res.iterations;
            Ok((apply_transform(&roughed, &res.transform), report))
        }
        Err(err) => {
            log::warn!("ICP failed, keeping rough alignment: {err}");
            report.icp_failed = true;
            report.icp_error = Some(err);
            Ok((roughed, report))
        }
    }
}
