use nalgebra::{Matrix3, Point3, Rotation3, UnitQuaternion, Vector3};

use super::transform::SimilarityTransform;
use super::AlignmentError;
use crate::pose::PoseSet;

/// Relative singular-value threshold below which a direction is treated as
/// unconstrained.
const RANK_TOLERANCE: f64 = 1e-10;

/// Cross-covariance `Σ aᵢ·bᵢᵀ`.
fn cross_covariance(a: &[Vector3<f64>], b: &[Vector3<f64>]) -> Matrix3<f64> {
    a.iter()
        .zip(b)
        .fold(Matrix3::zeros(), |h, (a, b)| h + a * b.transpose())
}

/// `true` when `h` is exactly symmetric and positive semidefinite, in which
/// case the identity already maximizes `tr(R·H)`.
fn identity_is_optimal(h: &Matrix3<f64>) -> bool {
    if *h != h.transpose() {
        return false;
    }
    let eig = h.symmetric_eigenvalues();
    let scale = eig.amax();
    eig.iter().all(|&l| l >= -1e-15 * scale)
}

/// Rotation `R` minimizing `Σ‖R·aᵢ − bᵢ‖²` for already-centered pairs.
///
/// Reflections are corrected by flipping the smallest singular direction.
/// Fails when the pairs do not pin down a rotation (fewer than two
/// independent directions, i.e. collinear or coincident points).
pub fn kabsch(
    a: &[Vector3<f64>],
    b: &[Vector3<f64>],
) -> Result<UnitQuaternion<f64>, AlignmentError> {
    if a.len() != b.len() {
        return Err(AlignmentError::CountMismatch {
            estimated: a.len(),
            ground_truth: b.len(),
        });
    }
    let h = cross_covariance(a, b);
    if !h.iter().all(|x| x.is_finite()) {
        return Err(AlignmentError::NonFinite);
    }
    let svd = h.svd(true, true);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    if !(sv[0] > 0.0) || sv[1] <= RANK_TOLERANCE * sv[0] {
        return Err(AlignmentError::Degenerate);
    }
    if identity_is_optimal(&h) {
        return Ok(UnitQuaternion::identity());
    }
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    // H = U Σ Vᵀ, R = V·D·Uᵀ
    let d = (v_t.transpose() * u.transpose()).determinant().signum();
    let smallest = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, _)| i)
        .unwrap_or(2);
    let mut diag = Vector3::repeat(1.0);
    diag[smallest] = d;
    let r = v_t.transpose() * Matrix3::from_diagonal(&diag) * u.transpose();
    Ok(UnitQuaternion::from_rotation_matrix(
        &Rotation3::from_matrix_unchecked(r),
    ))
}

fn mean(points: &[Point3<f64>]) -> Point3<f64> {
    let sum = points.iter().fold(Vector3::zeros(), |s, p| s + p.coords);
    Point3::from(sum / points.len() as f64)
}

/// Root-mean-square distance between paired points.
pub fn paired_rms(a: &[Point3<f64>], b: &[Point3<f64>]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let sum: f64 = a.iter().zip(b).map(|(p, q)| (p - q).norm_squared()).sum();
    (sum / a.len() as f64).sqrt()
}

/// Similarity transform taking estimated camera positions onto ground truth,
/// paired by list position.
///
/// Translation `t = c_est − c_gt`, then scale about `c_gt` by the ratio of
/// mean distances to `c_gt`, then the Kabsch rotation about `c_gt`.
pub fn rough_align(
    estimated: &PoseSet,
    ground_truth: &PoseSet,
) -> Result<SimilarityTransform, AlignmentError> {
    rough_align_points(&estimated.positions(), &ground_truth.positions())
}

/// [`rough_align`] on bare positions.
pub fn rough_align_points(
    estimated: &[Point3<f64>],
    ground_truth: &[Point3<f64>],
) -> Result<SimilarityTransform, AlignmentError> {
    let n = estimated.len();
    if n != ground_truth.len() {
        return Err(AlignmentError::CountMismatch {
            estimated: n,
            ground_truth: ground_truth.len(),
        });
    }
    if n < 3 {
        return Err(AlignmentError::TooFewPoints(n));
    }
    if !estimated
        .iter()
        .chain(ground_truth)
        .all(|p| p.iter().all(|x| x.is_finite()))
    {
        return Err(AlignmentError::NonFinite);
    }
    let c_est = mean(estimated);
    let c_gt = mean(ground_truth);
    let t = c_est - c_gt;
    let translated: Vec<Point3<f64>> = estimated.iter().map(|p| p - t).collect();

    let numerator = ground_truth.iter().map(|p| (p - c_gt).norm()).sum::<f64>() / n as f64;
    let denominator = translated.iter().map(|p| (p - c_gt).norm()).sum::<f64>() / n as f64;
    let magnitude = estimated
        .iter()
        .map(|p| p.coords.amax())
        .fold(0.0, f64::max);
    if !(denominator > 64.0 * f64::EPSILON * magnitude) {
        return Err(AlignmentError::ZeroScale);
    }
    let s = numerator / denominator;
    if !(s > 0.0) || !s.is_finite() {
        return Err(AlignmentError::ZeroScale);
    }

    let a: Vec<Vector3<f64>> = translated.iter().map(|p| (p - c_gt) * s).collect();
    let b: Vec<Vector3<f64>> = ground_truth.iter().map(|p| p - c_gt).collect();
    let rotation = kabsch(&a, &b)?;
    Ok(SimilarityTransform::new(s, rotation, t, c_gt))
}
