//! Camera poses and ordered pose sets.

use nalgebra::{Point3, UnitQuaternion, Vector3};

/// Extrinsics of one rendered frame.
///
/// `rotation` maps camera-frame vectors to world vectors. The camera looks
/// down its local −Z axis with +Y up (before roll).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    /// Index of the frame this pose rendered (or was estimated for).
    pub frame: usize,
    pub position: Point3<f64>,
    pub rotation: UnitQuaternion<f64>,
    /// Roll about the view axis in degrees, in `[0, 360)`.
    pub roll_deg: f64,
    pub vertical_fov_deg: f64,
}

impl CameraPose {
    /// World-space view direction (camera −Z).
    pub fn view_dir(&self) -> Vector3<f64> {
        self.rotation * -Vector3::z()
    }

    /// World-space camera up (camera +Y).
    pub fn up_dir(&self) -> Vector3<f64> {
        self.rotation * Vector3::y()
    }
}

/// Ordered list of poses. Order defines pairing between two sets: pose `i`
/// of an estimated set corresponds to pose `i` of the ground truth.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PoseSet {
    pub poses: Vec<CameraPose>,
}

impl PoseSet {
    pub fn new(poses: Vec<CameraPose>) -> Self {
        Self { poses }
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CameraPose> {
        self.poses.iter()
    }

    pub fn positions(&self) -> Vec<Point3<f64>> {
        self.poses.iter().map(|p| p.position).collect()
    }

    /// Mean camera position, or `None` for an empty set.
    pub fn centroid(&self) -> Option<Point3<f64>> {
        if self.poses.is_empty() {
            return None;
        }
        let sum = self
            .poses
            .iter()
            .fold(Vector3::zeros(), |acc, p| acc + p.position.coords);
        Some(Point3::from(sum / self.poses.len() as f64))
    }

    /// First `n` poses (all of them when `n >= len`).
    pub fn truncated(&self, n: usize) -> PoseSet {
        PoseSet::new(self.poses.iter().take(n).copied().collect())
    }
}

impl FromIterator<CameraPose> for PoseSet {
    fn from_iter<I: IntoIterator<Item = CameraPose>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a PoseSet {
    type Item = &'a CameraPose;
    type IntoIter = std::slice::Iter<'a, CameraPose>;

    fn into_iter(self) -> Self::IntoIter {
        self.poses.iter()
    }
}

/// Pairs `estimated` against `ground_truth` by frame index.
///
/// Returns the matched sets (in ground-truth order) and the number of
/// ground-truth poses that had no estimate.
pub fn pair_by_frame(estimated: &PoseSet, ground_truth: &PoseSet) -> (PoseSet, PoseSet, usize) {
    let mut est = Vec::new();
    let mut gt = Vec::new();
    for g in ground_truth {
        if let Some(e) = estimated.iter().find(|e| e.frame == g.frame) {
            est.push(*e);
            gt.push(*g);
        }
    }
    let unmatched = ground_truth.len() - gt.len();
    (PoseSet::new(est), PoseSet::new(gt), unmatched)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pose(frame: usize, x: f64) -> CameraPose {
        CameraPose {
            frame,
            position: Point3::new(x, 0.0, 0.0),
            rotation: UnitQuaternion::identity(),
            roll_deg: 0.0,
            vertical_fov_deg: 23.0,
        }
    }

    #[test]
    fn centroid_of_positions() {
        let set: PoseSet = (0..4).map(|i| pose(i, i as f64)).collect();
        assert_eq!(set.centroid().unwrap(), Point3::new(1.5, 0.0, 0.0));
        assert!(PoseSet::default().centroid().is_none());
    }

    #[test]
    fn pairing_drops_unmatched_ground_truth() {
        let gt: PoseSet = (0..100).map(|i| pose(i, i as f64)).collect();
        let est: PoseSet = (0..50).rev().map(|i| pose(i, -(i as f64))).collect();
        let (e, g, unmatched) = pair_by_frame(&est, &gt);
        assert_eq!(unmatched, 50);
        assert_eq!(e.len(), 50);
        for (a, b) in e.iter().zip(g.iter()) {
            assert_eq!(a.frame, b.frame);
        }
    }

    #[test]
    fn identity_camera_looks_down_negative_z() {
        let p = pose(0, 0.0);
        assert_eq!(p.view_dir(), -Vector3::z());
        assert_eq!(p.up_dir(), Vector3::y());
    }
}
