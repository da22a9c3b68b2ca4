use nalgebra::{Matrix3, Point3, UnitQuaternion, Vector3};

/// Similarity map `x ↦ pivot + s·R·(x − t − pivot)`.
///
/// The three stages (pre-translation `t`, scale `s` about `pivot`, rotation
/// `R` about `pivot`) are kept for inspection; application goes through the
/// composed affine form `linear·x + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityTransform {
    scale: f64,
    rotation: UnitQuaternion<f64>,
    pre_translation: Vector3<f64>,
    pivot: Point3<f64>,
    linear: Matrix3<f64>,
    offset: Vector3<f64>,
}

impl Default for SimilarityTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl SimilarityTransform {
    /// Panics if `scale` is not finite and positive.
    pub fn new(
        scale: f64,
        rotation: UnitQuaternion<f64>,
        pre_translation: Vector3<f64>,
        pivot: Point3<f64>,
    ) -> Self {
        assert!(
            scale.is_finite() && scale > 0.0,
            "scale must be positive, got {scale}"
        );
        let linear = rotation.to_rotation_matrix().into_inner() * scale;
        let offset = pivot.coords - linear * (pre_translation + pivot.coords);
        Self {
            scale,
            rotation,
            pre_translation,
            pivot,
            linear,
            offset,
        }
    }

    pub fn identity() -> Self {
        Self::new(
            1.0,
            UnitQuaternion::identity(),
            Vector3::zeros(),
            Point3::origin(),
        )
    }

    /// `x ↦ s·R·x + translation`.
    pub fn from_scale_rotation_translation(
        scale: f64,
        rotation: UnitQuaternion<f64>,
        translation: Vector3<f64>,
    ) -> Self {
        let pre = -(rotation.inverse() * translation) / scale;
        let mut t = Self::new(scale, rotation, pre, Point3::origin());
        // keep the requested offset exact rather than round-tripped
        t.offset = translation;
        t
    }

    /// `x ↦ R·x + translation`.
    pub fn rigid(rotation: UnitQuaternion<f64>, translation: Vector3<f64>) -> Self {
        Self::from_scale_rotation_translation(1.0, rotation, translation)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn rotation(&self) -> UnitQuaternion<f64> {
        self.rotation
    }

    /// The translation subtracted before scaling and rotation.
    pub fn pre_translation(&self) -> Vector3<f64> {
        self.pre_translation
    }

    /// Center of the scale and rotation stages.
    pub fn pivot(&self) -> Point3<f64> {
        self.pivot
    }

    /// `s·R`.
    pub fn linear(&self) -> &Matrix3<f64> {
        &self.linear
    }

    pub fn offset(&self) -> &Vector3<f64> {
        &self.offset
    }

    /// Exactly the identity map.
    pub fn is_identity(&self) -> bool {
        self.linear == Matrix3::identity() && self.offset == Vector3::zeros()
    }

    pub fn apply(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.linear * p.coords + self.offset)
    }

    pub fn apply_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.linear * v
    }

    pub fn inverse(&self) -> Self {
        let scale = 1.0 / self.scale;
        let rotation = self.rotation.inverse();
        // x = (1/s)·R⁻¹·(y − offset)
        Self::new(scale, rotation, self.offset, Point3::origin())
    }

    /// The map `x ↦ next(self(x))`.
    pub fn then(&self, next: &Self) -> Self {
        let scale = self.scale * next.scale;
        let rotation = next.rotation * self.rotation;
        let offset = next.linear * self.offset + next.offset;
        Self::from_scale_rotation_translation(scale, rotation, offset)
    }
}
