use nalgebra::{Matrix3, Point3, Rotation3, UnitQuaternion, Vector3};

use super::GeometryError;

/// Views closer than this (radians) to world ±Z use world +X as the up hint.
pub const LOOK_AT_POLE_TOLERANCE: f64 = 1e-6;

/// Tangent of an angle in degrees, exact at odd multiples of 45°.
pub fn tan_deg(deg: f64) -> f64 {
    match deg.rem_euclid(180.0) {
        0.0 => 0.0,
        45.0 => 1.0,
        135.0 => -1.0,
        _ => deg.to_radians().tan(),
    }
}

pub(crate) fn check_fov(vertical_fov_deg: f64) -> Result<(), GeometryError> {
    if vertical_fov_deg > 0.0 && vertical_fov_deg < 180.0 {
        Ok(())
    } else {
        Err(GeometryError::InvalidFov(vertical_fov_deg))
    }
}

/// Distance at which a sphere of radius `r_ses` fills the vertical field of
/// view: `r_ses / tan(vfov / 2)`.
pub fn camera_radius(r_ses: f64, vertical_fov_deg: f64) -> Result<f64, GeometryError> {
    check_fov(vertical_fov_deg)?;
    if !(r_ses > 0.0 && r_ses.is_finite()) {
        return Err(GeometryError::InvalidRadius(r_ses));
    }
    Ok(r_ses / tan_deg(vertical_fov_deg / 2.0))
}

/// Camera-to-world rotation looking from `eye` at `target`.
///
/// Camera −Z points at the target. Before roll, camera +Y is world +Z
/// projected onto the image plane (world +X when the view is within
/// [`LOOK_AT_POLE_TOLERANCE`] of vertical). Roll then turns the camera about
/// its view axis: the result is `base * Rz(roll)`.
pub fn look_at(
    eye: &Point3<f64>,
    target: &Point3<f64>,
    roll_deg: f64,
) -> Result<UnitQuaternion<f64>, GeometryError> {
    let dir = target - eye;
    let len = dir.norm();
    if !(len > 0.0) || !len.is_finite() {
        return Err(GeometryError::EyeAtTarget);
    }
    let forward = dir / len;
    let up_hint = if forward.cross(&Vector3::z()).norm() < LOOK_AT_POLE_TOLERANCE.sin() {
        Vector3::x()
    } else {
        Vector3::z()
    };
    let up = (up_hint - forward * up_hint.dot(&forward)).normalize();
    let back = -forward;
    let right = up.cross(&back);
    let base = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[right, up, back]));
    let roll = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), roll_deg.to_radians());
    let mut q = UnitQuaternion::from_rotation_matrix(&base) * roll;
    q.renormalize();
    Ok(q)
}
