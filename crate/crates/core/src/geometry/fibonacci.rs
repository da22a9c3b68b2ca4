use std::f64::consts::PI;

use nalgebra::Vector3;

use super::GeometryError;

/// `n` unit vectors on the offset Fibonacci lattice:
/// `z_i = 1 − 2(i + ½)/n`, azimuth `i·π(3 − √5)` (the golden angle).
pub fn fibonacci_sphere(n: usize) -> Result<Vec<Vector3<f64>>, GeometryError> {
    if n == 0 {
        return Err(GeometryError::ZeroCount);
    }
    let golden_angle = PI * (3.0 - 5f64.sqrt());
    Ok((0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let (s, c) = (i as f64 * golden_angle).sin_cos();
            Vector3::new(r * c, r * s, z)
        })
        .collect())
}
