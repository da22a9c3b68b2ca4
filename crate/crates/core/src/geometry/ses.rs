//! Smallest enclosing sphere by Welzl's algorithm (move-to-front variant).
//!
//! The recursion depth is bounded by the support size (at most 4), so large
//! meshes do not exhaust the stack. Candidate support sets that are affinely
//! dependent are rejected instead of producing an ill-conditioned sphere.

use nalgebra::{Matrix3, Point3, Vector3};
use rand::seq::SliceRandom;

use super::GeometryError;
use crate::rng::{self, Stream};

const DEFAULT_SEED: u64 = 0x5E5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    pub center: Point3<f64>,
    pub radius: f64,
}

impl Sphere {
    pub fn contains(&self, p: &Point3<f64>, tolerance: f64) -> bool {
        (p - self.center).norm() <= self.radius + tolerance
    }
}

/// Ball in coordinates relative to the working origin. `radius < 0` is the
/// empty ball.
#[derive(Debug, Clone, Copy)]
struct Ball {
    center: Vector3<f64>,
    radius_sq: f64,
}

impl Ball {
    const EMPTY: Ball = Ball {
        center: Vector3::new(0.0, 0.0, 0.0),
        radius_sq: -1.0,
    };

    fn contains(&self, p: &Vector3<f64>, tolerance: f64) -> bool {
        if self.radius_sq < 0.0 {
            return false;
        }
        let r = self.radius_sq.sqrt() + tolerance;
        (p - self.center).norm_squared() <= r * r
    }
}

/// Smallest ball with every support point on its boundary and its center in
/// their affine hull. `None` when the support is affinely dependent.
fn circumball(support: &[Vector3<f64>]) -> Option<Ball> {
    let Some((&q0, rest)) = support.split_first() else {
        return Some(Ball::EMPTY);
    };
    if rest.is_empty() {
        return Some(Ball {
            center: q0,
            radius_sq: 0.0,
        });
    }
    let k = rest.len();
    let d: Vec<Vector3<f64>> = rest.iter().map(|q| q - q0).collect();
    let mut gram = Matrix3::identity();
    let mut rhs = Vector3::zeros();
    for i in 0..k {
        for j in 0..k {
            gram[(i, j)] = 2.0 * d[i].dot(&d[j]);
        }
        rhs[i] = d[i].norm_squared();
    }
    // det(G) / prod(G_ii) is the squared normalized volume of the simplex
    let diag: f64 = (0..k).map(|i| gram[(i, i)]).product();
    if diag <= 0.0 || gram.determinant() / diag < 1e-20 {
        return None;
    }
    let lambda = gram.lu().solve(&rhs)?;
    let offset = (0..k).fold(Vector3::zeros(), |acc, i| acc + d[i] * lambda[i]);
    if !offset.iter().all(|v| v.is_finite()) {
        return None;
    }
    Some(Ball {
        center: q0 + offset,
        radius_sq: offset.norm_squared(),
    })
}

fn move_to_front(
    points: &mut [Vector3<f64>],
    end: usize,
    support: &mut Vec<Vector3<f64>>,
    tolerance: f64,
) -> Ball {
    let mut ball = circumball(support).unwrap_or(Ball::EMPTY);
    if support.len() == 4 {
        return ball;
    }
    for i in 0..end {
        let p = points[i];
        if ball.contains(&p, tolerance) {
            continue;
        }
        support.push(p);
        if circumball(support).is_some() {
            ball = move_to_front(points, i, support, tolerance);
            points[..=i].rotate_right(1);
        }
        support.pop();
    }
    ball
}

/// Smallest enclosing sphere of `points`, with a fixed internal shuffle seed.
pub fn welzl_ses(points: &[Point3<f64>]) -> Result<Sphere, GeometryError> {
    welzl_ses_seeded(points, DEFAULT_SEED)
}

/// Smallest enclosing sphere; `seed` drives the internal random insertion
/// order. The reported radius is the largest distance from the computed
/// center, so every input point is contained.
pub fn welzl_ses_seeded(points: &[Point3<f64>], seed: u64) -> Result<Sphere, GeometryError> {
    let first = points.first().ok_or(GeometryError::EmptyInput)?;
    if let Some(index) = points.iter().position(|p| !p.iter().all(|v| v.is_finite())) {
        return Err(GeometryError::NonFinite { index });
    }
    // work relative to the first point for conditioning
    let origin = first.coords;
    let mut work: Vec<Vector3<f64>> = points.iter().map(|p| p.coords - origin).collect();
    let extent = work.iter().map(|v| v.amax()).fold(0.0, f64::max);
    let tolerance = 1e-12 * extent;
    work.shuffle(&mut rng::stream(seed, Stream::Ses));

    let n = work.len();
    let mut support = Vec::with_capacity(4);
    let ball = move_to_front(&mut work, n, &mut support, tolerance);

    let center = Point3::from(ball.center + origin);
    let radius = points
        .iter()
        .map(|p| (p - center).norm())
        .fold(0.0, f64::max);
    Ok(Sphere { center, radius })
}
