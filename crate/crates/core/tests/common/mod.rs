//! Independent reference implementations used by the integration tests.

#![allow(dead_code)]

use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use twinbench_core::metrics::{C1, C2};
use twinbench_core::RasterImage;

pub fn rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

pub fn random_points(rng: &mut SplitMix64, n: usize) -> Vec<Point3<f64>> {
    (0..n)
        .map(|_| {
            Point3::new(
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
            )
        })
        .collect()
}

pub fn random_image(rng: &mut SplitMix64, w: usize, h: usize) -> RasterImage {
    let pixels = (0..w * h)
        .map(|_| [rng.random(), rng.random(), rng.random()])
        .collect();
    RasterImage::new(w, h, pixels).unwrap()
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Smallest sphere whose boundary passes through every point of `support`
/// (1 to 4 points), or `None` when the support is degenerate.
fn sphere_through(support: &[Point3<f64>]) -> Option<(Point3<f64>, f64)> {
    match support {
        [a] => Some((*a, 0.0)),
        [a, b] => {
            let c = Point3::from((a.coords + b.coords) / 2.0);
            Some((c, (a - c).norm()))
        }
        [a, b, c] => {
            // circumcenter in the plane of the triangle
            let (ab, ac) = (b - a, c - a);
            let n = ab.cross(&ac);
            let n2 = n.norm_squared();
            if n2 < 1e-18 {
                return None;
            }
            let off =
                (n.cross(&ab) * ac.norm_squared() + ac.cross(&n) * ab.norm_squared()) / (2.0 * n2);
            let center = a + off;
            Some((center, off.norm()))
        }
        [a, b, c, d] => {
            // 2(p - a)·x = |p|² - |a|² for p in {b, c, d}, by Cramer's rule
            let rows = [b, c, d].map(|p| (p - a) * 2.0);
            let rhs = [b, c, d].map(|p| p.coords.norm_squared() - a.coords.norm_squared());
            let m = rows.map(|r| [r.x, r.y, r.z]);
            let det = det3(m);
            let scale = rows.iter().map(|r| r.norm()).product::<f64>();
            if det.abs() < 1e-12 * scale.max(1e-300) {
                return None;
            }
            let mut x = [0.0; 3];
            for (k, xk) in x.iter_mut().enumerate() {
                let mut mk = m;
                for r in 0..3 {
                    mk[r][k] = rhs[r];
                }
                *xk = det3(mk) / det;
            }
            let center = Point3::new(x[0], x[1], x[2]);
            Some((center, (a - center).norm()))
        }
        _ => None,
    }
}

/// Smallest enclosing sphere by exhaustive search over supports of up to
/// four points.
pub fn brute_force_ses(points: &[Point3<f64>]) -> (Point3<f64>, f64) {
    let n = points.len();
    let mut best: Option<(Point3<f64>, f64)> = None;
    let mut consider = |support: &[Point3<f64>]| {
        if let Some((c, r)) = sphere_through(support) {
            let tol = 1e-10 * (1.0 + r);
            if points.iter().all(|p| (p - c).norm() <= r + tol) && best.is_none_or(|(_, br)| r < br)
            {
                best = Some((c, r));
            }
        }
    };
    for i in 0..n {
        consider(&[points[i]]);
        for j in i + 1..n {
            consider(&[points[i], points[j]]);
            for k in j + 1..n {
                consider(&[points[i], points[j], points[k]]);
                for l in k + 1..n {
                    consider(&[points[i], points[j], points[k], points[l]]);
                }
            }
        }
    }
    best.expect("some support always encloses the set")
}

/// SSIM of the `window × window` block at `(x0, y0)`, evaluated directly in
/// floating point with (n − 1) normalized moments and averaged over RGB.
pub fn brute_force_ssim(
    a: &RasterImage,
    b: &RasterImage,
    window: usize,
    x0: usize,
    y0: usize,
) -> f64 {
    let n = (window * window) as f64;
    let mut total = 0.0;
    for c in 0..3 {
        let mut xs = Vec::with_capacity(window * window);
        let mut ys = Vec::with_capacity(window * window);
        for dy in 0..window {
            for dx in 0..window {
                xs.push(a.get(x0 + dx, y0 + dy)[c] as f64);
                ys.push(b.get(x0 + dx, y0 + dy)[c] as f64);
            }
        }
        let ma = xs.iter().sum::<f64>() / n;
        let mb = ys.iter().sum::<f64>() / n;
        let va = xs.iter().map(|x| (x - ma) * (x - ma)).sum::<f64>() / (n - 1.0);
        let vb = ys.iter().map(|y| (y - mb) * (y - mb)).sum::<f64>() / (n - 1.0);
        let cov = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - ma) * (y - mb))
            .sum::<f64>()
            / (n - 1.0);
        total +=
            ((2.0 * ma * mb + C1) * (2.0 * cov + C2)) / ((ma * ma + mb * mb + C1) * (va + vb + C2));
    }
    total / 3.0
}

/// Uniformly distributed random rotation axis scaled by `angle`.
pub fn random_axis(rng: &mut SplitMix64) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}
