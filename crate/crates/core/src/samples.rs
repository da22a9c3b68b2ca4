//! Procedural test meshes: a textured unit cube, a lumpy blob and a long thin
//! cylinder.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Point2, Point3, Vector3};
use rand::Rng;

use crate::mesh_io::{Material, RasterImage, Rgb, TriangleMesh};
use crate::rng::{self, Stream};

const CELL: usize = 32;

/// Colors of the two checker squares on each cube face.
const FACE_COLORS: [(Rgb, Rgb); 6] = [
    ([200, 40, 40], [250, 210, 90]),
    ([40, 150, 60], [230, 230, 230]),
    ([40, 70, 200], [120, 220, 250]),
    ([150, 60, 170], [250, 170, 210]),
    ([30, 30, 30], [240, 140, 40]),
    ([110, 80, 50], [190, 250, 160]),
];

/// 3x2 atlas, one 32x32 checkered cell per cube face with a diagonal shade
/// ramp so every face carries structure.
fn cube_texture() -> RasterImage {
    let (w, h) = (3 * CELL, 2 * CELL);
    let mut img = RasterImage::filled(w, h, [0, 0, 0]);
    for y in 0..h {
        for x in 0..w {
            let face = (y / CELL) * 3 + x / CELL;
            let (cx, cy) = (x % CELL, y % CELL);
            let (a, b) = FACE_COLORS[face];
            let base = if (cx / 8 + cy / 8) % 2 == 0 { a } else { b };
            let ramp = 0.75 + 0.25 * (cx + cy) as f64 / (2 * CELL - 2) as f64;
            img.set(x, y, base.map(|c| (c as f64 * ramp).round() as u8));
        }
    }
    img
}

/// Unit cube `[0,1]³` with 8 shared vertices, 12 outward-wound triangles and
/// a checkered texture atlas.
pub fn unit_cube() -> TriangleMesh {
    let vertices: Vec<Point3<f64>> = (0..8)
        .map(|i| Point3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
        .collect();
    // corners counter-clockwise seen from outside
    let faces: [[usize; 4]; 6] = [
        [0, 4, 6, 2], // -x
        [1, 3, 7, 5], // +x
        [0, 1, 5, 4], // -y
        [2, 6, 7, 3], // +y
        [0, 2, 3, 1], // -z
        [4, 5, 7, 6], // +z
    ];
    let mut triangles = Vec::new();
    let mut uvs = Vec::new();
    let mut uv_triangles = Vec::new();
    for (f, quad) in faces.iter().enumerate() {
        let (col, row) = ((f % 3) as f64, (f / 3) as f64);
        let base = uvs.len();
        // image row 0 is the top, v = 1
        let inset = 0.5 / CELL as f64;
        let u0 = col / 3.0 + inset / 3.0;
        let u1 = (col + 1.0) / 3.0 - inset / 3.0;
        let v1 = 1.0 - row / 2.0 - inset / 2.0;
        let v0 = 1.0 - (row + 1.0) / 2.0 + inset / 2.0;
        uvs.extend([
            Point2::new(u0, v0),
            Point2::new(u1, v0),
            Point2::new(u1, v1),
            Point2::new(u0, v1),
        ]);
        triangles.push([quad[0], quad[1], quad[2]]);
        triangles.push([quad[0], quad[2], quad[3]]);
        uv_triangles.push([base, base + 1, base + 2]);
        uv_triangles.push([base, base + 2, base + 3]);
    }
    TriangleMesh {
        name: "unit_cube".into(),
        vertices,
        triangles,
        uvs,
        uv_triangles,
        material: Some(Material {
            name: "checker".into(),
            diffuse: Some([1.0, 1.0, 1.0]),
            texture: Some(Arc::new(cube_texture())),
        }),
    }
}

fn midpoint(
    cache: &mut HashMap<(usize, usize), usize>,
    vertices: &mut Vec<Vector3<f64>>,
    a: usize,
    b: usize,
) -> usize {
    let key = (a.min(b), a.max(b));
    *cache.entry(key).or_insert_with(|| {
        vertices.push(((vertices[a] + vertices[b]) / 2.0).normalize());
        vertices.len() - 1
    })
}

/// Icosphere with `subdivisions` levels (20·4^s triangles) on the unit sphere.
fn icosphere(subdivisions: u32) -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vector3<f64>> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|v| Vector3::from(*v).normalize())
    .collect();
    let mut faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(&mut cache, &mut vertices, a, b);
            let bc = midpoint(&mut cache, &mut vertices, b, c);
            let ca = midpoint(&mut cache, &mut vertices, c, a);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    (vertices, faces)
}

/// Lumpy closed surface: an icosphere with 3 subdivisions (1280 triangles)
/// whose radius is modulated by a few seeded low-frequency waves.
pub fn blob(seed: u64) -> TriangleMesh {
    let (dirs, triangles) = icosphere(3);
    let mut rng = rng::stream(seed, Stream::VertexNoise);
    let waves: Vec<(Vector3<f64>, f64, f64)> = (0..5)
        .map(|_| {
            let axis = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let freq = rng.random_range(1.0..4.0);
            let amp = rng.random_range(0.05..0.15);
            (axis, freq, amp)
        })
        .collect();
    let vertices = dirs
        .iter()
        .map(|d| {
            let r = 1.0
                + waves
                    .iter()
                    .map(|(axis, freq, amp)| amp * (freq * PI * d.dot(axis)).sin())
                    .sum::<f64>();
            Point3::from(d * r)
        })
        .collect();
    let mut mesh = TriangleMesh::new("blob", vertices, triangles);
    mesh.material = Some(Material::flat("clay", [0.8, 0.55, 0.4]));
    mesh
}

/// Closed cylinder along +Z centered at the origin.
pub fn cylinder(radius: f64, length: f64, segments: usize, rings: usize) -> TriangleMesh {
    let segments = segments.max(3);
    let rings = rings.max(1);
    let mut vertices = Vec::new();
    for ring in 0..=rings {
        let z = -length / 2.0 + length * ring as f64 / rings as f64;
        for s in 0..segments {
            let (sin, cos) = (2.0 * PI * s as f64 / segments as f64).sin_cos();
            vertices.push(Point3::new(radius * cos, radius * sin, z));
        }
    }
    let at = |ring: usize, s: usize| ring * segments + s % segments;
    let mut triangles = Vec::new();
    for ring in 0..rings {
        for s in 0..segments {
            let (a, b) = (at(ring, s), at(ring, s + 1));
            let (c, d) = (at(ring + 1, s + 1), at(ring + 1, s));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let bottom = vertices.len();
    vertices.push(Point3::new(0.0, 0.0, -length / 2.0));
    let top = vertices.len();
    vertices.push(Point3::new(0.0, 0.0, length / 2.0));
    for s in 0..segments {
        triangles.push([bottom, at(0, s + 1), at(0, s)]);
        triangles.push([top, at(rings, s), at(rings, s + 1)]);
    }
    let mut mesh = TriangleMesh::new("cylinder", vertices, triangles);
    mesh.material = Some(Material::flat("steel", [0.45, 0.5, 0.6]));
    mesh
}

/// Looks up a built-in mesh by name (`unit_cube`, `blob`, `cylinder`).
pub fn by_name(name: &str) -> Option<TriangleMesh> {
    match name {
        "unit_cube" | "cube" => Some(unit_cube()),
        "blob" => Some(blob(1)),
        "cylinder" => Some(cylinder(0.05, 2.0, 24, 32)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meshes_are_valid() {
        for name in ["unit_cube", "blob", "cylinder"] {
            let mesh = by_name(name).unwrap();
            mesh.validate().unwrap();
            assert!(!mesh.triangles.is_empty());
        }
        assert_eq!(unit_cube().triangles.len(), 12);
        assert_eq!(blob(1).triangles.len(), 1280);
        assert!(by_name("teapot").is_none());
    }

    #[test]
    fn cube_winding_points_outward() {
        let cube = unit_cube();
        let center = Point3::new(0.5, 0.5, 0.5);
        for t in &cube.triangles {
            let [a, b, c] = t.map(|i| cube.vertices[i]);
            let normal = (b - a).cross(&(c - a));
            assert!(normal.dot(&(a - center)) > 0.0);
        }
    }
}
