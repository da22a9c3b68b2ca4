use nalgebra::{Point2, Vector2, Vector3};

use super::camera::{to_camera, world_to_camera, CameraIntrinsics};
use super::RenderError;
use crate::mesh_io::{RasterImage, Rgb, TriangleMesh};
use crate::pose::CameraPose;

/// Camera-space clip plane: geometry must satisfy `z <= -NEAR_PLANE`.
pub const NEAR_PLANE: f64 = 1e-6;
/// Lower clamp of the `|n·v|` shading term.
pub const MIN_SHADE: f64 = 0.2;

const UNTEXTURED_GRAY: f64 = 128.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TextureFilter {
    Nearest,
    #[default]
    Bilinear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderSettings {
    /// Written verbatim to every uncovered pixel.
    pub background: Rgb,
    /// Uniform light intensity in `(0, 1]`.
    pub lighting: f64,
    pub texture_filter: TextureFilter,
}

impl Default for RenderSettings {
    fn default() -> Self {
        Self {
            background: [255, 255, 255],
            lighting: 1.0,
            texture_filter: TextureFilter::Bilinear,
        }
    }
}

impl RenderSettings {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.lighting > 0.0 && self.lighting <= 1.0 {
            Ok(())
        } else {
            Err(RenderError::BadLighting(self.lighting))
        }
    }
}

#[derive(Clone, Copy)]
struct ClipVertex {
    pos: Vector3<f64>,
    uv: Vector2<f64>,
}

/// Sutherland–Hodgman against `z = -NEAR_PLANE`, keeping the far side.
fn clip_near(poly: &[ClipVertex; 3]) -> Vec<ClipVertex> {
    let inside = |v: &ClipVertex| v.pos.z <= -NEAR_PLANE;
    if poly.iter().all(inside) {
        return poly.to_vec();
    }
    let mut out = Vec::with_capacity(4);
    for i in 0..3 {
        let a = poly[i];
        let b = poly[(i + 1) % 3];
        if inside(&a) {
            out.push(a);
        }
        if inside(&a) != inside(&b) {
            let t = (-NEAR_PLANE - a.pos.z) / (b.pos.z - a.pos.z);
            out.push(ClipVertex {
                pos: a.pos + (b.pos - a.pos) * t,
                uv: a.uv + (b.uv - a.uv) * t,
            });
        }
    }
    out
}

/// Projected vertex with attributes pre-divided by depth.
#[derive(Clone, Copy)]
struct ScreenVertex {
    x: f64,
    y: f64,
    inv_depth: f64,
    uv_over_depth: Vector2<f64>,
}

enum Shading<'a> {
    Texture(&'a RasterImage),
    Flat([f64; 3]),
}

impl Shading<'_> {
    fn sample(&self, uv: Vector2<f64>, filter: TextureFilter) -> [f64; 3] {
        match self {
            Shading::Flat(c) => *c,
            Shading::Texture(tex) => sample_texture(tex, uv, filter),
        }
    }
}

fn texel(tex: &RasterImage, x: usize, y: usize) -> [f64; 3] {
    tex.get(x, y).map(f64::from)
}

/// Samples with clamp-to-edge addressing; `v = 1` is the top image row.
fn sample_texture(tex: &RasterImage, uv: Vector2<f64>, filter: TextureFilter) -> [f64; 3] {
    let (w, h) = (tex.width(), tex.height());
    let u = uv.x.clamp(0.0, 1.0);
    let v = uv.y.clamp(0.0, 1.0);
    match filter {
        TextureFilter::Nearest => {
            let x = ((u * w as f64) as usize).min(w - 1);
            let y = (((1.0 - v) * h as f64) as usize).min(h - 1);
            texel(tex, x, y)
        }
        TextureFilter::Bilinear => {
            let fx = (u * w as f64 - 0.5).clamp(0.0, (w - 1) as f64);
            let fy = ((1.0 - v) * h as f64 - 0.5).clamp(0.0, (h - 1) as f64);
            let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
            let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
            let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
            let (c00, c10) = (texel(tex, x0, y0), texel(tex, x1, y0));
            let (c01, c11) = (texel(tex, x0, y1), texel(tex, x1, y1));
            std::array::from_fn(|k| {
                let top = c00[k] + (c10[k] - c00[k]) * tx;
                let bottom = c01[k] + (c11[k] - c01[k]) * tx;
                top + (bottom - top) * ty
            })
        }
    }
}

struct Target<'a> {
    width: usize,
    height: usize,
    color: &'a mut [Rgb],
    depth: &'a mut [f64],
}

struct Frame {
    focal: f64,
    cx: f64,
    cy: f64,
}

impl Frame {
    /// Unit camera-space ray through a pixel center.
    fn ray(&self, px: f64, py: f64) -> Vector3<f64> {
        Vector3::new(
            (px - self.cx) / self.focal,
            -(py - self.cy) / self.focal,
            -1.0,
        )
        .normalize()
    }
}

fn edge(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> f64 {
    (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)
}

#[allow(clippy::too_many_arguments)]
fn fill_triangle(
    target: &mut Target<'_>,
    frame: &Frame,
    tri: [ScreenVertex; 3],
    normal: &Vector3<f64>,
    shading: &Shading<'_>,
    settings: &RenderSettings,
) {
    let pa = (tri[0].x, tri[0].y);
    let pb = (tri[1].x, tri[1].y);
    let pc = (tri[2].x, tri[2].y);
    let area = edge(pa, pb, pc);
    if area == 0.0 || !area.is_finite() {
        return;
    }
    let min_x = pa.0.min(pb.0).min(pc.0);
    let max_x = pa.0.max(pb.0).max(pc.0);
    let min_y = pa.1.min(pb.1).min(pc.1);
    let max_y = pa.1.max(pb.1).max(pc.1);
    // pixel (i, j) is sampled at its center (i + 0.5, j + 0.5)
    let x_start = (min_x - 0.5).ceil().max(0.0);
    let x_end = (max_x - 0.5).floor().min(target.width as f64 - 1.0);
    let y_start = (min_y - 0.5).ceil().max(0.0);
    let y_end = (max_y - 0.5).floor().min(target.height as f64 - 1.0);
    if x_start > x_end || y_start > y_end {
        return;
    }
    let sign = area.signum();
    let inv_area = 1.0 / area;
    for j in y_start as usize..=y_end as usize {
        let py = j as f64 + 0.5;
        for i in x_start as usize..=x_end as usize {
            let px = i as f64 + 0.5;
            let p = (px, py);
            let w0 = edge(pb, pc, p);
            let w1 = edge(pc, pa, p);
            let w2 = edge(pa, pb, p);
            if w0 * sign < 0.0 || w1 * sign < 0.0 || w2 * sign < 0.0 {
                continue;
            }
            let (l0, l1, l2) = (w0 * inv_area, w1 * inv_area, w2 * inv_area);
            let inv_depth = l0 * tri[0].inv_depth + l1 * tri[1].inv_depth + l2 * tri[2].inv_depth;
            if !(inv_depth > 0.0) {
                continue;
            }
            let depth = 1.0 / inv_depth;
            let idx = j * target.width + i;
            if depth >= target.depth[idx] {
                continue;
            }
            let uv =
                (tri[0].uv_over_depth * l0 + tri[1].uv_over_depth * l1 + tri[2].uv_over_depth * l2)
                    * depth;
            let base = shading.sample(uv, settings.texture_filter);
            let shade = normal.dot(&frame.ray(px, py)).abs().clamp(MIN_SHADE, 1.0);
            let gain = settings.lighting * shade;
            target.depth[idx] = depth;
            target.color[idx] = base.map(|c| (c * gain).round().clamp(0.0, 255.0) as u8);
        }
    }
}

/// Renders `mesh` from `pose`.
///
/// Base color is the texture sample when the mesh has a texture and UVs,
/// otherwise the material's diffuse color, otherwise mid-gray. It is scaled
/// by `lighting · clamp(|n·v|, 0.2, 1)` with `n` the face normal and `v` the
/// pixel's view ray. Zero-area triangles are skipped.
pub fn rasterize(
    mesh: &TriangleMesh,
    pose: &CameraPose,
    intrinsics: &CameraIntrinsics,
    settings: &RenderSettings,
) -> RasterImage {
    let (width, height) = (intrinsics.width(), intrinsics.height());
    let mut color = vec![settings.background; width * height];
    let mut depth = vec![f64::INFINITY; width * height];

    let rotation = world_to_camera(pose);
    let cam: Vec<Vector3<f64>> = mesh
        .vertices
        .iter()
        .map(|v| to_camera(&rotation, pose, v))
        .collect();
    let (cx, cy) = intrinsics.principal_point();
    let frame = Frame {
        focal: intrinsics.focal_px(),
        cx,
        cy,
    };
    let material = mesh.material.as_ref();
    let shading = match (mesh.texture(), mesh.has_uvs()) {
        (Some(tex), true) => Shading::Texture(tex),
        _ => match material.and_then(|m| m.diffuse) {
            Some(kd) => Shading::Flat(kd.map(|c| c * 255.0)),
            None => Shading::Flat([UNTEXTURED_GRAY; 3]),
        },
    };
    let mut target = Target {
        width,
        height,
        color: &mut color,
        depth: &mut depth,
    };

    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = tri.map(|i| cam[i]);
        let normal = (p[1] - p[0]).cross(&(p[2] - p[0]));
        let len = normal.norm();
        if !(len > 0.0) || !len.is_finite() {
            continue;
        }
        let normal = normal / len;
        let uv = if mesh.has_uvs() {
            mesh.uv_triangles[t].map(|i| mesh.uvs[i].coords)
        } else {
            [Point2::origin().coords; 3]
        };
        let corners = std::array::from_fn(|k| ClipVertex {
            pos: p[k],
            uv: uv[k],
        });
        let poly = clip_near(&corners);
        if poly.len() < 3 {
            continue;
        }
        let screen: Vec<ScreenVertex> = poly
            .iter()
            .map(|v| {
                let inv_depth = 1.0 / -v.pos.z;
                ScreenVertex {
                    x: frame.cx + frame.focal * v.pos.x * inv_depth,
                    y: frame.cy - frame.focal * v.pos.y * inv_depth,
                    inv_depth,
                    uv_over_depth: v.uv * inv_depth,
                }
            })
            .collect();
        for k in 1..screen.len() - 1 {
            fill_triangle(
                &mut target,
                &frame,
                [screen[0], screen[k], screen[k + 1]],
                &normal,
                &shading,
                settings,
            );
        }
    }
    RasterImage::new(width, height, color).expect("framebuffer matches intrinsics")
}
