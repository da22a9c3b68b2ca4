use std::sync::Arc;

use nalgebra::{Point2, Point3};
use thiserror::Error;

/// 8-bit RGB triple.
pub type Rgb = [u8; 3];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MeshError {
    #[error("triangle {triangle} references vertex {index} but the mesh has {count} vertices")]
    VertexIndex {
        triangle: usize,
        index: usize,
        count: usize,
    },
    #[error("triangle {triangle} references uv {index} but the mesh has {count} uvs")]
    UvIndex {
        triangle: usize,
        index: usize,
        count: usize,
    },
    #[error("{uv_triangles} uv triangles for {triangles} triangles")]
    UvTriangleCount {
        triangles: usize,
        uv_triangles: usize,
    },
    #[error("image of {width}x{height} needs {expected} pixels, got {got}")]
    PixelCount {
        width: usize,
        height: usize,
        expected: usize,
        got: usize,
    },
    #[error("image dimensions must be at least 1x1")]
    EmptyImage,
}

/// Row-major RGB raster, 8 bits per channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self, MeshError> {
        if width == 0 || height == 0 {
            return Err(MeshError::EmptyImage);
        }
        let expected = width * height;
        if pixels.len() != expected {
            return Err(MeshError::PixelCount {
                width,
                height,
                expected,
                got: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Image of a single color. Panics if either dimension is zero.
    pub fn filled(width: usize, height: usize, color: Rgb) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be >= 1");
        Self {
            width,
            height,
            pixels: vec![color; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, color: Rgb) {
        self.pixels[y * self.width + x] = color;
    }

    /// Number of pixels that differ from `color`.
    pub fn count_not(&self, color: Rgb) -> usize {
        self.pixels.iter().filter(|&&p| p != color).count()
    }
}

/// Diffuse-only material: a `Kd` color and/or a `map_Kd` texture.
#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub name: String,
    /// Diffuse color in `[0, 1]` per channel.
    pub diffuse: Option<[f64; 3]>,
    pub texture: Option<Arc<RasterImage>>,
}

impl Material {
    pub fn flat(name: impl Into<String>, diffuse: [f64; 3]) -> Self {
        Self {
            name: name.into(),
            diffuse: Some(diffuse),
            texture: None,
        }
    }
}

/// Indexed triangle mesh with optional per-corner UVs and one material.
///
/// `uv_triangles` is either empty (no texture coordinates) or parallel to
/// `triangles`. Zero-area triangles are allowed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriangleMesh {
    pub name: String,
    pub vertices: Vec<Point3<f64>>,
    pub triangles: Vec<[usize; 3]>,
    pub uvs: Vec<Point2<f64>>,
    pub uv_triangles: Vec<[usize; 3]>,
    pub material: Option<Material>,
}

impl TriangleMesh {
    pub fn new(
        name: impl Into<String>,
        vertices: Vec<Point3<f64>>,
        triangles: Vec<[usize; 3]>,
    ) -> Self {
        Self {
            name: name.into(),
            vertices,
            triangles,
            ..Default::default()
        }
    }

    pub fn has_uvs(&self) -> bool {
        !self.uv_triangles.is_empty()
    }

    pub fn texture(&self) -> Option<&RasterImage> {
        self.material.as_ref()?.texture.as_deref()
    }

    /// Checks every index invariant.
    pub fn validate(&self) -> Result<(), MeshError> {
        let count = self.vertices.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i >= count) {
                return Err(MeshError::VertexIndex {
                    triangle: t,
                    index,
                    count,
                });
            }
        }
        if !self.uv_triangles.is_empty() && self.uv_triangles.len() != self.triangles.len() {
            return Err(MeshError::UvTriangleCount {
                triangles: self.triangles.len(),
                uv_triangles: self.uv_triangles.len(),
            });
        }
        let count = self.uvs.len();
        for (t, tri) in self.uv_triangles.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i >= count) {
                return Err(MeshError::UvIndex {
                    triangle: t,
                    index,
                    count,
                });
            }
        }
        Ok(())
    }
}
