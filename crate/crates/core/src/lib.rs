//! Ground-truth evaluation of 3D reconstructions ("digital twins").
//!
//! The crate covers the whole measurement loop:
//!
//! * [`geometry`] places an ordered, roll-randomized camera rig on a Fibonacci
//!   sphere around the smallest enclosing sphere of a mesh.
//! * [`render`] rasterizes synthetic frames with a pinhole camera, a z-buffer
//!   and a solid background.
//! * [`alignment`] recovers the similarity transform between estimated and
//!   ground-truth camera positions and refines it with point-to-point ICP.
//! * [`metrics`] scores paired frames with a background-masked SSIM.
//! * [`pipeline`] runs configurable experiments and writes CSV/SVG reports.
//! * [`mesh_io`] reads and writes OBJ/MTL, binary PPM and pose files.

pub mod alignment;
pub mod geometry;
pub mod mesh_io;
pub mod metrics;
pub mod pipeline;
pub mod pose;
pub mod render;
pub mod samples;

mod rng;

pub use mesh_io::{Material, RasterImage, Rgb, TriangleMesh};
pub use pose::{CameraPose, PoseSet};
