//! On-disk formats: a Wavefront OBJ/MTL subset, binary PPM (P6) rasters and
//! the plain-text `TWINPOSE` pose file.
//!
//! All parsers are pure functions over byte slices and return structured
//! errors on malformed input; they never panic on arbitrary bytes.

mod mesh;
mod obj;
mod pose_file;
mod ppm;

pub use mesh::{Material, MeshError, RasterImage, Rgb, TriangleMesh};
pub use obj::{
    export_mesh, load_obj_file, parse_mtl, parse_obj, write_mtl, write_obj, write_obj_with_mtllib,
    DirResolver, MtlMaterial, NoResources, ObjError, ResourceResolver,
};
pub use pose_file::{
    read_pose_file, write_pose_file, PoseFileError, POSE_FILE_MAGIC, POSE_FILE_VERSION,
};
pub use ppm::{read_ppm, write_ppm, PpmError};
