//! Wavefront OBJ/MTL subset.
//!
//! Supported OBJ directives: `v`, `vt`, `vn` (counted, then discarded), `f`,
//! `o`, `mtllib`, `usemtl`. Everything else is skipped. Faces with more than
//! three corners are fan-triangulated from their first corner. MTL support is
//! limited to `newmtl`, `Kd` and `map_Kd`.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::{Point2, Point3};
use thiserror::Error;

use super::mesh::{Material, TriangleMesh};
use super::ppm::{read_ppm, write_ppm, PpmError};

#[derive(Debug, Error)]
pub enum ObjError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {kind} index {index} out of range ({count} defined)")]
    IndexOutOfRange {
        line: usize,
        kind: &'static str,
        index: i64,
        count: usize,
    },
    #[error("mesh has no vertices")]
    Empty,
    #[error("cannot load {name}: {source}")]
    Resource { name: String, source: io::Error },
    #[error("texture {name}: {source}")]
    Texture { name: String, source: PpmError },
    #[error("material library {name}, line {line}: {message}")]
    Mtl {
        name: String,
        line: usize,
        message: String,
    },
}

/// Resolves names referenced from OBJ/MTL files (`mtllib`, `map_Kd`).
pub trait ResourceResolver {
    fn load(&self, name: &str) -> io::Result<Vec<u8>>;
}

/// Resolver for OBJ text without external references.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoResources;

impl ResourceResolver for NoResources {
    fn load(&self, name: &str) -> io::Result<Vec<u8>> {
        Err(io::Error::new(
            io::ErrorKind::NotFound,
            format!("no resources available (requested {name})"),
        ))
    }
}

/// Resolves names relative to a directory.
#[derive(Debug, Clone)]
pub struct DirResolver {
    pub base: PathBuf,
}

impl DirResolver {
    pub fn new(base: impl Into<PathBuf>) -> Self {
        Self { base: base.into() }
    }
}

impl ResourceResolver for DirResolver {
    fn load(&self, name: &str) -> io::Result<Vec<u8>> {
        fs::read(self.base.join(name))
    }
}

impl ResourceResolver for HashMap<String, Vec<u8>> {
    fn load(&self, name: &str) -> io::Result<Vec<u8>> {
        self.get(name)
            .cloned()
            .ok_or_else(|| io::Error::new(io::ErrorKind::NotFound, name.to_string()))
    }
}

/// One `newmtl` block.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MtlMaterial {
    pub name: String,
    pub diffuse: Option<[f64; 3]>,
    pub diffuse_map: Option<String>,
}

/// Yields `(1-based line number, content)` with comments and `\r` stripped.
fn lines(bytes: &[u8]) -> impl Iterator<Item = (usize, String)> + '_ {
    bytes.split(|&b| b == b'\n').enumerate().map(|(i, raw)| {
        let text = String::from_utf8_lossy(raw);
        let text = text.split('#').next().unwrap_or("").trim().to_string();
        (i + 1, text)
    })
}

fn parse_f64(token: &str) -> Option<f64> {
    token.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn parse_mtl(bytes: &[u8], library: &str) -> Result<Vec<MtlMaterial>, ObjError> {
    let mut out: Vec<MtlMaterial> = Vec::new();
    let err = |line: usize, message: &str| ObjError::Mtl {
        name: library.to_string(),
        line,
        message: message.to_string(),
    };
    for (line, text) in lines(bytes) {
        let mut tokens = text.split_whitespace();
        let Some(keyword) = tokens.next() else {
            continue;
        };
        match keyword {
            "newmtl" => {
                let name = tokens.collect::<Vec<_>>().join(" ");
                out.push(MtlMaterial {
                    name,
                    ..Default::default()
                });
            }
            "Kd" => {
                let current = out
                    .last_mut()
                    .ok_or_else(|| err(line, "Kd before newmtl"))?;
                let values: Option<Vec<f64>> = tokens.map(parse_f64).collect();
                match values.as_deref() {
                    Some([r, g, b]) => current.diffuse = Some([*r, *g, *b]),
                    Some([v]) => current.diffuse = Some([*v; 3]),
                    _ => return Err(err(line, "Kd expects 1 or 3 numbers")),
                }
            }
            "map_Kd" => {
                let current = out
                    .last_mut()
                    .ok_or_else(|| err(line, "map_Kd before newmtl"))?;
                // options such as `-s 1 1 1` precede the file name
                let path = tokens
                    .last()
                    .ok_or_else(|| err(line, "map_Kd without a file"))?;
                current.diffuse_map = Some(path.to_string());
            }
            _ => {}
        }
    }
    Ok(out)
}

struct FaceCorner {
    vertex: usize,
    uv: Option<usize>,
}

fn resolve_index(
    token: &str,
    count: usize,
    line: usize,
    kind: &'static str,
) -> Result<usize, ObjError> {
    let raw: i64 = token.parse().map_err(|_| ObjError::Syntax {
        line,
        message: format!("invalid {kind} index {token:?}"),
    })?;
    let out_of_range = ObjError::IndexOutOfRange {
        line,
        kind,
        index: raw,
        count,
    };
    let resolved = if raw > 0 {
        (raw - 1) as u64
    } else if raw < 0 {
        let back = raw.unsigned_abs();
        if back > count as u64 {
            return Err(out_of_range);
        }
        count as u64 - back
    } else {
        return Err(out_of_range);
    };
    if resolved >= count as u64 {
        return Err(out_of_range);
    }
    Ok(resolved as usize)
}

/// Parses OBJ text; `mtllib` and texture references are loaded through
/// `resolver`. Indices are converted to 0-based.
pub fn parse_obj(bytes: &[u8], resolver: &dyn ResourceResolver) -> Result<TriangleMesh, ObjError> {
    let mut mesh = TriangleMesh::default();
    let mut normal_count = 0usize;
    let mut faces_with_uv = 0usize;
    let mut library: HashMap<String, MtlMaterial> = HashMap::new();
    let mut used_material: Option<String> = None;

    for (line, text) in lines(bytes) {
        let mut tokens = text.split_whitespace();
        let Some(keyword) = tokens.next() else {
            continue;
        };
        match keyword {
            "v" => {
                let coords: Vec<&str> = tokens.collect();
                if coords.len() < 3 {
                    return Err(ObjError::Syntax {
                        line,
                        message: "vertex needs 3 coordinates".into(),
                    });
                }
                let mut xyz = [0.0; 3];
                for (slot, token) in xyz.iter_mut().zip(&coords) {
                    *slot = parse_f64(token).ok_or_else(|| ObjError::Syntax {
                        line,
                        message: format!("non-numeric vertex coordinate {token:?}"),
                    })?;
                }
                mesh.vertices.push(Point3::from(xyz));
            }
            "vt" => {
                let mut uv = [0.0; 2];
                for (slot, token) in uv.iter_mut().zip(tokens) {
                    *slot = parse_f64(token).ok_or_else(|| ObjError::Syntax {
                        line,
                        message: format!("non-numeric texture coordinate {token:?}"),
                    })?;
                }
                mesh.uvs.push(Point2::from(uv));
            }
            "vn" => normal_count += 1,
            "f" => {
                let mut corners = Vec::new();
                for token in tokens {
                    let mut parts = token.split('/');
                    let v = parts.next().unwrap_or("");
                    let vt = parts.next().filter(|s| !s.is_empty());
                    let vn = parts.next().filter(|s| !s.is_empty());
                    let vertex = resolve_index(v, mesh.vertices.len(), line, "vertex")?;
                    let uv = vt
                        .map(|t| resolve_index(t, mesh.uvs.len(), line, "uv"))
                        .transpose()?;
                    if let Some(n) = vn {
                        resolve_index(n, normal_count, line, "normal")?;
                    }
                    corners.push(FaceCorner { vertex, uv });
                }
                if corners.len() < 3 {
                    return Err(ObjError::Syntax {
                        line,
                        message: format!("face needs at least 3 corners, got {}", corners.len()),
                    });
                }
                let has_uv = corners.iter().all(|c| c.uv.is_some());
                if has_uv {
                    faces_with_uv += 1;
                }
                for k in 1..corners.len() - 1 {
                    let (a, b, c) = (&corners[0], &corners[k], &corners[k + 1]);
                    mesh.triangles.push([a.vertex, b.vertex, c.vertex]);
                    if has_uv {
                        mesh.uv_triangles.push([
                            a.uv.unwrap_or(0),
                            b.uv.unwrap_or(0),
                            c.uv.unwrap_or(0),
                        ]);
                    }
                }
            }
            "o" => {
                if mesh.name.is_empty() {
                    mesh.name = tokens.collect::<Vec<_>>().join(" ");
                }
            }
            "mtllib" => {
                for name in tokens {
                    let bytes = resolver.load(name).map_err(|source| ObjError::Resource {
                        name: name.to_string(),
                        source,
                    })?;
                    for m in parse_mtl(&bytes, name)? {
                        library.insert(m.name.clone(), m);
                    }
                }
            }
            "usemtl" => {
                let name = tokens.collect::<Vec<_>>().join(" ");
                match &used_material {
                    None => used_material = Some(name),
                    Some(first) if *first != name => {
                        log::warn!(
                            "line {line}: material {name:?} ignored; only {first:?} is used"
                        );
                    }
                    Some(_) => {}
                }
            }
            _ => {}
        }
    }

    if mesh.vertices.is_empty() {
        return Err(ObjError::Empty);
    }
    let face_count = mesh.triangles.len();
    if faces_with_uv > 0 && mesh.uv_triangles.len() != face_count {
        log::warn!("texture coordinates on only some faces; dropping uvs");
        mesh.uv_triangles.clear();
    }
    if let Some(name) = used_material {
        match library.remove(&name) {
            Some(m) => mesh.material = Some(load_material(m, resolver)?),
            None => log::warn!("material {name:?} not found in any mtllib"),
        }
    }
    Ok(mesh)
}

fn load_material(m: MtlMaterial, resolver: &dyn ResourceResolver) -> Result<Material, ObjError> {
    let texture = match &m.diffuse_map {
        Some(path) => {
            let bytes = resolver.load(path).map_err(|source| ObjError::Resource {
                name: path.clone(),
                source,
            })?;
            let image = read_ppm(&bytes).map_err(|source| ObjError::Texture {
                name: path.clone(),
                source,
            })?;
            Some(Arc::new(image))
        }
        None => None,
    };
    Ok(Material {
        name: m.name,
        diffuse: m.diffuse,
        texture,
    })
}

/// Reads an OBJ file, resolving references relative to its directory. The
/// mesh is named after the file stem unless the file carries an `o` name.
pub fn load_obj_file(path: &Path) -> Result<TriangleMesh, ObjError> {
    let bytes = fs::read(path).map_err(|source| ObjError::Resource {
        name: path.display().to_string(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut mesh = parse_obj(&bytes, &DirResolver::new(base))?;
    if mesh.name.is_empty() {
        mesh.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    Ok(mesh)
}

pub fn write_obj(mesh: &TriangleMesh) -> Vec<u8> {
    write_obj_with_mtllib(mesh, None)
}

/// Writes OBJ text. Coordinates use the shortest representation that parses
/// back to the same `f64`. When `mtllib` is given and the mesh has a material,
/// `mtllib`/`usemtl` lines reference it.
pub fn write_obj_with_mtllib(mesh: &TriangleMesh, mtllib: Option<&str>) -> Vec<u8> {
    use std::fmt::Write;
    let mut s = String::new();
    if !mesh.name.is_empty() {
        let _ = writeln!(s, "o {}", mesh.name);
    }
    if let (Some(lib), Some(material)) = (mtllib, &mesh.material) {
        let _ = writeln!(s, "mtllib {lib}");
        let _ = writeln!(s, "usemtl {}", material.name);
    }
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {:?} {:?} {:?}", v.x, v.y, v.z);
    }
    for uv in &mesh.uvs {
        let _ = writeln!(s, "vt {:?} {:?}", uv.x, uv.y);
    }
    if mesh.has_uvs() {
        for (t, uv) in mesh.triangles.iter().zip(&mesh.uv_triangles) {
            let _ = writeln!(
                s,
                "f {}/{} {}/{} {}/{}",
                t[0] + 1,
                uv[0] + 1,
                t[1] + 1,
                uv[1] + 1,
                t[2] + 1,
                uv[2] + 1
            );
        }
    } else {
        for t in &mesh.triangles {
            let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
    }
    s.into_bytes()
}

/// MTL text for one material whose texture (if any) lives at `texture_file`.
pub fn write_mtl(material: &Material, texture_file: Option<&str>) -> Vec<u8> {
    use std::fmt::Write;
    let mut s = String::new();
    let _ = writeln!(s, "newmtl {}", material.name);
    if let Some([r, g, b]) = material.diffuse {
        let _ = writeln!(s, "Kd {r:?} {g:?} {b:?}");
    }
    if let Some(file) = texture_file {
        let _ = writeln!(s, "map_Kd {file}");
    }
    s.into_bytes()
}

/// Writes `<stem>.obj` plus, when the mesh has a material, `<stem>.mtl` and
/// `<stem>_diffuse.ppm`. Returns the OBJ path.
pub fn export_mesh(mesh: &TriangleMesh, dir: &Path, stem: &str) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let obj_path = dir.join(format!("{stem}.obj"));
    match &mesh.material {
        Some(material) => {
            let mtl_name = format!("{stem}.mtl");
            let texture_name = material.texture.as_ref().map(|t| {
                let name = format!("{stem}_diffuse.ppm");
                (name, write_ppm(t))
            });
            if let Some((name, bytes)) = &texture_name {
                fs::write(dir.join(name), bytes)?;
            }
            fs::write(
                dir.join(&mtl_name),
                write_mtl(material, texture_name.as_ref().map(|(n, _)| n.as_str())),
            )?;
            fs::write(&obj_path, write_obj_with_mtllib(mesh, Some(&mtl_name)))?;
        }
        None => fs::write(&obj_path, write_obj(mesh))?,
    }
    Ok(obj_path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_io::RasterImage;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<TriangleMesh, ObjError> {
        parse_obj(text.as_bytes(), &NoResources)
    }

    #[test]
    fn minimal_triangle() {
        let mesh = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3").unwrap();
        assert_eq!(mesh.vertices.len(), 3);
        assert_eq!(mesh.triangles, vec![[0, 1, 2]]);
        assert!(!mesh.has_uvs());
    }

    #[test]
    fn quad_is_fan_triangulated() {
        let mesh = parse("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
        assert_eq!(mesh.triangles, vec![[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn out_of_range_index_names_the_line() {
        let err = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 5").unwrap_err();
        assert!(
            matches!(
                err,
                ObjError::IndexOutOfRange {
                    line: 4,
                    index: 5,
                    ..
                }
            ),
            "{err}"
        );
        assert!(err.to_string().starts_with("line 4"));
        assert!(parse("v 0 0 0\nf 0 1 1").is_err());
    }

    #[test]
    fn non_numeric_vertex_is_a_syntax_error() {
        let err = parse("v 0 0 0\nv 1 x 0\n").unwrap_err();
        assert!(matches!(err, ObjError::Syntax { line: 2, .. }), "{err}");
        assert!(parse("v 0 0 nan\n").is_err());
    }

    #[test]
    fn empty_mesh_is_rejected() {
        assert!(matches!(parse(""), Err(ObjError::Empty)));
        assert!(matches!(
            parse("# only a comment\ng group\n"),
            Err(ObjError::Empty)
        ));
    }

    #[test]
    fn negative_indices_are_relative() {
        let mesh = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\nv 0 0 1\nf -4 -1 -2").unwrap();
        assert_eq!(mesh.triangles, vec![[0, 1, 2], [0, 3, 2]]);
    }

    #[test]
    fn slash_forms_and_unknown_directives() {
        let text = "o thing\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nvn 0 0 1\n\
                    s off\ng g1\nf 1/1/1 2/2/1 3/3/1\nf 1//1 2//1 3//1\n";
        let mesh = parse(text).unwrap();
        assert_eq!(mesh.name, "thing");
        assert_eq!(mesh.triangles.len(), 2);
        // the second face has no uvs, so uvs are dropped for the mesh
        assert!(!mesh.has_uvs());

        let mesh =
            parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nf 1/3 2/2 3/1\n").unwrap();
        assert_eq!(mesh.uv_triangles, vec![[2, 1, 0]]);
        assert!(parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1//2 2//1 3//1\nvn 0 0 1").is_err());
    }

    #[test]
    fn single_triangle_writes_three_vertices_and_one_face() {
        let mesh = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3").unwrap();
        let text = String::from_utf8(write_obj(&mesh)).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 3);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 1);
    }

    #[test]
    fn uvs_emit_slash_form() {
        let mesh =
            parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nf 1/1 2/2 3/3\n").unwrap();
        let text = String::from_utf8(write_obj(&mesh)).unwrap();
        assert!(text.contains("f 1/1 2/2 3/3"));
    }

    #[test]
    fn material_and_texture_through_resolver() {
        let texture = RasterImage::filled(2, 2, [10, 20, 30]);
        let mut files: HashMap<String, Vec<u8>> = HashMap::new();
        files.insert(
            "m.mtl".into(),
            b"newmtl skin\nKa 1 1 1\nKd 0.5 0.25 1\nmap_Kd -s 1 1 1 tex.ppm\n".to_vec(),
        );
        files.insert("tex.ppm".into(), write_ppm(&texture));
        let text = "mtllib m.mtl\nv 0 0 0\nv 1 0 0\nv 0 1 0\nusemtl skin\nf 1 2 3\n";
        let mesh = parse_obj(text.as_bytes(), &files).unwrap();
        let material = mesh.material.as_ref().unwrap();
        assert_eq!(material.diffuse, Some([0.5, 0.25, 1.0]));
        assert_eq!(mesh.texture(), Some(&texture));

        assert!(matches!(
            parse_obj(text.as_bytes(), &NoResources),
            Err(ObjError::Resource { .. })
        ));
    }

    #[test]
    fn export_round_trips_with_material() {
        let dir = tempfile::tempdir().unwrap();
        let mut mesh =
            parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nf 1/1 2/2 3/3\n").unwrap();
        mesh.name = "tri".into();
        mesh.material = Some(Material {
            name: "mat".into(),
            diffuse: Some([1.0, 0.5, 0.0]),
            texture: Some(Arc::new(RasterImage::filled(3, 2, [1, 2, 3]))),
        });
        let path = export_mesh(&mesh, dir.path(), "tri").unwrap();
        assert_eq!(load_obj_file(&path).unwrap(), mesh);
    }

    proptest! {
        #[test]
        fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..256)) {
            let _ = parse_obj(&bytes, &NoResources);
        }

        #[test]
        fn directive_soup_never_panics(lines in proptest::collection::vec(
            prop_oneof![
                Just("v 0 0 0".to_string()),
                Just("vt 0.5 0.5".to_string()),
                Just("vn 0 0 1".to_string()),
                "f( -?[0-9]{1,2}(/-?[0-9]?(/-?[0-9])?)?){0,5}",
                "[a-z]{1,3} [ -~]{0,10}",
            ],
            0..20,
        )) {
            let text = lines.join("\n");
            if let Ok(mesh) = parse_obj(text.as_bytes(), &NoResources) {
                prop_assert!(mesh.validate().is_ok());
            }
        }
    }
}
