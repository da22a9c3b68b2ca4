use std::fs;
use std::path::{Path, PathBuf};

use super::degrade::{DegradeParams, Perturbation};
use super::PipelineError;
use crate::alignment::IcpParams;
use crate::mesh_io::Rgb;
use crate::metrics::DEFAULT_WINDOW;
use crate::render::Resolution;

/// Where a ground-truth mesh comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSource {
    File(PathBuf),
    /// One of [`crate::samples::by_name`].
    Builtin(String),
}

impl ModelSource {
    pub fn name(&self) -> String {
        match self {
            ModelSource::File(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string()),
            ModelSource::Builtin(name) => name.clone(),
        }
    }
}

/// An externally produced reconstruction of one model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportSource {
    pub mesh: PathBuf,
    pub poses: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reconstruction {
    Degrade(DegradeParams),
    /// One entry per model, in model order.
    Import(Vec<ImportSource>),
}

/// One point of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Variant {
    pub frame_count: usize,
    pub resolution: Resolution,
    /// Vertex noise as a fraction of the SES radius (degrade mode only).
    pub vertex_noise: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub models: Vec<ModelSource>,
    pub frame_counts: Vec<usize>,
    pub resolutions: Vec<Resolution>,
    pub vertex_noises: Vec<f64>,
    pub background: Rgb,
    pub vertical_fov_deg: f64,
    pub seed: u64,
    pub reconstruction: Reconstruction,
    pub output_dir: PathBuf,
    /// Write every rendered frame as PPM.
    pub save_frames: bool,
    pub icp: IcpParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            models: Vec::new(),
            frame_counts: vec![100],
            resolutions: vec![Resolution::P1440],
            vertex_noises: vec![0.0],
            background: [255, 255, 255],
            vertical_fov_deg: 23.0,
            seed: 0,
            reconstruction: Reconstruction::Degrade(DegradeParams::default()),
            output_dir: PathBuf::from("twinbench-out"),
            save_frames: false,
            icp: IcpParams::default(),
        }
    }
}

/// Config grammar, one `key = value` per line, `#` starts a comment.
pub const CONFIG_HELP: &str = "\
Config file: one `key = value` per line; `#` starts a comment.
Relative paths are resolved against the config file's directory.

  model = <path.obj> | builtin:<unit_cube|blob|cylinder>   (repeat per model)
  frame_count = <n>          sweep; repeat or comma-separate (default 100)
  resolution = <WxH|1080p|1440p|4k>   sweep (default 1440p)
  vertex_noise = <fraction of SES radius>   sweep (default 0)
  background = <RRGGBB>      (default FFFFFF)
  vertical_fov = <degrees>   (default 23)
  seed = <u64>               (default 0)
  output_dir = <path>
  save_frames = <true|false> (default false)
  reconstruction = <degrade|import>   (default degrade)
  import = <recon.obj> <poses.txt>    one per model, in model order
  decimation = <fraction of triangles kept>    (default 1)
  pose_noise = <fraction of camera radius>     (default 0)
  perturb_scale = <s>                          (default 1)
  perturb_rotation_deg = <x> <y> <z>           Euler angles (default 0 0 0)
  perturb_translation = <x> <y> <z>            fractions of SES radius
  icp_max_iterations = <n>                     (default 50)
  icp_sample_size = <n>                        (default 5000)
  icp_gate = <fraction of SES radius>          (default 0.1)
  icp_tolerance = <fraction of SES radius>     (default 1e-6)
";

fn parse_err(line: usize, message: impl Into<String>) -> PipelineError {
    PipelineError::Config {
        line,
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, text: &str) -> Result<T, PipelineError> {
    text.trim()
        .parse()
        .map_err(|_| parse_err(line, format!("{key}: cannot parse `{}`", text.trim())))
}

fn parse_triple(line: usize, key: &str, text: &str) -> Result<[f64; 3], PipelineError> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(parse_err(line, format!("{key}: expected 3 numbers")));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = parse_num(line, key, p)?;
    }
    Ok(out)
}

/// Parses `RRGGBB` hex.
pub fn parse_color(text: &str) -> Option<Rgb> {
    let t = text.trim();
    if t.len() != 6 || !t.is_ascii() {
        return None;
    }
    let channel = |i: usize| u8::from_str_radix(&t[2 * i..2 * i + 2], 16).ok();
    Some([channel(0)?, channel(1)?, channel(2)?])
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base)
    }

    /// Parses config text; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, PipelineError> {
        let mut cfg = ExperimentConfig::default();
        let mut frame_counts = Vec::new();
        let mut resolutions = Vec::new();
        let mut noises = Vec::new();
        let mut imports = Vec::new();
        let mut mode: Option<(usize, String)> = None;
        let mut degrade = DegradeParams::default();
        let mut perturb = Perturbation::default();
        let mut perturbed = false;
        let resolve = |p: &str| {
            let p = Path::new(p.trim());
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| parse_err(line, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(parse_err(line, format!("{key}: missing value")));
            }
            match key {
                "model" => cfg.models.push(match value.strip_prefix("builtin:") {
                    Some(name) => ModelSource::Builtin(name.trim().to_string()),
                    None => ModelSource::File(resolve(value)),
                }),
                "frame_count" => {
                    for v in list(value) {
                        frame_counts.push(parse_num(line, key, v)?);
                    }
                }
                "resolution" => {
                    for v in list(value) {
                        resolutions.push(
                            Resolution::parse(v)
                                .ok_or_else(|| parse_err(line, format!("bad resolution `{v}`")))?,
                        );
                    }
                }
                "vertex_noise" => {
                    for v in list(value) {
                        noises.push(parse_num(line, key, v)?);
                    }
                }
                "background" => {
                    cfg.background = parse_color(value)
                        .ok_or_else(|| parse_err(line, "background must be RRGGBB hex"))?;
                }
                "vertical_fov" => cfg.vertical_fov_deg = parse_num(line, key, value)?,
                "seed" => cfg.seed = parse_num(line, key, value)?,
                "output_dir" => cfg.output_dir = resolve(value),
                "save_frames" => cfg.save_frames = parse_num(line, key, value)?,
                "reconstruction" => mode = Some((line, value.to_string())),
                "import" => {
                    let parts: Vec<&str> = value.split_whitespace().collect();
                    let [mesh, poses] = parts[..] else {
                        return Err(parse_err(line, "import expects `<mesh.obj> <poses.txt>`"));
                    };
                    imports.push(ImportSource {
                        mesh: resolve(mesh),
                        poses: resolve(poses),
                    });
                }
                "decimation" => degrade.decimation_ratio = parse_num(line, key, value)?,
                "pose_noise" => degrade.pose_noise_sigma = parse_num(line, key, value)?,
                "perturb_scale" => {
                    perturb.scale = parse_num(line, key, value)?;
                    perturbed = true;
                }
                "perturb_rotation_deg" => {
                    perturb.rotation_deg = parse_triple(line, key, value)?;
                    perturbed = true;
                }
                "perturb_translation" => {
                    perturb.translation = parse_triple(line, key, value)?;
                    perturbed = true;
                }
                "icp_max_iterations" => cfg.icp.max_iterations = parse_num(line, key, value)?,
                "icp_sample_size" => cfg.icp.sample_size = parse_num(line, key, value)?,
                "icp_gate" => cfg.icp.max_correspondence_distance = parse_num(line, key, value)?,
                "icp_tolerance" => cfg.icp.convergence_tol = parse_num(line, key, value)?,
                other => return Err(parse_err(line, format!("unknown key `{other}`"))),
            }
        }

        if !frame_counts.is_empty() {
            cfg.frame_counts = frame_counts;
        }
        if !resolutions.is_empty() {
            cfg.resolutions = resolutions;
        }
        let noise_swept = !noises.is_empty();
        if noise_swept {
            cfg.vertex_noises = noises;
        }
        if perturbed {
            degrade.perturb = Some(perturb);
        }
        cfg.reconstruction = match mode.as_ref().map(|(l, m)| (*l, m.as_str())) {
            None | Some((_, "degrade")) => {
                if !imports.is_empty() {
                    return Err(parse_err(
                        0,
                        "`import` entries require `reconstruction = import`",
                    ));
                }
                Reconstruction::Degrade(degrade)
            }
            Some((line, "import")) => {
                if noise_swept {
                    return Err(parse_err(line, "vertex_noise only applies to degrade mode"));
                }
                Reconstruction::Import(imports)
            }
            Some((line, other)) => {
                return Err(parse_err(
                    line,
                    format!("unknown reconstruction mode `{other}`"),
                ))
            }
        };
        cfg.icp.seed = cfg.seed;
        if let Reconstruction::Degrade(d) = &mut cfg.reconstruction {
            d.seed = cfg.seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |m: String| Err(parse_err(0, m));
        if self.models.is_empty() {
            return fail("at least one `model` is required".into());
        }
        if let Some(n) = self.frame_counts.iter().find(|&&n| n < 3) {
            return fail(format!("frame_count must be at least 3, got {n}"));
        }
        if let Some(r) = self
            .resolutions
            .iter()
            .find(|r| r.width < DEFAULT_WINDOW || r.height < DEFAULT_WINDOW)
        {
            return fail(format!("resolution {r} is smaller than the SSIM window"));
        }
        if let Some(v) = self
            .vertex_noises
            .iter()
            .find(|v| !(v.is_finite() && **v >= 0.0))
        {
            return fail(format!("vertex_noise must be non-negative, got {v}"));
        }
        if !(self.vertical_fov_deg > 0.0 && self.vertical_fov_deg < 180.0) {
            return fail(format!(
                "vertical_fov must be in (0, 180), got {}",
                self.vertical_fov_deg
            ));
        }
        self.icp
            .validate()
            .map_err(|e| parse_err(0, e.to_string()))?;
        match &self.reconstruction {
            Reconstruction::Degrade(d) => d.validate().map_err(|e| parse_err(0, e.to_string()))?,
            Reconstruction::Import(list) if list.len() != self.models.len() => {
                return fail(format!(
                    "{} import entries for {} models",
                    list.len(),
                    self.models.len()
                ));
            }
            Reconstruction::Import(_) => {}
        }
        Ok(())
    }

    /// Cross product of the sweep keys, frame count varying slowest.
    pub fn variants(&self) -> Vec<Variant> {
        let mut out = Vec::new();
        for &frame_count in &self.frame_counts {
            for &resolution in &self.resolutions {
                for &vertex_noise in &self.vertex_noises {
                    out.push(Variant {
                        frame_count,
                        resolution,
                        vertex_noise,
                    });
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_sweeps() {
        let cfg = ExperimentConfig::parse(
            "# demo\nmodel = builtin:unit_cube\nmodel = meshes/a.obj\nframe_count = 70, 100\nframe_count = 130\n",
            Path::new("/data"),
        )
        .unwrap();
        assert_eq!(
            cfg.models,
            vec![
                ModelSource::Builtin("unit_cube".into()),
                ModelSource::File(PathBuf::from("/data/meshes/a.obj"))
            ]
        );
        assert_eq!(cfg.frame_counts, vec![70, 100, 130]);
        assert_eq!(cfg.resolutions, vec![Resolution::P1440]);
        assert_eq!(cfg.background, [255, 255, 255]);
        assert_eq!(cfg.variants().len(), 3);
    }

    #[test]
    fn full_config() {
        let cfg = ExperimentConfig::parse(
            "model = builtin:blob\nresolution = 1080p\nresolution=4k\nbackground = 000000\nseed = 42\n\
             vertex_noise = 0, 0.01, 0.05\ndecimation = 0.5\nperturb_scale = 2\noutput_dir = out\nsave_frames = true\n",
            Path::new("base"),
        )
        .unwrap();
        assert_eq!(cfg.variants().len(), 6);
        assert_eq!(cfg.background, [0, 0, 0]);
        assert_eq!(cfg.output_dir, PathBuf::from("base/out"));
        assert!(cfg.save_frames);
        let Reconstruction::Degrade(d) = cfg.reconstruction else {
            panic!()
        };
        assert_eq!(d.decimation_ratio, 0.5);
        assert_eq!(d.seed, 42);
        assert_eq!(d.perturb.unwrap().scale, 2.0);
    }

    #[test]
    fn import_mode() {
        let cfg = ExperimentConfig::parse(
            "model = gt.obj\nreconstruction = import\nimport = recon.obj poses.txt\n",
            Path::new(""),
        )
        .unwrap();
        assert_eq!(
            cfg.reconstruction,
            Reconstruction::Import(vec![ImportSource {
                mesh: "recon.obj".into(),
                poses: "poses.txt".into()
            }])
        );
        assert!(ExperimentConfig::parse(
            "model = gt.obj\nreconstruction = import\n",
            Path::new("")
        )
        .is_err());
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "",
            "model = a.obj\nframe_count = 2\n",
            "model = a.obj\nresolution = 8x8\n",
            "model = a.obj\ncolour = red\n",
            "model = a.obj\nbackground = #fff\n",
            "model a.obj\n",
            "model = a.obj\nreconstruction = nerf\n",
            "model = a.obj\ndecimation = 0\n",
        ] {
            assert!(
                ExperimentConfig::parse(text, Path::new("")).is_err(),
                "{text:?}"
            );
        }
    }

    #[test]
    fn colors() {
        assert_eq!(parse_color("ff8000"), Some([255, 128, 0]));
        assert_eq!(parse_color("ff80"), None);
        assert_eq!(parse_color("gg0000"), None);
    }
}
