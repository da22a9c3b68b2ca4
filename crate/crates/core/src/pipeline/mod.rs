//! End-to-end experiments: rig, render, reconstruct, align, score, report.

mod config;
mod degrade;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

pub use config::{
    parse_color, ExperimentConfig, ImportSource, ModelSource, Reconstruction, Variant, CONFIG_HELP,
};
pub use degrade::{degrade_mesh, DegradeParams, Perturbation};
pub use report::{
    histogram_bin, histogram_svg, ssim_histogram, sweep_svg, write_frames_csv, write_report_csv,
    write_reports, ReportFiles, HISTOGRAM_BINS, HISTOGRAM_BIN_WIDTH, TIMING_COLUMNS,
};

use crate::alignment::{align_reconstruction, AlignmentReport, IcpParams};
use crate::geometry::{build_rig, CameraRigSpec};
use crate::mesh_io::{
    load_obj_file, read_pose_file, write_pose_file, write_ppm, Rgb, TriangleMesh,
};
use crate::metrics::{weighted_score, SsimReport, DEFAULT_WINDOW};
use crate::pose::{pair_by_frame, PoseSet};
use crate::render::{frame_file_name, rasterize, CameraIntrinsics, RenderSettings, Resolution};
use crate::samples;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid degradation: {0}")]
    InvalidDegrade(String),
    #[error("decimation removed every triangle")]
    DecimatedAway,
    #[error("geometry: {0}")]
    Geometry(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Ok,
    /// The ground-truth mesh could not be read, or no rig could be placed
    /// around it.
    LoadFailed,
    ReconstructionFailed,
    AlignmentFailed,
    ScoringFailed,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::LoadFailed => "load_failed",
            RunStatus::ReconstructionFailed => "reconstruction_failed",
            RunStatus::AlignmentFailed => "alignment_failed",
            RunStatus::ScoringFailed => "scoring_failed",
        }
    }
}

/// Wall-clock time per stage. Render and score run interleaved per frame, so
/// those two are summed per-frame times across worker threads.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StageTimings {
    pub load: Duration,
    pub rig: Duration,
    pub reconstruct: Duration,
    pub align: Duration,
    pub render: Duration,
    pub score: Duration,
    pub total: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub model: String,
    pub variant: Variant,
    pub status: RunStatus,
    pub alignment: Option<AlignmentReport>,
    pub ssim: Option<SsimReport>,
    pub timings: StageTimings,
    /// Ground-truth poses without an estimated counterpart.
    pub unmatched_poses: usize,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn new(model: impl Into<String>, variant: Variant) -> Self {
        Self {
            model: model.into(),
            variant,
            status: RunStatus::Ok,
            alignment: None,
            ssim: None,
            timings: StageTimings::default(),
            unmatched_poses: 0,
            error: None,
        }
    }

    fn fail(&mut self, status: RunStatus, error: impl std::fmt::Display) {
        log::warn!(
            "{} ({}): {}: {error}",
            self.model,
            report::variant_label(self),
            status.as_str()
        );
        self.status = status;
        self.error = Some(error.to_string());
    }

    pub fn global_score(&self) -> Option<f64> {
        self.ssim.as_ref().map(|s| s.global_score)
    }
}

/// Rendering and alignment settings shared by both renders of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSettings {
    pub resolution: Resolution,
    pub vertical_fov_deg: f64,
    pub background: Rgb,
    pub icp: IcpParams,
    /// Where to write `frames_gt/` and `frames_recon/`, if anywhere.
    pub frames_dir: Option<PathBuf>,
}

/// Loads a mesh from a file or the built-in samples.
pub fn load_model(source: &ModelSource) -> Result<TriangleMesh, String> {
    let mesh = match source {
        ModelSource::File(path) => {
            load_obj_file(path).map_err(|e| format!("{}: {e}", path.display()))?
        }
        ModelSource::Builtin(name) => {
            samples::by_name(name).ok_or_else(|| format!("unknown built-in model `{name}`"))?
        }
    };
    mesh.validate().map_err(|e| e.to_string())?;
    Ok(mesh)
}

/// Reads an external reconstruction and pairs its poses with `gt_poses` by
/// frame index. Returns the mesh, the paired (estimated, ground truth) pose
/// sets and the number of unmatched ground-truth poses.
pub fn import_reconstruction(
    mesh_path: &Path,
    pose_path: &Path,
    gt_poses: &PoseSet,
) -> Result<(TriangleMesh, PoseSet, PoseSet, usize), String> {
    let mesh = load_obj_file(mesh_path).map_err(|e| format!("{}: {e}", mesh_path.display()))?;
    mesh.validate().map_err(|e| e.to_string())?;
    let bytes = fs::read(pose_path).map_err(|e| format!("{}: {e}", pose_path.display()))?;
    let est = read_pose_file(&bytes).map_err(|e| format!("{}: {e}", pose_path.display()))?;
    let (est, gt, unmatched) = pair_by_frame(&est, gt_poses);
    if unmatched > 0 {
        log::warn!("{unmatched} ground-truth frames have no estimated pose");
    }
    Ok((mesh, est, gt, unmatched))
}

fn write_frame(dir: &Path, frame: usize, image: &crate::RasterImage) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(frame_file_name(frame)), write_ppm(image))
}

/// Renders both meshes from every pose and scores each pair as it is
/// produced, so at most a few frames per worker are alive at once.
pub fn render_and_score(
    gt_mesh: &TriangleMesh,
    recon_mesh: &TriangleMesh,
    poses: &PoseSet,
    settings: &EvalSettings,
) -> Result<(SsimReport, Duration, Duration), String> {
    let intrinsics =
        CameraIntrinsics::from_resolution(settings.resolution, settings.vertical_fov_deg)
            .map_err(|e| e.to_string())?;
    let render_settings = RenderSettings {
        background: settings.background,
        ..RenderSettings::default()
    };
    let outcomes: Vec<_> = poses
        .poses
        .par_iter()
        .map(|pose| {
            let start = Instant::now();
            let gt = rasterize(gt_mesh, pose, &intrinsics, &render_settings);
            let recon = rasterize(recon_mesh, pose, &intrinsics, &render_settings);
            let rendered = start.elapsed();
            let start = Instant::now();
            let score = weighted_score(&gt, &recon, settings.background, DEFAULT_WINDOW);
            let scored = start.elapsed();
            let io = settings.frames_dir.as_ref().map_or(Ok(()), |dir| {
                write_frame(&dir.join("frames_gt"), pose.frame, &gt)
                    .and_then(|_| write_frame(&dir.join("frames_recon"), pose.frame, &recon))
            });
            (pose.frame, score, rendered, scored, io)
        })
        .collect();
    let mut render = Duration::ZERO;
    let mut score = Duration::ZERO;
    let mut scores = Vec::with_capacity(outcomes.len());
    for (frame, s, r, t, io) in outcomes {
        io.map_err(|e| format!("writing frame {frame}: {e}"))?;
        render += r;
        score += t;
        scores.push((frame, s));
    }
    let report = SsimReport::from_frames(scores).map_err(|e| e.to_string())?;
    Ok((report, render, score))
}

/// Alignment, rendering and scoring of an already reconstructed model.
/// `estimated` and `paired_gt` must be paired by position; every pose in
/// `gt_poses` is rendered and scored.
pub fn evaluate_reconstruction(
    record: &mut RunRecord,
    gt_mesh: &TriangleMesh,
    gt_poses: &PoseSet,
    recon: &TriangleMesh,
    estimated: &PoseSet,
    paired_gt: &PoseSet,
    settings: &EvalSettings,
) {
    let start = Instant::now();
    if estimated.len() < 3 {
        record.timings.align = start.elapsed();
        record.fail(
            RunStatus::AlignmentFailed,
            format!(
                "only {} matched poses, at least 3 are required",
                estimated.len()
            ),
        );
        return;
    }
    let aligned = match align_reconstruction(recon, estimated, paired_gt, gt_mesh, &settings.icp) {
        Ok((mesh, report)) => {
            record.alignment = Some(report);
            mesh
        }
        Err(e) => {
            record.timings.align = start.elapsed();
            record.fail(RunStatus::AlignmentFailed, e);
            return;
        }
    };
    record.timings.align = start.elapsed();

    match render_and_score(gt_mesh, &aligned, gt_poses, settings) {
        Ok((report, render, score)) => {
            record.ssim = Some(report);
            record.timings.render = render;
            record.timings.score = score;
            record.status = RunStatus::Ok;
        }
        Err(e) => record.fail(RunStatus::ScoringFailed, e),
    }
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Directory for one run's artifacts under the batch output directory.
pub fn run_dir(config: &ExperimentConfig, model: &str, variant: &Variant) -> PathBuf {
    config.output_dir.join("runs").join(sanitize(&format!(
        "{model}_f{}_{}_n{}",
        variant.frame_count, variant.resolution, variant.vertex_noise
    )))
}

/// Runs every stage for one model and sweep variant. Failures are recorded
/// in the returned record, never propagated.
pub fn run_model(config: &ExperimentConfig, model_index: usize, variant: &Variant) -> RunRecord {
    let total = Instant::now();
    let source = &config.models[model_index];
    let mut record = RunRecord::new(source.name(), *variant);
    run_stages(config, model_index, variant, &mut record);
    record.timings.total = total.elapsed();
    record
}

fn run_stages(
    config: &ExperimentConfig,
    model_index: usize,
    variant: &Variant,
    record: &mut RunRecord,
) {
    let dir = run_dir(config, &record.model, variant);
    let write = |name: &str, bytes: Vec<u8>| {
        fs::create_dir_all(&dir).and_then(|_| fs::write(dir.join(name), bytes))
    };

    let start = Instant::now();
    let loaded = load_model(&config.models[model_index]);
    record.timings.load = start.elapsed();
    let gt_mesh = match loaded {
        Ok(m) => m,
        Err(e) => return record.fail(RunStatus::LoadFailed, e),
    };

    let start = Instant::now();
    let spec = CameraRigSpec {
        count: variant.frame_count,
        vertical_fov_deg: config.vertical_fov_deg,
        seed: config.seed,
    };
    let rig = build_rig(&gt_mesh, &spec);
    record.timings.rig = start.elapsed();
    let gt_poses = match rig {
        Ok(rig) => rig.poses,
        Err(e) => return record.fail(RunStatus::LoadFailed, format!("camera rig: {e}")),
    };
    if let Err(e) = write("poses_gt.txt", write_pose_file(&gt_poses)) {
        return record.fail(RunStatus::ScoringFailed, format!("writing poses: {e}"));
    }

    let start = Instant::now();
    let reconstructed = match &config.reconstruction {
        Reconstruction::Degrade(params) => {
            let params = DegradeParams {
                vertex_noise_sigma: variant.vertex_noise,
                ..*params
            };
            degrade_mesh(&gt_mesh, &gt_poses, &params)
                .map(|(mesh, est)| (mesh, est, gt_poses.clone(), 0))
                .map_err(|e| e.to_string())
        }
        Reconstruction::Import(list) => {
            let src = &list[model_index];
            import_reconstruction(&src.mesh, &src.poses, &gt_poses)
        }
    };
    record.timings.reconstruct = start.elapsed();
    let (recon, estimated, paired_gt, unmatched) = match reconstructed {
        Ok(r) => r,
        Err(e) => return record.fail(RunStatus::ReconstructionFailed, e),
    };
    record.unmatched_poses = unmatched;
    if let Err(e) = write("poses_est.txt", write_pose_file(&estimated)) {
        return record.fail(RunStatus::ScoringFailed, format!("writing poses: {e}"));
    }

    let settings = EvalSettings {
        resolution: variant.resolution,
        vertical_fov_deg: config.vertical_fov_deg,
        background: config.background,
        icp: config.icp,
        frames_dir: config.save_frames.then(|| dir.clone()),
    };
    evaluate_reconstruction(
        record, &gt_mesh, &gt_poses, &recon, &estimated, &paired_gt, &settings,
    );
}

#[derive(Debug)]
pub struct BatchOutcome {
    /// Model-major, then sweep variants in [`ExperimentConfig::variants`]
    /// order.
    pub records: Vec<RunRecord>,
    pub files: ReportFiles,
}

impl BatchOutcome {
    pub fn all_ok(&self) -> bool {
        self.records.iter().all(|r| r.status == RunStatus::Ok)
    }
}

/// Runs every model under every sweep variant and writes the reports.
pub fn run_batch(config: &ExperimentConfig) -> Result<BatchOutcome, PipelineError> {
    config.validate()?;
    let variants = config.variants();
    let jobs: Vec<(usize, Variant)> = (0..config.models.len())
        .flat_map(|m| variants.iter().map(move |v| (m, *v)))
        .collect();
    let records: Vec<RunRecord> = jobs
        .par_iter()
        .map(|(m, v)| run_model(config, *m, v))
        .collect();
    let files = write_reports(&records, &config.output_dir)?;
    Ok(BatchOutcome { records, files })
}

/// Loads the config at `path` and runs it.
pub fn run_batch_from_file(path: &Path) -> Result<BatchOutcome, PipelineError> {
    run_batch(&ExperimentConfig::from_file(path)?)
}
