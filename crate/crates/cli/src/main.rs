use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use twinbench_core::alignment::IcpParams;
use twinbench_core::geometry::{generate_rig, CameraRigSpec, DEFAULT_VERTICAL_FOV_DEG};
use twinbench_core::mesh_io::{read_pose_file, write_pose_file};
use twinbench_core::pipeline::{
    self, evaluate_reconstruction, import_reconstruction, load_model, parse_color, EvalSettings,
    ModelSource, RunRecord, RunStatus, Variant, CONFIG_HELP,
};
use twinbench_core::render::{
    render_rig, write_frames, CameraIntrinsics, RenderSettings, Resolution,
};
use twinbench_core::{PoseSet, Rgb};

#[derive(Parser)]
#[command(
    name = "twinbench",
    version,
    about = "Ground-truth scoring of 3D reconstructions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch experiment described by a config file.
    #[command(after_help = CONFIG_HELP)]
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Align and score one external reconstruction against ground truth.
    Score {
        /// Ground-truth OBJ (or builtin:<name>).
        #[arg(long)]
        gt: String,
        /// Reconstructed OBJ.
        #[arg(long)]
        recon: PathBuf,
        /// Poses the ground-truth frames were rendered with.
        #[arg(long)]
        gt_poses: PathBuf,
        /// Estimated poses, paired to ground truth by frame index.
        #[arg(long)]
        est_poses: PathBuf,
        /// Score only the first N ground-truth frames.
        #[arg(long)]
        frames: Option<usize>,
        #[arg(long, default_value = "2560x1440", value_parser = parse_resolution)]
        res: Resolution,
        /// Background color as RRGGBB.
        #[arg(long, default_value = "FFFFFF", value_parser = parse_background)]
        bg: Rgb,
        /// Seed for ICP subsampling.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write report.csv and friends here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a camera rig around a mesh and print it as a pose file.
    Poses {
        /// OBJ path (or builtin:<name>).
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_VERTICAL_FOV_DEG)]
        fov: f64,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a mesh from every pose of a pose file into PPM frames.
    Render {
        /// OBJ path (or builtin:<name>).
        #[arg(long)]
        model: String,
        #[arg(long)]
        poses: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "2560x1440", value_parser = parse_resolution)]
        res: Resolution,
        #[arg(long, default_value = "FFFFFF", value_parser = parse_background)]
        bg: Rgb,
    },
}

fn parse_resolution(s: &str) -> Result<Resolution, String> {
    Resolution::parse(s).ok_or_else(|| format!("expected WxH, 1080p, 1440p or 4k, got `{s}`"))
}

fn parse_background(s: &str) -> Result<Rgb, String> {
    parse_color(s).ok_or_else(|| format!("expected RRGGBB hex, got `{s}`"))
}

fn model_source(arg: &str) -> ModelSource {
    match arg.strip_prefix("builtin:") {
        Some(name) => ModelSource::Builtin(name.to_string()),
        None => ModelSource::File(PathBuf::from(arg)),
    }
}

fn read_poses(path: &Path) -> Result<PoseSet> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    read_pose_file(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn print_record(r: &RunRecord) {
    let score = r
        .global_score()
        .map(|s| format!("{s:.6}"))
        .unwrap_or_else(|| "-".into());
    println!(
        "{:<24} frames={:<4} res={:<10} noise={:<6} status={:<22} ssim={}",
        r.model,
        r.variant.frame_count,
        r.variant.resolution.to_string(),
        r.variant.vertex_noise,
        r.status.as_str(),
        score
    );
    if let Some(e) = &r.error {
        println!("    error: {e}");
    }
}

fn run(config: &Path) -> Result<bool> {
    let outcome = pipeline::run_batch_from_file(config)?;
    for r in &outcome.records {
        print_record(r);
    }
    println!(
        "reports written to {}",
        outcome
            .files
            .report_csv
            .parent()
            .unwrap_or(Path::new("."))
            .display()
    );
    Ok(outcome.all_ok())
}

#[allow(clippy::too_many_arguments)]
fn score(
    gt: &str,
    recon: &Path,
    gt_poses: &Path,
    est_poses: &Path,
    frames: Option<usize>,
    res: Resolution,
    bg: Rgb,
    seed: u64,
    out: Option<&Path>,
) -> Result<bool> {
    let source = model_source(gt);
    let gt_mesh = load_model(&source).map_err(anyhow::Error::msg)?;
    let mut poses = read_poses(gt_poses)?;
    if let Some(n) = frames {
        poses = poses.truncated(n);
    }
    let Some(first) = poses.iter().next() else {
        bail!("no ground-truth poses");
    };
    let settings = EvalSettings {
        resolution: res,
        vertical_fov_deg: first.vertical_fov_deg,
        background: bg,
        icp: IcpParams {
            seed,
            ..Default::default()
        },
        frames_dir: out.map(Path::to_path_buf),
    };
    let variant = Variant {
        frame_count: poses.len(),
        resolution: res,
        vertex_noise: 0.0,
    };
    let mut record = RunRecord::new(source.name(), variant);
    match import_reconstruction(recon, est_poses, &poses) {
        Ok((mesh, est, paired_gt, unmatched)) => {
            record.unmatched_poses = unmatched;
            evaluate_reconstruction(
                &mut record,
                &gt_mesh,
                &poses,
                &mesh,
                &est,
                &paired_gt,
                &settings,
            );
        }
        Err(e) => {
            record.status = RunStatus::ReconstructionFailed;
            record.error = Some(e);
        }
    }
    print_record(&record);
    if let Some(a) = &record.alignment {
        println!(
            "    rough_rms={:e} icp_rms={} icp_iterations={} unmatched_poses={}",
            a.rough_rms,
            a.icp_rms
                .map(|r| format!("{r:e}"))
                .unwrap_or_else(|| "-".into()),
            a.icp_iterations,
            record.unmatched_poses
        );
    }
    if let Some(dir) = out {
        pipeline::write_reports(std::slice::from_ref(&record), dir)?;
    }
    Ok(record.status == RunStatus::Ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => run(&config),
        Command::Score {
            gt,
            recon,
            gt_poses,
            est_poses,
            frames,
            res,
            bg,
            seed,
            out,
        } => score(
            &gt,
            &recon,
            &gt_poses,
            &est_poses,
            frames,
            res,
            bg,
            seed,
            out.as_deref(),
        ),
        Command::Poses {
            model,
            count,
            seed,
            fov,
            out,
        } => (|| {
            let mesh = load_model(&model_source(&model)).map_err(anyhow::Error::msg)?;
            let spec = CameraRigSpec {
                count,
                vertical_fov_deg: fov,
                seed,
            };
            let text = write_pose_file(&generate_rig(&mesh, &spec)?);
            match out {
                Some(path) => {
                    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?
                }
                None => std::io::Write::write_all(&mut std::io::stdout(), &text)?,
            }
            Ok(true)
        })(),
        Command::Render {
            model,
            poses,
            out,
            res,
            bg,
        } => (|| {
            let mesh = load_model(&model_source(&model)).map_err(anyhow::Error::msg)?;
            let poses = read_poses(&poses)?;
            let fov = poses
                .iter()
                .next()
                .map_or(DEFAULT_VERTICAL_FOV_DEG, |p| p.vertical_fov_deg);
            let intr = CameraIntrinsics::from_resolution(res, fov)?;
            let settings = RenderSettings {
                background: bg,
                ..Default::default()
            };
            let frames = render_rig(&mesh, &poses, &intr, &settings)?;
            let written = write_frames(&frames, &out)?;
            println!("wrote {} frames to {}", written.len(), out.display());
            Ok(true)
        })(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
