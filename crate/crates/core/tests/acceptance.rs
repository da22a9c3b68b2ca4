//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report is always
//! printed. The process fails if any criterion fails, except those listed in
//! `KNOWN_FAILURES`, which are still reported as FAIL.

mod common;

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use nalgebra::{Point3, UnitQuaternion, Vector3};
use rand::Rng;

use twinbench_core::alignment::{
    icp_refine, paired_rms, rough_align, IcpParams, SimilarityTransform,
};
use twinbench_core::geometry::{build_rig, camera_radius, welzl_ses, CameraRigSpec};
use twinbench_core::mesh_io::{export_mesh, write_pose_file};
use twinbench_core::metrics::{mean_ssim, ssim_map, weighted_ssim};
use twinbench_core::pipeline::{
    run_batch, run_model, ExperimentConfig, ImportSource, ModelSource, Reconstruction, RunStatus,
    TIMING_COLUMNS,
};
use twinbench_core::render::{project, CameraIntrinsics, Projection, Resolution};
use twinbench_core::{samples, CameraPose, PoseSet, RasterImage};

/// Rig containment cannot hold for R_CAM = R_SES / tan(vfov/2): a sphere of
/// radius R seen from distance R / tan(θ) subtends a half-angle of
/// asin(tan θ) > θ, so surface points near the tangent cone project past
/// the top or bottom image edge.
const KNOWN_FAILURES: [u32; 1] = [3];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, budget_s: f64) -> bool {
    elapsed.as_secs_f64() < budget_s
}

// 1. SES oracle equivalence
fn ses_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(0xC1);
    let mut worst = 0.0f64;
    let mut uncontained = 0;
    for _ in 0..200 {
        let n = rng.random_range(1..=12);
        let pts = common::random_points(&mut rng, n);
        let s = welzl_ses(&pts).unwrap();
        let (_, r) = common::brute_force_ses(&pts);
        worst = worst.max((s.radius - r).abs());
        uncontained += pts
            .iter()
            .filter(|p| (*p - s.center).norm() > s.radius + 1e-9)
            .count();
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-9 && uncontained == 0 && within(elapsed, 2.0),
        format!("max |r - r_oracle| = {worst:.2e}, uncontained points = {uncontained}, {elapsed:.2?} (< 2 s)"),
    )
}

// 2. Camera-radius formula
fn camera_radius_formula() -> Outcome {
    let at_90 = camera_radius(1.0, 90.0).unwrap();
    let at_23 = camera_radius(1.0, 23.0).unwrap();
    let expected = 1.0 / 11.5f64.to_radians().tan();
    let rel = ((at_23 - expected) / expected).abs();
    outcome(
        at_90 == 1.0 && rel < 5e-7,
        format!("R_CAM(90°) = {at_90:?}, R_CAM(23°) = {at_23:.6} vs 1/tan(11.5°) = {expected:.6} (rel {rel:.1e})"),
    )
}

// 3. Rig frustum containment
fn rig_containment() -> Outcome {
    let start = Instant::now();
    let intr = CameraIntrinsics::from_resolution(Resolution::P1440, 23.0).unwrap();
    let (w, h) = (intr.width() as f64, intr.height() as f64);
    let meshes = [
        samples::unit_cube(),
        samples::blob(1),
        samples::by_name("cylinder").unwrap(),
    ];
    let mut all_inside = true;
    let mut parts = Vec::new();
    for mesh in &meshes {
        let rig = build_rig(mesh, &CameraRigSpec::default()).unwrap();
        let mut bad_poses = 0;
        let mut overflow = 0.0f64;
        for pose in rig.poses.iter() {
            let mut pose_ok = true;
            for v in &mesh.vertices {
                match project(v, pose, &intr) {
                    Projection::Visible { x, y, .. } => {
                        let out = [-x, x - w, -y, y - h].into_iter().fold(0.0f64, f64::max);
                        if out > 0.0 {
                            pose_ok = false;
                            overflow = overflow.max(out);
                        }
                    }
                    Projection::Behind => {
                        pose_ok = false;
                        overflow = f64::INFINITY;
                    }
                }
            }
            bad_poses += usize::from(!pose_ok);
        }
        all_inside &= bad_poses == 0;
        parts.push(format!(
            "{} ({} tris): {bad_poses}/100 poses with vertices outside, max overflow {overflow:.1} px",
            mesh.name,
            mesh.triangles.len()
        ));
    }
    let elapsed = start.elapsed();
    outcome(
        all_inside && within(elapsed, 5.0),
        format!("{}; {elapsed:.2?} (< 5 s)", parts.join("; ")),
    )
}

fn random_rotation(rng: &mut impl Rng) -> UnitQuaternion<f64> {
    loop {
        let q = nalgebra::Quaternion::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = q.norm();
        if n > 1e-3 && n <= 1.0 {
            return UnitQuaternion::from_quaternion(q);
        }
    }
}

fn map_poses(poses: &PoseSet, t: &SimilarityTransform) -> PoseSet {
    poses
        .iter()
        .map(|p| CameraPose {
            position: t.apply(&p.position),
            rotation: t.rotation() * p.rotation,
            ..*p
        })
        .collect()
}

// 4. Rough-alignment recovery
fn rough_alignment_recovery() -> Outcome {
    let start = Instant::now();
    let gt = build_rig(&samples::unit_cube(), &CameraRigSpec::default())
        .unwrap()
        .poses;
    let c = gt.centroid().unwrap();
    let radius = gt
        .iter()
        .map(|p| (p.position - c).norm())
        .fold(0.0, f64::max);
    let mut rng = common::rng(0xC4);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let s = 10f64.powf(rng.random_range(-1.0..=1.0));
        let dir = common::random_axis(&mut rng);
        let t = dir * rng.random_range(0.0..=10.0 * radius);
        let forward =
            SimilarityTransform::from_scale_rotation_translation(s, random_rotation(&mut rng), t);
        let est = map_poses(&gt, &forward);
        let recovered = rough_align(&est, &gt).unwrap();
        let mapped: Vec<_> = est.iter().map(|p| recovered.apply(&p.position)).collect();
        worst = worst.max(paired_rms(&mapped, &gt.positions()) / radius);
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-9 && within(elapsed, 1.0),
        format!("max RMS / radius = {worst:.2e} over 100 trials, {elapsed:.2?} (< 1 s)"),
    )
}

/// 2000 points spread through an anisotropic ellipsoid.
fn icp_cloud() -> Vec<Point3<f64>> {
    let mut rng = common::rng(0xC5C5);
    let mut pts = Vec::with_capacity(2000);
    while pts.len() < 2000 {
        let p = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if p.norm() <= 1.0 {
            pts.push(Point3::new(p.x, 0.7 * p.y, 0.45 * p.z));
        }
    }
    pts
}

// 5. ICP recovery
fn icp_recovery() -> Outcome {
    let start = Instant::now();
    let fixed = icp_cloud();
    let radius = welzl_ses(&fixed).unwrap().radius;
    let mut rng = common::rng(0xC5);
    let mut worst = 0.0f64;
    let mut non_monotone = 0;
    for _ in 0..100 {
        let angle = rng.random_range(0.0..=10f64.to_radians());
        let rot = UnitQuaternion::from_scaled_axis(common::random_axis(&mut rng) * angle);
        let shift = common::random_axis(&mut rng) * rng.random_range(0.0..=0.05 * radius);
        let perturb = SimilarityTransform::rigid(rot, shift);
        let moving: Vec<_> = fixed.iter().map(|p| perturb.apply(p)).collect();
        let res = icp_refine(&moving, &fixed, &IcpParams::default()).unwrap();
        let aligned: Vec<_> = moving.iter().map(|p| res.transform.apply(p)).collect();
        worst = worst.max(paired_rms(&aligned, &fixed) / radius);
        if res.rms_history.windows(2).any(|w| w[1] > w[0]) {
            non_monotone += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-3 && non_monotone == 0 && within(elapsed, 30.0),
        format!(
            "max vertex RMS / radius = {worst:.2e}, non-monotone trials = {non_monotone}, {elapsed:.2?} (< 30 s)"
        ),
    )
}

// 6. SSIM oracle equivalence
fn ssim_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(0xC6);
    let mut worst = 0.0f64;
    let mut asymmetric = 0;
    let mut not_identity = 0;
    for _ in 0..50 {
        let a = common::random_image(&mut rng, 64, 64);
        let b = common::random_image(&mut rng, 64, 64);
        let map = ssim_map(&a, &b, 11).unwrap();
        for y in 0..map.height {
            for x in 0..map.width {
                worst =
                    worst.max((map.get(x, y) - common::brute_force_ssim(&a, &b, 11, x, y)).abs());
            }
        }
        if ssim_map(&b, &a, 11).unwrap() != map {
            asymmetric += 1;
        }
        if ssim_map(&a, &a, 11)
            .unwrap()
            .values
            .iter()
            .any(|&v| v != 1.0)
        {
            not_identity += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-9 && asymmetric == 0 && not_identity == 0 && within(elapsed, 10.0),
        format!(
            "max |sliding - brute| = {worst:.2e}, asymmetric = {asymmetric}, identity misses = {not_identity}, {elapsed:.2?} (< 10 s)"
        ),
    )
}

// 7. Background-mask effect
fn mask_effect() -> Outcome {
    let bg = [255, 255, 255];
    let mut a = RasterImage::filled(128, 128, bg);
    let mut rng = common::rng(0xC7);
    for y in 48..80 {
        for x in 48..80 {
            a.set(x, y, [180, 60 + (x as u8 % 8) * 10, 40]);
        }
    }
    let mut b = a.clone();
    for y in 48..80 {
        for x in 48..80 {
            b.set(x, y, [rng.random(), rng.random(), rng.random()]);
        }
    }
    let weighted = weighted_ssim(&a, &b, bg, 11).unwrap();
    let unweighted = mean_ssim(&a, &b, 11).unwrap();
    outcome(
        weighted < unweighted,
        format!("weighted {weighted:.4} < unweighted {unweighted:.4}"),
    )
}

fn cube_config(dir: &Path, resolution: Resolution) -> ExperimentConfig {
    ExperimentConfig {
        models: vec![ModelSource::Builtin("unit_cube".into())],
        frame_counts: vec![100],
        resolutions: vec![resolution],
        output_dir: dir.to_path_buf(),
        ..Default::default()
    }
}

// 8. End-to-end self-identity
fn self_identity() -> Outcome {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let cfg = cube_config(tmp.path(), Resolution::P1440);
    let record = run_model(&cfg, 0, &cfg.variants()[0]);
    let elapsed = start.elapsed();
    let score = record.global_score().unwrap_or(f64::NAN);
    outcome(
        record.status == RunStatus::Ok && (score - 1.0).abs() <= 1e-12 && within(elapsed, 180.0),
        format!(
            "unit cube, 2560x1440, 100 frames: status {}, global SSIM {score:?}, {elapsed:.2?} (< 180 s)",
            record.status.as_str()
        ),
    )
}

const LADDER_RESOLUTION: Resolution = Resolution::new(640, 360);

fn ladder_batch(dir: &Path) -> Vec<Option<f64>> {
    let mut cfg = cube_config(dir, LADDER_RESOLUTION);
    cfg.vertex_noises = vec![0.0, 0.01, 0.05];
    cfg.seed = 7;
    run_batch(&cfg)
        .unwrap()
        .records
        .iter()
        .map(|r| r.global_score())
        .collect()
}

// 9. Degradation monotonicity
fn degradation_monotonicity() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let scores = ladder_batch(tmp.path());
    let pass = scores.iter().all(Option::is_some)
        && scores
            .windows(2)
            .all(|w| w[1].unwrap_or(f64::NAN) < w[0].unwrap_or(f64::NAN));
    outcome(
        pass,
        format!("unit cube at {LADDER_RESOLUTION}, noise 0 / 0.01 / 0.05 of R_SES: {scores:?}"),
    )
}

// 10. External-tool results
fn external_results() -> Outcome {
    outcome(
        true,
        "informational: external-tool success rate, dataset SSIM distribution and sweep values \
         need the external reconstruction tools and dataset; use reconstruction = import to score them",
    )
}

// 11. Import loopback
fn import_loopback() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let cube = samples::unit_cube();
    let mut cfg = cube_config(&tmp.path().join("out"), LADDER_RESOLUTION);
    let rig = build_rig(&cube, &CameraRigSpec::default()).unwrap();
    let export_dir = tmp.path().join("export");
    let mesh_path = export_mesh(&cube, &export_dir, "cube").unwrap();
    let pose_path = export_dir.join("poses.txt");
    fs::write(&pose_path, write_pose_file(&rig.poses)).unwrap();
    cfg.models = vec![ModelSource::File(mesh_path.clone())];
    cfg.reconstruction = Reconstruction::Import(vec![ImportSource {
        mesh: mesh_path,
        poses: pose_path,
    }]);
    let record = run_model(&cfg, 0, &cfg.variants()[0]);
    let rough = record.alignment.as_ref().map_or(f64::NAN, |a| a.rough_rms);
    let score = record.global_score().unwrap_or(f64::NAN);
    outcome(
        record.status == RunStatus::Ok && rough < 1e-9 && (score - 1.0).abs() <= 1e-12,
        format!(
            "status {}, rough RMS {rough:.2e}, global SSIM {score:?} at {LADDER_RESOLUTION}",
            record.status.as_str()
        ),
    )
}

fn strip_timings(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            fields[..fields.len() - TIMING_COLUMNS.len()].join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

// 12. Determinism
fn determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    ladder_batch(a.path());
    ladder_batch(b.path());
    let read = |d: &Path| fs::read_to_string(d.join("report.csv")).unwrap();
    let (ra, rb) = (read(a.path()), read(b.path()));
    let same = strip_timings(&ra) == strip_timings(&rb);
    let frames_same = fs::read(a.path().join("frames.csv")).unwrap()
        == fs::read(b.path().join("frames.csv")).unwrap();
    outcome(
        same && frames_same,
        format!(
            "report.csv without timing columns identical: {same}; frames.csv identical: {frames_same}"
        ),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        (1, "SES oracle equivalence", ses_oracle),
        (2, "camera-radius formula", camera_radius_formula),
        (3, "rig frustum containment", rig_containment),
        (4, "rough-alignment recovery", rough_alignment_recovery),
        (5, "ICP recovery", icp_recovery),
        (6, "SSIM oracle equivalence", ssim_oracle),
        (7, "background-mask effect", mask_effect),
        (8, "end-to-end self-identity", self_identity),
        (9, "degradation monotonicity", degradation_monotonicity),
        (10, "external-tool results (no assertion)", external_results),
        (11, "import loopback", import_loopback),
        (12, "determinism", determinism),
    ];
    let filter: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut unexpected = Vec::new();
    println!();
    for (id, name, check) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let known = KNOWN_FAILURES.contains(&id);
        let tag = match (result.pass, id == 10) {
            (_, true) => "INFO",
            (true, _) => "PASS",
            (false, _) => "FAIL",
        };
        let note = if !result.pass && known {
            " [known failure]"
        } else {
            ""
        };
        println!(
            "criterion {id:>2} {tag}{note} {name}: {} [{:.2?}]",
            result.detail,
            start.elapsed()
        );
        if !result.pass && !known {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: no unexpected failures");
    } else {
        println!("acceptance: unexpected failures in criteria {unexpected:?}");
        std::process::exit(1);
    }
}
