use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{PipelineError, RunRecord};

pub const HISTOGRAM_BIN_WIDTH: f64 = 0.05;
pub const HISTOGRAM_BINS: usize = 40;

/// Trailing columns of `report.csv` that hold wall-clock timings; everything
/// before them is deterministic for a fixed config and seed.
pub const TIMING_COLUMNS: [&str; 7] = [
    "load_s",
    "rig_s",
    "reconstruct_s",
    "align_s",
    "render_s",
    "score_s",
    "total_s",
];

const REPORT_COLUMNS: [&str; 14] = [
    "model",
    "frame_count",
    "resolution",
    "vertex_noise",
    "status",
    "global_ssim",
    "frames_used",
    "frames_failed",
    "rough_rms",
    "icp_rms",
    "icp_iterations",
    "icp_failed",
    "unmatched_poses",
    "error",
];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> PipelineError + '_ {
    move |e| PipelineError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn secs(d: std::time::Duration) -> String {
    format!("{:.6}", d.as_secs_f64())
}

/// Bin index of an SSIM value; the last bin is closed at 1.
pub fn histogram_bin(value: f64) -> usize {
    let i = ((value + 1.0) * (HISTOGRAM_BINS as f64 / 2.0)).floor();
    (i.max(0.0) as usize).min(HISTOGRAM_BINS - 1)
}

/// Counts per 0.05-wide bin over `[-1, 1]`.
pub fn ssim_histogram(values: impl IntoIterator<Item = f64>) -> Vec<usize> {
    let mut bins = vec![0; HISTOGRAM_BINS];
    for v in values {
        bins[histogram_bin(v)] += 1;
    }
    bins
}

fn bin_start(i: usize) -> f64 {
    -1.0 + i as f64 * HISTOGRAM_BIN_WIDTH
}

fn svg_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Bar chart of the SSIM histogram.
pub fn histogram_svg(bins: &[usize]) -> String {
    let (w, h, margin) = (820.0, 400.0, 50.0);
    let plot_w = w - 2.0 * margin;
    let plot_h = h - 2.0 * margin;
    let max = bins.iter().copied().max().unwrap_or(0).max(1) as f64;
    let bar_w = plot_w / bins.len() as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">Distribution of weighted SSIM</text>"#,
        w / 2.0
    );
    for (i, &count) in bins.iter().enumerate() {
        let bh = plot_h * count as f64 / max;
        let x = margin + i as f64 * bar_w;
        let y = h - margin - bh;
        let _ = writeln!(
            s,
            r##"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{bh:.2}" fill="#4c72b0"><title>[{:.2}, {:.2}): {count}</title></rect>"##,
            bar_w - 1.0,
            bin_start(i),
            bin_start(i + 1),
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{margin}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#,
        h - margin,
        w - margin
    );
    for k in 0..=8 {
        let v = -1.0 + 0.25 * k as f64;
        let x = margin + plot_w * k as f64 / 8.0;
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{v:.2}</text>"#,
            h - margin + 15.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" transform="rotate(-90 15 {:.2})" text-anchor="middle">models (max {})</text>"#,
        h / 2.0,
        h / 2.0,
        max as usize
    );
    s.push_str("</svg>\n");
    s
}

/// Grouped bars: one group per model, one bar per sweep variant.
pub fn sweep_svg(models: &[String], variants: &[String], scores: &[Vec<Option<f64>>]) -> String {
    const COLORS: [&str; 6] = [
        "#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860",
    ];
    let (margin, plot_h) = (50.0, 300.0);
    let bar_w = 18.0;
    let group_w = bar_w * variants.len().max(1) as f64 + 20.0;
    let w = 2.0 * margin + group_w * models.len().max(1) as f64 + 160.0;
    let h = plot_h + 2.0 * margin + 40.0;
    let base = margin + plot_h;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{w:.0}" height="{h:.0}" fill="white"/>"#);
    // y axis spans SSIM 0..1; negative scores are drawn as empty bars
    for k in 0..=4 {
        let v = k as f64 * 0.25;
        let y = base - plot_h * v;
        let _ = writeln!(
            s,
            r##"<line x1="{margin}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.2}</text>"##,
            w - 160.0,
            margin - 5.0,
            y + 4.0
        );
    }
    for (m, model) in models.iter().enumerate() {
        let gx = margin + 10.0 + m as f64 * group_w;
        for (v, score) in scores[m].iter().enumerate() {
            let Some(score) = score else { continue };
            let bh = plot_h * score.clamp(0.0, 1.0);
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{bh:.2}" fill="{}"><title>{} {}: {score:.4}</title></rect>"#,
                gx + v as f64 * bar_w,
                base - bh,
                bar_w - 2.0,
                COLORS[v % COLORS.len()],
                svg_escape(model),
                svg_escape(&variants[v]),
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            gx + bar_w * variants.len() as f64 / 2.0,
            base + 15.0,
            svg_escape(model)
        );
    }
    for (v, label) in variants.iter().enumerate() {
        let y = margin + 16.0 * v as f64;
        let x = w - 150.0;
        let _ = writeln!(
            s,
            r#"<rect x="{x:.2}" y="{:.2}" width="10" height="10" fill="{}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            y - 9.0,
            COLORS[v % COLORS.len()],
            x + 14.0,
            y,
            svg_escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

pub(crate) fn variant_label(r: &RunRecord) -> String {
    format!(
        "{} frames, {}, noise {}",
        r.variant.frame_count, r.variant.resolution, r.variant.vertex_noise
    )
}

/// `report.csv`: one row per run.
pub fn write_report_csv(records: &[RunRecord], path: &Path) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(REPORT_COLUMNS.iter().chain(&TIMING_COLUMNS))
        .map_err(csv_err(path))?;
    for r in records {
        let align = r.alignment.as_ref();
        let ssim = r.ssim.as_ref();
        let t = &r.timings;
        w.write_record([
            r.model.clone(),
            r.variant.frame_count.to_string(),
            r.variant.resolution.to_string(),
            r.variant.vertex_noise.to_string(),
            r.status.as_str().to_string(),
            opt(ssim.map(|s| s.global_score)),
            opt(ssim.map(|s| s.frames_used)),
            opt(ssim.map(|s| s.failed_frames.len())),
            opt(align.map(|a| a.rough_rms)),
            opt(align.and_then(|a| a.icp_rms)),
            opt(align.map(|a| a.icp_iterations)),
            opt(align.map(|a| a.icp_failed)),
            r.unmatched_poses.to_string(),
            r.error.clone().unwrap_or_default(),
            secs(t.load),
            secs(t.rig),
            secs(t.reconstruct),
            secs(t.align),
            secs(t.render),
            secs(t.score),
            secs(t.total),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// `frames.csv`: one row per scored or failed frame.
pub fn write_frames_csv(records: &[RunRecord], path: &Path) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record([
        "model",
        "frame_count",
        "resolution",
        "vertex_noise",
        "frame_index",
        "weighted_ssim",
        "foreground_px",
        "flags",
    ])
    .map_err(csv_err(path))?;
    for r in records {
        let Some(ssim) = &r.ssim else { continue };
        let prefix = [
            r.model.clone(),
            r.variant.frame_count.to_string(),
            r.variant.resolution.to_string(),
            r.variant.vertex_noise.to_string(),
        ];
        let mut rows: Vec<(usize, [String; 4])> = ssim
            .per_frame
            .iter()
            .map(|f| {
                (
                    f.frame,
                    [
                        f.frame.to_string(),
                        f.ssim.to_string(),
                        f.foreground_px.to_string(),
                        String::new(),
                    ],
                )
            })
            .chain(ssim.failed_frames.iter().map(|&f| {
                (
                    f,
                    [
                        f.to_string(),
                        String::new(),
                        "0".into(),
                        "no_foreground".into(),
                    ],
                )
            }))
            .collect();
        rows.sort_by_key(|r| r.0);
        for (_, row) in rows {
            w.write_record(prefix.iter().chain(&row))
                .map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

/// Files written by [`write_reports`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub report_csv: PathBuf,
    pub frames_csv: PathBuf,
    pub histogram_csv: PathBuf,
    pub histogram_svg: PathBuf,
    pub sweep_csv: PathBuf,
    pub sweep_svg: PathBuf,
}

/// Writes every batch-level report under `dir`.
pub fn write_reports(records: &[RunRecord], dir: &Path) -> Result<ReportFiles, PipelineError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let files = ReportFiles {
        report_csv: dir.join("report.csv"),
        frames_csv: dir.join("frames.csv"),
        histogram_csv: dir.join("histogram.csv"),
        histogram_svg: dir.join("histogram.svg"),
        sweep_csv: dir.join("sweep.csv"),
        sweep_svg: dir.join("sweep.svg"),
    };
    write_report_csv(records, &files.report_csv)?;
    write_frames_csv(records, &files.frames_csv)?;

    let bins = ssim_histogram(
        records
            .iter()
            .filter_map(|r| r.ssim.as_ref().map(|s| s.global_score)),
    );
    let path = &files.histogram_csv;
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["bin_start", "bin_end", "count"])
        .map_err(csv_err(path))?;
    for (i, count) in bins.iter().enumerate() {
        w.write_record([
            format!("{:.2}", bin_start(i)),
            format!("{:.2}", bin_start(i + 1)),
            count.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))?;
    fs::write(&files.histogram_svg, histogram_svg(&bins)).map_err(io_err(&files.histogram_svg))?;

    // grouped sweep data, in first-seen order
    let mut models: Vec<String> = Vec::new();
    let mut variants: Vec<String> = Vec::new();
    for r in records {
        if !models.contains(&r.model) {
            models.push(r.model.clone());
        }
        let label = variant_label(r);
        if !variants.contains(&label) {
            variants.push(label);
        }
    }
    let mut scores = vec![vec![None; variants.len()]; models.len()];
    let path = &files.sweep_csv;
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["model", "variant", "global_ssim"])
        .map_err(csv_err(path))?;
    for r in records {
        let m = models.iter().position(|x| *x == r.model).unwrap_or(0);
        let label = variant_label(r);
        let v = variants.iter().position(|x| *x == label).unwrap_or(0);
        let score = r.ssim.as_ref().map(|s| s.global_score);
        scores[m][v] = score;
        w.write_record([r.model.clone(), label, opt(score)])
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))?;
    fs::write(&files.sweep_svg, sweep_svg(&models, &variants, &scores))
        .map_err(io_err(&files.sweep_svg))?;
    Ok(files)
}
