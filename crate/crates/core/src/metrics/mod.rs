//! Background-masked SSIM between paired renders.

mod ssim;

use rayon::prelude::*;
use thiserror::Error;

pub use ssim::{mean_ssim, ssim_map, SsimMap, C1, C2, DEFAULT_WINDOW};

use crate::mesh_io::{RasterImage, Rgb};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("window must be odd and at least 3, got {0}")]
    BadWindow(usize),
    #[error("image sizes differ: {a:?} vs {b:?}")]
    DimensionMismatch {
        a: (usize, usize),
        b: (usize, usize),
    },
    #[error("{width}x{height} image is smaller than the {window}x{window} window")]
    TooSmall {
        width: usize,
        height: usize,
        window: usize,
    },
    #[error("no foreground overlap: both images are entirely background")]
    NoForegroundOverlap,
    #[error("frame lists differ in length: {gt} ground truth vs {recon} reconstruction")]
    FrameCountMismatch { gt: usize, recon: usize },
    #[error("every frame failed to score")]
    AllFramesFailed,
}

/// 0/1 weights over the SSIM valid region: 0 where both images hold exactly
/// `background`, 1 elsewhere.
pub fn background_mask(
    a: &RasterImage,
    b: &RasterImage,
    background: Rgb,
    window: usize,
) -> Result<Vec<u8>, MetricsError> {
    ssim::check_inputs(a, b, window)?;
    let r = window / 2;
    let (w, h) = (a.width(), a.height());
    let mut mask = Vec::with_capacity((w - 2 * r) * (h - 2 * r));
    for y in r..h - r {
        for x in r..w - r {
            mask.push(u8::from(is_foreground(a, b, background, x, y)));
        }
    }
    Ok(mask)
}

fn is_foreground(a: &RasterImage, b: &RasterImage, background: Rgb, x: usize, y: usize) -> bool {
    a.get(x, y) != background || b.get(x, y) != background
}

/// Weighted SSIM of one image pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedScore {
    pub ssim: f64,
    /// Weight-1 pixels in the valid region.
    pub foreground_px: usize,
}

/// Mean SSIM over the pixels that are not background in both images.
pub fn weighted_ssim(
    a: &RasterImage,
    b: &RasterImage,
    background: Rgb,
    window: usize,
) -> Result<f64, MetricsError> {
    weighted_score(a, b, background, window).map(|s| s.ssim)
}

pub fn weighted_score(
    a: &RasterImage,
    b: &RasterImage,
    background: Rgb,
    window: usize,
) -> Result<WeightedScore, MetricsError> {
    let r = window / 2;
    let mut sum = 0.0;
    let mut count = 0usize;
    ssim::for_each_row(a, b, window, |oy, row| {
        for (ox, v) in row.iter().enumerate() {
            if is_foreground(a, b, background, ox + r, oy + r) {
                sum += v;
                count += 1;
            }
        }
    })?;
    if count == 0 {
        return Err(MetricsError::NoForegroundOverlap);
    }
    Ok(WeightedScore {
        ssim: sum / count as f64,
        foreground_px: count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameScore {
    pub frame: usize,
    pub ssim: f64,
    pub foreground_px: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsimReport {
    /// Scored frames in frame order.
    pub per_frame: Vec<FrameScore>,
    /// Frames with no foreground in either image.
    pub failed_frames: Vec<usize>,
    pub global_score: f64,
    pub frames_used: usize,
}

impl SsimReport {
    /// Aggregates per-frame outcomes. Frames without foreground overlap are
    /// excluded from the mean and listed in `failed_frames`; any other error
    /// is returned.
    pub fn from_frames(
        outcomes: impl IntoIterator<Item = (usize, Result<WeightedScore, MetricsError>)>,
    ) -> Result<Self, MetricsError> {
        let mut per_frame = Vec::new();
        let mut failed_frames = Vec::new();
        for (frame, outcome) in outcomes {
            match outcome {
                Ok(s) => per_frame.push(FrameScore {
                    frame,
                    ssim: s.ssim,
                    foreground_px: s.foreground_px,
                }),
                Err(MetricsError::NoForegroundOverlap) => failed_frames.push(frame),
                Err(e) => return Err(e),
            }
        }
        if per_frame.is_empty() {
            return Err(MetricsError::AllFramesFailed);
        }
        let global_score = per_frame.iter().map(|f| f.ssim).sum::<f64>() / per_frame.len() as f64;
        Ok(Self {
            frames_used: per_frame.len(),
            per_frame,
            failed_frames,
            global_score,
        })
    }
}

/// Scores order-paired frame lists; frames are scored in parallel.
pub fn score_model(
    gt_frames: &[RasterImage],
    recon_frames: &[RasterImage],
    background: Rgb,
) -> Result<SsimReport, MetricsError> {
    if gt_frames.len() != recon_frames.len() {
        return Err(MetricsError::FrameCountMismatch {
            gt: gt_frames.len(),
            recon: recon_frames.len(),
        });
    }
    let outcomes: Vec<_> = gt_frames
        .par_iter()
        .zip(recon_frames)
        .enumerate()
        .map(|(i, (a, b))| (i, weighted_score(a, b, background, DEFAULT_WINDOW)))
        .collect();
    SsimReport::from_frames(outcomes)
}
