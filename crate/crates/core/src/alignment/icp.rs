use std::collections::HashMap;

use nalgebra::{Point3, UnitQuaternion, Vector3};
use rand::seq::index;
use rayon::prelude::*;

use super::kabsch::kabsch;
use super::transform::SimilarityTransform;
use super::AlignmentError;
use crate::geometry::welzl_ses;
use crate::rng::{self, Stream};

/// ICP settings. Distances are fractions of the static cloud's smallest
/// enclosing sphere radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcpParams {
    pub max_iterations: usize,
    /// Stop once an iteration lowers the RMS by less than this.
    pub convergence_tol: f64,
    /// Correspondence gate.
    pub max_correspondence_distance: f64,
    /// Moving points used per iteration; larger clouds are subsampled.
    pub sample_size: usize,
    pub seed: u64,
}

impl Default for IcpParams {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            convergence_tol: 1e-6,
            max_correspondence_distance: 0.1,
            sample_size: 5000,
            seed: 0,
        }
    }
}

impl IcpParams {
    pub fn validate(&self) -> Result<(), AlignmentError> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if self.max_iterations == 0
            || self.sample_size == 0
            || !positive(self.convergence_tol)
            || !positive(self.max_correspondence_distance)
        {
            return Err(AlignmentError::InvalidParams);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcpResult {
    /// Rigid map taking the moving cloud onto the static one.
    pub transform: SimilarityTransform,
    /// RMS over the accepted correspondences after the last accepted step.
    pub rms: f64,
    pub iterations: usize,
    /// RMS before the first step, then after each accepted step.
    pub rms_history: Vec<f64>,
    /// Absolute gate used, in static-cloud units.
    pub gate: f64,
}

/// Uniform grid with cell size equal to the query radius, so any neighbour
/// within the radius lies in one of the 27 surrounding cells.
struct GridIndex<'a> {
    points: &'a [Point3<f64>],
    cell: f64,
    cells: HashMap<[i64; 3], Vec<u32>>,
}

impl<'a> GridIndex<'a> {
    fn new(points: &'a [Point3<f64>], cell: f64) -> Self {
        let mut cells: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key(cell, p)).or_default().push(i as u32);
        }
        Self {
            points,
            cell,
            cells,
        }
    }

    fn key(cell: f64, p: &Point3<f64>) -> [i64; 3] {
        [0, 1, 2].map(|k| (p[k] / cell).floor() as i64)
    }

    /// Nearest point within `cell` of `q`, as (index, squared distance).
    /// Ties go to the lower index.
    fn nearest(&self, q: &Point3<f64>) -> Option<(usize, f64)> {
        let [x, y, z] = Self::key(self.cell, q);
        let limit = self.cell * self.cell;
        let mut best: Option<(usize, f64)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(bucket) = self.cells.get(&[x + dx, y + dy, z + dz]) else {
                        continue;
                    };
                    for &i in bucket {
                        let i = i as usize;
                        let d = (self.points[i] - q).norm_squared();
                        if d > limit {
                            continue;
                        }
                        match best {
                            Some((j, bd)) if bd < d || (bd == d && j < i) => {}
                            _ => best = Some((i, d)),
                        }
                    }
                }
            }
        }
        best
    }
}

struct Matches {
    moving: Vec<Point3<f64>>,
    fixed: Vec<Point3<f64>>,
    rms: f64,
}

fn correspond(index: &GridIndex<'_>, moving: &[Point3<f64>]) -> Option<Matches> {
    let found: Vec<(Point3<f64>, usize, f64)> = moving
        .par_iter()
        .filter_map(|q| index.nearest(q).map(|(i, d)| (*q, i, d)))
        .collect();
    if found.is_empty() {
        return None;
    }
    let rms = (found.iter().map(|m| m.2).sum::<f64>() / found.len() as f64).sqrt();
    Some(Matches {
        moving: found.iter().map(|m| m.0).collect(),
        fixed: found.iter().map(|m| index.points[m.1]).collect(),
        rms,
    })
}

fn centroid(points: &[Point3<f64>]) -> Point3<f64> {
    Point3::from(points.iter().fold(Vector3::zeros(), |s, p| s + p.coords) / points.len() as f64)
}

fn rigid_step(m: &Matches) -> Result<(UnitQuaternion<f64>, Vector3<f64>), AlignmentError> {
    let cm = centroid(&m.moving);
    let cf = centroid(&m.fixed);
    let a: Vec<_> = m.moving.iter().map(|p| p - cm).collect();
    let b: Vec<_> = m.fixed.iter().map(|p| p - cf).collect();
    let r = kabsch(&a, &b)?;
    Ok((r, cf.coords - r * cm.coords))
}

/// Point-to-point ICP moving `moving` onto `fixed` with a rigid transform.
///
/// Each iteration matches every (sampled) moving point to its exact nearest
/// fixed point within the gate, solves Kabsch on the pairs and applies the
/// step. A step that would raise the correspondence RMS is rejected and ends
/// the loop, so `rms_history` never increases.
pub fn icp_refine(
    moving: &[Point3<f64>],
    fixed: &[Point3<f64>],
    params: &IcpParams,
) -> Result<IcpResult, AlignmentError> {
    params.validate()?;
    for cloud in [moving, fixed] {
        if cloud.len() < 3 {
            return Err(AlignmentError::TooFewPoints(cloud.len()));
        }
    }
    let radius = welzl_ses(fixed)
        .map_err(|_| AlignmentError::NonFinite)?
        .radius;
    if !(radius > 0.0) {
        return Err(AlignmentError::Degenerate);
    }
    let gate = params.max_correspondence_distance * radius;
    let tol = params.convergence_tol * radius;

    let mut current: Vec<Point3<f64>> = if moving.len() > params.sample_size {
        let mut rng = rng::stream(params.seed, Stream::IcpSample);
        let mut picked = index::sample(&mut rng, moving.len(), params.sample_size).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|i| moving[i]).collect()
    } else {
        moving.to_vec()
    };

    let index = GridIndex::new(fixed, gate);
    let mut matches = correspond(&index, &current).ok_or(AlignmentError::TooFarApart)?;
    let mut total = SimilarityTransform::identity();
    let mut history = vec![matches.rms];
    let mut iterations = 0;
    while iterations < params.max_iterations {
        iterations += 1;
        if matches.rms == 0.0 {
            break;
        }
        let (r, t) = rigid_step(&matches)?;
        let moved: Vec<Point3<f64>> = current.iter().map(|p| r * p + t).collect();
        let Some(next) = correspond(&index, &moved) else {
            break;
        };
        if next.rms > matches.rms {
            log::debug!(
                "icp: rejecting step raising rms {} -> {}",
                matches.rms,
                next.rms
            );
            break;
        }
        let improvement = matches.rms - next.rms;
        total = total.then(&SimilarityTransform::rigid(r, t));
        current = moved;
        history.push(next.rms);
        matches = next;
        if improvement < tol {
            break;
        }
    }
    Ok(IcpResult {
        transform: total,
        rms: matches.rms,
        iterations,
        rms_history: history,
        gate,
    })
}
