use super::MetricsError;
use crate::mesh_io::{RasterImage, Rgb};

pub const DEFAULT_WINDOW: usize = 11;
pub const C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
pub const C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

/// Per-pixel SSIM over the region where the full window fits.
#[derive(Debug, Clone, PartialEq)]
pub struct SsimMap {
    pub width: usize,
    pub height: usize,
    /// Row-major, `width * height` values.
    pub values: Vec<f64>,
}

impl SsimMap {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

pub(crate) fn check_inputs(
    a: &RasterImage,
    b: &RasterImage,
    window: usize,
) -> Result<(), MetricsError> {
    if window < 3 || window.is_multiple_of(2) {
        return Err(MetricsError::BadWindow(window));
    }
    if a.width() != b.width() || a.height() != b.height() {
        return Err(MetricsError::DimensionMismatch {
            a: (a.width(), a.height()),
            b: (b.width(), b.height()),
        });
    }
    if a.width() < window || a.height() < window {
        return Err(MetricsError::TooSmall {
            width: a.width(),
            height: a.height(),
            window,
        });
    }
    Ok(())
}

/// Per-channel window sums: a, b, a², b², ab.
#[derive(Clone, Copy, Default)]
struct Sums {
    a: i64,
    b: i64,
    aa: i64,
    bb: i64,
    ab: i64,
}

impl Sums {
    fn add(&mut self, x: i64, y: i64) {
        self.a += x;
        self.b += y;
        self.aa += x * x;
        self.bb += y * y;
        self.ab += x * y;
    }

    fn sub(&mut self, x: i64, y: i64) {
        self.a -= x;
        self.b -= y;
        self.aa -= x * x;
        self.bb -= y * y;
        self.ab -= x * y;
    }

    fn add_sums(&mut self, o: &Sums) {
        self.a += o.a;
        self.b += o.b;
        self.aa += o.aa;
        self.bb += o.bb;
        self.ab += o.ab;
    }

    fn sub_sums(&mut self, o: &Sums) {
        self.a -= o.a;
        self.b -= o.b;
        self.aa -= o.aa;
        self.bb -= o.bb;
        self.ab -= o.ab;
    }

    /// SSIM of one window with `n` pixels, using the unbiased (n − 1)
    /// variance and covariance. All intermediate integers are exact in f64,
    /// so the result is symmetric in a and b and exactly 1 for equal windows.
    fn ssim(&self, n: i64) -> f64 {
        let nn = (n * n) as f64;
        let norm = (n * (n - 1)) as f64;
        let mu_ab = (self.a * self.b) as f64 / nn;
        let mu_aa = (self.a * self.a) as f64 / nn;
        let mu_bb = (self.b * self.b) as f64 / nn;
        let var_a = (n * self.aa - self.a * self.a) as f64 / norm;
        let var_b = (n * self.bb - self.b * self.b) as f64 / norm;
        let cov = (n * self.ab - self.a * self.b) as f64 / norm;
        ((2.0 * mu_ab + C1) * (2.0 * cov + C2)) / ((mu_aa + mu_bb + C1) * (var_a + var_b + C2))
    }
}

fn channel(p: &Rgb, c: usize) -> i64 {
    i64::from(p[c])
}

/// Streams the SSIM map one output row at a time, top to bottom.
pub(crate) fn for_each_row(
    a: &RasterImage,
    b: &RasterImage,
    window: usize,
    mut visit: impl FnMut(usize, &[f64]),
) -> Result<(), MetricsError> {
    check_inputs(a, b, window)?;
    let (w, h) = (a.width(), a.height());
    let (out_w, out_h) = (w - window + 1, h - window + 1);
    let n = (window * window) as i64;
    let (pa, pb) = (a.pixels(), b.pixels());

    // column sums over the current band of `window` rows, per channel
    let mut columns = vec![[Sums::default(); 3]; w];
    for y in 0..window {
        for (x, col) in columns.iter_mut().enumerate() {
            let (p, q) = (&pa[y * w + x], &pb[y * w + x]);
            for (c, sums) in col.iter_mut().enumerate() {
                sums.add(channel(p, c), channel(q, c));
            }
        }
    }
    let mut row = vec![0.0; out_w];
    for oy in 0..out_h {
        if oy > 0 {
            let (gone, new) = (oy - 1, oy + window - 1);
            for (x, col) in columns.iter_mut().enumerate() {
                let (p, q) = (&pa[gone * w + x], &pb[gone * w + x]);
                let (r, s) = (&pa[new * w + x], &pb[new * w + x]);
                for (c, sums) in col.iter_mut().enumerate() {
                    sums.sub(channel(p, c), channel(q, c));
                    sums.add(channel(r, c), channel(s, c));
                }
            }
        }
        let mut win = [Sums::default(); 3];
        for col in &columns[..window] {
            for c in 0..3 {
                win[c].add_sums(&col[c]);
            }
        }
        for ox in 0..out_w {
            if ox > 0 {
                for c in 0..3 {
                    win[c].sub_sums(&columns[ox - 1][c]);
                    win[c].add_sums(&columns[ox + window - 1][c]);
                }
            }
            row[ox] = (win[0].ssim(n) + win[1].ssim(n) + win[2].ssim(n)) / 3.0;
        }
        visit(oy, &row);
    }
    Ok(())
}

/// Per-pixel SSIM with a uniform `window × window` window, averaged over the
/// RGB channels. The map covers only positions where the whole window fits,
/// so it is `window − 1` smaller than the inputs in each axis.
pub fn ssim_map(a: &RasterImage, b: &RasterImage, window: usize) -> Result<SsimMap, MetricsError> {
    check_inputs(a, b, window)?;
    let (width, height) = (a.width() - window + 1, a.height() - window + 1);
    let mut values = Vec::with_capacity(width * height);
    for_each_row(a, b, window, |_, row| values.extend_from_slice(row))?;
    Ok(SsimMap {
        width,
        height,
        values,
    })
}

/// Unmasked mean of the SSIM map.
pub fn mean_ssim(a: &RasterImage, b: &RasterImage, window: usize) -> Result<f64, MetricsError> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for_each_row(a, b, window, |_, row| {
        sum += row.iter().sum::<f64>();
        count += row.len();
    })?;
    Ok(sum / count as f64)
}
