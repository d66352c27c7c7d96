//! Layout evaluation metrics: global SSIM, PSNR, pixel error, corner error
//! and mean absolute percentage error.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::types::{EdgeMask, Label};

/// Single-channel image with intensities in `[0, range]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: u32,
    pub height: u32,
    pub data: Vec<f64>,
}

impl Raster {
    pub fn new(width: u32, height: u32, data: Vec<f64>) -> Result<Self> {
        if data.len() != width as usize * height as usize {
            return Err(Error::invalid("raster", "pixel count does not match dimensions"));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: u32, height: u32, value: f64) -> Self {
        Self { width, height, data: vec![value; width as usize * height as usize] }
    }

    pub fn from_gray8(img: &image::GrayImage) -> Self {
        Self { width: img.width(), height: img.height(), data: img.as_raw().iter().map(|&p| p as f64).collect() }
    }

    /// Edge pixels at 255, everything else 0.
    pub fn from_edges(mask: &EdgeMask) -> Self {
        let data = mask.labels.iter().map(|&l| if l == Label::Edge { 255.0 } else { 0.0 }).collect();
        Self { width: mask.width, height: mask.height, data }
    }

    fn check_same(&self, o: &Raster) -> Result<()> {
        if self.width != o.width || self.height != o.height {
            return Err(Error::DimensionMismatch {
                expected_w: self.width,
                expected_h: self.height,
                got_w: o.width,
                got_h: o.height,
            });
        }
        Ok(())
    }
}

/// Global SSIM with `c1 = (0.01 L)^2`, `c2 = (0.03 L)^2`.
pub fn ssim(x: &Raster, y: &Raster, range: f64) -> Result<f64> {
    ssim_with(x, y, (0.01 * range).powi(2), (0.03 * range).powi(2))
}

/// Global SSIM over the whole image as one window.
pub fn ssim_with(x: &Raster, y: &Raster, c1: f64, c2: f64) -> Result<f64> {
    x.check_same(y)?;
    let n = x.data.len() as f64;
    if n == 0.0 {
        return Err(Error::invalid("raster", "empty image"));
    }
    let mx = x.data.iter().sum::<f64>() / n;
    let my = y.data.iter().sum::<f64>() / n;
    let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
    for (a, b) in x.data.iter().zip(&y.data) {
        let (da, db) = (a - mx, b - my);
        vx += da * da;
        vy += db * db;
        cov += da * db;
    }
    let (vx, vy, cov) = (vx / n, vy / n, cov / n);
    Ok(((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2)))
}

/// PSNR in dB for a given mean squared error; `f64::INFINITY` when `mse` is zero.
pub fn psnr_from_mse(mse: f64, max: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        20.0 * max.log10() - 10.0 * mse.log10()
    }
}

pub fn mse(x: &Raster, y: &Raster) -> Result<f64> {
    x.check_same(y)?;
    let n = x.data.len() as f64;
    Ok(x.data.iter().zip(&y.data).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n)
}

pub fn psnr(reference: &Raster, generated: &Raster, max: f64) -> Result<f64> {
    Ok(psnr_from_mse(mse(reference, generated)?, max))
}

/// Percentage of pixels whose edge membership differs.
pub fn pixel_error(est: &EdgeMask, gt: &EdgeMask) -> Result<f64> {
    if est.width != gt.width || est.height != gt.height {
        return Err(Error::DimensionMismatch {
            expected_w: gt.width,
            expected_h: gt.height,
            got_w: est.width,
            got_h: est.height,
        });
    }
    let total = est.labels.len();
    if total == 0 {
        return Err(Error::invalid("edge mask", "empty mask"));
    }
    let wrong = est.labels.iter().zip(&gt.labels).filter(|(a, b)| (**a == Label::Edge) != (**b == Label::Edge)).count();
    Ok(100.0 * wrong as f64 / total as f64)
}

/// Mean pixel error over image pairs.
pub fn pixel_error_dataset(pairs: &[(EdgeMask, EdgeMask)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::invalid("pixel error", "no image pairs"));
    }
    let mut sum = 0.0;
    for (e, g) in pairs {
        sum += pixel_error(e, g)?;
    }
    Ok(sum / pairs.len() as f64)
}

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method).
/// Returns `assign[row] = column`.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // potentials and matching over 1-based indices; column 0 is a sentinel
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// Mean corner displacement under the optimal one-to-one matching, as a
/// percentage of `diag`.
pub fn corner_error(est: &[Vec2], gt: &[Vec2], diag: f64) -> Result<f64> {
    if est.len() != gt.len() {
        return Err(Error::CountMismatch(est.len(), gt.len()));
    }
    if est.is_empty() {
        return Err(Error::invalid("corner error", "no corners"));
    }
    if !(diag > 0.0) {
        return Err(Error::invalid("corner error", format!("diagonal {diag} must be positive")));
    }
    let cost: Vec<Vec<f64>> = est.iter().map(|e| gt.iter().map(|g| e.distance(*g)).collect()).collect();
    let assign = hungarian(&cost);
    let total: f64 = assign.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    Ok(100.0 * total / est.len() as f64 / diag)
}

/// Mean of per-image corner errors.
pub fn corner_error_dataset(images: &[(Vec<Vec2>, Vec<Vec2>, f64)]) -> Result<f64> {
    if images.is_empty() {
        return Err(Error::invalid("corner error", "no images"));
    }
    let mut sum = 0.0;
    for (e, g, d) in images {
        sum += corner_error(e, g, *d)?;
    }
    Ok(sum / images.len() as f64)
}

/// Mean absolute percentage error of `values` against `gt`.
pub fn mape(values: &[f64], gt: &[f64]) -> Result<f64> {
    if values.len() != gt.len() {
        return Err(Error::CountMismatch(values.len(), gt.len()));
    }
    if values.is_empty() {
        return Err(Error::invalid("mape", "empty input"));
    }
    if let Some(i) = gt.iter().position(|&g| g == 0.0) {
        return Err(Error::ZeroGroundTruth(i));
    }
    let sum: f64 = values.iter().zip(gt).map(|(x, g)| ((g - x) / g).abs()).sum();
    Ok(100.0 * sum / values.len() as f64)
}
