//! Gaussian weight windows, weighted edge-density ("entropy") scores, and
//! color-variance contrast between a patch and an icon.

use super::canny::{canny, EdgeMap};
use super::RasterImage;
use crate::error::{Error, Result};
use alloc::vec::Vec;

/// Per-pixel weights in (0, 1], maximum exactly 1, symmetric about the
/// (half-pixel) center.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightWindow {
    width: u32,
    height: u32,
    weights: Vec<f64>,
}

impl WeightWindow {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, x: u32, y: u32) -> f64 {
        self.weights[y as usize * self.width as usize + x as usize]
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Gaussian window centered on ((w-1)/2, (h-1)/2) with sigma_x = sigma_frac*w
/// and sigma_y = sigma_frac*h, rescaled so the maximum weight is exactly 1
/// (for even dimensions no sample sits at the continuous center).
///
/// Panics if w or h is zero or sigma_frac is not positive; these are caller
/// contract violations, not runtime conditions.
pub fn gaussian_window(w: u32, h: u32, sigma_frac: f64) -> WeightWindow {
    assert!(w >= 1 && h >= 1, "window dimensions must be >= 1");
    assert!(
        sigma_frac > 0.0 && sigma_frac.is_finite(),
        "sigma_frac must be positive"
    );
    let sx = sigma_frac * w as f64;
    let sy = sigma_frac * h as f64;
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let mut weights = Vec::with_capacity(w as usize * h as usize);
    let mut max = 0.0f64;
    for y in 0..h {
        let dy = y as f64 - cy;
        let ey = dy * dy / (2.0 * sy * sy);
        for x in 0..w {
            let dx = x as f64 - cx;
            let v = libm::exp(-(dx * dx / (2.0 * sx * sx) + ey));
            if v > max {
                max = v;
            }
            weights.push(v);
        }
    }
    for v in weights.iter_mut() {
        *v /= max;
    }
    WeightWindow {
        width: w,
        height: h,
        weights,
    }
}

/// Gaussian-weighted edge density: sum(edge * weight) / sum(weight), in [0,1].
pub fn entropy_from_edges(edges: &EdgeMap, sigma_frac: f64) -> f64 {
    let window = gaussian_window(edges.width(), edges.height(), sigma_frac);
    let mut acc = 0.0f64;
    for (e, w) in edges.values().iter().zip(window.weights()) {
        acc += *e as f64 * w;
    }
    acc / window.total()
}

/// Canny edge density of the patch weighted by a Gaussian window of the
/// patch's own dimensions. 0 means no edges; 1 means every pixel is an edge.
pub fn patch_entropy(
    patch: &RasterImage,
    canny_low: f32,
    canny_high: f32,
    sigma_frac: f64,
) -> Result<f64> {
    let edges = canny(patch, canny_low, canny_high)?;
    Ok(entropy_from_edges(&edges, sigma_frac))
}

/// Mean over color channels of the per-channel population variance of pixel
/// values (0-255 scale, squared units). With `opaque_only`, only pixels with
/// alpha > 0 are counted and an all-transparent image is an error.
pub fn color_variance(img: &RasterImage, opaque_only: bool) -> Result<f64> {
    let ch = img.channels() as usize;
    let color_ch = ch.min(3);
    let px = img.pixels();
    let use_pixel = |p: &[u8]| -> bool { !opaque_only || ch != 4 || p[3] > 0 };

    let mut count = 0usize;
    let mut sums = [0f64; 3];
    for p in px.chunks_exact(ch) {
        if use_pixel(p) {
            count += 1;
            for c in 0..color_ch {
                sums[c] += p[c] as f64;
            }
        }
    }
    if count == 0 {
        return Err(Error::NoOpaquePixels);
    }
    let means: Vec<f64> = (0..color_ch).map(|c| sums[c] / count as f64).collect();
    let mut sq = [0f64; 3];
    for p in px.chunks_exact(ch) {
        if use_pixel(p) {
            for c in 0..color_ch {
                let d = p[c] as f64 - means[c];
                sq[c] += d * d;
            }
        }
    }
    let var_sum: f64 = (0..color_ch).map(|c| sq[c] / count as f64).sum();
    Ok(var_sum / color_ch as f64)
}

/// Absolute difference between the patch's color variance (all pixels) and
/// the icon's (opaque pixels only). The icon must carry an alpha channel and
/// at least one pixel with alpha > 0.
pub fn contrast_score(patch: &RasterImage, icon: &RasterImage) -> Result<f64> {
    if icon.channels() != 4 {
        return Err(Error::UnsupportedChannels(icon.channels()));
    }
    let vp = color_variance(patch, false)?;
    let vi = color_variance(icon, true)?;
    Ok(libm::fabs(vp - vi))
}
