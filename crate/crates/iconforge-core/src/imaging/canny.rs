//! Canny edge detector: 5x5 Gaussian blur (sigma 1.4), Sobel gradients,
//! non-maximum suppression along the quantized gradient direction, then
//! double-threshold hysteresis with 8-connected edge tracking.

use super::{to_grayscale, RasterImage};
use crate::error::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// Per-pixel edge strengths in [0, 1]. Canny output is binary {0, 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMap {
    width: u32,
    height: u32,
    values: Vec<f32>,
}

impl EdgeMap {
    pub fn new(width: u32, height: u32, values: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyDimensions);
        }
        if values.len() != width as usize * height as usize {
            return Err(Error::PixelBufferMismatch {
                width,
                height,
                channels: 1,
                len: values.len(),
            });
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParams {
                reason: "edge values must lie in [0,1]",
            });
        }
        Ok(EdgeMap {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn value(&self, x: u32, y: u32) -> f32 {
        self.values[y as usize * self.width as usize + x as usize]
    }

    pub fn count_nonzero(&self) -> usize {
        self.values.iter().filter(|&&v| v > 0.0).count()
    }

    pub fn is_all_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Hysteresis thresholds use the conventional 0-255 gradient-magnitude scale
/// and are compared against the raw Sobel L2 magnitude. Requires low < high.
pub fn canny(img: &RasterImage, low: f32, high: f32) -> Result<EdgeMap> {
    if !(low.is_finite() && high.is_finite()) || low < 0.0 || low >= high {
        return Err(Error::InvalidThresholds { low, high });
    }
    let gray = to_grayscale(img);
    let w = gray.width() as usize;
    let h = gray.height() as usize;
    let luma: Vec<f32> = gray.pixels().iter().map(|&p| p as f32).collect();

    let blurred = gaussian_blur_5x5(&luma, w, h);
    let (mag, sector) = sobel(&blurred, w, h);
    let thinned = suppress_non_maxima(&mag, &sector, w, h);
    let values = hysteresis(&thinned, w, h, low, high);

    Ok(EdgeMap {
        width: gray.width(),
        height: gray.height(),
        values,
    })
}

fn clamp_coord(v: isize, max: usize) -> usize {
    v.clamp(0, max as isize - 1) as usize
}

fn gaussian_blur_5x5(src: &[f32], w: usize, h: usize) -> Vec<f32> {
    // Separable kernel, sigma = 1.4, normalized to unit sum.
    let sigma = 1.4f64;
    let mut k = [0f32; 5];
    let mut sum = 0f64;
    for (i, kv) in k.iter_mut().enumerate() {
        let d = i as f64 - 2.0;
        let v = libm::exp(-(d * d) / (2.0 * sigma * sigma));
        *kv = v as f32;
        sum += v;
    }
    for kv in k.iter_mut() {
        *kv /= sum as f32;
    }

    let mut tmp = vec![0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0f32;
            for (i, kv) in k.iter().enumerate() {
                let sx = clamp_coord(x as isize + i as isize - 2, w);
                acc += kv * src[y * w + sx];
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0f32;
            for (i, kv) in k.iter().enumerate() {
                let sy = clamp_coord(y as isize + i as isize - 2, h);
                acc += kv * tmp[sy * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Returns (L2 magnitude, gradient direction quantized to 4 sectors).
/// Sectors: 0 horizontal gradient, 1 diagonal down-right, 2 vertical,
/// 3 diagonal down-left.
fn sobel(src: &[f32], w: usize, h: usize) -> (Vec<f32>, Vec<u8>) {
    let mut mag = vec![0f32; w * h];
    let mut sector = vec![0u8; w * h];
    let at = |x: isize, y: isize| src[clamp_coord(y, h) * w + clamp_coord(x, w)];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = -at(x - 1, y - 1) - 2.0 * at(x - 1, y) - at(x - 1, y + 1)
                + at(x + 1, y - 1)
                + 2.0 * at(x + 1, y)
                + at(x + 1, y + 1);
            let gy = -at(x - 1, y - 1) - 2.0 * at(x, y - 1) - at(x + 1, y - 1)
                + at(x - 1, y + 1)
                + 2.0 * at(x, y + 1)
                + at(x + 1, y + 1);
            let idx = y as usize * w + x as usize;
            mag[idx] = libm::sqrtf(gx * gx + gy * gy);
            let mut angle = libm::atan2f(gy, gx);
            if angle < 0.0 {
                angle += core::f32::consts::PI;
            }
            let octant = angle / core::f32::consts::PI * 8.0;
            sector[idx] = if !(1.0..7.0).contains(&octant) {
                0
            } else if octant < 3.0 {
                1
            } else if octant < 5.0 {
                2
            } else {
                3
            };
        }
    }
    (mag, sector)
}

/// Keeps a pixel only if its magnitude is strictly greater than one neighbor
/// along the gradient and at least the other; the asymmetry thins two-wide
/// magnitude plateaus (as produced by a blurred step) down to one pixel.
fn suppress_non_maxima(mag: &[f32], sector: &[u8], w: usize, h: usize) -> Vec<f32> {
    let get = |x: isize, y: isize| -> f32 {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };
    let mut out = vec![0f32; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let idx = y as usize * w + x as usize;
            let m = mag[idx];
            if m == 0.0 {
                continue;
            }
            let (prev, next) = match sector[idx] {
                0 => (get(x - 1, y), get(x + 1, y)),
                1 => (get(x - 1, y - 1), get(x + 1, y + 1)),
                2 => (get(x, y - 1), get(x, y + 1)),
                _ => (get(x + 1, y - 1), get(x - 1, y + 1)),
            };
            if m > prev && m >= next {
                out[idx] = m;
            }
        }
    }
    out
}

fn hysteresis(mag: &[f32], w: usize, h: usize, low: f32, high: f32) -> Vec<f32> {
    let mut out = vec![0f32; w * h];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if mag[y * w + x] >= high && out[y * w + x] == 0.0 {
                out[y * w + x] = 1.0;
                stack.push((x, y));
                while let Some((cx, cy)) = stack.pop() {
                    for dy in -1i32..=1 {
                        for dx in -1i32..=1 {
                            if dx == 0 && dy == 0 {
                                continue;
                            }
                            let nx = cx as i32 + dx;
                            let ny = cy as i32 + dy;
                            if nx < 0 || ny < 0 || nx >= w as i32 || ny >= h as i32 {
                                continue;
                            }
                            let ni = ny as usize * w + nx as usize;
                            if out[ni] == 0.0 && mag[ni] >= low {
                                out[ni] = 1.0;
                                stack.push((nx as usize, ny as usize));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}
