//! Per-pixel primitives: grayscale conversion, Canny edges, Gaussian weight
//! windows, entropy/contrast scores, bilinear resize, alpha compositing.
//!
//! All operations are pure functions of their inputs and safe to call in
//! parallel on shared images.

mod canny;
mod stats;

pub use canny::{canny, EdgeMap};
pub use stats::{
    color_variance, contrast_score, entropy_from_edges, gaussian_window, patch_entropy,
    WeightWindow,
};

use crate::error::{Error, Result};
use crate::geometry::PixelRect;
use alloc::vec;
use alloc::vec::Vec;

/// Default lower Canny hysteresis threshold.
pub const DEFAULT_CANNY_LOW: f32 = 50.0;
/// Default upper Canny hysteresis threshold.
pub const DEFAULT_CANNY_HIGH: f32 = 150.0;
/// Default Gaussian window sigma as a fraction of the patch side.
pub const DEFAULT_SIGMA_FRAC: f64 = 0.33;

/// 8-bit raster image, row-major, interleaved samples.
///
/// Channel counts: 1 (gray), 3 (RGB), 4 (RGBA).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    channels: u8,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, channels: u8, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyDimensions);
        }
        if !matches!(channels, 1 | 3 | 4) {
            return Err(Error::UnsupportedChannels(channels));
        }
        let expected = width as usize * height as usize * channels as usize;
        if pixels.len() != expected {
            return Err(Error::PixelBufferMismatch {
                width,
                height,
                channels,
                len: pixels.len(),
            });
        }
        Ok(RasterImage {
            width,
            height,
            channels,
            pixels,
        })
    }

    /// Constant-color image; `color` length must equal the channel count.
    pub fn filled(width: u32, height: u32, color: &[u8]) -> Result<Self> {
        let channels = color.len() as u8;
        if width == 0 || height == 0 {
            return Err(Error::EmptyDimensions);
        }
        if !matches!(channels, 1 | 3 | 4) {
            return Err(Error::UnsupportedChannels(channels));
        }
        let mut pixels = Vec::with_capacity(width as usize * height as usize * channels as usize);
        for _ in 0..width as usize * height as usize {
            pixels.extend_from_slice(color);
        }
        Ok(RasterImage {
            width,
            height,
            channels,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels as usize
    }

    /// Sample slice for pixel (x, y). Panics out of bounds.
    pub fn pixel(&self, x: u32, y: u32) -> &[u8] {
        assert!(x < self.width && y < self.height, "pixel out of bounds");
        let o = self.offset(x, y);
        &self.pixels[o..o + self.channels as usize]
    }

    pub fn put_pixel(&mut self, x: u32, y: u32, samples: &[u8]) {
        assert!(x < self.width && y < self.height, "pixel out of bounds");
        assert_eq!(samples.len(), self.channels as usize);
        let o = self.offset(x, y);
        self.pixels[o..o + self.channels as usize].copy_from_slice(samples);
    }

    /// True when the image has no alpha channel or every alpha sample is 255.
    pub fn is_fully_opaque(&self) -> bool {
        if self.channels != 4 {
            return true;
        }
        self.pixels.iter().skip(3).step_by(4).all(|&a| a == 255)
    }

    /// True when at least one pixel has alpha > 0 (vacuously true without alpha).
    pub fn has_opaque_pixels(&self) -> bool {
        if self.channels != 4 {
            return true;
        }
        self.pixels.iter().skip(3).step_by(4).any(|&a| a > 0)
    }

    pub fn crop(&self, rect: PixelRect) -> Result<RasterImage> {
        if rect.w == 0 || rect.h == 0 {
            return Err(Error::EmptyDimensions);
        }
        if rect.right() > self.width || rect.bottom() > self.height {
            return Err(Error::OutOfBounds {
                x: rect.x,
                y: rect.y,
                w: rect.w,
                h: rect.h,
                image_w: self.width,
                image_h: self.height,
            });
        }
        let ch = self.channels as usize;
        let row_bytes = rect.w as usize * ch;
        let mut pixels = Vec::with_capacity(rect.h as usize * row_bytes);
        for row in rect.y..rect.bottom() {
            let start = self.offset(rect.x, row);
            pixels.extend_from_slice(&self.pixels[start..start + row_bytes]);
        }
        RasterImage::new(rect.w, rect.h, self.channels, pixels)
    }
}

/// Rec. 601 luma: round(0.299 R + 0.587 G + 0.114 B). Alpha is ignored.
/// Single-channel input is returned unchanged.
pub fn to_grayscale(img: &RasterImage) -> RasterImage {
    if img.channels == 1 {
        return img.clone();
    }
    let ch = img.channels as usize;
    let mut out = Vec::with_capacity(img.width as usize * img.height as usize);
    for px in img.pixels.chunks_exact(ch) {
        let luma = 0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64;
        out.push(libm::round(luma) as u8);
    }
    RasterImage {
        width: img.width,
        height: img.height,
        channels: 1,
        pixels: out,
    }
}

/// Bilinear resize with half-pixel sample centers and edge clamping.
/// Aspect ratio is not preserved; the caller chooses the output size.
pub fn resize(img: &RasterImage, new_w: u32, new_h: u32) -> Result<RasterImage> {
    if new_w == 0 || new_h == 0 {
        return Err(Error::EmptyDimensions);
    }
    if new_w == img.width && new_h == img.height {
        return Ok(img.clone());
    }
    let ch = img.channels as usize;
    let sx = img.width as f64 / new_w as f64;
    let sy = img.height as f64 / new_h as f64;
    let mut pixels = vec![0u8; new_w as usize * new_h as usize * ch];

    for dy in 0..new_h {
        let fy = ((dy as f64 + 0.5) * sy - 0.5).clamp(0.0, (img.height - 1) as f64);
        let y0 = libm::floor(fy) as u32;
        let y1 = (y0 + 1).min(img.height - 1);
        let ty = fy - y0 as f64;
        for dx in 0..new_w {
            let fx = ((dx as f64 + 0.5) * sx - 0.5).clamp(0.0, (img.width - 1) as f64);
            let x0 = libm::floor(fx) as u32;
            let x1 = (x0 + 1).min(img.width - 1);
            let tx = fx - x0 as f64;

            let p00 = img.offset(x0, y0);
            let p10 = img.offset(x1, y0);
            let p01 = img.offset(x0, y1);
            let p11 = img.offset(x1, y1);
            let out = (dy as usize * new_w as usize + dx as usize) * ch;
            for c in 0..ch {
                let top = img.pixels[p00 + c] as f64 * (1.0 - tx) + img.pixels[p10 + c] as f64 * tx;
                let bot = img.pixels[p01 + c] as f64 * (1.0 - tx) + img.pixels[p11 + c] as f64 * tx;
                let v = top * (1.0 - ty) + bot * ty;
                pixels[out + c] = libm::round(v) as u8;
            }
        }
    }
    RasterImage::new(new_w, new_h, img.channels, pixels)
}

/// Straight-alpha compositing of `icon` (RGBA) onto `base` at (x, y):
/// out = round(a * icon + (1 - a) * base) per color channel, a = alpha / 255.
/// A base alpha channel, if present, is left unchanged. The icon must fit
/// entirely inside the base.
pub fn alpha_composite(base: &RasterImage, icon: &RasterImage, x: u32, y: u32) -> Result<RasterImage> {
    let mut out = base.clone();
    composite_into(&mut out, icon, x, y)?;
    Ok(out)
}

/// In-place variant of [`alpha_composite`].
pub fn composite_into(base: &mut RasterImage, icon: &RasterImage, x: u32, y: u32) -> Result<()> {
    if icon.channels != 4 {
        return Err(Error::UnsupportedChannels(icon.channels));
    }
    if x.checked_add(icon.width).is_none_or(|r| r > base.width)
        || y.checked_add(icon.height).is_none_or(|r| r > base.height)
    {
        return Err(Error::OutOfBounds {
            x,
            y,
            w: icon.width,
            h: icon.height,
            image_w: base.width,
            image_h: base.height,
        });
    }
    let color_ch = if base.channels == 4 { 3 } else { base.channels as usize };
    for iy in 0..icon.height {
        for ix in 0..icon.width {
            let ip = icon.offset(ix, iy);
            let a = icon.pixels[ip + 3] as f64 / 255.0;
            if a == 0.0 {
                continue;
            }
            let bp = base.offset(x + ix, y + iy);
            for c in 0..color_ch {
                // Gray base blends against icon luma; RGB/RGBA against RGB.
                let icon_v = if base.channels == 1 {
                    libm::round(
                        0.299 * icon.pixels[ip] as f64
                            + 0.587 * icon.pixels[ip + 1] as f64
                            + 0.114 * icon.pixels[ip + 2] as f64,
                    )
                } else {
                    icon.pixels[ip + c] as f64
                };
                let blended = a * icon_v + (1.0 - a) * base.pixels[bp + c] as f64;
                base.pixels[bp + c] = libm::round(blended) as u8;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rgb(w: u32, h: u32, color: [u8; 3]) -> RasterImage {
        RasterImage::filled(w, h, &color).unwrap()
    }

    #[test]
    fn buffer_length_is_validated() {
        assert!(matches!(
            RasterImage::new(2, 2, 3, vec![0; 11]),
            Err(Error::PixelBufferMismatch { .. })
        ));
        assert!(RasterImage::new(2, 2, 3, vec![0; 12]).is_ok());
        assert!(matches!(
            RasterImage::new(0, 2, 3, vec![]),
            Err(Error::EmptyDimensions)
        ));
        assert!(matches!(
            RasterImage::new(2, 2, 2, vec![0; 8]),
            Err(Error::UnsupportedChannels(2))
        ));
    }

    #[test]
    fn grayscale_white_black_red() {
        assert_eq!(to_grayscale(&rgb(1, 1, [255, 255, 255])).pixels(), &[255]);
        assert_eq!(to_grayscale(&rgb(1, 1, [0, 0, 0])).pixels(), &[0]);
        assert_eq!(to_grayscale(&rgb(1, 1, [255, 0, 0])).pixels(), &[76]);
    }

    #[test]
    fn grayscale_ignores_alpha() {
        let img = RasterImage::filled(2, 1, &[10, 20, 30, 0]).unwrap();
        let g = to_grayscale(&img);
        assert_eq!(g.channels(), 1);
        let expected = libm::round(0.299 * 10.0 + 0.587 * 20.0 + 0.114 * 30.0) as u8;
        assert_eq!(g.pixels(), &[expected, expected]);
    }

    #[test]
    fn grayscale_passes_single_channel_through() {
        let img = RasterImage::new(2, 1, 1, vec![7, 9]).unwrap();
        assert_eq!(to_grayscale(&img), img);
    }

    #[test]
    fn crop_extracts_rows() {
        let mut img = rgb(4, 3, [0, 0, 0]);
        img.put_pixel(2, 1, &[9, 8, 7]);
        let c = img.crop(PixelRect::new(1, 1, 3, 2)).unwrap();
        assert_eq!((c.width(), c.height()), (3, 2));
        assert_eq!(c.pixel(1, 0), &[9, 8, 7]);
        assert!(img.crop(PixelRect::new(2, 2, 3, 1)).is_err());
    }

    #[test]
    fn resize_identity_is_exact() {
        let mut img = rgb(5, 4, [3, 5, 7]);
        img.put_pixel(4, 3, &[200, 100, 50]);
        assert_eq!(resize(&img, 5, 4).unwrap(), img);
    }

    #[test]
    fn resize_constant_stays_constant() {
        let img = rgb(7, 3, [42, 17, 99]);
        let out = resize(&img, 13, 11).unwrap();
        assert!(out.pixels().chunks_exact(3).all(|p| p == [42, 17, 99]));
    }

    #[test]
    fn resize_midpoint_interpolates() {
        let img = RasterImage::new(2, 1, 1, vec![0, 255]).unwrap();
        let out = resize(&img, 3, 1).unwrap();
        let mid = out.pixels()[1] as i32;
        assert!((mid - 128).abs() <= 1, "mid {mid}");
        assert_eq!(out.pixels()[0], 0);
        assert_eq!(out.pixels()[2], 255);
    }

    #[test]
    fn composite_zero_alpha_is_noop() {
        let base = rgb(4, 4, [10, 20, 30]);
        let icon = RasterImage::filled(2, 2, &[255, 255, 255, 0]).unwrap();
        assert_eq!(alpha_composite(&base, &icon, 1, 1).unwrap(), base);
    }

    #[test]
    fn composite_full_alpha_replaces_and_is_idempotent() {
        let base = rgb(4, 4, [10, 20, 30]);
        let icon = RasterImage::filled(2, 2, &[1, 2, 3, 255]).unwrap();
        let once = alpha_composite(&base, &icon, 2, 1).unwrap();
        assert_eq!(once.pixel(2, 1), &[1, 2, 3]);
        assert_eq!(once.pixel(3, 2), &[1, 2, 3]);
        assert_eq!(once.pixel(1, 1), &[10, 20, 30]);
        let twice = alpha_composite(&once, &icon, 2, 1).unwrap();
        assert_eq!(twice, once);
    }

    #[test]
    fn composite_half_alpha_blends() {
        let base = rgb(1, 1, [0, 0, 0]);
        let icon = RasterImage::filled(1, 1, &[255, 255, 255, 128]).unwrap();
        let out = alpha_composite(&base, &icon, 0, 0).unwrap();
        assert_eq!(out.pixel(0, 0), &[128, 128, 128]);
    }

    #[test]
    fn composite_out_of_bounds_is_rejected() {
        let base = rgb(4, 4, [0, 0, 0]);
        let icon = RasterImage::filled(2, 2, &[0, 0, 0, 255]).unwrap();
        assert!(matches!(
            alpha_composite(&base, &icon, 3, 0),
            Err(Error::OutOfBounds { .. })
        ));
        assert!(alpha_composite(&base, &icon, 2, 2).is_ok());
    }

    #[test]
    fn composite_preserves_base_alpha() {
        let base = RasterImage::filled(2, 2, &[0, 0, 0, 200]).unwrap();
        let icon = RasterImage::filled(1, 1, &[255, 255, 255, 255]).unwrap();
        let out = alpha_composite(&base, &icon, 0, 0).unwrap();
        assert_eq!(out.pixel(0, 0), &[255, 255, 255, 200]);
    }

    #[test]
    fn opacity_queries() {
        let opaque = RasterImage::filled(2, 2, &[1, 2, 3, 255]).unwrap();
        assert!(opaque.is_fully_opaque());
        let translucent = RasterImage::filled(2, 2, &[1, 2, 3, 254]).unwrap();
        assert!(!translucent.is_fully_opaque());
        assert!(translucent.has_opaque_pixels());
        let clear = RasterImage::filled(2, 2, &[1, 2, 3, 0]).unwrap();
        assert!(!clear.has_opaque_pixels());
        assert!(rgb(2, 2, [0, 0, 0]).is_fully_opaque());
    }
}
