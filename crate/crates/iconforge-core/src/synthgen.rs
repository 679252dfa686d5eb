//! Synthetic training-window generation: sample square windows from source
//! infographics, locate low-entropy patches, and composite contrast-checked
//! icons with tight ground-truth boxes.

use crate::error::{Error, Result};
use crate::geometry::PixelRect;
use crate::imaging::{
    composite_into, contrast_score, patch_entropy, resize, RasterImage, DEFAULT_CANNY_HIGH,
    DEFAULT_CANNY_LOW, DEFAULT_SIGMA_FRAC,
};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use rand::Rng;

/// Generation parameters. The canny/sigma fields parameterize the entropy
/// gate and are exposed through the same config file as everything else.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentParams {
    pub icons_per_window: u32,
    pub icon_size_min: u32,
    pub icon_size_max: u32,
    pub entropy_threshold: f64,
    pub contrast_threshold: f64,
    pub max_patch_tries: u32,
    pub max_icon_redraws: u32,
    pub window_size: u32,
    pub canny_low: f32,
    pub canny_high: f32,
    pub sigma_frac: f64,
    pub rng_seed: u64,
}

impl Default for AugmentParams {
    fn default() -> Self {
        AugmentParams {
            icons_per_window: 4,
            icon_size_min: 30,
            icon_size_max: 240,
            entropy_threshold: 0.05,
            contrast_threshold: 500.0,
            max_patch_tries: 50,
            max_icon_redraws: 10,
            window_size: 600,
            canny_low: DEFAULT_CANNY_LOW,
            canny_high: DEFAULT_CANNY_HIGH,
            sigma_frac: DEFAULT_SIGMA_FRAC,
            rng_seed: 0,
        }
    }
}

impl AugmentParams {
    pub fn validate(&self) -> Result<()> {
        if !(1..=16).contains(&self.icons_per_window) {
            return Err(Error::InvalidParams {
                reason: "icons_per_window must be in 1..=16",
            });
        }
        if self.icon_size_min == 0 || self.icon_size_min > self.icon_size_max {
            return Err(Error::InvalidParams {
                reason: "need 0 < icon_size_min <= icon_size_max",
            });
        }
        if self.window_size == 0 || self.icon_size_max > self.window_size - 1 {
            return Err(Error::InvalidParams {
                reason: "icon_size_max must be <= window_size - 1",
            });
        }
        if !(0.0..=1.0).contains(&self.entropy_threshold) {
            return Err(Error::InvalidParams {
                reason: "entropy_threshold must lie in [0,1]",
            });
        }
        if !self.contrast_threshold.is_finite() || self.contrast_threshold < 0.0 {
            return Err(Error::InvalidParams {
                reason: "contrast_threshold must be nonnegative",
            });
        }
        if self.max_patch_tries == 0 || self.max_icon_redraws == 0 {
            return Err(Error::InvalidParams {
                reason: "retry budgets must be at least 1",
            });
        }
        if !(self.canny_low.is_finite() && self.canny_high.is_finite())
            || self.canny_low < 0.0
            || self.canny_low >= self.canny_high
        {
            return Err(Error::InvalidParams {
                reason: "need 0 <= canny_low < canny_high",
            });
        }
        if !self.sigma_frac.is_finite() || self.sigma_frac <= 0.0 {
            return Err(Error::InvalidParams {
                reason: "sigma_frac must be positive",
            });
        }
        Ok(())
    }
}

/// An icon ready for compositing. `transparent` is derived from the pixels:
/// true iff any alpha sample is below 255.
#[derive(Debug, Clone, PartialEq)]
pub struct IconAsset {
    pub id: String,
    pub tag: String,
    pub image: RasterImage,
    pub transparent: bool,
}

impl IconAsset {
    pub fn new(id: &str, tag: &str, image: RasterImage) -> Result<Self> {
        if image.channels() != 4 {
            return Err(Error::InvalidIcon {
                id: id.to_string(),
                reason: "icon image must be RGBA",
            });
        }
        if !image.has_opaque_pixels() {
            return Err(Error::InvalidIcon {
                id: id.to_string(),
                reason: "icon is fully transparent",
            });
        }
        let transparent = !image.is_fully_opaque();
        Ok(IconAsset {
            id: id.to_string(),
            tag: tag.to_string(),
            image,
            transparent,
        })
    }
}

/// Where a window came from. `upscale` is the factor applied to the source
/// before cropping (1.0 when the source was already large enough).
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub source_id: String,
    pub origin_x: u32,
    pub origin_y: u32,
    pub upscale: f64,
}

/// One composited icon: the tight pasted rectangle (ground truth), the
/// low-entropy patch that hosted it, and the icon identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedIcon {
    pub bbox: PixelRect,
    pub patch: PixelRect,
    pub icon_id: String,
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSample {
    pub window: RasterImage,
    pub icons: Vec<PlacedIcon>,
    pub provenance: Provenance,
}

/// Patch selection regime: `Gated` runs the location validity test;
/// `Random` places icons at uniform non-overlapping positions instead.
/// The contrast redraw applies in both regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementMode {
    Gated,
    Random,
}

/// Crop a square `size`-sided window at a uniform position, upscaling the
/// source first when its minor side is smaller than `size`.
pub fn sample_window<R: Rng + ?Sized>(
    infographic: &RasterImage,
    source_id: &str,
    size: u32,
    rng: &mut R,
) -> (RasterImage, Provenance) {
    assert!(size >= 1, "window size must be >= 1");
    let min_side = infographic.width().min(infographic.height());
    let (scaled, upscale) = if min_side < size {
        let factor = size as f64 / min_side as f64;
        let new_w = (libm::round(infographic.width() as f64 * factor) as u32).max(size);
        let new_h = (libm::round(infographic.height() as f64 * factor) as u32).max(size);
        (
            resize(infographic, new_w, new_h).expect("non-empty resize"),
            factor,
        )
    } else {
        (infographic.clone(), 1.0)
    };
    let origin_x = rng.random_range(0..=scaled.width() - size);
    let origin_y = rng.random_range(0..=scaled.height() - size);
    let window = scaled
        .crop(PixelRect::new(origin_x, origin_y, size, size))
        .expect("window within scaled image");
    (
        window,
        Provenance {
            source_id: source_id.to_string(),
            origin_x,
            origin_y,
            upscale,
        },
    )
}

/// Uniformly sample square patch positions until one has entropy at or below
/// the threshold, avoiding rectangles in `occupied`. `None` after
/// `max_patch_tries` failures is a normal outcome.
pub fn find_valid_patch<R: Rng + ?Sized>(
    window: &RasterImage,
    desired_size: u32,
    params: &AugmentParams,
    occupied: &[PixelRect],
    rng: &mut R,
) -> Result<Option<PixelRect>> {
    assert!(
        desired_size >= 1
            && desired_size < window.width()
            && desired_size < window.height(),
        "desired patch size must be <= window side - 1"
    );
    for _ in 0..params.max_patch_tries {
        let rect = sample_free_rect(window, desired_size, occupied, rng);
        let Some(rect) = rect else { continue };
        let patch = window.crop(rect).expect("patch within window");
        let entropy = patch_entropy(
            &patch,
            params.canny_low,
            params.canny_high,
            params.sigma_frac,
        )?;
        if entropy <= params.entropy_threshold {
            return Ok(Some(rect));
        }
    }
    Ok(None)
}

/// One uniform position draw; `None` if it collides with `occupied`.
fn sample_free_rect<R: Rng + ?Sized>(
    window: &RasterImage,
    size: u32,
    occupied: &[PixelRect],
    rng: &mut R,
) -> Option<PixelRect> {
    let x = rng.random_range(0..=window.width() - size);
    let y = rng.random_range(0..=window.height() - size);
    let rect = PixelRect::new(x, y, size, size);
    if occupied.iter().any(|o| o.overlaps(&rect)) {
        None
    } else {
        Some(rect)
    }
}

/// Aspect-preserving dimensions with the larger side scaled to `target`.
pub fn scaled_dims(w: u32, h: u32, target: u32) -> (u32, u32) {
    if w >= h {
        let scaled = libm::round(h as f64 * target as f64 / w as f64) as u32;
        (target, scaled.max(1))
    } else {
        let scaled = libm::round(w as f64 * target as f64 / h as f64) as u32;
        (scaled.max(1), target)
    }
}

/// Place up to `icons_per_window` icons on `window`. Per placement: sample a
/// target size uniformly in [icon_size_min, icon_size_max], find a hosting
/// patch, then redraw icons (up to max_icon_redraws) until the contrast gate
/// passes. The icon is centered in its patch; the ground-truth box is the
/// pasted-icon rectangle. Patches never overlap. A sample with zero
/// placements is returned as-is; the caller decides whether to resample.
pub fn augment_window<R: Rng + ?Sized>(
    window: &RasterImage,
    provenance: Provenance,
    icon_pool: &[IconAsset],
    params: &AugmentParams,
    rng: &mut R,
) -> Result<SyntheticSample> {
    augment_window_with_mode(window, provenance, icon_pool, params, PlacementMode::Gated, rng)
}

pub fn augment_window_with_mode<R: Rng + ?Sized>(
    window: &RasterImage,
    provenance: Provenance,
    icon_pool: &[IconAsset],
    params: &AugmentParams,
    mode: PlacementMode,
    rng: &mut R,
) -> Result<SyntheticSample> {
    params.validate()?;
    if icon_pool.is_empty() {
        return Err(Error::EmptyIconPool);
    }
    if window.width() <= params.icon_size_max || window.height() <= params.icon_size_max {
        return Err(Error::InvalidParams {
            reason: "window sides must exceed icon_size_max",
        });
    }

    let mut occupied: Vec<PixelRect> = Vec::new();
    let mut accepted: Vec<(PlacedIcon, RasterImage)> = Vec::new();

    for _ in 0..params.icons_per_window {
        let size = rng.random_range(params.icon_size_min..=params.icon_size_max);
        let patch = match mode {
            PlacementMode::Gated => find_valid_patch(window, size, params, &occupied, rng)?,
            PlacementMode::Random => {
                let mut found = None;
                for _ in 0..params.max_patch_tries {
                    if let Some(r) = sample_free_rect(window, size, &occupied, rng) {
                        found = Some(r);
                        break;
                    }
                }
                found
            }
        };
        let Some(patch) = patch else { continue };
        let patch_pixels = window.crop(patch).expect("patch within window");

        for _ in 0..params.max_icon_redraws {
            let icon = &icon_pool[rng.random_range(0..icon_pool.len())];
            let (rw, rh) = scaled_dims(icon.image.width(), icon.image.height(), size);
            if rw.min(rh) < params.icon_size_min {
                // Aspect ratio too extreme for the sampled size; the minor
                // side would leave the permitted range.
                continue;
            }
            let rendered = resize(&icon.image, rw, rh).expect("non-empty resize");
            match contrast_score(&patch_pixels, &rendered) {
                Ok(score) if score >= params.contrast_threshold => {}
                _ => continue,
            }
            let bbox = PixelRect::new(
                patch.x + (size - rw) / 2,
                patch.y + (size - rh) / 2,
                rw,
                rh,
            );
            occupied.push(patch);
            accepted.push((
                PlacedIcon {
                    bbox,
                    patch,
                    icon_id: icon.id.clone(),
                    tag: icon.tag.clone(),
                },
                rendered,
            ));
            break;
        }
    }

    let mut composited = window.clone();
    let mut icons = Vec::with_capacity(accepted.len());
    for (placed, rendered) in accepted {
        composite_into(&mut composited, &rendered, placed.bbox.x, placed.bbox.y)?;
        icons.push(placed);
    }
    Ok(SyntheticSample {
        window: composited,
        icons,
        provenance,
    })
}
