//! Image codec boundary: PNG/JPEG bytes in and out, `RasterImage` inside.
//! Alpha survives only through PNG; JPEG always decodes to plain RGB.

use crate::error::{CliError, CliResult};
use crate::formats::IconManifestRecord;
use iconforge_core::imaging::RasterImage;
use iconforge_core::synthgen::IconAsset;
use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{DynamicImage, ExtendedColorType, ImageEncoder};
use std::fs;
use std::path::Path;

pub fn load_image(path: &Path) -> CliResult<RasterImage> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let decoded = image::load_from_memory(&bytes).map_err(|e| CliError::in_file(path, e))?;
    let img = match decoded {
        DynamicImage::ImageLuma8(g) => {
            let (w, h) = g.dimensions();
            RasterImage::new(w, h, 1, g.into_raw())
        }
        other if other.color().has_alpha() => {
            let rgba = other.to_rgba8();
            let (w, h) = rgba.dimensions();
            RasterImage::new(w, h, 4, rgba.into_raw())
        }
        other => {
            let rgb = other.to_rgb8();
            let (w, h) = rgb.dimensions();
            RasterImage::new(w, h, 3, rgb.into_raw())
        }
    };
    img.map_err(|e| CliError::in_file(path, e))
}

/// Fixed fast compression and filter so identical pixels give identical
/// bytes across runs.
pub fn save_png(path: &Path, img: &RasterImage) -> CliResult<()> {
    let color = match img.channels() {
        1 => ExtendedColorType::L8,
        3 => ExtendedColorType::Rgb8,
        4 => ExtendedColorType::Rgba8,
        c => return Err(CliError::invalid(format!("cannot encode {c}-channel image"))),
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
    }
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let encoder =
        PngEncoder::new_with_quality(file, CompressionType::Fast, FilterType::NoFilter);
    encoder
        .write_image(img.pixels(), img.width(), img.height(), color)
        .map_err(|e| CliError::in_file(path, e))
}

/// Load one manifest icon. The transparency flag is recomputed from the
/// pixels; a manifest that disagrees is rejected rather than trusted.
pub fn load_icon(manifest_dir: &Path, record: &IconManifestRecord) -> CliResult<IconAsset> {
    let path = manifest_dir.join(&record.path);
    let img = load_image(&path)?;
    if img.channels() != 4 {
        return Err(CliError::in_file(
            &path,
            format!("icon '{}' must be a PNG with an alpha channel", record.id),
        ));
    }
    let asset = IconAsset::new(&record.id, &record.tag, img)
        .map_err(|e| CliError::in_file(&path, e))?;
    if asset.transparent != record.transparent {
        return Err(CliError::in_file(
            &path,
            format!(
                "icon '{}': manifest says transparent={}, pixels say {}",
                record.id, record.transparent, asset.transparent
            ),
        ));
    }
    Ok(asset)
}
