//! Dataset generation: parallel synthesis of annotated training windows,
//! written as PNGs plus a JSONL annotation file.
//!
//! Determinism: sample `i` draws from a ChaCha stream selected by `i`, so
//! outputs are a pure function of (corpus, pool, params, seed) regardless of
//! thread count or scheduling.

use crate::error::{CliError, CliResult};
use crate::formats::{
    write_jsonl, AnnotatedBox, IconManifestRecord, SampleRecord, WindowOrigin, SCHEMA_VERSION,
};
use crate::imgio::{load_icon, load_image, save_png};
use iconforge_core::imaging::RasterImage;
use iconforge_core::synthgen::{
    augment_window_with_mode, sample_window, AugmentParams, IconAsset, PlacementMode, Provenance,
    SyntheticSample,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fs;
use std::path::Path;

/// Window attempts per sample before giving up (covers corpora where most
/// windows reject every placement).
pub const MAX_WINDOW_ATTEMPTS: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenMode {
    /// Entropy-gated patches, contrast-gated transparent icons.
    Standard,
    /// Uniform placement, both gates skipped.
    RandomLocations,
    /// Gated placement drawing from the fully opaque pool.
    NontransparentIcons,
    /// Gated placement onto white canvases instead of corpus windows.
    BlankBackground,
}

impl GenMode {
    fn placement(self) -> PlacementMode {
        match self {
            GenMode::RandomLocations => PlacementMode::Random,
            _ => PlacementMode::Gated,
        }
    }

    /// Whether the pool must consist of transparent icons.
    fn wants_transparent_pool(self) -> bool {
        !matches!(self, GenMode::NontransparentIcons)
    }
}

/// Manifest order preserved; transparency re-verified against pixels.
pub fn load_icon_pool(manifest_path: &Path) -> CliResult<Vec<IconAsset>> {
    let records: Vec<IconManifestRecord> = crate::formats::read_jsonl(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    records.iter().map(|r| load_icon(dir, r)).collect()
}

/// Decode every PNG/JPEG under `dir` (non-recursive), sorted by file name.
pub fn load_corpus(dir: &Path) -> CliResult<Vec<(String, RasterImage)>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut paths: Vec<_> = entries
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::io(dir, e))?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .map(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
                .unwrap_or(false)
        })
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let stem = p
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("image")
                .to_string();
            Ok((stem, load_image(&p)?))
        })
        .collect()
}

/// Split the pool by the mode's transparency requirement.
pub fn select_pool(pool: &[IconAsset], mode: GenMode) -> CliResult<Vec<IconAsset>> {
    let want = mode.wants_transparent_pool();
    let selected: Vec<IconAsset> = pool
        .iter()
        .filter(|a| a.transparent == want)
        .cloned()
        .collect();
    if selected.is_empty() {
        return Err(CliError::invalid(if want {
            "icon pool has no transparent icons"
        } else {
            "icon pool has no fully opaque icons"
        }));
    }
    Ok(selected)
}

/// Generate sample `index` deterministically. Windows yielding zero
/// placements are rejected and a fresh window is drawn, up to
/// `MAX_WINDOW_ATTEMPTS` times.
pub fn generate_sample(
    corpus: &[(String, RasterImage)],
    pool: &[IconAsset],
    params: &AugmentParams,
    mode: GenMode,
    index: u64,
) -> CliResult<SyntheticSample> {
    if corpus.is_empty() && mode != GenMode::BlankBackground {
        return Err(CliError::invalid("corpus contains no images"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    rng.set_stream(index);

    for _ in 0..MAX_WINDOW_ATTEMPTS {
        let (window, provenance) = match mode {
            GenMode::BlankBackground => (
                RasterImage::filled(params.window_size, params.window_size, &[255, 255, 255])
                    .map_err(CliError::from)?,
                Provenance {
                    source_id: "blank".to_string(),
                    origin_x: 0,
                    origin_y: 0,
                    upscale: 1.0,
                },
            ),
            _ => {
                let (source_id, image) = &corpus[rng.random_range(0..corpus.len())];
                sample_window(image, source_id, params.window_size, &mut rng)
            }
        };
        let sample = augment_window_with_mode(
            &window,
            provenance,
            pool,
            params,
            mode.placement(),
            &mut rng,
        )?;
        if !sample.icons.is_empty() {
            return Ok(sample);
        }
    }
    Err(CliError::invalid(format!(
        "sample {index}: no icon placements after {MAX_WINDOW_ATTEMPTS} windows; \
         corpus too textured for the current thresholds"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenStats {
    pub samples: u64,
    pub boxes: u64,
}

/// Generate `n` samples in parallel and write `images/sample_NNNNN.png`
/// plus `annotations.jsonl` under `out_dir`.
pub fn generate_dataset(
    corpus: &[(String, RasterImage)],
    pool: &[IconAsset],
    params: &AugmentParams,
    mode: GenMode,
    n: u64,
    out_dir: &Path,
) -> CliResult<GenStats> {
    params.validate()?;
    let images_dir = out_dir.join("images");
    fs::create_dir_all(&images_dir).map_err(|e| CliError::io(&images_dir, e))?;

    let samples: Vec<SyntheticSample> = (0..n)
        .into_par_iter()
        .map(|i| generate_sample(corpus, pool, params, mode, i))
        .collect::<CliResult<_>>()?;

    let mut records = Vec::with_capacity(samples.len());
    let mut boxes = 0u64;
    for (i, sample) in samples.iter().enumerate() {
        let rel = format!("images/sample_{i:05}.png");
        save_png(&out_dir.join(&rel), &sample.window)?;
        boxes += sample.icons.len() as u64;
        records.push(SampleRecord {
            schema_version: SCHEMA_VERSION,
            image_path: rel,
            source_id: sample.provenance.source_id.clone(),
            window_origin: WindowOrigin {
                x: sample.provenance.origin_x,
                y: sample.provenance.origin_y,
            },
            boxes: sample
                .icons
                .iter()
                .map(|p| AnnotatedBox {
                    x: p.bbox.x,
                    y: p.bbox.y,
                    w: p.bbox.w,
                    h: p.bbox.h,
                    tag: p.tag.clone(),
                    icon_id: p.icon_id.clone(),
                })
                .collect(),
        });
    }
    write_jsonl(&out_dir.join("annotations.jsonl"), &records)?;
    Ok(GenStats { samples: n, boxes })
}
