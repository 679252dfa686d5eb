//! Multi-scale tiling: decompose an image into a 3-level window pyramid
//! (1 + 4 + 9 tiles, neighbors overlapping by 10% of the tile side) and map
//! per-tile detections back into source-image coordinates.

use crate::error::{Error, Result};
use crate::geometry::PixelRect;
use crate::imaging::{resize, RasterImage};
use crate::proposals::Detection;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// Side of every rendered tile in pixels.
pub const TILE_RENDER_SIZE: u32 = 600;
/// Fraction of the tile side shared between neighboring tiles.
pub const TILE_OVERLAP: f64 = 0.1;
/// Pyramid depth used throughout the pipeline: levels 1..=3 give 14 tiles.
pub const DEFAULT_LEVELS: u8 = 3;

/// Tile placement in source-image coordinates, without pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct TileGeom {
    pub level: u8,
    pub row: u32,
    pub col: u32,
    pub region: PixelRect,
    /// Ratio region -> rendered tile, i.e. TILE_RENDER_SIZE / region side.
    pub scale_x: f64,
    pub scale_y: f64,
}

impl TileGeom {
    pub fn id(&self) -> String {
        format!("l{}r{}c{}", self.level, self.row, self.col)
    }
}

/// A tile with its 600x600 rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct Tile {
    pub geom: TileGeom,
    pub rendered: RasterImage,
}

/// Per-axis tile spans for an n-per-axis grid over dimension `dim`:
/// tile side s = dim / (n - 0.1 (n-1)), stride 0.9 s, endpoints rounded,
/// last tile flush with the far edge.
pub fn axis_spans(dim: u32, n: u32) -> Vec<(u32, u32)> {
    assert!(dim >= 1 && n >= 1);
    let s = dim as f64 / (n as f64 - TILE_OVERLAP * (n as f64 - 1.0));
    let stride = (1.0 - TILE_OVERLAP) * s;
    let mut spans = Vec::with_capacity(n as usize);
    for i in 0..n {
        let start = libm::round(i as f64 * stride) as u32;
        let end = if i == n - 1 {
            dim
        } else {
            (libm::round(i as f64 * stride + s) as u32).min(dim)
        };
        spans.push((start, end - start));
    }
    spans
}

/// Tile geometry for levels 1..=levels (level n is an n x n grid).
pub fn tile_geometry(width: u32, height: u32, levels: u8) -> Vec<TileGeom> {
    let mut tiles = Vec::new();
    for level in 1..=levels {
        let n = level as u32;
        let xs = axis_spans(width, n);
        let ys = axis_spans(height, n);
        for (row, &(y, h)) in ys.iter().enumerate() {
            for (col, &(x, w)) in xs.iter().enumerate() {
                tiles.push(TileGeom {
                    level,
                    row: row as u32,
                    col: col as u32,
                    region: PixelRect::new(x, y, w, h),
                    scale_x: TILE_RENDER_SIZE as f64 / w as f64,
                    scale_y: TILE_RENDER_SIZE as f64 / h as f64,
                });
            }
        }
    }
    tiles
}

/// Cut and render the default 14-tile pyramid (1 + 4 + 9), each tile
/// rescaled to 600x600.
pub fn tile(image: &RasterImage) -> Vec<Tile> {
    tile_with_levels(image, DEFAULT_LEVELS)
}

pub fn tile_with_levels(image: &RasterImage, levels: u8) -> Vec<Tile> {
    tile_geometry(image.width(), image.height(), levels)
        .into_iter()
        .map(|geom| {
            let crop = image.crop(geom.region).expect("tile region within image");
            let rendered = resize(&crop, TILE_RENDER_SIZE, TILE_RENDER_SIZE)
                .expect("non-empty tile render");
            Tile { geom, rendered }
        })
        .collect()
}

/// Map detections from tile coordinates ([0,600] x [0,600]) back to source
/// image coordinates: divide by the tile scale, then offset by the region
/// origin. Scores and class probabilities pass through unchanged.
pub fn unmap(detections: &[Detection], tile: &TileGeom) -> Result<Vec<Detection>> {
    let side = TILE_RENDER_SIZE as f64;
    detections
        .iter()
        .map(|d| {
            let b = d.bbox;
            let inside = b.x >= 0.0
                && b.y >= 0.0
                && b.w > 0.0
                && b.h > 0.0
                && b.right() <= side
                && b.bottom() <= side;
            if !inside {
                return Err(Error::OutOfTile {
                    x: b.x,
                    y: b.y,
                    w: b.w,
                    h: b.h,
                });
            }
            let mut out = d.clone();
            out.bbox.x = tile.region.x as f64 + b.x / tile.scale_x;
            out.bbox.y = tile.region.y as f64 + b.y / tile.scale_y;
            out.bbox.w = b.w / tile.scale_x;
            out.bbox.h = b.h / tile.scale_y;
            Ok(out)
        })
        .collect()
}
