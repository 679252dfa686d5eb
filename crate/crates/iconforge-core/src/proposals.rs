//! The detector seam: a `Detection` type shared by the whole pipeline and a
//! deterministic non-neural baseline proposer (Canny edges, dilation,
//! connected components) so the pipeline runs end-to-end without an external
//! detector.

use crate::error::{Error, Result};
use crate::geometry::{BBox, PixelRect};
use crate::imaging::{canny, EdgeMap, RasterImage, DEFAULT_CANNY_HIGH, DEFAULT_CANNY_LOW};
use alloc::vec::Vec;

/// Smallest accepted proposal side in pixels.
pub const MIN_PROPOSAL_SIDE: u32 = 15;
/// Largest accepted proposal side in pixels.
pub const MAX_PROPOSAL_SIDE: u32 = 580;
/// Dilation iterations applied before component extraction.
pub const DILATION_ITERATIONS: u32 = 2;

/// A scored box, optionally with per-tag class probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub bbox: BBox,
    pub score: f64,
    pub class_probs: Option<Vec<f64>>,
}

impl Detection {
    pub fn new(bbox: BBox, score: f64) -> Self {
        Detection {
            bbox,
            score,
            class_probs: None,
        }
    }

    pub fn with_probs(bbox: BBox, score: f64, probs: Vec<f64>) -> Self {
        Detection {
            bbox,
            score,
            class_probs: Some(probs),
        }
    }

    /// Score in [0,1]; class_probs, when present, nonnegative and summing to
    /// 1 within 1e-6 (and matching `expected_probs` when one is given).
    pub fn validate(&self, expected_probs: Option<usize>) -> Result<()> {
        if !self.score.is_finite() || !(0.0..=1.0).contains(&self.score) {
            return Err(Error::InvalidDetection {
                reason: "score must lie in [0,1]",
            });
        }
        if !(self.bbox.w > 0.0 && self.bbox.h > 0.0)
            || !self.bbox.x.is_finite()
            || !self.bbox.y.is_finite()
        {
            return Err(Error::InvalidDetection {
                reason: "box must have positive finite extent",
            });
        }
        if let Some(probs) = &self.class_probs {
            if let Some(expected) = expected_probs {
                if probs.len() != expected {
                    return Err(Error::ProbsLength {
                        expected,
                        actual: probs.len(),
                    });
                }
            }
            if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidDetection {
                    reason: "class_probs must be nonnegative",
                });
            }
            let sum: f64 = probs.iter().sum();
            if libm::fabs(sum - 1.0) > 1e-6 {
                return Err(Error::InvalidDetection {
                    reason: "class_probs must sum to 1 within 1e-6",
                });
            }
        }
        Ok(())
    }
}

/// Binary 3x3 dilation, `iterations` times.
pub fn dilate(edges: &EdgeMap, iterations: u32) -> EdgeMap {
    let w = edges.width() as usize;
    let h = edges.height() as usize;
    let mut cur: Vec<f32> = edges.values().to_vec();
    for _ in 0..iterations {
        let mut next = cur.clone();
        for y in 0..h {
            for x in 0..w {
                if cur[y * w + x] > 0.0 {
                    for dy in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                        for dx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                            next[dy * w + dx] = 1.0;
                        }
                    }
                }
            }
        }
        cur = next;
    }
    EdgeMap::new(edges.width(), edges.height(), cur).expect("dimensions preserved")
}

/// Bounding boxes of 8-connected nonzero components, in scan order of their
/// first-encountered pixel.
pub fn connected_components(map: &EdgeMap) -> Vec<PixelRect> {
    let w = map.width() as usize;
    let h = map.height() as usize;
    let vals = map.values();
    let mut seen = alloc::vec![false; w * h];
    let mut out = Vec::new();
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if vals[y * w + x] == 0.0 || seen[y * w + x] {
                continue;
            }
            let (mut min_x, mut max_x, mut min_y, mut max_y) = (x, x, y, y);
            seen[y * w + x] = true;
            stack.push((x, y));
            while let Some((cx, cy)) = stack.pop() {
                min_x = min_x.min(cx);
                max_x = max_x.max(cx);
                min_y = min_y.min(cy);
                max_y = max_y.max(cy);
                for ny in cy.saturating_sub(1)..=(cy + 1).min(h - 1) {
                    for nx in cx.saturating_sub(1)..=(cx + 1).min(w - 1) {
                        if !seen[ny * w + nx] && vals[ny * w + nx] > 0.0 {
                            seen[ny * w + nx] = true;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
            out.push(PixelRect::new(
                min_x as u32,
                min_y as u32,
                (max_x - min_x + 1) as u32,
                (max_y - min_y + 1) as u32,
            ));
        }
    }
    out
}

/// Edge-density proposals for one rendered tile: Canny, two 3x3 dilations to
/// bridge broken contours, component bounding boxes with both sides in
/// [15, 580], scored by the fraction of (pre-dilation) edge pixels inside the
/// box. Deterministic; no RNG involved.
pub fn baseline_propose(tile: &RasterImage) -> Result<Vec<Detection>> {
    let edges = canny(tile, DEFAULT_CANNY_LOW, DEFAULT_CANNY_HIGH)?;
    let dilated = dilate(&edges, DILATION_ITERATIONS);
    let w = edges.width() as usize;
    let mut proposals = Vec::new();
    for rect in connected_components(&dilated) {
        if rect.w < MIN_PROPOSAL_SIDE
            || rect.h < MIN_PROPOSAL_SIDE
            || rect.w > MAX_PROPOSAL_SIDE
            || rect.h > MAX_PROPOSAL_SIDE
        {
            continue;
        }
        let mut edge_count = 0usize;
        for y in rect.y..rect.bottom() {
            for x in rect.x..rect.right() {
                if edges.values()[y as usize * w + x as usize] > 0.0 {
                    edge_count += 1;
                }
            }
        }
        let score = (edge_count as f64 / rect.to_bbox().area()).clamp(0.0, 1.0);
        proposals.push(Detection::new(rect.to_bbox(), score));
    }
    Ok(proposals)
}
