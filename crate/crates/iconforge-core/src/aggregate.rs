//! Merge multi-scale detections into final proposals: confidence threshold,
//! greedy NMS, then a containment pass that absorbs boxes covering only part
//! of a larger surviving icon.

use crate::proposals::Detection;
use alloc::vec::Vec;

/// Default confidence threshold applied before NMS.
pub const DEFAULT_SCORE_THRESHOLD: f64 = 0.8;
/// Default NMS IOU threshold.
pub const DEFAULT_NMS_IOU: f64 = 0.3;
/// Default intersection-over-smaller-area threshold for the second pass.
pub const DEFAULT_CONTAINMENT: f64 = 0.9;

/// Keep detections with score >= t, preserving input order.
pub fn threshold(dets: &[Detection], t: f64) -> Vec<Detection> {
    dets.iter().filter(|d| d.score >= t).cloned().collect()
}

/// Greedy non-maximum suppression: repeatedly keep the highest-scoring
/// remaining detection and discard every other detection whose IOU with it
/// exceeds `iou_thresh`. Ties broken by larger area, then input order.
/// Survivors are returned in keep (descending-score) order, unmodified.
pub fn nms(dets: &[Detection], iou_thresh: f64) -> Vec<Detection> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    // Stable sort: equal (score, area) keys stay in input order.
    order.sort_by(|&a, &b| {
        dets[b]
            .score
            .partial_cmp(&dets[a].score)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(
                dets[b]
                    .bbox
                    .area()
                    .partial_cmp(&dets[a].bbox.area())
                    .unwrap_or(core::cmp::Ordering::Equal),
            )
    });
    let mut kept: Vec<usize> = Vec::new();
    for &i in &order {
        if kept
            .iter()
            .all(|&k| dets[k].bbox.iou(&dets[i].bbox) <= iou_thresh)
        {
            kept.push(i);
        }
    }
    kept.into_iter().map(|i| dets[i].clone()).collect()
}

/// Two-pass aggregation over image-coordinate detections: NMS at
/// `iou_thresh`, then drop any survivor whose intersection with a
/// strictly-larger survivor covers at least `containment_thresh` of its own
/// area. Output boxes are always a subset of the input boxes.
pub fn merge_multiscale(
    dets: &[Detection],
    iou_thresh: f64,
    containment_thresh: f64,
) -> Vec<Detection> {
    let pass1 = nms(dets, iou_thresh);
    pass1
        .iter()
        .filter(|d| {
            !pass1.iter().any(|other| {
                other.bbox.area() > d.bbox.area()
                    && d.bbox.intersection_area(&other.bbox) / d.bbox.area()
                        >= containment_thresh
            })
        })
        .cloned()
        .collect()
}
