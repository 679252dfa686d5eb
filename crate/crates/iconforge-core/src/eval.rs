//! Detection metrics: IOU matching at 0.5, precision/recall, the
//! beta-weighted F-measure, all-points average precision, hashtag top-1
//! precision, and annotator-consistency summaries.

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::proposals::Detection;
use alloc::string::String;
use alloc::vec::Vec;

/// Matching and scoring knobs. Evaluation consumes final proposals; no NMS
/// is applied here.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    /// Minimum IOU for a detection to claim a ground-truth box.
    pub iou_match: f64,
    /// Beta of the F-measure; < 1 weights precision above recall.
    pub beta: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            iou_match: 0.5,
            beta: 0.3,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.iou_match.is_finite() || self.iou_match <= 0.0 || self.iou_match > 1.0 {
            return Err(Error::InvalidParams {
                reason: "iou_match must lie in (0,1]",
            });
        }
        if !self.beta.is_finite() || self.beta <= 0.0 {
            return Err(Error::InvalidParams {
                reason: "beta must be positive",
            });
        }
        Ok(())
    }
}

/// Per-image detection/ground-truth counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerImageCounts {
    pub image_id: String,
    pub tp: u32,
    pub fp: u32,
    pub fn_count: u32,
}

/// Dataset-level report. precision/recall/f_beta/map are percentages in
/// [0,100]; the curve holds (recall, precision) fractions in [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
    pub map: f64,
    pub per_image: Vec<PerImageCounts>,
    pub curve: Vec<(f64, f64)>,
}

/// Intersection over union of two boxes.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    a.iou(b)
}

/// Per-detection TP flags and per-ground-truth matched flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchOutcome {
    pub det_is_tp: Vec<bool>,
    pub gt_matched: Vec<bool>,
}

/// Greedy VOC matching. `dets` must already be sorted by descending score;
/// each detection claims the unmatched ground-truth box of highest IOU when
/// that IOU reaches `iou_match` (ties to the lowest gt index). Each gt is
/// claimed at most once.
pub fn match_detections(dets: &[Detection], gts: &[BBox], iou_match: f64) -> MatchOutcome {
    debug_assert!(
        dets.windows(2).all(|p| p[0].score >= p[1].score),
        "detections must be sorted by descending score"
    );
    let mut gt_matched = alloc::vec![false; gts.len()];
    let mut det_is_tp = alloc::vec![false; dets.len()];
    for (di, det) in dets.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for (gi, gt) in gts.iter().enumerate() {
            if gt_matched[gi] {
                continue;
            }
            let v = det.bbox.iou(gt);
            if best.is_none_or(|(_, bv)| v > bv) {
                best = Some((gi, v));
            }
        }
        if let Some((gi, v)) = best {
            if v >= iou_match {
                gt_matched[gi] = true;
                det_is_tp[di] = true;
            }
        }
    }
    MatchOutcome {
        det_is_tp,
        gt_matched,
    }
}

/// F_beta = (1 + beta^2) P R / (beta^2 P + R); 0 when both P and R are 0.
/// Scale-invariant: fractions in and fractions out, percentages in and
/// percentages out.
pub fn f_measure(precision: f64, recall: f64, beta: f64) -> f64 {
    if precision == 0.0 && recall == 0.0 {
        return 0.0;
    }
    let b2 = beta * beta;
    (1.0 + b2) * precision * recall / (b2 * precision + recall)
}

/// All-points average precision over a ranked TP/FP flag list: precision is
/// made monotonically non-increasing from the right and integrated across
/// the recall steps. 0 when there are no ground truths or no detections.
pub fn ap_from_ranked_flags(flags: &[bool], num_gt: usize) -> f64 {
    if num_gt == 0 || flags.is_empty() {
        return 0.0;
    }
    let n = flags.len();
    let mut precisions = Vec::with_capacity(n);
    let mut recalls = Vec::with_capacity(n);
    let mut tp = 0usize;
    for (i, &flag) in flags.iter().enumerate() {
        if flag {
            tp += 1;
        }
        precisions.push(tp as f64 / (i + 1) as f64);
        recalls.push(tp as f64 / num_gt as f64);
    }
    // Right-to-left envelope.
    for i in (0..n - 1).rev() {
        if precisions[i] < precisions[i + 1] {
            precisions[i] = precisions[i + 1];
        }
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for i in 0..n {
        if flags[i] {
            ap += (recalls[i] - prev_recall) * precisions[i];
            prev_recall = recalls[i];
        }
    }
    ap
}

/// One image's proposals and ground truths.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalSet {
    pub image_id: String,
    pub dets: Vec<Detection>,
    pub gts: Vec<BBox>,
}

/// Class-agnostic dataset evaluation: per-image greedy matching, pooled
/// precision/recall/F, and AP over the globally ranked detections (score
/// ties broken by input order). Zero detections give precision 0; zero
/// ground truths give recall 0.
pub fn evaluate_proposals(sets: &[ProposalSet], config: &EvalConfig) -> Result<EvalReport> {
    config.validate()?;
    let mut per_image = Vec::with_capacity(sets.len());
    // (score, tp) across the dataset, later ranked globally.
    let mut pooled: Vec<(f64, bool)> = Vec::new();
    let mut total_gt = 0usize;

    for set in sets {
        let mut order: Vec<usize> = (0..set.dets.len()).collect();
        order.sort_by(|&a, &b| {
            set.dets[b]
                .score
                .partial_cmp(&set.dets[a].score)
                .unwrap_or(core::cmp::Ordering::Equal)
        });
        let sorted: Vec<Detection> = order.iter().map(|&i| set.dets[i].clone()).collect();
        let outcome = match_detections(&sorted, &set.gts, config.iou_match);
        let tp = outcome.det_is_tp.iter().filter(|&&t| t).count();
        per_image.push(PerImageCounts {
            image_id: set.image_id.clone(),
            tp: tp as u32,
            fp: (sorted.len() - tp) as u32,
            fn_count: (set.gts.len() - tp) as u32,
        });
        for (d, &flag) in sorted.iter().zip(&outcome.det_is_tp) {
            pooled.push((d.score, flag));
        }
        total_gt += set.gts.len();
    }

    let mut rank: Vec<usize> = (0..pooled.len()).collect();
    rank.sort_by(|&a, &b| {
        pooled[b]
            .0
            .partial_cmp(&pooled[a].0)
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let flags: Vec<bool> = rank.iter().map(|&i| pooled[i].1).collect();

    let total_tp = flags.iter().filter(|&&f| f).count();
    let total_det = flags.len();
    let precision = if total_det == 0 {
        0.0
    } else {
        total_tp as f64 / total_det as f64
    };
    let recall = if total_gt == 0 {
        0.0
    } else {
        total_tp as f64 / total_gt as f64
    };
    let ap = ap_from_ranked_flags(&flags, total_gt);

    let mut curve = Vec::with_capacity(flags.len());
    let mut tp_cum = 0usize;
    for (i, &f) in flags.iter().enumerate() {
        if f {
            tp_cum += 1;
        }
        let r = if total_gt == 0 {
            0.0
        } else {
            tp_cum as f64 / total_gt as f64
        };
        curve.push((r, tp_cum as f64 / (i + 1) as f64));
    }

    Ok(EvalReport {
        precision: precision * 100.0,
        recall: recall * 100.0,
        f_beta: f_measure(precision, recall, config.beta) * 100.0,
        map: ap * 100.0,
        per_image,
        curve,
    })
}

/// One image-tag pair: the single predicted hashtag box plus, optionally,
/// the full ranked proposal list behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct HashtagPair {
    pub image_id: String,
    pub tag: String,
    pub predicted: BBox,
    pub ranked: Vec<Detection>,
    pub gts: Vec<BBox>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HashtagReport {
    /// Percent of evaluated pairs whose predicted box overlaps some gt box
    /// at IOU strictly greater than 0.5.
    pub top1_precision: f64,
    /// Pooled AP (percent) over ranked per-pair proposals; None when no pair
    /// supplied a ranked list.
    pub map: Option<f64>,
    pub evaluated_pairs: usize,
    /// (image_id, tag) pairs without ground truth, excluded from both
    /// metrics.
    pub excluded: Vec<(String, String)>,
}

/// Hashtag evaluation. Matching is strict (IOU > 0.5 exactly as stated for
/// visual hashtags): a predicted box at IOU exactly 0.5 does not count.
pub fn evaluate_hashtags(pairs: &[HashtagPair]) -> HashtagReport {
    const STRICT_IOU: f64 = 0.5;
    let mut excluded = Vec::new();
    let mut evaluated = 0usize;
    let mut hits = 0usize;
    let mut pooled: Vec<(f64, bool)> = Vec::new();
    let mut total_gt = 0usize;
    let mut any_ranked = false;

    for pair in pairs {
        if pair.gts.is_empty() {
            excluded.push((pair.image_id.clone(), pair.tag.clone()));
            continue;
        }
        evaluated += 1;
        if pair.gts.iter().any(|gt| pair.predicted.iou(gt) > STRICT_IOU) {
            hits += 1;
        }
        if !pair.ranked.is_empty() {
            any_ranked = true;
            let mut order: Vec<usize> = (0..pair.ranked.len()).collect();
            order.sort_by(|&a, &b| {
                pair.ranked[b]
                    .score
                    .partial_cmp(&pair.ranked[a].score)
                    .unwrap_or(core::cmp::Ordering::Equal)
            });
            let mut gt_taken = alloc::vec![false; pair.gts.len()];
            for &i in &order {
                let det = &pair.ranked[i];
                let mut best: Option<(usize, f64)> = None;
                for (gi, gt) in pair.gts.iter().enumerate() {
                    if gt_taken[gi] {
                        continue;
                    }
                    let v = det.bbox.iou(gt);
                    if best.is_none_or(|(_, bv)| v > bv) {
                        best = Some((gi, v));
                    }
                }
                let tp = match best {
                    Some((gi, v)) if v > STRICT_IOU => {
                        gt_taken[gi] = true;
                        true
                    }
                    _ => false,
                };
                pooled.push((det.score, tp));
            }
            total_gt += pair.gts.len();
        }
    }

    let map = if any_ranked {
        let mut rank: Vec<usize> = (0..pooled.len()).collect();
        rank.sort_by(|&a, &b| {
            pooled[b]
                .0
                .partial_cmp(&pooled[a].0)
                .unwrap_or(core::cmp::Ordering::Equal)
        });
        let flags: Vec<bool> = rank.iter().map(|&i| pooled[i].1).collect();
        Some(ap_from_ranked_flags(&flags, total_gt) * 100.0)
    } else {
        None
    };

    HashtagReport {
        top1_precision: if evaluated == 0 {
            0.0
        } else {
            hits as f64 / evaluated as f64 * 100.0
        },
        map,
        evaluated_pairs: evaluated,
        excluded,
    }
}

/// One image's reference annotation plus the other annotators' sets.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyInput {
    pub image_id: String,
    pub reference: Vec<BBox>,
    pub annotators: Vec<(String, Vec<BBox>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairScore {
    pub image_id: String,
    pub annotator: String,
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
    pub ap: f64,
}

/// Means over (image, annotator) pairs, all percentages.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
    pub map: f64,
    pub per_pair: Vec<PairScore>,
}

/// Treat each annotator's boxes (unit scores, ranked in input order) as
/// predictions against the image's reference set and average the resulting
/// precision/recall/F/AP across all (image, annotator) pairs.
pub fn consistency(inputs: &[ConsistencyInput], config: &EvalConfig) -> Result<ConsistencyReport> {
    config.validate()?;
    if inputs.iter().any(|i| i.annotators.is_empty()) {
        return Err(Error::InvalidParams {
            reason: "each image needs a reference set and at least one annotator set",
        });
    }
    let mut per_pair = Vec::new();
    for input in inputs {
        for (annotator, boxes) in &input.annotators {
            let dets: Vec<Detection> =
                boxes.iter().map(|b| Detection::new(*b, 1.0)).collect();
            let outcome = match_detections(&dets, &input.reference, config.iou_match);
            let tp = outcome.det_is_tp.iter().filter(|&&t| t).count();
            let p = if dets.is_empty() {
                0.0
            } else {
                tp as f64 / dets.len() as f64
            };
            let r = if input.reference.is_empty() {
                0.0
            } else {
                tp as f64 / input.reference.len() as f64
            };
            per_pair.push(PairScore {
                image_id: input.image_id.clone(),
                annotator: annotator.clone(),
                precision: p * 100.0,
                recall: r * 100.0,
                f_beta: f_measure(p, r, config.beta) * 100.0,
                ap: ap_from_ranked_flags(&outcome.det_is_tp, input.reference.len()) * 100.0,
            });
        }
    }
    let n = per_pair.len().max(1) as f64;
    Ok(ConsistencyReport {
        precision: per_pair.iter().map(|p| p.precision).sum::<f64>() / n,
        recall: per_pair.iter().map(|p| p.recall).sum::<f64>() / n,
        f_beta: per_pair.iter().map(|p| p.f_beta).sum::<f64>() / n,
        map: per_pair.iter().map(|p| p.ap).sum::<f64>() / n,
        per_pair,
    })
}
