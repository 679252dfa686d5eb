use iconforge_core::eval::{
    ap_from_ranked_flags, evaluate_proposals, f_measure, iou, match_detections, EvalConfig,
    ProposalSet,
};
use iconforge_core::geometry::BBox;
use iconforge_core::proposals::Detection;
use proptest::prelude::*;

fn arb_box() -> impl Strategy<Value = BBox> {
    (0.0f64..300.0, 0.0f64..300.0, 1.0f64..80.0, 1.0f64..80.0)
        .prop_map(|(x, y, w, h)| BBox::new(x, y, w, h))
}

/// Straight PR-curve integration: precision at each positive, stepped over
/// recall, with the same right-to-left precision envelope.
fn ap_oracle(flags: &[bool], num_gt: usize) -> f64 {
    if num_gt == 0 {
        return 0.0;
    }
    let mut prec = Vec::new();
    let mut rec = Vec::new();
    let mut tp = 0usize;
    for (i, &f) in flags.iter().enumerate() {
        if f {
            tp += 1;
        }
        prec.push(tp as f64 / (i + 1) as f64);
        rec.push(tp as f64 / num_gt as f64);
    }
    for i in (0..prec.len().saturating_sub(1)).rev() {
        if prec[i + 1] > prec[i] {
            prec[i] = prec[i + 1];
        }
    }
    let mut ap = 0.0;
    let mut prev_r = 0.0;
    for (p, r) in prec.iter().zip(&rec) {
        ap += (r - prev_r) * p;
        prev_r = *r;
    }
    ap
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn iou_is_symmetric_and_reflexive(a in arb_box(), b in arb_box()) {
        prop_assert_eq!(iou(&a, &b), iou(&b, &a));
        prop_assert!((iou(&a, &a) - 1.0).abs() < 1e-12);
        let v = iou(&a, &b);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v == 0.0, a.intersection_area(&b) == 0.0);
    }

    #[test]
    fn matching_never_reuses_ground_truth(
        boxes in prop::collection::vec(arb_box(), 0..12),
        gts in prop::collection::vec(arb_box(), 0..8),
    ) {
        // Score by reverse index so the list is sorted descending.
        let dets: Vec<Detection> = boxes
            .iter()
            .enumerate()
            .map(|(i, b)| Detection::new(*b, 1.0 - i as f64 * 0.01))
            .collect();
        let m = match_detections(&dets, &gts, 0.5);
        let tp = m.det_is_tp.iter().filter(|&&t| t).count();
        let matched = m.gt_matched.iter().filter(|&&t| t).count();
        prop_assert_eq!(tp, matched);
        prop_assert!(tp <= dets.len().min(gts.len()));
    }

    #[test]
    fn ap_agrees_with_the_pr_curve_oracle(
        flags in prop::collection::vec(any::<bool>(), 0..24),
        extra_gt in 0usize..6,
    ) {
        let tp = flags.iter().filter(|&&f| f).count();
        let num_gt = tp + extra_gt;
        let got = ap_from_ranked_flags(&flags, num_gt);
        let want = ap_oracle(&flags, num_gt);
        prop_assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn f_measure_is_bounded_and_degenerate_safe(
        p in 0.0f64..=1.0,
        r in 0.0f64..=1.0,
        beta in 0.1f64..3.0,
    ) {
        let f = f_measure(p, r, beta);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!(f <= p.max(r) + 1e-12);
        prop_assert_eq!(f_measure(0.0, 0.0, beta), 0.0);
    }

    #[test]
    fn report_counts_are_consistent(
        per_image in prop::collection::vec(
            (prop::collection::vec(arb_box(), 0..6), prop::collection::vec(arb_box(), 0..6)),
            1..5,
        ),
    ) {
        let sets: Vec<ProposalSet> = per_image
            .iter()
            .enumerate()
            .map(|(i, (dets, gts))| ProposalSet {
                image_id: format!("img{i}"),
                dets: dets.iter().map(|b| Detection::new(*b, 0.5)).collect(),
                gts: gts.clone(),
            })
            .collect();
        let report = evaluate_proposals(&sets, &EvalConfig::default()).unwrap();
        let dets_total: u32 = per_image.iter().map(|(d, _)| d.len() as u32).sum();
        let gts_total: u32 = per_image.iter().map(|(_, g)| g.len() as u32).sum();
        let tp: u32 = report.per_image.iter().map(|c| c.tp).sum();
        let fp: u32 = report.per_image.iter().map(|c| c.fp).sum();
        let fn_: u32 = report.per_image.iter().map(|c| c.fn_count).sum();
        prop_assert_eq!(tp + fp, dets_total);
        prop_assert_eq!(tp + fn_, gts_total);
        prop_assert!(report.precision >= 0.0 && report.precision <= 100.0);
        prop_assert!(report.recall >= 0.0 && report.recall <= 100.0);
        prop_assert!(report.map >= 0.0 && report.map <= 100.0);
    }
}
