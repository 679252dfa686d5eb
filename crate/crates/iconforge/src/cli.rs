//! Subcommand surface. Exit codes: 0 success, 1 validation/usage error,
//! 2 I/O error (always naming the path).

use crate::config::GenConfig;
use crate::dataset::{self, GenMode};
use crate::error::{CliError, CliResult};
use crate::formats::{
    self, read_jsonl, write_json, write_jsonl, AnnotatorRecord, ConsistencyReportFile,
    DetectionRecord, EvalReportFile, GtRecord, HashtagGtRecord, HashtagJson, HashtagPredRecord,
    HashtagReportFile, OcrWordsFile, PairScoreJson, PerImageJson, ProposalRecord, SummaryRecord,
    TagScoreJson, TileIndexFile, TileRecord, SCHEMA_VERSION,
};
use crate::imgio::{load_image, save_png};
use crate::ingest::{ingest_detections, load_tile_index};
use crate::model::{load_embeddings, load_tag_model};
use crate::overlay::{render_overlay, BoxLabel, OverlayLayers};
use crate::report::{render_report, ReportFormat};
use clap::{Args, Parser, Subcommand, ValueEnum};
use iconforge_core::aggregate::{
    merge_multiscale, threshold, DEFAULT_CONTAINMENT, DEFAULT_NMS_IOU, DEFAULT_SCORE_THRESHOLD,
};
use iconforge_core::eval::{
    consistency, evaluate_hashtags, evaluate_proposals, ConsistencyInput, EvalConfig, HashtagPair,
    ProposalSet,
};
use iconforge_core::geometry::{BBox, PixelRect};
use iconforge_core::proposals::{baseline_propose, Detection};
use iconforge_core::summarize::{summarize, HistogramClassifier, IconClassifier};
use iconforge_core::tiler::{tile_with_levels, DEFAULT_LEVELS, TILE_RENDER_SIZE};
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "iconforge", version, about = "Icon proposals and infographic summaries")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic training dataset
    Gen(GenArgs),
    /// Cut an image into multi-scale 600x600 tiles
    Tile(TileArgs),
    /// Run the built-in edge-based proposer over rendered tiles
    ProposeBaseline(ProposeArgs),
    /// Merge per-tile detections into final image-space proposals
    Aggregate(AggregateArgs),
    /// Score predictions against ground truth
    Eval(EvalArgs),
    /// Predict tags and visual hashtags for one image
    Summarize(SummarizeArgs),
    /// Render saved evaluation reports as a summary table
    Report(ReportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BaselineMode {
    RandomLocations,
    NontransparentIcons,
    BlankBackground,
}

#[derive(Args)]
struct GenArgs {
    /// Directory of source infographics (PNG/JPEG)
    #[arg(long)]
    corpus: PathBuf,
    /// Icon manifest JSONL
    #[arg(long)]
    icons: PathBuf,
    /// TOML parameter file (defaults used when omitted)
    #[arg(long)]
    params: Option<PathBuf>,
    /// Number of windows to generate
    #[arg(long)]
    n: u64,
    /// Output dataset directory
    #[arg(long)]
    out: PathBuf,
    /// Ablation mode with one gate disabled
    #[arg(long, value_enum)]
    baseline: Option<BaselineMode>,
    /// RNG seed (overrides the params file)
    #[arg(long)]
    seed: Option<u64>,
    /// Override: icons per window
    #[arg(long)]
    icons_per_window: Option<u32>,
    /// Override: entropy gate threshold
    #[arg(long)]
    entropy_threshold: Option<f64>,
    /// Override: contrast gate threshold
    #[arg(long)]
    contrast_threshold: Option<f64>,
}

#[derive(Args)]
struct TileArgs {
    /// Input image
    #[arg(long)]
    image: PathBuf,
    /// Output directory for tile PNGs and tiles.json
    #[arg(long)]
    out: PathBuf,
    /// Pyramid depth (level n is an n x n grid)
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    levels: u8,
}

#[derive(Args)]
struct ProposeArgs {
    /// Tile directory (or tiles.json path) produced by `tile`
    #[arg(long)]
    tiles: PathBuf,
    /// Output detections JSONL (tile coordinates)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AggregateArgs {
    /// Detections JSONL in tile coordinates
    #[arg(long)]
    dets: PathBuf,
    /// Tile index from `tile`
    #[arg(long)]
    tiles: PathBuf,
    /// Output proposals JSONL (image coordinates)
    #[arg(long)]
    out: PathBuf,
    /// Minimum detection score
    #[arg(long, default_value_t = DEFAULT_SCORE_THRESHOLD)]
    threshold: f64,
    /// NMS IOU threshold
    #[arg(long, default_value_t = DEFAULT_NMS_IOU)]
    nms_iou: f64,
    /// Containment fraction absorbing contained boxes
    #[arg(long, default_value_t = DEFAULT_CONTAINMENT)]
    containment: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvalMode {
    Proposals,
    Hashtags,
    Consistency,
}

#[derive(Args)]
struct EvalArgs {
    /// Predictions file (JSONL; shape depends on --mode)
    #[arg(long)]
    pred: PathBuf,
    /// Ground truth file (JSONL; shape depends on --mode)
    #[arg(long)]
    gt: PathBuf,
    #[arg(long, value_enum, default_value_t = EvalMode::Proposals)]
    mode: EvalMode,
    /// Write the full report as JSON
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IconBackend {
    /// Probabilities looked up in --probs (or embedded in the proposals)
    File,
    /// Built-in color-histogram nearest-exemplar classifier
    Baseline,
}

#[derive(Args)]
struct SummarizeArgs {
    /// The infographic being summarized
    #[arg(long)]
    image: PathBuf,
    /// OCR word bag JSON ({image_id, words})
    #[arg(long)]
    words: PathBuf,
    /// Final proposals JSONL from `aggregate`
    #[arg(long)]
    proposals: PathBuf,
    /// Trained tag model JSON
    #[arg(long)]
    tag_model: PathBuf,
    /// Word embedding table (text: word v1 .. vD)
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long, value_enum)]
    icon_backend: IconBackend,
    /// Per-proposal probabilities JSONL (file backend)
    #[arg(long)]
    probs: Option<PathBuf>,
    /// Icon manifest for the baseline backend's exemplars
    #[arg(long)]
    icons: Option<PathBuf>,
    /// Number of tags to predict
    #[arg(long, default_value_t = 5)]
    top_k: usize,
    /// Write the summary JSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Render an annotated overlay PNG
    #[arg(long)]
    overlay: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Md,
    Html,
}

#[derive(Args)]
struct ReportArgs {
    /// Evaluation report JSON files (repeatable)
    #[arg(long, required = true, num_args = 1..)]
    eval: Vec<PathBuf>,
    /// Write the table here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Md)]
    format: FormatArg,
}

/// Parse and dispatch. Usage problems exit 1 (help/version exit 0);
/// execution failures map to the `CliError` split.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.cmd {
        Cmd::Gen(args) => cmd_gen(args),
        Cmd::Tile(args) => cmd_tile(args),
        Cmd::ProposeBaseline(args) => cmd_propose_baseline(args),
        Cmd::Aggregate(args) => cmd_aggregate(args),
        Cmd::Eval(args) => cmd_eval(args),
        Cmd::Summarize(args) => cmd_summarize(args),
        Cmd::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn cmd_gen(args: GenArgs) -> CliResult<()> {
    let mut config = match &args.params {
        Some(path) => GenConfig::load(path)?,
        None => GenConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.rng_seed = seed;
    }
    if let Some(v) = args.icons_per_window {
        config.icons_per_window = v;
    }
    if let Some(v) = args.entropy_threshold {
        config.entropy_threshold = v;
    }
    if let Some(v) = args.contrast_threshold {
        config.contrast_threshold = v;
    }
    let params = config.to_params();
    params.validate()?;

    let mode = match args.baseline {
        None => GenMode::Standard,
        Some(BaselineMode::RandomLocations) => GenMode::RandomLocations,
        Some(BaselineMode::NontransparentIcons) => GenMode::NontransparentIcons,
        Some(BaselineMode::BlankBackground) => GenMode::BlankBackground,
    };

    let (corpus, pool) = if args.n == 0 {
        (Vec::new(), Vec::new())
    } else {
        let all_icons = dataset::load_icon_pool(&args.icons)?;
        let pool = dataset::select_pool(&all_icons, mode)?;
        let corpus = if mode == GenMode::BlankBackground {
            Vec::new()
        } else {
            dataset::load_corpus(&args.corpus)?
        };
        (corpus, pool)
    };

    let stats = dataset::generate_dataset(&corpus, &pool, &params, mode, args.n, &args.out)?;
    println!(
        "gen: wrote {} samples ({} boxes) to {}",
        stats.samples,
        stats.boxes,
        args.out.display()
    );
    Ok(())
}

fn cmd_tile(args: TileArgs) -> CliResult<()> {
    if args.levels == 0 {
        return Err(CliError::invalid("--levels must be at least 1"));
    }
    let img = load_image(&args.image)?;
    let tiles = tile_with_levels(&img, args.levels);
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let mut records = Vec::with_capacity(tiles.len());
    for t in &tiles {
        save_png(&args.out.join(format!("{}.png", t.geom.id())), &t.rendered)?;
        records.push(TileRecord {
            id: t.geom.id(),
            level: t.geom.level,
            row: t.geom.row,
            col: t.geom.col,
            x: t.geom.region.x,
            y: t.geom.region.y,
            w: t.geom.region.w,
            h: t.geom.region.h,
            scale_x: t.geom.scale_x,
            scale_y: t.geom.scale_y,
        });
    }
    let count = records.len();
    let index = TileIndexFile {
        schema_version: SCHEMA_VERSION,
        image: args.image.display().to_string(),
        width: img.width(),
        height: img.height(),
        levels: args.levels,
        tiles: records,
    };
    write_json(&args.out.join("tiles.json"), &index)?;
    println!("tile: wrote {} tiles to {}", count, args.out.display());
    Ok(())
}

fn cmd_propose_baseline(args: ProposeArgs) -> CliResult<()> {
    let index = load_tile_index(&args.tiles)?;
    let tile_dir = if args.tiles.is_dir() {
        args.tiles.clone()
    } else {
        args.tiles
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."))
    };
    let per_tile: Vec<Vec<DetectionRecord>> = index
        .tiles
        .par_iter()
        .map(|t| -> CliResult<Vec<DetectionRecord>> {
            let path = tile_dir.join(format!("{}.png", t.id));
            let tile = load_image(&path)?;
            if tile.width() != TILE_RENDER_SIZE || tile.height() != TILE_RENDER_SIZE {
                return Err(CliError::in_file(
                    &path,
                    format!(
                        "tile must be {TILE_RENDER_SIZE}x{TILE_RENDER_SIZE}, got {}x{}",
                        tile.width(),
                        tile.height()
                    ),
                ));
            }
            let dets = baseline_propose(&tile)?;
            Ok(dets
                .into_iter()
                .map(|d| DetectionRecord {
                    schema_version: SCHEMA_VERSION,
                    tile_id: t.id.clone(),
                    x: d.bbox.x,
                    y: d.bbox.y,
                    w: d.bbox.w,
                    h: d.bbox.h,
                    score: d.score,
                    class_probs: None,
                })
                .collect())
        })
        .collect::<CliResult<_>>()?;
    let records: Vec<DetectionRecord> = per_tile.into_iter().flatten().collect();
    write_jsonl(&args.out, &records)?;
    println!(
        "propose-baseline: {} detections over {} tiles",
        records.len(),
        index.tiles.len()
    );
    Ok(())
}

fn image_id_of(index: &TileIndexFile) -> String {
    Path::new(&index.image)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("image")
        .to_string()
}

fn cmd_aggregate(args: AggregateArgs) -> CliResult<()> {
    if !(0.0..=1.0).contains(&args.threshold) {
        return Err(CliError::invalid("--threshold must lie in [0,1]"));
    }
    if !(0.0..1.0).contains(&args.nms_iou) {
        return Err(CliError::invalid("--nms-iou must lie in [0,1)"));
    }
    if !(0.0..=1.0).contains(&args.containment) {
        return Err(CliError::invalid("--containment must lie in [0,1]"));
    }
    let index = load_tile_index(&args.tiles)?;
    let dets = ingest_detections(&args.dets, &index)?;
    let kept = threshold(&dets, args.threshold);
    let merged = merge_multiscale(&kept, args.nms_iou, args.containment);
    let image_id = image_id_of(&index);
    let records: Vec<ProposalRecord> = merged
        .iter()
        .map(|d| ProposalRecord {
            schema_version: SCHEMA_VERSION,
            image_id: image_id.clone(),
            x: d.bbox.x,
            y: d.bbox.y,
            w: d.bbox.w,
            h: d.bbox.h,
            score: d.score,
            class_probs: d.class_probs.clone(),
        })
        .collect();
    write_jsonl(&args.out, &records)?;
    println!(
        "aggregate: {} detections -> {} proposals for '{image_id}'",
        dets.len(),
        records.len()
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> CliResult<()> {
    match args.mode {
        EvalMode::Proposals => eval_proposals(&args),
        EvalMode::Hashtags => eval_hashtags(&args),
        EvalMode::Consistency => eval_consistency(&args),
    }
}

fn eval_proposals(args: &EvalArgs) -> CliResult<()> {
    let preds: Vec<ProposalRecord> = read_jsonl(&args.pred)?;
    let gts: Vec<GtRecord> = read_jsonl(&args.gt)?;

    let mut gt_map: BTreeMap<String, Vec<BBox>> = BTreeMap::new();
    for g in &gts {
        gt_map
            .entry(g.image_id.clone())
            .or_default()
            .extend(g.boxes.iter().map(|b| b.to_bbox()));
    }
    let mut det_map: BTreeMap<String, Vec<Detection>> = BTreeMap::new();
    for (i, p) in preds.iter().enumerate() {
        let det = Detection {
            bbox: BBox::new(p.x, p.y, p.w, p.h),
            score: p.score,
            class_probs: p.class_probs.clone(),
        };
        det.validate(p.class_probs.as_ref().map(|v| v.len()))
            .map_err(|e| CliError::in_file(&args.pred, format!("line {}: {e}", i + 1)))?;
        det_map.entry(p.image_id.clone()).or_default().push(det);
    }
    let unknown: Vec<&String> = det_map
        .keys()
        .filter(|id| !gt_map.contains_key(*id))
        .collect();
    if !unknown.is_empty() {
        let list: Vec<&str> = unknown.iter().map(|s| s.as_str()).collect();
        return Err(CliError::invalid(format!(
            "predictions reference image ids missing from ground truth: {}",
            list.join(", ")
        )));
    }

    let sets: Vec<ProposalSet> = gt_map
        .into_iter()
        .map(|(image_id, gts)| ProposalSet {
            dets: det_map.remove(&image_id).unwrap_or_default(),
            image_id,
            gts,
        })
        .collect();
    let report = evaluate_proposals(&sets, &EvalConfig::default())?;
    println!(
        "proposals: precision {:.1} recall {:.1} F0.3 {:.1} mAP {:.1} over {} images",
        report.precision,
        report.recall,
        report.f_beta,
        report.map,
        report.per_image.len()
    );
    if let Some(out) = &args.report {
        write_json(
            out,
            &EvalReportFile {
                schema_version: SCHEMA_VERSION,
                mode: "proposals".into(),
                precision: report.precision,
                recall: report.recall,
                f_beta: report.f_beta,
                map: report.map,
                per_image: report
                    .per_image
                    .iter()
                    .map(|c| PerImageJson {
                        image_id: c.image_id.clone(),
                        tp: c.tp,
                        fp: c.fp,
                        fn_count: c.fn_count,
                    })
                    .collect(),
                curve: report.curve.iter().map(|&(r, p)| [r, p]).collect(),
            },
        )?;
    }
    Ok(())
}

fn eval_hashtags(args: &EvalArgs) -> CliResult<()> {
    let preds: Vec<HashtagPredRecord> = read_jsonl(&args.pred)?;
    let gts: Vec<HashtagGtRecord> = read_jsonl(&args.gt)?;

    let mut gt_map: BTreeMap<(String, String), Vec<BBox>> = BTreeMap::new();
    for g in &gts {
        gt_map
            .entry((g.image_id.clone(), g.tag.clone()))
            .or_default()
            .extend(g.boxes.iter().map(|b| b.to_bbox()));
    }
    let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
    let mut pairs = Vec::with_capacity(preds.len());
    for (i, p) in preds.iter().enumerate() {
        let key = (p.image_id.clone(), p.tag.clone());
        if !seen.insert(key.clone()) {
            return Err(CliError::in_file(
                &args.pred,
                format!(
                    "line {}: duplicate prediction for ({}, {})",
                    i + 1,
                    p.image_id,
                    p.tag
                ),
            ));
        }
        pairs.push(HashtagPair {
            image_id: p.image_id.clone(),
            tag: p.tag.clone(),
            predicted: BBox::new(p.x, p.y, p.w, p.h),
            ranked: p
                .ranked
                .iter()
                .map(|r| Detection::new(BBox::new(r.x, r.y, r.w, r.h), r.score))
                .collect(),
            gts: gt_map.get(&key).cloned().unwrap_or_default(),
        });
    }
    let report = evaluate_hashtags(&pairs);
    match report.map {
        Some(map) => println!(
            "hashtags: top-1 precision {:.1} mAP {:.1} over {} pairs ({} excluded)",
            report.top1_precision,
            map,
            report.evaluated_pairs,
            report.excluded.len()
        ),
        None => println!(
            "hashtags: top-1 precision {:.1} over {} pairs ({} excluded)",
            report.top1_precision,
            report.evaluated_pairs,
            report.excluded.len()
        ),
    }
    if let Some(out) = &args.report {
        write_json(
            out,
            &HashtagReportFile {
                schema_version: SCHEMA_VERSION,
                mode: "hashtags".into(),
                top1_precision: report.top1_precision,
                map: report.map,
                evaluated_pairs: report.evaluated_pairs,
                excluded: report
                    .excluded
                    .iter()
                    .map(|(i, t)| [i.clone(), t.clone()])
                    .collect(),
            },
        )?;
    }
    Ok(())
}

fn eval_consistency(args: &EvalArgs) -> CliResult<()> {
    let refs: Vec<GtRecord> = read_jsonl(&args.gt)?;
    let annotators: Vec<AnnotatorRecord> = read_jsonl(&args.pred)?;

    let mut ref_map: BTreeMap<String, Vec<BBox>> = BTreeMap::new();
    for r in &refs {
        ref_map
            .entry(r.image_id.clone())
            .or_default()
            .extend(r.boxes.iter().map(|b| b.to_bbox()));
    }
    let mut ann_map: BTreeMap<String, Vec<(String, Vec<BBox>)>> = BTreeMap::new();
    for a in &annotators {
        if !ref_map.contains_key(&a.image_id) {
            return Err(CliError::invalid(format!(
                "annotator '{}' references image '{}' absent from the reference set",
                a.annotator, a.image_id
            )));
        }
        ann_map.entry(a.image_id.clone()).or_default().push((
            a.annotator.clone(),
            a.boxes.iter().map(|b| b.to_bbox()).collect(),
        ));
    }
    let missing: Vec<&String> = ref_map
        .keys()
        .filter(|id| !ann_map.contains_key(*id))
        .collect();
    if !missing.is_empty() {
        let list: Vec<&str> = missing.iter().map(|s| s.as_str()).collect();
        return Err(CliError::invalid(format!(
            "reference images without annotator sets: {}",
            list.join(", ")
        )));
    }

    let inputs: Vec<ConsistencyInput> = ref_map
        .into_iter()
        .map(|(image_id, reference)| ConsistencyInput {
            annotators: ann_map.remove(&image_id).expect("checked above"),
            image_id,
            reference,
        })
        .collect();
    let report = consistency(&inputs, &EvalConfig::default())?;
    println!(
        "consistency: precision {:.1} recall {:.1} F0.3 {:.1} mAP {:.1} over {} annotator sets",
        report.precision,
        report.recall,
        report.f_beta,
        report.map,
        report.per_pair.len()
    );
    if let Some(out) = &args.report {
        write_json(
            out,
            &ConsistencyReportFile {
                schema_version: SCHEMA_VERSION,
                mode: "consistency".into(),
                precision: report.precision,
                recall: report.recall,
                f_beta: report.f_beta,
                map: report.map,
                per_pair: report
                    .per_pair
                    .iter()
                    .map(|p| PairScoreJson {
                        image_id: p.image_id.clone(),
                        annotator: p.annotator.clone(),
                        precision: p.precision,
                        recall: p.recall,
                        f_beta: p.f_beta,
                        ap: p.ap,
                    })
                    .collect(),
            },
        )?;
    }
    Ok(())
}

/// Clamp a proposal box to the image and crop it for classification.
fn crop_proposal(
    image: &iconforge_core::imaging::RasterImage,
    b: &BBox,
) -> CliResult<iconforge_core::imaging::RasterImage> {
    let x0 = b.x.round().max(0.0) as u32;
    let y0 = b.y.round().max(0.0) as u32;
    let x1 = (b.right().round() as i64).clamp(0, image.width() as i64) as u32;
    let y1 = (b.bottom().round() as i64).clamp(0, image.height() as i64) as u32;
    if x1 <= x0 || y1 <= y0 {
        return Err(CliError::invalid(format!(
            "proposal ({}, {}, {}, {}) lies outside the image",
            b.x, b.y, b.w, b.h
        )));
    }
    image
        .crop(PixelRect::new(x0, y0, x1 - x0, y1 - y0))
        .map_err(CliError::from)
}

fn cmd_summarize(args: SummarizeArgs) -> CliResult<()> {
    if args.top_k == 0 {
        return Err(CliError::invalid("--top-k must be at least 1"));
    }
    let words_file: OcrWordsFile = formats::read_json(&args.words)?;
    let table = load_embeddings(&args.embeddings)?;
    let (model, vocab) = load_tag_model(&args.tag_model)?;
    if table.dimension() != model.input_dim {
        return Err(CliError::invalid(format!(
            "embedding dimension {} does not match the model's input dimension {}",
            table.dimension(),
            model.input_dim
        )));
    }
    let image = load_image(&args.image)?;

    let all_records: Vec<ProposalRecord> = read_jsonl(&args.proposals)?;
    let mine: Vec<(usize, &ProposalRecord)> = all_records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.image_id == words_file.image_id)
        .collect();

    let mut extra_warnings = Vec::new();
    if mine.is_empty() && !all_records.is_empty() {
        extra_warnings.push(format!(
            "no proposals for image '{}' in {}",
            words_file.image_id,
            args.proposals.display()
        ));
    }

    let dets: Vec<Detection> = match args.icon_backend {
        IconBackend::File => {
            let probs_map: BTreeMap<String, Vec<f64>> = match &args.probs {
                Some(path) => read_jsonl::<formats::ProbsRecord>(path)?
                    .into_iter()
                    .map(|r| (r.proposal_id, r.probs))
                    .collect(),
                None => BTreeMap::new(),
            };
            mine.iter()
                .map(|(line, r)| -> CliResult<Detection> {
                    let probs = match &r.class_probs {
                        Some(p) => p.clone(),
                        None => {
                            let key = format!("p{line}");
                            probs_map.get(&key).cloned().ok_or_else(|| {
                                CliError::invalid(format!(
                                    "no probabilities for proposal '{key}'; \
                                     supply --probs or embed class_probs"
                                ))
                            })?
                        }
                    };
                    let det =
                        Detection::with_probs(BBox::new(r.x, r.y, r.w, r.h), r.score, probs);
                    det.validate(Some(vocab.len())).map_err(CliError::from)?;
                    Ok(det)
                })
                .collect::<CliResult<_>>()?
        }
        IconBackend::Baseline => {
            let manifest = args.icons.as_ref().ok_or_else(|| {
                CliError::invalid("--icon-backend baseline requires --icons MANIFEST")
            })?;
            let pool = dataset::load_icon_pool(manifest)?;
            let known: Vec<_> = pool
                .into_iter()
                .filter(|a| vocab.index_of(&a.tag).is_some())
                .collect();
            if known.is_empty() {
                return Err(CliError::invalid(
                    "no manifest icon carries a tag from the model vocabulary",
                ));
            }
            let classifier = HistogramClassifier::from_pool(&known, &vocab)?;
            mine.iter()
                .map(|(line, r)| -> CliResult<Detection> {
                    let bbox = BBox::new(r.x, r.y, r.w, r.h);
                    let crop = crop_proposal(&image, &bbox)?;
                    let probs = classifier.classify(&format!("p{line}"), &crop)?;
                    Ok(Detection::with_probs(bbox, r.score, probs))
                })
                .collect::<CliResult<_>>()?
        }
    };

    let word_refs: Vec<&str> = words_file.words.iter().map(|s| s.as_str()).collect();
    let mut summary = summarize(
        &words_file.image_id,
        &word_refs,
        &table,
        &model,
        &vocab,
        args.top_k,
        &dets,
    )?;
    summary.warnings.extend(extra_warnings);

    let record = SummaryRecord {
        schema_version: SCHEMA_VERSION,
        image_id: summary.image_id.clone(),
        tags: summary
            .tags
            .iter()
            .map(|(tag, score)| TagScoreJson {
                tag: tag.clone(),
                score: *score,
            })
            .collect(),
        hashtags: summary
            .hashtags
            .iter()
            .map(|h| HashtagJson {
                tag: h.tag.clone(),
                x: h.bbox.x,
                y: h.bbox.y,
                w: h.bbox.w,
                h: h.bbox.h,
                class_prob: h.class_prob,
                proposal_index: h.proposal_index,
            })
            .collect(),
        warnings: summary.warnings.clone(),
    };
    match &args.out {
        Some(path) => write_jsonl(path, &[record])?,
        None => println!(
            "{}",
            serde_json::to_string(&record)
                .map_err(|e| CliError::invalid(format!("serialize summary: {e}")))?
        ),
    }

    if let Some(overlay_path) = &args.overlay {
        let layers = OverlayLayers {
            proposals: dets
                .iter()
                .map(|d| BoxLabel {
                    bbox: d.bbox,
                    label: String::new(),
                })
                .collect(),
            hashtags: summary
                .hashtags
                .iter()
                .map(|h| BoxLabel {
                    bbox: h.bbox,
                    label: h.tag.clone(),
                })
                .collect(),
            ..Default::default()
        };
        let (rendered, warnings) = render_overlay(&image, &layers);
        for w in warnings {
            eprintln!("overlay: {w}");
        }
        save_png(overlay_path, &rendered)?;
    }
    Ok(())
}

fn cmd_report(args: ReportArgs) -> CliResult<()> {
    let format = match args.format {
        FormatArg::Md => ReportFormat::Markdown,
        FormatArg::Html => ReportFormat::Html,
    };
    let text = render_report(&args.eval, format)?;
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e))?,
        None => print!("{text}"),
    }
    Ok(())
}
