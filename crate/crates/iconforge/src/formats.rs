//! On-disk schemas. Every record we write carries `schema_version`; readers
//! accept records without one (treated as version 1) so hand-written
//! fixtures stay terse.

use crate::error::{CliError, CliResult};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

/// One icon in the pool manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IconManifestRecord {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub id: String,
    /// Image path, relative to the manifest file.
    pub path: String,
    pub tag: String,
    pub transparent: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WindowOrigin {
    pub x: u32,
    pub y: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotatedBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
    pub tag: String,
    pub icon_id: String,
}

/// One generated training window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleRecord {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    /// Relative to the dataset root.
    pub image_path: String,
    pub source_id: String,
    pub window_origin: WindowOrigin,
    pub boxes: Vec<AnnotatedBox>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TileRecord {
    pub id: String,
    pub level: u8,
    pub row: u32,
    pub col: u32,
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
    pub scale_x: f64,
    pub scale_y: f64,
}

/// Index written next to the rendered tile PNGs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TileIndexFile {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub image: String,
    pub width: u32,
    pub height: u32,
    pub levels: u8,
    pub tiles: Vec<TileRecord>,
}

/// Detector output in tile coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionRecord {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub tile_id: String,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_probs: Option<Vec<f64>>,
}

/// Final icon proposal in image coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProposalRecord {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub image_id: String,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_probs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PlainBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl PlainBox {
    pub fn to_bbox(self) -> iconforge_core::BBox {
        iconforge_core::BBox::new(self.x, self.y, self.w, self.h)
    }
}

/// Ground-truth boxes for one image. Accepts generated dataset annotations
/// directly (`image_path` aliases `image_id`; extra box fields ignored).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GtRecord {
    #[serde(alias = "image_path")]
    pub image_id: String,
    pub boxes: Vec<PlainBox>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankedBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub score: f64,
}

/// Predicted hashtag for one (image, tag) pair; `ranked` optionally carries
/// the full classified proposal list for AP.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HashtagPredRecord {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub image_id: String,
    pub tag: String,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    #[serde(default)]
    pub ranked: Vec<RankedBox>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HashtagGtRecord {
    pub image_id: String,
    pub tag: String,
    pub boxes: Vec<PlainBox>,
}

/// One annotator's boxes for one image (consistency mode predictions).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotatorRecord {
    pub image_id: String,
    pub annotator: String,
    pub boxes: Vec<PlainBox>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerImageJson {
    pub image_id: String,
    pub tp: u32,
    pub fp: u32,
    #[serde(rename = "fn")]
    pub fn_count: u32,
}

/// Proposal evaluation report (percent metrics).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReportFile {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub mode: String,
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
    pub map: f64,
    pub per_image: Vec<PerImageJson>,
    pub curve: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HashtagReportFile {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub mode: String,
    pub top1_precision: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<f64>,
    pub evaluated_pairs: usize,
    pub excluded: Vec<[String; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairScoreJson {
    pub image_id: String,
    pub annotator: String,
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
    pub ap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConsistencyReportFile {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub mode: String,
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
    pub map: f64,
    pub per_pair: Vec<PairScoreJson>,
}

/// OCR word bag for one image (produced externally).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OcrWordsFile {
    pub image_id: String,
    pub words: Vec<String>,
}

/// External per-proposal tag probabilities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbsRecord {
    pub proposal_id: String,
    pub probs: Vec<f64>,
}

/// Trained tag predictor plus its vocabulary, one self-contained file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TagModelFile {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub input_dim: usize,
    pub hidden: usize,
    pub output_dim: usize,
    pub vocab: Vec<String>,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TagScoreJson {
    pub tag: String,
    pub score: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HashtagJson {
    pub tag: String,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub class_prob: f64,
    pub proposal_index: usize,
}

/// Summarize output: predicted tags plus one visual hashtag per tag.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryRecord {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub image_id: String,
    pub tags: Vec<TagScoreJson>,
    pub hashtags: Vec<HashtagJson>,
    pub warnings: Vec<String>,
}

/// Parse a JSONL file, reporting the 1-based line number on failure.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> CliResult<Vec<T>> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line)
            .map_err(|e| CliError::in_file(path, format!("line {}: {e}", i + 1)))?;
        out.push(record);
    }
    Ok(out)
}

/// Write records as JSONL, one compact object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> CliResult<()> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)
            .map_err(|e| CliError::in_file(path, format!("serialize: {e}")))?;
        w.write_all(b"\n").map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::in_file(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::in_file(path, format!("serialize: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}
