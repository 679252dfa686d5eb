//! Detection ingestion: validate per-tile detection records against a tile
//! index and map them back to image coordinates.

use crate::error::{CliError, CliResult};
use crate::formats::{DetectionRecord, TileIndexFile, TileRecord};
use iconforge_core::geometry::{BBox, PixelRect};
use iconforge_core::proposals::Detection;
use iconforge_core::tiler::{unmap, TileGeom};
use std::collections::BTreeMap;
use std::path::Path;

pub fn tile_geom(record: &TileRecord) -> TileGeom {
    TileGeom {
        level: record.level,
        row: record.row,
        col: record.col,
        region: PixelRect::new(record.x, record.y, record.w, record.h),
        scale_x: record.scale_x,
        scale_y: record.scale_y,
    }
}

/// Accepts either the index file itself or the directory holding
/// `tiles.json`.
pub fn load_tile_index(path: &Path) -> CliResult<TileIndexFile> {
    let file = if path.is_dir() {
        path.join("tiles.json")
    } else {
        path.to_path_buf()
    };
    let index: TileIndexFile = crate::formats::read_json(&file)?;
    if index.tiles.is_empty() {
        return Err(CliError::in_file(&file, "tile index lists no tiles"));
    }
    Ok(index)
}

/// Validate detection records line by line and unmap them into image
/// coordinates. `expected_probs` fixes the class_probs length when some
/// record declares one.
pub fn ingest_detections(
    dets_path: &Path,
    index: &TileIndexFile,
) -> CliResult<Vec<Detection>> {
    let records: Vec<DetectionRecord> = crate::formats::read_jsonl(dets_path)?;
    let geoms: BTreeMap<String, TileGeom> = index
        .tiles
        .iter()
        .map(|t| (t.id.clone(), tile_geom(t)))
        .collect();

    let mut out = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        let line = i + 1;
        let fail = |msg: String| CliError::in_file(dets_path, format!("line {line}: {msg}"));
        let geom = geoms
            .get(&rec.tile_id)
            .ok_or_else(|| fail(format!("unknown tile id '{}'", rec.tile_id)))?;
        let det = Detection {
            bbox: BBox::new(rec.x, rec.y, rec.w, rec.h),
            score: rec.score,
            class_probs: rec.class_probs.clone(),
        };
        det.validate(rec.class_probs.as_ref().map(|p| p.len()))
            .map_err(|e| fail(e.to_string()))?;
        let mapped = unmap(std::slice::from_ref(&det), geom)
            .map_err(|e| fail(e.to_string()))?;
        out.extend(mapped);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::{write_jsonl, SCHEMA_VERSION};

    fn index() -> TileIndexFile {
        TileIndexFile {
            schema_version: SCHEMA_VERSION,
            image: "img.png".into(),
            width: 1200,
            height: 1200,
            levels: 1,
            tiles: vec![TileRecord {
                id: "l1r0c0".into(),
                level: 1,
                row: 0,
                col: 0,
                x: 0,
                y: 0,
                w: 1200,
                h: 1200,
                scale_x: 0.5,
                scale_y: 0.5,
            }],
        }
    }

    fn record(tile_id: &str, score: f64) -> DetectionRecord {
        DetectionRecord {
            schema_version: SCHEMA_VERSION,
            tile_id: tile_id.into(),
            x: 30.0,
            y: 60.0,
            w: 90.0,
            h: 120.0,
            score,
            class_probs: None,
        }
    }

    #[test]
    fn full_tile_box_spans_the_image() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dets.jsonl");
        let mut rec = record("l1r0c0", 0.9);
        rec.x = 0.0;
        rec.y = 0.0;
        rec.w = 600.0;
        rec.h = 600.0;
        write_jsonl(&path, &[rec]).unwrap();
        let dets = ingest_detections(&path, &index()).unwrap();
        assert_eq!(dets.len(), 1);
        assert_eq!(
            (dets[0].bbox.x, dets[0].bbox.y, dets[0].bbox.w, dets[0].bbox.h),
            (0.0, 0.0, 1200.0, 1200.0)
        );
    }

    #[test]
    fn empty_file_is_an_empty_set() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dets.jsonl");
        std::fs::write(&path, "").unwrap();
        assert!(ingest_detections(&path, &index()).unwrap().is_empty());
    }

    #[test]
    fn bad_records_name_their_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dets.jsonl");

        write_jsonl(&path, &[record("l9r9c9", 0.5)]).unwrap();
        let err = ingest_detections(&path, &index()).unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
        assert!(err.to_string().contains("l9r9c9"));

        write_jsonl(&path, &[record("l1r0c0", 0.4), record("l1r0c0", 1.3)]).unwrap();
        let err = ingest_detections(&path, &index()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");

        let mut oob = record("l1r0c0", 0.5);
        oob.x = 580.0;
        oob.w = 40.0;
        write_jsonl(&path, &[oob]).unwrap();
        let err = ingest_detections(&path, &index()).unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn unnormalized_probs_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dets.jsonl");
        let mut rec = record("l1r0c0", 0.5);
        rec.class_probs = Some(vec![0.9, 0.9]);
        write_jsonl(&path, &[rec]).unwrap();
        let err = ingest_detections(&path, &index()).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
