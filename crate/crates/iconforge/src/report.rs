//! Summary tables from saved evaluation reports, as Markdown or HTML.
//! Proposal and consistency reports share one table layout; hashtag reports
//! get their own.

use crate::error::{CliError, CliResult};
use serde::Deserialize;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Html,
}

/// The subset of the report files the tables need; `mode` dispatches.
#[derive(Debug, Deserialize)]
struct AnyReport {
    mode: String,
    #[serde(default)]
    precision: f64,
    #[serde(default)]
    recall: f64,
    #[serde(default)]
    f_beta: f64,
    #[serde(default)]
    map: Option<f64>,
    #[serde(default)]
    top1_precision: f64,
}

struct DetectionRow {
    name: String,
    precision: f64,
    recall: f64,
    f_beta: f64,
    map: f64,
}

struct HashtagRow {
    name: String,
    top1: f64,
    map: Option<f64>,
}

fn row_name(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("report")
        .to_string()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.1}")).unwrap_or_else(|| "-".into())
}

pub fn render_report(paths: &[impl AsRef<Path>], format: ReportFormat) -> CliResult<String> {
    let mut detections = Vec::new();
    let mut hashtags = Vec::new();
    for p in paths {
        let path = p.as_ref();
        let report: AnyReport = crate::formats::read_json(path)?;
        match report.mode.as_str() {
            "proposals" | "consistency" => detections.push(DetectionRow {
                name: row_name(path),
                precision: report.precision,
                recall: report.recall,
                f_beta: report.f_beta,
                map: report.map.unwrap_or(0.0),
            }),
            "hashtags" => hashtags.push(HashtagRow {
                name: row_name(path),
                top1: report.top1_precision,
                map: report.map,
            }),
            other => {
                return Err(CliError::in_file(
                    path,
                    format!("unknown report mode '{other}'"),
                ))
            }
        }
    }

    let mut out = String::new();
    match format {
        ReportFormat::Markdown => {
            if !detections.is_empty() {
                out.push_str("## Icon proposals\n\n");
                out.push_str("| Model | Prec. | Rec. | F0.3 | mAP |\n");
                out.push_str("|---|---|---|---|---|\n");
                for r in &detections {
                    writeln!(
                        out,
                        "| {} | {:.1} | {:.1} | {:.1} | {:.1} |",
                        r.name, r.precision, r.recall, r.f_beta, r.map
                    )
                    .expect("string write");
                }
                out.push('\n');
            }
            if !hashtags.is_empty() {
                out.push_str("## Visual hashtags\n\n");
                out.push_str("| Model | Top-1 | mAP |\n");
                out.push_str("|---|---|---|\n");
                for r in &hashtags {
                    writeln!(out, "| {} | {:.1} | {} |", r.name, r.top1, fmt_opt(r.map))
                        .expect("string write");
                }
                out.push('\n');
            }
        }
        ReportFormat::Html => {
            out.push_str("<html><body>\n");
            if !detections.is_empty() {
                out.push_str("<h2>Icon proposals</h2>\n<table>\n");
                out.push_str(
                    "<tr><th>Model</th><th>Prec.</th><th>Rec.</th><th>F0.3</th><th>mAP</th></tr>\n",
                );
                for r in &detections {
                    writeln!(
                        out,
                        "<tr><td>{}</td><td>{:.1}</td><td>{:.1}</td><td>{:.1}</td><td>{:.1}</td></tr>",
                        r.name, r.precision, r.recall, r.f_beta, r.map
                    )
                    .expect("string write");
                }
                out.push_str("</table>\n");
            }
            if !hashtags.is_empty() {
                out.push_str("<h2>Visual hashtags</h2>\n<table>\n");
                out.push_str("<tr><th>Model</th><th>Top-1</th><th>mAP</th></tr>\n");
                for r in &hashtags {
                    writeln!(
                        out,
                        "<tr><td>{}</td><td>{:.1}</td><td>{}</td></tr>",
                        r.name, r.top1, fmt_opt(r.map)
                    )
                    .expect("string write");
                }
                out.push_str("</table>\n");
            }
            out.push_str("</body></html>\n");
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::{
        write_json, EvalReportFile, HashtagReportFile, SCHEMA_VERSION,
    };

    fn sample_eval(dir: &Path, name: &str) -> std::path::PathBuf {
        let path = dir.join(name);
        write_json(
            &path,
            &EvalReportFile {
                schema_version: SCHEMA_VERSION,
                mode: "proposals".into(),
                precision: 13.6,
                recall: 7.1,
                f_beta: 12.6,
                map: 4.2,
                per_image: vec![],
                curve: vec![],
            },
        )
        .unwrap();
        path
    }

    #[test]
    fn markdown_table_lists_detection_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = sample_eval(dir.path(), "baseline.json");
        let md = render_report(&[&path], ReportFormat::Markdown).unwrap();
        assert!(md.contains("| Model | Prec. | Rec. | F0.3 | mAP |"));
        assert!(md.contains("| baseline | 13.6 | 7.1 | 12.6 | 4.2 |"));
    }

    #[test]
    fn hashtag_reports_get_their_own_table() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tags.json");
        write_json(
            &path,
            &HashtagReportFile {
                schema_version: SCHEMA_VERSION,
                mode: "hashtags".into(),
                top1_precision: 55.0,
                map: None,
                evaluated_pairs: 10,
                excluded: vec![],
            },
        )
        .unwrap();
        let md = render_report(&[&path], ReportFormat::Markdown).unwrap();
        assert!(md.contains("| Model | Top-1 | mAP |"));
        assert!(md.contains("| tags | 55.0 | - |"));
    }

    #[test]
    fn html_contains_a_table() {
        let dir = tempfile::tempdir().unwrap();
        let path = sample_eval(dir.path(), "m.json");
        let html = render_report(&[&path], ReportFormat::Html).unwrap();
        assert!(html.contains("<table>"));
        assert!(html.contains("<td>m</td>"));
    }
}
