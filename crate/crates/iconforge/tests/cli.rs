//! End-to-end checks of the installed binary: exit codes, file artifacts,
//! and rerun determinism.

use iconforge::formats::{self, IconManifestRecord, SampleRecord, SummaryRecord, TileIndexFile};
use iconforge::imgio::save_png;
use iconforge::model::save_tag_model;
use iconforge_core::imaging::RasterImage;
use iconforge_core::summarize::{TagPredictor, TagVocabulary};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_iconforge")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// White RGB canvas with optional dark squares.
fn canvas(path: &Path, w: u32, h: u32, squares: &[(u32, u32, u32)]) {
    let mut img = RasterImage::filled(w, h, &[255, 255, 255]).unwrap();
    for &(x, y, s) in squares {
        for yy in y..y + s {
            for xx in x..x + s {
                img.put_pixel(xx, yy, &[20, 20, 20]);
            }
        }
    }
    save_png(path, &img).unwrap();
}

/// Icon manifest with one transparent and one opaque RGBA icon.
fn icon_fixture(dir: &Path) -> PathBuf {
    let mut soft = RasterImage::filled(64, 64, &[20, 20, 20, 255]).unwrap();
    for y in 0..8 {
        for x in 0..64 {
            soft.put_pixel(x, y, &[0, 0, 0, 0]);
        }
    }
    for y in 32..64 {
        for x in 0..64 {
            soft.put_pixel(x, y, &[235, 235, 235, 255]);
        }
    }
    let mut hard = RasterImage::filled(64, 64, &[200, 30, 30, 255]).unwrap();
    for y in 32..64 {
        for x in 0..64 {
            hard.put_pixel(x, y, &[10, 10, 120, 255]);
        }
    }
    save_png(&dir.join("soft.png"), &soft).unwrap();
    save_png(&dir.join("hard.png"), &hard).unwrap();
    let manifest = dir.join("icons.jsonl");
    formats::write_jsonl(
        &manifest,
        &[
            IconManifestRecord {
                schema_version: 1,
                id: "soft".into(),
                path: "soft.png".into(),
                tag: "cat".into(),
                transparent: true,
            },
            IconManifestRecord {
                schema_version: 1,
                id: "hard".into(),
                path: "hard.png".into(),
                tag: "dog".into(),
                transparent: false,
            },
        ],
    )
    .unwrap();
    manifest
}

fn corpus_fixture(dir: &Path) -> PathBuf {
    let corpus = dir.join("corpus");
    std::fs::create_dir_all(&corpus).unwrap();
    canvas(&corpus.join("a.png"), 800, 800, &[]);
    canvas(&corpus.join("b.png"), 700, 900, &[]);
    corpus
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(&["no-such-command"])), 1);
    assert_eq!(code(&run(&["tile", "--bogus"])), 1);
    assert_eq!(code(&run(&[])), 1);
}

#[test]
fn help_exits_zero_and_lists_subcommands() {
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for sub in ["gen", "tile", "propose-baseline", "aggregate", "eval", "summarize", "report"] {
        assert!(text.contains(sub), "help is missing `{sub}`");
    }
}

#[test]
fn missing_input_exits_two_and_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "tile",
        "--image",
        "/nonexistent/picture.png",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("/nonexistent/picture.png"));
}

#[test]
fn malformed_records_exit_one_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("img.png");
    canvas(&img, 700, 700, &[]);
    let tiles = dir.path().join("tiles");
    assert_eq!(
        code(&run(&[
            "tile",
            "--image",
            img.to_str().unwrap(),
            "--out",
            tiles.to_str().unwrap(),
        ])),
        0
    );
    let dets = dir.path().join("dets.jsonl");
    std::fs::write(
        &dets,
        "{\"tile_id\":\"l1r0c0\",\"x\":1,\"y\":1,\"w\":5,\"h\":5,\"score\":2.0}\n",
    )
    .unwrap();
    let out = run(&[
        "aggregate",
        "--dets",
        dets.to_str().unwrap(),
        "--tiles",
        tiles.to_str().unwrap(),
        "--out",
        dir.path().join("props.jsonl").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("line 1"), "{}", stderr(&out));
}

#[test]
fn gen_n_zero_writes_an_empty_valid_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("ds");
    let out = run(&[
        "gen",
        "--corpus",
        "/nonexistent/corpus",
        "--icons",
        "/nonexistent/icons.jsonl",
        "--n",
        "0",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let manifest = out_dir.join("annotations.jsonl");
    assert!(manifest.is_file());
    assert_eq!(std::fs::read(&manifest).unwrap().len(), 0);
    let records: Vec<SampleRecord> = formats::read_jsonl(&manifest).unwrap();
    assert!(records.is_empty());
}

#[test]
fn gen_is_deterministic_for_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = corpus_fixture(dir.path());
    let manifest = icon_fixture(dir.path());
    let mut outputs = Vec::new();
    for name in ["run1", "run2"] {
        let out_dir = dir.path().join(name);
        let out = run(&[
            "gen",
            "--corpus",
            corpus.to_str().unwrap(),
            "--icons",
            manifest.to_str().unwrap(),
            "--n",
            "2",
            "--seed",
            "9",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        outputs.push(out_dir);
    }
    let ann1 = std::fs::read(outputs[0].join("annotations.jsonl")).unwrap();
    let ann2 = std::fs::read(outputs[1].join("annotations.jsonl")).unwrap();
    assert!(!ann1.is_empty());
    assert_eq!(ann1, ann2);
    for i in 0..2 {
        let name = format!("images/sample_{i:05}.png");
        assert_eq!(
            std::fs::read(outputs[0].join(&name)).unwrap(),
            std::fs::read(outputs[1].join(&name)).unwrap(),
            "{name} differs between identical runs"
        );
    }

    let out_dir = dir.path().join("run3");
    let out = run(&[
        "gen",
        "--corpus",
        corpus.to_str().unwrap(),
        "--icons",
        manifest.to_str().unwrap(),
        "--n",
        "2",
        "--seed",
        "10",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_ne!(ann1, std::fs::read(out_dir.join("annotations.jsonl")).unwrap());
}

#[test]
fn params_file_is_honored_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = corpus_fixture(dir.path());
    let manifest = icon_fixture(dir.path());

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "not_a_real_knob = 3\n").unwrap();
    let out = run(&[
        "gen",
        "--corpus",
        corpus.to_str().unwrap(),
        "--icons",
        manifest.to_str().unwrap(),
        "--params",
        bad.to_str().unwrap(),
        "--n",
        "1",
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("not_a_real_knob"), "{}", stderr(&out));

    // --seed beats the file's rng_seed: file seed 1 + --seed 2 == plain seed 2.
    let params = dir.path().join("params.toml");
    std::fs::write(&params, "rng_seed = 1\n").unwrap();
    let with_file = dir.path().join("with_file");
    let plain = dir.path().join("plain");
    assert_eq!(
        code(&run(&[
            "gen",
            "--corpus",
            corpus.to_str().unwrap(),
            "--icons",
            manifest.to_str().unwrap(),
            "--params",
            params.to_str().unwrap(),
            "--seed",
            "2",
            "--n",
            "1",
            "--out",
            with_file.to_str().unwrap(),
        ])),
        0
    );
    assert_eq!(
        code(&run(&[
            "gen",
            "--corpus",
            corpus.to_str().unwrap(),
            "--icons",
            manifest.to_str().unwrap(),
            "--seed",
            "2",
            "--n",
            "1",
            "--out",
            plain.to_str().unwrap(),
        ])),
        0
    );
    assert_eq!(
        std::fs::read(with_file.join("annotations.jsonl")).unwrap(),
        std::fs::read(plain.join("annotations.jsonl")).unwrap()
    );
}

#[test]
fn tile_writes_fourteen_tiles_and_an_index() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("poster.png");
    canvas(&img, 1000, 1400, &[(100, 100, 80)]);
    let out_dir = dir.path().join("tiles");
    let out = run(&[
        "tile",
        "--image",
        img.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let index: TileIndexFile = formats::read_json(&out_dir.join("tiles.json")).unwrap();
    assert_eq!(index.tiles.len(), 14);
    assert_eq!(index.width, 1000);
    assert_eq!(index.height, 1400);
    for t in &index.tiles {
        assert!(out_dir.join(format!("{}.png", t.id)).is_file());
    }
}

#[test]
fn propose_and_aggregate_produce_image_space_proposals() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("chart.png");
    canvas(&img, 900, 900, &[(200, 300, 120), (600, 100, 90)]);
    let tiles = dir.path().join("tiles");
    assert_eq!(
        code(&run(&[
            "tile",
            "--image",
            img.to_str().unwrap(),
            "--out",
            tiles.to_str().unwrap(),
        ])),
        0
    );
    let dets = dir.path().join("dets.jsonl");
    let out = run(&[
        "propose-baseline",
        "--tiles",
        tiles.to_str().unwrap(),
        "--out",
        dets.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let props = dir.path().join("props.jsonl");
    let out = run(&[
        "aggregate",
        "--dets",
        dets.to_str().unwrap(),
        "--tiles",
        tiles.to_str().unwrap(),
        "--threshold",
        "0.0",
        "--out",
        props.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let records: Vec<formats::ProposalRecord> = formats::read_jsonl(&props).unwrap();
    assert!(!records.is_empty(), "dark squares should yield proposals");
    for r in &records {
        assert_eq!(r.image_id, "chart");
        assert!(r.x >= 0.0 && r.y >= 0.0);
        assert!(r.x + r.w <= 900.0 + 1e-6 && r.y + r.h <= 900.0 + 1e-6);
    }
}

fn summarize_fixture(dir: &Path) -> (PathBuf, PathBuf, PathBuf, PathBuf, PathBuf) {
    let img = dir.join("info.png");
    canvas(&img, 640, 640, &[(100, 100, 120)]);
    let words = dir.join("words.json");
    std::fs::write(
        &words,
        "{\"image_id\":\"info\",\"words\":[\"Hello\",\"world!\"]}\n",
    )
    .unwrap();
    let proposals = dir.join("props.jsonl");
    std::fs::write(
        &proposals,
        concat!(
            "{\"schema_version\":1,\"image_id\":\"info\",\"x\":100.0,\"y\":100.0,\"w\":120.0,\"h\":120.0,\"score\":0.9,\"class_probs\":[0.7,0.3]}\n",
            "{\"schema_version\":1,\"image_id\":\"info\",\"x\":300.0,\"y\":260.0,\"w\":60.0,\"h\":40.0,\"score\":0.8,\"class_probs\":[0.2,0.8]}\n",
        ),
    )
    .unwrap();
    let model_path = dir.join("model.json");
    let vocab = TagVocabulary::new(vec!["cat".into(), "dog".into()]).unwrap();
    let model = TagPredictor::init(4, 3, 2, 7);
    save_tag_model(&model_path, &model, &vocab).unwrap();
    let embeddings = dir.join("emb.txt");
    std::fs::write(&embeddings, "hello 1 0 0 0\nworld 0 1 0 0\n").unwrap();
    (img, words, proposals, model_path, embeddings)
}

#[test]
fn summarize_emits_tags_hashtags_and_overlay() {
    let dir = tempfile::tempdir().unwrap();
    let (img, words, proposals, model, embeddings) = summarize_fixture(dir.path());
    let out_file = dir.path().join("summary.jsonl");
    let overlay = dir.path().join("overlay.png");
    let out = run(&[
        "summarize",
        "--image",
        img.to_str().unwrap(),
        "--words",
        words.to_str().unwrap(),
        "--proposals",
        proposals.to_str().unwrap(),
        "--tag-model",
        model.to_str().unwrap(),
        "--embeddings",
        embeddings.to_str().unwrap(),
        "--icon-backend",
        "file",
        "--top-k",
        "2",
        "--out",
        out_file.to_str().unwrap(),
        "--overlay",
        overlay.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let records: Vec<SummaryRecord> = formats::read_jsonl(&out_file).unwrap();
    assert_eq!(records.len(), 1);
    let rec = &records[0];
    assert_eq!(rec.image_id, "info");
    assert_eq!(rec.tags.len(), 2);
    // Each vocab tag appears once; argmax picks the dominant proposal.
    assert_eq!(rec.hashtags.len(), 2);
    let cat = rec.hashtags.iter().find(|h| h.tag == "cat").unwrap();
    assert_eq!(cat.proposal_index, 0);
    assert!((cat.class_prob - 0.7).abs() < 1e-12);
    let dog = rec.hashtags.iter().find(|h| h.tag == "dog").unwrap();
    assert_eq!(dog.proposal_index, 1);
    assert!(overlay.is_file());
}

#[test]
fn summarize_baseline_backend_classifies_crops() {
    let dir = tempfile::tempdir().unwrap();
    let (img, words, proposals, model, embeddings) = summarize_fixture(dir.path());
    // Strip the embedded probabilities so the backend must classify.
    let stripped = dir.path().join("bare.jsonl");
    std::fs::write(
        &stripped,
        "{\"schema_version\":1,\"image_id\":\"info\",\"x\":100.0,\"y\":100.0,\"w\":120.0,\"h\":120.0,\"score\":0.9}\n",
    )
    .unwrap();
    let _ = proposals;
    let manifest = icon_fixture(dir.path());
    let out_file = dir.path().join("summary.jsonl");
    let out = run(&[
        "summarize",
        "--image",
        img.to_str().unwrap(),
        "--words",
        words.to_str().unwrap(),
        "--proposals",
        stripped.to_str().unwrap(),
        "--tag-model",
        model.to_str().unwrap(),
        "--embeddings",
        embeddings.to_str().unwrap(),
        "--icon-backend",
        "baseline",
        "--icons",
        manifest.to_str().unwrap(),
        "--top-k",
        "1",
        "--out",
        out_file.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let records: Vec<SummaryRecord> = formats::read_jsonl(&out_file).unwrap();
    let rec = &records[0];
    assert_eq!(rec.tags.len(), 1);
    assert!(!rec.hashtags.is_empty());
    for h in &rec.hashtags {
        assert!(h.class_prob > 0.0 && h.class_prob <= 1.0);
    }
}

#[test]
fn eval_and_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("pred.jsonl");
    let gt = dir.path().join("gt.jsonl");
    std::fs::write(
        &pred,
        concat!(
            "{\"schema_version\":1,\"image_id\":\"a\",\"x\":0,\"y\":0,\"w\":10,\"h\":10,\"score\":0.9}\n",
            "{\"schema_version\":1,\"image_id\":\"a\",\"x\":50,\"y\":50,\"w\":10,\"h\":10,\"score\":0.8}\n",
        ),
    )
    .unwrap();
    std::fs::write(
        &gt,
        "{\"image_id\":\"a\",\"boxes\":[{\"x\":0,\"y\":0,\"w\":10,\"h\":10}]}\n",
    )
    .unwrap();
    let report_json = dir.path().join("eval.json");
    let out = run(&[
        "eval",
        "--pred",
        pred.to_str().unwrap(),
        "--gt",
        gt.to_str().unwrap(),
        "--mode",
        "proposals",
        "--report",
        report_json.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("precision 50.0"), "{}", stdout(&out));
    assert!(stdout(&out).contains("recall 100.0"));

    let table = dir.path().join("table.md");
    let out = run(&[
        "report",
        "--eval",
        report_json.to_str().unwrap(),
        "--out",
        table.to_str().unwrap(),
        "--format",
        "md",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&table).unwrap();
    assert!(text.contains("| eval |"), "{text}");
    assert!(text.contains("50.0"));
}

#[test]
fn eval_rejects_predictions_for_unknown_images() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("pred.jsonl");
    let gt = dir.path().join("gt.jsonl");
    std::fs::write(
        &pred,
        "{\"schema_version\":1,\"image_id\":\"ghost\",\"x\":0,\"y\":0,\"w\":10,\"h\":10,\"score\":0.9}\n",
    )
    .unwrap();
    std::fs::write(
        &gt,
        "{\"image_id\":\"a\",\"boxes\":[{\"x\":0,\"y\":0,\"w\":10,\"h\":10}]}\n",
    )
    .unwrap();
    let out = run(&[
        "eval",
        "--pred",
        pred.to_str().unwrap(),
        "--gt",
        gt.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("ghost"), "{}", stderr(&out));
}
