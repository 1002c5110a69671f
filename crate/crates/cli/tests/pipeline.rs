//! Behavioural checks for the command layer: manifest shape, split
//! assignment, inspect rasters and error classification.

mod common;

use selfmad_cli::commands::{cmd_eval, cmd_inspect, cmd_synth, cmd_train, SynthArgs};
use selfmad_cli::manifest::read_manifest;
use selfmad_cli::{CliError, PipelineConfig};
use selfmad_core::imgcore::{load_image, save_image};

fn synth_args(corpus: &std::path::Path, out: &std::path::Path, seed: u64) -> SynthArgs {
    SynthArgs {
        input_dir: corpus.to_path_buf(),
        seg_dir: None,
        bbox_file: None,
        out_dir: out.to_path_buf(),
        config: PipelineConfig::load(None, Some(seed)).unwrap(),
        holdout: 0.2,
    }
}

#[test]
fn synth_emits_four_lines_per_image_with_balanced_labels() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    common::write_corpus(&corpus, 5, 1, 96);
    let out = dir.path().join("out");
    let records = cmd_synth(&synth_args(&corpus, &out, 3)).unwrap();
    assert_eq!(records.len(), 20);
    assert_eq!(records.iter().filter(|r| r.label == 0).count(), 10);
    assert_eq!(records.iter().filter(|r| r.label == 1).count(), 10);
    let reread = read_manifest(&out.join("manifest.jsonl")).unwrap();
    assert_eq!(reread.len(), 20);
    // Holdout 0.2 of 5 sources → one test-source quadruple.
    assert_eq!(reread.iter().filter(|r| r.split == "test").count(), 4);
    // Every emitted raster exists and is a 384×384 PPM.
    for r in &reread {
        let img = load_image(&out.join(&r.path)).unwrap();
        assert_eq!((img.height(), img.width(), img.channels()), (384, 384, 3));
    }
}

#[test]
fn seg_maps_switch_mask_mode_to_parts() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    common::write_corpus(&corpus, 2, 2, 96);
    // A seg map for face000 only: two part classes on the image grid.
    let seg_dir = dir.path().join("seg");
    std::fs::create_dir_all(&seg_dir).unwrap();
    let mut seg = selfmad_core::ImageBuffer::new(96, 96, 1);
    for y in 30..60 {
        for x in 20..50 {
            seg.set(y, x, 0, 1.0 / 255.0);
        }
        for x in 55..80 {
            seg.set(y, x, 0, 10.0 / 255.0);
        }
    }
    save_image(&seg, &seg_dir.join("face000.seg.pgm")).unwrap();

    let out = dir.path().join("out");
    let mut args = synth_args(&corpus, &out, 4);
    args.seg_dir = Some(seg_dir);
    let records = cmd_synth(&args).unwrap();
    // Param digests differ between the seg-backed and full-mask source.
    let d0 = &records.iter().find(|r| r.source == "face000").unwrap().param_digest;
    let d1 = &records.iter().find(|r| r.source == "face001").unwrap().param_digest;
    assert_ne!(d0, d1);
}

#[test]
fn train_then_eval_scores_every_record() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    common::write_corpus(&corpus, 6, 3, 96);
    let out = dir.path().join("out");
    let config = PipelineConfig::load(None, Some(8)).unwrap();
    let mut args = synth_args(&corpus, &out, 8);
    // Faster training for this smoke test.
    args.config.detector.epochs = 3;
    cmd_synth(&args).unwrap();
    let manifest = out.join("manifest.jsonl");
    let mut cfg = config.clone();
    cfg.detector.epochs = 3;
    let trace = cmd_train(&manifest, &cfg, &out.join("model.smad")).unwrap();
    assert_eq!(trace.len(), 3);
    assert!(trace.iter().all(|l| l.is_finite()));
    let report = cmd_eval(
        &manifest,
        &out.join("model.smad"),
        &out.join("scores.jsonl"),
        &out.join("report.json"),
        None,
    )
    .unwrap();
    let scores = std::fs::read_to_string(out.join("scores.jsonl")).unwrap();
    assert_eq!(scores.lines().count(), 24);
    assert!(report.eer >= 0.0 && report.eer <= 1.0);
    let rendered = std::fs::read_to_string(out.join("report.json")).unwrap();
    assert!(rendered.contains("\"eer\": \""));
}

#[test]
fn inspect_constant_image_has_dc_only_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let img = selfmad_core::ImageBuffer::constant(32, 32, 3, 0.5);
    let path = dir.path().join("flat.ppm");
    save_image(&img, &path).unwrap();
    let prefix = dir.path().join("flat");
    cmd_inspect(&path, &prefix).unwrap();
    let spec = load_image(&dir.path().join("flat.spectrum.pgm")).unwrap();
    let mut bright = 0usize;
    for y in 0..32 {
        for x in 0..32 {
            if spec.get(y, x, 0) > 0.5 {
                bright += 1;
            }
        }
    }
    // DC sits at the shifted center pixel; everything else is black.
    assert_eq!(bright, 1);
    assert!(spec.get(16, 16, 0) > 0.99);
    assert!(dir.path().join("flat.residual.pgm").is_file());
}

#[test]
fn error_classification_matches_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // Empty input dir → data error (exit 3).
    let empty = dir.path().join("empty");
    std::fs::create_dir_all(&empty).unwrap();
    let err = cmd_synth(&synth_args(&empty, &dir.path().join("o"), 1)).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    // Bad holdout → usage error (exit 2).
    let corpus = dir.path().join("c");
    common::write_corpus(&corpus, 1, 1, 96);
    let mut args = synth_args(&corpus, &dir.path().join("o2"), 1);
    args.holdout = 1.5;
    assert_eq!(cmd_synth(&args).unwrap_err().exit_code(), 2);
    // Missing manifest → i/o error (exit 4).
    let cfg = PipelineConfig::default();
    let err = cmd_train(&dir.path().join("nope.jsonl"), &cfg, &dir.path().join("m")).unwrap_err();
    assert_eq!(err.exit_code(), 4);
    // Unknown config key → data error.
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"freqgen\": {\"kk\": 1}}").unwrap();
    assert!(matches!(
        PipelineConfig::load(Some(&bad), None),
        Err(CliError::Data(_))
    ));
}
