use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use selfmad_core::augmenter::augment_traced;
use selfmad_core::detector::{
    extract_features, predict_score, train, DetectorModel, Sample, Stage,
};
use selfmad_core::freqgen::{
    fft2, inject_frequency_artifact, radial_band_energy, sample_pattern,
};
use selfmad_core::imgcore::{
    crop_window, crop_with_margin, gaussian_blur, load_image, load_seg_map, resize_bilinear,
    save_image, save_pgm,
};
use selfmad_core::metrics::{compute_report, write_report, Label, MetricsReport};
use selfmad_core::pixelgen::{
    blend, geo_transform_traced, make_mask, sample_blend_factor, MaskMode, SegmentationMap,
};
use selfmad_core::{BoundingBox, ImageBuffer, RngStream, ScoreRecord};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::manifest::{read_manifest, write_manifest, ManifestRecord};

const IMAGE_EXTENSIONS: [&str; 4] = ["ppm", "pnm", "pgm", "png"];
const STAGES: [Stage; 4] = [Stage::Os, Stage::As, Stage::Ms, Stage::Fms];

pub struct SynthArgs {
    pub input_dir: PathBuf,
    pub seg_dir: Option<PathBuf>,
    pub bbox_file: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub config: PipelineConfig,
    pub holdout: f64,
}

/// Worker-pool size: SELFMAD_THREADS if set, else all available cores.
fn thread_count() -> Result<usize, CliError> {
    match std::env::var("SELFMAD_THREADS") {
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| CliError::Usage(format!("SELFMAD_THREADS must be a positive integer, got {v:?}"))),
        Err(_) => Ok(std::thread::available_parallelism().map(usize::from).unwrap_or(1)),
    }
}

#[derive(Deserialize)]
struct BboxLine {
    image: String,
    x0: i64,
    y0: i64,
    side: i64,
}

/// Bounding-box sidecar: JSONL of {"image", "x0", "y0", "side"}, keyed
/// here by both file name and stem.
fn load_bboxes(path: &Path) -> Result<HashMap<String, BoundingBox>, CliError> {
    let text = std::fs::read_to_string(path)?;
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let b: BboxLine = serde_json::from_str(line)
            .map_err(|e| CliError::Data(format!("bbox line {}: {e}", i + 1)))?;
        let bbox = BoundingBox { x0: b.x0, y0: b.y0, side: b.side };
        let name = Path::new(&b.image);
        if let Some(stem) = name.file_stem().and_then(|s| s.to_str()) {
            out.insert(stem.to_string(), bbox);
        }
        if let Some(file) = name.file_name().and_then(|s| s.to_str()) {
            out.insert(file.to_string(), bbox);
        }
    }
    Ok(out)
}

fn list_images(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
                .unwrap_or(false)
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Data(format!("no input images in {}", dir.display())));
    }
    Ok(paths)
}

fn stem_of(path: &Path) -> Result<String, CliError> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| CliError::Data(format!("bad file name {}", path.display())))
}

/// Expand grayscale to three channels so the color pipeline applies.
fn to_rgb(img: ImageBuffer) -> ImageBuffer {
    if img.channels() == 3 {
        return img;
    }
    let mut out = ImageBuffer::new(img.height(), img.width(), 3);
    for y in 0..img.height() {
        for x in 0..img.width() {
            let v = img.get(y, x, 0);
            for c in 0..3 {
                out.set(y, x, c, v);
            }
        }
    }
    out
}

/// Apply the image's crop window to its segmentation map, then
/// nearest-neighbor resize to the target size so classes stay crisp.
fn preprocess_seg(
    classes: &[u8],
    seg_h: usize,
    seg_w: usize,
    bbox: BoundingBox,
    margin: f64,
    target: usize,
) -> Result<SegmentationMap, CliError> {
    let (y0, x0, ch, cw) = crop_window(seg_h, seg_w, bbox, margin)?;
    let sy = ch as f64 / target as f64;
    let sx = cw as f64 / target as f64;
    let mut out = vec![0u8; target * target];
    for ty in 0..target {
        let src_y = (((ty as f64 + 0.5) * sy) as usize).min(ch - 1);
        for tx in 0..target {
            let src_x = (((tx as f64 + 0.5) * sx) as usize).min(cw - 1);
            out[ty * target + tx] = classes[(y0 + src_y) * seg_w + (x0 + src_x)];
        }
    }
    Ok(SegmentationMap::new(target, target, out)?)
}

fn find_seg(seg_dir: Option<&Path>, stem: &str) -> Option<PathBuf> {
    let dir = seg_dir?;
    for ext in ["png", "pgm"] {
        let p = dir.join(format!("{stem}.seg.{ext}"));
        if p.is_file() {
            return Some(p);
        }
    }
    None
}

fn sha256_hex(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Deterministic holdout assignment: seeded shuffle of source stems,
/// first ⌊holdout·N+0.5⌉ go to the test split.
fn assign_splits(stems: &[String], holdout: f64, seed: u64) -> HashMap<String, &'static str> {
    let mut order: Vec<usize> = (0..stems.len()).collect();
    let mut rng = RngStream::new(seed).substream("split");
    for i in (1..order.len()).rev() {
        let j = rng.below((i + 1) as u64) as usize;
        order.swap(i, j);
    }
    let n_test = selfmad_core::imgcore::round_half_up(holdout * stems.len() as f64) as usize;
    let mut out = HashMap::new();
    for (rank, &idx) in order.iter().enumerate() {
        out.insert(stems[idx].clone(), if rank < n_test { "test" } else { "train" });
    }
    out
}

struct SynthResult {
    records: Vec<ManifestRecord>,
}

fn synth_one(
    path: &Path,
    stem: &str,
    split: &str,
    bbox: Option<BoundingBox>,
    seg_path: Option<&Path>,
    images_dir: &Path,
    config: &PipelineConfig,
    config_digest: &str,
) -> Result<SynthResult, CliError> {
    let img = to_rgb(load_image(path)?);
    let bbox = bbox.unwrap_or_else(|| BoundingBox::full(img.height(), img.width()));
    let target = config.preprocessing.target_size;

    let img_rng = RngStream::new(config.seed).substream("image").substream(stem);

    // Crop margin: drawn for the training split, fixed for holdout.
    let margin = if split == "train" {
        let r = config.preprocessing.train_margin_range;
        img_rng.substream("margin").range(r[0], r[1])
    } else {
        config.preprocessing.test_margin
    };
    let i_os = resize_bilinear(&crop_with_margin(&img, bbox, margin)?, target, target);

    let (i_as, aug_draw) = augment_traced(&i_os, &config.augmenter, &mut img_rng.substream("augment"));
    let (i_warp, geo_draw) =
        geo_transform_traced(&i_as, &config.pixelgen, &mut img_rng.substream("geo"));

    let seg = match seg_path {
        Some(p) => {
            let (sh, sw, classes) = load_seg_map(p)?;
            if sh != img.height() || sw != img.width() {
                return Err(CliError::Data(format!(
                    "seg map {} is {sh}x{sw} but image is {}x{}",
                    p.display(),
                    img.height(),
                    img.width()
                )));
            }
            Some(preprocess_seg(&classes, sh, sw, bbox, margin, target)?)
        }
        None => None,
    };
    let mode = if seg.is_some() { MaskMode::Parts } else { MaskMode::Full };
    let mask_draw = make_mask(
        seg.as_ref(),
        mode,
        target,
        target,
        &config.pixelgen,
        &mut img_rng.substream("mask"),
    );
    let a = sample_blend_factor(&mut img_rng.substream("blend"));
    let i_ms = blend(&i_os, &i_warp, &mask_draw.mask, a)?;

    let freq_draw = sample_pattern(
        target,
        target,
        &config.freqgen.pattern_ranges,
        &mut img_rng.substream("pattern"),
    );
    let i_fms = inject_frequency_artifact(&i_ms, &freq_draw.spec, &config.freqgen);

    let mode_str = match mask_draw.mode_used {
        MaskMode::Full => "full",
        MaskMode::Parts => "parts",
    };
    let param_digest = sha256_hex(&format!(
        "margin={margin:.17e}\naugment={}\ngeo={}\nmask={mode_str} classes={:?} fallback={}\nblend={:.17e}\npattern={}\n",
        aug_draw.describe(),
        geo_draw.describe(),
        mask_draw.classes,
        mask_draw.fell_back_to_full,
        a.0,
        freq_draw.describe(),
    ));

    let mut records = Vec::with_capacity(4);
    for (stage, buf) in STAGES.iter().zip([&i_os, &i_as, &i_ms, &i_fms]) {
        let file = format!("{stem}_{}.ppm", stage.tag());
        save_image(buf, &images_dir.join(&file))?;
        records.push(ManifestRecord {
            path: format!("images/{file}"),
            label: stage.label() as u8,
            stage: *stage,
            source: stem.to_string(),
            seed_path: img_rng.path_string(),
            param_digest: param_digest.clone(),
            split: split.to_string(),
            config_digest: config_digest.to_string(),
        });
    }
    Ok(SynthResult { records })
}

/// Synthesize the {OS, AS, MS, FMS} quadruple for every input image and
/// write the manifest. Returns the records in manifest order.
pub fn cmd_synth(args: &SynthArgs) -> Result<Vec<ManifestRecord>, CliError> {
    if !(0.0..1.0).contains(&args.holdout) {
        return Err(CliError::Usage(format!(
            "--holdout must be in [0, 1), got {}",
            args.holdout
        )));
    }
    let paths = list_images(&args.input_dir)?;
    let mut stems = Vec::with_capacity(paths.len());
    for p in &paths {
        stems.push(stem_of(p)?);
    }
    {
        let mut sorted = stems.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != stems.len() {
            return Err(CliError::Data("duplicate input image stems".into()));
        }
    }
    let bboxes = match &args.bbox_file {
        Some(p) => load_bboxes(p)?,
        None => HashMap::new(),
    };
    let splits = assign_splits(&stems, args.holdout, args.config.seed);
    let images_dir = args.out_dir.join("images");
    std::fs::create_dir_all(&images_dir)?;
    let config_digest = args.config.digest();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let results: Result<Vec<SynthResult>, CliError> = pool.install(|| {
        paths
            .par_iter()
            .zip(stems.par_iter())
            .map(|(path, stem)| {
                let bbox = bboxes.get(stem).copied();
                let seg_path = find_seg(args.seg_dir.as_deref(), stem);
                synth_one(
                    path,
                    stem,
                    splits[stem],
                    bbox,
                    seg_path.as_deref(),
                    &images_dir,
                    &args.config,
                    &config_digest,
                )
            })
            .collect()
    });
    let records: Vec<ManifestRecord> =
        results?.into_iter().flat_map(|r| r.records).collect();
    write_manifest(&records, &args.out_dir.join("manifest.jsonl"))?;
    Ok(records)
}

fn resolve(base: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn load_features(
    manifest_path: &Path,
    records: &[ManifestRecord],
) -> Result<Vec<Sample>, CliError> {
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    records
        .iter()
        .map(|r| {
            let img = load_image(&resolve(base, &r.path))?;
            Ok(Sample::new(extract_features(&img), r.stage))
        })
        .collect()
}

/// Train the detector on the manifest's training split; writes the
/// model, its config-digest sidecar, and a JSON loss trace.
pub fn cmd_train(
    manifest_path: &Path,
    config: &PipelineConfig,
    model_out: &Path,
) -> Result<Vec<f64>, CliError> {
    let mut records = read_manifest(manifest_path)?;
    if records.iter().any(|r| r.split == "train") {
        records.retain(|r| r.split == "train");
    }
    let samples = load_features(manifest_path, &records)?;
    let mut train_cfg = config.detector.clone();
    train_cfg.seed = config.seed;
    let mut rng = RngStream::new(config.seed).substream("train");
    let (model, trace) = train(&samples, &train_cfg, &mut rng)?;
    if !trace.iter().all(|l| l.is_finite()) {
        return Err(CliError::Data("non-finite training loss".into()));
    }
    model.save(model_out)?;
    let digest = records
        .first()
        .map(|r| r.config_digest.clone())
        .unwrap_or_default();
    let sidecar = model_out.with_extension("json");
    std::fs::write(
        &sidecar,
        format!("{{\"config_digest\": \"{digest}\"}}\n"),
    )?;
    let trace_path = model_out.with_extension("trace.json");
    let trace_json = serde_json::to_string(&trace)
        .map_err(|e| CliError::Data(format!("trace encode: {e}")))?;
    std::fs::write(&trace_path, format!("{{\"epoch_mean_loss\": {trace_json}}}\n"))?;
    Ok(trace)
}

/// Score every record (optionally one split) and write the JSONL scores
/// plus the metrics report.
pub fn cmd_eval(
    manifest_path: &Path,
    model_path: &Path,
    scores_out: &Path,
    report_out: &Path,
    split: Option<&str>,
) -> Result<MetricsReport, CliError> {
    let mut records = read_manifest(manifest_path)?;
    if let Some(s) = split {
        records.retain(|r| r.split == s);
        if records.is_empty() {
            return Err(CliError::Data(format!("no records in split {s:?}")));
        }
    }
    let model = DetectorModel::load(model_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut score_records = Vec::with_capacity(records.len());
    let mut scores_file = std::fs::File::create(scores_out)?;
    for r in &records {
        let img = load_image(&resolve(base, &r.path))?;
        let score = predict_score(&model, &extract_features(&img));
        let label = if r.label == 1 { Label::Attack } else { Label::BonaFide };
        let label_str = if r.label == 1 { "attack" } else { "bona_fide" };
        writeln!(
            scores_file,
            "{{\"id\": {}, \"score\": {}, \"label\": \"{label_str}\"}}",
            serde_json::to_string(&r.path).unwrap(),
            serde_json::to_string(&score).unwrap(),
        )?;
        score_records.push(ScoreRecord { score, label });
    }
    let digest = records.first().map(|r| r.config_digest.clone());
    let report = compute_report(&score_records, digest)?;
    write_report(&report, report_out)?;
    Ok(report)
}

/// Debug rasters: centered log-magnitude spectrum and high-pass
/// residual, both max-normalized single-channel PGMs.
pub fn cmd_inspect(image_path: &Path, out_prefix: &Path) -> Result<(), CliError> {
    let img = load_image(image_path)?;
    let (h, w) = (img.height(), img.width());

    // Channel-mean single plane.
    let mut mean = ImageBuffer::new(h, w, 1);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0f32;
            for c in 0..img.channels() {
                acc += img.get(y, x, c);
            }
            mean.set(y, x, 0, acc / img.channels() as f32);
        }
    }

    let spec = fft2(&mean);
    let mut log_mag = vec![0.0f64; h * w];
    let mut max_val = 0.0f64;
    for u in 0..h {
        for v in 0..w {
            // Shift DC to the center for display.
            let su = (u + h / 2) % h;
            let sv = (v + w / 2) % w;
            let m = spec.get(0, u, v).norm().ln_1p();
            log_mag[su * w + sv] = m;
            max_val = max_val.max(m);
        }
    }
    let mut spectrum = ImageBuffer::new(h, w, 1);
    for y in 0..h {
        for x in 0..w {
            let v = if max_val > 0.0 { log_mag[y * w + x] / max_val } else { 0.0 };
            spectrum.set(y, x, 0, v as f32);
        }
    }
    let prefix = out_prefix.to_string_lossy();
    save_pgm(&spectrum, Path::new(&format!("{prefix}.spectrum.pgm")))?;

    let blurred = gaussian_blur(&mean, 1.0);
    let mut residual = ImageBuffer::new(h, w, 1);
    let mut res_max = 0.0f32;
    for y in 0..h {
        for x in 0..w {
            let d = (mean.get(y, x, 0) - blurred.get(y, x, 0)).abs();
            residual.set(y, x, 0, d);
            res_max = res_max.max(d);
        }
    }
    if res_max > 0.0 {
        for y in 0..h {
            for x in 0..w {
                let v = residual.get(y, x, 0) / res_max;
                residual.set(y, x, 0, v);
            }
        }
    }
    save_pgm(&residual, Path::new(&format!("{prefix}.residual.pgm")))?;

    // Band-energy summary for scripted checks.
    println!(
        "mid_band_energy={:.6e}",
        radial_band_energy(&mean, 0.2, 0.5)
    );
    Ok(())
}
