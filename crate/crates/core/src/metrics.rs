//! ISO/IEC 30107-3 style evaluation: APCER/BPCER threshold sweep, EER
//! and BPCER at fixed APCER operating points.
//!
//! Conventions (recorded in report metadata): predict attack iff
//! score >= t; EER by linear interpolation between the bracketing sweep
//! points; ties broken toward the lower threshold.

use std::io::Write;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("both classes must be present (bona fide and attack)")]
    SingleClass,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    BonaFide,
    Attack,
}

#[derive(Debug, Clone, Copy)]
pub struct ScoreRecord {
    /// Higher = more attack-like.
    pub score: f64,
    pub label: Label,
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub threshold: f64,
    pub apcer: f64,
    pub bpcer: f64,
}

#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub eer: f64,
    pub eer_threshold: f64,
    /// (target APCER, BPCER, threshold) rows, ascending by target.
    pub bpcer_at_apcer: Vec<(f64, f64, f64)>,
    pub n_bona_fide: usize,
    pub n_attack: usize,
    pub config_digest: Option<String>,
}

fn check_classes(records: &[ScoreRecord]) -> Result<(usize, usize), MetricsError> {
    let n_attack = records.iter().filter(|r| r.label == Label::Attack).count();
    let n_bona = records.len() - n_attack;
    if n_attack == 0 || n_bona == 0 {
        return Err(MetricsError::SingleClass);
    }
    Ok((n_bona, n_attack))
}

/// Sweep all distinct scores plus ±∞ ascending.
///
/// APCER(t) = #(attack with score < t)/#attack,
/// BPCER(t) = #(bona fide with score >= t)/#bona fide.
pub fn roc_points(records: &[ScoreRecord]) -> Result<Vec<SweepPoint>, MetricsError> {
    let (n_bona, n_attack) = check_classes(records)?;
    let mut thresholds: Vec<f64> = records.iter().map(|r| r.score).collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let mut sweep = Vec::with_capacity(thresholds.len() + 2);
    let mut all: Vec<f64> = Vec::with_capacity(thresholds.len() + 2);
    all.push(f64::NEG_INFINITY);
    all.extend(&thresholds);
    all.push(f64::INFINITY);
    for t in all {
        let apcer = records
            .iter()
            .filter(|r| r.label == Label::Attack && r.score < t)
            .count() as f64
            / n_attack as f64;
        let bpcer = records
            .iter()
            .filter(|r| r.label == Label::BonaFide && r.score >= t)
            .count() as f64
            / n_bona as f64;
        sweep.push(SweepPoint { threshold: t, apcer, bpcer });
    }
    Ok(sweep)
}

/// Equal error rate: the first sign change of APCER−BPCER along the
/// sweep, linearly interpolated in threshold; an exact-equality sweep
/// point is reported directly.
pub fn eer(records: &[ScoreRecord]) -> Result<(f64, f64), MetricsError> {
    let sweep = roc_points(records)?;
    // Exact equality at a sweep point wins, lowest threshold first.
    for p in &sweep {
        if p.apcer == p.bpcer {
            return Ok((p.apcer, p.threshold));
        }
    }
    for pair in sweep.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let da = a.apcer - a.bpcer;
        let db = b.apcer - b.bpcer;
        if da < 0.0 && db > 0.0 {
            if !a.threshold.is_finite() || !b.threshold.is_finite() {
                // Degenerate bracket at the sweep boundary: report the
                // midpoint of the finite endpoint's rates.
                let p = if a.threshold.is_finite() { a } else { b };
                return Ok(((p.apcer + p.bpcer) / 2.0, p.threshold));
            }
            // Interpolate both rates linearly in threshold and solve
            // for the crossing.
            let span = b.threshold - a.threshold;
            let slope = (db - da) / span;
            let t = a.threshold - da / slope;
            let frac = (t - a.threshold) / span;
            let apcer = a.apcer + (b.apcer - a.apcer) * frac;
            let bpcer = a.bpcer + (b.bpcer - a.bpcer) * frac;
            return Ok(((apcer + bpcer) / 2.0, t));
        }
    }
    // APCER−BPCER is monotone along the sweep and spans −1..1, so a
    // bracket always exists; unreachable in practice.
    unreachable!("sign change must exist in sweep");
}

/// BPCER at the maximum threshold with APCER(t) <= target.
pub fn bpcer_at_apcer(records: &[ScoreRecord], target: f64) -> Result<(f64, f64), MetricsError> {
    assert!((0.0..1.0).contains(&target) || target > 0.0 && target < 1.0);
    let sweep = roc_points(records)?;
    let best = sweep
        .iter()
        .filter(|p| p.apcer <= target)
        .last()
        .expect("APCER(-inf) = 0 always satisfies the target");
    Ok((best.bpcer, best.threshold))
}

/// Compute the full report at the standard 5% and 10% operating points.
pub fn compute_report(
    records: &[ScoreRecord],
    config_digest: Option<String>,
) -> Result<MetricsReport, MetricsError> {
    let (n_bona, n_attack) = check_classes(records)?;
    let (eer_value, eer_threshold) = eer(records)?;
    let mut rows = Vec::new();
    for target in [0.05, 0.10] {
        let (bpcer, t) = bpcer_at_apcer(records, target)?;
        rows.push((target, bpcer, t));
    }
    Ok(MetricsReport {
        eer: eer_value,
        eer_threshold,
        bpcer_at_apcer: rows,
        n_bona_fide: n_bona,
        n_attack,
        config_digest,
    })
}

fn fmt_rate(r: f64) -> String {
    format!("{r:.6}")
}

fn fmt_threshold(t: f64) -> String {
    if t == f64::INFINITY {
        "\"inf\"".to_string()
    } else if t == f64::NEG_INFINITY {
        "\"-inf\"".to_string()
    } else {
        format!("{t:.12}")
    }
}

/// Render the report as JSON with fixed key order and 6-decimal
/// fixed-point rates; identical reports yield identical bytes.
pub fn render_report(report: &MetricsReport) -> String {
    let mut s = String::new();
    s.push_str("{\n");
    s.push_str(&format!("  \"eer\": \"{}\",\n", fmt_rate(report.eer)));
    s.push_str(&format!(
        "  \"eer_threshold\": {},\n",
        fmt_threshold(report.eer_threshold)
    ));
    for &(target, bpcer, t) in &report.bpcer_at_apcer {
        let tag = format!("{:02}", (target * 100.0).round() as u32);
        s.push_str(&format!(
            "  \"bpcer_at_apcer_{tag}\": \"{}\",\n",
            fmt_rate(bpcer)
        ));
        s.push_str(&format!(
            "  \"threshold_at_apcer_{tag}\": {},\n",
            fmt_threshold(t)
        ));
    }
    s.push_str(&format!("  \"n_bona_fide\": {},\n", report.n_bona_fide));
    s.push_str(&format!("  \"n_attack\": {},\n", report.n_attack));
    s.push_str("  \"decision_rule\": \"attack iff score >= threshold\",\n");
    s.push_str("  \"tie_break\": \"lower threshold\",\n");
    s.push_str(&format!(
        "  \"config_digest\": {}\n",
        match &report.config_digest {
            Some(d) => format!("\"{d}\""),
            None => "null".to_string(),
        }
    ));
    s.push_str("}\n");
    s
}

pub fn write_report(report: &MetricsReport, path: &Path) -> Result<(), MetricsError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(render_report(report).as_bytes())?;
    Ok(())
}
