use serde::{Deserialize, Serialize};

use super::model::{DetectorModel, GradientBuffer, MomentumState};
use super::{DetectorError, FeatureVector};
use crate::imgcore::RngStream;

/// Synthesis stage a training sample came from. OS/AS are bona fide,
/// MS/FMS are attack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Os,
    As,
    Ms,
    Fms,
}

impl Stage {
    pub fn label(self) -> f64 {
        match self {
            Stage::Os | Stage::As => 0.0,
            Stage::Ms | Stage::Fms => 1.0,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Stage::Os => "os",
            Stage::As => "as",
            Stage::Ms => "ms",
            Stage::Fms => "fms",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub features: FeatureVector,
    pub label: f64,
    pub stage: Stage,
}

impl Sample {
    pub fn new(features: FeatureVector, stage: Stage) -> Self {
        Self { features, label: stage.label(), stage }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub sam_rho: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            momentum: 0.9,
            sam_rho: 0.05,
            batch_size: 16,
            epochs: 300,
            seed: 0,
        }
    }
}

/// In-place SGD-with-momentum update: v ← μ·v + g, w ← w − lr·v.
pub fn sgd_momentum_step(
    model: &mut DetectorModel,
    grad: &GradientBuffer,
    velocity: &mut MomentumState,
    learning_rate: f64,
    momentum: f64,
) {
    for ((w, g), v) in model
        .param_iter_mut()
        .zip(grad.param_iter())
        .zip(velocity.param_iter_mut())
    {
        *v = momentum * *v + g;
        *w -= learning_rate * *v;
    }
}

/// Sharpness-aware step: perturb to w + ρ·g/‖g‖, re-evaluate the
/// gradient there, and apply the momentum update from the original
/// weights. With ρ = 0 the perturbation is identically zero and the
/// update is bitwise-equal to plain SGD with momentum.
pub fn sam_step(
    model: &mut DetectorModel,
    batch: &[(FeatureVector, f64)],
    velocity: &mut MomentumState,
    learning_rate: f64,
    momentum: f64,
    rho: f64,
) {
    let g1 = model.backward(batch);
    let norm = g1.param_iter().map(|g| g * g).sum::<f64>().sqrt();
    let scale = rho / (norm + 1e-12);
    let grad = if scale == 0.0 {
        g1
    } else {
        let mut perturbed = model.clone();
        for (w, g) in perturbed.param_iter_mut().zip(g1.param_iter()) {
            *w += scale * g;
        }
        perturbed.backward(batch)
    };
    sgd_momentum_step(model, &grad, velocity, learning_rate, momentum);
}

/// Mean attack probability is the detector score.
pub fn predict_score(model: &DetectorModel, features: &FeatureVector) -> f64 {
    model.forward(features)
}

/// Train the detector with seeded epoch shuffles and SAM updates.
/// Returns the trained model and the per-epoch mean training loss.
///
/// Features are z-scored over the training set before optimization —
/// the artifact signal is tiny compared to raw feature offsets — and
/// the normalization is folded back into the first layer afterwards,
/// so the returned model still operates on raw feature vectors.
pub fn train(
    samples: &[Sample],
    config: &TrainConfig,
    rng: &mut RngStream,
) -> Result<(DetectorModel, Vec<f64>), DetectorError> {
    let has_attack = samples.iter().any(|s| s.label == 1.0);
    let has_bona = samples.iter().any(|s| s.label == 0.0);
    if samples.is_empty() || !has_attack || !has_bona {
        return Err(DetectorError::SingleClass);
    }
    let (mu, sigma) = feature_stats(samples);
    let standardized: Vec<FeatureVector> = samples
        .iter()
        .map(|s| {
            let mut x = s.features;
            for i in 0..x.len() {
                x[i] = (x[i] - mu[i]) / sigma[i];
            }
            x
        })
        .collect();
    let mut model = DetectorModel::init(&mut rng.substream("init"));
    let mut velocity = DetectorModel::zeros();
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut trace = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let mut erng = rng.substream("epoch").substream(epoch);
        shuffle(&mut order, &mut erng);
        let mut loss_sum = 0.0;
        let mut loss_n = 0usize;
        for chunk in order.chunks(config.batch_size.max(1)) {
            let batch: Vec<(FeatureVector, f64)> = chunk
                .iter()
                .map(|&i| (standardized[i], samples[i].label))
                .collect();
            loss_sum += model.batch_loss(&batch) * batch.len() as f64;
            loss_n += batch.len();
            sam_step(
                &mut model,
                &batch,
                &mut velocity,
                config.learning_rate,
                config.momentum,
                config.sam_rho,
            );
        }
        trace.push(loss_sum / loss_n as f64);
    }
    fold_standardization(&mut model, &mu, &sigma);
    Ok((model, trace))
}

/// Per-feature mean and standard deviation, floored away from zero.
fn feature_stats(samples: &[Sample]) -> (FeatureVector, FeatureVector) {
    let n = samples.len() as f64;
    let mut mu = [0.0f64; super::FEATURE_LEN];
    let mut sigma = [0.0f64; super::FEATURE_LEN];
    for s in samples {
        for i in 0..mu.len() {
            mu[i] += s.features[i];
        }
    }
    for m in mu.iter_mut() {
        *m /= n;
    }
    for s in samples {
        for i in 0..mu.len() {
            sigma[i] += (s.features[i] - mu[i]).powi(2);
        }
    }
    for s in sigma.iter_mut() {
        *s = (*s / n).sqrt().max(1e-8);
    }
    (mu, sigma)
}

/// Rewrite layer 0 so the model consumes raw features:
/// w·(x−μ)/σ + b  ≡  (w/σ)·x + (b − Σ w·μ/σ).
fn fold_standardization(model: &mut DetectorModel, mu: &FeatureVector, sigma: &FeatureVector) {
    let n_in = mu.len();
    let n_out = model.biases[0].len();
    for o in 0..n_out {
        let row = &mut model.weights[0][o * n_in..(o + 1) * n_in];
        let mut shift = 0.0;
        for i in 0..n_in {
            row[i] /= sigma[i];
            shift += row[i] * mu[i];
        }
        model.biases[0][o] -= shift;
    }
}

fn shuffle(order: &mut [usize], rng: &mut RngStream) {
    for i in (1..order.len()).rev() {
        let j = rng.below((i + 1) as u64) as usize;
        order.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::FEATURE_LEN;

    fn toy_samples(n: usize, seed: u64) -> Vec<Sample> {
        // Linearly separable on the first coordinate.
        let mut rng = RngStream::new(seed);
        let mut out = Vec::new();
        for i in 0..n {
            let mut x = [0.0f64; FEATURE_LEN];
            let attack = i % 2 == 0;
            x[0] = if attack { rng.range(1.0, 2.0) } else { rng.range(-2.0, -1.0) };
            for v in x.iter_mut().skip(1).take(8) {
                *v = rng.range(-0.2, 0.2);
            }
            out.push(Sample::new(x, if attack { Stage::Ms } else { Stage::Os }));
        }
        out
    }

    #[test]
    fn momentum_recursion_matches_closed_form() {
        // Constant gradient g: first step moves lr·g, second lr·(1.9)·g
        // with μ = 0.9.
        let mut model = DetectorModel::zeros();
        let mut grad = DetectorModel::zeros();
        grad.weights[0][0] = 2.0;
        let mut vel = DetectorModel::zeros();
        sgd_momentum_step(&mut model, &grad, &mut vel, 0.1, 0.9);
        assert!((model.weights[0][0] - (-0.2)).abs() < 1e-15);
        sgd_momentum_step(&mut model, &grad, &mut vel, 0.1, 0.9);
        assert!((model.weights[0][0] - (-0.2 - 0.1 * 1.9 * 2.0)).abs() < 1e-15);
    }

    #[test]
    fn sam_rho_zero_is_bitwise_sgd() {
        let mut rng = RngStream::new(5);
        let mut a = DetectorModel::init(&mut rng);
        let mut b = a.clone();
        let mut va = DetectorModel::zeros();
        let mut vb = DetectorModel::zeros();
        let mut x = [0.0f64; FEATURE_LEN];
        for v in &mut x {
            *v = rng.range(-1.0, 1.0);
        }
        let batch = vec![(x, 1.0)];
        for _ in 0..10 {
            sam_step(&mut a, &batch, &mut va, 0.01, 0.9, 0.0);
            let g = b.backward(&batch);
            sgd_momentum_step(&mut b, &g, &mut vb, 0.01, 0.9);
        }
        for (pa, pb) in a.param_iter().zip(b.param_iter()) {
            assert_eq!(pa.to_bits(), pb.to_bits());
        }
    }

    #[test]
    fn sam_reduces_loss_on_toy_problem() {
        let samples = toy_samples(40, 11);
        let mut rng = RngStream::new(3);
        let cfg = TrainConfig { epochs: 30, batch_size: 8, ..Default::default() };
        let (_, trace) = train(&samples, &cfg, &mut rng).unwrap();
        assert!(trace.last().unwrap() < trace.first().unwrap());
    }

    #[test]
    fn separable_problem_reaches_full_accuracy() {
        let samples = toy_samples(100, 7);
        let mut rng = RngStream::new(9);
        let cfg = TrainConfig {
            epochs: 50,
            batch_size: 16,
            learning_rate: 0.05,
            ..Default::default()
        };
        let (model, _) = train(&samples, &cfg, &mut rng).unwrap();
        let correct = samples
            .iter()
            .filter(|s| (predict_score(&model, &s.features) >= 0.5) == (s.label == 1.0))
            .count();
        assert_eq!(correct, samples.len());
    }

    #[test]
    fn fixed_seed_reproduces_trace() {
        let samples = toy_samples(30, 2);
        let cfg = TrainConfig { epochs: 5, ..Default::default() };
        let mut r1 = RngStream::new(77);
        let mut r2 = RngStream::new(77);
        let (m1, t1) = train(&samples, &cfg, &mut r1).unwrap();
        let (m2, t2) = train(&samples, &cfg, &mut r2).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(t1, t2);
    }

    #[test]
    fn single_class_rejected() {
        let mut samples = toy_samples(10, 1);
        samples.retain(|s| s.label == 1.0);
        let mut rng = RngStream::new(0);
        assert!(matches!(
            train(&samples, &TrainConfig::default(), &mut rng),
            Err(DetectorError::SingleClass)
        ));
    }

    #[test]
    fn label_flip_drops_below_chance() {
        // Train on flipped labels, evaluate against the true ones.
        let samples = toy_samples(100, 4);
        let flipped: Vec<Sample> = samples
            .iter()
            .map(|s| Sample {
                features: s.features,
                label: 1.0 - s.label,
                stage: s.stage,
            })
            .collect();
        let mut rng = RngStream::new(21);
        let cfg = TrainConfig {
            epochs: 50,
            batch_size: 16,
            learning_rate: 0.05,
            ..Default::default()
        };
        let (model, _) = train(&flipped, &cfg, &mut rng).unwrap();
        let acc = samples
            .iter()
            .filter(|s| (predict_score(&model, &s.features) >= 0.5) == (s.label == 1.0))
            .count() as f64
            / samples.len() as f64;
        assert!(acc < 0.5, "accuracy vs true labels was {acc}");
    }
}
