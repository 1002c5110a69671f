use std::io::{Read, Write};
use std::path::Path;

use super::{DetectorError, FeatureVector, FEATURE_LEN};
use crate::imgcore::RngStream;

pub const LAYER_SIZES: [usize; 4] = [FEATURE_LEN, 64, 32, 1];
pub const MODEL_MAGIC: [u8; 4] = *b"SMAD";
pub const MODEL_VERSION: u32 = 1;

const LEAK: f64 = 0.01;
const PROB_EPS: f64 = 1e-12;

/// Fully-connected [86, 64, 32, 1] network, 64-bit parameters, leaky
/// rectifier hidden units and a logistic output.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorModel {
    /// weights[l] is out×in row-major for layer l.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// Per-parameter buffer with the same shape as the model; used for
/// gradients and momentum velocities.
pub type GradientBuffer = DetectorModel;
pub type MomentumState = DetectorModel;

impl DetectorModel {
    pub fn zeros() -> Self {
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..LAYER_SIZES.len() - 1 {
            weights.push(vec![0.0; LAYER_SIZES[l + 1] * LAYER_SIZES[l]]);
            biases.push(vec![0.0; LAYER_SIZES[l + 1]]);
        }
        Self { weights, biases }
    }

    /// Seeded uniform ±sqrt(6/(fan_in+fan_out)) init.
    pub fn init(rng: &mut RngStream) -> Self {
        let mut model = Self::zeros();
        for l in 0..LAYER_SIZES.len() - 1 {
            let bound = (6.0 / (LAYER_SIZES[l] + LAYER_SIZES[l + 1]) as f64).sqrt();
            for w in &mut model.weights[l] {
                *w = rng.range(-bound, bound);
            }
        }
        model
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    pub fn param_iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights
            .iter_mut()
            .zip(self.biases.iter_mut())
            .flat_map(|(w, b)| w.iter_mut().chain(b.iter_mut()))
    }

    pub fn param_iter(&self) -> impl Iterator<Item = &f64> {
        self.weights
            .iter()
            .zip(self.biases.iter())
            .flat_map(|(w, b)| w.iter().chain(b.iter()))
    }

    /// Forward pass returning the attack probability in (0, 1).
    pub fn forward(&self, x: &FeatureVector) -> f64 {
        let (p, _) = self.forward_trace(x);
        p
    }

    /// Forward pass keeping per-layer activations; used by backprop and
    /// by diagnostics (e.g. checking distance from rectifier kinks).
    pub fn forward_trace(&self, x: &FeatureVector) -> (f64, Vec<Vec<f64>>) {
        let mut activations: Vec<Vec<f64>> = vec![x.to_vec()];
        for l in 0..LAYER_SIZES.len() - 1 {
            let (n_in, n_out) = (LAYER_SIZES[l], LAYER_SIZES[l + 1]);
            let prev = &activations[l];
            let mut z = vec![0.0f64; n_out];
            for o in 0..n_out {
                let row = &self.weights[l][o * n_in..(o + 1) * n_in];
                let mut acc = self.biases[l][o];
                for i in 0..n_in {
                    acc += row[i] * prev[i];
                }
                z[o] = acc;
            }
            let last = l == LAYER_SIZES.len() - 2;
            let a: Vec<f64> = if last {
                z.iter().map(|&v| sigmoid(v)).collect()
            } else {
                z.iter().map(|&v| leaky_relu(v)).collect()
            };
            activations.push(a);
        }
        (activations.last().unwrap()[0], activations)
    }

    /// Exact analytic gradient of mean BCE over the batch.
    pub fn backward(&self, batch: &[(FeatureVector, f64)]) -> GradientBuffer {
        assert!(!batch.is_empty(), "backward requires a nonempty batch");
        let mut grad = DetectorModel::zeros();
        let inv_n = 1.0 / batch.len() as f64;
        for (x, y) in batch {
            let (p, acts) = self.forward_trace(x);
            // d(mean BCE)/dz for the logistic output is (p - y)/N.
            let mut delta = vec![(p - y) * inv_n];
            for l in (0..LAYER_SIZES.len() - 1).rev() {
                let (n_in, n_out) = (LAYER_SIZES[l], LAYER_SIZES[l + 1]);
                let prev = &acts[l];
                for o in 0..n_out {
                    let d = delta[o];
                    grad.biases[l][o] += d;
                    let row = &mut grad.weights[l][o * n_in..(o + 1) * n_in];
                    for i in 0..n_in {
                        row[i] += d * prev[i];
                    }
                }
                if l == 0 {
                    break;
                }
                // Propagate through the previous leaky rectifier.
                let mut next = vec![0.0f64; n_in];
                for o in 0..n_out {
                    let d = delta[o];
                    let row = &self.weights[l][o * n_in..(o + 1) * n_in];
                    for i in 0..n_in {
                        next[i] += d * row[i];
                    }
                }
                for (i, nd) in next.iter_mut().enumerate() {
                    *nd *= leaky_relu_grad(acts[l][i]);
                }
                delta = next;
            }
        }
        grad
    }

    /// Mean BCE loss over a batch, with probabilities clamped to
    /// [ε, 1−ε].
    pub fn batch_loss(&self, batch: &[(FeatureVector, f64)]) -> f64 {
        batch
            .iter()
            .map(|(x, y)| bce_loss(self.forward(x), *y))
            .sum::<f64>()
            / batch.len() as f64
    }

    pub fn save(&self, path: &Path) -> Result<(), DetectorError> {
        let mut out: Vec<u8> = Vec::new();
        out.extend_from_slice(&MODEL_MAGIC);
        out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
        out.extend_from_slice(&(LAYER_SIZES.len() as u32).to_le_bytes());
        for s in LAYER_SIZES {
            out.extend_from_slice(&(s as u32).to_le_bytes());
        }
        for l in 0..LAYER_SIZES.len() - 1 {
            for &w in &self.weights[l] {
                out.extend_from_slice(&w.to_le_bytes());
            }
            for &b in &self.biases[l] {
                out.extend_from_slice(&b.to_le_bytes());
            }
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, DetectorError> {
        let mut f = std::fs::File::open(path)?;
        let mut magic = [0u8; 4];
        f.read_exact(&mut magic)?;
        if magic != MODEL_MAGIC {
            return Err(DetectorError::BadModel("bad magic bytes".into()));
        }
        let mut u32buf = [0u8; 4];
        f.read_exact(&mut u32buf)?;
        let version = u32::from_le_bytes(u32buf);
        if version != MODEL_VERSION {
            return Err(DetectorError::BadModel(format!("unsupported version {version}")));
        }
        f.read_exact(&mut u32buf)?;
        let n_layers = u32::from_le_bytes(u32buf) as usize;
        if n_layers != LAYER_SIZES.len() {
            return Err(DetectorError::BadModel(format!("expected 4 layer sizes, got {n_layers}")));
        }
        for expect in LAYER_SIZES {
            f.read_exact(&mut u32buf)?;
            if u32::from_le_bytes(u32buf) as usize != expect {
                return Err(DetectorError::BadModel("layer size mismatch".into()));
            }
        }
        let mut model = Self::zeros();
        let mut f64buf = [0u8; 8];
        for l in 0..LAYER_SIZES.len() - 1 {
            for w in &mut model.weights[l] {
                f.read_exact(&mut f64buf)?;
                *w = f64::from_le_bytes(f64buf);
            }
            for b in &mut model.biases[l] {
                f.read_exact(&mut f64buf)?;
                *b = f64::from_le_bytes(f64buf);
            }
        }
        if !model.param_iter().all(|v| v.is_finite()) {
            return Err(DetectorError::BadModel("non-finite parameters".into()));
        }
        Ok(model)
    }

    /// Write an empty model trailer plus a JSON sidecar carrying the
    /// effective-config digest.
    pub fn save_with_sidecar(&self, path: &Path, config_digest: &str) -> Result<(), DetectorError> {
        self.save(path)?;
        let sidecar = path.with_extension("json");
        let mut f = std::fs::File::create(sidecar)?;
        writeln!(f, "{{\"config_digest\": \"{config_digest}\", \"version\": {MODEL_VERSION}}}")?;
        Ok(())
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[inline]
fn leaky_relu(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        LEAK * z
    }
}

/// Derivative expressed through the activation value; the subgradient
/// at 0 is the leak slope.
#[inline]
fn leaky_relu_grad(a: f64) -> f64 {
    if a > 0.0 {
        1.0
    } else {
        LEAK
    }
}

/// −[y·log p + (1−y)·log(1−p)] with p clamped to [ε, 1−ε].
pub fn bce_loss(p: f64, y: f64) -> f64 {
    let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}
