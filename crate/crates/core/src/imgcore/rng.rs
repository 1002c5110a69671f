use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

/// Path segment identifying a deterministic substream.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StreamLabel {
    Int(u64),
    Str(String),
}

impl From<u64> for StreamLabel {
    fn from(v: u64) -> Self {
        StreamLabel::Int(v)
    }
}

impl From<usize> for StreamLabel {
    fn from(v: usize) -> Self {
        StreamLabel::Int(v as u64)
    }
}

impl From<&str> for StreamLabel {
    fn from(v: &str) -> Self {
        StreamLabel::Str(v.to_string())
    }
}

impl From<String> for StreamLabel {
    fn from(v: String) -> Self {
        StreamLabel::Str(v)
    }
}

impl std::fmt::Display for StreamLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StreamLabel::Int(v) => write!(f, "{v}"),
            StreamLabel::Str(s) => write!(f, "{s}"),
        }
    }
}

/// Counter-based seeded random stream.
///
/// The internal generator state is derived from the (seed, path) pair
/// alone, so sibling substreams are independent of each other and of
/// how many draws the parent has made. Identical (seed, path) yields an
/// identical draw sequence on every platform and thread schedule.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    path: Vec<StreamLabel>,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::from_path(seed, Vec::new())
    }

    fn from_path(seed: u64, path: Vec<StreamLabel>) -> Self {
        let key = derive_key(seed, &path);
        Self { seed, path, rng: ChaCha8Rng::from_seed(key) }
    }

    /// Child stream deterministic in (parent path, label).
    pub fn substream(&self, label: impl Into<StreamLabel>) -> RngStream {
        let mut path = self.path.clone();
        path.push(label.into());
        Self::from_path(self.seed, path)
    }

    /// Path rendered as "a/b/c", recorded in manifests for provenance.
    pub fn path_string(&self) -> String {
        self.path
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join("/")
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.uniform() * (hi - lo)
    }

    /// Uniform integer in [0, n). n must be nonzero.
    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    /// Uniform integer in [lo, hi] inclusive.
    pub fn int_range(&mut self, lo: u64, hi: u64) -> u64 {
        lo + self.below(hi - lo + 1)
    }

    /// Bernoulli draw with probability p.
    pub fn coin(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Sample k distinct indices from 0..n via partial Fisher–Yates.
    pub fn sample_without_replacement(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

fn derive_key(seed: u64, path: &[StreamLabel]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for label in path {
        match label {
            StreamLabel::Int(v) => {
                h.update([0x02]);
                h.update(v.to_le_bytes());
            }
            StreamLabel::Str(s) => {
                h.update([0x01]);
                h.update((s.len() as u64).to_le_bytes());
                h.update(s.as_bytes());
            }
        }
    }
    h.finalize().into()
}
