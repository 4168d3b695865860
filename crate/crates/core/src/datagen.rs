//! Seeded synthetic regression data.
//!
//! Ground-truth weights are always representable by the precision vector.
//! Features, label noise and the ground-truth draw use separate ChaCha8
//! streams of the same seed, so changing `n` never perturbs the ground truth
//! and changing `noise_sigma` never perturbs the features.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulation::{decode, encode_weight, PrecisionVector};
use crate::regression::{dot, Dataset, Weights};

const FEATURE_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;
const TRUTH_STREAM: u64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub d_plus_1: usize,
    pub precision: PrecisionVector,
    pub noise_sigma: f64,
    pub feature_low: f64,
    pub feature_high: f64,
    pub seed: u64,
    pub ground_truth: Option<Weights>,
}

impl GenSpec {
    /// Defaults: features uniform in [-1, 1), no noise, random ground truth.
    pub fn new(n: usize, d_plus_1: usize, precision: PrecisionVector) -> Self {
        GenSpec {
            n,
            d_plus_1,
            precision,
            noise_sigma: 0.0,
            feature_low: -1.0,
            feature_high: 1.0,
            seed: 0,
            ground_truth: None,
        }
    }

    /// One feature, `P = [0.25, 0.5]`, ground truth `[0.5, 0.75]`.
    pub fn reference_setup(n: usize) -> Self {
        let p = PrecisionVector::new(vec![0.25, 0.5]).expect("valid precision vector");
        GenSpec {
            ground_truth: Some(Weights::new(vec![0.5, 0.75]).expect("finite weights")),
            ..GenSpec::new(n, 2, p)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d_plus_1 == 0 {
            return Err(Error::contract("need n >= 1 and d+1 >= 1"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::contract(format!(
                "noise_sigma must be finite and nonnegative, got {}",
                self.noise_sigma
            )));
        }
        if !self.feature_low.is_finite()
            || !self.feature_high.is_finite()
            || self.feature_low >= self.feature_high
        {
            return Err(Error::contract(format!(
                "need finite feature_low < feature_high, got [{}, {})",
                self.feature_low, self.feature_high
            )));
        }
        if let Some(w) = &self.ground_truth {
            if w.len() != self.d_plus_1 {
                return Err(Error::contract(format!(
                    "ground truth has {} weights, expected {}",
                    w.len(),
                    self.d_plus_1
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedData {
    pub dataset: Dataset,
    pub weights: Weights,
    pub bits: Vec<u8>,
}

/// Sidecar written next to a generated CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthSidecar {
    pub weights: Weights,
    pub bits: Vec<u8>,
    pub spec: GenSpec,
}

impl TruthSidecar {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub fn generate(spec: &GenSpec) -> Result<GeneratedData> {
    spec.validate()?;
    let p = &spec.precision;
    let k = p.k();

    let bits = match &spec.ground_truth {
        Some(w) => {
            let mut bits = Vec::with_capacity(w.len() * k);
            for &wi in w.as_slice() {
                let code = encode_weight(p, wi).ok_or_else(|| {
                    Error::contract(format!(
                        "ground-truth weight {wi} is not representable by {p}"
                    ))
                })?;
                bits.extend(code);
            }
            bits
        }
        None => {
            let mut rng = stream(spec.seed, TRUTH_STREAM);
            (0..spec.d_plus_1 * k)
                .map(|_| rng.random_range(0..2u8))
                .collect()
        }
    };
    let weights = decode(p, &bits)?;

    let cols = spec.d_plus_1;
    let mut frng = stream(spec.seed, FEATURE_STREAM);
    let mut x = Vec::with_capacity(spec.n * cols);
    for _ in 0..spec.n {
        for _ in 0..cols - 1 {
            x.push(frng.random_range(spec.feature_low..spec.feature_high));
        }
        x.push(1.0);
    }
    let w = weights.as_slice();
    let mut y: Vec<f64> = x.chunks_exact(cols).map(|row| dot(row, w)).collect();
    if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma)
            .map_err(|e| Error::contract(format!("noise distribution: {e}")))?;
        let mut nrng = stream(spec.seed, NOISE_STREAM);
        for yi in &mut y {
            *yi += normal.sample(&mut nrng);
        }
    }
    let ds = Dataset::new(x, spec.n, cols, y)?;

    Ok(GeneratedData {
        dataset: ds,
        weights,
        bits,
    })
}

/// `ds.csv` becomes `ds.truth.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("truth.json")
}

/// Writes the dataset CSV and its ground-truth sidecar; returns the sidecar
/// path.
pub fn write_generated(data: &GeneratedData, spec: &GenSpec, csv_path: &Path) -> Result<PathBuf> {
    data.dataset.save_csv(csv_path)?;
    let sidecar = TruthSidecar {
        weights: data.weights.clone(),
        bits: data.bits.clone(),
        spec: spec.clone(),
    };
    let path = sidecar_path(csv_path);
    let mut text = serde_json::to_string_pretty(&sidecar)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
