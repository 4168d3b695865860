//! QUBO solver backends and the end-to-end regression solve.
//!
//! Two backends sit behind [`solve`]: exhaustive enumeration, which serves
//! as the ground-truth oracle, and a multi-read simulated annealer that
//! stands in for a hardware annealer (many independent reads, keep the
//! lowest-energy one).

mod annealing;
mod exhaustive;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use annealing::{beta_schedule, solve_annealing};
pub use exhaustive::{solve_exhaustive, MAX_EXHAUSTIVE_VARS};

use crate::error::{Error, Result};
use crate::formulation::{build_qubo, decode, PrecisionVector};
use crate::qubo::{qubo_energy, BinarySolution, Qubo};
use crate::regression::{regression_error, Dataset, Weights};
use crate::timing::{millis, timed};

/// ChaCha stream reserved for the readout fault channel.
const FAULT_STREAM: u64 = 0xfa17;

/// Relative tolerance when counting reads that reached the best energy.
const HIT_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Exhaustive,
    SimulatedAnnealing,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Exhaustive => "exhaustive",
            Backend::SimulatedAnnealing => "simulated_annealing",
        })
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exhaustive" | "exact" => Ok(Backend::Exhaustive),
            "simulated_annealing" | "annealing" | "sa" => Ok(Backend::SimulatedAnnealing),
            other => Err(Error::parse(
                "backend",
                format!("unknown backend {other:?} (expected exhaustive or simulated_annealing)"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub backend: Backend,
    pub num_reads: usize,
    pub sweeps_per_read: usize,
    pub beta_initial: f64,
    pub beta_final: f64,
    pub seed: u64,
    /// Per-bit probability of flipping the returned assignment, emulating
    /// faulty hardware readout. Zero disables the channel.
    pub fault_prob: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: Backend::SimulatedAnnealing,
            num_reads: 1000,
            sweeps_per_read: 1000,
            beta_initial: 0.1,
            beta_final: 10.0,
            seed: 0,
            fault_prob: 0.0,
        }
    }
}

impl SolverConfig {
    pub fn exhaustive() -> Self {
        SolverConfig {
            backend: Backend::Exhaustive,
            ..SolverConfig::default()
        }
    }

    pub fn annealing() -> Self {
        SolverConfig::default()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_reads == 0 {
            return Err(Error::contract("num_reads must be at least 1"));
        }
        if self.sweeps_per_read == 0 {
            return Err(Error::contract("sweeps_per_read must be at least 1"));
        }
        if !(self.beta_initial > 0.0 && self.beta_final > self.beta_initial)
            || !self.beta_final.is_finite()
        {
            return Err(Error::contract(format!(
                "need 0 < beta_initial < beta_final, got {} and {}",
                self.beta_initial, self.beta_final
            )));
        }
        if !(0.0..=1.0).contains(&self.fault_prob) {
            return Err(Error::contract(format!(
                "fault_prob must lie in [0, 1], got {}",
                self.fault_prob
            )));
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and `#`
    /// comments are ignored; unknown keys are an error.
    pub fn apply_kv(mut self, text: &str) -> Result<Self> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let ctx = || format!("solver config line {}", lineno + 1);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(ctx(), format!("expected key=value, got {raw:?}")))?;
            let value = value.trim();
            let bad = |e: &dyn fmt::Display| Error::parse(ctx(), format!("{}: {e}", key.trim()));
            match key.trim() {
                "backend" => self.backend = value.parse()?,
                "num_reads" => self.num_reads = value.parse().map_err(|e| bad(&e))?,
                "sweeps_per_read" => self.sweeps_per_read = value.parse().map_err(|e| bad(&e))?,
                "beta_initial" => self.beta_initial = value.parse().map_err(|e| bad(&e))?,
                "beta_final" => self.beta_final = value.parse().map_err(|e| bad(&e))?,
                "seed" => self.seed = value.parse().map_err(|e| bad(&e))?,
                "fault_prob" => self.fault_prob = value.parse().map_err(|e| bad(&e))?,
                other => {
                    return Err(Error::parse(ctx(), format!("unknown key {other:?}")));
                }
            }
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub best: BinarySolution,
    /// Best energy of each read, in read order.
    pub read_energies: Vec<f64>,
    pub ground_state_hits: usize,
    pub solve_time_ms: f64,
}

impl SolveOutcome {
    /// Reduces per-read results: lowest energy wins, ties go to the
    /// lexicographically smallest bit vector.
    pub(crate) fn from_reads(reads: Vec<BinarySolution>, solve_time_ms: f64) -> Self {
        let best = reads
            .iter()
            .min_by(|x, y| {
                x.energy
                    .total_cmp(&y.energy)
                    .then_with(|| x.bits.cmp(&y.bits))
            })
            .cloned()
            .expect("at least one read");
        let tol = HIT_RTOL * best.energy.abs().max(1.0);
        let ground_state_hits = reads
            .iter()
            .filter(|r| r.energy <= best.energy + tol)
            .count();
        SolveOutcome {
            read_energies: reads.into_iter().map(|r| r.energy).collect(),
            best,
            ground_state_hits,
            solve_time_ms,
        }
    }
}

/// Dispatches to the configured backend.
pub fn solve(q: &Qubo, cfg: &SolverConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    match cfg.backend {
        Backend::Exhaustive => solve_exhaustive(q),
        Backend::SimulatedAnnealing => solve_annealing(q, cfg),
    }
}

/// Result of training a regression model through the QUBO path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub weights: Weights,
    pub error: f64,
    pub formulate_time_ms: f64,
    pub solve_time_ms: f64,
    pub ground_state_hits: usize,
    pub num_reads: usize,
    pub hamming_distance: Option<usize>,
    pub bits: Vec<u8>,
    pub energy: f64,
    pub qubo_size: usize,
    pub backend: Backend,
    pub seed: u64,
}

/// Builds the QUBO, solves it, decodes the weights and scores them.
///
/// `truth_bits`, when given, is compared against the returned assignment
/// to report a Hamming distance. A nonzero `cfg.fault_prob` corrupts the
/// returned assignment bit by bit before decoding.
pub fn solve_regression_via_qubo(
    ds: &Dataset,
    p: &PrecisionVector,
    cfg: &SolverConfig,
    truth_bits: Option<&[u8]>,
) -> Result<SolveReport> {
    cfg.validate()?;
    let (q, formulate) = timed(|| build_qubo(ds, p));
    let q = q?;
    if let Some(t) = truth_bits {
        if t.len() != q.m() {
            return Err(Error::contract(format!(
                "ground-truth bit vector has length {}, QUBO has {}",
                t.len(),
                q.m()
            )));
        }
    }
    let outcome = solve(&q, cfg)?;
    let num_reads = outcome.read_energies.len();

    let mut bits = outcome.best.bits;
    if cfg.fault_prob > 0.0 {
        apply_fault_channel(&mut bits, cfg.fault_prob, cfg.seed);
    }
    let energy = qubo_energy(&q, &bits)?;
    let weights = decode(p, &bits)?;
    let error = regression_error(ds, &weights)?;
    let hamming_distance = truth_bits.map(|t| hamming(t, &bits));

    Ok(SolveReport {
        weights,
        error,
        formulate_time_ms: millis(formulate),
        solve_time_ms: outcome.solve_time_ms,
        ground_state_hits: outcome.ground_state_hits,
        num_reads,
        hamming_distance,
        bits,
        energy,
        qubo_size: q.m(),
        backend: cfg.backend,
        seed: cfg.seed,
    })
}

/// Flips each bit independently with probability `prob`.
pub fn apply_fault_channel(bits: &mut [u8], prob: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(FAULT_STREAM);
    for b in bits.iter_mut() {
        if rng.random::<f64>() < prob {
            *b ^= 1;
        }
    }
}

pub fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}
