use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::qubo::{energy_unchecked, BinarySolution, Qubo};

use super::{SolveOutcome, SolverConfig};

/// Inverse temperature for each sweep, geometric from `beta_initial` to
/// `beta_final`.
pub fn beta_schedule(beta_initial: f64, beta_final: f64, sweeps: usize) -> Vec<f64> {
    if sweeps <= 1 {
        return vec![beta_initial; sweeps];
    }
    let ratio = (beta_final / beta_initial).ln() / (sweeps - 1) as f64;
    (0..sweeps)
        .map(|s| beta_initial * (ratio * s as f64).exp())
        .collect()
}

/// Multi-read single-bit-flip Metropolis annealing.
///
/// Read `r` draws from a generator seeded with `seed ^ r`, so each read is
/// independent of how many reads run and of execution order. Every sweep
/// scans the variables in index order. A read reports the lowest-energy
/// state it visited.
pub fn solve_annealing(q: &Qubo, cfg: &SolverConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    let (reads, elapsed) = crate::timing::timed(|| {
        let model = Couplings::new(q);
        let schedule = beta_schedule(cfg.beta_initial, cfg.beta_final, cfg.sweeps_per_read);
        (0..cfg.num_reads as u64)
            .into_par_iter()
            .map(|r| {
                let bits = model.anneal(&schedule, cfg.seed ^ r);
                let energy = energy_unchecked(q, &bits);
                BinarySolution { bits, energy }
            })
            .collect::<Vec<_>>()
    });
    Ok(SolveOutcome::from_reads(
        reads,
        crate::timing::millis(elapsed),
    ))
}

struct Couplings {
    m: usize,
    diag: Vec<f64>,
    /// Full symmetric merged couplings with a zero diagonal.
    coupling: Vec<f64>,
}

impl Couplings {
    fn new(q: &Qubo) -> Self {
        let m = q.m();
        let coupling = (0..m * m)
            .map(|ij| {
                let (i, j) = (ij / m, ij % m);
                if i == j {
                    0.0
                } else {
                    q.coupling(i, j)
                }
            })
            .collect();
        Couplings {
            m,
            diag: (0..m).map(|i| q.merged_diag(i)).collect(),
            coupling,
        }
    }

    fn anneal(&self, schedule: &[f64], seed: u64) -> Vec<u8> {
        let m = self.m;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bits: Vec<u8> = (0..m).map(|_| rng.random_range(0..2u8)).collect();
        // field[i] = Σ_{j≠i} coupling_ij z_j
        let mut field = vec![0.0; m];
        for (i, f) in field.iter_mut().enumerate() {
            let row = &self.coupling[i * m..(i + 1) * m];
            *f = row.iter().zip(&bits).map(|(c, &z)| c * z as f64).sum();
        }
        let mut energy = energy_from_fields(&self.diag, &field, &bits);
        let mut best_energy = energy;
        let mut best_bits = bits.clone();

        for &beta in schedule {
            for i in 0..m {
                let gain = self.diag[i] + field[i];
                let delta = if bits[i] == 0 { gain } else { -gain };
                let accept = delta <= 0.0 || rng.random::<f64>() < (-beta * delta).exp();
                if !accept {
                    continue;
                }
                let sign = if bits[i] == 0 { 1.0 } else { -1.0 };
                bits[i] ^= 1;
                energy += delta;
                let row = &self.coupling[i * m..(i + 1) * m];
                for (f, c) in field.iter_mut().zip(row) {
                    *f += sign * c;
                }
                if energy < best_energy {
                    best_energy = energy;
                    best_bits.copy_from_slice(&bits);
                }
            }
        }
        best_bits
    }
}

fn energy_from_fields(diag: &[f64], field: &[f64], bits: &[u8]) -> f64 {
    // each coupling appears in two fields
    bits.iter()
        .zip(diag.iter().zip(field))
        .filter(|(&z, _)| z == 1)
        .map(|(_, (d, f))| d + 0.5 * f)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{solve_exhaustive, Backend};

    fn cfg(reads: usize, sweeps: usize, seed: u64) -> SolverConfig {
        SolverConfig {
            backend: Backend::SimulatedAnnealing,
            num_reads: reads,
            sweeps_per_read: sweeps,
            seed,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn schedule_endpoints_and_monotone() {
        let s = beta_schedule(0.1, 10.0, 5);
        assert!((s[0] - 0.1).abs() < 1e-15);
        assert!((s[4] - 10.0).abs() < 1e-12);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert!((s[2] - 1.0).abs() < 1e-12);
        assert_eq!(beta_schedule(0.1, 10.0, 1), vec![0.1]);
    }

    #[test]
    fn single_variable_any_config() {
        let q = Qubo::new(1, vec![2.0], vec![-3.0], 0.0).unwrap();
        for seed in 0..5 {
            let out = solve_annealing(&q, &cfg(1, 3, seed)).unwrap();
            assert_eq!(out.best.energy, -1.0);
            assert_eq!(out.best.bits, vec![1]);
        }
    }

    #[test]
    fn four_variable_instance_defaults() {
        let a = vec![
            5.0, 10.0, 3.0, 6.0, 10.0, 20.0, 6.0, 12.0, 3.0, 6.0, 2.0, 4.0, 6.0, 12.0, 4.0, 8.0,
        ];
        let q = Qubo::new(4, a, vec![-26.0, -52.0, -16.0, -32.0], 34.0).unwrap();
        let exact = solve_exhaustive(&q).unwrap();
        let out = solve_annealing(&q, &SolverConfig::annealing()).unwrap();
        assert_eq!(out.best, exact.best);
        assert_eq!(out.best.energy, -34.0);
        assert!(out.ground_state_hits as f64 / out.read_energies.len() as f64 >= 0.99);
    }

    #[test]
    fn same_seed_same_outcome() {
        let q = Qubo::new(
            3,
            vec![1.0, -2.0, 0.5, -2.0, 1.0, 0.3, 0.5, 0.3, -1.0],
            vec![0.1, -0.4, 0.2],
            0.0,
        )
        .unwrap();
        let a = solve_annealing(&q, &cfg(20, 50, 9)).unwrap();
        let b = solve_annealing(&q, &cfg(20, 50, 9)).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.read_energies, b.read_energies);
        assert_eq!(a.ground_state_hits, b.ground_state_hits);
    }

    #[test]
    fn incremental_energy_matches_direct() {
        let q = Qubo::new(
            3,
            vec![1.0, -2.0, 0.5, -2.0, 1.0, 0.3, 0.5, 0.3, -1.0],
            vec![0.1, -0.4, 0.2],
            0.0,
        )
        .unwrap();
        let model = Couplings::new(&q);
        for code in 0u8..8 {
            let bits: Vec<u8> = (0..3).map(|i| code >> i & 1).collect();
            let field: Vec<f64> = (0..3)
                .map(|i| {
                    (0..3)
                        .map(|j| model.coupling[i * 3 + j] * bits[j] as f64)
                        .sum()
                })
                .collect();
            let e = energy_from_fields(&model.diag, &field, &bits);
            assert!((e - energy_unchecked(&q, &bits)).abs() < 1e-12);
        }
    }
}
