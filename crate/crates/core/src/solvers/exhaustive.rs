use crate::error::{Error, Result};
use crate::qubo::{BinarySolution, Qubo};

use super::SolveOutcome;

/// Largest QUBO the exhaustive backend will enumerate.
pub const MAX_EXHAUSTIVE_VARS: usize = 24;

/// Enumerates all `2^M` assignments and returns the global minimum.
///
/// Assignments are visited depth-first with bit 0 decided first and the
/// 0-branch before the 1-branch, i.e. in lexicographic order, and only a
/// strictly lower energy replaces the incumbent. Ties therefore resolve to
/// the lexicographically smallest bit vector. Partial energies are
/// accumulated in the same order as [`crate::qubo::qubo_energy`], so the
/// reported energy equals a direct recomputation exactly.
pub fn solve_exhaustive(q: &Qubo) -> Result<SolveOutcome> {
    let m = q.m();
    if m > MAX_EXHAUSTIVE_VARS {
        return Err(Error::SizeGuard {
            what: "exhaustive QUBO size",
            actual: m,
            limit: MAX_EXHAUSTIVE_VARS,
        });
    }
    let (best, elapsed) = crate::timing::timed(|| {
        let mut search = Search {
            diag: (0..m).map(|i| q.merged_diag(i)).collect(),
            coupling: (0..m * m).map(|ij| q.coupling(ij / m, ij % m)).collect(),
            m,
            bits: vec![0; m],
            best_bits: vec![0; m],
            best_energy: f64::INFINITY,
        };
        search.descend(0, 0.0);
        BinarySolution {
            bits: search.best_bits,
            energy: search.best_energy,
        }
    });
    Ok(SolveOutcome {
        read_energies: vec![best.energy],
        best,
        ground_state_hits: 1,
        solve_time_ms: crate::timing::millis(elapsed),
    })
}

struct Search {
    diag: Vec<f64>,
    coupling: Vec<f64>,
    m: usize,
    bits: Vec<u8>,
    best_bits: Vec<u8>,
    best_energy: f64,
}

impl Search {
    fn descend(&mut self, j: usize, acc: f64) {
        if j == self.m {
            if acc < self.best_energy {
                self.best_energy = acc;
                self.best_bits.copy_from_slice(&self.bits);
            }
            return;
        }
        self.bits[j] = 0;
        self.descend(j + 1, acc);

        let mut with = acc + self.diag[j];
        for i in 0..j {
            if self.bits[i] == 1 {
                with += self.coupling[i * self.m + j];
            }
        }
        self.bits[j] = 1;
        self.descend(j + 1, with);
        self.bits[j] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::qubo_energy;

    #[test]
    fn single_variable() {
        let q = Qubo::new(1, vec![2.0], vec![-3.0], 0.0).unwrap();
        let out = solve_exhaustive(&q).unwrap();
        assert_eq!(out.best.bits, vec![1]);
        assert_eq!(out.best.energy, -1.0);
    }

    #[test]
    fn all_zero_qubo_breaks_ties_toward_zero_vector() {
        let q = Qubo::new(5, vec![0.0; 25], vec![0.0; 5], 0.0).unwrap();
        let out = solve_exhaustive(&q).unwrap();
        assert_eq!(out.best.bits, vec![0; 5]);
        assert_eq!(out.best.energy, 0.0);
    }

    #[test]
    fn tie_prefers_lexicographically_smaller() {
        // z0 and z1 each lower the energy by 1 alone; together they cost +1
        let q = Qubo::new(2, vec![-1.0, 1.5, 1.5, -1.0], vec![0.0; 2], 0.0).unwrap();
        let out = solve_exhaustive(&q).unwrap();
        assert_eq!(out.best.bits, vec![0, 1]);
    }

    #[test]
    fn size_guard() {
        let m = MAX_EXHAUSTIVE_VARS + 1;
        let q = Qubo::new(m, vec![0.0; m * m], vec![0.0; m], 0.0).unwrap();
        assert!(matches!(solve_exhaustive(&q), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn energy_equals_recomputation_exactly() {
        let a: Vec<f64> = (0..36)
            .map(|ij| {
                let (i, j) = (ij / 6, ij % 6);
                ((i * 7 + j * 7 + i * j) % 11) as f64 * 0.1 - 0.55
            })
            .collect();
        let b: Vec<f64> = (0..6).map(|i| (i as f64 - 2.5) * 0.3).collect();
        let q = Qubo::new(6, a, b, 0.0).unwrap();
        let out = solve_exhaustive(&q).unwrap();
        assert_eq!(out.best.energy, qubo_energy(&q, &out.best.bits).unwrap());
    }
}
