use proptest::prelude::*;
use qregress::solvers::{apply_fault_channel, hamming};
use qregress::{
    generate, qubo_energy, solve, solve_exhaustive, solve_regression_via_qubo, Backend, GenSpec,
    Qubo, SolverConfig,
};

/// Plain `zᵀAz + bᵀz` over every assignment; returns the minimum energy and
/// all assignments attaining it.
fn brute_force(q: &Qubo) -> (f64, Vec<Vec<u8>>) {
    let m = q.m();
    let mut best = f64::INFINITY;
    let mut argmins = Vec::new();
    for code in 0u32..1 << m {
        let z: Vec<u8> = (0..m).map(|i| ((code >> (m - 1 - i)) & 1) as u8).collect();
        let mut e = 0.0;
        for i in 0..m {
            for j in 0..m {
                e += q.a(i, j) * f64::from(z[i]) * f64::from(z[j]);
            }
            e += q.b()[i] * f64::from(z[i]);
        }
        let tol = 1e-9 * e.abs().max(1.0);
        if e < best - tol {
            best = e;
            argmins.clear();
            argmins.push(z);
        } else if (e - best).abs() <= tol {
            argmins.push(z);
        }
    }
    (best, argmins)
}

fn qubo_strategy(max_m: usize) -> impl Strategy<Value = Qubo> {
    (1..=max_m).prop_flat_map(|m| {
        (
            prop::collection::vec(-4i32..=4, m * (m + 1) / 2),
            prop::collection::vec(-4i32..=4, m),
        )
            .prop_map(move |(upper, b)| {
                let mut a = vec![0.0; m * m];
                let mut it = upper.into_iter();
                for i in 0..m {
                    for j in i..m {
                        let v = f64::from(it.next().unwrap()) * 0.5;
                        a[i * m + j] = v;
                        a[j * m + i] = v;
                    }
                }
                Qubo::new(m, a, b.into_iter().map(f64::from).collect(), 0.0).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exhaustive_matches_brute_force(q in qubo_strategy(10)) {
        let (min, argmins) = brute_force(&q);
        let out = solve_exhaustive(&q).unwrap();
        prop_assert!((out.best.energy - min).abs() <= 1e-9 * min.abs().max(1.0));
        prop_assert!(argmins.contains(&out.best.bits));
        // ties resolve to the lexicographically smallest minimizer
        let smallest = argmins.iter().min().unwrap();
        prop_assert_eq!(&out.best.bits, smallest);
        prop_assert_eq!(out.best.energy, qubo_energy(&q, &out.best.bits).unwrap());
    }

    #[test]
    fn annealer_reads_are_consistent(q in qubo_strategy(8), seed in any::<u64>()) {
        let cfg = SolverConfig { num_reads: 40, sweeps_per_read: 200, ..SolverConfig::default() }
            .with_seed(seed);
        let out = solve(&q, &cfg).unwrap();
        prop_assert_eq!(out.read_energies.len(), 40);
        prop_assert!(out.ground_state_hits >= 1 && out.ground_state_hits <= 40);
        prop_assert!(out.read_energies.iter().all(|&e| e >= out.best.energy));
        prop_assert_eq!(out.best.energy, qubo_energy(&q, &out.best.bits).unwrap());
        let exact = solve_exhaustive(&q).unwrap().best.energy;
        prop_assert!(out.best.energy >= exact - 1e-9 * exact.abs().max(1.0));
    }

    #[test]
    fn fewer_reads_are_a_prefix(q in qubo_strategy(8), seed in any::<u64>(), k in 1usize..30) {
        let cfg = SolverConfig { num_reads: 30, sweeps_per_read: 50, ..SolverConfig::default() }
            .with_seed(seed);
        let full = solve(&q, &cfg).unwrap();
        let part = solve(&q, &SolverConfig { num_reads: k, ..cfg }).unwrap();
        prop_assert_eq!(&part.read_energies[..], &full.read_energies[..k]);
        prop_assert!(full.best.energy <= part.best.energy);
    }
}

#[test]
fn annealer_is_deterministic_per_seed() {
    let q = Qubo::new(
        3,
        vec![1.0, -2.0, 0.5, -2.0, 1.0, 0.0, 0.5, 0.0, -1.0],
        vec![0.0; 3],
        0.0,
    )
    .unwrap();
    let cfg = SolverConfig::default().with_seed(11);
    assert_eq!(
        solve(&q, &cfg).unwrap().read_energies,
        solve(&q, &cfg).unwrap().read_energies
    );
}

#[test]
fn fault_channel_flip_rate_matches_probability() {
    let mut bits = vec![0u8; 20_000];
    apply_fault_channel(&mut bits, 0.1, 5);
    let flips = bits.iter().filter(|&&b| b == 1).count() as f64;
    // binomial(20000, 0.1): sd ≈ 42.4
    assert!((flips - 2000.0).abs() <= 5.0 * 42.4, "{flips}");
}

#[test]
fn faulty_readout_breaks_recovery_at_expected_rate() {
    // each of the 4 bits survives with probability 0.9
    let spec = GenSpec::reference_setup(30);
    let mut clean = 0;
    let runs = 400;
    for r in 0..runs {
        let data = generate(&spec.clone().with_seed(r)).unwrap();
        let cfg = SolverConfig {
            fault_prob: 0.1,
            ..SolverConfig::exhaustive()
        }
        .with_seed(r << 32);
        let rep = solve_regression_via_qubo(&data.dataset, &spec.precision, &cfg, Some(&data.bits))
            .unwrap();
        assert_eq!(rep.backend, Backend::Exhaustive);
        if rep.hamming_distance == Some(0) {
            clean += 1;
        }
    }
    let expected = 0.9f64.powi(4) * runs as f64;
    let sd = (runs as f64 * 0.9f64.powi(4) * (1.0 - 0.9f64.powi(4))).sqrt();
    assert!(
        (clean as f64 - expected).abs() <= 5.0 * sd,
        "{clean} vs {expected}"
    );
    assert_eq!(hamming(&[0, 1, 1], &[1, 1, 0]), 2);
}
