//! Solve one QUBO with both backends and compare the read statistics.

use qregress::{build_qubo, generate, solve, GenSpec, PrecisionVector, SolverConfig};

fn main() -> qregress::Result<()> {
    let p = PrecisionVector::new(vec![-0.5, 0.25, 0.5])?;
    let data = generate(
        &GenSpec::new(200, 4, p.clone())
            .with_seed(12)
            .with_noise(0.2),
    )?;
    let q = build_qubo(&data.dataset, &p)?;
    println!("M = {}", q.m());

    let exact = solve(&q, &SolverConfig::exhaustive())?;
    println!(
        "exhaustive: energy {:.6}, bits {:?}, {:.2} ms",
        exact.best.energy, exact.best.bits, exact.solve_time_ms
    );

    for num_reads in [1, 10, 100, 1000] {
        let cfg = SolverConfig {
            num_reads,
            ..SolverConfig::default()
        }
        .with_seed(5);
        let sa = solve(&q, &cfg)?;
        println!(
            "annealing {num_reads:>4} reads: energy {:.6}, {} hits, {:.2} ms",
            sa.best.energy, sa.ground_state_hits, sa.solve_time_ms
        );
    }
    Ok(())
}
