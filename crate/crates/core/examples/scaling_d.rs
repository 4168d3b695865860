//! Timing sweep over the number of weights at fixed N.

use qregress::{run_scaling_d, GenSpec, PrecisionVector, ScalingOptions, SolverConfig};

fn main() -> qregress::Result<()> {
    let n = 1 << 16;
    let template = GenSpec::new(n, 2, PrecisionVector::new(vec![0.25, 0.5])?).with_seed(2);
    let cfg = SolverConfig {
        num_reads: 20,
        sweeps_per_read: 200,
        ..SolverConfig::default()
    };
    let d_values = [2, 4, 8, 16, 32];
    println!("d+1    M  formulate_ms  classical_ms  solve_ms");
    for p in run_scaling_d(&d_values, n, &template, &cfg, 5, ScalingOptions::DESK)? {
        println!(
            "{:>3} {:>4} {:>13.3} {:>13.3} {:>9.3}",
            p.row.scale_param,
            p.qubo_size,
            p.row.formulate_ms_mean,
            p.row.classical_ms_mean,
            p.row.solve_ms_mean
        );
    }
    Ok(())
}
