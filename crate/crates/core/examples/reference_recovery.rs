//! Repeated recovery runs on one feature with ground truth [0.5, 0.75],
//! stratified by whether the QUBO solution fit the data.

use qregress::bench::DEFAULT_FIT_THRESHOLD;
use qregress::{run_recovery_experiment, GenSpec, SolverConfig};

fn main() -> qregress::Result<()> {
    for sigma in [0.0, 0.2] {
        let spec = GenSpec::reference_setup(100)
            .with_seed(2024)
            .with_noise(sigma);
        let cfg = SolverConfig {
            num_reads: 200,
            ..SolverConfig::default()
        };
        let rep = run_recovery_experiment(100, &spec, &cfg, DEFAULT_FIT_THRESHOLD)?;
        println!("sigma {sigma}:");
        println!(
            "  fit {}/{} runs, exact bits in {}",
            rep.fit_runs, rep.runs, rep.recovered_runs
        );
        println!(
            "  classical error {:.4} overall, QUBO error {:.4} overall",
            rep.classical_error_overall, rep.qubo_error_overall
        );
    }
    Ok(())
}
