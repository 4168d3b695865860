//! Emulated readout faults: each returned bit flips with probability p, so
//! with 4 bits the chance of an untouched answer is (1 - p)^4.

use qregress::bench::DEFAULT_FIT_THRESHOLD;
use qregress::{run_recovery_experiment, GenSpec, SolverConfig};

fn main() -> qregress::Result<()> {
    let spec = GenSpec::reference_setup(100).with_seed(7).with_noise(0.1);
    for p in [0.0, 0.05, 0.1, 0.2] {
        let cfg = SolverConfig {
            fault_prob: p,
            ..SolverConfig::exhaustive()
        };
        let rep = run_recovery_experiment(400, &spec, &cfg, DEFAULT_FIT_THRESHOLD)?;
        println!(
            "p = {p:<4}  fit {:.3} (untouched {:.3})  qubo error fit/nofit {:.3}/{:.3}  hamming nofit {:.2}",
            rep.fit_fraction,
            (1.0 - p).powi(4),
            rep.qubo_error_fit,
            rep.qubo_error_nofit,
            rep.mean_hamming_nofit
        );
    }
    Ok(())
}
