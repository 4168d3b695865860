//! Timing sweep over the number of datapoints, printed as CSV.

use qregress::{emit_report, run_scaling_n, GenSpec, ReportFormat, ScalingOptions, SolverConfig};

fn main() -> qregress::Result<()> {
    let n_values: Vec<usize> = (10..=18).map(|e| 1 << e).collect();
    let template = GenSpec::reference_setup(1).with_seed(1);
    let cfg = SolverConfig {
        num_reads: 100,
        ..SolverConfig::default()
    };
    let points = run_scaling_n(&n_values, &template, &cfg, 5, ScalingOptions::DESK)?;
    let rows: Vec<_> = points.into_iter().map(|p| p.row).collect();
    emit_report(&rows, ReportFormat::Csv, std::io::stdout())
}
