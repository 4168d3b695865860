//! Recovery-rate and scaling experiments.
//!
//! Timing columns cover only the classical solve call, QUBO formulation and
//! the QUBO solve. Data generation and I/O are excluded. Scaling sweeps run
//! serially so timings are not perturbed by sibling work; the recovery
//! experiment reports no timings and runs its repetitions in parallel.
//!
//! A sweep generates every point's dataset up front and then visits the
//! points round-robin, one repetition each per round. Slow drift in machine
//! load then lands on all points alike instead of skewing whichever point
//! happened to be running. The price is that all datasets of a sweep are
//! resident at once.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{generate, GenSpec};
use crate::error::{Error, Result};
use crate::formulation::{build_qubo, decode};
use crate::regression::{regression_error, solve_analytical};
use crate::solvers::{
    solve, solve_regression_via_qubo, Backend, SolverConfig, MAX_EXHAUSTIVE_VARS,
};
use crate::timing::{millis, timed};

/// Column order of the scaling CSV.
pub const CSV_COLUMNS: [&str; 12] = [
    "scale_param",
    "runs",
    "classical_ms_mean",
    "classical_ms_std",
    "formulate_ms_mean",
    "formulate_ms_std",
    "solve_ms_mean",
    "solve_ms_std",
    "combined_ms_mean",
    "combined_ms_std",
    "classical_error_mean",
    "qubo_error_mean",
];

/// Default fit threshold: a run fits when the QUBO error is at most this
/// multiple of the classical error.
pub const DEFAULT_FIT_THRESHOLD: f64 = 1.5;

/// One sweep point; field names match [`CSV_COLUMNS`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub scale_param: usize,
    pub runs: usize,
    pub classical_ms_mean: f64,
    pub classical_ms_std: f64,
    pub formulate_ms_mean: f64,
    pub formulate_ms_std: f64,
    pub solve_ms_mean: f64,
    pub solve_ms_std: f64,
    pub combined_ms_mean: f64,
    pub combined_ms_std: f64,
    pub classical_error_mean: f64,
    pub qubo_error_mean: f64,
}

/// A sweep row together with the QUBO size used at that point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub row: ExperimentRow,
    pub qubo_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub runs: usize,
    pub fit_threshold: f64,
    pub fit_runs: usize,
    pub fit_fraction: f64,
    /// Runs whose returned bits equal the ground-truth bits.
    pub recovered_runs: usize,
    pub classical_error_fit: f64,
    pub classical_error_nofit: f64,
    pub classical_error_overall: f64,
    pub qubo_error_fit: f64,
    pub qubo_error_nofit: f64,
    pub qubo_error_overall: f64,
    pub mean_hamming_nofit: f64,
    pub mean_hamming_overall: f64,
    pub noise_sigma: f64,
    pub backend: Backend,
    pub seed: u64,
    pub solver_seed: u64,
}

/// Limits for scaling sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingOptions {
    /// Largest dataset size a sweep may allocate.
    pub max_n: usize,
}

impl ScalingOptions {
    /// Desk scale: N capped at 2^21.
    pub const DESK: ScalingOptions = ScalingOptions { max_n: 1 << 21 };
    /// Full sweep up to 2^24 rows.
    pub const FULL: ScalingOptions = ScalingOptions { max_n: 1 << 24 };
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions::DESK
    }
}

/// Desk-scale N sweep, 2^9 ..= 2^21.
pub fn default_n_values() -> Vec<usize> {
    (9..=21).map(|e| 1usize << e).collect()
}

/// Even d+1 from 2 to 32.
pub fn default_d_values() -> Vec<usize> {
    (2..=32).step_by(2).collect()
}

pub const DEFAULT_D_SWEEP_N: usize = 524_288;

/// Solver seed for repetition `r`; reads inside a run use the low 32 bits,
/// so shifting keeps runs on disjoint read streams.
fn run_seed(base: u64, r: usize) -> u64 {
    base ^ ((r as u64) << 32)
}

struct RunRecord {
    classical_error: f64,
    qubo_error: f64,
    hamming: usize,
}

/// Repeats generate → classical solve → QUBO solve `runs` times and
/// stratifies the errors by whether the QUBO solve fit the data.
pub fn run_recovery_experiment(
    runs: usize,
    spec: &GenSpec,
    cfg: &SolverConfig,
    fit_threshold: f64,
) -> Result<RecoveryReport> {
    if runs == 0 {
        return Err(Error::contract("recovery experiment needs runs >= 1"));
    }
    if fit_threshold.is_nan() || fit_threshold < 0.0 {
        return Err(Error::contract("fit threshold must be nonnegative"));
    }
    spec.validate()?;
    cfg.validate()?;

    let records = (0..runs)
        .into_par_iter()
        .map(|r| {
            let run_spec = GenSpec {
                seed: spec.seed ^ r as u64,
                ..spec.clone()
            };
            let data = generate(&run_spec)?;
            let w = solve_analytical(&data.dataset)?;
            let classical_error = regression_error(&data.dataset, &w)?;
            let run_cfg = cfg.clone().with_seed(run_seed(cfg.seed, r));
            let rep = solve_regression_via_qubo(
                &data.dataset,
                &spec.precision,
                &run_cfg,
                Some(&data.bits),
            )?;
            Ok(RunRecord {
                classical_error,
                qubo_error: rep.error,
                hamming: rep.hamming_distance.unwrap_or(0),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let fits: Vec<bool> = records
        .iter()
        .map(|r| r.qubo_error <= fit_threshold * r.classical_error)
        .collect();
    let stratum = |want: bool, f: &dyn Fn(&RunRecord) -> f64| {
        mean(
            records
                .iter()
                .zip(&fits)
                .filter(|(_, &fit)| fit == want)
                .map(|(r, _)| f(r)),
        )
    };
    let fit_runs = fits.iter().filter(|&&f| f).count();
    let all = |f: &dyn Fn(&RunRecord) -> f64| mean(records.iter().map(f));

    Ok(RecoveryReport {
        runs,
        fit_threshold,
        fit_runs,
        fit_fraction: fit_runs as f64 / runs as f64,
        recovered_runs: records.iter().filter(|r| r.hamming == 0).count(),
        classical_error_fit: stratum(true, &|r| r.classical_error),
        classical_error_nofit: stratum(false, &|r| r.classical_error),
        classical_error_overall: all(&|r| r.classical_error),
        qubo_error_fit: stratum(true, &|r| r.qubo_error),
        qubo_error_nofit: stratum(false, &|r| r.qubo_error),
        qubo_error_overall: all(&|r| r.qubo_error),
        mean_hamming_nofit: stratum(false, &|r| r.hamming as f64),
        mean_hamming_overall: all(&|r| r.hamming as f64),
        noise_sigma: spec.noise_sigma,
        backend: cfg.backend,
        seed: spec.seed,
        solver_seed: cfg.seed,
    })
}

/// Timing sweep over dataset size at the template's d+1.
pub fn run_scaling_n(
    n_values: &[usize],
    template: &GenSpec,
    cfg: &SolverConfig,
    runs_per_point: usize,
    opts: ScalingOptions,
) -> Result<Vec<SweepPoint>> {
    if n_values.is_empty() {
        return Err(Error::contract("n sweep needs at least one value"));
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::contract("n values must be strictly ascending"));
    }
    if let Some(&n) = n_values.iter().find(|&&n| n > opts.max_n) {
        return Err(Error::SizeGuard {
            what: "dataset rows",
            actual: n,
            limit: opts.max_n,
        });
    }
    check_backend_cap(cfg, template.d_plus_1 * template.precision.k())?;
    let specs: Vec<(usize, GenSpec)> = n_values
        .iter()
        .enumerate()
        .map(|(idx, &n)| {
            let spec = GenSpec {
                n,
                seed: template.seed ^ idx as u64,
                ..template.clone()
            };
            (n, spec)
        })
        .collect();
    measure_sweep(&specs, cfg, runs_per_point)
}

/// Timing sweep over d+1 at fixed `n`; ground truth is drawn at random.
pub fn run_scaling_d(
    d_values: &[usize],
    n: usize,
    template: &GenSpec,
    cfg: &SolverConfig,
    runs_per_point: usize,
    opts: ScalingOptions,
) -> Result<Vec<SweepPoint>> {
    if d_values.is_empty() {
        return Err(Error::contract("d sweep needs at least one value"));
    }
    if n > opts.max_n {
        return Err(Error::SizeGuard {
            what: "dataset rows",
            actual: n,
            limit: opts.max_n,
        });
    }
    for &d1 in d_values {
        check_backend_cap(cfg, d1 * template.precision.k())?;
    }
    let specs: Vec<(usize, GenSpec)> = d_values
        .iter()
        .enumerate()
        .map(|(idx, &d1)| {
            let spec = GenSpec {
                n,
                d_plus_1: d1,
                ground_truth: None,
                seed: template.seed ^ idx as u64,
                ..template.clone()
            };
            (d1, spec)
        })
        .collect();
    measure_sweep(&specs, cfg, runs_per_point)
}

fn check_backend_cap(cfg: &SolverConfig, m: usize) -> Result<()> {
    if cfg.backend == Backend::Exhaustive && m > MAX_EXHAUSTIVE_VARS {
        return Err(Error::SizeGuard {
            what: "exhaustive QUBO size",
            actual: m,
            limit: MAX_EXHAUSTIVE_VARS,
        });
    }
    Ok(())
}

#[derive(Default)]
struct PointSamples {
    classical_ms: Vec<f64>,
    formulate_ms: Vec<f64>,
    solve_ms: Vec<f64>,
    combined_ms: Vec<f64>,
    classical_err: Vec<f64>,
    qubo_err: Vec<f64>,
    qubo_size: usize,
}

impl PointSamples {
    fn into_point(self, scale_param: usize, runs: usize) -> SweepPoint {
        let (classical_ms_mean, classical_ms_std) = mean_std(&self.classical_ms);
        let (formulate_ms_mean, formulate_ms_std) = mean_std(&self.formulate_ms);
        let (solve_ms_mean, solve_ms_std) = mean_std(&self.solve_ms);
        let (combined_ms_mean, combined_ms_std) = mean_std(&self.combined_ms);
        SweepPoint {
            row: ExperimentRow {
                scale_param,
                runs,
                classical_ms_mean,
                classical_ms_std,
                formulate_ms_mean,
                formulate_ms_std,
                solve_ms_mean,
                solve_ms_std,
                combined_ms_mean,
                combined_ms_std,
                classical_error_mean: mean(self.classical_err.iter().copied()),
                qubo_error_mean: mean(self.qubo_err.iter().copied()),
            },
            qubo_size: self.qubo_size,
        }
    }
}

/// Generates one dataset per point, then times `runs` rounds over all
/// points. Repetition `r` of every point uses solver seed `run_seed(seed, r)`.
fn measure_sweep(
    specs: &[(usize, GenSpec)],
    cfg: &SolverConfig,
    runs: usize,
) -> Result<Vec<SweepPoint>> {
    if runs == 0 {
        return Err(Error::contract("runs_per_point must be at least 1"));
    }
    cfg.validate()?;
    let data = specs
        .iter()
        .map(|(_, spec)| generate(spec))
        .collect::<Result<Vec<_>>>()?;
    let mut samples: Vec<PointSamples> = specs.iter().map(|_| PointSamples::default()).collect();

    for r in 0..runs {
        let run_cfg = cfg.clone().with_seed(run_seed(cfg.seed, r));
        for ((_, spec), (data, s)) in specs.iter().zip(data.iter().zip(&mut samples)) {
            let ds = &data.dataset;
            let p = &spec.precision;

            let (w, t_classical) = timed(|| solve_analytical(ds));
            s.classical_err.push(regression_error(ds, &w?)?);

            let (q, t_formulate) = timed(|| build_qubo(ds, p));
            let q = q?;
            s.qubo_size = q.m();
            let (outcome, t_solve) = timed(|| solve(&q, &run_cfg));
            let outcome = outcome?;
            s.qubo_err
                .push(regression_error(ds, &decode(p, &outcome.best.bits)?)?);

            let (f, sv) = (millis(t_formulate), millis(t_solve));
            s.classical_ms.push(millis(t_classical));
            s.formulate_ms.push(f);
            s.solve_ms.push(sv);
            s.combined_ms.push(f + sv);
        }
    }

    Ok(specs
        .iter()
        .zip(samples)
        .map(|((scale, _), s)| s.into_point(*scale, runs))
        .collect())
}

/// Arithmetic mean; 0 for an empty sequence.
fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let m = mean(values.iter().copied());
    if values.len() < 2 {
        return (m, 0.0);
    }
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    (m, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::parse(
                "report format",
                format!("unknown format {other:?}"),
            )),
        }
    }
}

/// Writes sweep rows as CSV (header + one line per row) or a JSON array.
pub fn emit_report<W: Write>(
    rows: &[ExperimentRow],
    format: ReportFormat,
    mut out: W,
) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::contract("cannot emit an empty report"));
    }
    let io = |e| Error::io("<report>", e);
    match format {
        ReportFormat::Csv => {
            writeln!(out, "{}", CSV_COLUMNS.join(",")).map_err(io)?;
            for r in rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.scale_param,
                    r.runs,
                    r.classical_ms_mean,
                    r.classical_ms_std,
                    r.formulate_ms_mean,
                    r.formulate_ms_std,
                    r.solve_ms_mean,
                    r.solve_ms_std,
                    r.combined_ms_mean,
                    r.combined_ms_std,
                    r.classical_error_mean,
                    r.qubo_error_mean
                )
                .map_err(io)?;
            }
        }
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out).map_err(io)?;
        }
    }
    Ok(())
}

/// Parses the CSV written by [`emit_report`].
pub fn parse_report_csv(text: &str) -> Result<Vec<ExperimentRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| Error::parse("report csv", e.to_string()))?;
    if header.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(Error::parse(
            "report csv",
            format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        ));
    }
    rdr.deserialize()
        .map(|rec| rec.map_err(|e| Error::parse("report csv", e.to_string())))
        .collect()
}

/// Zeroes every timing column so reports compare byte for byte.
pub fn strip_timing(row: &mut ExperimentRow) {
    row.classical_ms_mean = 0.0;
    row.classical_ms_std = 0.0;
    row.formulate_ms_mean = 0.0;
    row.formulate_ms_std = 0.0;
    row.solve_ms_mean = 0.0;
    row.solve_ms_std = 0.0;
    row.combined_ms_mean = 0.0;
    row.combined_ms_std = 0.0;
}
