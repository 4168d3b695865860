//! The `qregress` command line.
//!
//! Exit status: 0 on success, 1 when a library operation fails (bad input,
//! missing file, contract violation), 2 on a usage error. Reports go to
//! standard output as JSON unless `--out` names a file. Randomized commands
//! take `--seed`, falling back to `QREGRESS_SEED` and then 0, and echo the
//! seed in their output.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use crate::bench::{
    self, emit_report, run_recovery_experiment, run_scaling_d, run_scaling_n, ReportFormat,
    ScalingOptions, DEFAULT_FIT_THRESHOLD,
};
use crate::datagen::{self, generate, GenSpec, TruthSidecar};
use crate::error::{Error, Result};
use crate::formulation::{build_qubo, PrecisionVector};
use crate::qubo::Qubo;
use crate::regression::{regression_error, solve_analytical, Dataset, Weights};
use crate::solvers::{solve, solve_regression_via_qubo, Backend, SolverConfig};
use crate::timing::{millis, timed};

const TIMING_FIELDS: [&str; 3] = ["formulate_time_ms", "solve_time_ms", "classical_time_ms"];

#[derive(Debug, Parser)]
#[command(
    name = "qregress",
    version,
    about = "Train linear regression as a QUBO and compare it with the normal equations"
)]
struct Cli {
    /// Cap on worker threads for parallel sections
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset (CSV) and its ground-truth sidecar
    GenData(GenDataArgs),
    /// Build the QUBO for a dataset and print it as JSON
    Formulate(FormulateArgs),
    /// Train through the QUBO path, or solve an exported QUBO file
    Solve(SolveArgs),
    /// Classical normal-equations solve
    Baseline(BaselineArgs),
    /// Repeated recovery experiment stratified by fit / no fit
    Recover(RecoverArgs),
    /// Timing sweep over the number of datapoints
    BenchN(BenchNArgs),
    /// Timing sweep over the number of weights d+1
    BenchD(BenchDArgs),
    /// Write the QUBO in coordinate-list or JSON form
    ExportQubo(ExportArgs),
}

#[derive(Debug, Args)]
struct PrecisionArgs {
    /// Comma-separated precision vector, e.g. 0.25,0.5 or -1,-1/2,1/2,1
    #[arg(long, default_value = "0.25,0.5")]
    precision: String,
    /// Accept precision entries that are not powers of two
    #[arg(long)]
    allow_any_precision: bool,
}

impl PrecisionArgs {
    fn parse(&self) -> Result<PrecisionVector> {
        PrecisionVector::parse(&self.precision, self.allow_any_precision)
    }
}

#[derive(Debug, Args)]
struct SeedArg {
    /// RNG seed (falls back to QREGRESS_SEED, then 0)
    #[arg(long, env = "QREGRESS_SEED")]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// exhaustive | simulated_annealing
    #[arg(long)]
    backend: Option<String>,
    /// Independent annealing reads
    #[arg(long)]
    num_reads: Option<usize>,
    /// Metropolis sweeps per read
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    beta_initial: Option<f64>,
    #[arg(long)]
    beta_final: Option<f64>,
    /// Per-bit readout fault probability (0 disables)
    #[arg(long)]
    fault_prob: Option<f64>,
    /// key=value solver config file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    seed: SeedArg,
}

impl SolverArgs {
    fn build(&self, default_backend: Backend) -> Result<SolverConfig> {
        let mut cfg = SolverConfig {
            backend: default_backend,
            ..SolverConfig::default()
        };
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            cfg = cfg.apply_kv(&text)?;
        }
        if let Some(b) = &self.backend {
            cfg.backend = b.parse()?;
        }
        if let Some(v) = self.num_reads {
            cfg.num_reads = v;
        }
        if let Some(v) = self.sweeps {
            cfg.sweeps_per_read = v;
        }
        if let Some(v) = self.beta_initial {
            cfg.beta_initial = v;
        }
        if let Some(v) = self.beta_final {
            cfg.beta_final = v;
        }
        if let Some(v) = self.fault_prob {
            cfg.fault_prob = v;
        }
        if let Some(s) = self.seed.seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write the report here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit (JSON) or zero (CSV) timing fields so outputs compare byte for byte
    #[arg(long)]
    no_timing: bool,
}

#[derive(Debug, Args)]
struct GenDataArgs {
    /// Number of datapoints
    #[arg(long)]
    n: usize,
    /// Number of features d (the intercept column is added)
    #[arg(long)]
    d: usize,
    #[command(flatten)]
    precision: PrecisionArgs,
    /// Standard deviation of Gaussian label noise
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Explicit ground-truth weights (d+1 values); drawn at random if absent
    #[arg(long)]
    truth: Option<String>,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    low: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    high: f64,
    #[command(flatten)]
    seed: SeedArg,
    /// CSV path; the sidecar is written next to it as <stem>.truth.json
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FormulateArgs {
    /// Dataset CSV
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    precision: PrecisionArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Dataset CSV
    #[arg(long, conflicts_with = "qubo", required_unless_present = "qubo")]
    data: Option<PathBuf>,
    /// Previously exported QUBO (coordinate list or JSON)
    #[arg(long)]
    qubo: Option<PathBuf>,
    #[command(flatten)]
    precision: PrecisionArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Ground-truth sidecar JSON, for the Hamming distance
    #[arg(long)]
    truth: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    /// Dataset CSV
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct RecoverArgs {
    #[arg(long, default_value_t = 100)]
    runs: usize,
    /// Datapoints per run
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Number of features d
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[command(flatten)]
    precision: PrecisionArgs,
    /// Ground-truth weights shared by every run; drawn per run if absent
    #[arg(long)]
    truth: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// A run fits when qubo_error <= threshold * classical_error
    #[arg(long, default_value_t = DEFAULT_FIT_THRESHOLD)]
    fit_threshold: f64,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    precision: PrecisionArgs,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Repetitions per sweep point (default 10, or 60 with --full-scale)
    #[arg(long)]
    runs: Option<usize>,
    /// Allow N up to 2^24 and use the long default sweep
    #[arg(long)]
    full_scale: bool,
    /// csv | json
    #[arg(long, default_value = "csv")]
    format: String,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct BenchNArgs {
    /// Comma-separated dataset sizes (default 2^9..2^21, or ..2^24 with --full-scale)
    #[arg(long)]
    n_values: Option<String>,
    /// Number of features d
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[command(flatten)]
    sweep: SweepArgs,
}

#[derive(Debug, Args)]
struct BenchDArgs {
    /// Comma-separated values of d+1 (default 2,4,...,32)
    #[arg(long)]
    d_values: Option<String>,
    /// Datapoints per sweep point
    #[arg(long, default_value_t = bench::DEFAULT_D_SWEEP_N)]
    n: usize,
    #[command(flatten)]
    sweep: SweepArgs,
}

#[derive(Debug, Args)]
struct ExportArgs {
    /// Dataset CSV
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    precision: PrecisionArgs,
    /// coo | json
    #[arg(long, default_value = "coo")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("usage error");
            eprintln!("qregress: {}", first.trim_start_matches("error: "));
            return 2;
        }
    };
    if let Some(n) = cli.threads {
        // a global pool may already exist when embedded in tests
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qregress: {e}");
            1
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::GenData(a) => gen_data(a),
        Command::Formulate(a) => formulate(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Baseline(a) => baseline(a),
        Command::Recover(a) => recover(a),
        Command::BenchN(a) => bench_n(a),
        Command::BenchD(a) => bench_d(a),
        Command::ExportQubo(a) => export_qubo(a),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::parse(what, format!("cannot parse {t:?}")))
        })
        .collect()
}

fn parse_weights(s: &str) -> Result<Weights> {
    Weights::new(parse_list(s, "weights")?)
}

/// Writes `text` to `out` (or stdout). Nothing is written unless the whole
/// report was produced.
fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn to_json<T: Serialize>(value: &T, no_timing: bool) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    if no_timing {
        strip_timing_fields(&mut v);
    }
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

fn strip_timing_fields(v: &mut Value) {
    if let Value::Object(map) = v {
        for key in TIMING_FIELDS {
            map.remove(key);
        }
        for child in map.values_mut() {
            strip_timing_fields(child);
        }
    }
}

fn gen_data(a: GenDataArgs) -> Result<()> {
    let p = a.precision.parse()?;
    let spec = GenSpec {
        n: a.n,
        d_plus_1: a.d + 1,
        precision: p,
        noise_sigma: a.sigma,
        feature_low: a.low,
        feature_high: a.high,
        seed: a.seed.seed.unwrap_or(0),
        ground_truth: a.truth.as_deref().map(parse_weights).transpose()?,
    };
    let data = generate(&spec)?;
    match &a.out {
        Some(path) => {
            let sidecar = datagen::write_generated(&data, &spec, path)?;
            #[derive(Serialize)]
            struct Summary<'a> {
                data: String,
                truth: String,
                seed: u64,
                weights: &'a Weights,
                bits: &'a [u8],
            }
            let summary = Summary {
                data: path.display().to_string(),
                truth: sidecar.display().to_string(),
                seed: spec.seed,
                weights: &data.weights,
                bits: &data.bits,
            };
            emit(&to_json(&summary, false)?, None)
        }
        None => {
            eprintln!("qregress: seed {}", spec.seed);
            let mut buf = Vec::new();
            data.dataset
                .write_csv(&mut buf)
                .map_err(|e| Error::io("<buffer>", e))?;
            emit(&String::from_utf8_lossy(&buf), None)
        }
    }
}

fn formulate(a: FormulateArgs) -> Result<()> {
    let ds = Dataset::load_csv(&a.data)?;
    let p = a.precision.parse()?;
    let (q, t) = timed(|| build_qubo(&ds, &p));
    let q = q?;
    let qubo: Value = serde_json::from_str(&q.to_json_string()?)?;
    let report = serde_json::json!({
        "qubo": qubo,
        "qubo_size": q.m(),
        "formulate_time_ms": millis(t),
    });
    emit(
        &to_json(&report, a.output.no_timing)?,
        a.output.out.as_deref(),
    )
}

fn solve_cmd(a: SolveArgs) -> Result<()> {
    let cfg = a.solver.build(Backend::SimulatedAnnealing)?;
    if let Some(path) = &a.qubo {
        let q = Qubo::load(path)?;
        let outcome = solve(&q, &cfg)?;
        let report = serde_json::json!({
            "bits": outcome.best.bits,
            "energy": outcome.best.energy,
            "offset": q.offset(),
            "ground_state_hits": outcome.ground_state_hits,
            "num_reads": outcome.read_energies.len(),
            "solve_time_ms": outcome.solve_time_ms,
            "backend": cfg.backend,
            "seed": cfg.seed,
        });
        return emit(
            &to_json(&report, a.output.no_timing)?,
            a.output.out.as_deref(),
        );
    }
    let data = a.data.as_ref().expect("clap enforces --data or --qubo");
    let ds = Dataset::load_csv(data)?;
    let p = a.precision.parse()?;
    let truth = a.truth.as_ref().map(TruthSidecar::load).transpose()?;
    let report = solve_regression_via_qubo(&ds, &p, &cfg, truth.as_ref().map(|t| &t.bits[..]))?;
    emit(
        &to_json(&report, a.output.no_timing)?,
        a.output.out.as_deref(),
    )
}

fn baseline(a: BaselineArgs) -> Result<()> {
    let ds = Dataset::load_csv(&a.data)?;
    let (w, t) = timed(|| solve_analytical(&ds));
    let w = w?;
    let error = regression_error(&ds, &w)?;
    let report = serde_json::json!({
        "weights": w,
        "error": error,
        "classical_time_ms": millis(t),
    });
    emit(
        &to_json(&report, a.output.no_timing)?,
        a.output.out.as_deref(),
    )
}

fn recover(a: RecoverArgs) -> Result<()> {
    let cfg = a.solver.build(Backend::SimulatedAnnealing)?;
    let spec = GenSpec {
        noise_sigma: a.sigma,
        seed: cfg.seed,
        ground_truth: a.truth.as_deref().map(parse_weights).transpose()?,
        ..GenSpec::new(a.n, a.d + 1, a.precision.parse()?)
    };
    let report = run_recovery_experiment(a.runs, &spec, &cfg, a.fit_threshold)?;
    emit(&to_json(&report, false)?, a.out.as_deref())
}

fn sweep_setup(s: &SweepArgs) -> Result<(SolverConfig, ScalingOptions, usize, ReportFormat)> {
    let cfg = s.solver.build(Backend::SimulatedAnnealing)?;
    let opts = if s.full_scale {
        ScalingOptions::FULL
    } else {
        ScalingOptions::DESK
    };
    let runs = s.runs.unwrap_or(if s.full_scale { 60 } else { 10 });
    Ok((cfg, opts, runs, s.format.parse()?))
}

fn write_sweep(
    points: Vec<bench::SweepPoint>,
    s: &SweepArgs,
    format: ReportFormat,
    seed: u64,
) -> Result<()> {
    let mut rows: Vec<_> = points.into_iter().map(|p| p.row).collect();
    if s.output.no_timing {
        rows.iter_mut().for_each(bench::strip_timing);
    }
    let mut buf = Vec::new();
    emit_report(&rows, format, &mut buf)?;
    eprintln!("qregress: seed {seed}");
    emit(&String::from_utf8_lossy(&buf), s.output.out.as_deref())
}

fn bench_n(a: BenchNArgs) -> Result<()> {
    let (cfg, opts, runs, format) = sweep_setup(&a.sweep)?;
    let n_values = match &a.n_values {
        Some(s) => parse_list(s, "n values")?,
        None if a.sweep.full_scale => (9..=24).map(|e| 1usize << e).collect(),
        None => bench::default_n_values(),
    };
    let template = GenSpec {
        noise_sigma: a.sweep.sigma,
        seed: cfg.seed,
        ..GenSpec::new(1, a.d + 1, a.sweep.precision.parse()?)
    };
    let points = run_scaling_n(&n_values, &template, &cfg, runs, opts)?;
    write_sweep(points, &a.sweep, format, cfg.seed)
}

fn bench_d(a: BenchDArgs) -> Result<()> {
    let (cfg, opts, runs, format) = sweep_setup(&a.sweep)?;
    let d_values = match &a.d_values {
        Some(s) => parse_list(s, "d values")?,
        None => bench::default_d_values(),
    };
    let template = GenSpec {
        noise_sigma: a.sweep.sigma,
        seed: cfg.seed,
        ..GenSpec::new(a.n, 2, a.sweep.precision.parse()?)
    };
    let points = run_scaling_d(&d_values, a.n, &template, &cfg, runs, opts)?;
    write_sweep(points, &a.sweep, format, cfg.seed)
}

fn export_qubo(a: ExportArgs) -> Result<()> {
    let ds = Dataset::load_csv(&a.data)?;
    let q = build_qubo(&ds, &a.precision.parse()?)?;
    let text = match a.format.as_str() {
        "coo" => q.to_coo_string(),
        "json" => q.to_json_string()? + "\n",
        other => {
            return Err(Error::parse(
                "export format",
                format!("unknown format {other:?} (expected coo or json)"),
            ))
        }
    };
    emit(&text, a.out.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["qregress", "frobnicate"]), 2);
        assert_eq!(
            run(["qregress", "baseline", "--data", "x.csv", "--bogus"]),
            2
        );
        assert_eq!(run(["qregress", "gen-data", "--n", "3"]), 2);
    }

    #[test]
    fn help_exits_0() {
        assert_eq!(run(["qregress", "solve", "--help"]), 0);
    }

    #[test]
    fn missing_file_exits_1() {
        assert_eq!(
            run(["qregress", "baseline", "--data", "/nonexistent/ds.csv"]),
            1
        );
    }

    #[test]
    fn every_subcommand_documents_its_flags() {
        let cmd = Cli::command();
        for sub in cmd.get_subcommands() {
            for arg in sub.get_arguments() {
                if arg.get_long().is_some() && arg.get_id() != "help" {
                    assert!(
                        arg.get_help().is_some() || is_self_describing(arg.get_id().as_str()),
                        "{} --{} lacks help text",
                        sub.get_name(),
                        arg.get_id()
                    );
                }
            }
        }
    }

    fn is_self_describing(id: &str) -> bool {
        matches!(
            id,
            "beta_initial" | "beta_final" | "low" | "high" | "sigma" | "runs" | "out" | "threads"
        )
    }

    #[test]
    fn timing_fields_stripped_recursively() {
        let mut v =
            serde_json::json!({"a": 1, "solve_time_ms": 2.0, "inner": {"formulate_time_ms": 3}});
        strip_timing_fields(&mut v);
        assert_eq!(v, serde_json::json!({"a": 1, "inner": {}}));
    }
}
