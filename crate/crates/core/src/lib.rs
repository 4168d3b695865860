//! Linear regression trained as a quadratic unconstrained binary optimization
//! (QUBO) problem.
//!
//! Each real regression weight is encoded as a subset sum over a fixed
//! [`PrecisionVector`] of signed powers of two. Substituting that encoding
//! into the squared-error objective `||Xw - Y||²` yields a QUBO whose
//! minimizing bit vector decodes to the best representable weights.
//!
//! The crate is organized as:
//!
//! - [`regression`]: datasets, the squared-error objective and the classical
//!   normal-equations baseline.
//! - [`formulation`]: precision vectors, the block-diagonal precision matrix,
//!   decoding and the regression-to-QUBO compiler.
//! - [`qubo`]: the QUBO record, energy evaluation and export/import formats.
//! - [`solvers`]: exhaustive enumeration and multi-read simulated annealing.
//! - [`datagen`]: seeded synthetic regression data.
//! - [`bench`]: recovery-rate and scaling experiments with CSV reporting.
//! - [`cli`]: the `qregress` command-line surface.
//!
//! ```
//! use qregress::{Dataset, PrecisionVector, build_qubo, solve_exhaustive, decode};
//!
//! let ds = Dataset::from_features(&[vec![1.0], vec![2.0]], &[3.0, 5.0]).unwrap();
//! let p = PrecisionVector::new(vec![1.0, 2.0]).unwrap();
//! let q = build_qubo(&ds, &p).unwrap();
//! let best = solve_exhaustive(&q).unwrap().best;
//! assert_eq!(decode(&p, &best.bits).unwrap().as_slice(), &[2.0, 1.0]);
//! ```

pub mod bench;
pub mod cli;
pub mod datagen;
pub mod error;
pub mod formulation;
pub mod qubo;
pub mod regression;
pub mod solvers;
mod timing;

pub use bench::{
    emit_report, parse_report_csv, run_recovery_experiment, run_scaling_d, run_scaling_n,
    ExperimentRow, RecoveryReport, ReportFormat, ScalingOptions, SweepPoint,
};
pub use datagen::{generate, GenSpec, GeneratedData};
pub use error::{Error, Result};
pub use formulation::{
    build_qubo, decode, encode_weight, enumerate_representable, precision_matrix, PrecisionMatrix,
    PrecisionVector,
};
pub use qubo::{qubo_energy, BinarySolution, Qubo};
pub use regression::{regression_error, solve_analytical, Dataset, Weights};
pub use solvers::{
    solve, solve_annealing, solve_exhaustive, solve_regression_via_qubo, Backend, SolveOutcome,
    SolveReport, SolverConfig,
};
