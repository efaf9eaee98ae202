//! Nonmonotone memory gradient methods for smooth unconstrained
//! multiobjective optimization.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! and `*32` aliases below name the common instantiations.

// `!(a < b)` is used on purpose so that NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod criticality;
pub mod direction;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod linesearch;
pub mod problem;
pub mod problems;
pub mod scalar;
pub mod solver;
pub mod trace;

pub use config::{Algorithm, EtaSchedule, SolverConfig};
pub use criticality::{psi, solve_dual, DualOptions, DualSolution};
pub use direction::{compute_direction, DirectionMemory};
pub use error::{Error, Result};
pub use linalg::Jacobian;
pub use problem::{FnProblem, MultiObjective};
pub use scalar::Scalar;
pub use solver::{run, run_baseline, Baseline};
pub use trace::{IterationRecord, RunResult, RunTrace, StopReason};

pub type Jacobian64 = Jacobian<f64>;
pub type Jacobian32 = Jacobian<f32>;
pub type RunResult64 = RunResult<f64>;
pub type RunResult32 = RunResult<f32>;
pub type DualSolution64 = DualSolution<f64>;
pub type DualSolution32 = DualSolution<f32>;
pub type SuiteEntry64 = problems::SuiteEntry<f64>;
pub type SuiteEntry32 = problems::SuiteEntry<f32>;
