//! Multistart fronts, file export and the invariant audit behind the CLI.

pub mod audit;
pub mod front;
pub mod io;

use rayon::prelude::*;

use crate::config::{Algorithm, SolverConfig};
use crate::error::Result;
use crate::problems::{fd_check, full_suite, sample_box, SuiteEntry};
use crate::scalar::Scalar;
use crate::solver::run;
use audit::{audit_run, AuditReport, Tolerances};
use front::{multistart, FrontResult, StartSummary};
use io::{CompareDocument, CompareRow, SCHEMA_VERSION};

/// Multistart over `entry` from `starts` box samples drawn with `seed`.
///
/// Fails on the first invalid-input error; numerical breakdowns stay inside
/// the per-start stop reasons.
pub fn run_front<T: Scalar>(
    entry: &SuiteEntry<T>,
    cfg: &SolverConfig,
    starts: usize,
    seed: u64,
) -> Result<FrontResult<T>> {
    let x0s = entry.sample_starts(starts, seed);
    let runs = multistart(entry.problem.as_ref(), &x0s, cfg)
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.map(|r| {
                let dist = entry.pareto_distance(&r.final_x);
                StartSummary::from_run(i, &x0s[i], &r, dist)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FrontResult::from_runs(entry.id, runs))
}

/// Runs every algorithm from the same start points.
pub fn run_compare<T: Scalar>(
    entry: &SuiteEntry<T>,
    cfg: &SolverConfig,
    starts: usize,
    seed: u64,
) -> Result<CompareDocument> {
    let mut rows = Vec::new();
    for algorithm in Algorithm::ALL {
        let cfg = SolverConfig {
            algorithm,
            ..cfg.clone()
        };
        let front = run_front(entry, &cfg, starts, seed)?;
        rows.push(CompareRow {
            algorithm,
            solver_errors: front
                .runs
                .iter()
                .filter(|r| r.stop_reason.is_error())
                .count(),
            stats: front.stats,
        });
    }
    Ok(CompareDocument {
        schema_version: SCHEMA_VERSION,
        problem: entry.id.to_string(),
        n: entry.problem.dim(),
        seed,
        starts,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdResult {
    pub problem: String,
    pub n: usize,
    pub points: usize,
    pub max_rel_err: f64,
}

/// Finite-difference check of `entry` at `points` box samples.
pub fn fd_check_entry<T: Scalar>(
    entry: &SuiteEntry<T>,
    points: usize,
    h: T,
    seed: u64,
) -> Result<FdResult> {
    let mut worst = 0.0f64;
    for x in sample_box(&entry.lower, &entry.upper, points, seed) {
        worst = worst.max(fd_check(entry.problem.as_ref(), &x, h)?.to_f64_lossy());
    }
    Ok(FdResult {
        problem: entry.id.to_string(),
        n: entry.problem.dim(),
        points,
        max_rel_err: worst,
    })
}

#[derive(Debug, Clone, Default)]
pub struct CheckReport {
    pub fd: Vec<FdResult>,
    pub fd_tolerance: f64,
    pub audit: AuditReport,
    pub runs: usize,
    /// (problem, n, algorithm, start) of each audited run with violations.
    pub failing_runs: Vec<(String, usize, Algorithm, usize)>,
}

impl CheckReport {
    pub fn fd_passed(&self) -> bool {
        self.fd.iter().all(|r| r.max_rel_err <= self.fd_tolerance)
    }

    pub fn passed(&self) -> bool {
        self.fd_passed() && self.audit.passed()
    }
}

/// Options of [`check_suite`].
#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub starts: usize,
    pub seed: u64,
    pub fd_points: usize,
    pub fd_step: f64,
    pub fd_tolerance: f64,
    pub algorithms: Vec<Algorithm>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            starts: 10,
            seed: 0,
            fd_points: 50,
            fd_step: 1e-6,
            fd_tolerance: 1e-5,
            algorithms: Algorithm::ALL.to_vec(),
        }
    }
}

/// Finite-difference checks plus the full audit over every suite problem,
/// dimension and algorithm.
pub fn check_suite(base: &SolverConfig, opts: &CheckOptions) -> Result<CheckReport> {
    let suite = full_suite::<f64>();
    let mut report = CheckReport {
        fd_tolerance: opts.fd_tolerance,
        ..CheckReport::default()
    };
    for entry in &suite {
        report.fd.push(fd_check_entry(
            entry,
            opts.fd_points,
            opts.fd_step,
            opts.seed,
        )?);
    }
    let tol = Tolerances::default();
    for entry in &suite {
        let x0s = entry.sample_starts(opts.starts, opts.seed);
        for &algorithm in &opts.algorithms {
            let cfg = SolverConfig {
                algorithm,
                ..base.clone()
            };
            let audits: Vec<Result<AuditReport>> = x0s
                .par_iter()
                .map(|x0| {
                    let r = run(entry.problem.as_ref(), x0, &cfg)?;
                    Ok(audit_run(entry.problem.as_ref(), &r, &cfg, &tol))
                })
                .collect();
            for (start, a) in audits.into_iter().enumerate() {
                let a = a?;
                report.runs += 1;
                if !a.passed() {
                    report.failing_runs.push((
                        entry.id.to_string(),
                        entry.problem.dim(),
                        algorithm,
                        start,
                    ));
                }
                report.audit.merge(a);
            }
        }
    }
    Ok(report)
}
