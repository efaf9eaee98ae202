//! Multistart runs, the nondominated filter, and aggregate statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SolverConfig;
use crate::error::Result;
use crate::problem::MultiObjective;
use crate::scalar::Scalar;
use crate::solver::run;
use crate::trace::{RunResult, StopReason};

/// `u` dominates `w` when `u <= w` componentwise and `u != w`.
pub fn dominates<T: Scalar>(u: &[T], w: &[T]) -> bool {
    let mut strict = false;
    for (&a, &b) in u.iter().zip(w) {
        if a > b {
            return false;
        }
        if a < b {
            strict = true;
        }
    }
    strict
}

/// Indices of the points no other point dominates, in input order.
pub fn nondominated_filter<T: Scalar>(points: &[Vec<T>]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| !points.iter().any(|p| dominates(p, &points[i])))
        .collect()
}

/// Runs `cfg` from every start, in parallel; results keep the order of `starts`.
pub fn multistart<T, P>(
    problem: &P,
    starts: &[Vec<T>],
    cfg: &SolverConfig,
) -> Vec<Result<RunResult<T>>>
where
    T: Scalar,
    P: MultiObjective<T> + ?Sized,
{
    starts.par_iter().map(|x0| run(problem, x0, cfg)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartSummary<T> {
    pub start: usize,
    pub x0: Vec<T>,
    pub stop_reason: StopReason,
    pub iterations: usize,
    pub f_evals: usize,
    pub final_v_norm: T,
    pub final_x: Vec<T>,
    pub final_f: Vec<T>,
    pub pareto_distance: Option<T>,
}

impl<T: Scalar> StartSummary<T> {
    pub fn from_run(start: usize, x0: &[T], r: &RunResult<T>, pareto_distance: Option<T>) -> Self {
        Self {
            start,
            x0: x0.to_vec(),
            stop_reason: r.stop_reason,
            iterations: r.iterations(),
            f_evals: r.counters.f_evals,
            final_v_norm: r.final_v_norm().unwrap_or_else(T::nan),
            final_x: r.final_x.clone(),
            final_f: r.final_f.clone(),
            pareto_distance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontStats {
    pub runs: usize,
    pub converged: usize,
    pub convergence_rate: f64,
    pub median_iterations: f64,
    pub median_f_evals: f64,
    pub max_final_v_norm: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

impl FrontStats {
    pub fn from_summaries<T: Scalar>(runs: &[StartSummary<T>]) -> Self {
        let converged = runs
            .iter()
            .filter(|r| r.stop_reason == StopReason::Critical)
            .count();
        Self {
            runs: runs.len(),
            converged,
            convergence_rate: if runs.is_empty() {
                0.0
            } else {
                converged as f64 / runs.len() as f64
            },
            median_iterations: median(runs.iter().map(|r| r.iterations as f64).collect()),
            median_f_evals: median(runs.iter().map(|r| r.f_evals as f64).collect()),
            max_final_v_norm: runs
                .iter()
                .map(|r| r.final_v_norm.to_f64_lossy())
                .fold(0.0, f64::max),
        }
    }
}

/// Multistart outcome for one problem and algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontResult<T> {
    pub problem: String,
    pub runs: Vec<StartSummary<T>>,
    /// Indices into `runs` whose final objective vectors are nondominated.
    pub front: Vec<usize>,
    pub stats: FrontStats,
}

impl<T: Scalar> FrontResult<T> {
    /// Builds the front from completed runs; runs with non-finite final values are left out of it.
    pub fn from_runs(problem: impl Into<String>, runs: Vec<StartSummary<T>>) -> Self {
        let eligible: Vec<usize> = (0..runs.len())
            .filter(|&i| runs[i].final_f.iter().all(|v| v.is_finite()))
            .collect();
        let pts: Vec<Vec<T>> = eligible.iter().map(|&i| runs[i].final_f.clone()).collect();
        let front = nondominated_filter(&pts)
            .into_iter()
            .map(|j| eligible[j])
            .collect();
        let stats = FrontStats::from_summaries(&runs);
        Self {
            problem: problem.into(),
            runs,
            front,
            stats,
        }
    }

    pub fn front_points(&self) -> impl Iterator<Item = &StartSummary<T>> {
        self.front.iter().map(|&i| &self.runs[i])
    }
}
