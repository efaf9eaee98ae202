//! Per-iteration run records.

use serde::{Deserialize, Serialize};

use crate::config::Algorithm;
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// `||v(x_k)|| <= eps_crit`.
    Critical,
    MaxIter,
    LineSearchFail,
    /// The memory direction lost the descent property numerically.
    NonDescent,
    /// The min-norm subproblem hit its iteration cap.
    NoConvergence,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Critical => "critical",
            StopReason::MaxIter => "max_iter",
            StopReason::LineSearchFail => "line_search_fail",
            StopReason::NonDescent => "non_descent",
            StopReason::NoConvergence => "no_convergence",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            StopReason::Critical,
            StopReason::MaxIter,
            StopReason::LineSearchFail,
            StopReason::NonDescent,
            StopReason::NoConvergence,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
    }

    /// True for the stops that indicate a numerical breakdown.
    pub fn is_error(self) -> bool {
        !matches!(self, StopReason::Critical | StopReason::MaxIter)
    }
}

/// State observed at iteration `k`.
///
/// The step fields (`psi_d`, `alpha`, `direction`, ...) are `None` on the final
/// record of a run that stopped before taking a step from `x_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord<T> {
    pub k: usize,
    pub x: Vec<T>,
    pub f: Vec<T>,
    pub v_norm: T,
    pub theta: T,
    /// `psi(x_k, v(x_k))`
    pub psi_v: T,
    /// `psi(x_k, d_k)`
    pub psi_d: Option<T>,
    pub gamma: Option<T>,
    pub direction: Option<Vec<T>>,
    pub alpha: Option<T>,
    /// Rejected trial steps before acceptance.
    pub ls_trials: Option<usize>,
    /// Window max (max-type) or `C_k` (average-type) the search compared against.
    pub reference: Option<Vec<T>>,
    /// `Q_k` of the average-type search.
    pub q: Option<T>,
}

impl<T> IterationRecord<T> {
    pub fn took_step(&self) -> bool {
        self.alpha.is_some()
    }
}

/// Append-only list of records whose indices equal their iteration counters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RunTrace<T> {
    records: Vec<IterationRecord<T>>,
}

impl<T> Default for RunTrace<T> {
    fn default() -> Self {
        Self {
            records: Vec::new(),
        }
    }
}

impl<T> RunTrace<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: IterationRecord<T>) -> Result<(), Error> {
        if record.k != self.records.len() {
            return Err(Error::IndexMismatch {
                expected: self.records.len(),
                found: record.k,
            });
        }
        self.records.push(record);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[IterationRecord<T>] {
        &self.records
    }

    pub fn last(&self) -> Option<&IterationRecord<T>> {
        self.records.last()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, IterationRecord<T>> {
        self.records.iter()
    }
}

/// Appends `record` to `trace`; fails unless `record.k == trace.len()`.
pub fn record_iteration<T>(
    mut trace: RunTrace<T>,
    record: IterationRecord<T>,
) -> Result<RunTrace<T>, Error> {
    trace.push(record)?;
    Ok(trace)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub f_evals: usize,
    pub j_evals: usize,
    pub dual_solves: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult<T> {
    pub problem: String,
    pub algorithm: Algorithm,
    pub trace: RunTrace<T>,
    pub stop_reason: StopReason,
    pub final_x: Vec<T>,
    pub final_f: Vec<T>,
    pub counters: Counters,
}

impl<T: Copy> RunResult<T> {
    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.trace.iter().filter(|r| r.took_step()).count()
    }

    pub fn final_v_norm(&self) -> Option<T> {
        self.trace.last().map(|r| r.v_norm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(k: usize) -> IterationRecord<f64> {
        IterationRecord {
            k,
            x: vec![0.0],
            f: vec![0.0],
            v_norm: 0.0,
            theta: 0.0,
            psi_v: 0.0,
            psi_d: None,
            gamma: None,
            direction: None,
            alpha: None,
            ls_trials: None,
            reference: None,
            q: None,
        }
    }

    #[test]
    fn append_in_order() {
        let t = record_iteration(RunTrace::new(), rec(0)).unwrap();
        assert_eq!(t.len(), 1);
        let t = (1..3).fold(t, |t, k| record_iteration(t, rec(k)).unwrap());
        let t = record_iteration(t, rec(3)).unwrap();
        assert_eq!(t.len(), 4);
        assert!(t.iter().enumerate().all(|(i, r)| r.k == i));
    }

    #[test]
    fn out_of_order_rejected() {
        let t = (0..3).fold(RunTrace::new(), |t, k| record_iteration(t, rec(k)).unwrap());
        assert_eq!(
            record_iteration(t, rec(5)).unwrap_err(),
            Error::IndexMismatch {
                expected: 3,
                found: 5
            }
        );
    }

    #[test]
    fn stop_reason_names_round_trip() {
        for r in [
            StopReason::Critical,
            StopReason::MaxIter,
            StopReason::LineSearchFail,
            StopReason::NonDescent,
            StopReason::NoConvergence,
        ] {
            assert_eq!(StopReason::parse(r.as_str()), Some(r));
        }
    }
}
