//! Outer iteration of the max-type and average-type memory gradient methods
//! and their monotone / steepest-descent reductions.

use crate::config::{Algorithm, Fault, SolverConfig};
use crate::criticality::{psi, solve_dual, DualOptions};
use crate::direction::{compute_direction, BetaMode, DirectionMemory, DirectionParams};
use crate::error::{Error, Result};
use crate::linalg::{all_finite, scaled};
use crate::linesearch::{
    average_type_search, max_type_search, AverageState, AverageTypeParams, MaxTypeParams,
    MaxWindow, Step,
};
use crate::problem::MultiObjective;
use crate::scalar::Scalar;
use crate::trace::{Counters, IterationRecord, RunResult, RunTrace, StopReason};

/// Reference state of the nonmonotone line search; exactly one is active per run.
#[derive(Debug, Clone)]
enum Nonmonotone<T> {
    Window(MaxWindow<T>),
    Average(AverageState<T>),
}

impl<T: Scalar> Nonmonotone<T> {
    fn reference(&self) -> Vec<T> {
        match self {
            Nonmonotone::Window(w) => w.max(),
            Nonmonotone::Average(s) => s.c.clone(),
        }
    }

    fn q(&self) -> Option<T> {
        match self {
            Nonmonotone::Window(_) => None,
            Nonmonotone::Average(s) => Some(s.q),
        }
    }
}

struct Params<T> {
    eps_crit: T,
    eta: T,
    dual: DualOptions<T>,
    direction: DirectionParams<T>,
    max_type: MaxTypeParams<T>,
    average_type: AverageTypeParams<T>,
}

impl<T: Scalar> Params<T> {
    fn from_config(cfg: &SolverConfig) -> Self {
        let beta_mode = match (cfg.fault, cfg.zero_beta) {
            (Some(Fault::FlipBetaSign), _) => BetaMode::Flipped,
            (None, true) => BetaMode::Zero,
            (None, false) => BetaMode::Standard,
        };
        Self {
            eps_crit: T::lit(cfg.eps_crit),
            eta: T::lit(cfg.eta()),
            dual: DualOptions {
                tol: T::lit(cfg.dual_tol).max(T::epsilon() * T::lit(100.0)),
                max_iter: cfg.dual_max_iter,
            },
            direction: DirectionParams {
                gamma: T::lit(cfg.gamma),
                phi_margin: T::lit(cfg.phi_margin),
                phi_floor: T::lit(cfg.phi_floor),
                beta_mode,
            },
            max_type: MaxTypeParams {
                initial_step: T::lit(cfg.lambda2),
                shrink: T::lit(cfg.lambda3),
                rho: T::lit(cfg.rho),
                max_trials: cfg.max_ls_trials,
            },
            average_type: AverageTypeParams {
                delta: T::lit(cfg.delta),
                rho: T::lit(cfg.rho),
                max_trials: cfg.max_ls_trials,
            },
        }
    }
}

/// Runs the method selected by `cfg.algorithm` from `x0`.
///
/// Invalid input (bad configuration, wrong start dimension, non-finite start)
/// is an `Err`; numerical breakdown during the run ends it with the matching
/// [`StopReason`] and keeps the trace.
pub fn run<T, P>(problem: &P, x0: &[T], cfg: &SolverConfig) -> Result<RunResult<T>>
where
    T: Scalar,
    P: MultiObjective<T> + ?Sized,
{
    let cfg = cfg.clone().validate()?;
    if x0.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            found: x0.len(),
        });
    }
    if !all_finite(x0) {
        return Err(Error::NonFinite("start point"));
    }
    let params = Params::<T>::from_config(&cfg);
    let eval = |x: &[T]| problem.eval(x);

    let mut counters = Counters::default();
    let mut x = x0.to_vec();
    let mut f = eval(&x);
    counters.f_evals += 1;
    if f.len() != problem.num_objectives() {
        return Err(Error::DimensionMismatch {
            expected: problem.num_objectives(),
            found: f.len(),
        });
    }
    if !all_finite(&f) {
        return Err(Error::NonFinite("objective at start point"));
    }

    let mut memory = DirectionMemory::new(cfg.effective_memory());
    let mut state = match cfg.algorithm {
        Algorithm::AverageType => Nonmonotone::Average(AverageState::new(f.clone())),
        _ => Nonmonotone::Window(MaxWindow::new(cfg.effective_window(), f.clone())),
    };
    let mut trace = RunTrace::new();

    let stop_reason = loop {
        let k = trace.len();
        let jac = problem.jacobian(&x);
        counters.j_evals += 1;
        let ds = match solve_dual(&jac, params.dual) {
            Ok(ds) => ds,
            Err(Error::NoConvergence { .. }) => break StopReason::NoConvergence,
            Err(e) => return Err(e),
        };
        counters.dual_solves += 1;
        let v_norm = ds.v_norm();
        let psi_v = psi(&jac, &ds.v)?;
        let mut record = IterationRecord {
            k,
            x: x.clone(),
            f: f.clone(),
            v_norm,
            theta: ds.theta,
            psi_v,
            psi_d: None,
            gamma: None,
            direction: None,
            alpha: None,
            ls_trials: None,
            reference: None,
            q: None,
        };

        if v_norm <= params.eps_crit {
            trace.push(record)?;
            break StopReason::Critical;
        }
        if k >= cfg.max_iter {
            trace.push(record)?;
            break StopReason::MaxIter;
        }

        let report = match compute_direction(&ds.v, &jac, &memory, &params.direction) {
            Ok(r) => r,
            Err(Error::NonDescent { psi_d }) => {
                record.psi_d = Some(T::lit(psi_d));
                trace.push(record)?;
                break StopReason::NonDescent;
            }
            Err(e) => return Err(e),
        };
        let reference = state.reference();
        record.gamma = Some(report.gamma);
        record.reference = Some(reference);
        record.q = state.q();

        let search = |d: &[T], psi_d: T| -> Result<Step<T>> {
            match &state {
                Nonmonotone::Window(w) => max_type_search(eval, &x, d, psi_d, w, &params.max_type),
                Nonmonotone::Average(s) => {
                    average_type_search(eval, &x, d, psi_d, s, &params.average_type)
                }
            }
        };

        let mut d = report.d;
        let mut psi_d = report.psi_d;
        let mut outcome = search(&d, psi_d);
        if let Err(Error::LineSearchFail { trials }) = outcome {
            counters.f_evals += trials;
            if cfg.restart_on_failure && !memory.is_empty() {
                memory.clear();
                d = scaled(report.gamma, &ds.v);
                psi_d = psi(&jac, &d)?;
                outcome = search(&d, psi_d);
                if let Err(Error::LineSearchFail { trials }) = outcome {
                    counters.f_evals += trials;
                }
            }
        }
        record.psi_d = Some(psi_d);
        record.direction = Some(d.clone());

        let step = match outcome {
            Ok(step) => step,
            Err(Error::LineSearchFail { .. }) => {
                trace.push(record)?;
                break StopReason::LineSearchFail;
            }
            Err(Error::NonDescent { .. }) => {
                trace.push(record)?;
                break StopReason::NonDescent;
            }
            Err(e) => return Err(e),
        };
        counters.f_evals += step.f_evals();
        record.alpha = Some(step.alpha);
        record.ls_trials = Some(step.trials);
        trace.push(record)?;

        x = step.x_next;
        f = step.f_next;
        memory.push(d);
        match &mut state {
            Nonmonotone::Window(w) => w.push(f.clone()),
            Nonmonotone::Average(s) => s.update(&f, params.eta),
        }
    };

    Ok(RunResult {
        problem: problem.name().to_string(),
        algorithm: cfg.algorithm,
        trace,
        stop_reason,
        final_x: x,
        final_f: f,
        counters,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    /// `N = 0` with the monotone Armijo search.
    SteepestDescent,
    /// Memory direction with the monotone Armijo search.
    Monotone,
}

/// [`run`] with `cfg.algorithm` replaced by the chosen reduction.
pub fn run_baseline<T, P>(
    problem: &P,
    x0: &[T],
    cfg: &SolverConfig,
    baseline: Baseline,
) -> Result<RunResult<T>>
where
    T: Scalar,
    P: MultiObjective<T> + ?Sized,
{
    let algorithm = match baseline {
        Baseline::SteepestDescent => Algorithm::SteepestDescent,
        Baseline::Monotone => Algorithm::MonotoneBaseline,
    };
    run(
        problem,
        x0,
        &SolverConfig {
            algorithm,
            ..cfg.clone()
        },
    )
}
