//! Re-checks a finished run against the invariants the method guarantees,
//! recomputing what it can from the problem rather than trusting the trace.

use std::collections::BTreeMap;
use std::fmt;

use crate::config::{Algorithm, SolverConfig};
use crate::criticality::psi;
use crate::linalg::norm_sq;
use crate::linesearch::{armijo_accepts, AverageState, MaxWindow};
use crate::problem::MultiObjective;
use crate::scalar::Scalar;
use crate::trace::{RunResult, StopReason};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Invariant {
    TraceIndex,
    DualIdentities,
    Descent,
    SufficientDescent,
    StepConsistency,
    Acceptance,
    LadderConsistency,
    Sandwich,
    AverageMonotone,
    WindowMonotone,
    QBound,
    PerStepDecrease,
    LevelSet,
    StopReason,
}

impl Invariant {
    pub fn name(self) -> &'static str {
        match self {
            Invariant::TraceIndex => "trace_index",
            Invariant::DualIdentities => "dual_identities",
            Invariant::Descent => "descent",
            Invariant::SufficientDescent => "sufficient_descent",
            Invariant::StepConsistency => "step_consistency",
            Invariant::Acceptance => "acceptance",
            Invariant::LadderConsistency => "ladder_consistency",
            Invariant::Sandwich => "sandwich",
            Invariant::AverageMonotone => "average_monotone",
            Invariant::WindowMonotone => "window_monotone",
            Invariant::QBound => "q_bound",
            Invariant::PerStepDecrease => "per_step_decrease",
            Invariant::LevelSet => "level_set",
            Invariant::StopReason => "stop_reason",
        }
    }
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub invariant: Invariant,
    pub k: usize,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at k={}: {}", self.invariant, self.k, self.detail)
    }
}

/// Absolute slacks used by the checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// `|theta + |v|^2/2| <= theta_rel (1 + |v|^2)`
    pub theta_rel: f64,
    /// `|psi(v) + |v|^2| <= psi_rel (1 + |v|^2)`
    pub psi_rel: f64,
    pub sufficient_descent: f64,
    pub sandwich: f64,
    pub monotone: f64,
    pub q_bound: f64,
    pub decrease: f64,
    /// Relative slack when recomputing `psi(x_k, d_k)` and the ladder.
    pub recompute_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            theta_rel: 1e-8,
            psi_rel: 1e-7,
            sufficient_descent: 1e-10,
            sandwich: 1e-10,
            monotone: 1e-12,
            q_bound: 1e-12,
            decrease: 1e-12,
            recompute_rel: 1e-9,
        }
    }
}

impl Tolerances {
    /// Slacks scaled for single precision.
    pub fn for_scalar<T: Scalar>() -> Self {
        let eps = T::epsilon().to_f64_lossy();
        if eps <= f64::EPSILON {
            return Self::default();
        }
        let s = eps / f64::EPSILON;
        let d = Self::default();
        Self {
            theta_rel: d.theta_rel * s,
            psi_rel: d.psi_rel * s,
            sufficient_descent: d.sufficient_descent * s,
            sandwich: d.sandwich * s,
            monotone: d.monotone * s,
            q_bound: d.q_bound * s,
            decrease: d.decrease * s,
            recompute_rel: d.recompute_rel * s,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditReport {
    pub iterations_checked: usize,
    pub violations: Vec<Violation>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn merge(&mut self, other: AuditReport) {
        self.iterations_checked += other.iterations_checked;
        self.violations.extend(other.violations);
    }

    /// Violation counts per invariant.
    pub fn counts(&self) -> BTreeMap<Invariant, usize> {
        let mut out = BTreeMap::new();
        for v in &self.violations {
            *out.entry(v.invariant).or_insert(0) += 1;
        }
        out
    }

    pub fn has(&self, inv: Invariant) -> bool {
        self.violations.iter().any(|v| v.invariant == inv)
    }
}

/// Bound factor `c` in `psi(d) <= c gamma psi(v)` implied by the margin `mu`.
pub fn sufficient_descent_factor(phi_margin: f64) -> f64 {
    (1.0 - 1.0 / phi_margin).min(0.5)
}

struct Ctx<'a> {
    report: &'a mut AuditReport,
}

impl Ctx<'_> {
    fn fail(&mut self, invariant: Invariant, k: usize, detail: String) {
        self.report.violations.push(Violation {
            invariant,
            k,
            detail,
        });
    }
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

/// Audits `run`, which must come from `problem` under `cfg`.
pub fn audit_run<T, P>(
    problem: &P,
    run: &RunResult<T>,
    cfg: &SolverConfig,
    tol: &Tolerances,
) -> AuditReport
where
    T: Scalar,
    P: MultiObjective<T> + ?Sized,
{
    let mut report = AuditReport::default();
    let mut ctx = Ctx {
        report: &mut report,
    };
    let recs = run.trace.records();
    let f64v = |v: &[T]| v.iter().map(|x| x.to_f64_lossy()).collect::<Vec<_>>();
    let eta = T::lit(cfg.eta());
    let factor = sufficient_descent_factor(cfg.phi_margin);
    let average = run.algorithm == Algorithm::AverageType;
    let window = cfg.effective_window();
    let monotone = match run.algorithm {
        Algorithm::AverageType => cfg.eta() == 0.0,
        Algorithm::MaxType => window == 0,
        Algorithm::MonotoneBaseline | Algorithm::SteepestDescent => true,
    };

    // Independent replay of the reference state.
    let mut avg: Option<AverageState<T>> = None;
    let mut win: Option<MaxWindow<T>> = None;
    let mut f_sum: Vec<f64> = Vec::new();
    let mut prev_ref: Option<Vec<f64>> = None;
    let f0 = recs.first().map(|r| f64v(&r.f)).unwrap_or_default();

    for (i, rec) in recs.iter().enumerate() {
        let k = rec.k;
        ctx.report.iterations_checked += 1;
        if k != i {
            ctx.fail(Invariant::TraceIndex, i, format!("record carries k={k}"));
        }
        let f = f64v(&rec.f);
        let v_norm = rec.v_norm.to_f64_lossy();
        let v2 = v_norm * v_norm;
        let theta = rec.theta.to_f64_lossy();
        let psi_v = rec.psi_v.to_f64_lossy();
        if (theta + 0.5 * v2).abs() > tol.theta_rel * (1.0 + v2) {
            ctx.fail(
                Invariant::DualIdentities,
                k,
                format!("theta={theta:e}, |v|={v_norm:e}"),
            );
        }
        if (psi_v + v2).abs() > tol.psi_rel * (1.0 + v2) {
            ctx.fail(
                Invariant::DualIdentities,
                k,
                format!("psi(v)={psi_v:e}, |v|={v_norm:e}"),
            );
        }

        if f_sum.is_empty() {
            f_sum = vec![0.0; f.len()];
        }
        for (s, &fi) in f_sum.iter_mut().zip(&f) {
            *s += fi;
        }

        if monotone {
            for (j, (&fi, &f0i)) in f.iter().zip(&f0).enumerate() {
                if fi > f0i + tol.monotone * (1.0 + f0i.abs()) {
                    ctx.fail(
                        Invariant::LevelSet,
                        k,
                        format!("F_{} = {fi:e} > F_{}(x_0) = {f0i:e}", j + 1, j + 1),
                    );
                }
            }
        }

        // Reference replay: C_k/Q_k or the window max, rebuilt from the trace values.
        let replay_ref: Vec<T> = if average {
            let st = match avg.as_mut() {
                None => avg.insert(AverageState::new(rec.f.clone())),
                Some(st) => {
                    st.update(&rec.f, eta);
                    st
                }
            };
            let q = st.q.to_f64_lossy();
            if cfg.eta_max < 1.0 && q > 1.0 / (1.0 - cfg.eta_max) + tol.q_bound {
                ctx.fail(
                    Invariant::QBound,
                    k,
                    format!("Q={q:e} exceeds 1/(1-eta_max)"),
                );
            }
            let c = f64v(&st.c);
            let mean: Vec<f64> = f_sum.iter().map(|s| s / (i + 1) as f64).collect();
            for j in 0..f.len() {
                if f[j] > c[j] + tol.sandwich
                    || c[j] > mean[j] + tol.sandwich * (1.0 + mean[j].abs())
                {
                    ctx.fail(
                        Invariant::Sandwich,
                        k,
                        format!(
                            "component {}: F={:e}, C={:e}, A={:e}",
                            j + 1,
                            f[j],
                            c[j],
                            mean[j]
                        ),
                    );
                }
            }
            if let Some(prev) = &prev_ref {
                for j in 0..c.len() {
                    if c[j] > prev[j] + tol.monotone * (1.0 + prev[j].abs()) {
                        ctx.fail(
                            Invariant::AverageMonotone,
                            k,
                            format!("C_{} rose from {:e} to {:e}", j + 1, prev[j], c[j]),
                        );
                    }
                }
            }
            prev_ref = Some(c);
            if let Some(q) = rec.q {
                if !rel_close(q.to_f64_lossy(), st.q.to_f64_lossy(), tol.recompute_rel) {
                    ctx.fail(Invariant::QBound, k, "stored Q differs from replay".into());
                }
            }
            st.c.clone()
        } else {
            let w = match win.as_mut() {
                None => win.insert(MaxWindow::new(window, rec.f.clone())),
                Some(w) => {
                    w.push(rec.f.clone());
                    w
                }
            };
            let m = w.max();
            let mf = f64v(&m);
            if let Some(prev) = &prev_ref {
                for j in 0..mf.len() {
                    if mf[j] > prev[j] + tol.monotone * (1.0 + prev[j].abs()) {
                        ctx.fail(
                            Invariant::WindowMonotone,
                            k,
                            format!(
                                "window max {} rose from {:e} to {:e}",
                                j + 1,
                                prev[j],
                                mf[j]
                            ),
                        );
                    }
                }
            }
            prev_ref = Some(mf);
            m
        };
        if let Some(stored) = &rec.reference {
            let close = stored
                .iter()
                .zip(&replay_ref)
                .all(|(a, b)| rel_close(a.to_f64_lossy(), b.to_f64_lossy(), tol.recompute_rel));
            if !close || stored.len() != replay_ref.len() {
                let inv = if average {
                    Invariant::Sandwich
                } else {
                    Invariant::WindowMonotone
                };
                ctx.fail(inv, k, "stored reference differs from replay".into());
            }
        }

        let Some(psi_d) = rec.psi_d else { continue };
        let psi_d_f = psi_d.to_f64_lossy();
        let gamma = rec.gamma.map(|g| g.to_f64_lossy()).unwrap_or(cfg.gamma);
        if !(psi_d_f < 0.0) {
            ctx.fail(
                Invariant::Descent,
                k,
                format!("psi(x_k, d_k) = {psi_d_f:e}"),
            );
        }
        let bound = factor * gamma * psi_v;
        if psi_d_f > bound + tol.sufficient_descent {
            ctx.fail(
                Invariant::SufficientDescent,
                k,
                format!("psi(x_k, d_k) = {psi_d_f:e} > {bound:e}"),
            );
        }
        let jac = problem.jacobian(&rec.x);
        if let Some(d) = &rec.direction {
            match psi(&jac, d) {
                Ok(p) if rel_close(p.to_f64_lossy(), psi_d_f, tol.recompute_rel) => {}
                Ok(p) => ctx.fail(
                    Invariant::Descent,
                    k,
                    format!(
                        "stored psi_d {psi_d_f:e} but recomputed {:e}",
                        p.to_f64_lossy()
                    ),
                ),
                Err(e) => ctx.fail(Invariant::Descent, k, e.to_string()),
            }
        }

        let (Some(alpha), Some(trials), Some(d)) =
            (rec.alpha, rec.ls_trials, rec.direction.as_ref())
        else {
            continue;
        };
        let first = if average {
            -psi_d / norm_sq(d)
        } else {
            T::lit(cfg.lambda2)
        };
        let shrink = if average { cfg.delta } else { cfg.lambda3 };
        let expect = first.to_f64_lossy() * shrink.powi(trials as i32);
        if !rel_close(alpha.to_f64_lossy(), expect, tol.recompute_rel) {
            ctx.fail(
                Invariant::LadderConsistency,
                k,
                format!(
                    "alpha={:e} but ladder gives {expect:e} after {trials} trials",
                    alpha.to_f64_lossy()
                ),
            );
        }

        let Some(next) = recs.get(i + 1) else {
            ctx.fail(
                Invariant::StepConsistency,
                k,
                "step recorded without a successor".into(),
            );
            continue;
        };
        let x_next: Vec<T> = rec
            .x
            .iter()
            .zip(d)
            .map(|(&xi, &di)| xi + alpha * di)
            .collect();
        if x_next != next.x {
            ctx.fail(
                Invariant::StepConsistency,
                k,
                "x_{k+1} != x_k + alpha d_k".into(),
            );
        }
        let f_next = problem.eval(&next.x);
        if f_next != next.f {
            ctx.fail(
                Invariant::StepConsistency,
                k + 1,
                "stored F differs from re-evaluation".into(),
            );
        }
        let reference = rec.reference.clone().unwrap_or(replay_ref);
        if !armijo_accepts(&f_next, &reference, T::lit(cfg.rho), alpha, psi_d) {
            ctx.fail(
                Invariant::Acceptance,
                k,
                "accepted step fails its Armijo test".into(),
            );
        }
        if average {
            let need = cfg.rho * alpha.to_f64_lossy() * psi_d_f.abs();
            for (j, (c, fi)) in reference.iter().zip(&f_next).enumerate() {
                let gain = c.to_f64_lossy() - fi.to_f64_lossy();
                if gain < need - tol.decrease {
                    ctx.fail(
                        Invariant::PerStepDecrease,
                        k,
                        format!("component {}: C - F(x_(k+1)) = {gain:e} < {need:e}", j + 1),
                    );
                }
            }
        }
    }

    // Stop reason agrees with the final record.
    let eps = cfg.eps_crit;
    if let Some(last) = recs.last() {
        let k = last.k;
        match run.stop_reason {
            StopReason::Critical if last.v_norm.to_f64_lossy() > eps => ctx.fail(
                Invariant::StopReason,
                k,
                "critical stop with |v| above eps_crit".into(),
            ),
            StopReason::MaxIter if k != cfg.max_iter => ctx.fail(
                Invariant::StopReason,
                k,
                format!("max_iter stop after {k} steps"),
            ),
            _ => {}
        }
        if last.took_step() {
            ctx.fail(
                Invariant::StopReason,
                k,
                "final record carries a step".into(),
            );
        }
        if recs[..recs.len() - 1]
            .iter()
            .any(|r| r.v_norm.to_f64_lossy() <= eps)
        {
            ctx.fail(
                Invariant::StopReason,
                k,
                "ran past a critical iterate".into(),
            );
        }
    } else {
        ctx.fail(Invariant::TraceIndex, 0, "empty trace".into());
    }
    if run.final_x != recs.last().map(|r| r.x.clone()).unwrap_or_default() {
        ctx.fail(
            Invariant::StepConsistency,
            recs.len(),
            "final_x differs from last record".into(),
        );
    }
    report
}
