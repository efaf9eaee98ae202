//! Nonmonotone Armijo step-size rules.
//!
//! Both searches accept a trial step `alpha` only if every objective passes
//! `F_i(x + alpha d) <= R_i + rho * alpha * psi(x, d)`, where `R` is either
//! the componentwise max over a sliding window of recent objective vectors
//! (max-type) or the averaged reference `C_k` (average-type).

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::linalg::norm_sq;
use crate::scalar::Scalar;

/// The last `min(k, M) + 1` objective vectors, newest first.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxWindow<T> {
    window: usize,
    values: VecDeque<Vec<T>>,
}

impl<T: Scalar> MaxWindow<T> {
    /// Window seeded with `F(x_0)`.
    pub fn new(window: usize, f0: Vec<T>) -> Self {
        let mut values = VecDeque::with_capacity(window + 1);
        values.push_front(f0);
        Self { window, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[T]> {
        self.values.iter().map(Vec::as_slice)
    }

    pub fn push(&mut self, f: Vec<T>) {
        self.values.push_front(f);
        self.values.truncate(self.window + 1);
    }

    /// Componentwise max over the window.
    pub fn max(&self) -> Vec<T> {
        let mut it = self.values.iter();
        let mut out = it.next().cloned().unwrap_or_default();
        for f in it {
            for (o, &v) in out.iter_mut().zip(f) {
                *o = o.max(v);
            }
        }
        out
    }
}

/// Value form of [`MaxWindow::push`].
pub fn window_push<T: Scalar>(mut window: MaxWindow<T>, f: Vec<T>) -> MaxWindow<T> {
    window.push(f);
    window
}

/// `(Q_k, C_k)` of the average-type search.
#[derive(Debug, Clone, PartialEq)]
pub struct AverageState<T> {
    pub q: T,
    pub c: Vec<T>,
}

impl<T: Scalar> AverageState<T> {
    /// `Q_0 = 1`, `C_0 = F(x_0)`.
    pub fn new(f0: Vec<T>) -> Self {
        Self { q: T::one(), c: f0 }
    }

    /// `Q' = eta Q + 1`, `C'_i = (eta Q C_i + F_i(x_{k+1})) / Q'`.
    pub fn update(&mut self, f_next: &[T], eta: T) {
        let weighted = eta * self.q;
        let q_next = weighted + T::one();
        for (c, &f) in self.c.iter_mut().zip(f_next) {
            *c = (weighted * *c + f) / q_next;
        }
        self.q = q_next;
    }
}

/// Value form of [`AverageState::update`].
pub fn update_average_state<T: Scalar>(
    mut state: AverageState<T>,
    f_next: &[T],
    eta: T,
) -> AverageState<T> {
    state.update(f_next, eta);
    state
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step<T> {
    pub alpha: T,
    /// Rejected trials before `alpha` (the exponent `h_k` for the average-type rule).
    pub trials: usize,
    pub x_next: Vec<T>,
    pub f_next: Vec<T>,
}

impl<T> Step<T> {
    pub fn f_evals(&self) -> usize {
        self.trials + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxTypeParams<T> {
    /// First trial `alpha^0`, taken from `[lambda1, lambda2]`.
    pub initial_step: T,
    /// Backtracking factor `sigma`, taken from `[lambda3, lambda4]`.
    pub shrink: T,
    pub rho: T,
    pub max_trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageTypeParams<T> {
    pub delta: T,
    pub rho: T,
    pub max_trials: usize,
}

/// True when `f <= reference + rho * alpha * psi_d` holds for every component.
pub fn armijo_accepts<T: Scalar>(f: &[T], reference: &[T], rho: T, alpha: T, psi_d: T) -> bool {
    let decrease = rho * alpha * psi_d;
    f.len() == reference.len()
        && f.iter()
            .zip(reference)
            .all(|(&fi, &ri)| fi.is_finite() && fi <= ri + decrease)
}

fn trial_point<T: Scalar>(x: &[T], d: &[T], alpha: T) -> Vec<T> {
    x.iter().zip(d).map(|(&xi, &di)| xi + alpha * di).collect()
}

struct Ladder<T> {
    first: T,
    shrink: T,
    rho: T,
    max_trials: usize,
}

fn backtrack<T, F>(
    eval: F,
    x: &[T],
    d: &[T],
    psi_d: T,
    reference: &[T],
    ladder: Ladder<T>,
) -> Result<Step<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Vec<T>,
{
    if !(psi_d < T::zero()) {
        return Err(Error::NonDescent {
            psi_d: psi_d.to_f64_lossy(),
        });
    }
    let mut alpha = ladder.first;
    for trials in 0..=ladder.max_trials {
        let x_next = trial_point(x, d, alpha);
        let f_next = eval(&x_next);
        if armijo_accepts(&f_next, reference, ladder.rho, alpha, psi_d) {
            return Ok(Step {
                alpha,
                trials,
                x_next,
                f_next,
            });
        }
        alpha = alpha * ladder.shrink;
    }
    Err(Error::LineSearchFail {
        trials: ladder.max_trials + 1,
    })
}

/// Max-type search: ladder `alpha^0, alpha^0 sigma, alpha^0 sigma^2, ...`
/// against the window max.
pub fn max_type_search<T, F>(
    eval: F,
    x: &[T],
    d: &[T],
    psi_d: T,
    window: &MaxWindow<T>,
    params: &MaxTypeParams<T>,
) -> Result<Step<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Vec<T>,
{
    backtrack(
        eval,
        x,
        d,
        psi_d,
        &window.max(),
        Ladder {
            first: params.initial_step,
            shrink: params.shrink,
            rho: params.rho,
            max_trials: params.max_trials,
        },
    )
}

/// `tau_k = -psi(x_k, d_k) / ||d_k||^2`.
pub fn initial_average_step<T: Scalar>(psi_d: T, d: &[T]) -> T {
    -psi_d / norm_sq(d)
}

/// Average-type search: ladder `tau_k delta^j` against `C_k`; `trials` is `h_k`.
pub fn average_type_search<T, F>(
    eval: F,
    x: &[T],
    d: &[T],
    psi_d: T,
    state: &AverageState<T>,
    params: &AverageTypeParams<T>,
) -> Result<Step<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Vec<T>,
{
    let tau = initial_average_step(psi_d, d);
    if !(tau > T::zero() && tau.is_finite()) {
        return Err(Error::NonDescent {
            psi_d: psi_d.to_f64_lossy(),
        });
    }
    backtrack(
        eval,
        x,
        d,
        psi_d,
        &state.c,
        Ladder {
            first: tau,
            shrink: params.delta,
            rho: params.rho,
            max_trials: params.max_trials,
        },
    )
}
