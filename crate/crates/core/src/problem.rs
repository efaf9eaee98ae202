//! Problem model: a vector-valued objective over `R^n` with its Jacobian.

use std::fmt;

use crate::linalg::Jacobian;
use crate::scalar::Scalar;

/// A smooth multiobjective function `F: R^n -> R^m`.
///
/// Implementations must be pure: the solver and harness call `eval` and
/// `jacobian` from several threads at once, one run per thread.
pub trait MultiObjective<T: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    /// Number of variables `n`.
    fn dim(&self) -> usize;

    /// Number of objectives `m`.
    fn num_objectives(&self) -> usize;

    fn eval(&self, x: &[T]) -> Vec<T>;

    /// `m x n` Jacobian; row `i` is the gradient of `F_i` at `x`.
    fn jacobian(&self, x: &[T]) -> Jacobian<T>;

    /// Box used only to sample start points. The solver never projects onto it.
    fn sampling_box(&self) -> Option<(Vec<T>, Vec<T>)> {
        None
    }
}

type EvalFn<T> = Box<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;
type JacFn<T> = Box<dyn Fn(&[T]) -> Jacobian<T> + Send + Sync>;

/// Closure-backed problem, convenient for ad hoc objectives and tests.
pub struct FnProblem<T: Scalar> {
    name: String,
    n: usize,
    m: usize,
    f: EvalFn<T>,
    jac: JacFn<T>,
    bounds: Option<(Vec<T>, Vec<T>)>,
}

impl<T: Scalar> FnProblem<T> {
    pub fn new<F, J>(name: impl Into<String>, n: usize, m: usize, f: F, jac: J) -> Self
    where
        F: Fn(&[T]) -> Vec<T> + Send + Sync + 'static,
        J: Fn(&[T]) -> Jacobian<T> + Send + Sync + 'static,
    {
        assert!(n > 0 && m > 0, "problem needs n >= 1 and m >= 1");
        Self {
            name: name.into(),
            n,
            m,
            f: Box::new(f),
            jac: Box::new(jac),
            bounds: None,
        }
    }

    pub fn with_box(mut self, lower: Vec<T>, upper: Vec<T>) -> Self {
        assert_eq!(lower.len(), self.n);
        assert_eq!(upper.len(), self.n);
        self.bounds = Some((lower, upper));
        self
    }
}

impl<T: Scalar> fmt::Debug for FnProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnProblem")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .finish_non_exhaustive()
    }
}

impl<T: Scalar> MultiObjective<T> for FnProblem<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn num_objectives(&self) -> usize {
        self.m
    }

    fn eval(&self, x: &[T]) -> Vec<T> {
        (self.f)(x)
    }

    fn jacobian(&self, x: &[T]) -> Jacobian<T> {
        (self.jac)(x)
    }

    fn sampling_box(&self) -> Option<(Vec<T>, Vec<T>)> {
        self.bounds.clone()
    }
}
