//! Pareto criticality: the scalarization `psi`, the max-row matrix norm, and
//! the min-norm subproblem that yields `(lambda(x), v(x), theta(x))`.
//!
//! `v(x)` minimizes `psi(x, d) + ||d||^2 / 2`. Through its dual it equals
//! `-sum_i lambda_i grad F_i(x)` where `lambda` minimizes
//! `||sum_i lambda_i grad F_i(x)||^2 / 2` over the unit simplex, and the
//! optimal value is `theta(x) = -||v(x)||^2 / 2`.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Jacobian};
use crate::scalar::Scalar;

/// `psi(x, d) = max_i <grad F_i(x), d>`.
pub fn psi<T: Scalar>(jac: &Jacobian<T>, d: &[T]) -> Result<T> {
    psi_argmax(jac, d).map(|(value, _)| value)
}

/// Like [`psi`] but also reports the attaining objective (smallest index on ties).
pub fn psi_argmax<T: Scalar>(jac: &Jacobian<T>, d: &[T]) -> Result<(T, usize)> {
    if d.len() != jac.ncols() {
        return Err(Error::DimensionMismatch {
            expected: jac.ncols(),
            found: d.len(),
        });
    }
    if jac.nrows() == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }
    let mut best = (T::neg_infinity(), 0);
    for (i, row) in jac.rows().enumerate() {
        let p = dot(row, d);
        if p > best.0 {
            best = (p, i);
        }
    }
    if !best.0.is_finite() {
        return Err(Error::NonFinite("psi"));
    }
    Ok(best)
}

/// Operator norm from Euclidean to max norm: the largest row 2-norm.
pub fn jacobian_norm<T: Scalar>(jac: &Jacobian<T>) -> T {
    jac.rows().map(norm).fold(T::zero(), T::max)
}

/// `a+`: zero at zero, `1/a` otherwise.
pub fn pseudo_reciprocal<T: Scalar>(a: T) -> T {
    if a == T::zero() {
        T::zero()
    } else {
        a.recip()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution<T> {
    /// Simplex weights.
    pub lambda: Vec<T>,
    /// `-J^T lambda`.
    pub v: Vec<T>,
    /// `-||v||^2 / 2`.
    pub theta: T,
    /// Inner iterations used (zero for the closed forms).
    pub iterations: usize,
}

impl<T: Scalar> DualSolution<T> {
    pub fn v_norm(&self) -> T {
        norm(&self.v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualOptions<T> {
    /// Bound on the Frank-Wolfe duality gap, relative to the largest squared gradient norm.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for DualOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::default_dual_tol(),
            max_iter: 10_000,
        }
    }
}

/// Dual objective `||J^T lambda||^2 / 2`.
pub fn dual_objective<T: Scalar>(jac: &Jacobian<T>, lambda: &[T]) -> T {
    let w = jac.tr_mul_vec(lambda);
    dot(&w, &w) * T::lit(0.5)
}

/// Solves the min-norm subproblem at the point whose Jacobian is `jac`.
pub fn solve_dual<T: Scalar>(jac: &Jacobian<T>, opts: DualOptions<T>) -> Result<DualSolution<T>> {
    let m = jac.nrows();
    if m == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }
    if !jac.is_finite() {
        return Err(Error::NonFinite("jacobian"));
    }
    let (mut lambda, iterations) = match m {
        1 => (vec![T::one()], 0),
        2 => (two_point(jac.row(0), jac.row(1)), 0),
        _ => away_step_frank_wolfe(&jac.gram(), m, opts)?,
    };
    project_to_simplex_support(&mut lambda);
    let mut v = jac.tr_mul_vec(&lambda);
    for vi in v.iter_mut() {
        *vi = -*vi;
    }
    let theta = -T::lit(0.5) * dot(&v, &v);
    Ok(DualSolution {
        lambda,
        v,
        theta,
        iterations,
    })
}

pub fn is_critical<T: Scalar>(ds: &DualSolution<T>, eps_crit: T) -> bool {
    ds.v_norm() <= eps_crit
}

/// Clamps round-off negatives and renormalizes so the weights sum to one.
fn project_to_simplex_support<T: Scalar>(lambda: &mut [T]) {
    for l in lambda.iter_mut() {
        if !(*l > T::zero()) {
            *l = T::zero();
        }
    }
    let s: T = lambda.iter().copied().sum();
    if s > T::zero() {
        for l in lambda.iter_mut() {
            *l = *l / s;
        }
    } else {
        let u = T::one() / T::from_usize(lambda.len()).unwrap();
        lambda.iter_mut().for_each(|l| *l = u);
    }
}

/// Minimizes `||t g1 + (1 - t) g2||^2` over `t in [0, 1]`.
fn two_point<T: Scalar>(g1: &[T], g2: &[T]) -> Vec<T> {
    let mut num = T::zero();
    let mut den = T::zero();
    for (&a, &b) in g1.iter().zip(g2) {
        let diff = a - b;
        num = num - b * diff;
        den = den + diff * diff;
    }
    let t = if den > T::zero() {
        (num / den).max(T::zero()).min(T::one())
    } else {
        T::lit(0.5)
    };
    vec![t, T::one() - t]
}

/// Frank-Wolfe with away steps on `lambda^T K lambda / 2` over the simplex,
/// where `K` is the Gram matrix of the gradients.
///
/// Stops once the duality gap is below `tol * max_i K_ii`, trying an exact
/// solve on the current support first; keeps iterating towards a gap that is
/// also small relative to the objective, which pins `||v||` down when the
/// optimum is near zero.
fn away_step_frank_wolfe<T: Scalar>(
    gram: &[T],
    m: usize,
    opts: DualOptions<T>,
) -> Result<(Vec<T>, usize)> {
    let k = |i: usize, j: usize| gram[i * m + j];
    let scale = (0..m).map(|i| k(i, i)).fold(T::zero(), T::max);
    let start = (0..m).fold(0, |b, i| if k(i, i) < k(b, b) { i } else { b });
    let mut lambda = vec![T::zero(); m];
    lambda[start] = T::one();
    if scale == T::zero() {
        return Ok((lambda, 0));
    }
    let loose = opts.tol * scale;
    let strict_floor = opts.tol * opts.tol * scale;
    let half = T::lit(0.5);

    let mut w: Vec<T> = (0..m).map(|i| k(i, start)).collect();
    let mut polished_support: Option<Vec<bool>> = None;
    let mut last_gap = T::infinity();

    for it in 0..opts.max_iter {
        if it % 64 == 63 {
            refresh(gram, m, &lambda, &mut w);
        }
        let lw = dot(&lambda, &w);
        let obj = half * lw;
        let s = argmin(&w);
        let gap = lw - w[s];
        last_gap = gap;
        if gap <= strict_floor.max(opts.tol * obj) {
            return Ok((lambda, it));
        }
        if gap <= loose {
            let support: Vec<bool> = lambda.iter().map(|&l| l > T::zero()).collect();
            if polished_support.as_ref() != Some(&support) {
                if let Some(candidate) = solve_on_support(gram, m, &support) {
                    let mut cw = vec![T::zero(); m];
                    refresh(gram, m, &candidate, &mut cw);
                    let c_lw = dot(&candidate, &cw);
                    let c_gap = c_lw - cw[argmin(&cw)];
                    if c_lw <= lw && c_gap <= strict_floor.max(opts.tol * half * c_lw) {
                        return Ok((candidate, it));
                    }
                }
                polished_support = Some(support);
            }
        }

        let away = (0..m)
            .filter(|&i| lambda[i] > T::zero())
            .fold(None, |b: Option<usize>, i| match b {
                Some(j) if w[j] >= w[i] => Some(j),
                _ => Some(i),
            })
            .expect("iterate always has support");
        let away_gap = w[away] - lw;

        if gap >= away_gap || lambda[away] >= T::one() {
            // toward vertex s: d = e_s - lambda
            let slope = w[s] - lw;
            let curv = k(s, s) - (w[s] + w[s]) + lw;
            let step = line_step(slope, curv, T::one());
            for (i, l) in lambda.iter_mut().enumerate() {
                *l = *l * (T::one() - step) + if i == s { step } else { T::zero() };
            }
            for (i, wi) in w.iter_mut().enumerate() {
                *wi = *wi + step * (k(i, s) - *wi);
            }
        } else {
            // away from vertex a: d = lambda - e_a
            let max_step = lambda[away] / (T::one() - lambda[away]);
            let slope = lw - w[away];
            let curv = lw - (w[away] + w[away]) + k(away, away);
            let step = line_step(slope, curv, max_step);
            for (i, l) in lambda.iter_mut().enumerate() {
                *l = *l * (T::one() + step) - if i == away { step } else { T::zero() };
            }
            if step >= max_step {
                lambda[away] = T::zero();
            }
            for (i, wi) in w.iter_mut().enumerate() {
                *wi = *wi + step * (*wi - k(i, away));
            }
        }
    }

    refresh(gram, m, &lambda, &mut w);
    let lw = dot(&lambda, &w);
    let gap = lw - w[argmin(&w)];
    if gap <= loose {
        Ok((lambda, opts.max_iter))
    } else {
        Err(Error::NoConvergence {
            iterations: opts.max_iter,
            gap: gap.min(last_gap).to_f64_lossy(),
        })
    }
}

fn line_step<T: Scalar>(slope: T, curv: T, max_step: T) -> T {
    if slope >= T::zero() {
        return T::zero();
    }
    if curv <= T::zero() {
        return max_step;
    }
    (-slope / curv).min(max_step)
}

fn argmin<T: Scalar>(w: &[T]) -> usize {
    (0..w.len()).fold(0, |b, i| if w[i] < w[b] { i } else { b })
}

fn refresh<T: Scalar>(gram: &[T], m: usize, lambda: &[T], w: &mut [T]) {
    for (i, wi) in w.iter_mut().enumerate() {
        *wi = dot(&gram[i * m..(i + 1) * m], lambda);
    }
}

/// Minimum of `lambda^T K lambda` over the affine hull of the support, or
/// `None` when that system is singular or the minimizer leaves the simplex.
fn solve_on_support<T: Scalar>(gram: &[T], m: usize, support: &[bool]) -> Option<Vec<T>> {
    let idx: Vec<usize> = (0..m).filter(|&i| support[i]).collect();
    let p = *idx.first()?;
    let rest = &idx[1..];
    let r = rest.len();
    if r == 0 {
        return None;
    }
    let k = |i: usize, j: usize| gram[i * m + j];
    // normal equations for min ||g_p + sum_a y_a (g_a - g_p)||^2
    let mut a = vec![T::zero(); r * r];
    let mut b = vec![T::zero(); r];
    for (ia, &ga) in rest.iter().enumerate() {
        for (ib, &gb) in rest.iter().enumerate() {
            a[ia * r + ib] = k(ga, gb) - k(ga, p) - k(p, gb) + k(p, p);
        }
        b[ia] = k(p, p) - k(ga, p);
    }
    let diag_scale = (0..r).map(|i| a[i * r + i].abs()).fold(T::zero(), T::max);
    let y = gauss_solve(&mut a, &mut b, r, diag_scale * T::epsilon() * T::lit(1e3))?;
    let mut lambda = vec![T::zero(); m];
    let mut sum = T::zero();
    for (&ga, &ya) in rest.iter().zip(&y) {
        lambda[ga] = ya;
        sum = sum + ya;
    }
    lambda[p] = T::one() - sum;
    let slack = T::epsilon() * T::lit(64.0);
    if lambda.iter().any(|&l| l < -slack || !l.is_finite()) {
        return None;
    }
    project_to_simplex_support(&mut lambda);
    Some(lambda)
}

/// Gaussian elimination with partial pivoting; `None` if a pivot falls below `pivot_tol`.
fn gauss_solve<T: Scalar>(a: &mut [T], b: &mut [T], r: usize, pivot_tol: T) -> Option<Vec<T>> {
    for col in 0..r {
        let piv = (col..r).fold(col, |best, row| {
            if a[row * r + col].abs() > a[best * r + col].abs() {
                row
            } else {
                best
            }
        });
        if !(a[piv * r + col].abs() > pivot_tol) {
            return None;
        }
        if piv != col {
            for j in 0..r {
                a.swap(piv * r + j, col * r + j);
            }
            b.swap(piv, col);
        }
        for row in col + 1..r {
            let f = a[row * r + col] / a[col * r + col];
            for j in col..r {
                a[row * r + j] = a[row * r + j] - f * a[col * r + j];
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = vec![T::zero(); r];
    for row in (0..r).rev() {
        let mut s = b[row];
        for j in row + 1..r {
            s = s - a[row * r + j] * x[j];
        }
        x[row] = s / a[row * r + row];
    }
    Some(x)
}
