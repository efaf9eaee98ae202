//! Smooth benchmark problems with closed-form Jacobians.
//!
//! | id       | m | convex | objectives                                                     |
//! |----------|---|--------|----------------------------------------------------------------|
//! | `quad2`  | 2 | yes    | `F_1 = ||x||^2 / 2`, `F_2 = ||x - 2e||^2 / 2` (JOS1 family)     |
//! | `ellip2` | 2 | yes    | as `quad2` with both objectives weighted by `H = diag(h_j)`    |
//! | `quad3`  | 3 | yes    | `F_i = ||x - c_i||^2 / 2`, `c = {0, 2 e_1, 2 e_2}`              |
//! | `ff`     | 2 | no     | Fonseca-Fleming: `F_{1,2} = 1 - exp(-||x -+ e / sqrt(n)||^2)`   |
//! | `sphere` | 1 | yes    | `F = ||x||^2 / 2`                                               |
//!
//! `e` is the all-ones vector and `h_j = 10^(2j/(n-1) - 2)`. The Pareto critical
//! sets are the segment `[0, 2e]` (for both `quad2` and `ellip2`), the
//! triangle `conv{c_i}`, the segment `[-e, e] / sqrt(n)` and the origin.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Jacobian};
use crate::problem::MultiObjective;
use crate::scalar::Scalar;

pub const PROBLEM_IDS: [&str; 5] = ["quad2", "ellip2", "quad3", "ff", "sphere"];
pub const SUITE_DIMS: [usize; 3] = [2, 5, 10];

/// A suite problem that can also report its distance to the known Pareto critical set.
pub trait SuiteProblem<T: Scalar>: MultiObjective<T> {
    fn pareto_distance(&self, x: &[T]) -> Option<T>;
}

pub struct SuiteEntry<T: Scalar> {
    pub id: &'static str,
    pub problem: Box<dyn SuiteProblem<T>>,
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    pub convex: bool,
}

impl<T: Scalar> SuiteEntry<T> {
    pub fn pareto_distance(&self, x: &[T]) -> Option<T> {
        self.problem.pareto_distance(x)
    }

    /// `count` start points drawn uniformly from the sampling box.
    pub fn sample_starts(&self, count: usize, seed: u64) -> Vec<Vec<T>> {
        sample_box(&self.lower, &self.upper, count, seed)
    }
}

impl<T: Scalar> std::fmt::Debug for SuiteEntry<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SuiteEntry")
            .field("id", &self.id)
            .field("n", &self.problem.dim())
            .field("m", &self.problem.num_objectives())
            .field("convex", &self.convex)
            .finish()
    }
}

/// Uniform samples from `[lower, upper]`; identical for identical seeds.
pub fn sample_box<T: Scalar>(lower: &[T], upper: &[T], count: usize, seed: u64) -> Vec<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            lower
                .iter()
                .zip(upper)
                .map(|(&lo, &hi)| {
                    let u: f64 = rng.gen();
                    lo + (hi - lo) * T::lit(u)
                })
                .collect()
        })
        .collect()
}

/// Euclidean distance from `x` to the segment `[a, b]`.
pub fn segment_distance<T: Scalar>(x: &[T], a: &[T], b: &[T]) -> T {
    let ab: Vec<T> = b.iter().zip(a).map(|(&bi, &ai)| bi - ai).collect();
    let ax: Vec<T> = x.iter().zip(a).map(|(&xi, &ai)| xi - ai).collect();
    let len2 = dot(&ab, &ab);
    let t = if len2 > T::zero() {
        (dot(&ax, &ab) / len2).max(T::zero()).min(T::one())
    } else {
        T::zero()
    };
    let r: Vec<T> = ax.iter().zip(&ab).map(|(&p, &q)| p - t * q).collect();
    norm(&r)
}

/// `F_1 = (x - a)' H (x - a) / 2`, `F_2 = (x - b)' H (x - b) / 2` with a shared
/// diagonal `H`; the critical set is the segment `[a, b]` for any positive `H`.
#[derive(Debug, Clone)]
pub struct SeparatedQuadratics<T> {
    name: String,
    a: Vec<T>,
    b: Vec<T>,
    h: Vec<T>,
}

impl<T: Scalar> SeparatedQuadratics<T> {
    pub fn new(a: Vec<T>, b: Vec<T>) -> Self {
        let h = vec![T::one(); a.len()];
        Self::with_hessian(a, b, h)
    }

    pub fn with_hessian(a: Vec<T>, b: Vec<T>, h: Vec<T>) -> Self {
        assert_eq!(a.len(), b.len());
        assert_eq!(a.len(), h.len());
        assert!(
            h.iter().all(|&v| v > T::zero()),
            "diagonal Hessian must be positive"
        );
        Self {
            name: format!("quad2-n{}", a.len()),
            a,
            b,
            h,
        }
    }

    /// `a = 0`, `b = 2e`, `H = I`.
    pub fn standard(n: usize) -> Self {
        Self::new(vec![T::zero(); n], vec![T::lit(2.0); n])
    }

    /// `a = 0`, `b = 2e`, `H = diag(10^(2j/(n-1) - 2))`, condition number 100.
    pub fn ill_conditioned(n: usize) -> Self {
        let h = (0..n)
            .map(|j| {
                let t = if n > 1 {
                    j as f64 / (n - 1) as f64
                } else {
                    0.0
                };
                T::lit(10f64.powf(2.0 * t - 2.0))
            })
            .collect();
        let mut p = Self::with_hessian(vec![T::zero(); n], vec![T::lit(2.0); n], h);
        p.name = format!("ellip2-n{n}");
        p
    }
}

impl<T: Scalar> MultiObjective<T> for SeparatedQuadratics<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.a.len()
    }

    fn num_objectives(&self) -> usize {
        2
    }

    fn eval(&self, x: &[T]) -> Vec<T> {
        let half = T::lit(0.5);
        let f = |c: &[T]| {
            half * x
                .iter()
                .zip(c)
                .zip(&self.h)
                .map(|((&xi, &ci), &hi)| hi * (xi - ci) * (xi - ci))
                .sum::<T>()
        };
        vec![f(&self.a), f(&self.b)]
    }

    fn jacobian(&self, x: &[T]) -> Jacobian<T> {
        let n = self.a.len();
        let mut j = Jacobian::zeros(2, n);
        for (c, row) in [&self.a, &self.b].into_iter().enumerate() {
            for (o, ((&xi, &ci), &hi)) in
                j.row_mut(c).iter_mut().zip(x.iter().zip(row).zip(&self.h))
            {
                *o = hi * (xi - ci);
            }
        }
        j
    }
}

impl<T: Scalar> SuiteProblem<T> for SeparatedQuadratics<T> {
    fn pareto_distance(&self, x: &[T]) -> Option<T> {
        Some(segment_distance(x, &self.a, &self.b))
    }
}

/// `F_i = ||x - c_i||^2 / 2` with `c_1 = 0`, `c_2 = 2 e_1`, `c_3 = 2 e_2`; needs `n >= 2`.
#[derive(Debug, Clone)]
pub struct TriangleQuadratics<T> {
    name: String,
    centers: [Vec<T>; 3],
}

impl<T: Scalar> TriangleQuadratics<T> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "quad3 needs n >= 2");
        let mut c2 = vec![T::zero(); n];
        c2[0] = T::lit(2.0);
        let mut c3 = vec![T::zero(); n];
        c3[1] = T::lit(2.0);
        Self {
            name: format!("quad3-n{n}"),
            centers: [vec![T::zero(); n], c2, c3],
        }
    }
}

impl<T: Scalar> MultiObjective<T> for TriangleQuadratics<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.centers[0].len()
    }

    fn num_objectives(&self) -> usize {
        3
    }

    fn eval(&self, x: &[T]) -> Vec<T> {
        let half = T::lit(0.5);
        self.centers
            .iter()
            .map(|c| {
                half * x
                    .iter()
                    .zip(c)
                    .map(|(&xi, &ci)| (xi - ci) * (xi - ci))
                    .sum::<T>()
            })
            .collect()
    }

    fn jacobian(&self, x: &[T]) -> Jacobian<T> {
        let mut j = Jacobian::zeros(3, self.dim());
        for (i, c) in self.centers.iter().enumerate() {
            for (o, (&xi, &ci)) in j.row_mut(i).iter_mut().zip(x.iter().zip(c)) {
                *o = xi - ci;
            }
        }
        j
    }
}

impl<T: Scalar> SuiteProblem<T> for TriangleQuadratics<T> {
    fn pareto_distance(&self, x: &[T]) -> Option<T> {
        // the triangle lives in the (x1, x2) plane
        let off_plane: T = x[2..].iter().map(|&v| v * v).sum();
        let (p, q) = (x[0], x[1]);
        let two = T::lit(2.0);
        let in_plane = if p >= T::zero() && q >= T::zero() && p + q <= two {
            T::zero()
        } else {
            let z = T::zero();
            let pt = [p, q];
            [
                segment_distance(&pt, &[z, z], &[two, z]),
                segment_distance(&pt, &[z, z], &[z, two]),
                segment_distance(&pt, &[two, z], &[z, two]),
            ]
            .into_iter()
            .fold(T::infinity(), T::min)
        };
        Some((in_plane * in_plane + off_plane).sqrt())
    }
}

/// Fonseca-Fleming: nonconvex objectives, convex Pareto set.
#[derive(Debug, Clone)]
pub struct FonsecaFleming<T> {
    name: String,
    n: usize,
    shift: T,
}

impl<T: Scalar> FonsecaFleming<T> {
    pub fn new(n: usize) -> Self {
        Self {
            name: format!("ff-n{n}"),
            n,
            shift: T::one() / T::from_usize(n).unwrap().sqrt(),
        }
    }

    fn sq_dist(&self, x: &[T], sign: T) -> T {
        x.iter()
            .map(|&xi| {
                let t = xi - sign * self.shift;
                t * t
            })
            .sum()
    }
}

impl<T: Scalar> MultiObjective<T> for FonsecaFleming<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn num_objectives(&self) -> usize {
        2
    }

    fn eval(&self, x: &[T]) -> Vec<T> {
        vec![
            T::one() - (-self.sq_dist(x, T::one())).exp(),
            T::one() - (-self.sq_dist(x, -T::one())).exp(),
        ]
    }

    fn jacobian(&self, x: &[T]) -> Jacobian<T> {
        let mut j = Jacobian::zeros(2, self.n);
        for (i, sign) in [T::one(), -T::one()].into_iter().enumerate() {
            let scale = T::lit(2.0) * (-self.sq_dist(x, sign)).exp();
            for (o, &xi) in j.row_mut(i).iter_mut().zip(x) {
                *o = scale * (xi - sign * self.shift);
            }
        }
        j
    }
}

impl<T: Scalar> SuiteProblem<T> for FonsecaFleming<T> {
    fn pareto_distance(&self, x: &[T]) -> Option<T> {
        let a = vec![self.shift; self.n];
        let b = vec![-self.shift; self.n];
        Some(segment_distance(x, &b, &a))
    }
}

#[derive(Debug, Clone)]
pub struct Sphere {
    name: String,
    n: usize,
}

impl Sphere {
    pub fn new(n: usize) -> Self {
        Self {
            name: format!("sphere-n{n}"),
            n,
        }
    }
}

impl<T: Scalar> MultiObjective<T> for Sphere {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn num_objectives(&self) -> usize {
        1
    }

    fn eval(&self, x: &[T]) -> Vec<T> {
        vec![T::lit(0.5) * dot(x, x)]
    }

    fn jacobian(&self, x: &[T]) -> Jacobian<T> {
        Jacobian::from_row_major(1, self.n, x.to_vec()).expect("length n")
    }
}

impl<T: Scalar> SuiteProblem<T> for Sphere {
    fn pareto_distance(&self, x: &[T]) -> Option<T> {
        Some(norm(x))
    }
}

/// Looks up a suite problem by id at dimension `n`.
pub fn by_id<T: Scalar>(id: &str, n: usize) -> Result<SuiteEntry<T>> {
    let uniform = |lo: f64, hi: f64| (vec![T::lit(lo); n], vec![T::lit(hi); n]);
    let (problem, (lower, upper), convex, id): (Box<dyn SuiteProblem<T>>, _, _, _) = match id {
        "quad2" => (
            Box::new(SeparatedQuadratics::standard(n)),
            uniform(-4.0, 6.0),
            true,
            "quad2",
        ),
        "ellip2" => (
            Box::new(SeparatedQuadratics::ill_conditioned(n)),
            uniform(-4.0, 6.0),
            true,
            "ellip2",
        ),
        "quad3" if n >= 2 => (
            Box::new(TriangleQuadratics::new(n)),
            uniform(-4.0, 6.0),
            true,
            "quad3",
        ),
        "ff" => {
            let r = 2.0 / (n as f64).sqrt();
            (
                Box::new(FonsecaFleming::new(n)),
                uniform(-r, r),
                false,
                "ff",
            )
        }
        "sphere" => (Box::new(Sphere::new(n)), uniform(-5.0, 5.0), true, "sphere"),
        other => return Err(Error::UnknownProblem(other.to_string())),
    };
    Ok(SuiteEntry {
        id,
        problem,
        lower,
        upper,
        convex,
    })
}

/// Every suite problem at dimension `n`.
pub fn suite<T: Scalar>(n: usize) -> Vec<SuiteEntry<T>> {
    PROBLEM_IDS
        .iter()
        .filter_map(|id| by_id(id, n).ok())
        .collect()
}

/// Every suite problem at each dimension in [`SUITE_DIMS`].
pub fn full_suite<T: Scalar>() -> Vec<SuiteEntry<T>> {
    SUITE_DIMS.iter().flat_map(|&n| suite(n)).collect()
}

/// Largest relative deviation between the analytic Jacobian and central
/// differences `(F(x + h e_j) - F(x - h e_j)) / 2h`, measured as
/// `|J_ij - D_ij| / max(1, |J_ij|)`.
pub fn fd_check<T, P>(problem: &P, x: &[T], h: T) -> Result<T>
where
    T: Scalar,
    P: MultiObjective<T> + ?Sized,
{
    assert!(h > T::zero(), "finite-difference step must be positive");
    let jac = problem.jacobian(x);
    let (m, n) = (problem.num_objectives(), problem.dim());
    if jac.nrows() != m || jac.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: m * n,
            found: jac.nrows() * jac.ncols(),
        });
    }
    let mut worst = T::zero();
    let mut xp = x.to_vec();
    for j in 0..n {
        xp[j] = x[j] + h;
        let fp = problem.eval(&xp);
        xp[j] = x[j] - h;
        let fm = problem.eval(&xp);
        xp[j] = x[j];
        for i in 0..m {
            let fd = (fp[i] - fm[i]) / (h + h);
            let a = jac.row(i)[j];
            let err = (a - fd).abs() / a.abs().max(T::one());
            if !err.is_finite() {
                return Err(Error::NonFinite("finite-difference check"));
            }
            worst = worst.max(err);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::FnProblem;

    #[test]
    fn quad2_pareto_set_is_segment() {
        let e = by_id::<f64>("quad2", 2).unwrap();
        assert_eq!(e.pareto_distance(&[1.0, 1.0]), Some(0.0));
        assert_eq!(e.pareto_distance(&[2.0, 2.0]), Some(0.0));
        assert!((e.pareto_distance(&[3.0, 3.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((e.pareto_distance(&[1.0, -1.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn quad2_endpoint_is_critical() {
        use crate::criticality::{solve_dual, DualOptions};
        let e = by_id::<f64>("quad2", 2).unwrap();
        let ds = solve_dual(&e.problem.jacobian(&[0.0, 0.0]), DualOptions::default()).unwrap();
        assert_eq!(ds.lambda, vec![1.0, 0.0]);
        assert_eq!(ds.v_norm(), 0.0);
    }

    #[test]
    fn ellip2_segment_points_are_critical() {
        use crate::criticality::{solve_dual, DualOptions};
        let e = by_id::<f64>("ellip2", 5).unwrap();
        for t in [0.0, 0.3, 1.0] {
            let x = vec![2.0 * t; 5];
            let ds = solve_dual(&e.problem.jacobian(&x), DualOptions::default()).unwrap();
            assert!(ds.v_norm() < 1e-12, "t={t}");
        }
        let x = vec![1.0, 1.0, 1.0, 1.0, 0.0];
        let ds = solve_dual(&e.problem.jacobian(&x), DualOptions::default()).unwrap();
        assert!(ds.v_norm() > 0.1);
    }

    #[test]
    fn quad3_triangle_distance() {
        let e = by_id::<f64>("quad3", 3).unwrap();
        assert_eq!(e.pareto_distance(&[0.5, 0.5, 0.0]), Some(0.0));
        assert_eq!(e.pareto_distance(&[0.5, 0.5, 2.0]), Some(2.0));
        assert!((e.pareto_distance(&[2.0, 2.0, 0.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(e.pareto_distance(&[-1.0, 0.5, 0.0]), Some(1.0));
        assert!(by_id::<f64>("quad3", 1).is_err());
    }

    #[test]
    fn unknown_id() {
        assert_eq!(
            by_id::<f64>("zdt1", 2).unwrap_err(),
            Error::UnknownProblem("zdt1".into())
        );
    }

    #[test]
    fn suite_covers_required_families() {
        for n in SUITE_DIMS {
            let s = suite::<f64>(n);
            assert!(s.iter().any(|e| e.id == "quad2" && e.convex));
            assert!(s
                .iter()
                .any(|e| e.problem.num_objectives() == 3 && e.convex));
            assert!(s
                .iter()
                .any(|e| !e.convex && e.problem.num_objectives() == 2));
            assert!(s.iter().all(|e| e.problem.dim() == n));
        }
    }

    #[test]
    fn fd_check_exact_on_affine() {
        let p = FnProblem::new(
            "affine",
            3,
            2,
            |x: &[f64]| vec![x[0] - 2.0 * x[1] + 0.5 * x[2] + 1.0, 3.0 * x[2] - x[0]],
            |_: &[f64]| Jacobian::from_rows(&[vec![1.0, -2.0, 0.5], vec![-1.0, 0.0, 3.0]]).unwrap(),
        );
        assert!(fd_check(&p, &[0.3, -1.2, 2.0], 1e-3).unwrap() < 1e-12);
    }

    #[test]
    fn fd_check_quadratic() {
        let e = by_id::<f64>("quad3", 5).unwrap();
        let x = [1.3, -0.7, 2.2, 0.1, -3.0];
        assert!(fd_check(e.problem.as_ref(), &x, 1e-5).unwrap() <= 1e-8);
    }

    #[test]
    fn fd_check_catches_wrong_jacobian() {
        let p = FnProblem::new(
            "wrong",
            1,
            1,
            |x: &[f64]| vec![x[0] * x[0]],
            |x: &[f64]| Jacobian::from_rows(&[vec![x[0]]]).unwrap(),
        );
        assert!(fd_check(&p, &[1.5], 1e-6).unwrap() > 0.1);
    }

    #[test]
    fn fonseca_fleming_fd_on_seeded_points() {
        let e = by_id::<f64>("ff", 5).unwrap();
        for x in e.sample_starts(10, 11) {
            assert!(fd_check(e.problem.as_ref(), &x, 1e-6).unwrap() <= 1e-5);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_in_box() {
        let e = by_id::<f64>("quad2", 5).unwrap();
        let a = e.sample_starts(20, 3);
        assert_eq!(a, e.sample_starts(20, 3));
        assert_ne!(a, e.sample_starts(20, 4));
        for x in &a {
            for (i, &v) in x.iter().enumerate() {
                assert!(v >= e.lower[i] && v <= e.upper[i]);
            }
        }
    }
}
