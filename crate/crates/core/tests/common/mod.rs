//! Test-side oracles, written independently of the library internals.
#![allow(dead_code)]

use nmmg::Jacobian;
use rand::Rng;

/// Entries uniform in `[-scale, scale]`.
pub fn random_jacobian<R: Rng>(rng: &mut R, m: usize, n: usize, scale: f64) -> Jacobian<f64> {
    let data = (0..m * n).map(|_| rng.gen_range(-scale..=scale)).collect();
    Jacobian::from_row_major(m, n, data).unwrap()
}

pub fn gram(j: &Jacobian<f64>) -> Vec<Vec<f64>> {
    let m = j.nrows();
    (0..m)
        .map(|a| {
            (0..m)
                .map(|b| j.row(a).iter().zip(j.row(b)).map(|(x, y)| x * y).sum())
                .collect()
        })
        .collect()
}

fn quad(k: &[Vec<f64>], l: &[f64]) -> f64 {
    let mut s = 0.0;
    for (a, ka) in k.iter().enumerate() {
        for (b, kab) in ka.iter().enumerate() {
            s += l[a] * kab * l[b];
        }
    }
    0.5 * s
}

/// Minimum of `lambda' K lambda / 2` over the simplex grid with spacing `1 / steps`.
pub fn grid_min(k: &[Vec<f64>], steps: usize) -> f64 {
    fn rec(k: &[Vec<f64>], steps: usize, left: usize, idx: usize, l: &mut [f64], best: &mut f64) {
        let m = l.len();
        if idx == m - 1 {
            l[idx] = left as f64 / steps as f64;
            let v = quad(k, l);
            if v < *best {
                *best = v;
            }
            return;
        }
        for i in 0..=left {
            l[idx] = i as f64 / steps as f64;
            rec(k, steps, left - i, idx + 1, l, best);
        }
    }
    let mut l = vec![0.0; k.len()];
    let mut best = f64::INFINITY;
    rec(k, steps, steps, 0, &mut l, &mut best);
    best
}

/// Dense Gaussian elimination with partial pivoting; `None` when singular.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |s, v| s.max(v.abs()))
        .max(1.0);
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            let (top, bottom) = a.split_at_mut(r);
            for (x, y) in bottom[0][c..].iter_mut().zip(&top[c][c..]) {
                *x -= f * y;
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Exact simplex minimum of `lambda' K lambda / 2` by enumerating supports:
/// on each support the minimizer over the affine hull solves a KKT system,
/// and the feasible candidates include the global minimizer.
pub fn exact_min(k: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let m = k.len();
    let mut best = (f64::INFINITY, vec![0.0; m]);
    for mask in 1u32..(1 << m) {
        let s: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) != 0).collect();
        let p = s.len();
        let mut a = vec![vec![0.0; p + 1]; p + 1];
        for (r, &i) in s.iter().enumerate() {
            for (c, &j) in s.iter().enumerate() {
                a[r][c] = k[i][j];
            }
            a[r][p] = 1.0;
            a[p][r] = 1.0;
        }
        let mut rhs = vec![0.0; p + 1];
        rhs[p] = 1.0;
        let Some(sol) = solve_linear(a, rhs) else {
            continue;
        };
        if sol[..p].iter().any(|&v| v < -1e-12) {
            continue;
        }
        let mut l = vec![0.0; m];
        for (r, &i) in s.iter().enumerate() {
            l[i] = sol[r].max(0.0);
        }
        let sum: f64 = l.iter().sum();
        l.iter_mut().for_each(|v| *v /= sum);
        let val = quad(k, &l);
        if val < best.0 {
            best = (val, l);
        }
    }
    best
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
