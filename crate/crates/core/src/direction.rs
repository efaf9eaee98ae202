//! Memory gradient search directions.
//!
//! `d_k = gamma_k v(x_k) + sum_{j=1}^{N_k} beta_kj d_{k-j}` with
//! `beta_kj = -psi(x_k, v(x_k)) phi_kj+ / N_k` and `phi_kj` chosen strictly
//! above `(psi(x_k, d_{k-j}) + ||JF(x_k)|| ||d_{k-j}||) / gamma_k`.
//! With `phi_margin >= 2` the result satisfies
//! `psi(x_k, d_k) <= (gamma_k / 2) psi(x_k, v(x_k))`.

use std::collections::VecDeque;

use crate::criticality::{jacobian_norm, pseudo_reciprocal, psi};
use crate::error::{Error, Result};
use crate::linalg::{axpy, norm, scaled, Jacobian};
use crate::scalar::Scalar;

/// Previous directions, newest first, at most `capacity` of them.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionMemory<T> {
    capacity: usize,
    buf: VecDeque<Vec<T>>,
}

impl<T: Scalar> DirectionMemory<T> {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            buf: VecDeque::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    /// `d_{k-1}, d_{k-2}, ...`
    pub fn iter(&self) -> impl Iterator<Item = &[T]> {
        self.buf.iter().map(Vec::as_slice)
    }

    /// Inserts `d` as the newest entry, evicting the oldest beyond capacity.
    pub fn push(&mut self, d: Vec<T>) {
        if self.capacity == 0 {
            return;
        }
        self.buf.push_front(d);
        self.buf.truncate(self.capacity);
    }

    pub fn clear(&mut self) {
        self.buf.clear();
    }
}

/// Value form of [`DirectionMemory::push`].
pub fn push_direction<T: Scalar>(mut memory: DirectionMemory<T>, d: Vec<T>) -> DirectionMemory<T> {
    memory.push(d);
    memory
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BetaMode {
    #[default]
    Standard,
    /// All memory weights are zero; reduces to `d_k = gamma_k v(x_k)`.
    Zero,
    /// Negated weights. Only used to check that audits catch a broken build.
    Flipped,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionParams<T> {
    pub gamma: T,
    /// `mu > 1`
    pub phi_margin: T,
    /// `eps_phi > 0`
    pub phi_floor: T,
    pub beta_mode: BetaMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryTerm<T> {
    pub beta: T,
    pub phi: T,
    /// `psi(x_k, d_{k-j})`
    pub psi_prev: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionReport<T> {
    pub d: Vec<T>,
    pub gamma: T,
    /// One entry per memory slot, `j = 1..N_k`.
    pub terms: Vec<MemoryTerm<T>>,
    pub psi_v: T,
    pub psi_d: T,
}

/// `phi_kj = max(mu (psi_prev + ||J|| ||d_prev||) / gamma, floor)`.
///
/// The bracket is nonnegative since `|psi(x, d)| <= ||J|| ||d||`.
pub fn phi_kj<T: Scalar>(psi_prev: T, jac_norm: T, d_prev_norm: T, gamma: T, mu: T, floor: T) -> T {
    let base = (psi_prev + jac_norm * d_prev_norm).max(T::zero());
    (mu * base / gamma).max(floor)
}

/// `beta_kj = -psi_v phi+ / N_k`.
pub fn beta_kj<T: Scalar>(psi_v: T, phi: T, n_k: usize) -> T {
    debug_assert!(n_k >= 1);
    let b = -psi_v * pseudo_reciprocal(phi) / T::from_usize(n_k).unwrap();
    // keep -0.0 out of the traces
    if b == T::zero() {
        T::zero()
    } else {
        b
    }
}

/// Builds `d_k` from `v(x_k)`, the Jacobian at `x_k`, and the stored directions.
pub fn compute_direction<T: Scalar>(
    v: &[T],
    jac: &Jacobian<T>,
    memory: &DirectionMemory<T>,
    params: &DirectionParams<T>,
) -> Result<DirectionReport<T>> {
    let psi_v = psi(jac, v)?;
    let gamma = params.gamma;
    let mut d = scaled(gamma, v);
    let n_k = memory.len();
    let mut terms = Vec::with_capacity(n_k);
    if n_k > 0 {
        let jn = jacobian_norm(jac);
        for prev in memory.iter() {
            let psi_prev = psi(jac, prev)?;
            let phi = phi_kj(
                psi_prev,
                jn,
                norm(prev),
                gamma,
                params.phi_margin,
                params.phi_floor,
            );
            let beta = match params.beta_mode {
                BetaMode::Standard => beta_kj(psi_v, phi, n_k),
                BetaMode::Zero => T::zero(),
                BetaMode::Flipped => -beta_kj(psi_v, phi, n_k),
            };
            terms.push(MemoryTerm {
                beta,
                phi,
                psi_prev,
            });
        }
        for (term, prev) in terms.iter().zip(memory.iter()) {
            if term.beta != T::zero() {
                axpy(term.beta, prev, &mut d);
            }
        }
    }
    let psi_d = psi(jac, &d)?;
    if !(psi_d < T::zero()) {
        return Err(Error::NonDescent {
            psi_d: psi_d.to_f64_lossy(),
        });
    }
    Ok(DirectionReport {
        d,
        gamma,
        terms,
        psi_v,
        psi_d,
    })
}
