//! Brute-force reference on the full `2^N` Hilbert space, `N <= 12`.
//!
//! Qubit `l` is bit `l` of the basis index, bit value 1 meaning `|1>`. One
//! kick applies `exp(-iτσ^y) = [[cos τ, -sin τ], [sin τ, cos τ]]` to every
//! qubit, then the Ising phase `exp(-iJτ d)` with `d` fixed by the popcount.

use nalgebra::DMatrix;

use crate::coupling::CouplingSpec;
use crate::dynamics::SingleQubitRdm;
use crate::error::{Error, Result};
use crate::floquet::dq;
use crate::symmetric::{log_binomial_unchecked, CoherentParams, SymmetricState, C64};

pub const MAX_QUBITS: usize = 12;
/// Largest `N` for which dense `2^N x 2^N` matrices are formed.
pub const MAX_DENSE_QUBITS: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct FullState {
    pub n_qubits: usize,
    pub amps: Vec<C64>,
}

fn guard(n: usize, cap: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::arg("qubit count must be at least 1"));
    }
    if n > cap {
        return Err(Error::Resource(format!("full-space reference limited to N <= {cap}")));
    }
    Ok(())
}

/// One-kick Floquet operator applied without forming a matrix.
#[derive(Clone, Debug)]
pub struct FullFloquet {
    pub n_qubits: usize,
    cos: f64,
    sin: f64,
    ising: Vec<C64>,
}

impl FullFloquet {
    pub fn apply(&self, amps: &mut [C64]) {
        let dim = amps.len();
        for l in 0..self.n_qubits {
            let bit = 1usize << l;
            for b in 0..dim {
                if b & bit == 0 {
                    let (a0, a1) = (amps[b], amps[b | bit]);
                    amps[b] = a0 * self.cos - a1 * self.sin;
                    amps[b | bit] = a0 * self.sin + a1 * self.cos;
                }
            }
        }
        for (b, a) in amps.iter_mut().enumerate() {
            *a *= self.ising[b.count_ones() as usize];
        }
    }

    /// Dense `2^N x 2^N` matrix, `N <= MAX_DENSE_QUBITS`.
    pub fn materialize(&self) -> Result<DMatrix<C64>> {
        guard(self.n_qubits, MAX_DENSE_QUBITS)?;
        let dim = 1usize << self.n_qubits;
        let mut u = DMatrix::<C64>::zeros(dim, dim);
        let mut col = vec![C64::new(0.0, 0.0); dim];
        for b in 0..dim {
            col.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
            col[b] = C64::new(1.0, 0.0);
            self.apply(&mut col);
            u.column_mut(b).copy_from_slice(&col);
        }
        Ok(u)
    }
}

pub fn full_floquet(n: usize, j: &CouplingSpec, tau: f64) -> Result<FullFloquet> {
    guard(n, MAX_QUBITS)?;
    let jt = j.value() * tau;
    let ising = (0..=n)
        .map(|q| C64::from_polar(1.0, -jt * dq(n, q) as f64))
        .collect();
    Ok(FullFloquet {
        n_qubits: n,
        cos: tau.cos(),
        sin: tau.sin(),
        ising,
    })
}

pub fn product_state(params: CoherentParams, n: usize) -> Result<FullState> {
    guard(n, MAX_QUBITS)?;
    let (s, c) = (params.theta0 / 2.0).sin_cos();
    let one = C64::from_polar(s, -params.phi0);
    let zero = C64::new(c, 0.0);
    let amps = (0..1usize << n)
        .map(|b| {
            let ones = b.count_ones() as i32;
            zero.powi(n as i32 - ones) * one.powi(ones)
        })
        .collect();
    Ok(FullState { n_qubits: n, amps })
}

pub fn full_state_evolve(
    params: CoherentParams,
    n: usize,
    j: &CouplingSpec,
    tau: f64,
    n_kicks: u64,
) -> Result<FullState> {
    let mut state = product_state(params, n)?;
    let u = full_floquet(n, j, tau)?;
    for _ in 0..n_kicks {
        u.apply(&mut state.amps);
    }
    Ok(state)
}

/// Reduced state of qubit 0.
pub fn full_rdm_qubit(state: &FullState) -> SingleQubitRdm {
    let mut population = 0.0;
    let mut coherence = C64::new(0.0, 0.0);
    for b in (0..state.amps.len()).step_by(2) {
        let (a0, a1) = (state.amps[b], state.amps[b | 1]);
        population += a0.norm_sqr();
        coherence += a0 * a1.conj();
    }
    SingleQubitRdm {
        population,
        coherence,
    }
}

/// Reduced density matrix of qubits `0..n_a`.
pub fn full_rdm_block(state: &FullState, n_a: usize) -> Result<DMatrix<C64>> {
    if n_a == 0 || n_a >= state.n_qubits {
        return Err(Error::arg("block size must lie strictly between 0 and N"));
    }
    let da = 1usize << n_a;
    let db = 1usize << (state.n_qubits - n_a);
    let psi = DMatrix::from_fn(da, db, |a, b| state.amps[a + b * da]);
    Ok(&psi * psi.adjoint())
}

/// Embeds Dicke amplitudes into the full space.
pub fn embed_symmetric(state: &SymmetricState) -> Result<FullState> {
    let n = state.n_qubits();
    guard(n, MAX_QUBITS)?;
    let amps = (0..1usize << n)
        .map(|b| {
            let q = b.count_ones() as usize;
            state.coeffs()[q] * (-0.5 * log_binomial_unchecked(n as u64, q as u64)).exp()
        })
        .collect();
    Ok(FullState { n_qubits: n, amps })
}

/// Overlaps with each normalized Dicke state. The result is normalized only
/// when the input lies in the symmetric sector.
pub fn project_symmetric(state: &FullState) -> Vec<C64> {
    let n = state.n_qubits;
    let mut c = vec![C64::new(0.0, 0.0); n + 1];
    for (b, a) in state.amps.iter().enumerate() {
        c[b.count_ones() as usize] += a;
    }
    for (q, x) in c.iter_mut().enumerate() {
        *x *= (-0.5 * log_binomial_unchecked(n as u64, q as u64)).exp();
    }
    c
}

/// The Floquet operator restricted to the Dicke basis, `(N+1) x (N+1)`.
pub fn symmetric_sector_matrix(n: usize, j: &CouplingSpec, tau: f64) -> Result<DMatrix<C64>> {
    let u = full_floquet(n, j, tau)?;
    let mut out = DMatrix::<C64>::zeros(n + 1, n + 1);
    for q in 0..=n {
        let mut s = embed_symmetric(&SymmetricState::dicke(n, q)?)?;
        u.apply(&mut s.amps);
        out.column_mut(q).copy_from_slice(&project_symmetric(&s));
    }
    Ok(out)
}

/// `P|b>` for `P = ⊗σ^y`: flips every bit with phase `i^(#0) (-i)^(#1)`.
fn parity_apply(n: usize, amps: &[C64]) -> Vec<C64> {
    let mask = (1usize << n) - 1;
    let mut out = vec![C64::new(0.0, 0.0); amps.len()];
    for (b, a) in amps.iter().enumerate() {
        let ones = b.count_ones() as i64;
        let zeros = n as i64 - ones;
        out[b ^ mask] = a * crate::symmetric::i_pow(zeros - ones);
    }
    out
}

/// `max |[U, P]|` over matrix entries, computed column by column.
pub fn parity_commutation_check(n: usize, j: &CouplingSpec, tau: f64) -> Result<f64> {
    guard(n, MAX_DENSE_QUBITS)?;
    let u = full_floquet(n, j, tau)?;
    let dim = 1usize << n;
    let mut worst = 0.0f64;
    for b in 0..dim {
        let mut e = vec![C64::new(0.0, 0.0); dim];
        e[b] = C64::new(1.0, 0.0);
        let mut up = parity_apply(n, &e);
        u.apply(&mut up);
        let mut ue = e;
        u.apply(&mut ue);
        let pu = parity_apply(n, &ue);
        for (x, y) in up.iter().zip(&pu) {
            worst = worst.max((x - y).norm());
        }
    }
    Ok(worst)
}
