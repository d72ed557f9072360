//! Kicked evolution of parity states and single-qubit entanglement.

use rayon::prelude::*;

use crate::coupling::CouplingSpec;
use crate::error::{Error, Result};
use crate::floquet::{diagonal_blocks, Block, FloquetBlocks, Sector};
use crate::symmetric::{coherent_dicke, from_parity, to_parity, CoherentParams, ParityState, C64};

/// `U^n |ψ>` in the parity basis.
///
/// Diagonal blocks multiply by the exact powered phases; dense blocks are
/// applied `n` times.
pub fn evolve_parity(state: &ParityState, blocks: &FloquetBlocks, n_kicks: u64) -> Result<ParityState> {
    if state.n_qubits != blocks.n_qubits {
        return Err(Error::DimensionMismatch {
            expected: blocks.n_qubits,
            found: state.n_qubits,
        });
    }
    let apply = |amps: &[C64], block: &Block| -> Result<Vec<C64>> {
        if amps.len() != block.dim() {
            return Err(Error::DimensionMismatch {
                expected: block.dim(),
                found: amps.len(),
            });
        }
        Ok(match block {
            Block::Diagonal(p) => {
                let powered = p.powered(n_kicks);
                amps.iter()
                    .enumerate()
                    .map(|(i, a)| a * powered.unit(i))
                    .collect()
            }
            Block::Dense(m) => {
                let mut v = nalgebra::DVector::from_column_slice(amps);
                for _ in 0..n_kicks {
                    v = m * v;
                }
                v.iter().copied().collect()
            }
        })
    };
    Ok(ParityState {
        n_qubits: state.n_qubits,
        plus: apply(&state.plus, blocks.block(Sector::Plus))?,
        minus: apply(&state.minus, blocks.block(Sector::Minus))?,
    })
}

/// Reduced state of one qubit: `[[p, c], [c*, 1-p]]`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SingleQubitRdm {
    /// `<0|ρ|0>`.
    pub population: f64,
    /// `<0|ρ|1>`.
    pub coherence: C64,
}

impl SingleQubitRdm {
    pub fn determinant(&self) -> f64 {
        self.population * (1.0 - self.population) - self.coherence.norm_sqr()
    }

    /// Eigenvalues `(λ_max, λ_min)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let det = self.determinant();
        let disc = (1.0 - 4.0 * det).max(0.0).sqrt();
        let hi = 0.5 * (1.0 + disc);
        // det / hi avoids cancellation for nearly pure states.
        (hi, (det / hi).max(0.0))
    }

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        [
            [C64::new(self.population, 0.0), self.coherence],
            [self.coherence.conj(), C64::new(1.0 - self.population, 0.0)],
        ]
    }
}

/// Partial trace onto one qubit. All qubits are equivalent in the symmetric
/// sector.
///
/// Population `Σ |c_q|^2 (N-q)/N`; coherence
/// `Σ c_q c*_(q+1) sqrt((N-q)(q+1))/N`.
pub fn single_qubit_rdm(state: &ParityState) -> Result<SingleQubitRdm> {
    let s = from_parity(state)?;
    Ok(dicke_rdm(s.coeffs()))
}

pub(crate) fn dicke_rdm(c: &[C64]) -> SingleQubitRdm {
    let n = c.len() - 1;
    let nf = n as f64;
    let mut population = 0.0;
    let mut coherence = C64::new(0.0, 0.0);
    for q in 0..=n {
        population += c[q].norm_sqr() * (n - q) as f64;
        if q < n {
            coherence += c[q] * c[q + 1].conj() * (((n - q) * (q + 1)) as f64).sqrt();
        }
    }
    SingleQubitRdm {
        population: population / nf,
        coherence: coherence / nf,
    }
}

/// `[r(2 - r) - |w|^2]/2` with `r = 2p`, `w = 2c`; equal to `1 - Tr ρ^2`,
/// at most 1/2.
pub fn linear_entropy(rdm: &SingleQubitRdm) -> f64 {
    let r = 2.0 * rdm.population;
    let w2 = 4.0 * rdm.coherence.norm_sqr();
    (0.5 * (r * (2.0 - r) - w2)).clamp(0.0, 0.5)
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rdm: &SingleQubitRdm) -> f64 {
    let (a, b) = rdm.eigenvalues();
    let h = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    (h(a) + h(b)).clamp(0.0, std::f64::consts::LN_2)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropySeries {
    pub kicks: Vec<u64>,
    pub linear: Vec<f64>,
    pub von_neumann: Vec<f64>,
    pub params: CoherentParams,
    pub n_qubits: usize,
    pub coupling: CouplingSpec,
    pub tau_m: i64,
}

/// Entropies after `0..=n_max` kicks. Each sample is formed directly from
/// the powered phases, so samples are independent and computed in parallel.
pub fn entropy_series(
    params: CoherentParams,
    n: usize,
    j: &CouplingSpec,
    m: i64,
    n_max: u64,
) -> Result<EntropySeries> {
    if n_max < 1 {
        return Err(Error::arg("series needs at least one kick"));
    }
    let blocks = diagonal_blocks(n, j, m)?;
    let initial = to_parity(&coherent_dicke(params, n)?);
    let samples: Vec<(f64, f64)> = (0..=n_max)
        .into_par_iter()
        .map(|k| {
            let psi = evolve_parity(&initial, &blocks, k)?;
            let rdm = single_qubit_rdm(&psi)?;
            Ok((linear_entropy(&rdm), von_neumann_entropy(&rdm)))
        })
        .collect::<Result<_>>()?;
    let (linear, von_neumann) = samples.into_iter().unzip();
    Ok(EntropySeries {
        kicks: (0..=n_max).collect(),
        linear,
        von_neumann,
        params,
        n_qubits: n,
        coupling: j.clone(),
        tau_m: m,
    })
}

/// Smallest `p >= 1` with `max |S(n+p) - S(n)| <= tol` over the window,
/// requiring at least one full repeat (`len - p >= p`).
pub fn detect_period(series: &[f64], tol: f64) -> Option<usize> {
    let len = series.len();
    if len < 3 {
        return None;
    }
    (1..=len / 2).find(|&p| (0..len - p).all(|i| (series[i + p] - series[i]).abs() <= tol))
}
