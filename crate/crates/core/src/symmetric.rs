//! States of the permutation-symmetric sector.
//!
//! `SymmetricState` stores amplitudes over Dicke states `|w_q>` (q qubits in
//! `|1>`). `ParityState` is the same vector in the basis
//! `phi_q^± = (|w_q> ± i^(N-2q) |w_(N-q)>)/sqrt(2)` of `⊗σ^y` eigenvectors.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};

pub type C64 = Complex64;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// `i^k` for any integer `k`.
#[inline]
pub fn i_pow(k: i64) -> C64 {
    match k.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// `ln C(n, k)`.
///
/// Short products are summed term by term; otherwise log-gamma differences
/// are used, which are well conditioned once both `k` and `n-k` are large.
pub fn log_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::arg(format!("binomial C({n}, {k}) out of range")));
    }
    Ok(log_binomial_unchecked(n, k))
}

const DIRECT_SUM_LIMIT: u64 = 1000;
/// Schmidt-matrix entries below this are dropped; their squares are far
/// below double precision and near-underflow entries upset the eigensolver.
const SCHMIDT_FLOOR: f64 = 1e-60;

pub(crate) fn log_binomial_unchecked(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    if k <= DIRECT_SUM_LIMIT {
        let mut acc = 0.0;
        for i in 1..=k {
            acc += ((n - k + i) as f64 / i as f64).ln();
        }
        acc
    } else {
        statrs::function::factorial::ln_binomial(n, k)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricState {
    n_qubits: usize,
    coeffs: Vec<C64>,
}

impl SymmetricState {
    /// Wraps amplitudes that are already normalized to within `1e-10`.
    pub fn new(n_qubits: usize, coeffs: Vec<C64>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::arg("qubit count must be at least 1"));
        }
        if coeffs.len() != n_qubits + 1 {
            return Err(Error::DimensionMismatch {
                expected: n_qubits + 1,
                found: coeffs.len(),
            });
        }
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Numeric(format!("state norm {norm} is not 1")));
        }
        Ok(Self { n_qubits, coeffs })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(n_qubits: usize, mut coeffs: Vec<C64>) -> Result<Self> {
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Numeric("cannot normalize a zero vector".into()));
        }
        for c in &mut coeffs {
            *c /= norm;
        }
        Self::new(n_qubits, coeffs)
    }

    pub fn dicke(n_qubits: usize, q: usize) -> Result<Self> {
        if q > n_qubits {
            return Err(Error::arg(format!("excitation {q} exceeds {n_qubits}")));
        }
        let mut coeffs = vec![C64::new(0.0, 0.0); n_qubits + 1];
        coeffs[q] = C64::new(1.0, 0.0);
        Self::new(n_qubits, coeffs)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `|<self|other>|`.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParityState {
    pub n_qubits: usize,
    pub plus: Vec<C64>,
    pub minus: Vec<C64>,
}

impl ParityState {
    pub fn norm_sqr(&self) -> f64 {
        self.plus
            .iter()
            .chain(&self.minus)
            .map(|c| c.norm_sqr())
            .sum()
    }
}

/// Block lengths `(plus, minus)` of the parity decomposition.
pub fn parity_block_lengths(n_qubits: usize) -> (usize, usize) {
    (n_qubits / 2 + 1, n_qubits.div_ceil(2))
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CoherentParams {
    pub theta0: f64,
    pub phi0: f64,
}

impl CoherentParams {
    /// Clamps `theta0` into `[0, π]` and wraps `phi0` into `(-π, π]`.
    pub fn new(theta0: f64, phi0: f64) -> Result<Self> {
        if !theta0.is_finite() || !phi0.is_finite() {
            return Err(Error::arg("coherent-state angles must be finite"));
        }
        let pi = std::f64::consts::PI;
        let theta0 = theta0.clamp(0.0, pi);
        let mut phi0 = phi0.rem_euclid(2.0 * pi);
        if phi0 > pi {
            phi0 -= 2.0 * pi;
        }
        Ok(Self { theta0, phi0 })
    }
}

/// Dicke amplitudes of `⊗^N (cos(θ/2)|0> + e^{-iφ} sin(θ/2)|1>)`.
pub fn coherent_dicke(params: CoherentParams, n: usize) -> Result<SymmetricState> {
    if n == 0 {
        return Err(Error::arg("qubit count must be at least 1"));
    }
    let pi = std::f64::consts::PI;
    let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
    let phase = |q: usize| -> C64 {
        // q·φ reduced exactly enough for large q.
        let arg = DoubleDouble::from_f64(params.phi0)
            .mul_f64(q as f64)
            .rem_euclid(DoubleDouble::TWO_PI)
            .to_f64();
        C64::from_polar(1.0, -arg)
    };
    if params.theta0 == 0.0 {
        coeffs[0] = C64::new(1.0, 0.0);
        return SymmetricState::new(n, coeffs);
    }
    if params.theta0 == pi {
        coeffs[n] = phase(n);
        return SymmetricState::new(n, coeffs);
    }
    let ln_cos = (params.theta0 / 2.0).cos().ln();
    let ln_sin = (params.theta0 / 2.0).sin().ln();
    for (q, c) in coeffs.iter_mut().enumerate() {
        let ln_mag = 0.5 * log_binomial_unchecked(n as u64, q as u64)
            + (n - q) as f64 * ln_cos
            + q as f64 * ln_sin;
        *c = phase(q) * ln_mag.exp();
    }
    SymmetricState::normalized(n, coeffs)
}

/// Dicke index pairs `(q, N-q)` with the phase `i^(N-2q)` linking them.
fn pair_phase(n: usize, q: usize) -> C64 {
    i_pow(n as i64 - 2 * q as i64)
}

pub fn to_parity(state: &SymmetricState) -> ParityState {
    let n = state.n_qubits;
    let c = &state.coeffs;
    let (np, nm) = parity_block_lengths(n);
    let mut plus = Vec::with_capacity(np);
    let mut minus = Vec::with_capacity(nm);
    for q in 0..nm {
        let ph = pair_phase(n, q).conj();
        plus.push((c[q] + ph * c[n - q]) * FRAC_1_SQRT_2);
        minus.push((c[q] - ph * c[n - q]) * FRAC_1_SQRT_2);
    }
    if n % 2 == 0 {
        plus.push(c[n / 2]);
    }
    ParityState {
        n_qubits: n,
        plus,
        minus,
    }
}

pub fn from_parity(state: &ParityState) -> Result<SymmetricState> {
    let n = state.n_qubits;
    let (np, nm) = parity_block_lengths(n);
    if state.plus.len() != np {
        return Err(Error::DimensionMismatch {
            expected: np,
            found: state.plus.len(),
        });
    }
    if state.minus.len() != nm {
        return Err(Error::DimensionMismatch {
            expected: nm,
            found: state.minus.len(),
        });
    }
    let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
    for q in 0..nm {
        let (p, m) = (state.plus[q], state.minus[q]);
        coeffs[q] = (p + m) * FRAC_1_SQRT_2;
        coeffs[n - q] = pair_phase(n, q) * (p - m) * FRAC_1_SQRT_2;
    }
    if n % 2 == 0 {
        coeffs[n / 2] = state.plus[n / 2];
    }
    SymmetricState::new(n, coeffs)
}

/// Squared Schmidt coefficients, sorted in decreasing order.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtSpectrum {
    pub values: Vec<f64>,
}

impl SchmidtSpectrum {
    /// Entropy in bits.
    pub fn entropy_bits(&self) -> f64 {
        self.values
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|&l| -l * l.log2())
            .sum()
    }
}

/// Weight of `|w_k^(A)> ⊗ |w_(q-k)^(B)>` in `|w_q^(N)>`.
fn split_weight(n: usize, n_a: usize, q: usize, k: usize) -> f64 {
    let n_b = n - n_a;
    (0.5 * (log_binomial_unchecked(n_a as u64, k as u64)
        + log_binomial_unchecked(n_b as u64, (q - k) as u64)
        - log_binomial_unchecked(n as u64, q as u64)))
    .exp()
}

pub fn bipartite_schmidt(state: &SymmetricState, n_a: usize) -> Result<SchmidtSpectrum> {
    bipartite_schmidt_truncated(state, n_a, 0.0)
}

/// As [`bipartite_schmidt`], after dropping the smallest Dicke amplitudes whose
/// total probability does not exceed `tail` and renormalizing.
///
/// The coefficient matrix `M[k][l] = c_(k+l) w(k+l, k)` is split into the
/// connected components of its nonzero pattern, each diagonalized separately.
/// Entries smaller than `1e-60` are treated as zero.
pub fn bipartite_schmidt_truncated(
    state: &SymmetricState,
    n_a: usize,
    tail: f64,
) -> Result<SchmidtSpectrum> {
    let n = state.n_qubits;
    if n_a == 0 || n_a >= n {
        return Err(Error::arg(format!(
            "subsystem size {n_a} must lie in 1..={}",
            n - 1
        )));
    }
    let n_b = n - n_a;
    let support = truncated_support(state.coeffs(), tail);

    // Rows k in 0..=n_a, columns l in 0..=n_b offset by n_a+1.
    let mut dsu = Dsu::new(n_a + n_b + 2);
    let mut entries = Vec::new();
    for &q in &support {
        let k_lo = q.saturating_sub(n_b);
        let k_hi = q.min(n_a);
        let cq = state.coeffs()[q].norm();
        for k in k_lo..=k_hi {
            if cq * split_weight(n, n_a, q, k) < SCHMIDT_FLOOR {
                continue;
            }
            let l = q - k;
            dsu.union(k, n_a + 1 + l);
            entries.push((k, l, q));
        }
    }
    let mut groups: HashMap<usize, (Vec<usize>, Vec<usize>)> = HashMap::new();
    for k in 0..=n_a {
        groups.entry(dsu.find(k)).or_default().0.push(k);
    }
    for l in 0..=n_b {
        groups.entry(dsu.find(n_a + 1 + l)).or_default().1.push(l);
    }
    let mut by_root: HashMap<usize, Vec<(usize, usize, usize)>> = HashMap::new();
    for e in entries {
        by_root.entry(dsu.find(e.0)).or_default().push(e);
    }
    let norm: f64 = support
        .iter()
        .map(|&q| state.coeffs()[q].norm_sqr())
        .sum::<f64>()
        .sqrt();

    let mut values = Vec::with_capacity(n_a + 1);
    for (root, ents) in by_root {
        let (rows, cols) = &groups[&root];
        let row_ix: HashMap<usize, usize> = rows.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let col_ix: HashMap<usize, usize> = cols.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let mut m = DMatrix::<C64>::zeros(rows.len(), cols.len());
        for (k, l, q) in ents {
            m[(row_ix[&k], col_ix[&l])] = state.coeffs()[q] / norm * split_weight(n, n_a, q, k);
        }
        let gram = if rows.len() <= cols.len() {
            &m * m.adjoint()
        } else {
            m.adjoint() * &m
        };
        if gram.nrows() == 1 {
            values.push(gram[(0, 0)].re);
        } else {
            values.extend(SymmetricEigen::new(gram).eigenvalues.iter().copied());
        }
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("Schmidt eigensolver returned a non-finite value".into()));
    }
    for v in &mut values {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    values.sort_by(|a, b| b.total_cmp(a));
    values.resize(n_a.min(n_b) + 1, 0.0);
    Ok(SchmidtSpectrum { values })
}

/// Indices kept after discarding the lightest amplitudes up to `tail` total
/// probability.
fn truncated_support(coeffs: &[C64], tail: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..coeffs.len())
        .filter(|&q| coeffs[q].norm_sqr() > 0.0)
        .collect();
    if tail > 0.0 {
        idx.sort_by(|&a, &b| coeffs[a].norm_sqr().total_cmp(&coeffs[b].norm_sqr()));
        let mut dropped = 0.0;
        let mut cut = 0;
        while cut + 1 < idx.len() && dropped + coeffs[idx[cut]].norm_sqr() <= tail {
            dropped += coeffs[idx[cut]].norm_sqr();
            cut += 1;
        }
        idx.drain(..cut);
        idx.sort_unstable();
    }
    idx
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}
