//! Floquet operator in the parity-block representation.
//!
//! At `τ = mπ/2` the kick maps `|w_q>` to `(-1)^q |w_(N-q)>` and both parity
//! blocks are diagonal. Their entries are
//!
//! ```text
//! plus:  (-i)^(mN)   exp(-i m J π d_q / 2)
//! minus: -(-i)^(mN)  exp(-i m J π d_q / 2)
//! ```
//!
//! with `d_q = ((N - 2q)^2 - N)/2`. Phases are held in quarter turns (units of
//! `π/2`) reduced modulo 4, exactly for rational `J` and in double-double
//! otherwise, so powers are formed by scaling the reduced phase instead of
//! repeated floating multiplication.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::coupling::CouplingSpec;
use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::symmetric::{i_pow, parity_block_lengths, C64};
use crate::wigner::small_d_columns;

/// Default cap on `N` for dense blocks.
pub const DEFAULT_DENSE_LIMIT: usize = 20_000;

/// Largest numerator or denominator accepted for exact lattice phases.
const MAX_EXACT_TERM: i64 = 1_000_000_000_000;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Sector {
    Plus,
    Minus,
}

impl Sector {
    pub const ALL: [Sector; 2] = [Sector::Plus, Sector::Minus];

    pub fn block_len(self, n: usize) -> usize {
        let (p, m) = parity_block_lengths(n);
        match self {
            Sector::Plus => p,
            Sector::Minus => m,
        }
    }

    /// Prefactor phase in quarter turns for one kick at `τ = π/2`.
    fn quarter_offset(self, n: usize) -> i128 {
        match self {
            Sector::Plus => -(n as i128),
            Sector::Minus => 2 - n as i128,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sector::Plus => "plus",
            Sector::Minus => "minus",
        }
    }
}

#[inline]
pub fn dq(n: usize, q: usize) -> i128 {
    let a = n as i128 - 2 * q as i128;
    (a * a - n as i128) / 2
}

#[derive(Clone, Debug, PartialEq)]
pub struct DqTable {
    pub n_qubits: usize,
    pub sector: Sector,
    pub values: Vec<i128>,
}

pub fn dq_table(n: usize, sector: Sector) -> DqTable {
    let values = (0..sector.block_len(n))
        .map(|q| {
            let a = n as i128 - 2 * q as i128;
            debug_assert_eq!((a * a - n as i128) % 2, 0);
            dq(n, q)
        })
        .collect();
    DqTable {
        n_qubits: n,
        sector,
        values,
    }
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// GCD of `|d_q|` over both blocks, skipping zeros unless every entry is zero.
pub fn gcd_dq(n: usize) -> Result<u64> {
    if n < 2 {
        return Err(Error::arg("gcd of d_q needs at least 2 qubits"));
    }
    // The minus block indexes a subset of the plus block's q range.
    let g = (0..Sector::Plus.block_len(n))
        .map(|q| dq(n, q))
        .filter(|&d| d != 0)
        .fold(0, gcd_i128);
    Ok(g as u64)
}

/// Floquet interval: a multiple of `π/2`, or arbitrary radians.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Tau {
    QuarterTurns(i64),
    Radians(f64),
}

impl Tau {
    pub fn radians(self) -> f64 {
        match self {
            Tau::QuarterTurns(m) => m as f64 * std::f64::consts::FRAC_PI_2,
            Tau::Radians(t) => t,
        }
    }
}

/// Diagonal phases, in quarter turns reduced into `[0, 4)`.
#[derive(Clone, Debug, PartialEq)]
pub enum PhaseTable {
    /// Entry `q` is `nums[q] / den` quarter turns, `0 <= nums[q] < 4 den`.
    Lattice { den: i128, nums: Vec<i128> },
    /// Entry `q` is `turns[q]` quarter turns.
    Extended {
        turns: Vec<DoubleDouble>,
        precision: f64,
    },
}

impl PhaseTable {
    pub fn len(&self) -> usize {
        match self {
            PhaseTable::Lattice { nums, .. } => nums.len(),
            PhaseTable::Extended { turns, .. } => turns.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whole quarter turns and the remaining fraction in `[0, 1)`.
    fn split(&self, i: usize) -> (i64, f64) {
        match self {
            PhaseTable::Lattice { den, nums } => {
                ((nums[i] / den) as i64, (nums[i] % den) as f64 / *den as f64)
            }
            PhaseTable::Extended { turns, .. } => {
                let whole = turns[i].floor();
                (whole.to_f64() as i64, (turns[i] - whole).to_f64())
            }
        }
    }

    /// Phase in radians, in `[0, 2π)`.
    pub fn radians(&self, i: usize) -> f64 {
        let (whole, frac) = self.split(i);
        let r = (whole as f64 + frac) * std::f64::consts::FRAC_PI_2;
        if r >= std::f64::consts::TAU {
            0.0
        } else {
            r
        }
    }

    pub fn all_radians(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.radians(i)).collect()
    }

    /// `exp(i·phase)`; exact at multiples of a quarter turn.
    pub fn unit(&self, i: usize) -> C64 {
        let (whole, frac) = self.split(i);
        let base = i_pow(whole);
        if frac == 0.0 {
            base
        } else {
            base * C64::from_polar(1.0, frac * std::f64::consts::FRAC_PI_2)
        }
    }

    /// Phases of the `n`-th power.
    pub fn powered(&self, n: u64) -> PhaseTable {
        match self {
            PhaseTable::Lattice { den, nums } => {
                let modulus = 4 * den;
                let k = n as i128 % modulus;
                PhaseTable::Lattice {
                    den: *den,
                    nums: nums.iter().map(|&a| (a * k) % modulus).collect(),
                }
            }
            PhaseTable::Extended { turns, precision } => {
                let four = DoubleDouble::from_f64(4.0);
                PhaseTable::Extended {
                    turns: turns
                        .par_iter()
                        .map(|t| t.mul_f64(n as f64).rem_euclid(four))
                        .collect(),
                    precision: precision * n.max(1) as f64,
                }
            }
        }
    }

    /// Upper bound on the absolute error of [`PhaseTable::radians`].
    pub fn precision_bound(&self) -> f64 {
        let rounding = 4.0 * f64::EPSILON * std::f64::consts::TAU;
        match self {
            PhaseTable::Lattice { .. } => rounding,
            PhaseTable::Extended { precision, .. } => precision + rounding,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Block {
    Diagonal(PhaseTable),
    Dense(DMatrix<C64>),
}

impl Block {
    pub fn dim(&self) -> usize {
        match self {
            Block::Diagonal(p) => p.len(),
            Block::Dense(m) => m.nrows(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match self {
            Block::Diagonal(p) => {
                DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    p.len(),
                    (0..p.len()).map(|i| p.unit(i)),
                ))
            }
            Block::Dense(m) => m.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FloquetBlocks {
    pub n_qubits: usize,
    pub tau: Tau,
    pub plus: Block,
    pub minus: Block,
}

impl FloquetBlocks {
    pub fn block(&self, sector: Sector) -> &Block {
        match sector {
            Sector::Plus => &self.plus,
            Sector::Minus => &self.minus,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!((&self.plus, &self.minus), (Block::Diagonal(_), Block::Diagonal(_)))
    }
}

pub(crate) fn phase_table(n: usize, j: &CouplingSpec, m: i64, sector: Sector) -> Result<PhaseTable> {
    let len = sector.block_len(n);
    let offset = sector.quarter_offset(n) * m as i128;
    match *j {
        CouplingSpec::Rational { r, h } => {
            if r.abs() > MAX_EXACT_TERM || h > MAX_EXACT_TERM {
                return Err(Error::arg(format!(
                    "rational coupling {r}/{h} exceeds the exact-phase range"
                )));
            }
            let (r, h) = (r as i128, h as i128);
            let modulus = 4 * h;
            let mr = (m as i128 % modulus) * (r % modulus) % modulus;
            let base = offset % modulus * h % modulus;
            let nums = (0..len)
                .into_par_iter()
                .map(|q| (base - mr * (dq(n, q) % modulus)).rem_euclid(modulus))
                .collect();
            Ok(PhaseTable::Lattice { den: h, nums })
        }
        _ => {
            let jv = j.value_dd();
            let four = DoubleDouble::from_f64(4.0);
            let off = DoubleDouble::from_i128(offset);
            let turns: Vec<DoubleDouble> = (0..len)
                .into_par_iter()
                .map(|q| (off - jv * DoubleDouble::from_i128(m as i128 * dq(n, q))).rem_euclid(four))
                .collect();
            let max_d = (0..len).map(|q| dq(n, q).abs()).max().unwrap_or(0) as f64;
            // Relative error of the double-double product, scaled to radians.
            let precision =
                (jv.to_f64().abs() * max_d * m.unsigned_abs() as f64 * 2f64.powi(-100) + 2f64.powi(-100))
                    * std::f64::consts::FRAC_PI_2;
            Ok(PhaseTable::Extended { turns, precision })
        }
    }
}

/// Analytic diagonal blocks at `τ = mπ/2`.
pub fn diagonal_blocks(n: usize, j: &CouplingSpec, m: i64) -> Result<FloquetBlocks> {
    if n == 0 {
        return Err(Error::arg("qubit count must be at least 1"));
    }
    if m < 1 {
        return Err(Error::arg("tau multiple m must be at least 1"));
    }
    Ok(FloquetBlocks {
        n_qubits: n,
        tau: Tau::QuarterTurns(m),
        plus: Block::Diagonal(phase_table(n, j, m, Sector::Plus)?),
        minus: Block::Diagonal(phase_table(n, j, m, Sector::Minus)?),
    })
}

/// `U^n` for diagonal blocks.
pub fn evolved_diagonal(blocks: &FloquetBlocks, n_kicks: u64) -> Result<FloquetBlocks> {
    let power = |b: &Block| match b {
        Block::Diagonal(p) => Ok(Block::Diagonal(p.powered(n_kicks))),
        Block::Dense(_) => Err(Error::UnsupportedRepresentation(
            "evolved_diagonal requires diagonal blocks",
        )),
    };
    Ok(FloquetBlocks {
        n_qubits: blocks.n_qubits,
        tau: blocks.tau,
        plus: power(&blocks.plus)?,
        minus: power(&blocks.minus)?,
    })
}

/// Dicke components `(index, coefficient)` of the parity basis vector `a`.
pub(crate) fn parity_components(n: usize, sector: Sector, a: usize) -> ([(usize, C64); 2], usize) {
    let zero = (0, C64::new(0.0, 0.0));
    if sector == Sector::Plus && n % 2 == 0 && a == n / 2 {
        return ([(a, C64::new(1.0, 0.0)), zero], 1);
    }
    let ph = i_pow(n as i64 - 2 * a as i64) * FRAC_1_SQRT_2;
    let ph = if sector == Sector::Plus { ph } else { -ph };
    ([(a, C64::new(FRAC_1_SQRT_2, 0.0)), (n - a, ph)], 2)
}

/// Dense parity blocks at arbitrary `τ`, capped at `N <= DEFAULT_DENSE_LIMIT`.
pub fn general_tau_blocks(n: usize, j: &CouplingSpec, tau: f64) -> Result<FloquetBlocks> {
    general_tau_blocks_with_limit(n, j, tau, DEFAULT_DENSE_LIMIT)
}

pub fn general_tau_blocks_with_limit(
    n: usize,
    j: &CouplingSpec,
    tau: f64,
    max_n: usize,
) -> Result<FloquetBlocks> {
    if n == 0 {
        return Err(Error::arg("qubit count must be at least 1"));
    }
    if n > max_n {
        return Err(Error::Resource(format!(
            "dense blocks for N = {n} exceed the limit N <= {max_n}"
        )));
    }
    if !tau.is_finite() {
        return Err(Error::arg("tau must be finite"));
    }
    // Ising phase exp(-iJτ d_p), reduced in double-double.
    let jt = j.value_dd() * DoubleDouble::from_f64(tau);
    let ising: Vec<C64> = (0..=n)
        .map(|p| {
            let arg = (jt * DoubleDouble::from_i128(dq(n, p))).rem_euclid(DoubleDouble::TWO_PI);
            C64::from_polar(1.0, -arg.to_f64())
        })
        .collect();

    let lens = [Sector::Plus.block_len(n), Sector::Minus.block_len(n)];
    let mut blocks = [
        DMatrix::<C64>::zeros(lens[0], lens[0]),
        DMatrix::<C64>::zeros(lens[1], lens[1]),
    ];
    // Row components of every parity vector, conjugated and folded with the
    // Ising phase, so each streamed Dicke column updates a block column in O(N).
    let rows: Vec<Vec<[(usize, C64); 2]>> = Sector::ALL
        .iter()
        .zip(lens)
        .map(|(&s, len)| {
            (0..len)
                .map(|a| {
                    let (c, k) = parity_components(n, s, a);
                    let mut out = [(0, C64::new(0.0, 0.0)); 2];
                    for i in 0..k {
                        out[i] = (c[i].0, c[i].1.conj() * ising[c[i].0]);
                    }
                    out
                })
                .collect()
        })
        .collect();

    small_d_columns(n, 2.0 * tau, |y, col| {
        let b = y.min(n - y);
        for (si, &sector) in Sector::ALL.iter().enumerate() {
            if b >= lens[si] {
                continue;
            }
            let (comps, k) = parity_components(n, sector, b);
            let Some(cy) = comps[..k].iter().find(|c| c.0 == y).map(|c| c.1) else {
                continue;
            };
            let block = &mut blocks[si];
            for (a, r) in rows[si].iter().enumerate() {
                let v = r[0].1 * col[r[0].0] + r[1].1 * col[r[1].0];
                block[(a, b)] += v * cy;
            }
        }
    });
    let [plus, minus] = blocks;
    Ok(FloquetBlocks {
        n_qubits: n,
        tau: Tau::Radians(tau),
        plus: Block::Dense(plus),
        minus: Block::Dense(minus),
    })
}

fn dense_power(m: &DMatrix<C64>, mut n: u64) -> DMatrix<C64> {
    let mut result = DMatrix::<C64>::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Raises a block to `n_kicks` and scores it against the original with
/// `reference(original, powered)`.
fn block_distance(block: &Block, n_kicks: u64, reference: impl Fn(&Block, &Block) -> f64) -> f64 {
    let powered = match block {
        Block::Diagonal(p) => Block::Diagonal(p.powered(n_kicks)),
        Block::Dense(m) => Block::Dense(dense_power(m, n_kicks)),
    };
    reference(block, &powered)
}

fn sum_abs_diff(a: &Block, b: &Block) -> f64 {
    match (a, b) {
        (Block::Diagonal(x), Block::Diagonal(y)) => {
            (0..x.len()).map(|i| (x.unit(i) - y.unit(i)).norm()).sum()
        }
        _ => (a.to_dense() - b.to_dense()).iter().map(|z| z.norm()).sum(),
    }
}

fn sum_abs_minus_scaled_identity(b: &Block, scale: C64) -> f64 {
    match b {
        Block::Diagonal(p) => (0..p.len()).map(|i| (p.unit(i) - scale).norm()).sum(),
        Block::Dense(m) => m
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let (r, c) = (k % m.nrows(), k / m.nrows());
                if r == c {
                    (z - scale).norm()
                } else {
                    z.norm()
                }
            })
            .sum(),
    }
}

/// `δ(n) = Σ |U^n - U|` over both blocks.
pub fn deviation(blocks: &FloquetBlocks, n_kicks: u64) -> Result<f64> {
    if n_kicks < 1 {
        return Err(Error::arg("deviation needs n_kicks >= 1"));
    }
    Ok(Sector::ALL
        .iter()
        .map(|&s| block_distance(blocks.block(s), n_kicks, sum_abs_diff))
        .sum())
}

/// `Σ |U^n - I|` over both blocks.
pub fn identity_deviation(blocks: &FloquetBlocks, n_kicks: u64) -> f64 {
    Sector::ALL
        .iter()
        .map(|&s| {
            block_distance(blocks.block(s), n_kicks, |_, p| {
                sum_abs_minus_scaled_identity(p, C64::new(1.0, 0.0))
            })
        })
        .sum()
}

/// `Σ |U^n - e^{iα} I|` with the common phase `α` taken from the trace of
/// `U^n`, so it vanishes iff `U^n` is a multiple of the identity.
pub fn projective_deviation(blocks: &FloquetBlocks, n_kicks: u64) -> f64 {
    let powered: Vec<Block> = Sector::ALL
        .iter()
        .map(|&s| match blocks.block(s) {
            Block::Diagonal(p) => Block::Diagonal(p.powered(n_kicks)),
            Block::Dense(m) => Block::Dense(dense_power(m, n_kicks)),
        })
        .collect();
    let trace: C64 = powered
        .iter()
        .map(|b| match b {
            Block::Diagonal(p) => (0..p.len()).map(|i| p.unit(i)).sum(),
            Block::Dense(m) => m.trace(),
        })
        .sum();
    let scale = if trace.norm() > 0.0 {
        trace / trace.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    powered
        .iter()
        .map(|b| sum_abs_minus_scaled_identity(b, scale))
        .sum()
}

/// Smallest `n` in `1..=max_n` with deviation below `tol`.
pub fn smallest_period(blocks: &FloquetBlocks, max_n: u64, tol: f64, projective: bool) -> Option<u64> {
    (1..=max_n).find(|&n| {
        let d = if projective {
            projective_deviation(blocks, n)
        } else {
            identity_deviation(blocks, n)
        };
        d < tol
    })
}

fn check_reduced(r: i64, h: i64) -> Result<()> {
    if h < 1 {
        return Err(Error::arg("denominator must be at least 1"));
    }
    if r.abs() > MAX_EXACT_TERM || h > MAX_EXACT_TERM {
        return Err(Error::arg("fraction exceeds the exact-phase range"));
    }
    if gcd_i128(r as i128, h as i128) != 1 {
        return Err(Error::arg(format!("{r}/{h} is not in lowest terms")));
    }
    Ok(())
}

/// GCD of `d_q - d_0` over all `q`: 2 for even `N`, 4 for odd `N >= 3`.
fn dq_spread_gcd(n: usize) -> i128 {
    (1..Sector::Plus.block_len(n))
        .map(|q| dq(n, q) - dq(n, 0))
        .fold(0, gcd_i128)
}

/// Smallest `n >= 1` with `U^n = I` at `J = r/h`, `τ = π/2`.
///
/// Every eigenphase is `(s h - r d_q)/h` quarter turns with `s` the sector
/// offset, so the period is `4h / gcd(4h, all numerators)`. The numerators
/// differ by `2h` between sectors and by `r (d_q - d_0)` within a sector,
/// which reduces the gcd to `gcd(2h, r D, N h + r N(N-1)/2)` with `D` the gcd
/// of the `d_q` spread.
pub fn predicted_period(n: usize, r: i64, h: i64) -> Result<u64> {
    check_reduced(r, h)?;
    if n == 0 {
        return Err(Error::arg("qubit count must be at least 1"));
    }
    let (r, h) = (r as i128, h as i128);
    let nn = n as i128;
    let base = nn * h + r * dq(n, 0);
    let g = gcd_i128(gcd_i128(2 * h, r * dq_spread_gcd(n)), base);
    Ok((4 * h / g) as u64)
}

/// Smallest `n >= 1` with `U^n` proportional to the identity.
pub fn predicted_projective_period(n: usize, r: i64, h: i64) -> Result<u64> {
    check_reduced(r, h)?;
    let (r, h) = (r as i128, h as i128);
    let g = gcd_i128(2 * h, r * dq_spread_gcd(n));
    Ok((4 * h / g) as u64)
}

/// Period of `U(mπ/2)` for rational couplings; `None` otherwise.
pub fn operator_period(n: usize, j: &CouplingSpec, m: i64) -> Result<Option<u64>> {
    let Some((r, h)) = j.as_rational() else {
        return Ok(None);
    };
    let p = predicted_period(n, r, h)? as i128;
    Ok(Some((p / gcd_i128(p, m as i128)) as u64))
}
