//! Irrational-coupling phases against exact big-integer arithmetic.

use kicked_ising::floquet::{dq, Block};
use kicked_ising::*;
use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

const FRACTION_BITS: u32 = 160;

/// `offset - m sqrt(5) d / 3` quarter turns reduced into `[0, 4)`, returned as
/// radians. `sqrt(5 d^2)` is taken as an exact integer square root at
/// `2^160` scale, so the only error is the final conversion to `f64`.
fn exact_radians(offset: i128, m: i128, d: i128) -> f64 {
    let scale = BigUint::from(1u8) << FRACTION_BITS;
    let md = (m * d).unsigned_abs();
    let radicand = BigUint::from(5u8) * BigUint::from(md) * BigUint::from(md) * &scale * &scale;
    let root = radicand.sqrt() / BigUint::from(3u8);
    let sign = if (m * d) < 0 { Sign::Minus } else { Sign::Plus };
    let term = if root.is_zero() { BigInt::zero() } else { BigInt::from_biguint(sign, root) };
    let total = BigInt::from(offset) * BigInt::from(scale.clone()) - term;
    let modulus = BigInt::from(4u8) * BigInt::from(scale.clone());
    let reduced = total.mod_floor(&modulus);
    // Keep 64 significant bits for the conversion.
    let top = (reduced >> (FRACTION_BITS - 62)).to_f64().unwrap();
    top / 2f64.powi(62) * std::f64::consts::FRAC_PI_2
}

fn circular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

fn check(n: usize, m: i64, qs: impl Iterator<Item = usize> + Clone) {
    let j = CouplingSpec::surd(1, 5, 3).unwrap();
    let blocks = diagonal_blocks(n, &j, m).unwrap();
    for (sector, offset) in [(Sector::Plus, -(n as i128)), (Sector::Minus, 2 - n as i128)] {
        let Block::Diagonal(table) = blocks.block(sector) else {
            panic!("expected diagonal blocks");
        };
        let bound = table.precision_bound() + 1e-15;
        for q in qs.clone().filter(|&q| q < table.len()) {
            let exact = exact_radians(offset * m as i128, m as i128, dq(n, q));
            let err = circular_gap(table.radians(q), exact);
            assert!(err <= bound, "N={n} q={q} error {err:e} bound {bound:e}");
        }
    }
}

#[test]
fn small_chain_every_phase() {
    check(10, 1, 0..6);
    check(10, 3, 0..6);
}

#[test]
fn large_chain_sampled_phases() {
    let n = 500_000;
    let qs = (0..250_001).step_by(4_999).chain([1, 2, 124_999, 125_000, 249_999, 250_000]);
    check(n, 1, qs);
}
