//! Wigner small-d matrix `d^j(β) = exp(-iβ J_y)` for `j = N/2`.
//!
//! Indexed in the Dicke basis: entry `[p][q]` is `<j, j-p| d |j, j-q>`.
//! Column `q` is the eigenvector of `T = cos β J_z + sin β J_x` with
//! eigenvalue `j - q`. Columns are produced one at a time: the rotated
//! lowering operator maps column `q-1` onto a positive multiple of column `q`,
//! which gives a starting vector and the sign; two steps of shifted inverse
//! iteration on the tridiagonal `T` then remove accumulated error. No
//! factorial ratios are formed, so the construction is stable for large `j`.

use nalgebra::DMatrix;

use crate::symmetric::log_binomial_unchecked;

const SHIFT: f64 = 1e-9;
const REFINE_STEPS: usize = 2;

/// Off-diagonal `sqrt(p (N - p + 1))` coupling Dicke levels `p-1` and `p`.
#[inline]
fn ladder(n: usize, p: usize) -> f64 {
    ((p * (n - p + 1)) as f64).sqrt()
}

pub fn small_d_matrix(n: usize, beta: f64) -> DMatrix<f64> {
    let mut d = DMatrix::<f64>::zeros(n + 1, n + 1);
    small_d_columns(n, beta, |q, col| d.column_mut(q).copy_from_slice(col));
    d
}

/// Streams the columns of [`small_d_matrix`] in order `q = 0..=N` without
/// holding the full matrix.
pub fn small_d_columns(n: usize, beta: f64, mut sink: impl FnMut(usize, &[f64])) {
    let dim = n + 1;
    let (sb, cb) = beta.sin_cos();
    let (s2, c2) = (beta / 2.0).sin_cos();
    let j = n as f64 / 2.0;

    let diag: Vec<f64> = (0..dim).map(|p| cb * (j - p as f64)).collect();
    let off: Vec<f64> = (1..dim).map(|p| 0.5 * sb * ladder(n, p)).collect();

    // Column q = 0 in closed form: each qubit rotates to cos|0> + sin|1>.
    let mut prev: Vec<f64> = (0..dim).map(|p| binomial_power(n, p, c2, s2)).collect();
    sink(0, &prev);
    for q in 1..dim {
        let scale = ladder(n, q);
        let start: Vec<f64> = apply_lowering(n, cb, sb, &prev)
            .into_iter()
            .map(|x| x / scale)
            .collect();
        let mut v = start.clone();
        let shift = j - q as f64 + SHIFT;
        for _ in 0..REFINE_STEPS {
            v = solve_shifted(&diag, &off, shift, &v);
            normalize(&mut v);
        }
        if dot(&v, &start) < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        sink(q, &v);
        prev = v;
    }
}

/// `sqrt(C(N, p)) c^(N-p) s^p`, exact zero when a needed power vanishes.
fn binomial_power(n: usize, p: usize, c: f64, s: f64) -> f64 {
    let (ca, sa) = (c.abs(), s.abs());
    if (ca == 0.0 && p < n) || (sa == 0.0 && p > 0) {
        return 0.0;
    }
    let mut ln = 0.5 * log_binomial_unchecked(n as u64, p as u64);
    if p < n {
        ln += (n - p) as f64 * ca.ln();
    }
    if p > 0 {
        ln += p as f64 * sa.ln();
    }
    let mut sign = 1.0;
    if c < 0.0 && (n - p) % 2 == 1 {
        sign = -sign;
    }
    if s < 0.0 && p % 2 == 1 {
        sign = -sign;
    }
    sign * ln.exp()
}

/// Applies `cos β J_x - sin β J_z - (J_+ - J_-)/2` in the Dicke basis.
fn apply_lowering(n: usize, cb: f64, sb: f64, v: &[f64]) -> Vec<f64> {
    let j = n as f64 / 2.0;
    let mut out: Vec<f64> = (0..=n).map(|p| -sb * (j - p as f64) * v[p]).collect();
    for p in 1..=n {
        let s = ladder(n, p);
        out[p - 1] += 0.5 * s * (cb - 1.0) * v[p];
        out[p] += 0.5 * s * (cb + 1.0) * v[p - 1];
    }
    out
}

/// Solves `(T - shift I) x = b` for symmetric tridiagonal `T` by Gaussian
/// elimination with partial pivoting.
fn solve_shifted(diag: &[f64], off: &[f64], shift: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    if n == 1 {
        let a = diag[0] - shift;
        return vec![b[0] / a];
    }
    // Row i holds (sub, main, sup, sup2) before elimination.
    let mut main: Vec<f64> = diag.iter().map(|d| d - shift).collect();
    let mut sup: Vec<f64> = off.to_vec();
    sup.push(0.0);
    let mut sup2 = vec![0.0; n];
    let mut sub: Vec<f64> = off.to_vec();
    let mut rhs = b.to_vec();

    for i in 0..n - 1 {
        if sub[i].abs() > main[i].abs() {
            // Swap rows i and i+1.
            std::mem::swap(&mut main[i], &mut sub[i]);
            let (a, bsup) = (sup[i], main[i + 1]);
            sup[i] = bsup;
            main[i + 1] = a;
            let (c, d) = (sup2[i], sup[i + 1]);
            sup2[i] = d;
            sup[i + 1] = c;
            rhs.swap(i, i + 1);
        }
        if main[i] == 0.0 {
            main[i] = f64::EPSILON * (1.0 + shift.abs());
        }
        let f = sub[i] / main[i];
        main[i + 1] -= f * sup[i];
        if i + 1 < n - 1 {
            sup[i + 1] -= f * sup2[i];
        }
        rhs[i + 1] -= f * rhs[i];
    }
    if main[n - 1] == 0.0 {
        main[n - 1] = f64::EPSILON * (1.0 + shift.abs());
    }
    let mut x = vec![0.0; n];
    x[n - 1] = rhs[n - 1] / main[n - 1];
    x[n - 2] = (rhs[n - 2] - sup[n - 2] * x[n - 1]) / main[n - 2];
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (rhs[i] - sup[i] * x[i + 1] - sup2[i] * x[i + 2]) / main[i];
    }
    x
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let norm = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn orthogonality_error(d: &DMatrix<f64>) -> f64 {
        let g = d.transpose() * d;
        (g - DMatrix::identity(d.nrows(), d.ncols())).abs().max()
    }

    #[test]
    fn spin_half_is_the_rotation_matrix() {
        let beta = 0.7;
        let d = small_d_matrix(1, beta);
        let (s, c) = (beta / 2.0).sin_cos();
        let expected = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        assert!((d - expected).abs().max() < 1e-15);
    }

    #[test]
    fn spin_one_closed_form() {
        let beta = 1.3f64;
        let d = small_d_matrix(2, beta);
        let c = beta.cos();
        let r = std::f64::consts::SQRT_2;
        let expected = DMatrix::from_row_slice(
            3,
            3,
            &[
                (1.0 + c) / 2.0,
                -beta.sin() / r,
                (1.0 - c) / 2.0,
                beta.sin() / r,
                c,
                -beta.sin() / r,
                (1.0 - c) / 2.0,
                beta.sin() / r,
                (1.0 + c) / 2.0,
            ],
        );
        assert!((d - expected).abs().max() < 1e-14);
    }

    #[test]
    fn large_spin_is_orthogonal() {
        for (n, beta) in [(64usize, 0.4), (400, 2.1), (1500, PI + 1e-6)] {
            let d = small_d_matrix(n, beta);
            assert!(orthogonality_error(&d) < 1e-11, "n={n}");
        }
    }

    #[test]
    fn half_turn_reflects_dicke_levels() {
        let n = 9;
        let d = small_d_matrix(n, PI);
        for q in 0..=n {
            let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
            assert!((d[(n - q, q)] - sign).abs() < 1e-12);
        }
    }

    #[test]
    fn composition_adds_angles() {
        let n = 30;
        let (a, b) = (0.37, 1.21);
        let lhs = small_d_matrix(n, a) * small_d_matrix(n, b);
        let rhs = small_d_matrix(n, a + b);
        assert!((lhs - rhs).abs().max() < 1e-11);
    }

    #[test]
    fn zero_angle_is_identity() {
        let d = small_d_matrix(12, 0.0);
        assert!((d - DMatrix::identity(13, 13)).abs().max() < 1e-15);
    }
}
