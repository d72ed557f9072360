//! Classical kicked-top map and Lyapunov exponents.
//!
//! One step rotates the unit vector about `Y` by `p` and then twists it about
//! `Z` by an angle proportional to the new `Z` component:
//!
//! ```text
//! a = X cos p + Z sin p,   b = Z cos p - X sin p
//! X' = a cos(k' b) - Y sin(k' b)
//! Y' = a sin(k' b) + Y cos(k' b)
//! Z' = b
//! ```

use rayon::prelude::*;

use crate::coupling::CouplingSpec;
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct TopParams {
    pub p: f64,
    pub k_prime: f64,
}

impl TopParams {
    pub fn new(p: f64, k_prime: f64) -> Result<Self> {
        if !p.is_finite() || !k_prime.is_finite() {
            return Err(Error::arg("kicked-top parameters must be finite"));
        }
        Ok(Self { p, k_prime })
    }

    /// `p` is an integer multiple of `π`.
    pub fn is_integer_turn(&self) -> bool {
        let t = self.p / std::f64::consts::PI;
        (t - t.round()).abs() < 1e-12
    }
}

/// Kicked-top parameters equivalent to the chain at `τ = mπ/2`:
/// `p = mπ`, `k' = m N J π`.
pub fn map_params(n: usize, j: &CouplingSpec, m: i64) -> Result<TopParams> {
    if n == 0 {
        return Err(Error::arg("qubit count must be at least 1"));
    }
    let pi = std::f64::consts::PI;
    TopParams::new(m as f64 * pi, m as f64 * n as f64 * j.value() * pi)
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct BlochPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochPoint {
    /// Normalizes `(x, y, z)` onto the unit sphere.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let r = (x * x + y * y + z * z).sqrt();
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::arg("point must be finite and nonzero"));
        }
        Ok(Self {
            x: x / r,
            y: y / r,
            z: z / r,
        })
    }

    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self {
            x: st * cp,
            y: st * sp,
            z: ct,
        }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    fn distance(&self, other: &Self) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2)).sqrt()
    }

    fn renormalized(self) -> Self {
        let r = self.norm();
        Self {
            x: self.x / r,
            y: self.y / r,
            z: self.z / r,
        }
    }
}

pub fn classical_step(point: BlochPoint, params: TopParams) -> BlochPoint {
    let (sp, cp) = params.p.sin_cos();
    let a = point.x * cp + point.z * sp;
    let b = point.z * cp - point.x * sp;
    let (st, ct) = (params.k_prime * b).sin_cos();
    BlochPoint {
        x: a * ct - point.y * st,
        y: a * st + point.y * ct,
        z: b,
    }
    .renormalized()
}

/// Orbit of `steps` points after `start`.
pub fn orbit(start: BlochPoint, params: TopParams, steps: usize) -> Vec<BlochPoint> {
    std::iter::successors(Some(start), |&q| Some(classical_step(q, params)))
        .skip(1)
        .take(steps)
        .collect()
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum LleMode {
    /// `ln(k' sin p) - 1`, and exactly 0 when `p` is a multiple of `π`.
    Analytic,
    /// Mean two-trajectory divergence rate over a fixed set of starting points.
    TwoTrajectory { steps: usize, separation: f64 },
}

pub fn lle_estimate(params: TopParams, mode: LleMode) -> Result<f64> {
    match mode {
        LleMode::Analytic => {
            if params.is_integer_turn() {
                return Ok(0.0);
            }
            let s = params.k_prime * params.p.sin();
            if !(s > 0.0) {
                return Err(Error::arg(format!("ln(k' sin p) undefined for k' sin p = {s}")));
            }
            Ok(s.ln() - 1.0)
        }
        LleMode::TwoTrajectory { steps, separation } => {
            let rates = lle_ensemble(params, &default_starts(), steps, separation)?;
            Ok(rates.iter().sum::<f64>() / rates.len() as f64)
        }
    }
}

/// Starting points spread over the sphere, away from the poles.
fn default_starts() -> Vec<BlochPoint> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let count = 16;
    (0..count)
        .map(|i| {
            let z = 0.9 - 1.8 * (i as f64 + 0.5) / count as f64;
            BlochPoint::from_angles(z.acos(), golden * i as f64)
        })
        .collect()
}

/// Benettin estimate from one starting point: a companion trajectory is
/// kept at distance `separation` by rescaling after every step, and the
/// logarithmic growth factors are averaged.
pub fn lle_two_trajectory(params: TopParams, start: BlochPoint, steps: usize, separation: f64) -> Result<f64> {
    if steps == 0 {
        return Err(Error::arg("steps must be at least 1"));
    }
    if !(separation > 0.0 && separation < 1e-3) {
        return Err(Error::arg("separation must lie in (0, 1e-3)"));
    }
    // Offset along a tangent direction.
    let (tx, ty, tz) = if start.z.abs() < 0.9 {
        (-start.y, start.x, 0.0)
    } else {
        (0.0, -start.z, start.y)
    };
    let tn = (tx * tx + ty * ty + tz * tz).sqrt();
    let mut x = start;
    let mut y = BlochPoint::new(
        start.x + separation * tx / tn,
        start.y + separation * ty / tn,
        start.z + separation * tz / tn,
    )?;
    let d0 = x.distance(&y);
    let mut acc = 0.0;
    for _ in 0..steps {
        x = classical_step(x, params);
        y = classical_step(y, params);
        let d = x.distance(&y);
        if d == 0.0 {
            return Err(Error::Numeric("trajectories merged".into()));
        }
        acc += (d / d0).ln();
        let s = d0 / d;
        y = BlochPoint::new(x.x + (y.x - x.x) * s, x.y + (y.y - x.y) * s, x.z + (y.z - x.z) * s)?;
    }
    Ok(acc / steps as f64)
}

pub fn lle_ensemble(params: TopParams, starts: &[BlochPoint], steps: usize, separation: f64) -> Result<Vec<f64>> {
    starts
        .par_iter()
        .map(|&s| lle_two_trajectory(params, s, steps, separation))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_2, PI};

    #[test]
    fn mapping_examples() {
        let t = map_params(10, &CouplingSpec::rational(1, 1).unwrap(), 1).unwrap();
        assert_eq!((t.p, t.k_prime), (PI, 10.0 * PI));
        let t = map_params(4, &CouplingSpec::rational(1, 2).unwrap(), 1).unwrap();
        assert_eq!((t.p, t.k_prime), (PI, 2.0 * PI));
    }

    #[test]
    fn quarter_turn_without_twist() {
        let q = classical_step(BlochPoint::new(0.2, -0.5, 0.7).unwrap(), TopParams::new(FRAC_PI_2, 0.0).unwrap());
        let r = BlochPoint::new(0.7, -0.5, -0.2).unwrap();
        assert!(q.distance(&r) < 1e-15);
    }

    #[test]
    fn identity_at_zero() {
        let s = BlochPoint::new(0.3, 0.4, -0.2).unwrap();
        assert!(classical_step(s, TopParams::new(0.0, 0.0).unwrap()).distance(&s) < 1e-15);
    }

    #[test]
    fn analytic_lle() {
        assert_eq!(lle_estimate(TopParams::new(PI, 7.3).unwrap(), LleMode::Analytic).unwrap(), 0.0);
        assert_eq!(lle_estimate(TopParams::new(3.0 * PI, 1.0).unwrap(), LleMode::Analytic).unwrap(), 0.0);
        assert!(lle_estimate(TopParams::new(FRAC_PI_2, E).unwrap(), LleMode::Analytic).unwrap().abs() < 1e-15);
        assert!(lle_estimate(TopParams::new(-1.0, 2.0).unwrap(), LleMode::Analytic).is_err());
    }

    #[test]
    fn sphere_is_preserved() {
        let params = TopParams::new(2.0, 10.0).unwrap();
        let mut q = BlochPoint::from_angles(1.0, 0.3);
        for _ in 0..1_000_000 {
            q = classical_step(q, params);
        }
        assert!((q.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn numeric_lle_vanishes_for_pure_rotation() {
        let params = TopParams::new(1.1, 0.0).unwrap();
        let l = lle_estimate(params, LleMode::TwoTrajectory { steps: 2000, separation: 1e-9 }).unwrap();
        assert!(l.abs() < 1e-3);
    }
}
