//! Quasi-energy spectra and their level statistics.

use std::str::FromStr;

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::coupling::CouplingSpec;
use crate::error::{Error, Result};
use crate::floquet::{phase_table, Sector};

/// Phases closer than this (radians) are merged into one level.
pub const DEDUP_TOL: f64 = 1e-10;
/// `2 ln 2 - 1`.
pub const POISSON_MEAN_RATIO: f64 = 2.0 * std::f64::consts::LN_2 - 1.0;
pub const GOE_MEAN_RATIO: f64 = 0.536;
/// Fewest distinct levels accepted by [`unfold`].
pub const MIN_LEVELS: usize = 100;
pub const MAX_ORDER: usize = 8;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SectorChoice {
    Plus,
    Minus,
    Pooled,
}

impl SectorChoice {
    fn sectors(self) -> &'static [Sector] {
        match self {
            SectorChoice::Plus => &[Sector::Plus],
            SectorChoice::Minus => &[Sector::Minus],
            SectorChoice::Pooled => &Sector::ALL,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SectorChoice::Plus => "plus",
            SectorChoice::Minus => "minus",
            SectorChoice::Pooled => "pooled",
        }
    }
}

impl FromStr for SectorChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(SectorChoice::Plus),
            "minus" | "-" => Ok(SectorChoice::Minus),
            "pooled" | "both" => Ok(SectorChoice::Pooled),
            _ => Err(Error::arg(format!("unknown sector '{s}'"))),
        }
    }
}

/// Sorted distinct eigenphases in `[0, 2π)` with multiplicities.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpectrum {
    pub phases: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub n_qubits: usize,
    pub coupling: CouplingSpec,
    pub sector: SectorChoice,
    /// Largest absolute phase error, radians.
    pub precision_bound: f64,
}

impl PhaseSpectrum {
    pub fn distinct(&self) -> usize {
        self.phases.len()
    }

    pub fn total(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn max_multiplicity(&self) -> usize {
        self.multiplicities.iter().copied().max().unwrap_or(0)
    }
}

/// Sorts and merges phases within `tol`, including across the `0/2π` seam.
pub fn dedup_phases(mut raw: Vec<f64>, tol: f64) -> (Vec<f64>, Vec<usize>) {
    raw.par_sort_unstable_by(f64::total_cmp);
    let mut phases: Vec<f64> = Vec::with_capacity(raw.len());
    let mut mult: Vec<usize> = Vec::with_capacity(raw.len());
    let mut last = f64::NEG_INFINITY;
    for x in raw {
        if x - last <= tol {
            *mult.last_mut().expect("group open") += 1;
        } else {
            phases.push(x);
            mult.push(1);
        }
        last = x;
    }
    if phases.len() > 1 {
        let tail_top = last;
        if phases[0] + std::f64::consts::TAU - tail_top <= tol {
            let m = mult.pop().expect("nonempty");
            phases.pop();
            mult[0] += m;
        }
    }
    (phases, mult)
}

pub fn eigenphases(n: usize, j: &CouplingSpec, m: i64, sector: SectorChoice) -> Result<PhaseSpectrum> {
    eigenphases_with_tol(n, j, m, sector, DEDUP_TOL)
}

pub fn eigenphases_with_tol(
    n: usize,
    j: &CouplingSpec,
    m: i64,
    sector: SectorChoice,
    tol: f64,
) -> Result<PhaseSpectrum> {
    if n < 2 {
        return Err(Error::arg("spectra need at least 2 qubits"));
    }
    if m < 1 {
        return Err(Error::arg("tau multiple m must be at least 1"));
    }
    let mut raw = Vec::new();
    let mut precision_bound = 0.0f64;
    for &s in sector.sectors() {
        let table = phase_table(n, j, m, s)?;
        precision_bound = precision_bound.max(table.precision_bound());
        raw.extend((0..table.len()).into_par_iter().map(|i| table.radians(i)).collect::<Vec<_>>());
    }
    let (phases, multiplicities) = dedup_phases(raw, tol);
    Ok(PhaseSpectrum {
        phases,
        multiplicities,
        n_qubits: n,
        coupling: j.clone(),
        sector,
        precision_bound,
    })
}

/// Spectrum at `J = r/h + epsilon`, `0 <= |epsilon| <= 1e-4`.
pub fn perturbed_rational_spectrum(
    n: usize,
    r: i64,
    h: i64,
    epsilon: f64,
    sector: SectorChoice,
) -> Result<PhaseSpectrum> {
    if !(epsilon.abs() <= 1e-4) {
        return Err(Error::arg("perturbation must satisfy |epsilon| <= 1e-4"));
    }
    let base = CouplingSpec::rational(r, h)?;
    if base != (CouplingSpec::Rational { r, h }) {
        return Err(Error::arg(format!("{r}/{h} is not in lowest terms")));
    }
    eigenphases(n, &base.perturbed(epsilon), 1, sector)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Unfolding {
    /// Constant density: `x = D θ / 2π` for `D` distinct levels. This is the
    /// smoothed cumulative count of a spectrum whose density is flat on the
    /// circle, and is selected by both `rank` and `uniform`.
    Uniform,
    /// Each spacing divided by the mean of the `W` spacings centred on it.
    LocalMean(usize),
}

impl FromStr for Unfolding {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rank" | "uniform" => Ok(Unfolding::Uniform),
            _ => {
                let w = s
                    .strip_prefix("local:")
                    .ok_or_else(|| Error::arg(format!("unknown unfolding '{s}'")))?;
                let w: usize = w
                    .parse()
                    .map_err(|_| Error::arg(format!("bad window in '{s}'")))?;
                if w < 3 {
                    return Err(Error::arg("local-mean window must be at least 3"));
                }
                Ok(Unfolding::LocalMean(w))
            }
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Closure {
    /// Keep the circle: the wrap-around spacing is included.
    Periodic,
    /// Cut the circle at its largest gap and treat the levels as a line.
    Cut,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnfoldedLevels {
    pub levels: Vec<f64>,
    /// Length of the circle in unfolded units when periodic.
    pub circumference: Option<f64>,
}

impl UnfoldedLevels {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Number of `k`-th order spacings available.
    pub fn spacing_count(&self, k: usize) -> usize {
        match self.circumference {
            Some(_) if k < self.len() => self.len(),
            Some(_) => 0,
            None => self.len().saturating_sub(k),
        }
    }

    /// `E_(i+k) - E_i`, wrapping around the circle when periodic.
    pub fn spacing(&self, i: usize, k: usize) -> f64 {
        let n = self.len();
        let j = i + k;
        if j < n {
            self.levels[j] - self.levels[i]
        } else {
            let c = self.circumference.expect("wrap needs a periodic spectrum");
            let laps = (j / n - i / n) as f64;
            self.levels[j % n] + c * laps - self.levels[i % n]
        }
    }

    pub fn mean_spacing(&self) -> f64 {
        let n = self.spacing_count(1);
        (0..n).map(|i| self.spacing(i, 1)).sum::<f64>() / n as f64
    }
}

pub fn unfold(spectrum: &PhaseSpectrum, method: Unfolding) -> Result<UnfoldedLevels> {
    unfold_with(spectrum, method, Closure::Periodic)
}

pub fn unfold_with(spectrum: &PhaseSpectrum, method: Unfolding, closure: Closure) -> Result<UnfoldedLevels> {
    unfold_phases(&spectrum.phases, method, closure)
}

/// Unfolds sorted distinct phases in `[0, 2π)`.
pub fn unfold_phases(phases: &[f64], method: Unfolding, closure: Closure) -> Result<UnfoldedLevels> {
    let d = phases.len();
    if d < MIN_LEVELS {
        return Err(Error::Statistics(format!(
            "{d} distinct levels, at least {MIN_LEVELS} required"
        )));
    }
    let tau = std::f64::consts::TAU;
    // Raw circular spacings; gaps[i] follows phases[i].
    let gaps: Vec<f64> = (0..d)
        .map(|i| {
            if i + 1 < d {
                phases[i + 1] - phases[i]
            } else {
                phases[0] + tau - phases[d - 1]
            }
        })
        .collect();
    let mut unit: Vec<f64> = match method {
        Unfolding::Uniform => gaps.iter().map(|g| g * d as f64 / tau).collect(),
        Unfolding::LocalMean(w) => local_mean_scaled(&gaps, w, closure == Closure::Periodic),
    };
    match closure {
        Closure::Periodic => {
            let total: f64 = unit.iter().sum();
            let scale = d as f64 / total;
            unit.iter_mut().for_each(|u| *u *= scale);
            let mut levels = Vec::with_capacity(d);
            let mut x = 0.0;
            for u in &unit[..d] {
                levels.push(x);
                x += u;
            }
            Ok(UnfoldedLevels {
                levels,
                circumference: Some(x),
            })
        }
        Closure::Cut => {
            let widest = (0..d)
                .max_by(|&a, &b| gaps[a].total_cmp(&gaps[b]))
                .expect("nonempty");
            // Start just after the widest gap; keep the d-1 interior spacings.
            let order: Vec<usize> = (1..d).map(|s| (widest + s) % d).collect();
            let interior: Vec<f64> = order.iter().take(d - 1).map(|&i| unit[i]).collect();
            let scale = (d - 1) as f64 / interior.iter().sum::<f64>();
            let mut levels = Vec::with_capacity(d);
            let mut x = 0.0;
            levels.push(x);
            for u in interior {
                x += u * scale;
                levels.push(x);
            }
            Ok(UnfoldedLevels {
                levels,
                circumference: None,
            })
        }
    }
}

fn local_mean_scaled(gaps: &[f64], w: usize, periodic: bool) -> Vec<f64> {
    let d = gaps.len();
    let half = w / 2;
    // Prefix sums over a tripled copy handle the circular window.
    let mut prefix = vec![0.0; 3 * d + 1];
    for i in 0..3 * d {
        prefix[i + 1] = prefix[i] + gaps[i % d];
    }
    (0..d)
        .map(|i| {
            let (lo, hi) = if periodic {
                (d + i - half, d + i + half + 1)
            } else {
                let lo = i.saturating_sub(half).min(d.saturating_sub(w));
                let hi = (lo + w).min(d);
                (d + lo, d + hi)
            };
            let mean = (prefix[hi] - prefix[lo]) / (hi - lo) as f64;
            gaps[i] / mean
        })
        .collect()
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SampleKind {
    Spacing,
    Ratio,
}

impl SampleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SampleKind::Spacing => "spacing",
            SampleKind::Ratio => "ratio",
        }
    }

    /// Default histogram range.
    pub fn default_range(self) -> (f64, f64) {
        match self {
            SampleKind::Spacing => (0.0, 5.0),
            SampleKind::Ratio => (0.0, 10.0),
        }
    }
}

impl FromStr for SampleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spacing" => Ok(SampleKind::Spacing),
            "ratio" => Ok(SampleKind::Ratio),
            _ => Err(Error::arg(format!("unknown sample kind '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpacingSamples {
    pub order: usize,
    pub kind: SampleKind,
    /// Raw `k`-th spacings (mean `k`) or ratios.
    pub values: Vec<f64>,
    /// Ratios dropped for a zero denominator.
    pub filtered: usize,
}

impl SpacingSamples {
    /// Values on the scale of the reference density: spacings divided by `k`
    /// so that they have unit mean, ratios unchanged.
    pub fn scaled(&self) -> Vec<f64> {
        match self.kind {
            SampleKind::Spacing => {
                let k = self.order as f64;
                self.values.iter().map(|v| v / k).collect()
            }
            SampleKind::Ratio => self.values.clone(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

fn check_order(levels: &UnfoldedLevels, k: usize, need: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::arg("order k must be at least 1"));
    }
    if levels.spacing_count(k) < need.max(1) || k >= levels.len() {
        return Err(Error::Statistics(format!(
            "order {k} needs more than {} levels",
            levels.len()
        )));
    }
    Ok(())
}

/// `s_i^(k) = E_(i+k) - E_i` for every valid `i`.
pub fn kth_spacings(levels: &UnfoldedLevels, k: usize) -> Result<SpacingSamples> {
    check_order(levels, k, 1)?;
    let values = (0..levels.spacing_count(k))
        .into_par_iter()
        .map(|i| levels.spacing(i, k))
        .collect();
    Ok(SpacingSamples {
        order: k,
        kind: SampleKind::Spacing,
        values,
        filtered: 0,
    })
}

/// `r_i^(k) = s_(i+k)^(k) / s_i^(k)` for every `i`; the two spacings in each
/// ratio share no interval.
pub fn kth_ratios(levels: &UnfoldedLevels, k: usize) -> Result<SpacingSamples> {
    kth_ratios_strided(levels, k, 1)
}

/// As [`kth_ratios`] keeping only every `stride`-th starting index, so that
/// consecutive samples are built from disjoint spacings when `stride = 2k`.
pub fn kth_ratios_strided(levels: &UnfoldedLevels, k: usize, stride: usize) -> Result<SpacingSamples> {
    if stride == 0 {
        return Err(Error::arg("stride must be at least 1"));
    }
    check_order(levels, 2 * k, 1)?;
    let count = match levels.circumference {
        Some(_) => levels.len(),
        None => levels.len() - 2 * k,
    };
    let raw: Vec<Option<f64>> = (0..count)
        .into_par_iter()
        .step_by(stride)
        .map(|i| {
            let den = levels.spacing(i, k);
            let num = levels.spacing(i + k, k);
            (den > 0.0).then(|| num / den)
        })
        .collect();
    let filtered = raw.iter().filter(|r| r.is_none()).count();
    Ok(SpacingSamples {
        order: k,
        kind: SampleKind::Ratio,
        values: raw.into_iter().flatten().collect(),
        filtered,
    })
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct RatioSummary {
    pub mean: f64,
    pub samples: usize,
    pub filtered: usize,
}

/// `<min(s_j, s_(j+1)) / max(s_j, s_(j+1))>` over adjacent spacings.
pub fn mean_adjacent_ratio(levels: &UnfoldedLevels) -> Result<RatioSummary> {
    check_order(levels, 2, 1)?;
    let count = match levels.circumference {
        Some(_) => levels.len(),
        None => levels.len() - 2,
    };
    let ratios: Vec<Option<f64>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let (a, b) = (levels.spacing(i, 1), levels.spacing(i + 1, 1));
            let hi = a.max(b);
            (hi > 0.0).then(|| a.min(b) / hi)
        })
        .collect();
    // Summed in index order so the result does not depend on the thread count.
    let (sum, used) = ratios.iter().flatten().fold((0.0, 0usize), |(s, c), r| (s + r, c + 1));
    if used == 0 {
        return Err(Error::Statistics("all spacings vanish".into()));
    }
    Ok(RatioSummary {
        mean: sum / used as f64,
        samples: used,
        filtered: count - used,
    })
}

fn check_reference(k: usize, x: f64) -> Result<()> {
    if !(1..=MAX_ORDER).contains(&k) {
        return Err(Error::arg(format!("order {k} outside 1..={MAX_ORDER}")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::arg(format!("argument {x} outside [0, inf)")));
    }
    Ok(())
}

fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// Poisson reference densities.
///
/// Spacing: `k^k/(k-1)! s^(k-1) e^(-ks)` (unit mean). Ratio:
/// `(2k-1)!/((k-1)!)^2 r^(k-1)/(1+r)^(2k)`.
pub fn reference_pdf(kind: SampleKind, k: usize, x: f64) -> Result<f64> {
    check_reference(k, x)?;
    let kf = k as f64;
    Ok(match kind {
        SampleKind::Spacing => {
            if x == 0.0 {
                return Ok(if k == 1 { 1.0 } else { 0.0 });
            }
            (kf * kf.ln() - ln_factorial(k - 1) + (kf - 1.0) * x.ln() - kf * x).exp()
        }
        SampleKind::Ratio => {
            let norm = (ln_factorial(2 * k - 1) - 2.0 * ln_factorial(k - 1)).exp().round();
            norm * x.powi(k as i32 - 1) / (1.0 + x).powi(2 * k as i32)
        }
    })
}

/// Cumulative distributions of [`reference_pdf`] in closed form.
pub fn reference_cdf(kind: SampleKind, k: usize, x: f64) -> Result<f64> {
    check_reference(k, x)?;
    Ok(match kind {
        SampleKind::Spacing => {
            let y = k as f64 * x;
            let mut term = 1.0;
            let mut partial = 0.0;
            for i in 0..k {
                if i > 0 {
                    term *= y / i as f64;
                }
                partial += term;
            }
            (1.0 - (-y).exp() * partial).clamp(0.0, 1.0)
        }
        SampleKind::Ratio => {
            if x.is_infinite() {
                return Ok(1.0);
            }
            let p = x / (1.0 + x);
            let n = 2 * k - 1;
            let mut total = 0.0;
            for j in k..=n {
                let ln_c = ln_factorial(n) - ln_factorial(j) - ln_factorial(n - j);
                total += ln_c.exp().round() * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32);
            }
            total.clamp(0.0, 1.0)
        }
    })
}

/// Kolmogorov-Smirnov distance between the empirical CDF of the scaled samples
/// and the reference CDF.
pub fn ks_distance(samples: &SpacingSamples) -> Result<f64> {
    let mut xs = samples.scaled();
    if xs.is_empty() {
        return Err(Error::Statistics("no samples".into()));
    }
    xs.par_sort_unstable_by(f64::total_cmp);
    let n = xs.len() as f64;
    let k = samples.order;
    let kind = samples.kind;
    xs.par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = reference_cdf(kind, k, x.max(0.0))?;
            Ok(((i + 1) as f64 / n - f).abs().max((f - i as f64 / n).abs()))
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct HistogramBin {
    pub center: f64,
    pub empirical: f64,
    pub reference: f64,
}

/// Density-normalized histogram of the scaled samples over `[lo, hi)`, with
/// the reference density at each bin centre. Samples outside the range count
/// toward the normalization.
pub fn histogram(samples: &SpacingSamples, bins: usize, lo: f64, hi: f64) -> Result<Vec<HistogramBin>> {
    if bins == 0 || !(hi > lo) {
        return Err(Error::arg("histogram needs bins >= 1 and hi > lo"));
    }
    let xs = samples.scaled();
    if xs.is_empty() {
        return Err(Error::Statistics("no samples".into()));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for x in &xs {
        if *x >= lo && *x < hi {
            let b = (((x - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
    }
    let total = xs.len() as f64;
    counts
        .iter()
        .enumerate()
        .map(|(b, &c)| {
            let center = lo + (b as f64 + 0.5) * width;
            Ok(HistogramBin {
                center,
                empirical: c as f64 / (total * width),
                reference: reference_pdf(samples.kind, samples.order, center.max(0.0))?,
            })
        })
        .collect()
}
