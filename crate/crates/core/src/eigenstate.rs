//! Floquet eigenstates and their half-chain entanglement.

use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::coupling::CouplingSpec;
use crate::error::{Error, Result};
use crate::floquet::{
    general_tau_blocks_with_limit, parity_components, phase_table, Block, Sector, DEFAULT_DENSE_LIMIT,
};
use crate::spectral::dedup_phases;
use crate::symmetric::{bipartite_schmidt_truncated, SymmetricState, C64};

/// Largest accepted perturbation.
pub const MAX_DELTA: f64 = 1e-4;
/// Bound on `‖U v - λ v‖` for every dense eigenpair.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Phases closer than this within a sector mark the ensemble degenerate.
pub const DEGENERACY_TOL: f64 = 1e-13;
/// Probability dropped from each state before its Schmidt decomposition.
pub const SCHMIDT_TAIL: f64 = 1e-12;

/// Rotation used to turn the unitary into a Hermitian matrix.
const ROTATION: f64 = 0.618_033_988_749_895;
const CLUSTER_GAP: f64 = 1e-5;
const TIE_TOL: f64 = 1e-12;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PerturbParam {
    J,
    Tau,
}

impl FromStr for PerturbParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "J" | "j" => Ok(PerturbParam::J),
            "tau" | "TAU" => Ok(PerturbParam::Tau),
            _ => Err(Error::arg(format!("unknown perturbation parameter '{s}'"))),
        }
    }
}

impl PerturbParam {
    pub fn as_str(self) -> &'static str {
        match self {
            PerturbParam::J => "J",
            PerturbParam::Tau => "tau",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Perturbation {
    pub param: PerturbParam,
    pub delta: f64,
}

impl Perturbation {
    pub fn new(param: PerturbParam, delta: f64) -> Result<Self> {
        if !(0.0..=MAX_DELTA).contains(&delta) {
            return Err(Error::arg(format!("delta {delta} outside [0, {MAX_DELTA}]")));
        }
        Ok(Self { param, delta })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum EnsembleSource {
    DiagonalBasis,
    DenseDiagonalization,
    Supplied,
}

#[derive(Clone, Debug)]
pub struct EigenstateEnsemble {
    pub n_qubits: usize,
    /// Eigenvectors in the Dicke basis.
    pub states: Vec<SymmetricState>,
    pub sectors: Vec<Option<Sector>>,
    /// Eigenphases in `[0, 2π)`; empty for supplied ensembles.
    pub phases: Vec<f64>,
    pub source: EnsembleSource,
    pub perturbation: Option<Perturbation>,
    /// Some eigenphase is repeated within a sector, so the eigenbasis (and
    /// any average over it) depends on how ties were broken.
    pub degenerate: bool,
    pub max_residual: f64,
}

impl EigenstateEnsemble {
    /// Wraps arbitrary states, e.g. for reference averages.
    pub fn from_states(states: Vec<SymmetricState>) -> Result<Self> {
        let n = states.first().map(SymmetricState::n_qubits).ok_or_else(|| Error::arg("empty ensemble"))?;
        if let Some(s) = states.iter().find(|s| s.n_qubits() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.n_qubits(),
            });
        }
        let count = states.len();
        Ok(Self {
            n_qubits: n,
            states,
            sectors: vec![None; count],
            phases: Vec::new(),
            source: EnsembleSource::Supplied,
            perturbation: None,
            degenerate: false,
            max_residual: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Eigendecomposition of a unitary matrix.
#[derive(Clone, Debug)]
pub struct UnitaryEigen {
    /// Eigenphases in `[0, 2π)`, ascending.
    pub phases: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `phases`.
    pub vectors: DMatrix<C64>,
    /// Number of numerically degenerate groups resolved by tie-breaking.
    pub tie_groups: usize,
    pub max_residual: f64,
}

/// Diagonalizes a unitary `u`.
///
/// The Hermitian matrix `(e^(-ia) U + e^(ia) U†)/2` shares the eigenvectors
/// of `U` and has eigenvalues `cos(θ - a)`. Its eigenvalues are grouped where
/// they lie closer than `1e-5`; within each group `U` is projected and
/// recentred on the group's mean phase, whose anti-Hermitian part resolves
/// the phases to full relative precision. Eigenvalues that still coincide to
/// `1e-12` are split by diagonalizing the basis-index operator `diag(0, 1, ...)`
/// on their common eigenspace, so degenerate eigenvectors come out as localized
/// as the degeneracy allows.
pub fn unitary_eigen(u: &DMatrix<C64>) -> Result<UnitaryEigen> {
    let n = u.nrows();
    if u.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: u.ncols(),
        });
    }
    let rot = C64::from_polar(1.0, -ROTATION);
    let h = (u * rot + u.adjoint() * rot.conj()) * C64::new(0.5, 0.0);
    let (values, vecs) = hermitian_eigen(h);

    let mut out = DMatrix::<C64>::zeros(n, n);
    let mut col = 0;
    let mut tie_groups = 0;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] < CLUSTER_GAP {
            end += 1;
        }
        let vc = vecs.columns(start, end - start).into_owned();
        let refined = if end - start == 1 {
            vc
        } else {
            refine_cluster(u, vc, &mut tie_groups)
        };
        out.columns_mut(col, refined.ncols()).copy_from(&refined);
        col += refined.ncols();
        start = end;
    }

    let uv = u * &out;
    let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut max_residual = 0.0f64;
    for k in 0..n {
        let v = out.column(k);
        let lambda = v.dotc(&uv.column(k));
        let r = (uv.column(k) - v * lambda).norm();
        max_residual = max_residual.max(r);
        pairs.push((lambda.arg().rem_euclid(std::f64::consts::TAU), k));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let order: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    Ok(UnitaryEigen {
        phases: pairs.iter().map(|p| p.0).collect(),
        vectors: out.select_columns(&order),
        tie_groups,
        max_residual,
    })
}

/// Eigenvalues ascending with matching eigenvector columns.
fn hermitian_eigen(h: DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    (values, eig.eigenvectors.select_columns(&order))
}

fn refine_cluster(u: &DMatrix<C64>, vc: DMatrix<C64>, tie_groups: &mut usize) -> DMatrix<C64> {
    let b = vc.adjoint() * u * &vc;
    let t = b.trace();
    let centre = if t.norm() > 1e-3 { t / t.norm() } else { C64::new(1.0, 0.0) };
    let bc = b * centre.conj();
    let a = (&bc - bc.adjoint()) * C64::new(0.0, -0.5);
    let (values, w) = hermitian_eigen(a);
    let mut w = &vc * w;

    let k = values.len();
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && values[end] - values[end - 1] < TIE_TOL {
            end += 1;
        }
        if end - start > 1 {
            *tie_groups += 1;
            let wg = w.columns(start, end - start).into_owned();
            let mut dw = wg.clone();
            for (i, mut row) in dw.row_iter_mut().enumerate() {
                row *= C64::new(i as f64, 0.0);
            }
            let (_, z) = hermitian_eigen(wg.adjoint() * dw);
            w.columns_mut(start, end - start).copy_from(&(wg * z));
        }
        start = end;
    }
    w
}

fn parity_to_dicke(n: usize, sector: Sector, v: impl Iterator<Item = C64>) -> Result<SymmetricState> {
    let mut c = vec![C64::new(0.0, 0.0); n + 1];
    for (a, x) in v.enumerate() {
        let (comps, k) = parity_components(n, sector, a);
        for &(q, w) in &comps[..k] {
            c[q] += w * x;
        }
    }
    SymmetricState::normalized(n, c)
}

pub fn floquet_eigenstates(
    n: usize,
    j: &CouplingSpec,
    m: i64,
    perturbation: Perturbation,
) -> Result<EigenstateEnsemble> {
    floquet_eigenstates_with_limit(n, j, m, perturbation, DEFAULT_DENSE_LIMIT)
}

/// As [`floquet_eigenstates`] with an explicit cap on `N` for the dense path.
pub fn floquet_eigenstates_with_limit(
    n: usize,
    j: &CouplingSpec,
    m: i64,
    perturbation: Perturbation,
    max_dense: usize,
) -> Result<EigenstateEnsemble> {
    if n < 2 {
        return Err(Error::arg("eigenstate ensembles need at least 2 qubits"));
    }
    if m < 1 {
        return Err(Error::arg("tau multiple m must be at least 1"));
    }
    let perturbation = Perturbation::new(perturbation.param, perturbation.delta)?;
    match perturbation.param {
        PerturbParam::J => diagonal_ensemble(n, j, m, perturbation),
        PerturbParam::Tau => dense_ensemble(n, j, m, perturbation, max_dense),
    }
}

fn diagonal_ensemble(n: usize, j: &CouplingSpec, m: i64, perturbation: Perturbation) -> Result<EigenstateEnsemble> {
    let coupling = if perturbation.delta == 0.0 {
        j.clone()
    } else {
        j.perturbed(perturbation.delta)
    };
    let mut states = Vec::with_capacity(n + 1);
    let mut sectors = Vec::with_capacity(n + 1);
    let mut phases = Vec::with_capacity(n + 1);
    let mut degenerate = false;
    for sector in Sector::ALL {
        let table = phase_table(n, &coupling, m, sector)?;
        let radians = table.all_radians();
        let (distinct, _) = dedup_phases(radians.clone(), DEGENERACY_TOL);
        degenerate |= distinct.len() < radians.len();
        for (a, &phase) in radians.iter().enumerate() {
            let unit = (0..table.len()).map(|b| C64::new(if a == b { 1.0 } else { 0.0 }, 0.0));
            states.push(parity_to_dicke(n, sector, unit)?);
            sectors.push(Some(sector));
            phases.push(phase);
        }
    }
    Ok(EigenstateEnsemble {
        n_qubits: n,
        states,
        sectors,
        phases,
        source: EnsembleSource::DiagonalBasis,
        perturbation: Some(perturbation),
        degenerate,
        max_residual: 0.0,
    })
}

fn dense_ensemble(
    n: usize,
    j: &CouplingSpec,
    m: i64,
    perturbation: Perturbation,
    max_dense: usize,
) -> Result<EigenstateEnsemble> {
    let tau = m as f64 * std::f64::consts::FRAC_PI_2 + perturbation.delta;
    let blocks = general_tau_blocks_with_limit(n, j, tau, max_dense)?;
    let solve = |sector: Sector| -> Result<(Sector, UnitaryEigen)> {
        match blocks.block(sector) {
            Block::Dense(u) => Ok((sector, unitary_eigen(u)?)),
            Block::Diagonal(_) => Err(Error::UnsupportedRepresentation("expected dense blocks")),
        }
    };
    let (plus, minus) = rayon::join(|| solve(Sector::Plus), || solve(Sector::Minus));
    let mut states = Vec::with_capacity(n + 1);
    let mut sectors = Vec::with_capacity(n + 1);
    let mut phases = Vec::with_capacity(n + 1);
    let mut degenerate = false;
    let mut max_residual = 0.0f64;
    for result in [plus, minus] {
        let (sector, eig) = result?;
        if eig.max_residual > RESIDUAL_TOL {
            return Err(Error::Numeric(format!(
                "eigenpair residual {:.3e} exceeds {RESIDUAL_TOL:e} in the {} sector",
                eig.max_residual,
                sector.as_str()
            )));
        }
        degenerate |= eig.tie_groups > 0;
        max_residual = max_residual.max(eig.max_residual);
        let converted: Result<Vec<SymmetricState>> = (0..eig.vectors.ncols())
            .into_par_iter()
            .map(|k| parity_to_dicke(n, sector, eig.vectors.column(k).iter().copied()))
            .collect();
        states.extend(converted?);
        sectors.extend(std::iter::repeat_n(Some(sector), eig.phases.len()));
        phases.extend(eig.phases);
    }
    Ok(EigenstateEnsemble {
        n_qubits: n,
        states,
        sectors,
        phases,
        source: EnsembleSource::DenseDiagonalization,
        perturbation: Some(perturbation),
        degenerate,
        max_residual,
    })
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ScalingPoint {
    pub n_qubits: usize,
    /// Size of subsystem `A`, `floor(N/2)`.
    pub n_a: usize,
    /// `1 / log2(N_A + 1)`.
    pub inv_smax: f64,
    /// Mean entropy in bits.
    pub mean_entropy: f64,
    pub max_entropy: f64,
    pub ratio: f64,
    pub ratio_plus: Option<f64>,
    pub ratio_minus: Option<f64>,
}

/// Entropy in bits of each state at the `floor(N/2)` cut.
pub fn eigenstate_entropies(ensemble: &EigenstateEnsemble) -> Result<Vec<f64>> {
    let n_a = ensemble.n_qubits / 2;
    ensemble
        .states
        .par_iter()
        .map(|s| Ok(bipartite_schmidt_truncated(s, n_a, SCHMIDT_TAIL)?.entropy_bits()))
        .collect()
}

/// Unweighted average entropy over all states, pooled and per sector,
/// divided by `log2(N_A + 1)`.
pub fn average_ee_ratio(ensemble: &EigenstateEnsemble) -> Result<ScalingPoint> {
    if ensemble.is_empty() {
        return Err(Error::arg("empty ensemble"));
    }
    let n_a = ensemble.n_qubits / 2;
    let smax = ((n_a + 1) as f64).log2();
    let entropies = eigenstate_entropies(ensemble)?;
    let mean = |pick: &dyn Fn(&Option<Sector>) -> bool| {
        let (sum, count) = entropies
            .iter()
            .zip(&ensemble.sectors)
            .filter(|(_, s)| pick(s))
            .fold((0.0, 0usize), |(s, c), (e, _)| (s + e, c + 1));
        (count > 0).then(|| sum / count as f64)
    };
    let mean_entropy = mean(&|_| true).expect("nonempty");
    Ok(ScalingPoint {
        n_qubits: ensemble.n_qubits,
        n_a,
        inv_smax: 1.0 / smax,
        mean_entropy,
        max_entropy: entropies.iter().copied().fold(0.0, f64::max),
        ratio: mean_entropy / smax,
        ratio_plus: mean(&|s| *s == Some(Sector::Plus)).map(|e| e / smax),
        ratio_minus: mean(&|s| *s == Some(Sector::Minus)).map(|e| e / smax),
    })
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::arg("a line needs at least 2 points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Numeric("abscissae are all equal".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingSeries {
    pub points: Vec<ScalingPoint>,
    /// Ratio against `1/S_max`; the intercept extrapolates to `N → ∞`.
    pub fit: LinearFit,
    pub degenerate: bool,
}

pub fn scaling_series(ns: &[usize], j: &CouplingSpec, m: i64, perturbation: Perturbation) -> Result<ScalingSeries> {
    if ns.len() < 4 {
        return Err(Error::arg("scaling needs at least 4 sizes"));
    }
    let mut points = Vec::with_capacity(ns.len());
    let mut degenerate = false;
    for &n in ns {
        let ensemble = floquet_eigenstates(n, j, m, perturbation)?;
        degenerate |= ensemble.degenerate;
        points.push(average_ee_ratio(&ensemble)?);
    }
    let xs: Vec<f64> = points.iter().map(|p| p.inv_smax).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.ratio).collect();
    Ok(ScalingSeries {
        fit: linear_fit(&xs, &ys)?,
        points,
        degenerate,
    })
}
