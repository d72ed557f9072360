use std::f64::consts::FRAC_PI_2;

use kicked_ising::eigenstate::{EigenstateEnsemble, PerturbParam};
use kicked_ising::floquet::smallest_period;
use kicked_ising::kicked_top::orbit;
use kicked_ising::oracle::{full_rdm_qubit, full_state_evolve, parity_commutation_check, MAX_DENSE_QUBITS, MAX_QUBITS};
use kicked_ising::spectral::{histogram, kth_ratios, SampleKind, GOE_MEAN_RATIO, POISSON_MEAN_RATIO};
use kicked_ising::*;
use serde::Serialize;

use crate::config::{Command, RunConfig};
use crate::output::Table;

/// Result of one command: a serialized summary and the table for `--out`.
pub struct Report {
    pub summary: serde_json::Value,
    pub table: Table,
    /// Set when the command ran but a check it performs did not hold.
    pub failure: Option<Error>,
}

fn report<S: Serialize>(summary: S, table: Table) -> Result<Report> {
    Ok(Report {
        summary: serde_json::to_value(summary).map_err(|e| Error::Numeric(format!("summary: {e}")))?,
        table,
        failure: None,
    })
}

pub fn run(cfg: &RunConfig) -> Result<Report> {
    match cfg.command {
        Command::EntropySeries => entropy(cfg),
        Command::Period => period(cfg),
        Command::Spectrum => spectrum(cfg),
        Command::Spacings => samples(cfg, SampleKind::Spacing),
        Command::Ratios => samples(cfg, SampleKind::Ratio),
        Command::Rbar => rbar(cfg),
        Command::EigenstateEe => eigenstate_ee(cfg),
        Command::QktMap => qkt_map(cfg),
        Command::OracleCheck => oracle_check(cfg),
    }
}

fn coherent(cfg: &RunConfig) -> Result<CoherentParams> {
    CoherentParams::new(cfg.theta0.unwrap_or(0.0), cfg.phi0.unwrap_or(0.0))
}

#[derive(Serialize)]
struct SeriesSummary {
    n_qubits: usize,
    detected_period: Option<usize>,
    operator_period: Option<u64>,
    final_linear: f64,
}

fn entropy(cfg: &RunConfig) -> Result<Report> {
    let params = coherent(cfg)?;
    let kicks = cfg.kicks.unwrap_or(0);
    let mut table = Table::new(&["n_qubits", "kick", "linear", "von_neumann"]);
    let mut series = Vec::new();
    for &n in &cfg.ns {
        let s = entropy_series(params, n, &cfg.coupling, cfg.tau_m, kicks)?;
        for ((k, l), v) in s.kicks.iter().zip(&s.linear).zip(&s.von_neumann) {
            table.push(vec![n.into(), (*k).into(), (*l).into(), (*v).into()]);
        }
        series.push(SeriesSummary {
            n_qubits: n,
            detected_period: detect_period(&s.linear, 1e-10),
            operator_period: operator_period(n, &cfg.coupling, cfg.tau_m)?,
            final_linear: *s.linear.last().expect("nonempty"),
        });
    }
    report(serde_json::json!({ "theta0": params.theta0, "phi0": params.phi0, "kicks": kicks, "series": series }), table)
}

#[derive(Serialize)]
struct PeriodRow {
    n_qubits: usize,
    operator_period: Option<u64>,
    projective_period: Option<u64>,
    measured_period: Option<u64>,
    measured_projective_period: Option<u64>,
}

fn period(cfg: &RunConfig) -> Result<Report> {
    let mut table = Table::new(&[
        "n_qubits",
        "operator_period",
        "projective_period",
        "measured_period",
        "measured_projective_period",
    ]);
    let mut rows = Vec::new();
    for &n in &cfg.ns {
        let row = match cfg.coupling.as_rational() {
            Some((r, h)) => {
                let m = cfg.tau_m as u64;
                let reduce = |p: u64| p / gcd(p, m);
                let blocks = diagonal_blocks(n, &cfg.coupling, cfg.tau_m)?;
                let limit = 4 * h as u64;
                PeriodRow {
                    n_qubits: n,
                    operator_period: operator_period(n, &cfg.coupling, cfg.tau_m)?,
                    projective_period: Some(reduce(predicted_projective_period(n, r, h)?)),
                    measured_period: smallest_period(&blocks, limit, 1e-9, false),
                    measured_projective_period: smallest_period(&blocks, limit, 1e-9, true),
                }
            }
            None => PeriodRow {
                n_qubits: n,
                operator_period: None,
                projective_period: None,
                measured_period: None,
                measured_projective_period: None,
            },
        };
        table.push(vec![
            n.into(),
            row.operator_period.into(),
            row.projective_period.into(),
            row.measured_period.into(),
            row.measured_projective_period.into(),
        ]);
        rows.push(row);
    }
    report(serde_json::json!({ "periods": rows }), table)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Serialize)]
struct SpectrumRow {
    n_qubits: usize,
    distinct: usize,
    total: usize,
    max_multiplicity: usize,
    precision_bound: f64,
}

fn spectra(cfg: &RunConfig) -> Result<Vec<PhaseSpectrum>> {
    let j = cfg.effective_coupling();
    cfg.ns.iter().map(|&n| eigenphases(n, &j, cfg.tau_m, cfg.sector)).collect()
}

fn spectrum(cfg: &RunConfig) -> Result<Report> {
    let mut table = Table::new(&["n_qubits", "index", "phase", "multiplicity"]);
    let mut rows = Vec::new();
    for s in spectra(cfg)? {
        for (i, (p, m)) in s.phases.iter().zip(&s.multiplicities).enumerate() {
            table.push(vec![s.n_qubits.into(), i.into(), (*p).into(), (*m).into()]);
        }
        rows.push(SpectrumRow {
            n_qubits: s.n_qubits,
            distinct: s.distinct(),
            total: s.total(),
            max_multiplicity: s.max_multiplicity(),
            precision_bound: s.precision_bound,
        });
    }
    report(serde_json::json!({ "sector": cfg.sector.as_str(), "spectra": rows }), table)
}

#[derive(Serialize)]
struct SampleRow {
    n_qubits: usize,
    samples: usize,
    filtered: usize,
    mean: f64,
    ks_distance: f64,
}

fn samples(cfg: &RunConfig, kind: SampleKind) -> Result<Report> {
    let mut table = Table::new(&["n_qubits", "center", "empirical", "reference"]);
    let mut rows = Vec::new();
    let (lo, hi) = kind.default_range();
    for s in spectra(cfg)? {
        let levels = unfold(&s, cfg.unfold)?;
        let set = match kind {
            SampleKind::Spacing => kth_spacings(&levels, cfg.k)?,
            SampleKind::Ratio => kth_ratios(&levels, cfg.k)?,
        };
        for b in histogram(&set, cfg.bins, lo, hi)? {
            table.push(vec![s.n_qubits.into(), b.center.into(), b.empirical.into(), b.reference.into()]);
        }
        rows.push(SampleRow {
            n_qubits: s.n_qubits,
            samples: set.values.len(),
            filtered: set.filtered,
            mean: set.mean(),
            ks_distance: ks_distance(&set)?,
        });
    }
    report(
        serde_json::json!({
            "kind": kind.as_str(),
            "k": cfg.k,
            "sector": cfg.sector.as_str(),
            "results": rows,
        }),
        table,
    )
}

#[derive(Serialize)]
struct RbarRow {
    n_qubits: usize,
    r_mean: f64,
    samples: usize,
    filtered: usize,
}

fn rbar(cfg: &RunConfig) -> Result<Report> {
    let mut table = Table::new(&["n_qubits", "r_mean", "samples", "filtered"]);
    let mut rows = Vec::new();
    for s in spectra(cfg)? {
        let r = mean_adjacent_ratio(&unfold(&s, cfg.unfold)?)?;
        table.push(vec![s.n_qubits.into(), r.mean.into(), r.samples.into(), r.filtered.into()]);
        rows.push(RbarRow {
            n_qubits: s.n_qubits,
            r_mean: r.mean,
            samples: r.samples,
            filtered: r.filtered,
        });
    }
    report(
        serde_json::json!({
            "sector": cfg.sector.as_str(),
            "poisson": POISSON_MEAN_RATIO,
            "goe": GOE_MEAN_RATIO,
            "results": rows,
        }),
        table,
    )
}

fn eigenstate_ee(cfg: &RunConfig) -> Result<Report> {
    let perturbation = cfg.perturbation.expect("validated");
    let mut table = Table::new(&[
        "n_qubits",
        "n_a",
        "inv_smax",
        "mean_entropy",
        "ratio",
        "ratio_plus",
        "ratio_minus",
    ]);
    let mut points = Vec::new();
    let mut degenerate = false;
    let mut max_residual = 0.0f64;
    for &n in &cfg.ns {
        let ens: EigenstateEnsemble = floquet_eigenstates(n, &cfg.coupling, cfg.tau_m, perturbation)?;
        degenerate |= ens.degenerate;
        max_residual = max_residual.max(ens.max_residual);
        let p = average_ee_ratio(&ens)?;
        table.push(vec![
            p.n_qubits.into(),
            p.n_a.into(),
            p.inv_smax.into(),
            p.mean_entropy.into(),
            p.ratio.into(),
            p.ratio_plus.into(),
            p.ratio_minus.into(),
        ]);
        points.push(p);
    }
    if degenerate {
        eprintln!("warning: degenerate spectrum, the eigenbasis and its average entropy depend on tie-breaking");
    }
    let fit = if points.len() >= 4 {
        let xs: Vec<f64> = points.iter().map(|p| p.inv_smax).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.ratio).collect();
        Some(linear_fit(&xs, &ys)?)
    } else {
        None
    };
    report(
        serde_json::json!({
            "perturb": perturbation.param.as_str(),
            "delta": perturbation.delta,
            "source": if perturbation.param == PerturbParam::J { "diagonal_basis" } else { "dense_diagonalization" },
            "degenerate": degenerate,
            "max_residual": max_residual,
            "points": points.iter().map(|p| serde_json::json!({
                "n_qubits": p.n_qubits,
                "inv_smax": p.inv_smax,
                "ratio": p.ratio,
                "ratio_plus": p.ratio_plus,
                "ratio_minus": p.ratio_minus,
            })).collect::<Vec<_>>(),
            "fit": fit.map(|f| serde_json::json!({ "slope": f.slope, "intercept": f.intercept })),
        }),
        table,
    )
}

fn qkt_map(cfg: &RunConfig) -> Result<Report> {
    let start = BlochPoint::from_angles(cfg.theta0.unwrap_or(0.0), cfg.phi0.unwrap_or(0.0));
    let steps = cfg.kicks.unwrap_or(0) as usize;
    let mut table = Table::new(&["n_qubits", "step", "x", "y", "z"]);
    let mut maps = Vec::new();
    for &n in &cfg.ns {
        let params = map_params(n, &cfg.coupling, cfg.tau_m)?;
        let lle = lle_estimate(params, LleMode::Analytic).ok();
        table.push(vec![n.into(), 0usize.into(), start.x.into(), start.y.into(), start.z.into()]);
        for (i, q) in orbit(start, params, steps).iter().enumerate() {
            table.push(vec![n.into(), (i + 1).into(), q.x.into(), q.y.into(), q.z.into()]);
        }
        maps.push(serde_json::json!({
            "n_qubits": n,
            "p": params.p,
            "k_prime": params.k_prime,
            "lle_analytic": lle,
        }));
    }
    report(serde_json::json!({ "maps": maps }), table)
}

const RDM_TOL: f64 = 1e-11;
const COMMUTATOR_TOL: f64 = 1e-12;
/// Off-lattice interval for the dense-block comparison.
const GENERIC_TAU: f64 = 0.731;

fn oracle_check(cfg: &RunConfig) -> Result<Report> {
    let kicks = cfg.kicks.unwrap_or(20);
    let mut table = Table::new(&["n_qubits", "check", "max_deviation", "tolerance", "pass"]);
    let mut all_pass = true;
    let mut checks = Vec::new();
    for &n in &cfg.ns {
        if n > MAX_QUBITS {
            return Err(Error::Resource(format!("oracle-check is limited to N <= {MAX_QUBITS}")));
        }
        let blocks = diagonal_blocks(n, &cfg.coupling, cfg.tau_m)?;
        let dense = general_tau_blocks(n, &cfg.coupling, GENERIC_TAU)?;
        let mut lattice = 0.0f64;
        let mut generic = 0.0f64;
        for (theta, phi) in [(0.0, 0.0), (0.4, -1.2), (1.3, 0.7), (2.2, 2.9), (std::f64::consts::PI, 1.0)] {
            let params = CoherentParams::new(theta, phi)?;
            let s0 = to_parity(&coherent_dicke(params, n)?);
            for k in 0..=kicks {
                let ours = single_qubit_rdm(&evolve_parity(&s0, &blocks, k)?)?;
                let full = full_rdm_qubit(&full_state_evolve(params, n, &cfg.coupling, cfg.tau_m as f64 * FRAC_PI_2, k)?);
                lattice = lattice.max(rdm_gap(&ours, &full));
            }
            let ours = single_qubit_rdm(&evolve_parity(&s0, &dense, kicks.min(20))?)?;
            let full = full_rdm_qubit(&full_state_evolve(params, n, &cfg.coupling, GENERIC_TAU, kicks.min(20))?);
            generic = generic.max(rdm_gap(&ours, &full));
        }
        let mut results = vec![("rdm_lattice", lattice, RDM_TOL), ("rdm_generic_tau", generic, RDM_TOL)];
        if n <= MAX_DENSE_QUBITS {
            results.push((
                "parity_commutator",
                parity_commutation_check(n, &cfg.coupling, cfg.tau_m as f64 * FRAC_PI_2)?,
                COMMUTATOR_TOL,
            ));
        }
        for (name, dev, tol) in results {
            let pass = dev <= tol;
            all_pass &= pass;
            table.push(vec![n.into(), name.into(), dev.into(), tol.into(), pass.into()]);
            checks.push(serde_json::json!({
                "n_qubits": n,
                "check": name,
                "max_deviation": dev,
                "tolerance": tol,
                "pass": pass,
            }));
        }
    }
    let mut r = report(serde_json::json!({ "all_pass": all_pass, "checks": checks }), table)?;
    if !all_pass {
        r.failure = Some(Error::Numeric("oracle comparison exceeded tolerance".into()));
    }
    Ok(r)
}

fn rdm_gap(a: &SingleQubitRdm, b: &SingleQubitRdm) -> f64 {
    (a.population - b.population)
        .abs()
        .max((a.coherence - b.coherence).norm())
        .max((linear_entropy(a) - linear_entropy(b)).abs())
        .max((von_neumann_entropy(a) - von_neumann_entropy(b)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::Cell;

    #[test]
    fn gcd_basics() {
        assert_eq!(gcd(12, 8), 4);
        assert_eq!(gcd(7, 1), 1);
    }

    #[test]
    fn cell_conversion() {
        assert_eq!(Cell::from(None::<u64>), Cell::Empty(None));
        assert_eq!(Cell::from(Some(3u64)), Cell::Int(3));
    }
}
