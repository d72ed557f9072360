//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::time::{Duration, Instant};

use kicked_ising::floquet::{smallest_period, PhaseTable};
use kicked_ising::kicked_top::orbit;
use kicked_ising::oracle::{full_rdm_qubit, full_state_evolve};
use kicked_ising::spectral::{dedup_phases, kth_ratios, DEDUP_TOL, MAX_ORDER};
use kicked_ising::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn params(theta: f64, phi: f64) -> CoherentParams {
    CoherentParams::new(theta, phi).unwrap()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(2..=10usize);
        let p = params(rng.random_range(0.0..PI), rng.random_range(-PI..PI));
        let j = if rng.random_bool(0.5) {
            CouplingSpec::rational(rng.random_range(-30..30), rng.random_range(1..30)).unwrap()
        } else {
            CouplingSpec::real(rng.random_range(-2.0..2.0))
        };
        let m = rng.random_range(1..=4i64);
        let kicks = rng.random_range(0..=50u64);

        let blocks = diagonal_blocks(n, &j, m).unwrap();
        let psi = evolve_parity(&to_parity(&coherent_dicke(p, n).unwrap()), &blocks, kicks).unwrap();
        let ours = single_qubit_rdm(&psi).unwrap();
        let full = full_rdm_qubit(&full_state_evolve(p, n, &j, m as f64 * FRAC_PI_2, kicks).unwrap());
        worst = worst
            .max((ours.population - full.population).abs())
            .max((ours.coherence - full.coherence).norm())
            .max((linear_entropy(&ours) - linear_entropy(&full)).abs())
            .max((von_neumann_entropy(&ours) - von_neumann_entropy(&full)).abs());
    }
    outcome(worst < 1e-11, format!("200 tuples, max deviation {worst:.2e} (tol 1e-11)"))
}

fn criterion_2() -> Outcome {
    let couplings = [
        CouplingSpec::rational(7, 20).unwrap(),
        CouplingSpec::surd(1, 5, 3).unwrap(),
        CouplingSpec::real(1.2345),
    ];
    let mut worst_s = 0.0f64;
    let mut worst_pop = 0.0f64;
    for n in 1..=40usize {
        for j in &couplings {
            let blocks = diagonal_blocks(n, j, 1).unwrap();
            for (theta, phi, start) in [(0.0, 0.0, 1.0), (PI, PI, 0.0), (PI, -PI, 0.0)] {
                let s0 = to_parity(&coherent_dicke(params(theta, phi), n).unwrap());
                for k in 0..=1000u64 {
                    let rdm = single_qubit_rdm(&evolve_parity(&s0, &blocks, k).unwrap()).unwrap();
                    worst_s = worst_s.max(linear_entropy(&rdm)).max(von_neumann_entropy(&rdm));
                    let expected = if k % 2 == 0 { start } else { 1.0 - start };
                    worst_pop = worst_pop.max((rdm.population - expected).abs());
                }
            }
        }
    }
    outcome(
        worst_s < 1e-13 && worst_pop < 1e-14,
        format!("max entropy {worst_s:.2e}, max population error {worst_pop:.2e}"),
    )
}

fn criterion_3() -> Outcome {
    // Three numerators for h <= 6 and two above, 30 fractions in all.
    let mut grid = Vec::new();
    for h in 1..=12i64 {
        let quota = if h <= 6 { 3 } else { 2 };
        let mut taken = 0;
        for r in [1, 5, 7, -3, 11, 13, 2 * h + 1] {
            if taken < quota && num_gcd(r, h) == 1 && !grid.contains(&(r, h)) {
                grid.push((r, h));
                taken += 1;
            }
        }
    }
    let mut mismatches = Vec::new();
    let mut checked = 0;
    for &(r, h) in &grid {
        let j = CouplingSpec::rational(r, h).unwrap();
        for n in 4..=40usize {
            let blocks = diagonal_blocks(n, &j, 1).unwrap();
            let exact = smallest_period(&blocks, 8 * h as u64, 1e-9, false);
            let projective = smallest_period(&blocks, 8 * h as u64, 1e-9, true);
            let want_exact = predicted_period(n, r, h).unwrap();
            let want_proj = predicted_projective_period(n, r, h).unwrap();
            checked += 1;
            if exact != Some(want_exact) || projective != Some(want_proj) {
                mismatches.push(format!("N={n} J={r}/{h}"));
            }
        }
    }
    outcome(
        mismatches.is_empty() && grid.len() == 30,
        format!(
            "{} fractions x N=4..40 ({checked} cases), {} mismatches{}",
            grid.len(),
            mismatches.len(),
            mismatches.first().map(|m| format!(", first {m}")).unwrap_or_default()
        ),
    )
}

fn num_gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn criterion_4() -> Outcome {
    let mut found = Vec::new();
    let mut pass = true;
    for (r, h) in [(1i64, 25i64), (7, 20), (24, 47), (34, 29)] {
        let j = CouplingSpec::rational(r, h).unwrap();
        for n in [7usize, 8, 12] {
            let s = entropy_series(params(FRAC_PI_4, -FRAC_PI_4), n, &j, 1, 4 * h as u64 + 3).unwrap();
            let p = detect_period(&s.linear, 1e-10);
            if p != Some(h as usize) {
                pass = false;
                found.push(format!("J={r}/{h} N={n} -> {p:?}"));
            }
        }
    }
    let detail = if pass {
        "all 12 series have period h".to_string()
    } else {
        format!("mismatches: {}", found.join("; "))
    };
    outcome(pass, detail)
}

fn criterion_5() -> Outcome {
    let mut pass = true;
    let mut worst = String::new();
    let mut max_ratio = 0.0f64;
    for (r, h) in [(1i64, 3i64), (7, 20), (21, 37), (24, 47), (34, 29)] {
        let j = CouplingSpec::rational(r, h).unwrap();
        for n in [100usize, 1000, 10_000] {
            let blocks = diagonal_blocks(n, &j, 1).unwrap();
            for sector in Sector::ALL {
                let Block::Diagonal(table) = blocks.block(sector) else {
                    unreachable!()
                };
                let PhaseTable::Lattice { nums, .. } = table else {
                    unreachable!()
                };
                let mut exact = nums.clone();
                exact.sort_unstable();
                exact.dedup();
                let (dedup, _) = dedup_phases(table.all_radians(), DEDUP_TOL);
                let ratio = exact.len() as f64 / (4 * h) as f64;
                max_ratio = max_ratio.max(ratio);
                if exact.len() > 4 * h as usize || dedup.len() != exact.len() {
                    pass = false;
                    worst = format!("N={n} J={r}/{h}: {} exact, {} dedup", exact.len(), dedup.len());
                }
            }
        }
    }
    outcome(
        pass,
        if pass {
            format!("distinct/4h at most {max_ratio:.3}, dedup agrees")
        } else {
            worst
        },
    )
}

fn ks_report(spectrum: &PhaseSpectrum, limit: f64) -> (bool, String) {
    let levels = unfold(spectrum, Unfolding::Uniform).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for k in 1..=4 {
        let ds = ks_distance(&kth_spacings(&levels, k).unwrap()).unwrap();
        let dr = ks_distance(&kth_ratios(&levels, k).unwrap()).unwrap();
        pass &= ds < limit && dr < limit;
        parts.push(format!("k={k} s={ds:.4} r={dr:.4}"));
    }
    (pass, parts.join(", "))
}

fn criterion_6() -> Outcome {
    let j = CouplingSpec::surd(1, 5, 3).unwrap();
    let s = eigenphases(100_000, &j, 1, SectorChoice::Plus).unwrap();
    let (pass, detail) = ks_report(&s, 0.01);
    outcome(pass, format!("N=1e5 plus sector, KS {detail} (tol 0.01)"))
}

fn criterion_7() -> Outcome {
    let j = CouplingSpec::surd(1, 5, 3).unwrap();
    let s = eigenphases(40_000, &j, 1, SectorChoice::Plus).unwrap();
    let r = mean_adjacent_ratio(&unfold(&s, Unfolding::Uniform).unwrap()).unwrap();
    outcome(
        (r.mean - 0.386).abs() <= 0.010,
        format!("<r> = {:.4} over {} ratios (target 0.386 +- 0.010)", r.mean, r.samples),
    )
}

fn criterion_8() -> Outcome {
    let s = perturbed_rational_spectrum(10_000, 21, 37, 1e-5, SectorChoice::Plus).unwrap();
    let distinct = s.max_multiplicity() == 1;
    let (fits, detail) = ks_report(&s, 0.015);
    outcome(
        distinct && fits,
        format!(
            "{} distinct of {} levels (max multiplicity {}), KS {detail} (tol 0.015)",
            s.distinct(),
            s.total(),
            s.max_multiplicity()
        ),
    )
}

fn criterion_9() -> Outcome {
    let ns: Vec<usize> = (3..=11).map(|e| 1usize << e).collect();
    let delta = Perturbation::new(PerturbParam::Tau, 1e-10).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    let mut slowest = Duration::ZERO;
    for (label, j) in [
        ("1", CouplingSpec::rational(1, 1).unwrap()),
        ("1/2", CouplingSpec::rational(1, 2).unwrap()),
        ("sqrt(5)/3", CouplingSpec::surd(1, 5, 3).unwrap()),
    ] {
        let mut points = Vec::new();
        for &n in &ns {
            let t = Instant::now();
            let ens = floquet_eigenstates(n, &j, 1, delta).unwrap();
            points.push(average_ee_ratio(&ens).unwrap());
            slowest = slowest.max(t.elapsed());
        }
        let below = points.iter().all(|p| p.ratio < 0.9);
        let monotone = points.windows(2).all(|w| w[1].ratio <= w[0].ratio + 1e-3);
        let xs: Vec<f64> = points.iter().map(|p| p.inv_smax).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.ratio).collect();
        let fit = linear_fit(&xs, &ys).unwrap();
        let intercept_ok = fit.intercept > 0.0 && fit.intercept < 1.0;
        pass &= below && monotone && intercept_ok;
        parts.push(format!(
            "J={label}: ratio {:.4}..{:.4}, intercept {:.4}",
            ys[0],
            ys[ys.len() - 1],
            fit.intercept
        ));
    }
    pass &= slowest < Duration::from_secs(30 * 60);
    outcome(
        pass,
        format!("{}; slowest size {:.1}s", parts.join("; "), slowest.as_secs_f64()),
    )
}

fn criterion_10() -> Outcome {
    let mut worst = 0.0f64;
    for kind in [SampleKind::Spacing, SampleKind::Ratio] {
        for k in 1..=MAX_ORDER {
            worst = worst.max((quadrature(kind, k) - 1.0).abs());
        }
    }
    let at_one = reference_pdf(SampleKind::Ratio, 1, 1.0).unwrap();
    outcome(
        worst < 1e-10 && at_one == 0.25,
        format!("max |integral - 1| = {worst:.2e}, P(r=1) = {at_one}"),
    )
}

/// Composite Gauss-Legendre over `[0, 60]` plus, for ratios, the tail mapped
/// through `r = 1/t`.
fn quadrature(kind: SampleKind, k: usize) -> f64 {
    let nodes = [
        (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
        (-0.538_469_310_105_683, 0.478_628_670_499_366_5),
        (0.0, 0.568_888_888_888_888_9),
        (0.538_469_310_105_683, 0.478_628_670_499_366_5),
        (0.906_179_845_938_664, 0.236_926_885_056_189_1),
    ];
    let integrate = |f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize| {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let mid = a + (i as f64 + 0.5) * h;
                nodes.iter().map(|(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
            })
            .sum::<f64>()
    };
    let pdf = |x: f64| reference_pdf(kind, k, x).unwrap();
    match kind {
        SampleKind::Spacing => integrate(&pdf, 0.0, 60.0, 6000),
        SampleKind::Ratio => {
            // Substituting r = 1/t maps (1, inf) onto (0, 1).
            let tail = |t: f64| if t == 0.0 { 0.0 } else { pdf(1.0 / t) / (t * t) };
            integrate(&pdf, 0.0, 1.0, 2000) + integrate(&tail, 0.0, 1.0, 2000)
        }
    }
}

fn criterion_11() -> Outcome {
    // k' = 0 is a rotation by p about Y; p = 2π/7 closes after 7 steps.
    let rot = TopParams::new(2.0 * PI / 7.0, 0.0).unwrap();
    let start = BlochPoint::new(0.3, -0.4, 0.8).unwrap();
    let o = orbit(start, rot, 7);
    let last = o[6];
    let closure = ((last.x - start.x).powi(2) + (last.y - start.y).powi(2) + (last.z - start.z).powi(2)).sqrt();
    let at_pi = lle_estimate(TopParams::new(PI, 12.5).unwrap(), LleMode::Analytic).unwrap();
    let mut parts = vec![format!("closure {closure:.1e}, LLE(p=pi) {at_pi}")];
    let mut numeric_ok = true;
    for k in [3.0, 5.0, 10.0] {
        let tp = TopParams::new(2.0, k).unwrap();
        let analytic = lle_estimate(tp, LleMode::Analytic).unwrap();
        let numeric = lle_estimate(
            tp,
            LleMode::TwoTrajectory {
                steps: 20_000,
                separation: 1e-9,
            },
        )
        .unwrap();
        numeric_ok &= (numeric - analytic).abs() <= 0.1;
        parts.push(format!("k'={k}: numeric {numeric:.4} analytic {analytic:.4}"));
    }
    outcome(
        closure < 1e-10 && at_pi == 0.0 && numeric_ok,
        parts.join(", "),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("oracle equivalence", criterion_1),
        ("special states", criterion_2),
        ("unitary periodicity", criterion_3),
        ("entanglement periodicity", criterion_4),
        ("degeneracy", criterion_5),
        ("spectral statistics", criterion_6),
        ("mean gap ratio", criterion_7),
        ("perturbed rational", criterion_8),
        ("eigenstate entanglement", criterion_9),
        ("reference densities", criterion_10),
        ("classical bridge", criterion_11),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = format!("criterion_{}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| id.contains(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        failures += usize::from(!o.pass);
        println!(
            "{verdict} {:>2} {name} [{:.1}s]: {}",
            i + 1,
            t.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
