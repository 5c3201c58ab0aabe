//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails. An optional argument selects criteria by id prefix.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use ensemble_aqc::dynamics::{
    evolve_individual_dephasing, evolve_lindblad, evolve_pure, fidelity_with_symmetric, trace_distance_to_pure,
    FinalState, IndividualBackend, IndividualOptions, Rates, RunResult, Schedule,
};
use ensemble_aqc::entanglement::{log_negativity, negativity_trace, BipartiteState};
use ensemble_aqc::instances::{
    ferromagnetic_instance, random_instance, random_instance_from, spectrum_example_instance, ProblemInstance,
    SpinConfiguration,
};
use ensemble_aqc::landscape::{
    corner_gap, corner_trajectory_energy, critical_ensemble_size, critical_sizes, delta_gap, derive_seed,
    filtered_instances, fraction_below, ground_gradient, trajectory_energy, unique_ground, NcFilter,
};
use ensemble_aqc::meanfield::{mf_gap, solve_self_consistent};
use ensemble_aqc::spectrum::{default_grid, gap, min_gap, min_gap_statistics};
use ensemble_aqc::symspace::{hz_diagonal, FockBasis, FockIndex};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> (bool, String);

struct Criterion {
    id: &'static str,
    title: &'static str,
    budget: Duration,
    check: Check,
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria = [
        Criterion { id: "c01", title: "ferromagnet N_c table", budget: secs(1), check: c01_ferromagnet_nc },
        Criterion { id: "c02", title: "ferromagnet closed forms", budget: secs(1), check: c02_ferromagnet_closed_forms },
        Criterion { id: "c03", title: "corner equivalence", budget: secs(10), check: c03_corner_equivalence },
        Criterion { id: "c04", title: "landscape theorems", budget: secs(30), check: c04_landscape_theorems },
        Criterion { id: "c05", title: "mean-field endpoint identities", budget: secs(10), check: c05_meanfield_endpoints },
        Criterion { id: "c06", title: "mean-field convergence", budget: secs(120), check: c06_meanfield_convergence },
        Criterion { id: "c07", title: "gap endpoints", budget: secs(60), check: c07_gap_endpoints },
        Criterion { id: "c08", title: "adiabatic success", budget: secs(300), check: c08_adiabatic_success },
        Criterion { id: "c09", title: "Lindblad integrity", budget: secs(600), check: c09_lindblad_integrity },
        Criterion { id: "c10", title: "error-vs-N shape", budget: secs(1800), check: c10_error_vs_n },
        Criterion { id: "c11", title: "individual-dephasing oracle", budget: secs(600), check: c11_individual_dephasing },
        Criterion { id: "c12", title: "negativity anchors", budget: secs(300), check: c12_negativity },
        Criterion { id: "c13", title: "1/N fraction trend", budget: secs(60), check: c13_fraction_trend },
        Criterion { id: "t1", title: "mean min-gap rises with N (N_c = 3 set)", budget: secs(1800), check: t1_mean_gap_trend },
        Criterion { id: "t2", title: "some min-gaps shrink with N (N_c > 7 set)", budget: secs(1800), check: t2_gap_worsens },
        Criterion { id: "t3", title: "mean error falls with N at long sweeps (N_c = 3 set)", budget: secs(2400), check: t3_mean_error_trend },
    ];
    let mut failures = 0;
    for c in criteria.iter().filter(|c| filter.is_empty() || filter.iter().any(|f| c.id.starts_with(f.as_str()))) {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.check));
        let elapsed = start.elapsed();
        let (ok, detail) = outcome.unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        let in_time = elapsed <= c.budget;
        let pass = ok && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "{} {} {}: {} [{:.1} s of {} s{}]",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            detail,
            elapsed.as_secs_f64(),
            c.budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn unique_random(m: usize, count: usize, seed: u64) -> Vec<ProblemInstance> {
    let mut out = Vec::new();
    let mut i = 0;
    while out.len() < count {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i));
        let inst = random_instance_from(m, &mut rng);
        if unique_ground(&inst).is_ok() {
            out.push(inst);
        }
        i += 1;
    }
    out
}

/// Independent evaluation of `sum_ij J_ij s_i s_j + sum_i K_i s_i` over ordered pairs.
fn oracle_corner_energy(inst: &ProblemInstance, s: &[f64]) -> f64 {
    let m = inst.m();
    let rows = inst.coupling_rows();
    let mut e = 0.0;
    for i in 0..m {
        e += inst.biases()[i] * s[i];
        for j in 0..m {
            e += rows[i][j] * s[i] * s[j];
        }
    }
    e
}

/// Largest residual of a least-squares polynomial fit of degree `deg`.
fn fit_residual(xs: &[f64], ys: &[f64], deg: usize) -> f64 {
    let v = DMatrix::from_fn(xs.len(), deg + 1, |r, c| xs[r].powi(c as i32));
    let y = DVector::from_column_slice(ys);
    let coef = v.clone().svd(true, true).solve(&y, 1e-14).expect("least squares");
    (v * coef - y).amax()
}

fn c01_ferromagnet_nc() -> (bool, String) {
    let got: Vec<usize> = [0.1, 0.2, 0.3]
        .iter()
        .map(|&k| critical_ensemble_size(&ferromagnetic_instance(3, k).unwrap()).unwrap())
        .collect();
    (got == [14, 8, 5], format!("N_c(K=0.1,0.2,0.3) = {got:?}, expected [14, 8, 5]"))
}

fn c02_ferromagnet_closed_forms() -> (bool, String) {
    let mut worst = 0.0_f64;
    for m in 2..=5 {
        for k in [0.1, 0.2, 0.3, 0.5] {
            let inst = ferromagnetic_instance(m, k).unwrap();
            let delta = delta_gap(&inst).unwrap();
            worst = worst.max((delta - (4.0 * (m as f64 - 1.0) + 2.0 * k)).abs());
            for n in 1..=10 {
                let big = corner_gap(&inst, n).unwrap();
                worst = worst.max((big - 2.0 * k * (n * m) as f64).abs());
            }
        }
    }
    (worst <= 1e-12, format!("max deviation {worst:.2e} (tol 1e-12)"))
}

fn c03_corner_equivalence() -> (bool, String) {
    let mut worst = 0.0_f64;
    for seed in 0..100 {
        let inst = random_instance(3, seed).unwrap();
        for n in 1..=5 {
            let basis = FockBasis::new(3, n).unwrap();
            let diag = hz_diagonal(&inst, &basis);
            for c in 0..8u64 {
                let sigma = SpinConfiguration::from_index(3, c);
                let spins: Vec<f64> = (0..3).map(|i| sigma.get(i)).collect();
                let k: Vec<usize> = spins.iter().map(|&s| if s > 0.0 { 0 } else { n }).collect();
                let flat = basis.flat(&FockIndex::new(k, n).unwrap()).unwrap();
                let expected = n as f64 * oracle_corner_energy(&inst, &spins);
                worst = worst.max((diag[flat] - expected).abs());
            }
        }
    }
    (worst <= 1e-9, format!("max |H_Z - N eps| = {worst:.2e} over 100 instances, N=1..5 (tol 1e-9)"))
}

fn c04_landscape_theorems() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let instances: Vec<ProblemInstance> = (0..500)
        .map(|i| {
            let m = 2 + (i % 5);
            unique_random(m, 1, 4000 + i as u64).remove(0)
        })
        .collect();
    let eps: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let mut min_grad = f64::INFINITY;
    let mut linear_res = 0.0_f64;
    let mut quad_res = 0.0_f64;
    let mut closed_form = 0.0_f64;
    for inst in &instances {
        let sigma = unique_ground(inst).unwrap().sigma_star;
        let m = inst.m();
        min_grad = min_grad.min(ground_gradient(inst, &sigma).unwrap().into_iter().fold(f64::INFINITY, f64::min));
        for k in 0..m {
            let flips: Vec<bool> = (0..m).map(|i| i == k).collect();
            let ys: Vec<f64> = eps.iter().map(|&e| corner_trajectory_energy(inst, &sigma, &flips, e).unwrap()).collect();
            linear_res = linear_res.max(fit_residual(&eps, &ys, 1));
        }
        let flips: Vec<bool> = loop {
            let f: Vec<bool> = (0..m).map(|_| rng.random_bool(0.5)).collect();
            if f.iter().any(|&x| x) {
                break f;
            }
        };
        let ys: Vec<f64> = eps.iter().map(|&e| corner_trajectory_energy(inst, &sigma, &flips, e).unwrap()).collect();
        quad_res = quad_res.max(fit_residual(&eps, &ys, 2));
        for (&e, &y) in eps.iter().zip(&ys) {
            let mut f = 0.0;
            for i in 0..m {
                let ni = flips[i] as u8 as f64;
                f -= 2.0 * inst.k(i) * sigma.get(i) * ni * e;
                for j in 0..m {
                    let nj = flips[j] as u8 as f64;
                    f -= 4.0 * inst.j(i, j) * sigma.get(i) * sigma.get(j) * (ni * e - ni * nj * e * e);
                }
            }
            closed_form = closed_form.max((f - y).abs());
        }
    }
    let mut min_f = f64::INFINITY;
    for _ in 0..10_000 {
        let inst = &instances[rng.random_range(0..instances.len())];
        let sigma = unique_ground(inst).unwrap().sigma_star;
        let m = inst.m();
        let mut alpha: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..=1.0)).collect();
        alpha[rng.random_range(0..m)] = 1.0;
        let e = rng.random_range(0.0..=1.0);
        min_f = min_f.min(trajectory_energy(inst, &sigma, &alpha, e).unwrap());
    }
    let ok = min_grad >= -1e-12 && linear_res <= 1e-10 && quad_res <= 1e-10 && closed_form <= 1e-10 && min_f >= -1e-12;
    (
        ok,
        format!(
            "min gradient {min_grad:.3e}, linear fit {linear_res:.1e}, quadratic fit {quad_res:.1e}, closed form {closed_form:.1e}, min F {min_f:.3e}"
        ),
    )
}

fn c05_meanfield_endpoints() -> (bool, String) {
    let mut worst = 0.0_f64;
    let mut count = 0;
    for m in 2..=6 {
        for inst in unique_random(m, 20, 500 + m as u64) {
            let end = solve_self_consistent(&inst, 1.0).unwrap();
            worst = worst.max((mf_gap(&inst, &end) - delta_gap(&inst).unwrap()).abs());
            let start = solve_self_consistent(&inst, 0.0).unwrap();
            worst = worst.max((mf_gap(&inst, &start) - 2.0).abs());
            count += 1;
        }
    }
    (worst <= 1e-10, format!("max deviation {worst:.2e} over {count} instances (tol 1e-10)"))
}

fn c06_meanfield_convergence() -> (bool, String) {
    let inst = spectrum_example_instance();
    let mut ok = true;
    let mut parts = Vec::new();
    for lambda in [0.5, 0.9] {
        let mf = mf_gap(&inst, &solve_self_consistent(&inst, lambda).unwrap());
        let diffs: Vec<f64> = [3, 5, 7].iter().map(|&n| (gap(&inst, n, lambda).unwrap() - mf).abs()).collect();
        ok &= diffs.windows(2).all(|w| w[1] < w[0]);
        parts.push(format!("lambda {lambda}: mf {mf:.4}, |diff| N=3,5,7 = {:.4}, {:.4}, {:.4}", diffs[0], diffs[1], diffs[2]));
    }
    (ok, parts.join("; "))
}

fn c07_gap_endpoints() -> (bool, String) {
    let mut start = 0.0_f64;
    let mut end = 0.0_f64;
    for inst in unique_random(3, 50, 707) {
        let delta = delta_gap(&inst).unwrap();
        for n in 1..=5 {
            start = start.max((gap(&inst, n, 0.0).unwrap() - 2.0).abs());
            let expected = delta.min(corner_gap(&inst, n).unwrap());
            end = end.max((gap(&inst, n, 1.0).unwrap() - expected).abs());
        }
    }
    (
        start <= 1e-9 && end <= 1e-9,
        format!("max |gap(0) - 2| = {start:.1e}, max |gap(1) - min(Delta, delta)| = {end:.1e} (tol 1e-9)"),
    )
}

fn c08_adiabatic_success() -> (bool, String) {
    let inst = spectrum_example_instance();
    let n = 5;
    let basis = FockBasis::new(3, n).unwrap();
    let sigma = unique_ground(&inst).unwrap().sigma_star;
    let k: Vec<usize> = (0..3).map(|i| if sigma.get(i) > 0.0 { 0 } else { n }).collect();
    let ground = basis.flat(&FockIndex::new(k, n).unwrap()).unwrap();
    let runs: Vec<RunResult> = [100.0, 20.0, 5.0]
        .iter()
        .map(|&tau| evolve_pure(&inst, n, &Schedule::new(tau).unwrap(), None).unwrap())
        .collect();
    let occupation = runs[0].populations[ground];
    let success: Vec<f64> = runs.iter().map(|r| r.success).collect();
    let ok = occupation >= 0.9 && success[0] >= success[1] && success[1] >= success[2];
    (
        ok,
        format!(
            "ground occupation at tau=100: {occupation:.4}; success tau=100,20,5: {:.4}, {:.4}, {:.4}",
            success[0], success[1], success[2]
        ),
    )
}

fn c09_lindblad_integrity() -> (bool, String) {
    let inst = spectrum_example_instance();
    let mut parts = Vec::new();
    let mut ok = true;
    for rates in [Rates::new(1e-4, 0.0).unwrap(), Rates::new(1e-2, 0.0).unwrap(), Rates::new(0.0, 1e-3).unwrap()] {
        match evolve_lindblad(&inst, 3, &Schedule::new(50.0).unwrap(), rates, None) {
            Ok(run) => {
                let d = &run.diagnostics;
                parts.push(format!(
                    "Gz={:.0e} Gx={:.0e}: trace drift {:.1e}, herm {:.1e}, min eig {:.1e}",
                    rates.gamma_z,
                    rates.gamma_x,
                    d.norm_drift,
                    d.hermiticity,
                    d.min_eigenvalue.unwrap()
                ));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("run failed: {e}"));
            }
        }
    }
    let schedule = Schedule::new(100.0).unwrap();
    let pure = evolve_pure(&inst, 5, &schedule, None).unwrap();
    let open = evolve_lindblad(&inst, 5, &schedule, Rates::default(), None).unwrap();
    let (FinalState::Pure(psi), FinalState::Density(rho)) = (&pure.state, &open.state) else {
        return (false, "unexpected state representation".into());
    };
    let distance = trace_distance_to_pure(rho, psi).unwrap();
    ok &= distance <= 1e-8;
    parts.push(format!("Gamma=0 vs pure (N=5, tau=100) trace distance {distance:.1e} (tol 1e-8)"));
    (ok, parts.join("; "))
}

fn c10_error_vs_n() -> (bool, String) {
    let inst = ferromagnetic_instance(3, 0.3).unwrap();
    let schedule = Schedule::new(100.0).unwrap();
    let rates = Rates::new(1e-4, 0.0).unwrap();
    let errors: Vec<f64> = (1..=8)
        .map(|n| evolve_lindblad(&inst, n, &schedule, rates, None).unwrap().error)
        .collect();
    let peak = errors[1..5].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let listed: Vec<String> = errors.iter().map(|e| format!("{e:.4}")).collect();
    (
        errors[7] < peak,
        format!("error N=1..8: [{}]; N=8 {:.4} vs max over N=2..5 {peak:.4}", listed.join(", "), errors[7]),
    )
}

fn c11_individual_dephasing() -> (bool, String) {
    let pair = ferromagnetic_instance(2, 0.2).unwrap();
    let schedule = Schedule::new(100.0).unwrap();
    let pure = evolve_pure(&pair, 2, &schedule, None).unwrap();
    let FinalState::Pure(psi) = &pure.state else {
        return (false, "unexpected state representation".into());
    };
    let full = evolve_individual_dephasing(
        &pair,
        2,
        &schedule,
        0.0,
        IndividualOptions {
            backend: IndividualBackend::FullSpace,
            ..IndividualOptions::default()
        },
    )
    .unwrap();
    let fidelity = fidelity_with_symmetric(&pair, &full, psi).unwrap();
    let mut ok = fidelity >= 1.0 - 1e-8;
    let mut parts = vec![format!("Gamma=0 full-space fidelity 1 - {:.1e}", 1.0 - fidelity)];
    for k in [0.1, 0.2, 0.3] {
        let ferro = ferromagnetic_instance(3, k).unwrap();
        let errors: Vec<f64> = (1..=4)
            .map(|n| evolve_individual_dephasing(&ferro, n, &schedule, 1e-4, IndividualOptions::default()).unwrap().error)
            .collect();
        // K = 0.1 has N_c = 14, so N <= 4 lies in the regime where errors may still grow.
        if k > 0.15 {
            ok &= errors[3] < errors[0];
        }
        let listed: Vec<String> = errors.iter().map(|e| format!("{e:.4}")).collect();
        parts.push(format!("K={k} Gamma_z=1e-4 error N=1..4: [{}]", listed.join(", ")));
    }
    (ok, parts.join("; "))
}

fn c12_negativity() -> (bool, String) {
    let c = |re: f64| Complex64::new(re, 0.0);
    let h = 0.5f64.sqrt();
    let bell = log_negativity(&BipartiteState::pure(&[c(h), c(0.0), c(0.0), c(h)], 2, 2).unwrap()).unwrap();
    let a = DMatrix::from_row_slice(2, 2, &[c(0.6), c(0.2), c(0.2), c(0.4)]);
    let b = DMatrix::from_row_slice(2, 2, &[c(0.5), Complex64::new(0.0, 0.3), Complex64::new(0.0, -0.3), c(0.5)]);
    let product = log_negativity(&BipartiteState::new(a.kronecker(&b), 2, 2).unwrap()).unwrap();
    let inst = ferromagnetic_instance(2, 0.1).unwrap();
    let schedule = Schedule::new(60.0).unwrap();
    let rates = Rates::new(1e-4, 0.0).unwrap();
    let mid: Vec<f64> = (1..=4)
        .map(|n| negativity_trace(&inst, n, &schedule, rates, &[30.0], None).unwrap()[0].log_negativity)
        .collect();
    let ok = product.abs() <= 1e-10 && (bell - 1.0).abs() <= 1e-10 && mid.iter().all(|&v| v > 0.0);
    let listed: Vec<String> = mid.iter().map(|v| format!("{v:.4}")).collect();
    (
        ok,
        format!("product {product:.1e}, Bell {bell:.12}, mid-sweep N=1..4: [{}]", listed.join(", ")),
    )
}

fn c13_fraction_trend() -> (bool, String) {
    let critical = critical_sizes(3, 800, 1313).unwrap();
    let points: Vec<(f64, f64)> = (8..=64)
        .map(|n| (n as f64, fraction_below(&critical, n)))
        .filter(|&(_, f)| f > 0.0)
        .map(|(n, f)| (n.ln(), f.ln()))
        .collect();
    let count = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / count;
    let my = points.iter().map(|p| p.1).sum::<f64>() / count;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (
        (-1.3..=-0.7).contains(&slope),
        format!(
            "log-log slope {slope:.3} over {} sizes (fraction at N=8: {:.4}, N=64: {:.4})",
            points.len(),
            fraction_below(&critical, 8),
            fraction_below(&critical, 64)
        ),
    )
}

fn t1_mean_gap_trend() -> (bool, String) {
    let set = filtered_instances(3, 60, NcFilter::Equals(3), 2626).unwrap();
    let ns: Vec<usize> = (1..=7).collect();
    let stats = min_gap_statistics(&set.instances, &ns, &default_grid()).unwrap();
    let means: Vec<f64> = stats.iter().map(|s| s.mean).collect();
    let ok = means.windows(2).all(|w| w[1] > w[0]);
    let listed: Vec<String> = means.iter().map(|m| format!("{m:.4}")).collect();
    (ok, format!("mean min-gap N=1..7: [{}] ({} rejected draws)", listed.join(", "), set.rejected))
}

fn t2_gap_worsens() -> (bool, String) {
    let set = filtered_instances(3, 20, NcFilter::Above(7), 2727).unwrap();
    let grid = default_grid();
    let mut shrinking = 0;
    for inst in &set.instances {
        let first = min_gap(inst, 1, &grid, false).unwrap().gap_min;
        let last = min_gap(inst, 7, &grid, false).unwrap().gap_min;
        if last < first {
            shrinking += 1;
        }
    }
    (
        shrinking > 0,
        format!("{shrinking} of {} instances have a smaller min-gap at N=7 than at N=1", set.instances.len()),
    )
}

fn t3_mean_error_trend() -> (bool, String) {
    let set = filtered_instances(3, 60, NcFilter::Equals(3), 2626).unwrap();
    let means = |tau: f64| -> Vec<f64> {
        let schedule = Schedule::new(tau).unwrap();
        (1..=7)
            .map(|n| {
                let total: f64 = set
                    .instances
                    .iter()
                    .map(|inst| evolve_pure(inst, n, &schedule, None).unwrap().error)
                    .sum();
                total / set.instances.len() as f64
            })
            .collect()
    };
    let listed = |v: &[f64]| v.iter().map(|m| format!("{m:.2e}")).collect::<Vec<_>>().join(", ");
    let short = means(100.0);
    let long = means(1000.0);
    // Below N_c the error stays at the single-ensemble level; from N_c = 3 on it
    // must sit an order of magnitude lower.
    let floor = long[0].min(long[1]);
    let ok = long[2..].iter().all(|&e| e < 0.1 * floor);
    (
        ok,
        format!("mean error N=1..7 at tau=1000: [{}]; at tau=100: [{}]", listed(&long), listed(&short)),
    )
}
