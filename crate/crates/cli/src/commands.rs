use std::path::Path;

use ensemble_aqc::dynamics::{
    batch_errors, evolve_individual_dephasing, evolve_lindblad, evolve_pure, final_distribution, IndividualBackend,
    IndividualOptions, NoiseModel, Rates, RunResult, Schedule,
};
use ensemble_aqc::entanglement::negativity_trace;
use ensemble_aqc::instances::{
    exact_cover_instance, ferromagnetic_instance, landscape_example_instance, random_instance,
    spectrum_example_instance,
};
use ensemble_aqc::landscape::{
    corner_gap, corner_trajectory_energy, derive_seed, filtered_instances, summarize, unique_ground, NcFilter,
};
use ensemble_aqc::meanfield::mf_gap_curve;
use ensemble_aqc::spectrum::{min_gap, min_gap_statistics, spectrum_scan, uniform_grid};
use ensemble_aqc::ProblemInstance;
use log::info;

use crate::args::*;
use crate::error::CliError;
use crate::output::{destination, emit, num, Header, Table};

/// Largest `M` for which every corner-to-corner trajectory is written.
const CURVE_SPIN_LIMIT: usize = 12;

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let clock = !cli.no_clock;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Gen(a) => gen(a, out),
        Command::Landscape(a) => landscape(a, out, clock),
        Command::Spectrum(a) => spectrum(a, out, clock),
        Command::Mingap(a) => mingap(a, out, clock),
        Command::Meanfield(a) => meanfield(a, out, clock),
        Command::Anneal(a) => anneal(a, out, clock),
        Command::Batch(a) => batch(a, out, clock),
        Command::Negativity(a) => negativity(a, out, clock),
    }
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn load_instance(a: &InstanceArgs) -> Result<ProblemInstance, CliError> {
    if let Some(path) = &a.instance {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        return Ok(ProblemInstance::from_json(&text)?);
    }
    Ok(match a.family.unwrap_or(Family::Random) {
        Family::Random => random_instance(a.m, a.seed)?,
        Family::Ferro => ferromagnetic_instance(a.m, a.k)?,
        Family::ExactCover => exact_cover_instance(),
        Family::SpectrumExample => spectrum_example_instance(),
        Family::LandscapeExample => landscape_example_instance(),
    })
}

fn compact(inst: &ProblemInstance) -> String {
    let value: serde_json::Value = serde_json::from_str(&inst.to_json()).expect("instance JSON parses");
    value.to_string()
}

fn instance_header<C: serde::Serialize>(
    command: &str,
    cfg: &C,
    source: &InstanceArgs,
    inst: &ProblemInstance,
    clock: bool,
) -> Result<Header, CliError> {
    let mut h = Header::new(command, cfg, source.seed, clock)?;
    h.push(format!("instance: {}", compact(inst)));
    Ok(h)
}

fn check_grid(points: usize) -> Result<Vec<f64>, CliError> {
    if points < 2 {
        return Err(config(format!("grid needs at least 2 points, got {points}")));
    }
    Ok(uniform_grid(points))
}

fn check_rate(name: &str, v: f64) -> Result<(), CliError> {
    if !v.is_finite() || v < 0.0 {
        return Err(config(format!("{name} must be finite and non-negative, got {v}")));
    }
    Ok(())
}

fn parse_filter(s: &str) -> Result<NcFilter, CliError> {
    Ok(s.parse::<NcFilter>()?)
}

fn write_side(path: &Path, header: &Header, body: String) -> Result<(), CliError> {
    emit(Some(path), Some(header), &body)
}

fn gen(a: &GenArgs, out: Option<&Path>) -> Result<(), CliError> {
    let inst = load_instance(&a.instance)?;
    let mut doc = inst.to_json();
    doc.push('\n');
    emit(destination(out, "gen", "json").as_deref(), None, &doc)
}

fn landscape(a: &LandscapeArgs, out: Option<&Path>, clock: bool) -> Result<(), CliError> {
    if a.eps_points < 2 {
        return Err(config("eps-points must be at least 2"));
    }
    let inst = load_instance(&a.instance)?;
    if a.curve_out.is_some() && inst.m() > CURVE_SPIN_LIMIT {
        return Err(CliError::Guard(format!(
            "trajectory export enumerates 2^M corners; M = {} exceeds {CURVE_SPIN_LIMIT}",
            inst.m()
        )));
    }
    let header = instance_header("landscape", a, &a.instance, &inst, clock)?;
    let s = summarize(&inst, 1)?;
    let g = &s.ground;
    let undefined = || "undefined".to_string();
    let mut report = String::new();
    let spins: Vec<String> = g.sigma_star.spins().iter().map(|v| format!("{v:+}")).collect();
    report.push_str(&format!("sigma_star = {}\n", spins.join(",")));
    report.push_str(&format!("eps0 = {}\n", num(g.eps0)));
    report.push_str(&format!("eps1 = {}\n", g.eps1.map(num).unwrap_or_else(undefined)));
    report.push_str(&format!("ground_multiplicity = {}\n", g.ground_multiplicity));
    report.push_str(&format!("excited_multiplicity = {}\n", g.excited_multiplicity));
    report.push_str(&format!("delta = {}\n", s.delta.map(num).unwrap_or_else(undefined)));
    report.push_str(&format!(
        "N_c = {}\n",
        s.critical_size.map(|v| v.to_string()).unwrap_or_else(undefined)
    ));
    for &n in &a.n.0 {
        let big = if g.eps1.is_some() { num(corner_gap(&inst, n)?) } else { undefined() };
        report.push_str(&format!("Delta[N={n}] = {big}\n"));
    }

    if let Some(path) = &a.curve_out {
        let ground = unique_ground(&inst)?;
        let m = inst.m();
        let mut t = Table::new(&["flips", "eps", "f"])?;
        for mask in 1u64..(1 << m) {
            let flips: Vec<bool> = (0..m).map(|i| (mask >> (m - 1 - i)) & 1 == 1).collect();
            let label: String = flips.iter().map(|&f| if f { '1' } else { '0' }).collect();
            for p in 0..a.eps_points {
                let eps = p as f64 / (a.eps_points - 1) as f64;
                let f = corner_trajectory_energy(&inst, &ground.sigma_star, &flips, eps)?;
                t.row(&[label.clone(), num(eps), num(f)])?;
            }
        }
        write_side(path, &header, t.into_string()?)?;
    }
    emit(destination(out, "landscape", "txt").as_deref(), Some(&header), &report)
}

fn spectrum(a: &SpectrumArgs, out: Option<&Path>, clock: bool) -> Result<(), CliError> {
    if a.n == 0 {
        return Err(config("N must be positive"));
    }
    if a.levels < 2 {
        return Err(config("levels must be at least 2"));
    }
    let grid = check_grid(a.grid)?;
    let inst = load_instance(&a.instance)?;
    let header = instance_header("spectrum", a, &a.instance, &inst, clock)?;
    let slices = spectrum_scan(&inst, a.n, &grid, a.levels)?;
    let levels = slices[0].energies.len();
    let mut columns = vec!["lambda".to_string()];
    columns.extend((0..levels).map(|l| format!("E{l}")));
    columns.push("gap".into());
    let mut t = Table::new(&columns)?;
    for s in &slices {
        let mut row = vec![num(s.lambda)];
        row.extend(s.energies.iter().map(|&e| num(e)));
        row.push(num(s.gap));
        t.row(&row)?;
    }
    emit(destination(out, "spectrum", "csv").as_deref(), Some(&header), &t.into_string()?)
}

fn mingap(a: &MingapArgs, out: Option<&Path>, clock: bool) -> Result<(), CliError> {
    let grid = check_grid(a.grid)?;
    let dest = destination(out, "mingap", "csv");
    if let Some(f) = &a.filter_nc {
        let filter = parse_filter(f)?;
        if a.count == 0 {
            return Err(config("count must be positive"));
        }
        let set = filtered_instances(a.instance.m, a.count, filter, a.instance.seed)?;
        info!("N_c {filter} set: {} accepted, {} rejected", set.instances.len(), set.rejected);
        let mut header = Header::new("mingap", a, a.instance.seed, clock)?;
        header.push(format!("rejected_draws: {}", set.rejected));
        let stats = min_gap_statistics(&set.instances, &a.n.0, &grid)?;
        let mut t = Table::new(&["N", "mean", "best", "worst"])?;
        for s in stats {
            t.row(&[s.n.to_string(), num(s.mean), num(s.best), num(s.worst)])?;
        }
        return emit(dest.as_deref(), Some(&header), &t.into_string()?);
    }
    let inst = load_instance(&a.instance)?;
    let header = instance_header("mingap", a, &a.instance, &inst, clock)?;
    let mut t = if a.summary {
        Table::new(&["N", "lambda_star", "gap_min"])?
    } else {
        Table::new(&["N", "lambda", "gap"])?
    };
    for &n in &a.n.0 {
        let mg = min_gap(&inst, n, &grid, a.refine)?;
        if a.summary {
            t.row(&[n.to_string(), num(mg.lambda_star), num(mg.gap_min)])?;
        } else {
            for (lambda, g) in mg.curve {
                t.row(&[n.to_string(), num(lambda), num(g)])?;
            }
        }
    }
    emit(dest.as_deref(), Some(&header), &t.into_string()?)
}

fn meanfield(a: &MeanfieldArgs, out: Option<&Path>, clock: bool) -> Result<(), CliError> {
    let grid = check_grid(a.grid)?;
    let inst = load_instance(&a.instance)?;
    let header = instance_header("meanfield", a, &a.instance, &inst, clock)?;
    let curve = mf_gap_curve(&inst, &grid)?;
    let mut columns = vec!["lambda".to_string()];
    columns.extend((1..=inst.m()).map(|i| format!("z_{i}")));
    columns.extend(["E_MF_per_N".to_string(), "mf_gap".to_string()]);
    let mut t = Table::new(&columns)?;
    for p in curve {
        let mut row = vec![num(p.solution.lambda)];
        row.extend(p.solution.z.iter().map(|&z| num(z)));
        row.push(num(p.solution.e0_per_n));
        row.push(num(p.gap));
        t.row(&row)?;
    }
    emit(destination(out, "meanfield", "csv").as_deref(), Some(&header), &t.into_string()?)
}

fn check_dynamics(d: &DynamicsArgs) -> Result<(), CliError> {
    check_rate("gamma-z", d.gamma_z)?;
    check_rate("gamma-x", d.gamma_x)?;
    if d.noise == Noise::Individual && d.gamma_x != 0.0 {
        return Err(config("individual noise supports gamma-z only"));
    }
    if d.steps == Some(0) {
        return Err(config("steps must be positive"));
    }
    Ok(())
}

fn run_one(
    inst: &ProblemInstance,
    n: usize,
    schedule: &Schedule,
    d: &DynamicsArgs,
    backend: Backend,
) -> ensemble_aqc::Result<RunResult> {
    match d.noise {
        Noise::Collective => {
            let rates = Rates::new(d.gamma_z, d.gamma_x)?;
            if rates.is_zero() {
                evolve_pure(inst, n, schedule, d.steps)
            } else {
                evolve_lindblad(inst, n, schedule, rates, d.steps)
            }
        }
        Noise::Individual => evolve_individual_dephasing(
            inst,
            n,
            schedule,
            d.gamma_z,
            IndividualOptions {
                steps: d.steps,
                backend: match backend {
                    Backend::Reduced => IndividualBackend::Reduced,
                    Backend::FullSpace => IndividualBackend::FullSpace,
                },
                ..IndividualOptions::default()
            },
        ),
    }
}

fn anneal(a: &AnnealArgs, out: Option<&Path>, clock: bool) -> Result<(), CliError> {
    check_dynamics(&a.dynamics)?;
    if a.backend == Backend::FullSpace && a.dynamics.noise != Noise::Individual {
        return Err(config("the full-space backend applies to individual noise only"));
    }
    let inst = load_instance(&a.instance)?;
    let header = instance_header("anneal", a, &a.instance, &inst, clock)?;
    let mut t = Table::new(&["N", "tau", "Gamma_z", "Gamma_x", "success", "error", "steps", "norm_drift"])?;
    let mut levels = Table::new(&["N", "tau", "level_index", "energy", "probability", "tag"])?;
    for &n in &a.n.0 {
        for &tau in &a.dynamics.tau.0 {
            let schedule = Schedule::new(tau)?;
            let r = run_one(&inst, n, &schedule, &a.dynamics, a.backend)?;
            t.row(&[
                n.to_string(),
                num(tau),
                num(a.dynamics.gamma_z),
                num(a.dynamics.gamma_x),
                num(r.success),
                num(r.error),
                r.diagnostics.steps.to_string(),
                num(r.diagnostics.norm_drift),
            ])?;
            if a.levels_out.is_some() {
                for (i, l) in final_distribution(&r, &inst)?.iter().enumerate() {
                    levels.row(&[
                        n.to_string(),
                        num(tau),
                        i.to_string(),
                        num(l.energy),
                        num(l.probability),
                        l.tag.as_str().to_string(),
                    ])?;
                }
            }
        }
    }
    if let Some(path) = &a.levels_out {
        write_side(path, &header, levels.into_string()?)?;
    }
    emit(destination(out, "anneal", "csv").as_deref(), Some(&header), &t.into_string()?)
}

fn batch(a: &BatchArgs, out: Option<&Path>, clock: bool) -> Result<(), CliError> {
    check_dynamics(&a.dynamics)?;
    if a.count == 0 {
        return Err(config("count must be positive"));
    }
    if a.m == 0 {
        return Err(config("M must be positive"));
    }
    if a.threads == Some(0) {
        return Err(config("threads must be positive"));
    }
    let filter = a.filter_nc.as_deref().map(parse_filter).transpose()?;
    let mut header = Header::new("batch", a, a.seed, clock)?;
    let (instances, indices) = match filter {
        Some(f) => {
            let set = filtered_instances(a.m, a.count, f, a.seed)?;
            info!("N_c {f} set: {} accepted, {} rejected", set.instances.len(), set.rejected);
            header.push(format!("rejected_draws: {}", set.rejected));
            (set.instances, set.sample_indices)
        }
        None => {
            let indices: Vec<u64> = (0..a.count as u64).collect();
            let instances = indices
                .iter()
                .map(|&i| random_instance(a.m, derive_seed(a.seed, i)))
                .collect::<ensemble_aqc::Result<Vec<_>>>()?;
            (instances, indices)
        }
    };
    let noise = match a.dynamics.noise {
        Noise::Collective => NoiseModel::Collective(Rates::new(a.dynamics.gamma_z, a.dynamics.gamma_x)?),
        Noise::Individual => NoiseModel::Individual { gamma_z: a.dynamics.gamma_z },
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Computation(e.to_string()))?;
    let table = pool.install(|| batch_errors(&instances, &a.n.0, &a.dynamics.tau.0, noise, a.dynamics.steps))?;

    let failed: usize = table.means.iter().map(|m| m.failed).sum();
    if failed > 0 {
        log::warn!("{failed} batch cells failed and were excluded from the means");
    }
    let mut t = Table::new(&["N", "tau", "mean_error", "completed", "failed"])?;
    for m in &table.means {
        t.row(&[m.n.to_string(), num(m.tau), num(m.mean_error), m.completed.to_string(), m.failed.to_string()])?;
    }
    if let Some(path) = &a.cells_out {
        let mut cells = Table::new(&["instance", "sample_index", "N", "tau", "error", "failure"])?;
        for c in &table.cells {
            let (err, failure) = match &c.outcome {
                Ok(e) => (num(*e), String::new()),
                Err(msg) => (String::new(), msg.clone()),
            };
            cells.row(&[c.instance.to_string(), indices[c.instance].to_string(), c.n.to_string(), num(c.tau), err, failure])?;
        }
        write_side(path, &header, cells.into_string()?)?;
    }
    emit(destination(out, "batch", "csv").as_deref(), Some(&header), &t.into_string()?)
}

fn negativity(a: &NegativityArgs, out: Option<&Path>, clock: bool) -> Result<(), CliError> {
    check_rate("gamma-z", a.gamma_z)?;
    check_rate("gamma-x", a.gamma_x)?;
    if a.samples < 2 {
        return Err(config("samples must be at least 2"));
    }
    if a.steps == Some(0) {
        return Err(config("steps must be positive"));
    }
    let schedule = Schedule::new(a.tau)?;
    let rates = Rates::new(a.gamma_z, a.gamma_x)?;
    let mut source = a.instance.clone();
    if source.instance.is_none() && source.family.is_none() {
        source.m = 2;
    }
    let inst = load_instance(&source)?;
    if inst.m() != 2 {
        return Err(config(format!("negativity needs M = 2, got M = {}", inst.m())));
    }
    let header = instance_header("negativity", a, &source, &inst, clock)?;
    let times: Vec<f64> = (0..a.samples).map(|i| a.tau * i as f64 / (a.samples - 1) as f64).collect();
    let mut t = Table::new(&["t", "lambda", "log_negativity", "N"])?;
    for &n in &a.n.0 {
        for p in negativity_trace(&inst, n, &schedule, rates, &times, a.steps)? {
            t.row(&[num(p.t), num(p.lambda), num(p.log_negativity), n.to_string()])?;
        }
    }
    emit(destination(out, "negativity", "csv").as_deref(), Some(&header), &t.into_string()?)
}
