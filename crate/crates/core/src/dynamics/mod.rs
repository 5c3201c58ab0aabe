//! Annealing dynamics under the linear schedule `lambda(t) = t / tau`.
//!
//! Three models are provided: Schrödinger evolution in the symmetric subspace,
//! the collective-dephasing master equation in the same space, and independent
//! single-qubit dephasing. The last one is solved either in a permutation-reduced
//! form (exact, used by default) or on the full `2^(NM)` space.
//!
//! All integrations use fixed-step classical RK4 with
//! `dt = min(0.01, tau / 10^4)` unless a step count is given.

mod fullspace;
mod kernel;
mod reduced;

use log::debug;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instances::ProblemInstance;
use crate::landscape::unique_ground;
use crate::spectrum::{classify_levels, LevelTag};
use crate::symspace::{assemble_hx, collective_op, hz_diagonal, majority_label, Axis, FockBasis, MajorityLabel};

use fullspace::FullSpaceModel;
use kernel::{Rk4, Sparse, SplitHamiltonian, C, I};
use reduced::ReducedModel;

/// Largest density-matrix dimension integrated in the symmetric subspace.
pub const DENSITY_DIM_LIMIT: usize = 2048;

/// Default cap on `N M` for individual-qubit dephasing.
pub const DEFAULT_QUBIT_GUARD: usize = 12;

/// Tolerances asserted on every reported density matrix.
pub const TRACE_TOLERANCE: f64 = 1e-6;
pub const HERMITICITY_TOLERANCE: f64 = 1e-8;
pub const POSITIVITY_TOLERANCE: f64 = 1e-8;
/// Largest accepted norm drift of a pure-state run.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// Dimensions above which the final minimum eigenvalue is not computed.
const EIGEN_CHECK_LIMIT: usize = 4096;

/// Linear sweep of duration `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    tau: f64,
}

impl Schedule {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
        }
        Ok(Self { tau })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn lambda(&self, t: f64) -> f64 {
        (t / self.tau).clamp(0.0, 1.0)
    }

    /// Step count for `dt = min(0.01, tau / 10^4)`.
    pub fn default_steps(&self) -> usize {
        let dt = (0.01f64).min(self.tau / 1e4);
        (self.tau / dt).ceil() as usize
    }

    fn resolve(&self, steps: Option<usize>) -> Result<(usize, f64)> {
        let steps = steps.unwrap_or_else(|| self.default_steps());
        if steps == 0 {
            return Err(Error::InvalidArgument("step count must be positive".into()));
        }
        Ok((steps, self.tau / steps as f64))
    }
}

/// Collective dephasing rates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Rates {
    pub gamma_z: f64,
    pub gamma_x: f64,
}

impl Rates {
    pub fn new(gamma_z: f64, gamma_x: f64) -> Result<Self> {
        for (name, g) in [("gamma_z", gamma_z), ("gamma_x", gamma_x)] {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be nonnegative, got {g}")));
            }
        }
        Ok(Self { gamma_z, gamma_x })
    }

    pub fn is_zero(&self) -> bool {
        self.gamma_z == 0.0 && self.gamma_x == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndividualBackend {
    /// Permutation-reduced blocks; exact and far smaller than the full space.
    Reduced,
    /// Explicit `2^(NM)` density matrix.
    FullSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndividualOptions {
    pub steps: Option<usize>,
    pub backend: IndividualBackend,
    pub max_qubits: usize,
}

impl Default for IndividualOptions {
    fn default() -> Self {
        Self {
            steps: None,
            backend: IndividualBackend::Reduced,
            max_qubits: DEFAULT_QUBIT_GUARD,
        }
    }
}

/// Final state of a run.
#[derive(Debug, Clone)]
pub enum FinalState {
    Pure(Vec<Complex64>),
    Density(DMatrix<Complex64>),
    /// `rho = sum_b A_b (x) 1`, listed as (sector per ensemble, multiplicity, `A_b`).
    Reduced(Vec<(Vec<usize>, f64, DMatrix<Complex64>)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub steps: usize,
    pub dt: f64,
    /// `|norm - 1|` for pure states, `|tr rho - 1|` otherwise.
    pub norm_drift: f64,
    pub hermiticity: f64,
    pub min_eigenvalue: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub m: usize,
    pub n: usize,
    pub tau: f64,
    /// Probability of each collective `S^z` outcome, indexed like the Fock basis.
    pub populations: Vec<f64>,
    pub success: f64,
    pub error: f64,
    pub state: FinalState,
    pub diagnostics: Diagnostics,
}

/// Ground state of the driver: every ensemble fully polarized along `+x`.
pub fn initial_state(m: usize, n: usize) -> Result<Vec<Complex64>> {
    let basis = FockBasis::new(m, n)?;
    let single: Vec<f64> = (0..=n)
        .map(|k| {
            let log = ln_binomial(n, k) - n as f64 * std::f64::consts::LN_2;
            (0.5 * log).exp()
        })
        .collect();
    Ok((0..basis.dim())
        .map(|flat| {
            let amp = (0..m).map(|site| single[basis.occupation(flat, site)]).product::<f64>();
            C::new(amp, 0.0)
        })
        .collect())
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

fn collective_hamiltonian(inst: &ProblemInstance, n: usize) -> Result<SplitHamiltonian> {
    let hx = assemble_hx(inst.m(), n)?;
    let basis = hx.basis();
    let rows = (0..basis.dim()).map(|r| hx.row_offdiag(r).collect::<Vec<_>>());
    Ok(SplitHamiltonian {
        hz: hz_diagonal(inst, &basis),
        hx: Sparse::from_rows(basis.dim(), rows),
    })
}

/// Fock states whose majority vote reproduces the qubit ground configuration.
fn equivalent_mask(inst: &ProblemInstance, n: usize) -> Result<Vec<bool>> {
    let ground = unique_ground(inst)?;
    let basis = FockBasis::new(inst.m(), n)?;
    Ok((0..basis.dim())
        .map(|flat| matches!(majority_label(&basis.fock(flat)), MajorityLabel::Resolved(s) if s == ground.sigma_star))
        .collect())
}

fn success_from(mask: &[bool], populations: &[f64]) -> f64 {
    mask.iter()
        .zip(populations)
        .filter(|(m, _)| **m)
        .map(|(_, p)| *p)
        .sum()
}

fn finish(
    inst: &ProblemInstance,
    n: usize,
    schedule: &Schedule,
    mask: &[bool],
    populations: Vec<f64>,
    state: FinalState,
    diagnostics: Diagnostics,
) -> Result<RunResult> {
    let success = success_from(mask, &populations);
    Ok(RunResult {
        m: inst.m(),
        n,
        tau: schedule.tau(),
        populations,
        success,
        error: 1.0 - success,
        state,
        diagnostics,
    })
}

/// Checks trace, Hermiticity and (optionally) positivity of a density matrix.
fn check_density(trace: f64, hermiticity: f64, min_eigenvalue: Option<f64>, t: f64) -> Result<()> {
    if (trace - 1.0).abs() > TRACE_TOLERANCE {
        return Err(Error::Integration(format!("trace {trace} at t = {t}")));
    }
    if hermiticity > HERMITICITY_TOLERANCE {
        return Err(Error::Integration(format!("Hermiticity defect {hermiticity:e} at t = {t}")));
    }
    if let Some(e) = min_eigenvalue {
        if e < -POSITIVITY_TOLERANCE {
            return Err(Error::Integration(format!("negative eigenvalue {e:e} at t = {t}")));
        }
    }
    Ok(())
}

/// Integrates `i d|psi>/dt = H(lambda(t)) |psi>` from the driver ground state.
///
/// Each step evolves under `H - <H>`; the shift only changes the global phase
/// but keeps the RK4 truncation error small.
pub fn evolve_pure(inst: &ProblemInstance, n: usize, schedule: &Schedule, steps: Option<usize>) -> Result<RunResult> {
    let mask = equivalent_mask(inst, n)?;
    let ham = collective_hamiltonian(inst, n)?;
    let (steps, dt) = schedule.resolve(steps)?;
    let mut psi = initial_state(inst.m(), n)?;
    let d = psi.len();
    let mut rk = Rk4::new(d);
    let mut hpsi = vec![C::new(0.0, 0.0); d];
    for s in 0..steps {
        let t = s as f64 * dt;
        ham.apply(schedule.lambda(t), 0.0, &psi, &mut hpsi);
        let shift: f64 = psi.iter().zip(&hpsi).map(|(a, b)| (a.conj() * b).re).sum();
        rk.step(&mut psi, t, dt, |t, x, out| {
            ham.apply(schedule.lambda(t), shift, x, out);
            out.iter_mut().for_each(|v| *v *= -I);
        });
    }
    let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    let drift = (norm - 1.0).abs();
    if drift > NORM_TOLERANCE {
        return Err(Error::Integration(format!(
            "norm drift {drift:e} after {steps} steps; use more steps"
        )));
    }
    let populations = psi.iter().map(|a| a.norm_sqr()).collect();
    let diagnostics = Diagnostics {
        steps,
        dt,
        norm_drift: drift,
        hermiticity: 0.0,
        min_eigenvalue: None,
    };
    finish(inst, n, schedule, &mask, populations, FinalState::Pure(psi), diagnostics)
}

struct CollectiveModel {
    ham: SplitHamiltonian,
    dim: usize,
    rates: Rates,
    /// `sum_i (s_i(a) - s_i(b))^2`, column-major.
    z_weight: Vec<f64>,
    sx: Vec<Sparse>,
    buffers: [Vec<C>; 4],
}

impl CollectiveModel {
    fn new(inst: &ProblemInstance, n: usize, rates: Rates) -> Result<Self> {
        let ham = collective_hamiltonian(inst, n)?;
        let dim = ham.dim();
        if dim > DENSITY_DIM_LIMIT {
            return Err(Error::GuardExceeded {
                what: "density matrix dimension",
                value: dim,
                limit: DENSITY_DIM_LIMIT,
            });
        }
        let basis = FockBasis::new(inst.m(), n)?;
        let z_weight = if rates.gamma_z > 0.0 {
            let mut w = vec![0.0; dim * dim];
            for b in 0..dim {
                for a in 0..dim {
                    w[a + b * dim] = (0..inst.m()).map(|i| (basis.sz(a, i) - basis.sz(b, i)).powi(2)).sum();
                }
            }
            w
        } else {
            Vec::new()
        };
        let sx = if rates.gamma_x > 0.0 {
            (0..inst.m())
                .map(|site| {
                    let op = collective_op(inst.m(), n, site, Axis::X)?;
                    Ok(Sparse::from_rows(dim, (0..dim).map(|r| op.row_offdiag(r).collect::<Vec<_>>())))
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        let zero = vec![C::new(0.0, 0.0); dim * dim];
        Ok(Self {
            ham,
            dim,
            rates,
            z_weight,
            sx,
            buffers: [zero.clone(), zero.clone(), zero.clone(), zero],
        })
    }

    fn rhs(&mut self, lambda: f64, y: &[C], out: &mut [C]) {
        let d = self.dim;
        let [x, xd, z, w] = &mut self.buffers;
        self.ham.commutator(lambda, y, x, out);
        if self.rates.gamma_z > 0.0 {
            let g = 0.5 * self.rates.gamma_z;
            for ((o, &v), &wt) in out.iter_mut().zip(y).zip(&self.z_weight) {
                *o -= v * (g * wt);
            }
        }
        if self.rates.gamma_x > 0.0 {
            let g = 0.5 * self.rates.gamma_x;
            for s in &self.sx {
                apply_sparse_columns(s, y, x);
                for b in 0..d {
                    for a in 0..d {
                        xd[a + b * d] = x[b + a * d].conj();
                    }
                }
                apply_sparse_columns(s, xd, z);
                apply_sparse_columns(s, x, w);
                for b in 0..d {
                    for a in 0..d {
                        let idx = a + b * d;
                        out[idx] -= (w[idx] + w[b + a * d].conj() - z[idx] * 2.0) * g;
                    }
                }
            }
        }
    }
}

fn apply_sparse_columns(op: &Sparse, y: &[C], out: &mut [C]) {
    let d = op.dim();
    for (x, o) in y.chunks_exact(d).zip(out.chunks_exact_mut(d)) {
        op.apply_scaled(1.0, x, 0.0, o);
    }
}

/// A density matrix sampled during a run.
pub struct Sample<'a> {
    pub t: f64,
    pub lambda: f64,
    pub rho: &'a DMatrix<Complex64>,
}

/// Collective-dephasing master equation in the symmetric subspace.
pub fn evolve_lindblad(
    inst: &ProblemInstance,
    n: usize,
    schedule: &Schedule,
    rates: Rates,
    steps: Option<usize>,
) -> Result<RunResult> {
    evolve_lindblad_observed(inst, n, schedule, rates, steps, &[], |_| Ok(()))
}

/// As [`evolve_lindblad`], calling `observer` at the steps closest to each of
/// `sample_times` (in increasing order of time).
pub fn evolve_lindblad_observed<F>(
    inst: &ProblemInstance,
    n: usize,
    schedule: &Schedule,
    rates: Rates,
    steps: Option<usize>,
    sample_times: &[f64],
    mut observer: F,
) -> Result<RunResult>
where
    F: FnMut(Sample<'_>) -> Result<()>,
{
    let mask = equivalent_mask(inst, n)?;
    let mut model = CollectiveModel::new(inst, n, rates)?;
    let (steps, dt) = schedule.resolve(steps)?;
    let d = model.dim;
    let psi = initial_state(inst.m(), n)?;
    let mut rho = vec![C::new(0.0, 0.0); d * d];
    for b in 0..d {
        for a in 0..d {
            rho[a + b * d] = psi[a] * psi[b].conj();
        }
    }
    let mut marks: Vec<usize> = sample_times
        .iter()
        .map(|&t| {
            if !(0.0..=schedule.tau()).contains(&t) {
                return Err(Error::InvalidArgument(format!("sample time {t} outside [0, tau]")));
            }
            Ok(((t / dt).round() as usize).min(steps))
        })
        .collect::<Result<_>>()?;
    marks.sort_unstable();
    let mut next = 0;
    let mut rk = Rk4::new(d * d);
    for s in 0..=steps {
        while next < marks.len() && marks[next] == s {
            let t = s as f64 * dt;
            check_density(
                kernel::trace(d, &rho).re,
                kernel::hermiticity_defect(d, &rho),
                (d <= EIGEN_CHECK_LIMIT).then(|| kernel::min_eigenvalue(d, &rho)),
                t,
            )?;
            let m = DMatrix::from_column_slice(d, d, &rho);
            observer(Sample {
                t,
                lambda: schedule.lambda(t),
                rho: &m,
            })?;
            next += 1;
        }
        if s == steps {
            break;
        }
        let t = s as f64 * dt;
        rk.step(&mut rho, t, dt, |t, y, out| model.rhs(schedule.lambda(t), y, out));
    }
    let trace = kernel::trace(d, &rho).re;
    let hermiticity = kernel::hermiticity_defect(d, &rho);
    let min_eigenvalue = (d <= EIGEN_CHECK_LIMIT).then(|| kernel::min_eigenvalue(d, &rho));
    check_density(trace, hermiticity, min_eigenvalue, schedule.tau())?;
    let populations = (0..d).map(|a| rho[a + a * d].re).collect();
    let diagnostics = Diagnostics {
        steps,
        dt,
        norm_drift: (trace - 1.0).abs(),
        hermiticity,
        min_eigenvalue,
    };
    let state = FinalState::Density(DMatrix::from_column_slice(d, d, &rho));
    finish(inst, n, schedule, &mask, populations, state, diagnostics)
}

/// Master equation with independent dephasing of every qubit at rate `gamma_z`.
/// Success is read from the distribution of collective `S^z` outcomes.
pub fn evolve_individual_dephasing(
    inst: &ProblemInstance,
    n: usize,
    schedule: &Schedule,
    gamma_z: f64,
    options: IndividualOptions,
) -> Result<RunResult> {
    Rates::new(gamma_z, 0.0)?;
    let qubits = n * inst.m();
    if qubits > options.max_qubits {
        return Err(Error::GuardExceeded {
            what: "total qubits",
            value: qubits,
            limit: options.max_qubits,
        });
    }
    let mask = equivalent_mask(inst, n)?;
    let (steps, dt) = schedule.resolve(options.steps)?;
    let psi = initial_state(inst.m(), n)?;
    match options.backend {
        IndividualBackend::Reduced => {
            let model = ReducedModel::new(inst, n)?;
            debug!("reduced dephasing model: {} blocks, {} stored entries", model.blocks.len(), model.len);
            let mut y = model.embed_symmetric(&psi);
            let mut scratch = vec![C::new(0.0, 0.0); model.len];
            let mut rk = Rk4::new(model.len);
            for s in 0..steps {
                let t = s as f64 * dt;
                rk.step(&mut y, t, dt, |t, x, out| model.rhs(schedule.lambda(t), gamma_z, x, &mut scratch, out));
            }
            let trace = model.trace(&y);
            let hermiticity = model.hermiticity_defect(&y);
            let min_eigenvalue = Some(model.min_eigenvalue(&y));
            check_density(trace, hermiticity, min_eigenvalue, schedule.tau())?;
            let diagnostics = Diagnostics {
                steps,
                dt,
                norm_drift: (trace - 1.0).abs(),
                hermiticity,
                min_eigenvalue,
            };
            let populations = model.populations(&y);
            let state = FinalState::Reduced(model.block_matrices(&y));
            finish(inst, n, schedule, &mask, populations, state, diagnostics)
        }
        IndividualBackend::FullSpace => {
            let model = FullSpaceModel::new(inst, n);
            let d = model.dim;
            if d > DENSITY_DIM_LIMIT {
                return Err(Error::GuardExceeded {
                    what: "density matrix dimension",
                    value: d,
                    limit: DENSITY_DIM_LIMIT,
                });
            }
            let mut y = model.initial_density();
            let mut scratch = vec![C::new(0.0, 0.0); d * d];
            let mut rk = Rk4::new(d * d);
            for s in 0..steps {
                let t = s as f64 * dt;
                rk.step(&mut y, t, dt, |t, x, out| model.rhs(schedule.lambda(t), gamma_z, x, &mut scratch, out));
            }
            let trace = kernel::trace(d, &y).re;
            let hermiticity = kernel::hermiticity_defect(d, &y);
            let min_eigenvalue = (d <= EIGEN_CHECK_LIMIT).then(|| kernel::min_eigenvalue(d, &y));
            check_density(trace, hermiticity, min_eigenvalue, schedule.tau())?;
            let diagnostics = Diagnostics {
                steps,
                dt,
                norm_drift: (trace - 1.0).abs(),
                hermiticity,
                min_eigenvalue,
            };
            let populations = model.populations(&y);
            let state = FinalState::Density(DMatrix::from_column_slice(d, d, &y));
            finish(inst, n, schedule, &mask, populations, state, diagnostics)
        }
    }
}

/// Fidelity of a final state with a pure symmetric-subspace state `psi`.
/// Reduced and full-space states are compared through their symmetric embedding.
pub fn fidelity_with_symmetric(inst: &ProblemInstance, result: &RunResult, psi: &[Complex64]) -> Result<f64> {
    let n = result.n;
    match &result.state {
        FinalState::Pure(phi) => {
            check_len(phi.len(), psi.len())?;
            Ok(phi.iter().zip(psi).map(|(a, b)| a.conj() * b).sum::<C>().norm_sqr())
        }
        FinalState::Density(rho) => {
            let v = if rho.nrows() == psi.len() {
                psi.to_vec()
            } else {
                let model = FullSpaceModel::new(inst, n);
                check_len(model.dim, rho.nrows())?;
                model.embed_symmetric(psi)
            };
            let d = v.len();
            let mut f = C::new(0.0, 0.0);
            for b in 0..d {
                for a in 0..d {
                    f += v[a].conj() * rho[(a, b)] * v[b];
                }
            }
            Ok(f.re)
        }
        FinalState::Reduced(blocks) => {
            let (_, _, a) = blocks
                .iter()
                .find(|(s, _, _)| s.iter().all(|&r| r == 0))
                .ok_or_else(|| Error::Shape("reduced state without symmetric block".into()))?;
            check_len(a.nrows(), psi.len())?;
            let mut f = C::new(0.0, 0.0);
            for b in 0..psi.len() {
                for r in 0..psi.len() {
                    f += psi[r].conj() * a[(r, b)] * psi[b];
                }
            }
            Ok(f.re)
        }
    }
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::Shape(format!("state dimension {a} does not match {b}")))
    }
}

/// Trace distance `||rho - |psi><psi| ||_1 / 2` between a density matrix and a pure state.
pub fn trace_distance_to_pure(rho: &DMatrix<Complex64>, psi: &[Complex64]) -> Result<f64> {
    check_len(rho.nrows(), psi.len())?;
    let d = psi.len();
    let diff = DMatrix::from_fn(d, d, |a, b| rho[(a, b)] - psi[a] * psi[b].conj());
    let herm = DMatrix::from_fn(d, d, |a, b| 0.5 * (diff[(a, b)] + diff[(b, a)].conj()));
    Ok(0.5 * herm.symmetric_eigenvalues().iter().map(|e| e.abs()).sum::<f64>())
}

/// One `H_Z` eigenlevel with its final occupation.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelProbability {
    pub flat: usize,
    pub occupations: Vec<usize>,
    pub energy: f64,
    pub probability: f64,
    pub tag: LevelTag,
}

/// Occupation of every `H_Z` eigenlevel in classification order.
pub fn final_distribution(result: &RunResult, inst: &ProblemInstance) -> Result<Vec<LevelProbability>> {
    let cls = classify_levels(inst, result.n, None)?;
    let basis = FockBasis::new(inst.m(), result.n)?;
    check_len(basis.dim(), result.populations.len())?;
    Ok(cls
        .levels
        .into_iter()
        .map(|l| LevelProbability {
            flat: l.flat,
            occupations: basis.fock(l.flat).occupations().to_vec(),
            energy: l.energy,
            probability: result.populations[l.flat],
            tag: l.tag,
        })
        .collect())
}

/// Probabilities rescaled so the largest equals 1, for heat-map export only.
pub fn display_normalized(levels: &[LevelProbability]) -> Vec<f64> {
    let max = levels.iter().map(|l| l.probability).fold(0.0, f64::max);
    if max <= 0.0 {
        return vec![0.0; levels.len()];
    }
    levels.iter().map(|l| l.probability / max).collect()
}

/// `1 -` total occupation of levels equivalent to the ground configuration;
/// levels with a tied majority vote count as errors.
pub fn error_probability(result: &RunResult, inst: &ProblemInstance) -> Result<f64> {
    let mask = equivalent_mask(inst, result.n)?;
    check_len(mask.len(), result.populations.len())?;
    Ok((1.0 - success_from(&mask, &result.populations)).clamp(0.0, 1.0))
}

/// Success probabilities at `steps` and `2 * steps`.
pub fn step_halving(
    inst: &ProblemInstance,
    n: usize,
    schedule: &Schedule,
    rates: Rates,
    steps: usize,
) -> Result<(f64, f64)> {
    let run = |s| {
        if rates.is_zero() {
            evolve_pure(inst, n, schedule, Some(s))
        } else {
            evolve_lindblad(inst, n, schedule, rates, Some(s))
        }
    };
    Ok((run(steps)?.success, run(2 * steps)?.success))
}

/// Noise model of a batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// Collective dephasing; pure evolution when both rates vanish.
    Collective(Rates),
    /// Independent qubit dephasing (reduced backend).
    Individual { gamma_z: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchCell {
    pub instance: usize,
    pub n: usize,
    pub tau: f64,
    pub outcome: std::result::Result<f64, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchMean {
    pub n: usize,
    pub tau: f64,
    /// Mean error over completed cells; NaN when none completed.
    pub mean_error: f64,
    pub completed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchTable {
    pub cells: Vec<BatchCell>,
    pub means: Vec<BatchMean>,
}

/// Error probability of every (instance, N, tau) cell, evaluated in parallel.
/// A failing cell is recorded and excluded from the means.
pub fn batch_errors(
    instances: &[ProblemInstance],
    ns: &[usize],
    taus: &[f64],
    noise: NoiseModel,
    steps: Option<usize>,
) -> Result<BatchTable> {
    if instances.is_empty() || ns.is_empty() || taus.is_empty() {
        return Err(Error::InvalidArgument("batch needs instances, N values and tau values".into()));
    }
    let schedules = taus.iter().map(|&t| Schedule::new(t)).collect::<Result<Vec<_>>>()?;
    let mut jobs = Vec::new();
    for &n in ns {
        for (ti, _) in taus.iter().enumerate() {
            for i in 0..instances.len() {
                jobs.push((i, n, ti));
            }
        }
    }
    let cells: Vec<BatchCell> = jobs
        .par_iter()
        .map(|&(i, n, ti)| {
            let inst = &instances[i];
            let schedule = &schedules[ti];
            let outcome = match noise {
                NoiseModel::Collective(r) if r.is_zero() => evolve_pure(inst, n, schedule, steps),
                NoiseModel::Collective(r) => evolve_lindblad(inst, n, schedule, r, steps),
                NoiseModel::Individual { gamma_z } => evolve_individual_dephasing(
                    inst,
                    n,
                    schedule,
                    gamma_z,
                    IndividualOptions {
                        steps,
                        ..IndividualOptions::default()
                    },
                ),
            }
            .map(|r| r.error)
            .map_err(|e| e.to_string());
            if let Err(e) = &outcome {
                debug!("cell (instance {i}, N {n}, tau {}) failed: {e}", taus[ti]);
            }
            BatchCell {
                instance: i,
                n,
                tau: taus[ti],
                outcome,
            }
        })
        .collect();
    let mut means = Vec::new();
    for &n in ns {
        for &tau in taus {
            let group: Vec<&BatchCell> = cells.iter().filter(|c| c.n == n && c.tau == tau).collect();
            let ok: Vec<f64> = group.iter().filter_map(|c| c.outcome.as_ref().ok().copied()).collect();
            means.push(BatchMean {
                n,
                tau,
                mean_error: if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().sum::<f64>() / ok.len() as f64
                },
                completed: ok.len(),
                failed: group.len() - ok.len(),
            });
        }
    }
    Ok(BatchTable { cells, means })
}
