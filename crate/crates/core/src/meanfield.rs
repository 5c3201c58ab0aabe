//! Spin-coherent mean-field theory of the ensemble Hamiltonian.
//!
//! Each ensemble is a product of identical qubit states tilted away from the
//! driver axis; `z_i` is the projection onto the logical ground direction
//! `sigma_i`. The ground energy is extensive in `N` and the gap follows from
//! an `M x M` single-flip (spin-wave) matrix, independent of `N`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instances::{ProblemInstance, SpinConfiguration};
use crate::landscape::unique_ground;
use crate::optimize::golden_section;
use crate::symspace::check_lambda;

/// Residual bound of the self-consistent equation.
pub const SELF_CONSISTENT_TOLERANCE: f64 = 1e-12;

/// Iteration cap of the damped fixed-point solver.
pub const MAX_ITERATIONS: usize = 10_000;

/// Residual accepted from the direct minimizer; golden-section line searches
/// resolve a minimum only to about the square root of machine precision.
pub const DIRECT_TOLERANCE: f64 = 1e-6;

const DAMPING: f64 = 0.5;
const MINIMIZER_STARTS: usize = 8;
const MINIMIZER_SWEEPS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    FixedPoint,
    DirectMinimization,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldSolution {
    pub lambda: f64,
    pub z: Vec<f64>,
    pub sigma_star: SpinConfiguration,
    /// Mean-field ground energy divided by `N`.
    pub e0_per_n: f64,
    pub iterations: usize,
    pub residual: f64,
    pub solver: Solver,
}

impl MeanFieldSolution {
    /// Mean-field ground energy at ensemble size `n`.
    pub fn energy(&self, n: usize) -> f64 {
        n as f64 * self.e0_per_n
    }
}

fn local_field(inst: &ProblemInstance, sigma: &SpinConfiguration, z: &[f64], i: usize) -> f64 {
    let m_i: f64 = (0..inst.m())
        .map(|j| inst.j(i, j) * sigma.get(j) * z[j])
        .sum();
    2.0 * m_i + inst.k(i)
}

fn self_consistent_map(inst: &ProblemInstance, sigma: &SpinConfiguration, lambda: f64, z: &[f64], i: usize) -> f64 {
    let h = local_field(inst, sigma, z, i);
    let num = -sigma.get(i) * lambda * h;
    let den = ((1.0 - lambda).powi(2) + (lambda * h).powi(2)).sqrt();
    if den == 0.0 {
        // lambda = 1 with vanishing field: any z is stationary; keep the current one.
        z[i]
    } else {
        num / den
    }
}

/// Max-norm residual of the self-consistent equation.
pub fn self_consistent_residual(inst: &ProblemInstance, sigma: &SpinConfiguration, lambda: f64, z: &[f64]) -> f64 {
    (0..inst.m())
        .map(|i| (z[i] - self_consistent_map(inst, sigma, lambda, z, i)).abs())
        .fold(0.0, f64::max)
}

/// Mean-field ground energy at ensemble size `n` for projections `z`.
pub fn mf_ground_energy(
    inst: &ProblemInstance,
    sigma: &SpinConfiguration,
    n: usize,
    lambda: f64,
    z: &[f64],
) -> Result<f64> {
    check_lambda(lambda)?;
    let m = inst.m();
    if z.len() != m || sigma.len() != m {
        return Err(Error::Shape(format!("expected {m} projections and spins")));
    }
    if z.iter().any(|v| !(-1.0..=1.0).contains(v)) {
        return Err(Error::InvalidArgument("projections must lie in [-1, 1]".into()));
    }
    Ok(n as f64 * energy_per_n(inst, sigma, lambda, z))
}

fn energy_per_n(inst: &ProblemInstance, sigma: &SpinConfiguration, lambda: f64, z: &[f64]) -> f64 {
    let m = inst.m();
    let driver: f64 = z.iter().map(|v| (1.0 - v * v).max(0.0).sqrt()).sum();
    let mut problem = 0.0;
    for i in 0..m {
        let zi = sigma.get(i) * z[i];
        problem += inst.k(i) * zi;
        for j in 0..m {
            problem += inst.j(i, j) * zi * sigma.get(j) * z[j];
        }
    }
    -(1.0 - lambda) * driver + lambda * problem
}

fn fixed_point(inst: &ProblemInstance, sigma: &SpinConfiguration, lambda: f64) -> (Vec<f64>, usize, f64) {
    let m = inst.m();
    let mut z = vec![1.0; m];
    let mut next = vec![0.0; m];
    for it in 1..=MAX_ITERATIONS {
        for (i, slot) in next.iter_mut().enumerate() {
            *slot = self_consistent_map(inst, sigma, lambda, &z, i);
        }
        for i in 0..m {
            z[i] = DAMPING * next[i] + (1.0 - DAMPING) * z[i];
        }
        let r = self_consistent_residual(inst, sigma, lambda, &z);
        if r <= SELF_CONSISTENT_TOLERANCE {
            return (z, it, r);
        }
    }
    let r = self_consistent_residual(inst, sigma, lambda, &z);
    (z, MAX_ITERATIONS, r)
}

/// Coordinate descent on the mean-field energy over `[-1, 1]^M` from `start`,
/// with golden-section line searches.
pub fn descend_energy(inst: &ProblemInstance, lambda: f64, start: &[f64]) -> Result<MeanFieldSolution> {
    check_lambda(lambda)?;
    let ground = unique_ground(inst)?;
    let m = inst.m();
    if start.len() != m {
        return Err(Error::Shape(format!("expected {m} starting projections")));
    }
    Ok(descend(inst, &ground.sigma_star, lambda, start.to_vec()))
}

fn descend(inst: &ProblemInstance, sigma: &SpinConfiguration, lambda: f64, start: Vec<f64>) -> MeanFieldSolution {
    let m = inst.m();
    let mut z = start;
    let mut e = energy_per_n(inst, sigma, lambda, &z);
    let mut sweeps = 0;
    while sweeps < MINIMIZER_SWEEPS {
        sweeps += 1;
        let mut moved = 0.0_f64;
        for i in 0..m {
            let mut trial = z.clone();
            let (zi, ce) = golden_section(
                |v| {
                    trial[i] = v;
                    Ok(energy_per_n(inst, sigma, lambda, &trial))
                },
                -1.0,
                1.0,
                1e-14,
            )
            .expect("energy evaluation is infallible");
            if ce <= e {
                moved = moved.max((zi - z[i]).abs());
                z[i] = zi;
                e = ce;
            }
        }
        if moved < 1e-13 {
            break;
        }
    }
    let residual = self_consistent_residual(inst, sigma, lambda, &z);
    MeanFieldSolution {
        lambda,
        z,
        sigma_star: sigma.clone(),
        e0_per_n: e,
        iterations: sweeps,
        residual,
        solver: Solver::DirectMinimization,
    }
}

/// Global minimum of the mean-field energy over `[-1, 1]^M`: the lowest
/// coordinate-descent result from several starting points.
pub fn minimize_energy(inst: &ProblemInstance, lambda: f64) -> Result<MeanFieldSolution> {
    check_lambda(lambda)?;
    let ground = unique_ground(inst)?;
    let m = inst.m();
    let mut rng = ChaCha8Rng::seed_from_u64(0x3f);
    let mut starts = vec![vec![1.0; m], vec![0.0; m], vec![-1.0; m]];
    while starts.len() < MINIMIZER_STARTS {
        starts.push((0..m).map(|_| rng.random_range(-1.0..=1.0)).collect());
    }
    let best = starts
        .into_iter()
        .map(|start| descend(inst, &ground.sigma_star, lambda, start))
        .min_by(|a, b| a.e0_per_n.total_cmp(&b.e0_per_n))
        .expect("at least one start");
    Ok(best)
}

/// Solves the self-consistent equation by damped fixed-point iteration from
/// `z = 1`, i.e. on the branch that ends in the logical ground state at
/// `lambda = 1`. If the iteration stalls, coordinate descent from `z = 1` and
/// then a multi-start minimization are tried.
///
/// The mean-field energy can have several local minima. The branch returned
/// here need not be the global one; [`minimize_energy`] finds that.
pub fn solve_self_consistent(inst: &ProblemInstance, lambda: f64) -> Result<MeanFieldSolution> {
    check_lambda(lambda)?;
    let ground = unique_ground(inst)?;
    let sigma = ground.sigma_star;
    let (z, iterations, residual) = fixed_point(inst, &sigma, lambda);
    if residual <= SELF_CONSISTENT_TOLERANCE {
        let e0_per_n = energy_per_n(inst, &sigma, lambda, &z);
        return Ok(MeanFieldSolution {
            lambda,
            z,
            sigma_star: sigma,
            e0_per_n,
            iterations,
            residual,
            solver: Solver::FixedPoint,
        });
    }
    log::debug!("fixed point stalled at lambda {lambda} (residual {residual:e}); minimizing directly");
    let local = descend(inst, &sigma, lambda, vec![1.0; inst.m()]);
    if local.residual <= DIRECT_TOLERANCE {
        return Ok(local);
    }
    let direct = minimize_energy(inst, lambda)?;
    if direct.residual <= DIRECT_TOLERANCE {
        Ok(direct)
    } else {
        Err(Error::NoConvergence(format!(
            "mean-field solution at lambda {lambda}: fixed-point residual {residual:e}, direct residual {:e}",
            direct.residual
        )))
    }
}

/// Single-flip excitation matrix relative to the mean-field ground energy.
pub fn excited_matrix(inst: &ProblemInstance, sol: &MeanFieldSolution) -> DMatrix<f64> {
    let m = inst.m();
    let lambda = sol.lambda;
    let sigma = &sol.sigma_star;
    let z = &sol.z;
    let root: Vec<f64> = z.iter().map(|v| (1.0 - v * v).max(0.0).sqrt()).collect();
    DMatrix::from_fn(m, m, |k, l| {
        if k == l {
            let coupling: f64 = (0..m)
                .filter(|&i| i != k)
                .map(|i| inst.j(i, k) * sigma.get(i) * sigma.get(k) * z[i] * z[k])
                .sum();
            2.0 * (1.0 - lambda) * root[k] - 2.0 * lambda * inst.k(k) * sigma.get(k) * z[k]
                - 4.0 * lambda * coupling
        } else {
            2.0 * lambda * inst.j(k, l) * root[k] * root[l]
        }
    })
}

/// Mean-field gap: the lowest eigenvalue of the excitation matrix.
pub fn mf_gap(inst: &ProblemInstance, sol: &MeanFieldSolution) -> f64 {
    excited_matrix(inst, sol)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldPoint {
    pub solution: MeanFieldSolution,
    pub gap: f64,
}

/// Mean-field solution and gap at every grid point.
pub fn mf_gap_curve(inst: &ProblemInstance, grid: &[f64]) -> Result<Vec<MeanFieldPoint>> {
    grid.iter()
        .map(|&lambda| {
            let solution = solve_self_consistent(inst, lambda)?;
            let gap = mf_gap(inst, &solution);
            Ok(MeanFieldPoint { solution, gap })
        })
        .collect()
}
