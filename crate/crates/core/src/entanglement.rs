//! Entanglement between two ensembles: partial transpose and logarithmic negativity.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dynamics::{evolve_lindblad_observed, Rates, Schedule};
use crate::error::{Error, Result};
use crate::instances::ProblemInstance;

/// Negative log-negativity values above this are treated as zero.
pub const NOISE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Density matrix on `C^d1 (x) C^d2`, first factor slowest in the flat index.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    rho: DMatrix<Complex64>,
    d1: usize,
    d2: usize,
}

impl BipartiteState {
    pub fn new(rho: DMatrix<Complex64>, d1: usize, d2: usize) -> Result<Self> {
        if d1 == 0 || d2 == 0 || rho.nrows() != d1 * d2 || rho.ncols() != d1 * d2 {
            return Err(Error::Shape(format!(
                "{}x{} matrix does not factor as {d1} x {d2}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let defect = (&rho - rho.adjoint()).camax();
        if defect > 1e-8 {
            return Err(Error::InvalidArgument(format!("state is not Hermitian (defect {defect:e})")));
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > 1e-6 || trace.im.abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!("state has trace {trace}")));
        }
        Ok(Self { rho, d1, d2 })
    }

    /// Pure state `|psi><psi|`.
    pub fn pure(psi: &[Complex64], d1: usize, d2: usize) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        Self::new(&v * v.adjoint(), d1, d2)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d1, self.d2)
    }
}

/// Transposes the indices of one subsystem.
pub fn partial_transpose(state: &BipartiteState, which: Subsystem) -> DMatrix<Complex64> {
    let (d1, d2) = (state.d1, state.d2);
    let rho = &state.rho;
    DMatrix::from_fn(d1 * d2, d1 * d2, |r, c| {
        let (i1, i2) = (r / d2, r % d2);
        let (j1, j2) = (c / d2, c % d2);
        match which {
            Subsystem::First => rho[(j1 * d2 + i2, i1 * d2 + j2)],
            Subsystem::Second => rho[(i1 * d2 + j2, j1 * d2 + i2)],
        }
    })
}

/// `log2` of the trace norm of the partial transpose on the second subsystem.
pub fn log_negativity(state: &BipartiteState) -> Result<f64> {
    let pt = partial_transpose(state, Subsystem::Second);
    let hermitian = (&pt + pt.adjoint()) * Complex64::new(0.5, 0.0);
    let norm: f64 = hermitian.symmetric_eigenvalues().iter().map(|e| e.abs()).sum();
    let value = norm.log2();
    if value < -NOISE_FLOOR {
        return Err(Error::InvalidArgument(format!("trace norm {norm} below 1; not a valid state")));
    }
    Ok(value.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativityPoint {
    pub t: f64,
    pub lambda: f64,
    pub log_negativity: f64,
}

/// Log-negativity between the two ensembles of an `M = 2` instance, sampled
/// along a collective-dephasing run.
pub fn negativity_trace(
    inst: &ProblemInstance,
    n: usize,
    schedule: &Schedule,
    rates: Rates,
    sample_times: &[f64],
    steps: Option<usize>,
) -> Result<Vec<NegativityPoint>> {
    if inst.m() != 2 {
        return Err(Error::InvalidArgument(format!(
            "negativity needs exactly two ensembles, got M = {}",
            inst.m()
        )));
    }
    let mut points = Vec::with_capacity(sample_times.len());
    evolve_lindblad_observed(inst, n, schedule, rates, steps, sample_times, |s| {
        let state = BipartiteState::new(s.rho.clone(), n + 1, n + 1)?;
        points.push(NegativityPoint {
            t: s.t,
            lambda: s.lambda,
            log_negativity: log_negativity(&state)?,
        });
        Ok(())
    })?;
    Ok(points)
}
