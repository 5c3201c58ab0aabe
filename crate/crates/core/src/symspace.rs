//! Symmetric (Dicke) subspace of `M` ensembles of `N` qubits each.
//!
//! Basis states are Fock labels `k = (k_1, ..., k_M)` with `k_i` flipped spins in
//! ensemble `i`, so `S_i^z |k> = (N - 2 k_i) |k>`. Flat indices are row-major
//! with `k_1` varying slowest; `k = 0` is the fully up-polarized state.

use std::ops::{Add, Mul};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::instances::{ProblemInstance, SpinConfiguration};

/// Upper bound on `(N+1)^M` accepted when building operators.
pub const MAX_DIMENSION: usize = 1 << 24;

/// Dimensions of the product of symmetric subspaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockBasis {
    m: usize,
    n: usize,
    dim: usize,
}

impl FockBasis {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument("M and N must be positive".into()));
        }
        let mut dim = 1usize;
        for _ in 0..m {
            dim = dim
                .checked_mul(n + 1)
                .filter(|d| *d <= MAX_DIMENSION)
                .ok_or(Error::GuardExceeded {
                    what: "(N+1)^M",
                    value: usize::MAX,
                    limit: MAX_DIMENSION,
                })?;
        }
        Ok(Self { m, n, dim })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Flat-index stride of `site`.
    pub fn stride(&self, site: usize) -> usize {
        (self.n + 1).pow((self.m - 1 - site) as u32)
    }

    /// Occupation `k_site` of the basis state with the given flat index.
    #[inline]
    pub fn occupation(&self, flat: usize, site: usize) -> usize {
        (flat / self.stride(site)) % (self.n + 1)
    }

    /// `S_site^z` eigenvalue `N - 2 k_site`.
    #[inline]
    pub fn sz(&self, flat: usize, site: usize) -> f64 {
        self.n as f64 - 2.0 * self.occupation(flat, site) as f64
    }

    pub fn flat(&self, fock: &FockIndex) -> Result<usize> {
        if fock.n != self.n || fock.k.len() != self.m {
            return Err(Error::Shape(format!(
                "Fock label with M = {}, N = {} does not belong to basis M = {}, N = {}",
                fock.k.len(),
                fock.n,
                self.m,
                self.n
            )));
        }
        Ok(fock.k.iter().fold(0, |acc, &k| acc * (self.n + 1) + k))
    }

    pub fn fock(&self, flat: usize) -> FockIndex {
        assert!(flat < self.dim, "flat index out of range");
        FockIndex {
            k: (0..self.m).map(|i| self.occupation(flat, i)).collect(),
            n: self.n,
        }
    }
}

/// Fock label of a symmetric-subspace basis state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FockIndex {
    k: Vec<usize>,
    n: usize,
}

impl FockIndex {
    pub fn new(k: Vec<usize>, n: usize) -> Result<Self> {
        if let Some(bad) = k.iter().find(|&&ki| ki > n) {
            return Err(Error::InvalidArgument(format!(
                "occupation {bad} exceeds ensemble size {n}"
            )));
        }
        Ok(Self { k, n })
    }

    pub fn occupations(&self) -> &[usize] {
        &self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Majority-vote readout of a Fock state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MajorityLabel {
    Resolved(SpinConfiguration),
    /// Some ensemble has exactly half of its spins flipped.
    Unresolved,
}

/// `sigma_i = sgn(N - 2 k_i)`, unresolved on a tie.
pub fn majority_label(fock: &FockIndex) -> MajorityLabel {
    let n = fock.n as i64;
    let mut spins = Vec::with_capacity(fock.k.len());
    for &k in &fock.k {
        let s = n - 2 * k as i64;
        if s == 0 {
            return MajorityLabel::Unresolved;
        }
        spins.push(if s > 0 { 1 } else { -1 });
    }
    MajorityLabel::Resolved(SpinConfiguration::new(spins).expect("signs are +-1"))
}

/// Collective spin axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Z,
}

/// Real symmetric operator on the symmetric subspace: a dense diagonal plus a
/// CSR block of off-diagonal entries.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleOperator {
    basis: FockBasis,
    diag: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl EnsembleOperator {
    fn from_parts(basis: FockBasis, diag: Vec<f64>, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(basis.dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *vals.last_mut().expect("entry exists") += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            basis,
            diag,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn basis(&self) -> FockBasis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Off-diagonal entries of `row` as `(column, value)` pairs.
    pub fn row_offdiag(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    pub fn offdiag_nnz(&self) -> usize {
        self.cols.len()
    }

    /// `y = A x`.
    pub fn apply<T>(&self, x: &[T], y: &mut [T])
    where
        T: Copy + Add<Output = T> + Mul<f64, Output = T>,
    {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = x[r] * self.diag[r];
            for (c, v) in self.row_offdiag(r) {
                acc = acc + x[c] * v;
            }
            *out = acc;
        }
    }

    /// `a A + b B` on the same basis.
    pub fn linear_combination(a: f64, lhs: &Self, b: f64, rhs: &Self) -> Result<Self> {
        if lhs.basis != rhs.basis {
            return Err(Error::Shape("operators act on different bases".into()));
        }
        let diag = lhs
            .diag
            .iter()
            .zip(&rhs.diag)
            .map(|(x, y)| a * x + b * y)
            .collect();
        let rows = (0..lhs.dim())
            .map(|r| {
                lhs.row_offdiag(r)
                    .map(|(c, v)| (c, a * v))
                    .chain(rhs.row_offdiag(r).map(|(c, v)| (c, b * v)))
                    .collect()
            })
            .collect();
        Ok(Self::from_parts(lhs.basis, diag, rows))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut out = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diag));
        for r in 0..d {
            for (c, v) in self.row_offdiag(r) {
                out[(r, c)] += v;
            }
        }
        out
    }

    /// Largest asymmetry `|A_rc - A_cr|` over stored entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..self.dim() {
            for (c, v) in self.row_offdiag(r) {
                let mirror: f64 = self
                    .row_offdiag(c)
                    .filter(|(cc, _)| *cc == r)
                    .map(|(_, w)| w)
                    .sum();
                worst = worst.max((v - mirror).abs());
            }
        }
        worst
    }
}

/// `S^x` ladder element `<k+1| S^x |k> = sqrt((k+1)(N-k))`.
#[inline]
pub fn sx_ladder(n: usize, k: usize) -> f64 {
    (((k + 1) * (n - k)) as f64).sqrt()
}

/// Collective spin operator on ensemble `site` (0-based), identity elsewhere.
pub fn collective_op(m: usize, n: usize, site: usize, axis: Axis) -> Result<EnsembleOperator> {
    let basis = FockBasis::new(m, n)?;
    if site >= m {
        return Err(Error::InvalidArgument(format!(
            "site {site} out of range for M = {m}"
        )));
    }
    let dim = basis.dim();
    Ok(match axis {
        Axis::Z => {
            let diag = (0..dim).map(|a| basis.sz(a, site)).collect();
            EnsembleOperator::from_parts(basis, diag, vec![Vec::new(); dim])
        }
        Axis::X => EnsembleOperator::from_parts(
            basis,
            vec![0.0; dim],
            (0..dim).map(|a| sx_row(&basis, a, site, 1.0)).collect(),
        ),
    })
}

fn sx_row(basis: &FockBasis, a: usize, site: usize, coef: f64) -> Vec<(usize, f64)> {
    let n = basis.n();
    let k = basis.occupation(a, site);
    let stride = basis.stride(site);
    let mut row = Vec::with_capacity(2);
    if k > 0 {
        row.push((a - stride, coef * sx_ladder(n, k - 1)));
    }
    if k < n {
        row.push((a + stride, coef * sx_ladder(n, k)));
    }
    row
}

/// Diagonal of `H_Z = (1/N) sum_{ij} J_ij S_i^z S_j^z + sum_i K_i S_i^z`.
pub fn hz_diagonal(inst: &ProblemInstance, basis: &FockBasis) -> Vec<f64> {
    let m = inst.m();
    let inv_n = 1.0 / basis.n() as f64;
    let mut s = vec![0.0; m];
    (0..basis.dim())
        .map(|a| {
            for (i, si) in s.iter_mut().enumerate() {
                *si = basis.sz(a, i);
            }
            let mut coupling = 0.0;
            let mut bias = 0.0;
            for i in 0..m {
                let mut row = 0.0;
                for j in 0..m {
                    row += inst.j(i, j) * s[j];
                }
                coupling += s[i] * row;
                bias += inst.k(i) * s[i];
            }
            inv_n * coupling + bias
        })
        .collect()
}

/// Problem Hamiltonian `H_Z` (diagonal).
pub fn assemble_hz(inst: &ProblemInstance, n: usize) -> Result<EnsembleOperator> {
    let basis = FockBasis::new(inst.m(), n)?;
    let diag = hz_diagonal(inst, &basis);
    Ok(EnsembleOperator::from_parts(
        basis,
        diag,
        vec![Vec::new(); basis.dim()],
    ))
}

/// Driver Hamiltonian `H_X = -sum_i S_i^x`.
pub fn assemble_hx(m: usize, n: usize) -> Result<EnsembleOperator> {
    let basis = FockBasis::new(m, n)?;
    let rows = (0..basis.dim())
        .map(|a| (0..m).flat_map(|i| sx_row(&basis, a, i, -1.0)).collect())
        .collect();
    Ok(EnsembleOperator::from_parts(
        basis,
        vec![0.0; basis.dim()],
        rows,
    ))
}

/// `H(lambda) = (1 - lambda) H_X + lambda H_Z`.
pub fn hamiltonian(inst: &ProblemInstance, n: usize, lambda: f64) -> Result<EnsembleOperator> {
    check_lambda(lambda)?;
    let hx = assemble_hx(inst.m(), n)?;
    let hz = assemble_hz(inst, n)?;
    EnsembleOperator::linear_combination(1.0 - lambda, &hx, lambda, &hz)
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!(
            "lambda = {lambda} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Driver and problem parts kept separately so `H(lambda)` can be applied for any
/// `lambda` without reassembly.
#[derive(Debug, Clone)]
pub struct AnnealingHamiltonian {
    pub hx: EnsembleOperator,
    pub hz_diag: Vec<f64>,
}

impl AnnealingHamiltonian {
    pub fn new(inst: &ProblemInstance, n: usize) -> Result<Self> {
        let hx = assemble_hx(inst.m(), n)?;
        let hz_diag = hz_diagonal(inst, &hx.basis());
        Ok(Self { hx, hz_diag })
    }

    pub fn basis(&self) -> FockBasis {
        self.hx.basis()
    }

    pub fn dim(&self) -> usize {
        self.hz_diag.len()
    }

    /// `y = H(lambda) x`.
    pub fn apply<T>(&self, lambda: f64, x: &[T], y: &mut [T])
    where
        T: Copy + Add<Output = T> + Mul<f64, Output = T>,
    {
        let drive = 1.0 - lambda;
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = x[r] * (lambda * self.hz_diag[r]);
            for (c, v) in self.hx.row_offdiag(r) {
                acc = acc + x[c] * (drive * v);
            }
            *out = acc;
        }
    }

    pub fn at(&self, lambda: f64) -> EnsembleOperator {
        let mut op = self.hx.clone();
        for (d, z) in op.diag.iter_mut().zip(&self.hz_diag) {
            *d = lambda * z;
        }
        for v in &mut op.vals {
            *v *= 1.0 - lambda;
        }
        op
    }
}
