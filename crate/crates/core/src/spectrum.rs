//! Exact spectra of the interpolated Hamiltonian in the symmetric subspace.
//!
//! Below [`DENSE_LIMIT`] the Hamiltonian is diagonalized densely; above it a
//! block Lanczos iteration with full reorthogonalization extracts the lowest
//! eigenpairs. The block size exceeds the number of requested levels so
//! degenerate multiplets are resolved.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instances::ProblemInstance;
use crate::optimize::golden_section;
use crate::landscape::{energies_equal, unique_ground};
use crate::symspace::{
    assemble_hx, assemble_hz, check_lambda, majority_label, AnnealingHamiltonian, EnsembleOperator,
    MajorityLabel,
};

/// Largest dimension diagonalized densely.
pub const DENSE_LIMIT: usize = 4096;

/// Default number of reported levels.
pub const DEFAULT_LEVELS: usize = 30;

/// Above this dimension the gap comes from a single-vector Lanczos run.
pub const GAP_DENSE_LIMIT: usize = 128;

/// Largest level count served by the iterative solver.
pub const MAX_ITERATIVE_LEVELS: usize = 30;

/// Residual bound for returned eigenpairs.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Lowest eigenpairs in ascending order; `vectors` holds one eigenvector per column.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// Lowest `levels` eigenpairs of a real symmetric operator.
pub fn eigensystem(op: &EnsembleOperator, levels: usize) -> Result<Eigenpairs> {
    eigensystem_with_limit(op, levels, DENSE_LIMIT)
}

/// Same as [`eigensystem`] with an explicit dense/iterative crossover.
pub fn eigensystem_with_limit(
    op: &EnsembleOperator,
    levels: usize,
    dense_limit: usize,
) -> Result<Eigenpairs> {
    let dim = op.dim();
    if levels == 0 || levels > dim {
        return Err(Error::InvalidArgument(format!(
            "requested {levels} levels from a {dim}-dimensional space"
        )));
    }
    if dim <= dense_limit {
        return Ok(dense_eigensystem(op.to_dense(), levels));
    }
    if levels > MAX_ITERATIVE_LEVELS {
        return Err(Error::InvalidArgument(format!(
            "iterative solver serves at most {MAX_ITERATIVE_LEVELS} levels"
        )));
    }
    block_lanczos(op, levels)
}

fn dense_eigensystem(matrix: DMatrix<f64>, levels: usize) -> Eigenpairs {
    let eig = SymmetricEigen::new(matrix);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order.truncate(levels);
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    Eigenpairs { values, vectors }
}

/// Lowest `levels` eigenvalues only.
pub fn lowest_eigenvalues(op: &EnsembleOperator, levels: usize) -> Result<Vec<f64>> {
    let dim = op.dim();
    if levels == 0 || levels > dim {
        return Err(Error::InvalidArgument(format!(
            "requested {levels} levels from a {dim}-dimensional space"
        )));
    }
    if dim <= DENSE_LIMIT {
        let mut values: Vec<f64> = op.to_dense().symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values.truncate(levels);
        return Ok(values);
    }
    Ok(eigensystem(op, levels)?.values)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn block_lanczos(op: &EnsembleOperator, levels: usize) -> Result<Eigenpairs> {
    let dim = op.dim();
    let block = (levels + 2).min(dim);
    let max_basis = (dim).min(60 * block + 400);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let mut next_check = levels;
    let mut pending: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();

    loop {
        let mut added = 0;
        for mut w in pending.drain(..) {
            let before = dot(&w, &w).sqrt();
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
                }
            }
            let norm = dot(&w, &w).sqrt();
            if norm <= 1e-10 * before.max(1e-300) || norm == 0.0 {
                continue;
            }
            w.iter_mut().for_each(|x| *x /= norm);
            let mut aw = vec![0.0; dim];
            op.apply(&w, &mut aw);
            basis.push(w);
            images.push(aw);
            added += 1;
        }

        let k = basis.len();
        let exhausted = added == 0 || k >= dim;
        if k < next_check && !exhausted && k < max_basis {
            let start = k - added;
            pending = images[start..].to_vec();
            continue;
        }
        next_check = (k + block).max(k + k / 4);
        let projected = DMatrix::from_fn(k, k, |i, j| 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i])));
        let ritz = dense_eigensystem(projected, levels.min(k));

        if k >= levels {
            let mut vectors = DMatrix::zeros(dim, levels);
            let mut converged = true;
            for (col, &theta) in ritz.values.iter().enumerate() {
                let y = ritz.vectors.column(col);
                let mut v = vec![0.0; dim];
                let mut av = vec![0.0; dim];
                for i in 0..k {
                    let yi = y[i];
                    v.iter_mut().zip(&basis[i]).for_each(|(a, b)| *a += yi * b);
                    av.iter_mut().zip(&images[i]).for_each(|(a, b)| *a += yi * b);
                }
                let res: f64 = av
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| (a - theta * b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if res > RESIDUAL_TOLERANCE * theta.abs().max(1.0) {
                    converged = false;
                }
                vectors.set_column(col, &DVector::from_vec(v));
            }
            if converged || (exhausted && k >= levels) {
                if !converged {
                    return Err(Error::NoConvergence(
                        "block Lanczos basis became invariant without converged residuals".into(),
                    ));
                }
                return Ok(Eigenpairs {
                    values: ritz.values,
                    vectors,
                });
            }
        }
        if exhausted || k >= max_basis {
            return Err(Error::NoConvergence(format!(
                "block Lanczos reached {k} basis vectors without convergence"
            )));
        }
        let start = k - added;
        pending = images[start..].to_vec();
    }
}

/// Two lowest eigenvalues by Lanczos with full reorthogonalization.
///
/// A single Krylov vector sees each eigenspace once, so this is only valid when
/// the ground state is nondegenerate. That holds for `H(lambda)` with
/// `lambda < 1` (stoquastic and irreducible) and at `lambda = 1` whenever the
/// qubit ground state is unique.
pub fn lowest_pair(op: &EnsembleOperator) -> Result<(f64, f64)> {
    let dim = op.dim();
    if dim < 2 {
        return Err(Error::InvalidArgument("need at least two levels".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2c);
    let mut q: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|x| *x /= norm);
    let mut basis = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    loop {
        let j = basis.len() - 1;
        op.apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w);
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
            }
        }
        let b = dot(&w, &w).sqrt();
        let k = alpha.len();
        if k >= 2 && (k % 8 == 0 || b < 1e-12 || k == dim) {
            let t = DMatrix::from_fn(k, k, |r, c| {
                if r == c {
                    alpha[r]
                } else if r + 1 == c {
                    beta[r]
                } else if c + 1 == r {
                    beta[c]
                } else {
                    0.0
                }
            });
            let ritz = dense_eigensystem(t, 2);
            let scale = ritz.values[0].abs().max(1.0);
            let converged = (0..2).all(|i| (b * ritz.vectors[(k - 1, i)]).abs() <= RESIDUAL_TOLERANCE * scale);
            if converged || b < 1e-12 || k == dim {
                return Ok((ritz.values[0], ritz.values[1]));
            }
        }
        if k >= dim.min(2000) {
            return Err(Error::NoConvergence(format!("Lanczos did not converge in {k} steps")));
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
}

/// Lowest levels of `H(lambda)` and the gap between the two lowest.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSlice {
    pub lambda: f64,
    pub energies: Vec<f64>,
    pub gap: f64,
}

pub fn spectrum_slice(
    ham: &AnnealingHamiltonian,
    lambda: f64,
    levels: usize,
) -> Result<SpectrumSlice> {
    check_lambda(lambda)?;
    let levels = levels.max(2).min(ham.dim());
    let energies = lowest_eigenvalues(&ham.at(lambda), levels)?;
    let gap = (energies[1] - energies[0]).max(0.0);
    Ok(SpectrumSlice {
        lambda,
        energies,
        gap,
    })
}

/// Spectrum scan over a grid of `lambda` values.
pub fn spectrum_scan(
    inst: &ProblemInstance,
    n: usize,
    grid: &[f64],
    levels: usize,
) -> Result<Vec<SpectrumSlice>> {
    let ham = AnnealingHamiltonian::new(inst, n)?;
    grid.iter()
        .map(|&l| spectrum_slice(&ham, l, levels))
        .collect()
}

/// `E1 - E0` of `H(lambda)`.
pub fn gap(inst: &ProblemInstance, n: usize, lambda: f64) -> Result<f64> {
    let ham = AnnealingHamiltonian::new(inst, n)?;
    gap_of(&ham, lambda)
}

fn gap_of(ham: &AnnealingHamiltonian, lambda: f64) -> Result<f64> {
    if ham.dim() < 2 {
        return Err(Error::InvalidArgument("gap needs at least two levels".into()));
    }
    if ham.dim() <= GAP_DENSE_LIMIT {
        return Ok(spectrum_slice(ham, lambda, 2)?.gap);
    }
    check_lambda(lambda)?;
    let (e0, e1) = lowest_pair(&ham.at(lambda))?;
    Ok((e1 - e0).max(0.0))
}

/// `points` uniformly spaced values covering `[0, 1]`.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    assert!(points >= 2);
    (0..points)
        .map(|i| i as f64 / (points - 1) as f64)
        .collect()
}

/// Default scan grid: 101 points on `[0, 1]`.
pub fn default_grid() -> Vec<f64> {
    uniform_grid(101)
}

/// Minimum of the gap over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MinGap {
    pub lambda_star: f64,
    pub gap_min: f64,
    /// Gap at every grid point, in grid order.
    pub curve: Vec<(f64, f64)>,
}

/// Minimum gap over `grid` (ties resolved toward smaller `lambda`); with `refine`
/// a golden-section search around the coarse minimum narrows `lambda` to `1e-4`.
pub fn min_gap(inst: &ProblemInstance, n: usize, grid: &[f64], refine: bool) -> Result<MinGap> {
    let ham = AnnealingHamiltonian::new(inst, n)?;
    min_gap_of(&ham, grid, refine)
}

pub(crate) fn min_gap_of(ham: &AnnealingHamiltonian, grid: &[f64], refine: bool) -> Result<MinGap> {
    if grid.len() < 3 {
        return Err(Error::InvalidArgument("lambda grid needs at least 3 points".into()));
    }
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidArgument("lambda grid must be increasing".into()));
        }
    }
    let curve = grid
        .iter()
        .map(|&l| gap_of(ham, l).map(|g| (l, g)))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, &(_, g)) in curve.iter().enumerate() {
        if g < curve[best].1 {
            best = i;
        }
    }
    let (mut lambda_star, mut gap_min) = curve[best];
    if refine {
        let lo = grid[best.saturating_sub(1)];
        let hi = grid[(best + 1).min(grid.len() - 1)];
        let (l, g) = golden_section(|l| gap_of(ham, l), lo, hi, 1e-4)?;
        if g < gap_min {
            lambda_star = l;
            gap_min = g;
        }
    }
    Ok(MinGap {
        lambda_star,
        gap_min,
        curve,
    })
}

/// Logical character of a level at the end of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LevelTag {
    /// Majority vote reproduces the qubit ground configuration.
    Equivalent,
    /// Majority vote gives a different configuration.
    Error,
    /// Some ensemble is tied.
    Unresolved,
}

impl LevelTag {
    pub fn as_str(self) -> &'static str {
        match self {
            LevelTag::Equivalent => "equivalent",
            LevelTag::Error => "error",
            LevelTag::Unresolved => "unresolved",
        }
    }
}

/// One eigenlevel of `H_Z` (a Fock state).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedLevel {
    pub flat: usize,
    pub energy: f64,
    pub tag: LevelTag,
}

/// Levels of `H_Z` in ascending energy with their tags.
///
/// Exactly degenerate Fock states are ordered as the `lambda -> 1` limit of
/// the interpolated spectrum orders them, i.e. by their second-order shift
/// under the driver, then by flat index.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelClassification {
    pub levels: Vec<ClassifiedLevel>,
}

impl LevelClassification {
    pub fn count(&self, tag: LevelTag) -> usize {
        self.levels.iter().filter(|l| l.tag == tag).count()
    }
}

/// Tags the `levels` lowest `H_Z` eigenstates (all of them when `levels` is `None`).
pub fn classify_levels(
    inst: &ProblemInstance,
    n: usize,
    levels: Option<usize>,
) -> Result<LevelClassification> {
    let ground = unique_ground(inst)?;
    let hz = assemble_hz(inst, n)?;
    let basis = hz.basis();
    let diag = hz.diagonal();
    let mut order: Vec<usize> = (0..basis.dim()).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));
    let hx = assemble_hx(inst.m(), n)?;
    let shift = |a: usize| -> f64 {
        hx.row_offdiag(a)
            .filter(|&(b, _)| !energies_equal(diag[a], diag[b]))
            .map(|(b, v)| v * v / (diag[a] - diag[b]))
            .sum()
    };
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && energies_equal(diag[order[start]], diag[order[end]]) {
            end += 1;
        }
        if end - start > 1 {
            let mut run: Vec<(f64, usize)> = order[start..end].iter().map(|&a| (shift(a), a)).collect();
            run.sort_by(|x, y| {
                if energies_equal(x.0, y.0) {
                    x.1.cmp(&y.1)
                } else {
                    x.0.total_cmp(&y.0)
                }
            });
            for (slot, (_, a)) in order[start..end].iter_mut().zip(run) {
                *slot = a;
            }
        }
        start = end;
    }
    if let Some(l) = levels {
        order.truncate(l);
    }
    let levels = order
        .into_iter()
        .map(|flat| {
            let tag = match majority_label(&basis.fock(flat)) {
                MajorityLabel::Resolved(s) if s == ground.sigma_star => LevelTag::Equivalent,
                MajorityLabel::Resolved(_) => LevelTag::Error,
                MajorityLabel::Unresolved => LevelTag::Unresolved,
            };
            ClassifiedLevel {
                flat,
                energy: diag[flat],
                tag,
            }
        })
        .collect();
    Ok(LevelClassification { levels })
}

/// Per-`N` summary of minimum gaps across an instance set.
#[derive(Debug, Clone, PartialEq)]
pub struct GapStatistics {
    pub n: usize,
    pub mean: f64,
    pub best: f64,
    pub worst: f64,
}

/// Mean minimum gap per `N`, plus the trajectories of the best and worst instances,
/// ranked by the change in minimum gap between the first and last `N`.
pub fn min_gap_statistics(
    instances: &[ProblemInstance],
    n_range: &[usize],
    grid: &[f64],
) -> Result<Vec<GapStatistics>> {
    let table = instances
        .iter()
        .map(|inst| {
            n_range
                .iter()
                .map(|&n| min_gap(inst, n, grid, false).map(|g| g.gap_min))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    summarize_gap_table(&table, n_range)
}

/// Reduces an `instances x N` table of minimum gaps to per-`N` statistics.
pub fn summarize_gap_table(table: &[Vec<f64>], n_range: &[usize]) -> Result<Vec<GapStatistics>> {
    if table.is_empty() || n_range.is_empty() {
        return Err(Error::InvalidArgument(
            "statistics need at least one instance and one N".into(),
        ));
    }
    let last = n_range.len() - 1;
    let change = |row: &Vec<f64>| row[last] - row[0];
    let mut best = 0;
    let mut worst = 0;
    for (i, row) in table.iter().enumerate() {
        if change(row) > change(&table[best]) {
            best = i;
        }
        if change(row) < change(&table[worst]) {
            worst = i;
        }
    }
    Ok(n_range
        .iter()
        .enumerate()
        .map(|(col, &n)| GapStatistics {
            n,
            mean: table.iter().map(|r| r[col]).sum::<f64>() / table.len() as f64,
            best: table[best][col],
            worst: table[worst][col],
        })
        .collect())
}
