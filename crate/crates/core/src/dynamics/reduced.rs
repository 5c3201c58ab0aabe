//! Exact permutation-reduced form of independent single-qubit dephasing.
//!
//! The Hamiltonian only involves collective spins, and single-qubit dephasing
//! summed over an ensemble is permutation symmetric, so the state stays in the
//! commutant of the permutation group. Per ensemble that is
//! `rho = sum_r A_r (x) 1_{d_r}` over total-spin sectors `j = N/2 - r` with
//! multiplicity `d_r = C(N, r) - C(N, r - 1)`. Across ensembles the blocks are
//! labelled by sector tuples. Dephasing keeps the `S^z` labels of each matrix
//! element and moves weight between neighbouring sectors; the transfer
//! coefficients are computed once from an explicit Schur basis.

use nalgebra::{DMatrix, SymmetricEigen};

use super::kernel::{self, Sparse, SplitHamiltonian, C};
use crate::error::{Error, Result};
use crate::instances::ProblemInstance;

/// Largest ensemble size for which the Schur basis is built.
pub(crate) const MAX_ENSEMBLE: usize = 10;

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub(crate) fn sector_count(n: usize) -> usize {
    n / 2 + 1
}

pub(crate) fn sector_dim(n: usize, r: usize) -> usize {
    n - 2 * r + 1
}

pub(crate) fn multiplicity(n: usize, r: usize) -> f64 {
    let prev = if r == 0 { 0.0 } else { binomial(n, r - 1) };
    binomial(n, r) - prev
}

/// Transfer coefficients `alpha(target <- source; k, k')` of the map
/// `rho -> sum_s sigma^z_s rho sigma^z_s` for one ensemble, where `k`, `k'` are
/// the flipped-spin counts of the row and column labels.
#[derive(Debug, Clone)]
pub(crate) struct DephasingTable {
    n: usize,
    sectors: usize,
    coeff: Vec<f64>,
}

impl DephasingTable {
    pub(crate) fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_ENSEMBLE {
            return Err(Error::GuardExceeded {
                what: "ensemble size for reduced dephasing",
                value: n,
                limit: MAX_ENSEMBLE,
            });
        }
        let schur = schur_basis(n);
        let sectors = sector_count(n);
        let mut coeff = vec![0.0; sectors * sectors * (n + 1) * (n + 1)];
        let weights: Vec<Vec<u32>> = (0..=n).map(|k| weight_space(n, k)).collect();
        for rt in 0..sectors {
            for rs in rt.saturating_sub(1)..=(rt + 1).min(sectors - 1) {
                let lo = rt.max(rs);
                for k in lo..=n - lo {
                    for kp in lo..=n - lo {
                        let p = &schur[rs][k - rs] * schur[rs][kp - rs].transpose();
                        let q = &schur[rt][k - rt] * schur[rt][kp - rt].transpose();
                        let mut sum = 0.0;
                        for (a, &ba) in weights[k].iter().enumerate() {
                            for (b, &bb) in weights[kp].iter().enumerate() {
                                let g = n as f64 - 2.0 * (ba ^ bb).count_ones() as f64;
                                sum += q[(a, b)] * g * p[(a, b)];
                            }
                        }
                        let idx = ((rt * sectors + rs) * (n + 1) + k) * (n + 1) + kp;
                        coeff[idx] = sum / multiplicity(n, rt);
                    }
                }
            }
        }
        Ok(Self { n, sectors, coeff })
    }

    pub(crate) fn get(&self, target: usize, source: usize, k: usize, kp: usize) -> f64 {
        let n = self.n;
        self.coeff[((target * self.sectors + source) * (n + 1) + k) * (n + 1) + kp]
    }
}

fn weight_space(n: usize, k: usize) -> Vec<u32> {
    (0u32..1 << n).filter(|b| b.count_ones() as usize == k).collect()
}

/// `schur[r][q]`: orthonormal columns spanning `|j = N/2 - r, k = r + q, mu>` over `mu`,
/// expressed in the bitstrings of the weight space with `r + q` flipped spins.
fn schur_basis(n: usize) -> Vec<Vec<DMatrix<f64>>> {
    let spaces: Vec<Vec<u32>> = (0..=n).map(|k| weight_space(n, k)).collect();
    let position = |k: usize, b: u32| spaces[k].binary_search(&b).expect("bitstring in weight space");
    let mut out = Vec::new();
    for r in 0..sector_count(n) {
        let width = spaces[r].len();
        let mut highest = if r == 0 {
            DMatrix::from_element(1, 1, 1.0)
        } else {
            // Raising removes one flipped spin; its kernel holds the highest weights.
            let mut raise = DMatrix::<f64>::zeros(spaces[r - 1].len(), width);
            for (col, &b) in spaces[r].iter().enumerate() {
                for bit in 0..n {
                    if b & (1 << bit) != 0 {
                        raise[(position(r - 1, b & !(1 << bit)), col)] += 1.0;
                    }
                }
            }
            let eig: SymmetricEigen<f64, nalgebra::Dyn> = SymmetricEigen::new(raise.transpose() * raise);
            let cols: Vec<_> = (0..width)
                .filter(|&i| eig.eigenvalues[i].abs() < 1e-8)
                .map(|i| eig.eigenvectors.column(i).into_owned())
                .collect();
            DMatrix::from_columns(&cols)
        };
        debug_assert_eq!(highest.ncols() as f64, multiplicity(n, r));
        let mut ladder = vec![highest.clone()];
        for k in r..n - r {
            let mut lowered = DMatrix::<f64>::zeros(spaces[k + 1].len(), highest.ncols());
            for (row, &b) in spaces[k].iter().enumerate() {
                for bit in 0..n {
                    if b & (1 << bit) == 0 {
                        let target = position(k + 1, b | (1 << bit));
                        for mu in 0..highest.ncols() {
                            lowered[(target, mu)] += highest[(row, mu)];
                        }
                    }
                }
            }
            for mut col in lowered.column_iter_mut() {
                let norm = col.norm();
                col /= norm;
            }
            ladder.push(lowered.clone());
            highest = lowered;
        }
        out.push(ladder);
    }
    out
}

#[derive(Debug, Clone)]
pub(crate) struct Block {
    pub(crate) sectors: Vec<usize>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    pub(crate) dim: usize,
    pub(crate) offset: usize,
    pub(crate) multiplicity: f64,
    ham: SplitHamiltonian,
}

impl Block {
    fn local(&self, x: usize) -> Vec<usize> {
        self.strides
            .iter()
            .zip(&self.dims)
            .map(|(s, d)| (x / s) % d)
            .collect()
    }
}

/// Block layout, Hamiltonians and dephasing transfers for `M` ensembles of size `N`.
#[derive(Debug, Clone)]
pub(crate) struct ReducedModel {
    m: usize,
    n: usize,
    pub(crate) blocks: Vec<Block>,
    pub(crate) len: usize,
    transfers: Vec<(u32, u32, f64)>,
}

impl ReducedModel {
    pub(crate) fn new(inst: &ProblemInstance, n: usize) -> Result<Self> {
        let m = inst.m();
        let table = DephasingTable::new(n)?;
        let sectors = sector_count(n);
        let block_count = sectors.pow(m as u32);
        let mut blocks = Vec::with_capacity(block_count);
        let mut offset = 0;
        for b in 0..block_count {
            let rs: Vec<usize> = (0..m)
                .map(|site| (b / sectors.pow((m - 1 - site) as u32)) % sectors)
                .collect();
            let dims: Vec<usize> = rs.iter().map(|&r| sector_dim(n, r)).collect();
            let mut strides = vec![1; m];
            for site in (0..m.saturating_sub(1)).rev() {
                strides[site] = strides[site + 1] * dims[site + 1];
            }
            let dim: usize = dims.iter().product();
            let multiplicity = rs.iter().map(|&r| multiplicity(n, r)).product();
            let ham = block_hamiltonian(inst, n, &rs, &dims, &strides);
            blocks.push(Block {
                sectors: rs,
                dims,
                strides,
                dim,
                offset,
                multiplicity,
                ham,
            });
            offset += dim * dim;
        }
        let len = offset;
        let mut transfers = Vec::new();
        for bt in &blocks {
            for col in 0..bt.dim {
                let qc = bt.local(col);
                for row in 0..bt.dim {
                    let qr = bt.local(row);
                    let target = bt.offset + row + col * bt.dim;
                    for site in 0..m {
                        let rt = bt.sectors[site];
                        let k = rt + qr[site];
                        let kp = rt + qc[site];
                        for rs in rt.saturating_sub(1)..=(rt + 1).min(sectors - 1) {
                            let ds = sector_dim(n, rs);
                            if k < rs || kp < rs || k - rs >= ds || kp - rs >= ds {
                                continue;
                            }
                            let c = table.get(rt, rs, k, kp);
                            if c.abs() < 1e-14 {
                                continue;
                            }
                            let source_index = block_index(&bt.sectors, site, rs, sectors);
                            let bs = &blocks[source_index];
                            let mut src_row = 0;
                            let mut src_col = 0;
                            for s in 0..m {
                                let (a, b) = if s == site {
                                    (k - rs, kp - rs)
                                } else {
                                    (qr[s], qc[s])
                                };
                                src_row += a * bs.strides[s];
                                src_col += b * bs.strides[s];
                            }
                            let source = bs.offset + src_row + src_col * bs.dim;
                            transfers.push((target as u32, source as u32, c));
                        }
                    }
                }
            }
        }
        Ok(Self {
            m,
            n,
            blocks,
            len,
            transfers,
        })
    }

    /// Reduced storage of the pure symmetric state `psi` (flat Fock indexing).
    pub(crate) fn embed_symmetric(&self, psi: &[C]) -> Vec<C> {
        let mut y = vec![C::new(0.0, 0.0); self.len];
        let b = &self.blocks[0];
        debug_assert!(b.sectors.iter().all(|&r| r == 0));
        for col in 0..b.dim {
            for row in 0..b.dim {
                y[b.offset + row + col * b.dim] = psi[row] * psi[col].conj();
            }
        }
        y
    }

    /// `dy = i[rho, H] + gamma (sum_s sigma^z rho sigma^z - N M rho)`.
    pub(crate) fn rhs(&self, lambda: f64, gamma: f64, y: &[C], scratch: &mut [C], out: &mut [C]) {
        for b in &self.blocks {
            let range = b.offset..b.offset + b.dim * b.dim;
            b.ham.commutator(lambda, &y[range.clone()], &mut scratch[range.clone()], &mut out[range]);
        }
        if gamma > 0.0 {
            let loss = gamma * (self.n * self.m) as f64;
            for (o, &v) in out.iter_mut().zip(y) {
                *o -= v * loss;
            }
            for &(t, s, c) in &self.transfers {
                out[t as usize] += y[s as usize] * (gamma * c);
            }
        }
    }

    pub(crate) fn trace(&self, y: &[C]) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.multiplicity * kernel::trace(b.dim, &y[b.offset..b.offset + b.dim * b.dim]).re)
            .sum()
    }

    pub(crate) fn hermiticity_defect(&self, y: &[C]) -> f64 {
        self.blocks
            .iter()
            .map(|b| kernel::hermiticity_defect(b.dim, &y[b.offset..b.offset + b.dim * b.dim]))
            .fold(0.0, f64::max)
    }

    pub(crate) fn min_eigenvalue(&self, y: &[C]) -> f64 {
        self.blocks
            .iter()
            .map(|b| kernel::min_eigenvalue(b.dim, &y[b.offset..b.offset + b.dim * b.dim]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distribution of the collective `S^z` outcomes, indexed like the symmetric Fock basis.
    pub(crate) fn populations(&self, y: &[C]) -> Vec<f64> {
        let n = self.n;
        let mut p = vec![0.0; (n + 1).pow(self.m as u32)];
        for b in &self.blocks {
            for x in 0..b.dim {
                let q = b.local(x);
                let mut flat = 0;
                for site in 0..self.m {
                    flat = flat * (n + 1) + b.sectors[site] + q[site];
                }
                p[flat] += b.multiplicity * y[b.offset + x + x * b.dim].re;
            }
        }
        p
    }

    pub(crate) fn block_matrices(&self, y: &[C]) -> Vec<(Vec<usize>, f64, DMatrix<C>)> {
        self.blocks
            .iter()
            .map(|b| {
                let data = &y[b.offset..b.offset + b.dim * b.dim];
                (b.sectors.clone(), b.multiplicity, DMatrix::from_column_slice(b.dim, b.dim, data))
            })
            .collect()
    }
}

fn block_index(sectors_of: &[usize], site: usize, replacement: usize, sectors: usize) -> usize {
    sectors_of
        .iter()
        .enumerate()
        .fold(0, |acc, (s, &r)| acc * sectors + if s == site { replacement } else { r })
}

fn block_hamiltonian(
    inst: &ProblemInstance,
    n: usize,
    rs: &[usize],
    dims: &[usize],
    strides: &[usize],
) -> SplitHamiltonian {
    let m = rs.len();
    let dim: usize = dims.iter().product();
    let nf = n as f64;
    let mut hz = Vec::with_capacity(dim);
    let mut rows = Vec::with_capacity(dim);
    for x in 0..dim {
        let q: Vec<usize> = (0..m).map(|s| (x / strides[s]) % dims[s]).collect();
        let sz: Vec<f64> = (0..m).map(|s| nf - 2.0 * (rs[s] + q[s]) as f64).collect();
        let mut e = 0.0;
        for i in 0..m {
            e += inst.k(i) * sz[i];
            for j in 0..m {
                e += inst.j(i, j) * sz[i] * sz[j] / nf;
            }
        }
        hz.push(e);
        let mut row = Vec::new();
        for s in 0..m {
            // <q+1| S^x |q> = sqrt((2j - q)(q + 1)) with 2j = N - 2r.
            let two_j = (n - 2 * rs[s]) as f64;
            let qs = q[s] as f64;
            if q[s] > 0 {
                row.push((x - strides[s], -((two_j - qs + 1.0) * qs).sqrt()));
            }
            if q[s] + 1 < dims[s] {
                row.push((x + strides[s], -((two_j - qs) * (qs + 1.0)).sqrt()));
            }
        }
        rows.push(row);
    }
    SplitHamiltonian {
        hz,
        hx: Sparse::from_rows(dim, rows),
    }
}
