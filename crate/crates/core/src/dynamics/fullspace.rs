//! Explicit `2^(NM)`-dimensional representation with independent qubit dephasing.
//! Qubit `s` of ensemble `i` is bit `i N + s` of the basis index; a set bit is a
//! flipped spin.

use super::kernel::{Sparse, SplitHamiltonian, C};
use crate::instances::ProblemInstance;

#[derive(Debug, Clone)]
pub(crate) struct FullSpaceModel {
    m: usize,
    n: usize,
    pub(crate) dim: usize,
    ham: SplitHamiltonian,
}

impl FullSpaceModel {
    pub(crate) fn new(inst: &ProblemInstance, n: usize) -> Self {
        let m = inst.m();
        let qubits = n * m;
        let dim = 1usize << qubits;
        let nf = n as f64;
        let mut hz = Vec::with_capacity(dim);
        let mut rows = Vec::with_capacity(dim);
        for a in 0..dim {
            let sz: Vec<f64> = (0..m)
                .map(|i| nf - 2.0 * flipped(a, i, n) as f64)
                .collect();
            let mut e = 0.0;
            for i in 0..m {
                e += inst.k(i) * sz[i];
                for j in 0..m {
                    e += inst.j(i, j) * sz[i] * sz[j] / nf;
                }
            }
            hz.push(e);
            rows.push((0..qubits).map(|q| (a ^ (1 << q), -1.0)).collect());
        }
        Self {
            m,
            n,
            dim,
            ham: SplitHamiltonian {
                hz,
                hx: Sparse::from_rows(dim, rows),
            },
        }
    }

    /// Every qubit in the `+x` eigenstate.
    pub(crate) fn initial_density(&self) -> Vec<C> {
        vec![C::new(1.0 / self.dim as f64, 0.0); self.dim * self.dim]
    }

    /// Symmetric Fock amplitudes spread uniformly over their bitstrings.
    pub(crate) fn embed_symmetric(&self, psi: &[C]) -> Vec<C> {
        (0..self.dim)
            .map(|a| {
                let mut flat = 0;
                let mut weight = 1.0;
                for i in 0..self.m {
                    let k = flipped(a, i, self.n);
                    flat = flat * (self.n + 1) + k;
                    weight *= binomial(self.n, k);
                }
                psi[flat] / weight.sqrt()
            })
            .collect()
    }

    /// `dy = i[rho, H] - gamma sum_q (rho - sigma^z_q rho sigma^z_q)`.
    pub(crate) fn rhs(&self, lambda: f64, gamma: f64, y: &[C], scratch: &mut [C], out: &mut [C]) {
        let d = self.dim;
        self.ham.commutator(lambda, y, scratch, out);
        if gamma > 0.0 {
            for b in 0..d {
                for a in 0..d {
                    let w = 2.0 * gamma * (a ^ b).count_ones() as f64;
                    out[a + b * d] -= y[a + b * d] * w;
                }
            }
        }
    }

    pub(crate) fn populations(&self, y: &[C]) -> Vec<f64> {
        let mut p = vec![0.0; (self.n + 1).pow(self.m as u32)];
        for a in 0..self.dim {
            let flat = (0..self.m).fold(0, |acc, i| acc * (self.n + 1) + flipped(a, i, self.n));
            p[flat] += y[a + a * self.dim].re;
        }
        p
    }
}

fn flipped(a: usize, ensemble: usize, n: usize) -> usize {
    ((a >> (ensemble * n)) & ((1 << n) - 1)).count_ones() as usize
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
