//! Shared numerical kernels: sparse real operators acting on complex data,
//! split Hamiltonians, column-major density-matrix helpers and RK4.

use num_complex::Complex64;

pub(crate) type C = Complex64;

pub(crate) const I: C = C::new(0.0, 1.0);

/// Off-diagonal part of a real sparse matrix in CSR form.
#[derive(Debug, Clone)]
pub(crate) struct Sparse {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Sparse {
    /// Entries must be listed row by row.
    pub(crate) fn from_rows(dim: usize, rows: impl IntoIterator<Item = Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        assert_eq!(row_ptr.len(), dim + 1);
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.dim
    }

    /// `y = a (A x) + b y`.
    #[inline]
    pub(crate) fn apply_scaled(&self, a: f64, x: &[C], b: f64, y: &mut [C]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = C::new(0.0, 0.0);
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += x[self.cols[idx]] * self.vals[idx];
            }
            *out = *out * b + acc * a;
        }
    }
}

/// `H(lambda) = (1 - lambda) H_X + lambda diag(H_Z)`.
#[derive(Debug, Clone)]
pub(crate) struct SplitHamiltonian {
    pub(crate) hz: Vec<f64>,
    pub(crate) hx: Sparse,
}

impl SplitHamiltonian {
    pub(crate) fn dim(&self) -> usize {
        self.hz.len()
    }

    /// `y = (H(lambda) - shift) x`.
    #[inline]
    pub(crate) fn apply(&self, lambda: f64, shift: f64, x: &[C], y: &mut [C]) {
        for ((out, &h), &xi) in y.iter_mut().zip(&self.hz).zip(x) {
            *out = xi * (lambda * h - shift);
        }
        self.hx.apply_scaled(1.0 - lambda, x, 1.0, y);
    }

    /// `out = i [rho, H(lambda)]` for a Hermitian column-major `rho`. `scratch`
    /// receives `Y = rho H`, built from contiguous column updates; then
    /// `H rho = Y^dagger` because both factors are Hermitian.
    pub(crate) fn commutator(&self, lambda: f64, rho: &[C], scratch: &mut [C], out: &mut [C]) {
        let d = self.dim();
        let off = 1.0 - lambda;
        let hx = &self.hx;
        for (b, col) in scratch.chunks_exact_mut(d).enumerate() {
            let diag = lambda * self.hz[b];
            for (c, &r) in col.iter_mut().zip(&rho[b * d..(b + 1) * d]) {
                *c = r * diag;
            }
            // H is real symmetric, so row b of the CSR lists H[b', b].
            for idx in hx.row_ptr[b]..hx.row_ptr[b + 1] {
                let src = hx.cols[idx];
                let v = off * hx.vals[idx];
                for (c, &r) in col.iter_mut().zip(&rho[src * d..(src + 1) * d]) {
                    *c += r * v;
                }
            }
        }
        commutator_from_right_product(d, scratch, out);
    }
}


/// `out = i (Y - Y^dagger)`, which equals `i [rho, H]` when `Y = rho H`.
fn commutator_from_right_product(d: usize, y: &[C], out: &mut [C]) {
    // Tiled so the transposed reads stay in cache.
    const TILE: usize = 32;
    for b0 in (0..d).step_by(TILE) {
        for a0 in (0..d).step_by(TILE) {
            for b in b0..(b0 + TILE).min(d) {
                for a in a0..(a0 + TILE).min(d) {
                    out[a + b * d] = I * (y[a + b * d] - y[b + a * d].conj());
                }
            }
        }
    }
}

/// `tr rho` of a column-major matrix.
pub(crate) fn trace(d: usize, rho: &[C]) -> C {
    (0..d).map(|a| rho[a + a * d]).sum()
}

/// Largest `|rho_ab - conj(rho_ba)|`.
pub(crate) fn hermiticity_defect(d: usize, rho: &[C]) -> f64 {
    let mut worst = 0.0_f64;
    for b in 0..d {
        for a in 0..=b {
            worst = worst.max((rho[a + b * d] - rho[b + a * d].conj()).norm());
        }
    }
    worst
}

/// Smallest eigenvalue of the Hermitian part of a column-major matrix.
pub(crate) fn min_eigenvalue(d: usize, rho: &[C]) -> f64 {
    let m = nalgebra::DMatrix::from_fn(d, d, |a, b| 0.5 * (rho[a + b * d] + rho[b + a * d].conj()));
    m.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Work buffers of the classical fourth-order Runge-Kutta scheme.
pub(crate) struct Rk4 {
    k: Vec<C>,
    acc: Vec<C>,
    stage: Vec<C>,
}

impl Rk4 {
    pub(crate) fn new(len: usize) -> Self {
        Self {
            k: vec![C::new(0.0, 0.0); len],
            acc: vec![C::new(0.0, 0.0); len],
            stage: vec![C::new(0.0, 0.0); len],
        }
    }

    /// Advances `y` from `t` to `t + dt` for `y' = f(t, y)`.
    pub(crate) fn step<F>(&mut self, y: &mut [C], t: f64, dt: f64, mut f: F)
    where
        F: FnMut(f64, &[C], &mut [C]),
    {
        let half = 0.5 * dt;
        f(t, y, &mut self.k);
        for ((acc, st), (&k, &yi)) in self.acc.iter_mut().zip(self.stage.iter_mut()).zip(self.k.iter().zip(y.iter())) {
            *acc = k;
            *st = yi + k * half;
        }
        f(t + half, &self.stage, &mut self.k);
        for ((acc, st), (&k, &yi)) in self.acc.iter_mut().zip(self.stage.iter_mut()).zip(self.k.iter().zip(y.iter())) {
            *acc += k * 2.0;
            *st = yi + k * half;
        }
        f(t + half, &self.stage, &mut self.k);
        for ((acc, st), (&k, &yi)) in self.acc.iter_mut().zip(self.stage.iter_mut()).zip(self.k.iter().zip(y.iter())) {
            *acc += k * 2.0;
            *st = yi + k * dt;
        }
        f(t + dt, &self.stage, &mut self.k);
        let sixth = dt / 6.0;
        for ((yi, &acc), &k) in y.iter_mut().zip(&self.acc).zip(&self.k) {
            *yi += (acc + k) * sixth;
        }
    }
}
