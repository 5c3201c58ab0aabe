//! Classical energy landscape of the problem Hamiltonian.
//!
//! Corner energies use the qubit convention `sum_{i,j} J_ij s_i s_j + sum_i K_i s_i`
//! where the double sum runs over all ordered pairs. The ensemble problem
//! Hamiltonian divided by `N` is the same quadratic form evaluated at the
//! rescaled spins `x_i = S_i^z / N`, so the continuous trajectories below are
//! expressed through [`rescaled_energy`].

use log::{debug, info};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instances::{random_instance_from, ProblemInstance, SpinConfiguration};

/// Largest `M` accepted by exhaustive corner enumeration.
pub const ENUMERATION_LIMIT: usize = 24;

/// Relative tolerance under which two energies are considered equal.
pub const ENERGY_TOLERANCE: f64 = 1e-9;

fn scale(a: f64, b: f64) -> f64 {
    1.0_f64.max(a.abs()).max(b.abs())
}

/// `a > b` beyond floating-point noise.
pub fn strictly_greater(a: f64, b: f64) -> bool {
    a - b > ENERGY_TOLERANCE * scale(a, b)
}

/// `a == b` up to floating-point noise.
pub fn energies_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= ENERGY_TOLERANCE * scale(a, b)
}

/// Quadratic form `sum_{i,j} J_ij x_i x_j + sum_i K_i x_i` for arbitrary real `x`.
pub fn rescaled_energy(inst: &ProblemInstance, x: &[f64]) -> f64 {
    let m = inst.m();
    let mut e = 0.0;
    for i in 0..m {
        let mut row = 0.0;
        for j in 0..m {
            row += inst.j(i, j) * x[j];
        }
        e += x[i] * (row + inst.k(i));
    }
    e
}

/// Energy of a hypercube corner (qubit spin configuration).
pub fn corner_energy(inst: &ProblemInstance, sigma: &SpinConfiguration) -> Result<f64> {
    check_len(inst, sigma.len())?;
    let x: Vec<f64> = (0..sigma.len()).map(|i| sigma.get(i)).collect();
    Ok(rescaled_energy(inst, &x))
}

fn check_len(inst: &ProblemInstance, len: usize) -> Result<()> {
    if len != inst.m() {
        return Err(Error::Shape(format!(
            "configuration has length {len} but M = {}",
            inst.m()
        )));
    }
    Ok(())
}

/// Result of exhaustive enumeration of all `2^M` corners.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundCorners {
    /// First minimum in lexicographic order (`-1 < +1`).
    pub sigma_star: SpinConfiguration,
    pub eps0: f64,
    /// Second-lowest distinct corner energy; `None` when every corner is degenerate.
    pub eps1: Option<f64>,
    pub ground_multiplicity: usize,
    pub excited_multiplicity: usize,
}

impl GroundCorners {
    pub fn is_unique(&self) -> bool {
        self.ground_multiplicity == 1
    }

    /// `eps1 - eps0`, the qubit gap at the end of the sweep.
    pub fn corner_spacing(&self) -> Option<f64> {
        self.eps1.map(|e1| e1 - self.eps0)
    }
}

/// Enumerates every corner and reports the lowest and second-lowest distinct energies.
pub fn qubit_ground_state(inst: &ProblemInstance) -> Result<GroundCorners> {
    let m = inst.m();
    if m > ENUMERATION_LIMIT {
        return Err(Error::GuardExceeded {
            what: "M",
            value: m,
            limit: ENUMERATION_LIMIT,
        });
    }
    let energies: Vec<f64> = (0..1u64 << m)
        .map(|c| {
            let x: Vec<f64> = (0..m)
                .map(|i| if (c >> (m - 1 - i)) & 1 == 1 { 1.0 } else { -1.0 })
                .collect();
            rescaled_energy(inst, &x)
        })
        .collect();

    let mut best = 0usize;
    for (c, &e) in energies.iter().enumerate() {
        if e < energies[best] && !energies_equal(e, energies[best]) {
            best = c;
        }
    }
    let eps0 = energies[best];
    let ground_multiplicity = energies.iter().filter(|&&e| energies_equal(e, eps0)).count();
    let eps1 = energies
        .iter()
        .copied()
        .filter(|&e| !energies_equal(e, eps0))
        .fold(None, |acc: Option<f64>, e| match acc {
            Some(a) if a <= e => Some(a),
            _ => Some(e),
        });
    let excited_multiplicity = eps1
        .map(|e1| energies.iter().filter(|&&e| energies_equal(e, e1)).count())
        .unwrap_or(0);

    Ok(GroundCorners {
        sigma_star: SpinConfiguration::from_index(m, best as u64),
        eps0,
        eps1,
        ground_multiplicity,
        excited_multiplicity,
    })
}

/// [`qubit_ground_state`], failing when the ground corner is degenerate.
pub fn unique_ground(inst: &ProblemInstance) -> Result<GroundCorners> {
    let g = qubit_ground_state(inst)?;
    if !g.is_unique() {
        return Err(Error::DegenerateGround {
            multiplicity: g.ground_multiplicity,
            energy: g.eps0,
        });
    }
    Ok(g)
}

/// Single-flip excitation energies at `sigma`: `-2 s_k (2 sum_i J_ik s_i + K_k)`.
///
/// At the ground corner these are the components of the energy gradient with
/// respect to the flip parameters and are all non-negative.
pub fn ground_gradient(inst: &ProblemInstance, sigma: &SpinConfiguration) -> Result<Vec<f64>> {
    check_len(inst, sigma.len())?;
    let m = inst.m();
    Ok((0..m)
        .map(|k| {
            let field: f64 = (0..m).map(|i| inst.j(i, k) * sigma.get(i)).sum();
            -2.0 * sigma.get(k) * (2.0 * field + inst.k(k))
        })
        .collect())
}

/// Minimum single-flip gap `delta`, independent of `N`.
pub fn delta_gap(inst: &ProblemInstance) -> Result<f64> {
    let g = unique_ground(inst)?;
    let grads = ground_gradient(inst, &g.sigma_star)?;
    Ok(grads.into_iter().fold(f64::INFINITY, f64::min))
}

/// Corner gap `Delta = N (eps1 - eps0)`.
pub fn corner_gap(inst: &ProblemInstance, n: usize) -> Result<f64> {
    let g = qubit_ground_state(inst)?;
    let spacing = g.corner_spacing().ok_or_else(|| {
        Error::InvalidArgument("all corners are degenerate; no excited corner exists".into())
    })?;
    Ok(n as f64 * spacing)
}

fn critical_from(spacing: f64, delta: f64) -> usize {
    // Smallest N with N * spacing > delta; ties within tolerance do not qualify.
    let mut n = ((delta / spacing).floor() as usize).max(1);
    while n > 1 && strictly_greater((n - 1) as f64 * spacing, delta) {
        n -= 1;
    }
    while !strictly_greater(n as f64 * spacing, delta) {
        n += 1;
    }
    n
}

/// Smallest ensemble size `N` with `Delta > delta`.
///
/// Refused with [`Error::DegenerateGround`] when the ground corner is not unique.
pub fn critical_ensemble_size(inst: &ProblemInstance) -> Result<usize> {
    let g = unique_ground(inst)?;
    let delta = ground_gradient(inst, &g.sigma_star)?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let spacing = g
        .corner_spacing()
        .expect("a unique ground corner implies an excited corner for M >= 1");
    Ok(critical_from(spacing, delta))
}

/// `f(eps) = E(x(eps)) - E0` along the straight line from the ground corner to the
/// corner obtained by flipping the spins selected by `flips`, with
/// `x_i = s_i (1 - 2 n_i eps)`.
pub fn corner_trajectory_energy(
    inst: &ProblemInstance,
    sigma_star: &SpinConfiguration,
    flips: &[bool],
    eps: f64,
) -> Result<f64> {
    check_len(inst, flips.len())?;
    if !flips.iter().any(|&f| f) {
        return Err(Error::InvalidArgument(
            "trajectory must flip at least one spin".into(),
        ));
    }
    let alpha: Vec<f64> = flips.iter().map(|&f| if f { 1.0 } else { 0.0 }).collect();
    along(inst, sigma_star, &alpha, eps)
}

/// `F(eps)` along an arbitrary straight trajectory `x_i = s_i (1 - 2 alpha_i eps)`
/// with `alpha in [0,1]^M` and `max alpha = 1`.
pub fn trajectory_energy(
    inst: &ProblemInstance,
    sigma_star: &SpinConfiguration,
    alpha: &[f64],
    eps: f64,
) -> Result<f64> {
    check_len(inst, alpha.len())?;
    if alpha.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(Error::InvalidArgument("alpha entries must lie in [0, 1]".into()));
    }
    let sup = alpha.iter().copied().fold(0.0, f64::max);
    if sup != 1.0 {
        return Err(Error::InvalidArgument(format!(
            "max alpha must equal 1, got {sup}"
        )));
    }
    along(inst, sigma_star, alpha, eps)
}

fn along(inst: &ProblemInstance, sigma: &SpinConfiguration, alpha: &[f64], eps: f64) -> Result<f64> {
    check_len(inst, sigma.len())?;
    let m = inst.m();
    let x0: Vec<f64> = (0..m).map(|i| sigma.get(i)).collect();
    let x: Vec<f64> = (0..m)
        .map(|i| sigma.get(i) * (1.0 - 2.0 * alpha[i] * eps))
        .collect();
    Ok(rescaled_energy(inst, &x) - rescaled_energy(inst, &x0))
}

/// Everything the landscape report prints for one instance and ensemble size.
#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeSummary {
    pub ground: GroundCorners,
    pub delta: Option<f64>,
    pub corner_gap: Option<f64>,
    pub critical_size: Option<usize>,
}

pub fn summarize(inst: &ProblemInstance, n: usize) -> Result<LandscapeSummary> {
    let ground = qubit_ground_state(inst)?;
    let (delta, critical_size) = if ground.is_unique() {
        (Some(delta_gap(inst)?), Some(critical_ensemble_size(inst)?))
    } else {
        (None, None)
    };
    let corner_gap = ground.corner_spacing().map(|s| n as f64 * s);
    Ok(LandscapeSummary {
        ground,
        delta,
        corner_gap,
        critical_size,
    })
}

/// Seed of sample `index` in a batch derived from `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    use rand::RngCore;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng.next_u64()
}

/// Fraction of `samples` random instances for which `Delta < delta` at ensemble size `n`
/// (equivalently `n < N_c`). Instances with a degenerate ground corner count as `false`.
pub fn nc_fraction(m: usize, n: usize, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let critical = critical_sizes(m, samples, seed)?;
    Ok(fraction_below(&critical, n))
}

/// `N_c` of each sample instance (`None` for degenerate ground corners).
pub fn critical_sizes(m: usize, samples: usize, seed: u64) -> Result<Vec<Option<usize>>> {
    (0..samples as u64)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i));
            let inst = random_instance_from(m, &mut rng);
            match critical_ensemble_size(&inst) {
                Ok(nc) => Ok(Some(nc)),
                Err(Error::DegenerateGround { .. }) => {
                    debug!("sample {i}: degenerate ground corner, counted as Delta >= delta");
                    Ok(None)
                }
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Fraction of the given critical sizes that exceed `n`.
pub fn fraction_below(critical: &[Option<usize>], n: usize) -> f64 {
    let below = critical
        .iter()
        .filter(|nc| matches!(nc, Some(c) if n < *c))
        .count();
    below as f64 / critical.len() as f64
}

/// Predicate on `N_c` used to select random instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcFilter {
    Equals(usize),
    Above(usize),
}

impl NcFilter {
    pub fn accepts(self, nc: usize) -> bool {
        match self {
            NcFilter::Equals(v) => nc == v,
            NcFilter::Above(v) => nc > v,
        }
    }
}

impl std::str::FromStr for NcFilter {
    type Err = Error;

    /// `"3"` selects `N_c = 3`, `">7"` selects `N_c > 7`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (above, digits) = match s.strip_prefix('>') {
            Some(rest) => (true, rest.trim()),
            None => (false, s),
        };
        let v: usize = digits
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad N_c filter {s:?}")))?;
        Ok(if above { NcFilter::Above(v) } else { NcFilter::Equals(v) })
    }
}

impl std::fmt::Display for NcFilter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NcFilter::Equals(v) => write!(f, "{v}"),
            NcFilter::Above(v) => write!(f, ">{v}"),
        }
    }
}

/// Upper bound on draws while rejection sampling a filtered set.
pub const MAX_FILTER_DRAWS: u64 = 10_000_000;

/// Random instances passing an `N_c` filter.
#[derive(Debug, Clone)]
pub struct FilteredSet {
    pub instances: Vec<ProblemInstance>,
    /// Sample index of each accepted instance; its seed is `derive_seed(seed, index)`.
    pub sample_indices: Vec<u64>,
    pub rejected: u64,
}

/// Draws instances with seeds `derive_seed(seed, 0)`, `derive_seed(seed, 1)`, ...
/// and keeps the first `count` with a unique ground corner whose `N_c` passes `filter`.
pub fn filtered_instances(m: usize, count: usize, filter: NcFilter, seed: u64) -> Result<FilteredSet> {
    let mut set = FilteredSet {
        instances: Vec::with_capacity(count),
        sample_indices: Vec::with_capacity(count),
        rejected: 0,
    };
    let mut index = 0u64;
    while set.instances.len() < count {
        if index >= MAX_FILTER_DRAWS {
            return Err(Error::GuardExceeded {
                what: "filter draws",
                value: index as usize,
                limit: MAX_FILTER_DRAWS as usize,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, index));
        let inst = random_instance_from(m, &mut rng);
        match critical_ensemble_size(&inst) {
            Ok(nc) if filter.accepts(nc) => {
                set.instances.push(inst);
                set.sample_indices.push(index);
            }
            Ok(_) | Err(Error::DegenerateGround { .. }) => set.rejected += 1,
            Err(e) => return Err(e),
        }
        index += 1;
    }
    info!(
        "N_c filter {filter}: accepted {count}, rejected {} of {index} draws",
        set.rejected
    );
    Ok(set)
}
