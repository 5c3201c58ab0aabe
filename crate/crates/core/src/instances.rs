//! Problem instances `(J, K, M)` for the Ising-type problem Hamiltonian and
//! the named families used throughout the toolkit.
//!
//! Random instances are drawn from a ChaCha8 stream seeded through
//! `SeedableRng::seed_from_u64`; for a fixed seed the instance is identical on
//! every platform. Couplings are drawn first, row by row over the upper
//! triangle (`i < j`), followed by the `M` biases.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric, zero-diagonal couplings `J` and biases `K` over `M` logical spins.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    m: usize,
    coupling: Vec<f64>,
    bias: Vec<f64>,
}

impl ProblemInstance {
    /// Builds an instance from a full `M x M` coupling matrix and bias vector,
    /// validating symmetry, zero diagonal and finiteness.
    pub fn new(coupling: Vec<Vec<f64>>, bias: Vec<f64>) -> Result<Self> {
        let m = bias.len();
        if m == 0 {
            return Err(Error::Shape("instance needs at least one spin".into()));
        }
        if coupling.len() != m {
            return Err(Error::Shape(format!(
                "J has {} rows but K has length {m}",
                coupling.len()
            )));
        }
        let mut flat = Vec::with_capacity(m * m);
        for (i, row) in coupling.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Shape(format!(
                    "J row {i} has length {} but M = {m}",
                    row.len()
                )));
            }
            flat.extend_from_slice(row);
        }
        let inst = Self {
            m,
            coupling: flat,
            bias,
        };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<()> {
        let m = self.m;
        if self.coupling.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("J".into()));
        }
        if self.bias.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("K".into()));
        }
        for i in 0..m {
            let d = self.coupling[i * m + i];
            if d != 0.0 {
                return Err(Error::NonzeroDiagonal { i, value: d });
            }
            for j in (i + 1)..m {
                let a = self.coupling[i * m + j];
                let b = self.coupling[j * m + i];
                if a != b {
                    return Err(Error::Asymmetric { i, j, a, b });
                }
            }
        }
        Ok(())
    }

    /// Number of logical spins (ensembles).
    pub fn m(&self) -> usize {
        self.m
    }

    /// Coupling `J[i][j]`.
    #[inline]
    pub fn j(&self, i: usize, j: usize) -> f64 {
        self.coupling[i * self.m + j]
    }

    /// Bias `K[i]`.
    #[inline]
    pub fn k(&self, i: usize) -> f64 {
        self.bias[i]
    }

    pub fn biases(&self) -> &[f64] {
        &self.bias
    }

    /// Coupling matrix as nested rows.
    pub fn coupling_rows(&self) -> Vec<Vec<f64>> {
        self.coupling.chunks(self.m).map(<[f64]>::to_vec).collect()
    }

    /// Serializes to the instance document (`{"M": .., "J": [[..]], "K": [..]}`).
    pub fn to_json(&self) -> String {
        let doc = InstanceDoc {
            m: self.m,
            j: self.coupling_rows(),
            k: self.bias.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("instance document is always serializable")
    }

    /// Parses and validates an instance document.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDoc =
            serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        if doc.k.len() != doc.m {
            return Err(Error::Shape(format!(
                "K has length {} but M = {}",
                doc.k.len(),
                doc.m
            )));
        }
        Self::new(doc.j, doc.k)
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "J")]
    j: Vec<Vec<f64>>,
    #[serde(rename = "K")]
    k: Vec<f64>,
}

/// A classical spin configuration with entries in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinConfiguration(Vec<i8>);

impl SpinConfiguration {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(s) = spins.iter().find(|s| **s != 1 && **s != -1) {
            return Err(Error::InvalidArgument(format!(
                "spin entries must be +1 or -1, found {s}"
            )));
        }
        Ok(Self(spins))
    }

    /// Configuration number `index` in lexicographic order with `-1 < +1`;
    /// spin 0 is the most significant position.
    pub fn from_index(m: usize, index: u64) -> Self {
        Self(
            (0..m)
                .map(|i| {
                    if (index >> (m - 1 - i)) & 1 == 1 {
                        1
                    } else {
                        -1
                    }
                })
                .collect(),
        )
    }

    pub fn all(m: usize, value: i8) -> Self {
        assert!(value == 1 || value == -1);
        Self(vec![value; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        f64::from(self.0[i])
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    /// Copy with spin `i` flipped.
    pub fn flipped(&self, i: usize) -> Self {
        let mut s = self.0.clone();
        s[i] = -s[i];
        Self(s)
    }
}

impl fmt::Display for SpinConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s:+}")?;
        }
        write!(f, ")")
    }
}

/// Draws an instance from an existing generator: upper-triangle couplings then biases,
/// all uniform on `[-1, 1]`.
pub fn random_instance_from<R: Rng>(m: usize, rng: &mut R) -> ProblemInstance {
    assert!(m >= 1, "M must be at least 1");
    let mut coupling = vec![0.0; m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let v = rng.random_range(-1.0..=1.0);
            coupling[i * m + j] = v;
            coupling[j * m + i] = v;
        }
    }
    let bias = (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect();
    ProblemInstance { m, coupling, bias }
}

/// Uniform random instance on `[-1, 1]`, a pure function of `(m, seed)`.
pub fn random_instance(m: usize, seed: u64) -> Result<ProblemInstance> {
    if m < 1 {
        return Err(Error::InvalidArgument("M must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(random_instance_from(m, &mut rng))
}

/// Ferromagnet with uniform bias: `J_ij = -1` off the diagonal, `K_i = k`.
pub fn ferromagnetic_instance(m: usize, k: f64) -> Result<ProblemInstance> {
    if m < 2 {
        return Err(Error::InvalidArgument(
            "ferromagnetic instance needs M >= 2".into(),
        ));
    }
    if !k.is_finite() {
        return Err(Error::NonFinite("K".into()));
    }
    let mut coupling = vec![-1.0; m * m];
    for i in 0..m {
        coupling[i * m + i] = 0.0;
    }
    Ok(ProblemInstance {
        m,
        coupling,
        bias: vec![k; m],
    })
}

/// The three-variable Exact Cover instance with a unique satisfying assignment.
pub fn exact_cover_instance() -> ProblemInstance {
    ProblemInstance::new(
        vec![
            vec![0.0, 0.5, 0.0],
            vec![0.5, 0.0, 0.5],
            vec![0.0, 0.5, 0.0],
        ],
        vec![-1.0, -1.0, -1.0],
    )
    .expect("exact cover instance is valid")
}

/// Instance used for the spectrum and dynamics illustrations:
/// `J12 = -0.5, J13 = 0, J23 = -1, K = (0.5, 0, 1)`.
pub fn spectrum_example_instance() -> ProblemInstance {
    ProblemInstance::new(
        vec![
            vec![0.0, -0.5, 0.0],
            vec![-0.5, 0.0, -1.0],
            vec![0.0, -1.0, 0.0],
        ],
        vec![0.5, 0.0, 1.0],
    )
    .expect("example instance is valid")
}

/// Instance used for the energy-landscape illustration:
/// `J12 = -2, J13 = -1, J23 = -1, K = (1, 0, -2)`.
pub fn landscape_example_instance() -> ProblemInstance {
    ProblemInstance::new(
        vec![
            vec![0.0, -2.0, -1.0],
            vec![-2.0, 0.0, -1.0],
            vec![-1.0, -1.0, 0.0],
        ],
        vec![1.0, 0.0, -2.0],
    )
    .expect("example instance is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_invariants(inst: &ProblemInstance) {
        let m = inst.m();
        for i in 0..m {
            assert_eq!(inst.j(i, i), 0.0);
            assert!(inst.k(i).is_finite());
            for j in 0..m {
                assert_eq!(inst.j(i, j), inst.j(j, i));
                assert!(inst.j(i, j).is_finite());
            }
        }
    }

    #[test]
    fn random_instance_bounds() {
        let inst = random_instance(3, 42).unwrap();
        assert_invariants(&inst);
        for i in 0..3 {
            assert!(inst.k(i).abs() <= 1.0);
            for j in 0..3 {
                assert!(inst.j(i, j).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn random_single_spin() {
        let inst = random_instance(1, 0).unwrap();
        assert_eq!(inst.coupling_rows(), vec![vec![0.0]]);
        assert!(inst.k(0).abs() <= 1.0);
    }

    #[test]
    fn random_is_deterministic() {
        assert_eq!(random_instance(3, 7).unwrap(), random_instance(3, 7).unwrap());
        assert_ne!(random_instance(3, 7).unwrap(), random_instance(3, 8).unwrap());
        assert!(random_instance(0, 1).is_err());
    }

    #[test]
    fn ferromagnet_layout() {
        let inst = ferromagnetic_instance(3, 0.2).unwrap();
        assert_invariants(&inst);
        assert_eq!(inst.biases(), &[0.2, 0.2, 0.2]);
        assert_eq!(inst.j(0, 1), -1.0);
        assert_eq!(inst.j(1, 2), -1.0);
        let two = ferromagnetic_instance(2, 0.0).unwrap();
        assert_eq!(two.coupling_rows(), vec![vec![0.0, -1.0], vec![-1.0, 0.0]]);
        assert_eq!(two.biases(), &[0.0, 0.0]);
        assert!(ferromagnetic_instance(1, 0.2).is_err());
    }

    #[test]
    fn exact_cover_values() {
        let inst = exact_cover_instance();
        assert_invariants(&inst);
        assert_eq!(inst.j(0, 1), 0.5);
        assert_eq!(inst.j(1, 2), 0.5);
        assert_eq!(inst.j(0, 2), 0.0);
        assert_eq!(inst.biases(), &[-1.0, -1.0, -1.0]);
    }

    #[test]
    fn json_round_trip() {
        let inst = random_instance(3, 42).unwrap();
        let parsed = ProblemInstance::from_json(&inst.to_json()).unwrap();
        assert_eq!(parsed, inst);
    }

    #[test]
    fn json_rejects_asymmetric() {
        let doc = r#"{"M": 2, "J": [[0, 1.0], [0.5, 0]], "K": [0, 0]}"#;
        assert!(matches!(
            ProblemInstance::from_json(doc),
            Err(Error::Asymmetric { i: 0, j: 1, .. })
        ));
    }

    #[test]
    fn json_rejects_bad_shapes() {
        let doc = r#"{"M": 2, "J": [[0, 1.0], [1.0, 0]], "K": [0]}"#;
        assert!(matches!(ProblemInstance::from_json(doc), Err(Error::Shape(_))));
        let doc = r#"{"M": 2, "J": [[0, 1.0]], "K": [0, 0]}"#;
        assert!(matches!(ProblemInstance::from_json(doc), Err(Error::Shape(_))));
        let doc = r#"{"M": 2, "J": [[1.0, 1.0], [1.0, 0]], "K": [0, 0]}"#;
        assert!(matches!(
            ProblemInstance::from_json(doc),
            Err(Error::NonzeroDiagonal { i: 0, .. })
        ));
        assert!(matches!(
            ProblemInstance::from_json("{not json"),
            Err(Error::Malformed(_))
        ));
    }

    #[test]
    fn spin_configuration_ordering() {
        assert_eq!(SpinConfiguration::from_index(3, 0).spins(), &[-1, -1, -1]);
        assert_eq!(SpinConfiguration::from_index(3, 1).spins(), &[-1, -1, 1]);
        assert_eq!(SpinConfiguration::from_index(3, 4).spins(), &[1, -1, -1]);
        assert!(SpinConfiguration::new(vec![1, 0]).is_err());
        assert_eq!(SpinConfiguration::all(2, 1).to_string(), "(+1,+1)");
    }
}
