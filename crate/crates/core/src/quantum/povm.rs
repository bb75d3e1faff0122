use serde::{Deserialize, Serialize};

use super::MAX_DIM;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{pauli_x, pauli_y, pauli_z, row_space_basis, ComplexMatrix, HermitianOperator};

/// Positive operators summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<HermitianOperator>,
}

impl Povm {
    pub fn new(elements: Vec<HermitianOperator>) -> Result<Self> {
        let tol = Tolerances::DEFAULT.operator;
        let dim = elements
            .first()
            .map(HermitianOperator::dim)
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let mut total = HermitianOperator::zeros(dim);
        for (k, e) in elements.iter().enumerate() {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: e.dim(),
                });
            }
            let min = e.min_eigenvalue()?;
            if min < -tol {
                return Err(Error::InvalidPovm(format!(
                    "element {k} has negative eigenvalue {min:.3e}"
                )));
            }
            total = total.add(e);
        }
        let dev = total.max_abs_diff(&HermitianOperator::identity(dim));
        if dev > tol {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity only within {dev:.3e}"
            )));
        }
        Ok(Self { elements })
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    /// Projective measurement onto the computational basis.
    pub fn computational(dim: usize) -> Self {
        let elements = (0..dim)
            .map(|k| {
                let mut d = vec![0.0; dim];
                d[k] = 1.0;
                HermitianOperator::diag(&d)
            })
            .collect();
        Self { elements }
    }

    /// Qubit Bloch decomposition `alpha_k (I + m_k . sigma)` of every element.
    pub fn bloch_spec(&self) -> Option<BlochPovmSpec> {
        if self.dim() != 2 {
            return None;
        }
        let mut weights = Vec::with_capacity(self.outcomes());
        let mut directions = Vec::with_capacity(self.outcomes());
        for e in &self.elements {
            let alpha = e.trace() / 2.0;
            let v = [e.inner(&pauli_x()) / 2.0, e.inner(&pauli_y()) / 2.0, e.inner(&pauli_z()) / 2.0];
            weights.push(alpha);
            directions.push(if alpha > 0.0 { v.map(|c| c / alpha) } else { [0.0; 3] });
        }
        Some(BlochPovmSpec { weights, directions })
    }
}

/// Qubit POVM given by weights `alpha_k > 0` and directions `m_k`, with
/// elements `alpha_k (I + m_k . sigma)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochPovmSpec {
    pub weights: Vec<f64>,
    pub directions: Vec<[f64; 3]>,
}

impl BlochPovmSpec {
    pub fn outcomes(&self) -> usize {
        self.weights.len()
    }

    /// Checks `alpha_k > 0`, `sum alpha_k = 1`, `sum alpha_k m_k = 0` and `|m_k| <= 1`.
    pub fn validate(&self) -> Result<()> {
        let tol = Tolerances::DEFAULT;
        if self.weights.is_empty() || self.weights.len() != self.directions.len() {
            return Err(Error::InvalidPovm(format!(
                "{} weights for {} directions",
                self.weights.len(),
                self.directions.len()
            )));
        }
        if let Some(a) = self.weights.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidPovm(format!("weight {a} is not positive")));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > tol.distribution.max(4.0 * f64::EPSILON * self.weights.len() as f64) {
            return Err(Error::InvalidPovm(format!("weights sum to {total}")));
        }
        let mut centroid = [0.0; 3];
        for (a, m) in self.weights.iter().zip(&self.directions) {
            let n = norm(m);
            if !n.is_finite() || n > 1.0 + tol.bloch {
                return Err(Error::InvalidBloch(n));
            }
            for k in 0..3 {
                centroid[k] += a * m[k];
            }
        }
        let c = norm(&centroid);
        if c > tol.operator {
            return Err(Error::InvalidPovm(format!("weighted directions sum to norm {c:.3e}")));
        }
        Ok(())
    }

    fn element(&self, k: usize) -> HermitianOperator {
        let m = self.directions[k];
        HermitianOperator::identity(2)
            .add(&pauli_x().scale(m[0]))
            .add(&pauli_y().scale(m[1]))
            .add(&pauli_z().scale(m[2]))
            .scale(self.weights[k])
    }
}

fn norm(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Elements `alpha_k (I + m_k . sigma)`.
pub fn povm_from_bloch(spec: &BlochPovmSpec) -> Result<Povm> {
    spec.validate()?;
    Povm::new((0..spec.outcomes()).map(|k| spec.element(k)).collect())
}

/// Symmetric four-outcome extremal qubit POVM whose outcomes are unbiased on `|+>`.
pub fn extremal4() -> BlochPovmSpec {
    let s3 = 3f64.sqrt();
    BlochPovmSpec {
        weights: vec![1.0 / 8.0, 7.0 / 24.0, 7.0 / 24.0, 7.0 / 24.0],
        directions: vec![
            [1.0, 0.0, 0.0],
            [-1.0 / 7.0, 4.0 * s3 / 7.0, 0.0],
            [-1.0 / 7.0, -2.0 * s3 / 7.0, 6.0 / 7.0],
            [-1.0 / 7.0, -2.0 * s3 / 7.0, -6.0 / 7.0],
        ],
    }
}

/// Three-outcome extremal qubit POVM with directions in the `e2-e3` plane.
pub fn extremal3() -> BlochPovmSpec {
    let h = 3f64.sqrt() / 2.0;
    BlochPovmSpec {
        weights: vec![1.0 / 3.0; 3],
        directions: vec![[0.0, 1.0, 0.0], [0.0, -0.5, h], [0.0, -0.5, -h]],
    }
}

/// Projective measurement along a Bloch axis: outcome 0 is `+axis`.
pub fn projective(axis: [f64; 3]) -> BlochPovmSpec {
    BlochPovmSpec {
        weights: vec![0.5, 0.5],
        directions: vec![axis, axis.map(|v| -v)],
    }
}

/// True iff `alpha_k (1 + m_k . e1) = 1 / n_o` for every outcome, i.e. the
/// outcomes are uniformly distributed on `|+>`.
pub fn check_unbiased(spec: &BlochPovmSpec, n_o: usize) -> bool {
    if spec.outcomes() != n_o || n_o == 0 {
        return false;
    }
    let target = 1.0 / n_o as f64;
    spec.weights
        .iter()
        .zip(&spec.directions)
        .all(|(a, m)| (a * (1.0 + m[0]) - target).abs() <= Tolerances::DEFAULT.operator)
}

/// Why a qubit POVM fails the extremality conditions.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtremalityDefect {
    /// More than four outcomes can never be linearly independent for a qubit.
    TooManyOutcomes(usize),
    /// Direction `outcome` is not a unit vector, so the element is not rank one.
    NotRankOne { outcome: usize, norm: f64 },
    /// Four unit directions lying in a common plane.
    Coplanar { rank: usize },
    LinearlyDependent { rank: usize },
}

impl std::fmt::Display for ExtremalityDefect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::TooManyOutcomes(n) => write!(f, "{n} outcomes exceed the 4 independent qubit operators"),
            Self::NotRankOne { outcome, norm } => {
                write!(f, "element {outcome} is not rank-one (|m| = {norm:.6})")
            }
            Self::Coplanar { rank } => {
                write!(f, "measurement directions are coplanar (operator rank {rank} < 4)")
            }
            Self::LinearlyDependent { rank } => write!(f, "elements are linearly dependent (rank {rank})"),
        }
    }
}

/// Rank-one elements (`|m_k| = 1`) that are linearly independent as operators.
pub fn extremality_defect(spec: &BlochPovmSpec) -> Option<ExtremalityDefect> {
    let n_o = spec.outcomes();
    if n_o > 4 {
        return Some(ExtremalityDefect::TooManyOutcomes(n_o));
    }
    for (k, m) in spec.directions.iter().enumerate() {
        let n = norm(m);
        if (n - 1.0).abs() > Tolerances::DEFAULT.operator {
            return Some(ExtremalityDefect::NotRankOne { outcome: k, norm: n });
        }
    }
    // alpha (I + m . sigma) has Pauli coordinates alpha (1, m)
    let rows: Vec<Vec<f64>> = spec
        .weights
        .iter()
        .zip(&spec.directions)
        .map(|(a, m)| vec![*a, a * m[0], a * m[1], a * m[2]])
        .collect();
    let rank = row_space_basis(&rows, Tolerances::DEFAULT.operator).rank();
    if rank < n_o {
        return Some(if n_o == 4 {
            ExtremalityDefect::Coplanar { rank }
        } else {
            ExtremalityDefect::LinearlyDependent { rank }
        });
    }
    None
}

pub fn check_extremal(spec: &BlochPovmSpec) -> bool {
    extremality_defect(spec).is_none()
}

/// `Pi_{x1} (x) ... (x) Pi_{xm}`, outcomes in row-major order.
pub fn tensor_povm(base: &Povm, m: usize) -> Result<Povm> {
    if m == 0 {
        return Err(Error::InvalidParameter("tensor power must be at least 1".into()));
    }
    let dim = base.dim().checked_pow(m as u32).unwrap_or(usize::MAX);
    if dim > MAX_DIM {
        return Err(Error::SizeCap(format!("measurement dimension {dim} exceeds {MAX_DIM}")));
    }
    let mut elements = base.elements.clone();
    for _ in 1..m {
        elements = elements
            .iter()
            .flat_map(|a| base.elements.iter().map(move |b| a.kron(b)))
            .collect();
    }
    Ok(Povm { elements })
}

/// Builds a POVM from explicit complex matrices.
pub fn povm_from_matrices(mats: Vec<ComplexMatrix>) -> Result<Povm> {
    let tol = Tolerances::DEFAULT.operator;
    Povm::new(
        mats.into_iter()
            .map(|m| HermitianOperator::with_tolerance(m, tol))
            .collect::<Result<_>>()?,
    )
}

/// Named honest devices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DevicePreset {
    SigmaZ,
    SigmaX,
    Extremal3,
    Extremal4,
}

impl DevicePreset {
    pub fn spec(self) -> BlochPovmSpec {
        match self {
            DevicePreset::SigmaZ => projective([0.0, 0.0, 1.0]),
            DevicePreset::SigmaX => projective([1.0, 0.0, 0.0]),
            DevicePreset::Extremal3 => extremal3(),
            DevicePreset::Extremal4 => extremal4(),
        }
    }

    pub fn povm(self) -> Povm {
        povm_from_bloch(&self.spec()).expect("preset specs are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projective_z_from_bloch() {
        let p = povm_from_bloch(&projective([0.0, 0.0, 1.0])).unwrap();
        assert_eq!(p, Povm::computational(2));
    }

    #[test]
    fn extremal4_constants() {
        let s = extremal4();
        let total: f64 = s.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
        for m in &s.directions {
            assert!((norm(m) - 1.0).abs() < 1e-15);
        }
        // (7/24)(1 - 1/7) = 1/4
        for (a, m) in s.weights.iter().zip(&s.directions) {
            assert!((a * (1.0 + m[0]) - 0.25).abs() < 1e-15);
        }
        let p = povm_from_bloch(&s).unwrap();
        assert_eq!(p.outcomes(), 4);
        for e in p.elements() {
            let ev = e.eigenvalues().unwrap();
            assert!(ev[0].abs() < 1e-10, "element not rank one: {ev:?}");
        }
    }

    #[test]
    fn extremal3_constants() {
        let s = extremal3();
        let mut sum = [0.0; 3];
        for m in &s.directions {
            for k in 0..3 {
                sum[k] += m[k];
            }
        }
        assert!(norm(&sum) < 1e-15);
        let p = povm_from_bloch(&s).unwrap();
        assert_eq!(p.outcomes(), 3);
        assert!(s.weights.iter().all(|&a| a == 1.0 / 3.0));
    }

    #[test]
    fn unbiasedness() {
        assert!(check_unbiased(&extremal4(), 4));
        assert!(check_unbiased(&extremal3(), 3));
        assert!(check_unbiased(&projective([0.0, 0.0, 1.0]), 2));
        assert!(!check_unbiased(&projective([1.0, 0.0, 0.0]), 2));
        assert!(!check_unbiased(&extremal4(), 3));
    }

    #[test]
    fn extremality() {
        assert!(check_extremal(&extremal4()));
        assert!(check_extremal(&extremal3()));
        assert!(check_extremal(&projective([0.0, 0.0, 1.0])));

        let coplanar = BlochPovmSpec {
            weights: vec![0.25; 4],
            directions: vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0]],
        };
        assert!(povm_from_bloch(&coplanar).is_ok());
        assert!(matches!(extremality_defect(&coplanar), Some(ExtremalityDefect::Coplanar { rank: 3 })));

        let noisy = BlochPovmSpec {
            weights: vec![0.5, 0.5],
            directions: vec![[0.0, 0.0, 0.9], [0.0, 0.0, -0.9]],
        };
        assert!(matches!(extremality_defect(&noisy), Some(ExtremalityDefect::NotRankOne { outcome: 0, .. })));

        let five = BlochPovmSpec {
            weights: vec![0.2; 5],
            directions: vec![[0.0, 0.0, 1.0]; 5],
        };
        assert!(!check_extremal(&five));
    }

    #[test]
    fn invalid_specs_rejected() {
        let unbalanced = BlochPovmSpec {
            weights: vec![0.5, 0.5],
            directions: vec![[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]],
        };
        assert!(povm_from_bloch(&unbalanced).is_err());
        let long = BlochPovmSpec {
            weights: vec![0.5, 0.5],
            directions: vec![[0.0, 0.0, 1.5], [0.0, 0.0, -1.5]],
        };
        assert!(matches!(povm_from_bloch(&long), Err(Error::InvalidBloch(_))));
    }

    #[test]
    fn tensor_sigma_z_is_diagonal_basis() {
        let zz = tensor_povm(&DevicePreset::SigmaZ.povm(), 2).unwrap();
        assert_eq!(zz.outcomes(), 4);
        for (k, e) in zz.elements().iter().enumerate() {
            let mut d = vec![0.0; 4];
            d[k] = 1.0;
            assert!(e.max_abs_diff(&HermitianOperator::diag(&d)) == 0.0);
        }
        assert_eq!(tensor_povm(&DevicePreset::SigmaZ.povm(), 1).unwrap(), DevicePreset::SigmaZ.povm());
    }

    #[test]
    fn bloch_spec_roundtrip() {
        let p = povm_from_bloch(&extremal4()).unwrap();
        let back = p.bloch_spec().unwrap();
        for (a, b) in back.weights.iter().zip(&extremal4().weights) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
