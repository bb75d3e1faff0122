use serde::{Deserialize, Serialize};

use super::MAX_DIM;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{pauli_x, pauli_y, pauli_z, HermitianOperator, C64};

/// Unit-trace positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let tol = Tolerances::DEFAULT.operator;
        let tr = op.trace();
        if (tr - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = op.min_eigenvalue()?;
        if min < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { op })
    }

    /// `|v><v|` for a normalized state vector.
    pub fn pure(v: &[C64]) -> Result<Self> {
        Self::new(HermitianOperator::projector(v))
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            op: self.op.kron(&other.op),
        }
    }

    /// Bloch vector of a qubit state, `r_k = tr(rho sigma_k)`.
    pub fn bloch_vector(&self) -> Option<[f64; 3]> {
        (self.dim() == 2).then(|| {
            [
                self.op.inner(&pauli_x()),
                self.op.inner(&pauli_y()),
                self.op.inner(&pauli_z()),
            ]
        })
    }
}

/// `(I + r . sigma) / 2` with the axis convention `e1 <-> sigma_x`,
/// `e2 <-> sigma_y`, `e3 <-> sigma_z`; `|+>` lies along `e1`.
pub fn bloch_to_density(r: [f64; 3]) -> Result<DensityMatrix> {
    let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if !norm.is_finite() || norm > 1.0 + Tolerances::DEFAULT.bloch {
        return Err(Error::InvalidBloch(norm));
    }
    let op = HermitianOperator::identity(2)
        .add(&pauli_x().scale(r[0]))
        .add(&pauli_y().scale(r[1]))
        .add(&pauli_z().scale(r[2]))
        .scale(0.5);
    DensityMatrix::new(op)
}

/// `|+>, |0>, |1>, |+i>` in this order; index 0 is the generation-round state.
pub fn tomographic_set() -> Vec<DensityMatrix> {
    [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]]
        .into_iter()
        .map(|r| bloch_to_density(r).expect("unit Bloch vector"))
        .collect()
}

/// The pair `|phi>, |psi> = sqrt(1 - a/2)|0> +- sqrt(a/2)|1>` with overlap `1 - a`.
pub fn angle_states(alpha: f64) -> Result<(DensityMatrix, DensityMatrix)> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("angle parameter {alpha} outside [0, 1]")));
    }
    let c0 = (1.0 - alpha / 2.0).sqrt();
    let c1 = (alpha / 2.0).sqrt();
    let phi = DensityMatrix::pure(&[C64::new(c0, 0.0), C64::new(c1, 0.0)])?;
    let psi = DensityMatrix::pure(&[C64::new(c0, 0.0), C64::new(-c1, 0.0)])?;
    Ok((phi, psi))
}

/// The trusted source: states `rho(a)` sent with probabilities `p_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateEnsemble {
    states: Vec<DensityMatrix>,
    input_probs: Vec<f64>,
}

impl StateEnsemble {
    pub fn new(states: Vec<DensityMatrix>, input_probs: Vec<f64>) -> Result<Self> {
        let dim = states
            .first()
            .map(DensityMatrix::dim)
            .ok_or_else(|| Error::InvalidState("ensemble needs at least one state".into()))?;
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.dim(),
            });
        }
        if input_probs.len() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                got: input_probs.len(),
            });
        }
        check_distribution(&input_probs)?;
        Ok(Self {
            states,
            input_probs,
        })
    }

    /// Every state sent with probability `1 / n_s`.
    pub fn uniform(states: Vec<DensityMatrix>) -> Result<Self> {
        let n = states.len().max(1);
        Self::new(states, vec![1.0 / n as f64; n])
    }

    /// State 0 with probability `q`, the others sharing `1 - q` uniformly.
    pub fn with_asymmetry(states: Vec<DensityMatrix>, q: f64) -> Result<Self> {
        Self::new(states.clone(), asymmetric_probs(states.len(), q)?)
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn input_probs(&self) -> &[f64] {
        &self.input_probs
    }

    pub fn with_input_probs(&self, input_probs: Vec<f64>) -> Result<Self> {
        Self::new(self.states.clone(), input_probs)
    }
}

/// `p = (q, (1-q)/(n-1), ...)`.
pub fn asymmetric_probs(n: usize, q: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!("asymmetry {q} outside [0, 1]")));
    }
    match n {
        0 => Err(Error::InvalidParameter("no states".into())),
        1 => Ok(vec![1.0]),
        _ => {
            let rest = (1.0 - q) / (n - 1) as f64;
            Ok(std::iter::once(q).chain(std::iter::repeat(rest).take(n - 1)).collect())
        }
    }
}

/// Checks `p_a >= 0` and `sum p_a = 1` within the distribution tolerance.
pub fn check_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidProbabilities("empty distribution".into()));
    }
    if let Some(v) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidProbabilities(format!("entry {v} is not a probability")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > Tolerances::DEFAULT.distribution.max(4.0 * f64::EPSILON * p.len() as f64) {
        return Err(Error::InvalidProbabilities(format!("probabilities sum to {s}")));
    }
    Ok(())
}

/// All `m`-fold tensor products in row-major order (first factor most
/// significant) with product input probabilities.
pub fn tensor_ensemble(base: &StateEnsemble, m: usize) -> Result<StateEnsemble> {
    if m == 0 {
        return Err(Error::InvalidParameter("tensor power must be at least 1".into()));
    }
    let dim = base.dim().checked_pow(m as u32).unwrap_or(usize::MAX);
    if dim > MAX_DIM {
        return Err(Error::SizeCap(format!("state dimension {dim} exceeds {MAX_DIM}")));
    }
    let mut out = base.clone();
    for _ in 1..m {
        out = product_ensemble(&out, base);
    }
    Ok(out)
}

/// States `rho(a1) (x) rho(a2)` with `p_(a1,a2) = p_a1 p_a2`, index `a1 * n_s + a2`.
pub fn double_ensemble(ens: &StateEnsemble) -> Result<StateEnsemble> {
    tensor_ensemble(ens, 2)
}

fn product_ensemble(first: &StateEnsemble, second: &StateEnsemble) -> StateEnsemble {
    let mut states = Vec::with_capacity(first.len() * second.len());
    let mut probs = Vec::with_capacity(first.len() * second.len());
    for (s1, p1) in first.states.iter().zip(&first.input_probs) {
        for (s2, p2) in second.states.iter().zip(&second.input_probs) {
            states.push(s1.kron(s2));
            probs.push(p1 * p2);
        }
    }
    StateEnsemble {
        states,
        input_probs: probs,
    }
}

/// Named single-qubit sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourcePreset {
    /// `|+>, |0>, |1>, |+i>`.
    Tomographic,
    /// `|+>, |0>`.
    PlusZero,
}

impl SourcePreset {
    pub fn states(self) -> Vec<DensityMatrix> {
        let all = tomographic_set();
        match self {
            SourcePreset::Tomographic => all,
            SourcePreset::PlusZero => all.into_iter().take(2).collect(),
        }
    }
}
