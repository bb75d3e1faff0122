//! Numerical tolerances shared by every module.

use serde::{Deserialize, Serialize};

/// The one place where default tolerances live.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Entrywise deviation allowed between a matrix and its adjoint.
    pub hermitian: f64,
    /// Jacobi sweeps stop once the off-diagonal Frobenius norm drops below
    /// this value (relative to `max(1, ||A||_F)`).
    pub jacobi_off_diagonal: f64,
    /// Trace, completeness and positivity slack for states and POVMs.
    pub operator: f64,
    /// Normalization slack for probability vectors.
    pub distribution: f64,
    /// Row-sum slack for conditional outcome tables.
    pub statistics: f64,
    /// Bloch-vector norm slack.
    pub bloch: f64,
    /// Reconstruction residual under which a constraint row counts as dependent.
    pub dependent_row: f64,
    /// Allowed right-hand-side mismatch of a dependent row.
    pub dependent_rhs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermitian: 1e-12,
        jacobi_off_diagonal: 1e-12,
        operator: 1e-10,
        distribution: 1e-12,
        statistics: 1e-10,
        bloch: 1e-12,
        dependent_row: 1e-9,
        dependent_rhs: 1e-8,
    };
}
