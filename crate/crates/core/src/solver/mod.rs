//! Primal-dual interior-point method for [`SdpProblem`](crate::sdp::SdpProblem)
//! and the dual certificate turning its output into a safe upper bound.

mod certify;
mod dense;
mod facial;
mod ipm;

pub use certify::{certify_point, certify_upper_bound, Certificate};
pub use facial::{solve_on_face, Face};
pub use ipm::solve;

use std::fmt;

use crate::linalg::RealMatrix;

/// Largest certificate shift accepted before refusing to certify.
pub const MAX_CERTIFICATE_SHIFT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative duality gap `|p - d| / (1 + |p| + |d|)` required for optimality.
    pub gap_tol: f64,
    /// Primal residual `||A(X) - b||_inf` and dual slack eigenvalue tolerance.
    pub feas_tol: f64,
    pub max_iter: usize,
    /// Half-width of the band replacing each statistics equality; 0 disables.
    pub relax: f64,
}

impl SolverOptions {
    pub const DEFAULT: Self = Self {
        gap_tol: 1e-8,
        feas_tol: 1e-8,
        max_iter: 200,
        relax: 0.0,
    };
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Tolerances met only within a factor of 100 when the iteration stopped.
    NearOptimal,
    InfeasibleDetected,
    NumericalFailure,
}

impl SolveStatus {
    pub fn is_success(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::NearOptimal => "near-optimal",
            SolveStatus::InfeasibleDetected => "infeasible-detected",
            SolveStatus::NumericalFailure => "numerical-failure",
        })
    }
}

/// State of one interior-point iteration, recorded before the step is taken.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `||A(X) - b||_inf`.
    pub primal_infeasibility: f64,
    /// `||A^T y - C - Z||_max`.
    pub dual_infeasibility: f64,
    pub mu: f64,
    pub sigma: f64,
    pub step_primal: f64,
    pub step_dual: f64,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub x: Vec<RealMatrix>,
    pub y: Vec<f64>,
    /// `A^T y - C`.
    pub z: Vec<RealMatrix>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// Safe upper bound on the maximum; absent when certification was refused.
    pub certified_upper_bound: Option<f64>,
    /// Shift applied along the identity multiplier to make `y` dual feasible.
    pub certificate_shift: f64,
    pub primal_residual: f64,
    pub dual_min_eigenvalue: f64,
    pub relative_gap: f64,
    pub iterations: Vec<IterationRecord>,
    pub message: Option<String>,
    /// Set to 1 when the problem was solved on a face of the cone.
    pub facial_reductions: usize,
}
