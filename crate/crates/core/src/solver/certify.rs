use super::{SdpSolution, MAX_CERTIFICATE_SHIFT};
use crate::error::{Error, Result};
use crate::linalg::min_eigenvalue_sym;
use crate::sdp::SdpProblem;

/// A dual-feasible point `y' = y + shift * u` with `sum_i u_i A_i = I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    /// `b . y'`, an upper bound on the primal maximum.
    pub bound: f64,
    pub shift: f64,
}

pub(super) fn min_slack_eigenvalue(p: &SdpProblem, y: &[f64]) -> Result<f64> {
    p.dual_slack(y)
        .iter()
        .try_fold(f64::INFINITY, |acc, b| Ok(acc.min(min_eigenvalue_sym(b)?)))
}

pub(super) fn dual_value(p: &SdpProblem, y: &[f64]) -> f64 {
    p.constraints.iter().zip(y).map(|(c, y)| c.rhs * y).sum()
}

/// Turns the dual iterate into a bound that holds despite inexact arithmetic.
///
/// If `A^T y - C` has smallest eigenvalue `-eps < 0`, the identity multiplier
/// `u` gives `A^T (y + eps u) - C = (A^T y - C) + eps I >= 0`, so
/// `b . y + eps (b . u)` bounds every feasible objective value. The shifted
/// point is re-checked and the shift doubled until the check passes.
/// Refuses shifts beyond `1e-4`.
pub fn certify_upper_bound(p: &SdpProblem, sol: &SdpSolution) -> Result<Certificate> {
    certify_point(p, &sol.y)
}

/// [`certify_upper_bound`] for a bare dual vector.
pub fn certify_point(p: &SdpProblem, y: &[f64]) -> Result<Certificate> {
    let lambda = min_slack_eigenvalue(p, y)?;
    if lambda >= 0.0 {
        return Ok(Certificate {
            bound: dual_value(p, y),
            shift: 0.0,
        });
    }
    let u = p
        .identity_multiplier
        .as_ref()
        .ok_or_else(|| Error::Numerical("no identity multiplier available for certification".into()))?;
    let mut shift = -lambda;
    while shift <= MAX_CERTIFICATE_SHIFT {
        let shifted: Vec<f64> = y.iter().zip(u).map(|(yi, ui)| yi + shift * ui).collect();
        if min_slack_eigenvalue(p, &shifted)? >= 0.0 {
            return Ok(Certificate {
                bound: dual_value(p, &shifted),
                shift,
            });
        }
        shift *= 2.0;
    }
    Err(Error::Numerical(format!(
        "dual slack eigenvalue {lambda:.3e} needs a certificate shift above {MAX_CERTIFICATE_SHIFT:e}"
    )))
}
