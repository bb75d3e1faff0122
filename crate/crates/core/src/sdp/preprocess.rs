use std::collections::BTreeMap;

use super::{Constraint, SdpProblem};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{select_independent_rows, EnvelopeMatrix, RowSource};

/// A constraint removed as a linear combination of the kept ones.
#[derive(Debug, Clone, PartialEq)]
pub struct DroppedConstraint {
    /// Index in the input problem.
    pub index: usize,
    pub label: String,
    /// `|b_i - sum_j c_j b_j|` after scaling.
    pub mismatch: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessReport {
    pub raw_rows: usize,
    /// Indices (in the input problem) of the constraints that were kept, ascending.
    pub kept: Vec<usize>,
    pub dropped: Vec<DroppedConstraint>,
    /// Norm of `sum_i u_i A_i - I` for the identity multiplier, if one was found.
    pub identity_residual: Option<f64>,
}

impl PreprocessReport {
    pub fn rank(&self) -> usize {
        self.kept.len()
    }
}

struct ConstraintRows<'a> {
    problem: &'a SdpProblem,
}

impl RowSource for ConstraintRows<'_> {
    fn len(&self) -> usize {
        self.problem.constraints.len()
    }

    fn dot(&self, i: usize, j: usize) -> f64 {
        self.problem.constraints[i].dot(&self.problem.constraints[j])
    }

    fn residual_norm(&self, i: usize, coeffs: &[(usize, f64)]) -> f64 {
        let cons = &self.problem.constraints;
        let mut acc: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        let mut add = |c: &Constraint, s: f64| {
            for t in &c.terms {
                let n = self.problem.blocks[t.block];
                let buf = acc.entry(t.block).or_insert_with(|| vec![0.0; n * n]);
                t.matrix.add_scaled_into(s, buf);
            }
        };
        add(&cons[i], 1.0);
        for &(j, c) in coeffs {
            add(&cons[j], -c);
        }
        acc.values().flat_map(|b| b.iter()).map(|v| v * v).sum::<f64>().sqrt()
    }

    fn gram(&self) -> EnvelopeMatrix {
        gram_matrix(self.problem)
    }
}

/// Gram matrix `tr(A_i A_j)` over the constraint envelope, accumulated block by block.
pub(crate) fn gram_matrix(p: &SdpProblem) -> EnvelopeMatrix {
    let inc = p.block_incidence();
    let first = p.envelope_starts(&inc);
    let mut g = EnvelopeMatrix::zeros(first);
    let mut dense = Vec::new();
    for (k, list) in inc.iter().enumerate() {
        let n = p.blocks[k];
        for (pos, &(i, ti)) in list.iter().enumerate() {
            dense.clear();
            dense.resize(n * n, 0.0);
            p.constraints[i].terms[ti].matrix.add_scaled_into(1.0, &mut dense);
            for &(j, tj) in &list[..=pos] {
                g.add(i, j, p.constraints[j].terms[tj].matrix.inner(&dense));
            }
        }
    }
    g
}

/// Scales every constraint to unit Frobenius norm, removes linearly
/// dependent rows, checks that their right-hand sides are consistent, and
/// looks for multipliers `u` with `sum_i u_i A_i = I`.
///
/// Fails with [`Error::Infeasible`] naming the first inconsistent row.
pub fn preprocess(p: &SdpProblem) -> Result<(SdpProblem, PreprocessReport)> {
    let tol = Tolerances::DEFAULT;
    let raw_rows = p.constraints.len();

    let mut scaled = p.clone();
    for (i, c) in scaled.constraints.iter_mut().enumerate() {
        let norm = c.frobenius_norm();
        if norm == 0.0 {
            if c.rhs.abs() > tol.dependent_rhs {
                return Err(Error::Infeasible {
                    row: i,
                    label: c.label.clone(),
                    mismatch: c.rhs.abs(),
                });
            }
            continue;
        }
        c.rhs /= norm;
        for t in &mut c.terms {
            t.matrix.scale(1.0 / norm);
        }
    }

    let basis = select_independent_rows(&ConstraintRows { problem: &scaled }, tol.dependent_row);
    let mut dropped = Vec::with_capacity(basis.dropped.len());
    for d in &basis.dropped {
        let c = &scaled.constraints[d.index];
        let recon: f64 = d.coefficients.iter().map(|&(j, v)| v * scaled.constraints[j].rhs).sum();
        let mismatch = (c.rhs - recon).abs();
        if mismatch > tol.dependent_rhs {
            return Err(Error::Infeasible {
                row: d.index,
                label: c.label.clone(),
                mismatch,
            });
        }
        dropped.push(DroppedConstraint {
            index: d.index,
            label: c.label.clone(),
            mismatch,
        });
    }

    let constraints = basis.kept.iter().map(|&i| scaled.constraints[i].clone()).collect();
    let mut out = SdpProblem::new(scaled.blocks.clone(), scaled.objective.clone(), constraints)?;
    let identity = identity_multiplier(&out);
    let identity_residual = identity.as_ref().map(|(_, r)| *r);
    out.identity_multiplier = identity.map(|(u, _)| u);

    Ok((
        out,
        PreprocessReport {
            raw_rows,
            kept: basis.kept,
            dropped,
            identity_residual,
        },
    ))
}

/// Least-squares solution of `sum_i u_i A_i = I`, accepted when the residual is
/// at rounding level.
fn identity_multiplier(p: &SdpProblem) -> Option<(Vec<f64>, f64)> {
    if p.constraints.is_empty() {
        return None;
    }
    let mut g = gram_matrix(p);
    g.factor().ok()?;
    // <A_i, I> = tr(A_i)
    let mut u: Vec<f64> = p
        .constraints
        .iter()
        .map(|c| {
            c.terms
                .iter()
                .flat_map(|t| t.matrix.entries())
                .filter(|e| e.0 == e.1)
                .map(|e| e.2)
                .sum()
        })
        .collect();
    g.solve_in_place(&mut u);

    let mut resid = 0.0;
    let mut blocks: Vec<Vec<f64>> = p.blocks.iter().map(|&n| vec![0.0; n * n]).collect();
    for (c, &ui) in p.constraints.iter().zip(&u) {
        for t in &c.terms {
            t.matrix.add_scaled_into(ui, &mut blocks[t.block]);
        }
    }
    for (b, &n) in blocks.iter_mut().zip(&p.blocks) {
        for k in 0..n {
            b[k * n + k] -= 1.0;
        }
        resid += b.iter().map(|v| v * v).sum::<f64>();
    }
    let resid = resid.sqrt();
    let scale = (p.total_dim() as f64).sqrt();
    (resid <= 1e-9 * scale).then_some((u, resid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::{BlockTerm, SparseSym};

    fn term(block: usize, dim: usize, e: &[(usize, usize, f64)]) -> BlockTerm {
        BlockTerm {
            block,
            matrix: SparseSym::from_entries(dim, e.iter().copied()).unwrap(),
        }
    }

    fn base() -> SdpProblem {
        SdpProblem::new(
            vec![2],
            vec![term(0, 2, &[(0, 0, 1.0), (1, 1, 2.0)])],
            vec![
                Constraint::new(vec![term(0, 2, &[(0, 0, 1.0), (1, 1, 1.0)])], 1.0, "trace"),
                Constraint::new(vec![term(0, 2, &[(1, 0, 1.0)])], 0.2, "offdiag"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn duplicate_removed() {
        let mut p = base();
        p.constraints.push(Constraint::new(vec![term(0, 2, &[(0, 0, 2.0), (1, 1, 2.0)])], 2.0, "trace x2"));
        let (q, report) = preprocess(&p).unwrap();
        assert_eq!(q.num_constraints(), 2);
        assert_eq!(report.raw_rows, 3);
        assert_eq!(report.dropped.len(), 1);
        assert_eq!(report.dropped[0].label, "trace x2");
        assert!(report.dropped[0].mismatch < 1e-15);
        assert!(q.identity_multiplier.is_some());
    }

    #[test]
    fn contradictory_duplicate() {
        let mut p = base();
        p.constraints.push(Constraint::new(vec![term(0, 2, &[(0, 0, 1.0), (1, 1, 1.0)])], 1.5, "trace again"));
        match preprocess(&p) {
            Err(Error::Infeasible { row, label, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(label, "trace again");
            }
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn zero_constraint() {
        let mut p = base();
        p.constraints.push(Constraint::new(vec![], 0.0, "empty"));
        assert_eq!(preprocess(&p).unwrap().0.num_constraints(), 2);
        p.constraints.push(Constraint::new(vec![], 1.0, "impossible"));
        assert!(matches!(preprocess(&p), Err(Error::Infeasible { row: 3, .. })));
    }

    #[test]
    fn rows_scaled_to_unit_norm() {
        let (q, _) = preprocess(&base()).unwrap();
        for c in &q.constraints {
            assert!((c.frobenius_norm() - 1.0).abs() < 1e-15);
        }
        // trace row: I/sqrt(2) with rhs 1/sqrt(2)
        assert!((q.constraints[0].rhs - 0.5f64.sqrt()).abs() < 1e-15);
        // offdiag row: (E01 + E10)/sqrt(2), rhs 0.2/sqrt(2)
        assert!((q.constraints[1].rhs - 0.2 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn identity_multiplier_absent_without_trace_row() {
        let p = SdpProblem::new(
            vec![2],
            vec![],
            vec![Constraint::new(vec![term(0, 2, &[(0, 0, 1.0)])], 1.0, "x00")],
        )
        .unwrap();
        let (q, r) = preprocess(&p).unwrap();
        assert!(q.identity_multiplier.is_none());
        assert!(r.identity_residual.is_none());
    }
}
