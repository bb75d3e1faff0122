//! Solving on a face of the cone, for problems whose feasible set has no
//! interior.
//!
//! A face is given by PSD exposing matrices `W`, each block keeping the
//! complement of the range of its `W`. It is accepted only if `W = A^T w`
//! for a witness `w` with `b . w = 0`: every feasible `X` then has
//! `<W, X> = 0` and lies on the face. The restricted problem is solved, its
//! dual lifted back, and the missing curvature on the discarded directions
//! supplied by a multiple of `w`. The bound is re-certified on the original
//! problem, so an inaccurate witness can only loosen it.

use super::certify::{certify_point, dual_value, min_slack_eigenvalue};
use super::dense::spd_inverse;
use super::{solve, SdpSolution, SolveStatus, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, RealMatrix};
use crate::sdp::{gram_matrix, preprocess, BlockTerm, Constraint, SdpProblem, SparseSym};

/// Relative residual accepted for `A^T w = P` and `b . w = 0`.
const WITNESS_TOL: f64 = 1e-9;
/// Entries of restricted data below this fraction of the term norm are dropped.
const DROP_TOL: f64 = 1e-14;
/// Constraints whose restriction keeps less than this fraction of their norm
/// vanish on the face and are replaced by empty rows.
const VANISH_TOL: f64 = 1e-10;
/// Identity shifts tried to give the restricted slack a margin.
const MARGINS: [f64; 8] = [0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Eigenvalues of an exposing matrix above this fraction of its largest
/// one span the discarded subspace.
const RANGE_TOL: f64 = 1e-9;

/// A face of the product of PSD cones. Each reduced block keeps the
/// orthogonal complement of the range of a PSD exposing matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    blocks: Vec<Option<FaceBlock>>,
}

#[derive(Debug, Clone, PartialEq)]
struct FaceBlock {
    keep: RealMatrix,
    drop: RealMatrix,
    exposing: RealMatrix,
}

fn columns(v: &RealMatrix, idx: &[usize]) -> RealMatrix {
    let mut out = RealMatrix::zeros(v.rows(), idx.len());
    for (c, &j) in idx.iter().enumerate() {
        for r in 0..v.rows() {
            out.set(r, c, v.get(r, j));
        }
    }
    out
}

/// `V^T M V`.
fn congruence(v: &RealMatrix, m: &RealMatrix) -> RealMatrix {
    let mut out = v.transpose().matmul(&m.matmul(v));
    out.symmetrize();
    out
}

impl Face {
    /// The face on which `<W_k, X_k> = 0` for PSD matrices `W_k`, that is,
    /// every block avoids the range of its `W_k`. `None` leaves a block whole.
    pub fn from_exposing(blocks: &[usize], exposing: Vec<Option<RealMatrix>>) -> Result<Self> {
        if exposing.len() != blocks.len() {
            return Err(Error::DimensionMismatch {
                expected: blocks.len(),
                got: exposing.len(),
            });
        }
        let blocks = exposing
            .into_iter()
            .zip(blocks)
            .map(|(w, &n)| {
                let Some(w) = w else { return Ok(None) };
                if w.rows() != n || w.cols() != n {
                    return Err(Error::Shape(format!("exposing matrix of size {} for a block of size {n}", w.rows())));
                }
                let e = jacobi_eigen(&w, true)?;
                let top = e.values.last().copied().unwrap_or(0.0);
                if e.values.first().is_some_and(|&v| v < -RANGE_TOL * top.max(1.0)) {
                    return Err(Error::InvalidParameter("exposing matrix is not positive semidefinite".into()));
                }
                let vectors = e.vectors.as_ref().expect("requested");
                let (keep, drop): (Vec<usize>, Vec<usize>) = (0..n).partition(|&j| e.values[j] <= RANGE_TOL * top);
                Ok((top > 0.0 && !drop.is_empty()).then(|| FaceBlock {
                    keep: columns(vectors, &keep),
                    drop: columns(vectors, &drop),
                    exposing: w,
                }))
            })
            .collect::<Result<_>>()?;
        Ok(Self { blocks })
    }

    /// Whether some block is actually reduced.
    pub fn is_proper(&self) -> bool {
        self.blocks.iter().any(Option::is_some)
    }

    /// Dimension of the kept subspace of each block.
    pub fn kept_dims(&self, blocks: &[usize]) -> Vec<usize> {
        self.blocks
            .iter()
            .zip(blocks)
            .map(|(f, &n)| f.as_ref().map_or(n, |f| f.keep.cols()))
            .collect()
    }

    /// Least-squares `w` with `A^T w = W`, checked to expose the face.
    fn witness(&self, p: &SdpProblem) -> Result<Vec<f64>> {
        let target: Vec<RealMatrix> = self
            .blocks
            .iter()
            .zip(&p.blocks)
            .map(|(f, &n)| match f {
                Some(f) => f.exposing.clone(),
                None => RealMatrix::zeros(n, n),
            })
            .collect();
        let mut g = gram_matrix(p);
        g.factor()?;
        let mut w: Vec<f64> = p.constraints.iter().map(|c| c.evaluate(&target)).collect();
        g.solve_in_place(&mut w);
        let scale = target.iter().map(|m| m.frobenius_norm().powi(2)).sum::<f64>().sqrt();
        let err = adjoint(p, &w)
            .iter()
            .zip(&target)
            .map(|(a, b)| {
                let mut d = a.clone();
                d.axpy(-1.0, b);
                d.frobenius_norm().powi(2)
            })
            .sum::<f64>()
            .sqrt();
        let bw = dual_value(p, &w);
        if err > WITNESS_TOL * scale || bw.abs() > WITNESS_TOL * scale {
            return Err(Error::Numerical(format!(
                "face is not exposed by the constraints (residual {err:.3e}, b.w {bw:.3e})"
            )));
        }
        Ok(w)
    }

    fn restrict(&self, p: &SdpProblem) -> Result<(SdpProblem, Vec<Option<usize>>)> {
        let mut map = Vec::with_capacity(p.blocks.len());
        let mut blocks = Vec::new();
        for r in self.kept_dims(&p.blocks) {
            map.push((r > 0).then_some(blocks.len()));
            if r > 0 {
                blocks.push(r);
            }
        }
        let restrict_term = |t: &BlockTerm| -> Result<Option<BlockTerm>> {
            let Some(block) = map[t.block] else {
                return Ok(None);
            };
            let Some(FaceBlock { keep: v, .. }) = &self.blocks[t.block] else {
                return Ok(Some(BlockTerm {
                    block,
                    matrix: t.matrix.clone(),
                }));
            };
            let mut m = congruence(v, &t.matrix.to_dense());
            let cut = DROP_TOL * t.matrix.frobenius_sq().sqrt();
            for x in m.data_mut() {
                if x.abs() < cut {
                    *x = 0.0;
                }
            }
            Ok(Some(BlockTerm {
                block,
                matrix: SparseSym::from_dense(&m)?,
            }))
        };
        let restrict_all = |terms: &[BlockTerm]| -> Result<Vec<BlockTerm>> {
            Ok(terms
                .iter()
                .map(restrict_term)
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .filter(|t| !t.matrix.is_zero())
                .collect())
        };
        let objective = restrict_all(&p.objective)?;
        let constraints = p
            .constraints
            .iter()
            .map(|c| {
                let mut terms = restrict_all(&c.terms)?;
                let norm = terms.iter().map(|t| t.matrix.frobenius_sq()).sum::<f64>().sqrt();
                if norm < VANISH_TOL * c.frobenius_norm() {
                    terms.clear();
                }
                Ok(Constraint::new(terms, c.rhs, c.label.clone()))
            })
            .collect::<Result<_>>()?;
        Ok((SdpProblem::new(blocks, objective, constraints)?, map))
    }

    /// Completes a dual point of the restricted problem to a certified dual
    /// point of `p`: an identity shift gives the kept part a margin, then a
    /// multiple of the witness dominates the discarded part. Returns the
    /// point with the smallest bound and its total identity shift.
    fn lift_dual(&self, p: &SdpProblem, y: &[f64], witness: &[f64]) -> Result<Option<(Vec<f64>, f64)>> {
        let exposing = adjoint(p, witness);
        let mut best: Option<(Vec<f64>, f64, f64)> = None;
        for margin in MARGINS {
            let shifted: Vec<f64> = match (&p.identity_multiplier, margin > 0.0) {
                (_, false) => y.to_vec(),
                (Some(u), true) => y.iter().zip(u).map(|(a, b)| a + margin * b).collect(),
                (None, true) => break,
            };
            let Some(t) = self.witness_weight(&p.dual_slack(&shifted), &exposing)? else {
                continue;
            };
            let point: Vec<f64> = shifted.iter().zip(witness).map(|(a, w)| a + t * w).collect();
            let Ok(cert) = certify_point(p, &point) else {
                continue;
            };
            if best.as_ref().is_none_or(|b| cert.bound < b.1) {
                let point = match &p.identity_multiplier {
                    Some(u) if cert.shift > 0.0 => point.iter().zip(u).map(|(a, b)| a + cert.shift * b).collect(),
                    _ => point,
                };
                best = Some((point, cert.bound, margin + cert.shift));
            }
        }
        Ok(best.map(|(y, _, shift)| (y, shift)))
    }

    /// Smallest `t` with `S + t A^T w >= 0`, to first order in the part of
    /// `A^T w` outside the discarded subspace: with `S` split along the kept
    /// (1) and discarded (2) subspaces, `t W22 >= S21 S11^-1 S12 - S22`.
    /// `None` if the kept part of `S` is not positive definite.
    fn witness_weight(&self, s: &[RealMatrix], exposing: &[RealMatrix]) -> Result<Option<f64>> {
        let mut t: f64 = 0.0;
        for ((sk, wk), face) in s.iter().zip(exposing).zip(&self.blocks) {
            let Some(FaceBlock { keep: v, drop: n, .. }) = face else { continue };
            let mut need = congruence(n, sk).scale(-1.0);
            if v.cols() > 0 {
                let s12 = v.transpose().matmul(&sk.matmul(n));
                let Ok(inv) = spd_inverse(&congruence(v, sk)) else {
                    return Ok(None);
                };
                need.axpy(1.0, &s12.transpose().matmul(&inv.matmul(&s12)));
            }
            // W22^-1/2 need W22^-1/2
            let w22 = jacobi_eigen(&congruence(n, wk), true)?;
            if w22.values[0] <= 0.0 {
                return Ok(None);
            }
            let vecs = w22.vectors.as_ref().expect("requested");
            let mut root = vecs.clone();
            for c in 0..root.cols() {
                let f = w22.values[c].sqrt().recip();
                for r in 0..root.rows() {
                    root.set(r, c, vecs.get(r, c) * f);
                }
            }
            let m = congruence(&root, &need);
            let top = jacobi_eigen(&m, false)?.values.last().copied().unwrap_or(0.0);
            t = t.max(top);
        }
        Ok(Some(t.max(0.0) * (1.0 + 1e-6) + 1e-12))
    }
}

/// Solves `p` restricted to `face` and certifies the result on `p` itself.
///
/// Fails if the face is not exposed by the constraints of `p`.
pub fn solve_on_face(p: &SdpProblem, face: &Face, opts: &SolverOptions) -> Result<SdpSolution> {
    if face.blocks.len() != p.blocks.len() {
        return Err(Error::DimensionMismatch {
            expected: p.blocks.len(),
            got: face.blocks.len(),
        });
    }
    if !face.is_proper() {
        return solve(p, opts);
    }
    let witness = face.witness(p)?;
    let (raw, map) = face.restrict(p)?;
    let (q, report) = preprocess(&raw)?;
    let inner = solve(&q, opts)?;

    let mut y = vec![0.0; p.num_constraints()];
    for (&i, &yi) in report.kept.iter().zip(&inner.y) {
        y[i] = yi / raw.constraints[i].frobenius_norm();
    }
    let x: Vec<RealMatrix> = p
        .blocks
        .iter()
        .enumerate()
        .map(|(k, &n)| match (map[k], &face.blocks[k]) {
            (None, _) => RealMatrix::zeros(n, n),
            (Some(j), None) => inner.x[j].clone(),
            (Some(j), Some(f)) => f.keep.matmul(&inner.x[j].matmul(&f.keep.transpose())),
        })
        .collect();

    let mut status = inner.status;
    let mut message = inner.message.clone();
    let mut shift = 0.0;
    let mut certified = None;
    if status.is_success() && inner.certified_upper_bound.is_some() {
        match face.lift_dual(p, &y, &witness)? {
            Some((lifted, s)) => {
                y = lifted;
                shift = s;
                certified = Some(dual_value(p, &y));
            }
            None => {
                status = SolveStatus::NumericalFailure;
                message = Some("could not lift the restricted dual to a certified point".into());
            }
        }
    }

    let z = p.dual_slack(&y);
    let primal_objective = p.objective_value(&x);
    let dual_objective = dual_value(p, &y);
    Ok(SdpSolution {
        status,
        primal_residual: p.primal_residual(&x).iter().fold(0.0, |m: f64, v| m.max(v.abs())),
        dual_min_eigenvalue: min_slack_eigenvalue(p, &y)?,
        relative_gap: (primal_objective - dual_objective).abs() / (1.0 + primal_objective.abs() + dual_objective.abs()),
        certified_upper_bound: certified,
        certificate_shift: shift,
        primal_objective,
        dual_objective,
        x,
        y,
        z,
        iterations: inner.iterations,
        message,
        facial_reductions: 1,
    })
}

/// `sum_i w_i A_i`.
fn adjoint(p: &SdpProblem, w: &[f64]) -> Vec<RealMatrix> {
    let mut out: Vec<RealMatrix> = p.blocks.iter().map(|&n| RealMatrix::zeros(n, n)).collect();
    for (c, &wi) in p.constraints.iter().zip(w) {
        for t in &c.terms {
            t.matrix.add_scaled_into(wi, out[t.block].data_mut());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::{BlockTerm, Constraint, SparseSym};

    fn term(e: &[(usize, usize, f64)]) -> BlockTerm {
        BlockTerm {
            block: 0,
            matrix: SparseSym::from_entries(2, e.iter().copied()).unwrap(),
        }
    }

    /// `max <C, X>` with `X_00 = 0`, `tr X = 1`: only `X = diag(0, 1)` is
    /// feasible, so there is no interior and the optimum is `C_11 = 1`.
    fn pinned() -> SdpProblem {
        let p = SdpProblem::new(
            vec![2],
            vec![term(&[(1, 0, 1.0), (1, 1, 1.0)])],
            vec![
                Constraint::new(vec![term(&[(0, 0, 1.0)])], 0.0, "x00"),
                Constraint::new(vec![term(&[(0, 0, 1.0), (1, 1, 1.0)])], 1.0, "trace"),
            ],
        )
        .unwrap();
        preprocess(&p).unwrap().0
    }

    fn face(w: RealMatrix) -> Face {
        Face::from_exposing(&[2], vec![Some(w)]).unwrap()
    }

    #[test]
    fn exposing_matrix_splits_the_block() {
        let f = face(RealMatrix::diag(&[3.0, 0.0]));
        assert!(f.is_proper());
        assert_eq!(f.kept_dims(&[2]), vec![1]);
        assert!(!Face::from_exposing(&[2], vec![None]).unwrap().is_proper());
        assert!(Face::from_exposing(&[2], vec![Some(RealMatrix::diag(&[1.0, -1.0]))]).is_err());
        assert!(Face::from_exposing(&[3], vec![Some(RealMatrix::diag(&[1.0, 0.0]))]).is_err());
    }

    #[test]
    fn solves_without_interior() {
        let p = pinned();
        let sol = solve_on_face(&p, &face(RealMatrix::diag(&[1.0, 0.0])), &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.facial_reductions, 1);
        let bound = sol.certified_upper_bound.unwrap();
        assert!(bound >= 1.0 - 1e-12 && bound - 1.0 < 1e-7, "{bound}");
        assert!((sol.x[0].get(1, 1) - 1.0).abs() < 1e-8 && sol.x[0].get(0, 0).abs() < 1e-12);
        assert!(min_slack_eigenvalue(&p, &sol.y).unwrap() >= 0.0);
    }

    #[test]
    fn unexposed_face_rejected() {
        let p = pinned();
        let err = solve_on_face(&p, &face(RealMatrix::diag(&[0.0, 1.0])), &SolverOptions::default());
        assert!(matches!(err, Err(Error::Numerical(_))));
    }

    #[test]
    fn whole_cone_falls_back_to_plain_solve() {
        let p = pinned();
        let f = Face::from_exposing(&[2], vec![None]).unwrap();
        let sol = solve_on_face(&p, &f, &SolverOptions::default()).unwrap();
        assert_eq!(sol.facial_reductions, 0);
    }
}
