//! Block-diagonal standard-form SDPs:
//!
//! ```text
//! maximize  <C, X>
//! s.t.      <A_i, X> = b_i,   X = diag(X_1, ..., X_K) >= 0
//! ```
//!
//! All matrices are real symmetric and stored sparsely per block.

mod preprocess;

use std::fmt::Write as _;

pub use preprocess::{preprocess, DroppedConstraint, PreprocessReport};
pub(crate) use preprocess::gram_matrix;

use crate::error::{Error, Result};
use crate::linalg::RealMatrix;

/// Largest real block size (a 32-dimensional complex block after embedding).
pub const MAX_BLOCK_DIM: usize = 64;
/// Largest number of equality constraints accepted by the solver.
pub const MAX_CONSTRAINTS: usize = 5000;

/// Symmetric matrix stored as its lower triangle: an entry `(r, c, v)` with
/// `r > c` stands for both `(r, c)` and `(c, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    /// Entries may be given in either triangle; duplicates are summed and zeros removed.
    pub fn from_entries(dim: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut e: Vec<(usize, usize, f64)> = Vec::new();
        for (r, c, v) in entries {
            if r >= dim || c >= dim {
                return Err(Error::Shape(format!("entry ({r}, {c}) outside a {dim}x{dim} block")));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite);
            }
            e.push(if r >= c { (r, c, v) } else { (c, r, v) });
        }
        e.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(e.len());
        for (r, c, v) in e {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|x| x.2 != 0.0);
        Ok(Self { dim, entries: merged })
    }

    pub fn from_dense(m: &RealMatrix) -> Result<Self> {
        let n = m.rows();
        if !m.is_symmetric(crate::Tolerances::DEFAULT.hermitian) {
            return Err(Error::Shape("matrix is not symmetric".into()));
        }
        let mut entries = Vec::new();
        for r in 0..n {
            for c in 0..=r {
                let v = 0.5 * (m.get(r, c) + m.get(c, r));
                if v != 0.0 {
                    entries.push((r, c, v));
                }
            }
        }
        Ok(Self { dim: n, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scale(&mut self, s: f64) {
        self.entries.iter_mut().for_each(|e| e.2 *= s);
    }

    pub fn to_dense(&self) -> RealMatrix {
        let mut m = RealMatrix::zeros(self.dim, self.dim);
        self.add_scaled_into(1.0, m.data_mut());
        m
    }

    /// `out += s * A` on a row-major `dim x dim` buffer.
    pub fn add_scaled_into(&self, s: f64, out: &mut [f64]) {
        let n = self.dim;
        for &(r, c, v) in &self.entries {
            out[r * n + c] += s * v;
            if r != c {
                out[c * n + r] += s * v;
            }
        }
    }

    /// `tr(A M)` for any row-major `dim x dim` matrix `M`.
    pub fn inner(&self, m: &[f64]) -> f64 {
        let n = self.dim;
        let mut s = 0.0;
        for &(r, c, v) in &self.entries {
            s += if r == c {
                v * m[r * n + r]
            } else {
                v * (m[r * n + c] + m[c * n + r])
            };
        }
        s
    }

    /// `tr(A B)` for two sparse symmetric matrices.
    pub fn inner_sparse(&self, other: &SparseSym) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut s = 0.0;
        let (a, b) = (&self.entries, &other.entries);
        while i < a.len() && j < b.len() {
            match (a[i].0, a[i].1).cmp(&(b[j].0, b[j].1)) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    let w = if a[i].0 == a[i].1 { 1.0 } else { 2.0 };
                    s += w * a[i].2 * b[j].2;
                    i += 1;
                    j += 1;
                }
            }
        }
        s
    }

    /// `out = A M` for a row-major `dim x dim` matrix `M`.
    pub fn left_mul_into(&self, m: &[f64], out: &mut [f64]) {
        let n = self.dim;
        out.iter_mut().for_each(|v| *v = 0.0);
        for &(r, c, v) in &self.entries {
            axpy_row(v, &m[c * n..(c + 1) * n], &mut out[r * n..(r + 1) * n]);
            if r != c {
                axpy_row(v, &m[r * n..(r + 1) * n], &mut out[c * n..(c + 1) * n]);
            }
        }
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(r, c, v)| if r == c { v * v } else { 2.0 * v * v })
            .sum()
    }
}

fn axpy_row(s: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

/// The restriction of a block-diagonal matrix to one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTerm {
    pub block: usize,
    pub matrix: SparseSym,
}

/// `<sum_k A_k, X> = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Sorted by block, at most one term per block.
    pub terms: Vec<BlockTerm>,
    pub rhs: f64,
    pub label: String,
}

impl Constraint {
    pub fn new(mut terms: Vec<BlockTerm>, rhs: f64, label: impl Into<String>) -> Self {
        terms.retain(|t| !t.matrix.is_zero());
        terms.sort_by_key(|t| t.block);
        Self {
            terms,
            rhs,
            label: label.into(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.matrix.frobenius_sq()).sum::<f64>().sqrt()
    }

    /// `<A_i, X>` for a block-diagonal `X`.
    pub fn evaluate(&self, x: &[RealMatrix]) -> f64 {
        self.terms.iter().map(|t| t.matrix.inner(x[t.block].data())).sum()
    }

    /// `tr(A_i A_j)`.
    pub fn dot(&self, other: &Constraint) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut s = 0.0;
        while i < self.terms.len() && j < other.terms.len() {
            let (a, b) = (&self.terms[i], &other.terms[j]);
            match a.block.cmp(&b.block) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    s += a.matrix.inner_sparse(&b.matrix);
                    i += 1;
                    j += 1;
                }
            }
        }
        s
    }
}

/// A block-diagonal SDP in maximization form.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub blocks: Vec<usize>,
    pub objective: Vec<BlockTerm>,
    pub constraints: Vec<Constraint>,
    /// Multipliers `u` with `sum_i u_i A_i = I`, found during preprocessing.
    pub identity_multiplier: Option<Vec<f64>>,
}

impl SdpProblem {
    pub fn new(blocks: Vec<usize>, objective: Vec<BlockTerm>, constraints: Vec<Constraint>) -> Result<Self> {
        if let Some(&n) = blocks.iter().find(|&&n| n == 0 || n > MAX_BLOCK_DIM) {
            return Err(Error::SizeCap(format!("block size {n} outside 1..={MAX_BLOCK_DIM}")));
        }
        let check = |t: &BlockTerm| -> Result<()> {
            match blocks.get(t.block) {
                None => Err(Error::Shape(format!("term refers to missing block {}", t.block))),
                Some(&n) if n != t.matrix.dim() => Err(Error::DimensionMismatch {
                    expected: n,
                    got: t.matrix.dim(),
                }),
                _ => Ok(()),
            }
        };
        objective.iter().try_for_each(check)?;
        for c in &constraints {
            c.terms.iter().try_for_each(check)?;
            if !c.rhs.is_finite() {
                return Err(Error::NonFinite);
            }
            if c.terms.windows(2).any(|w| w[0].block >= w[1].block) {
                return Err(Error::Shape(format!("constraint '{}' repeats a block", c.label)));
            }
        }
        let mut objective = objective;
        objective.sort_by_key(|t| t.block);
        Ok(Self {
            blocks,
            objective,
            constraints,
            identity_multiplier: None,
        })
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn rhs(&self) -> Vec<f64> {
        self.constraints.iter().map(|c| c.rhs).collect()
    }

    /// For each block, the `(constraint, term)` pairs touching it in constraint order.
    pub fn block_incidence(&self) -> Vec<Vec<(usize, usize)>> {
        let mut inc = vec![Vec::new(); self.blocks.len()];
        for (i, c) in self.constraints.iter().enumerate() {
            for (t, term) in c.terms.iter().enumerate() {
                inc[term.block].push((i, t));
            }
        }
        inc
    }

    /// For each constraint, the first constraint sharing a block with it.
    pub fn envelope_starts(&self, incidence: &[Vec<(usize, usize)>]) -> Vec<usize> {
        self.constraints
            .iter()
            .enumerate()
            .map(|(i, c)| {
                c.terms
                    .iter()
                    .filter_map(|t| incidence[t.block].first().map(|&(j, _)| j))
                    .fold(i, usize::min)
            })
            .collect()
    }

    /// `<C, X>`.
    pub fn objective_value(&self, x: &[RealMatrix]) -> f64 {
        self.objective.iter().map(|t| t.matrix.inner(x[t.block].data())).sum()
    }

    /// `A(X) - b`.
    pub fn primal_residual(&self, x: &[RealMatrix]) -> Vec<f64> {
        self.constraints.iter().map(|c| c.evaluate(x) - c.rhs).collect()
    }

    /// `sum_i y_i A_i - C`, block by block.
    pub fn dual_slack(&self, y: &[f64]) -> Vec<RealMatrix> {
        let mut z: Vec<RealMatrix> = self.blocks.iter().map(|&n| RealMatrix::zeros(n, n)).collect();
        for (c, &yi) in self.constraints.iter().zip(y) {
            for t in &c.terms {
                t.matrix.add_scaled_into(yi, z[t.block].data_mut());
            }
        }
        for t in &self.objective {
            t.matrix.add_scaled_into(-1.0, z[t.block].data_mut());
        }
        z
    }

    /// Plain-text dump (block sizes, dense `C`, dense `A_i` and `b`) for
    /// cross-checking against external solvers. Only nonzero blocks are listed.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let sizes: Vec<String> = self.blocks.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "blocks {}", sizes.join(" "));
        let _ = writeln!(s, "constraints {}", self.constraints.len());
        let _ = writeln!(s, "objective");
        write_terms(&mut s, &self.objective);
        for (i, c) in self.constraints.iter().enumerate() {
            let _ = writeln!(s, "constraint {i} rhs {:e} label {}", c.rhs, c.label);
            write_terms(&mut s, &c.terms);
        }
        s
    }
}

fn write_terms(s: &mut String, terms: &[BlockTerm]) {
    for t in terms {
        let _ = writeln!(s, "block {}", t.block);
        let d = t.matrix.to_dense();
        for r in 0..d.rows() {
            let row: Vec<String> = (0..d.cols()).map(|c| format!("{:e}", d.get(r, c))).collect();
            let _ = writeln!(s, "  {}", row.join(" "));
        }
    }
}
