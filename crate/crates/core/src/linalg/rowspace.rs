use super::EnvelopeMatrix;

/// Relative Gram pivot under which a row becomes a candidate for removal.
/// The candidate is only dropped once its explicit reconstruction residual
/// passes the caller's tolerance.
const GRAM_PIVOT_TOL: f64 = 1e-12;

/// A collection of real rows that can be inspected through inner products.
pub trait RowSource {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Smallest `j` such that rows `i` and `j` may have a nonzero inner product.
    fn envelope_start(&self, i: usize) -> usize {
        let _ = i;
        0
    }

    fn dot(&self, i: usize, j: usize) -> f64;

    /// Euclidean norm of `row_i - sum_j c_j row_j`.
    fn residual_norm(&self, i: usize, coeffs: &[(usize, f64)]) -> f64;

    /// Gram matrix over the envelope given by [`RowSource::envelope_start`].
    fn gram(&self) -> EnvelopeMatrix {
        let n = self.len();
        let mut g = EnvelopeMatrix::zeros((0..n).map(|i| self.envelope_start(i)).collect());
        for i in 0..n {
            for j in g.first(i)..=i {
                g.add(i, j, self.dot(i, j));
            }
        }
        g
    }
}

/// A row that lies in the span of earlier kept rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DroppedRow {
    pub index: usize,
    /// `(kept row index, coefficient)`, reconstructing the dropped row.
    pub coefficients: Vec<(usize, f64)>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowSpaceBasis {
    /// Indices of a maximal linearly independent subset, ascending.
    pub kept: Vec<usize>,
    pub dropped: Vec<DroppedRow>,
}

impl RowSpaceBasis {
    pub fn rank(&self) -> usize {
        self.kept.len()
    }
}

/// Greedy in-order selection of a maximal independent subset of rows.
///
/// Rows are visited in index order and orthogonalized against the rows already
/// kept through an envelope Cholesky factorization of the Gram matrix. A row
/// whose remaining Gram pivot is negligible is dropped if and only if its
/// explicit reconstruction from kept rows leaves a residual below `tol`.
pub fn select_independent_rows<R: RowSource + ?Sized>(rows: &R, tol: f64) -> RowSpaceBasis {
    let mut gram = rows.gram();
    let n = gram.len();
    let mut dropped_rows = Vec::new();
    let mut skip = vec![false; n];
    let dropped = gram.factor_dropping(GRAM_PIVOT_TOL, |g, i, l| {
        let c = g.back_substitute(g.first(i), l, &skip[..i]);
        let coefficients: Vec<(usize, f64)> = c
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v != 0.0)
            .map(|(j, &v)| (j, v))
            .collect();
        let residual = rows.residual_norm(i, &coefficients);
        if residual < tol {
            skip[i] = true;
            dropped_rows.push(DroppedRow {
                index: i,
                coefficients,
                residual,
            });
            true
        } else {
            false
        }
    });
    let kept = (0..n).filter(|&i| !dropped[i]).collect();
    RowSpaceBasis {
        kept,
        dropped: dropped_rows,
    }
}

struct DenseRows<'a>(&'a [Vec<f64>]);

impl RowSource for DenseRows<'_> {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn dot(&self, i: usize, j: usize) -> f64 {
        self.0[i].iter().zip(&self.0[j]).map(|(a, b)| a * b).sum()
    }

    fn residual_norm(&self, i: usize, coeffs: &[(usize, f64)]) -> f64 {
        let mut r = self.0[i].clone();
        for &(j, c) in coeffs {
            for (rk, vk) in r.iter_mut().zip(&self.0[j]) {
                *rk -= c * vk;
            }
        }
        r.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Maximal independent subset of dense rows together with reconstruction
/// coefficients for every dropped row.
pub fn row_space_basis(rows: &[Vec<f64>], tol: f64) -> RowSpaceBasis {
    select_independent_rows(&DenseRows(rows), tol)
}
