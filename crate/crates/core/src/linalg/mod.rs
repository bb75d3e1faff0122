//! Dense matrix kernel.
//!
//! Complex Hermitian operators are handled in real arithmetic through the
//! embedding `A + iB -> [[A, -B], [B, A]]`, which doubles every eigenvalue's
//! multiplicity and satisfies `tr(embed(x) embed(y)) = 2 Re tr(xy)`.

mod cholesky;
mod eigen;
mod envelope;
mod rowspace;

pub use cholesky::{cholesky_spd, cholesky_solve};
pub use eigen::{jacobi_eigen, min_eigenvalue_sym, SymmetricEigen};
pub use envelope::EnvelopeMatrix;
pub use rowspace::{row_space_basis, select_independent_rows, DroppedRow, RowSource, RowSpaceBasis};

use std::ops::{Add, Mul, Sub};

pub use num_complex::Complex64 as C64;

use crate::config::Tolerances;
use crate::error::{Error, Result};

/// Row-major complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Shape(format!(
                "{rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_real(rows: usize, cols: usize, re: &[f64]) -> Result<Self> {
        Self::new(rows, cols, re.iter().map(|&r| C64::new(r, 0.0)).collect())
    }

    /// Builds from separate real and imaginary nested rows.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let rows = re.len();
        if im.len() != rows {
            return Err(Error::Shape("real and imaginary parts differ in row count".into()));
        }
        let cols = re.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows * cols);
        for (r, i) in re.iter().zip(im) {
            if r.len() != cols || i.len() != cols {
                return Err(Error::Shape("ragged matrix rows".into()));
            }
            data.extend(r.iter().zip(i).map(|(&a, &b)| C64::new(a, b)));
        }
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.get(r, c).conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                dev = dev.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        dev
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    out.data[r * other.cols + c] += a * other.get(k, c);
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Kronecker product; dimensions multiply.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let av = a.get(ar, ac);
            for br in 0..b.rows {
                for bc in 0..b.cols {
                    out.data[(ar * b.rows + br) * cols + ac * b.cols + bc] = av * b.get(br, bc);
                }
            }
        }
    }
    out
}

/// Row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Shape(format!(
                "{rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = s;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn add_at(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] += v;
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.get(r, c);
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let n = other.cols;
        let mut out = Self::zeros(self.rows, n);
        for r in 0..self.rows {
            let orow = &mut out.data[r * n..(r + 1) * n];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius inner product `tr(self^T other)`.
    pub fn dot(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Replaces the matrix by `(M + M^T) / 2`.
    pub fn symmetrize(&mut self) {
        let n = self.rows;
        for r in 0..n {
            for c in (r + 1)..n {
                let v = 0.5 * (self.data[r * n + c] + self.data[c * n + r]);
                self.data[r * n + c] = v;
                self.data[c * n + r] = v;
            }
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let n = self.rows;
        (0..n).all(|r| ((r + 1)..n).all(|c| (self.get(r, c) - self.get(c, r)).abs() <= tol))
    }
}

impl Add for &RealMatrix {
    type Output = RealMatrix;
    fn add(self, rhs: &RealMatrix) -> RealMatrix {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &RealMatrix {
    type Output = RealMatrix;
    fn sub(self, rhs: &RealMatrix) -> RealMatrix {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul for &RealMatrix {
    type Output = RealMatrix;
    fn mul(self, rhs: &RealMatrix) -> RealMatrix {
        self.matmul(rhs)
    }
}

/// A square complex matrix equal to its adjoint.
///
/// Construction checks the deviation against the Hermitian tolerance and then
/// stores the exact average `(M + M^dagger) / 2`, so the invariant holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, Tolerances::DEFAULT.hermitian)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape(format!(
                "Hermitian operator must be square, got {}x{}",
                matrix.rows, matrix.cols
            )));
        }
        let dev = matrix.hermitian_deviation();
        if dev > tol {
            return Err(Error::NotHermitian(dev));
        }
        let adj = matrix.adjoint();
        let matrix = (&matrix + &adj).scale_real(0.5);
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim, dim),
        }
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, C64::new(v, 0.0));
        }
        Self { matrix: m }
    }

    /// Projector `|v><v|` onto a (not necessarily normalized) vector.
    pub fn projector(v: &[C64]) -> Self {
        let n = v.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                m.set(r, c, v[r] * v[c].conj());
            }
        }
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.matrix.get(r, c)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `tr(self * other)`, which is real for two Hermitian operators.
    pub fn inner(&self, other: &Self) -> f64 {
        let n = self.dim();
        assert_eq!(n, other.dim());
        let mut acc = 0.0;
        for r in 0..n {
            for c in 0..n {
                let a = self.matrix.get(r, c);
                let b = other.matrix.get(c, r);
                acc += a.re * b.re - a.im * b.im;
            }
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix - &other.matrix,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            matrix: self.matrix.scale_real(s),
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            matrix: kron(&self.matrix, &other.matrix),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.matrix.max_abs_diff(&other.matrix)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        // Every eigenvalue appears twice in the embedding.
        let eig = jacobi_eigen(&real_embed(self), false)?;
        Ok(eig.values.iter().step_by(2).copied().collect())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        min_eigenvalue(self)
    }
}

/// Smallest eigenvalue of a Hermitian operator via cyclic Jacobi on the real embedding.
pub fn min_eigenvalue(h: &HermitianOperator) -> Result<f64> {
    min_eigenvalue_sym(&real_embed(h))
}

/// Real symmetric embedding `[[A, -B], [B, A]]` of `h = A + iB`.
pub fn real_embed(h: &HermitianOperator) -> RealMatrix {
    let d = h.dim();
    let n = 2 * d;
    let mut out = RealMatrix::zeros(n, n);
    for r in 0..d {
        for c in 0..d {
            let z = h.get(r, c);
            out.set(r, c, z.re);
            out.set(r + d, c + d, z.re);
            out.set(r, c + d, -z.im);
            out.set(r + d, c, z.im);
        }
    }
    out
}

/// Inverse of [`real_embed`] for matrices that are only approximately of the
/// embedded form; the two copies of each part are averaged.
pub fn real_unembed(m: &RealMatrix) -> Result<HermitianOperator> {
    if m.rows() != m.cols() || m.rows() % 2 != 0 {
        return Err(Error::Shape(format!(
            "embedding must be square with even size, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let d = m.rows() / 2;
    let mut out = ComplexMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            let re = 0.5 * (m.get(r, c) + m.get(r + d, c + d));
            let im = 0.5 * (m.get(r + d, c) - m.get(r, c + d));
            out.set(r, c, C64::new(re, im));
        }
    }
    // Averaging a symmetric input gives an exactly Hermitian result up to rounding.
    HermitianOperator::with_tolerance(out, 1e-9 * (1.0 + m.max_abs()))
}

pub fn pauli_x() -> HermitianOperator {
    HermitianOperator {
        matrix: ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).expect("static shape"),
    }
}

pub fn pauli_y() -> HermitianOperator {
    let i = C64::new(0.0, 1.0);
    HermitianOperator {
        matrix: ComplexMatrix::new(2, 2, vec![C64::new(0.0, 0.0), -i, i, C64::new(0.0, 0.0)])
            .expect("static shape"),
    }
}

pub fn pauli_z() -> HermitianOperator {
    HermitianOperator::diag(&[1.0, -1.0])
}

/// Orthonormal basis of the real vector space of `d x d` Hermitian matrices
/// under `<A, B> = tr(AB)`: the diagonal units, then for each `j < k` the
/// symmetric and antisymmetric off-diagonal pairs.
pub fn hermitian_basis(d: usize) -> Vec<HermitianOperator> {
    let mut basis = Vec::with_capacity(d * d);
    for j in 0..d {
        let mut m = ComplexMatrix::zeros(d, d);
        m.set(j, j, C64::new(1.0, 0.0));
        basis.push(HermitianOperator { matrix: m });
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = ComplexMatrix::zeros(d, d);
            m.set(j, k, C64::new(s, 0.0));
            m.set(k, j, C64::new(s, 0.0));
            basis.push(HermitianOperator { matrix: m });
            let mut m = ComplexMatrix::zeros(d, d);
            m.set(j, k, C64::new(0.0, s));
            m.set(k, j, C64::new(0.0, -s));
            basis.push(HermitianOperator { matrix: m });
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));

        let p0 = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let expect = HermitianOperator::diag(&[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(&kron(&p0, &p0), expect.matrix());
    }

    #[test]
    fn kron_sigma_z_outcome_table() {
        // <ab| Z (x) Z |ab> = (-1)^(a+b)
        let zz = pauli_z().kron(&pauli_z());
        for a in 0..2 {
            for b in 0..2 {
                let idx = 2 * a + b;
                let expect = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(zz.get(idx, idx), c(expect, 0.0));
            }
        }
        assert!(zz.matrix().hermitian_deviation() == 0.0);
    }

    #[test]
    fn min_eigenvalue_examples() {
        let h = HermitianOperator::diag(&[3.0, 1.0, 2.0]);
        assert!((min_eigenvalue(&h).unwrap() - 1.0).abs() < 1e-10);

        let plus = HermitianOperator::projector(&[c(0.5f64.sqrt(), 0.0), c(0.5f64.sqrt(), 0.0)]);
        assert!(min_eigenvalue(&plus).unwrap().abs() < 1e-10);

        // I/2 + 0.6 X/2 has eigenvalues (1 +- 0.6)/2
        let rho = HermitianOperator::identity(2).scale(0.5).add(&pauli_x().scale(0.3));
        assert!((min_eigenvalue(&rho).unwrap() - 0.2).abs() < 1e-10);
    }

    #[test]
    fn embed_real_input_is_block_diagonal() {
        let a = HermitianOperator::new(ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 3.0]).unwrap())
            .unwrap();
        let e = real_embed(&a);
        let expect = RealMatrix::from_rows(&[
            vec![1.0, 2.0, 0.0, 0.0],
            vec![2.0, 3.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 2.0],
            vec![0.0, 0.0, 2.0, 3.0],
        ])
        .unwrap();
        assert_eq!(e, expect);
    }

    #[test]
    fn embed_sigma_y_spectrum() {
        let e = real_embed(&pauli_y());
        let eig = jacobi_eigen(&e, false).unwrap();
        let expect = [-1.0, -1.0, 1.0, 1.0];
        for (v, x) in eig.values.iter().zip(expect) {
            assert!((v - x).abs() < 1e-12);
        }
    }

    #[test]
    fn unembed_inverts_embed() {
        let h = pauli_y().add(&pauli_x().scale(0.25));
        let back = real_unembed(&real_embed(&h)).unwrap();
        assert!(back.max_abs_diff(&h) < 1e-15);
    }

    #[test]
    fn hermitian_basis_is_orthonormal() {
        let b = hermitian_basis(3);
        assert_eq!(b.len(), 9);
        for (i, x) in b.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((x.inner(y) - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            ComplexMatrix::new(2, 2, vec![c(0.0, 0.0); 3]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]),
            Err(Error::NonFinite)
        ));
        let not_h = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(HermitianOperator::new(not_h), Err(Error::NotHermitian(_))));
    }
}
