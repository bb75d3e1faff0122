use super::RealMatrix;
use crate::error::{Error, Result};

/// Lower-triangular `L` with `L L^T = m` for a symmetric positive definite `m`.
///
/// A non-positive pivot yields [`Error::NotPositiveDefinite`]; the solver uses
/// this as a cheap interior probe rather than a fatal condition.
pub fn cholesky_spd(m: &RealMatrix) -> Result<RealMatrix> {
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::Shape(format!("Cholesky needs a square matrix, got {}x{}", n, m.cols())));
    }
    let mut l = RealMatrix::zeros(n, n);
    let a = m.data();
    let ld = l.data_mut();
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= ld[i * n + k] * ld[j * n + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return Err(Error::NotPositiveDefinite { pivot: i });
                }
                ld[i * n + i] = s.sqrt();
            } else {
                ld[i * n + j] = s / ld[j * n + j];
            }
        }
    }
    Ok(l)
}

/// Solves `L L^T x = b` given the factor from [`cholesky_spd`].
pub fn cholesky_solve(l: &RealMatrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    assert_eq!(b.len(), n);
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l.get(i, k) * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l.get(k, i) * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_factor() {
        let l = cholesky_spd(&RealMatrix::identity(3)).unwrap();
        assert_eq!(l, RealMatrix::identity(3));
    }

    #[test]
    fn hand_factorization() {
        let m = RealMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 5.0]]).unwrap();
        let l = cholesky_spd(&m).unwrap();
        let expect = RealMatrix::from_rows(&[vec![2.0, 0.0], vec![1.0, 2.0]]).unwrap();
        assert!(l.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn hilbert_reconstruction() {
        let n = 4;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| 1.0 / (i + j + 1) as f64).collect())
            .collect();
        let m = RealMatrix::from_rows(&rows).unwrap();
        let l = cholesky_spd(&m).unwrap();
        let back = l.matmul(&l.transpose());
        let resid = (&back - &m).frobenius_norm();
        assert!(resid < 1e-10 * (1.0 + m.frobenius_norm()), "residual {resid}");
    }

    #[test]
    fn indefinite_reports_pivot() {
        let m = RealMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert_eq!(cholesky_spd(&m), Err(Error::NotPositiveDefinite { pivot: 1 }));
    }

    #[test]
    fn solve_roundtrip() {
        let m = RealMatrix::from_rows(&[vec![4.0, 2.0, 0.0], vec![2.0, 5.0, 1.0], vec![0.0, 1.0, 3.0]])
            .unwrap();
        let l = cholesky_spd(&m).unwrap();
        let x = cholesky_solve(&l, &[1.0, 2.0, 3.0]);
        let mx = m.matmul(&RealMatrix::new(3, 1, x).unwrap());
        for (v, e) in mx.data().iter().zip([1.0, 2.0, 3.0]) {
            assert!((v - e).abs() < 1e-13);
        }
    }
}
