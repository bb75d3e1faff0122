//! Small dense helpers on row-major square blocks.

use crate::error::Result;
use crate::linalg::{cholesky_spd, jacobi_eigen, RealMatrix};

/// `c = a * b` for `n x n` row-major slices.
pub fn matmul_into(n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    c.iter_mut().for_each(|v| *v = 0.0);
    for i in 0..n {
        let ci = &mut c[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a[i * n + k];
            if aik != 0.0 {
                for (cij, bkj) in ci.iter_mut().zip(&b[k * n..(k + 1) * n]) {
                    *cij += aik * bkj;
                }
            }
        }
    }
}

pub fn matmul(a: &RealMatrix, b: &RealMatrix) -> RealMatrix {
    let n = a.rows();
    let mut c = RealMatrix::zeros(n, n);
    matmul_into(n, a.data(), b.data(), c.data_mut());
    c
}

/// Inverse of a symmetric positive definite matrix via its Cholesky factor.
pub fn spd_inverse(m: &RealMatrix) -> Result<RealMatrix> {
    let n = m.rows();
    let l = cholesky_spd(m)?;
    let linv = lower_inverse(&l);
    // m^-1 = L^-T L^-1
    let mut out = RealMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = 0.0;
            for k in i..n {
                s += linv.get(k, i) * linv.get(k, j);
            }
            out.set(i, j, s);
            out.set(j, i, s);
        }
    }
    Ok(out)
}

fn lower_inverse(l: &RealMatrix) -> RealMatrix {
    let n = l.rows();
    let mut inv = RealMatrix::zeros(n, n);
    for j in 0..n {
        inv.set(j, j, 1.0 / l.get(j, j));
        for i in (j + 1)..n {
            let mut s = 0.0;
            for k in j..i {
                s += l.get(i, k) * inv.get(k, j);
            }
            inv.set(i, j, -s / l.get(i, i));
        }
    }
    inv
}

/// Largest `alpha` with `m + alpha d >= 0`, or infinity; `m` must be positive definite.
pub fn max_step(m: &RealMatrix, d: &RealMatrix) -> Result<f64> {
    let n = m.rows();
    let linv = lower_inverse(&cholesky_spd(m)?);
    // L^-1 d L^-T
    let t = matmul(&linv, d);
    let mut s = RealMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut v = 0.0;
            for k in 0..=j {
                v += t.get(i, k) * linv.get(j, k);
            }
            s.set(i, j, v);
            s.set(j, i, v);
        }
    }
    let lambda = jacobi_eigen(&s, false)?.values[0];
    Ok(if lambda < 0.0 { -1.0 / lambda } else { f64::INFINITY })
}
