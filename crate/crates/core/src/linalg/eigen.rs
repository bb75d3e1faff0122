use super::RealMatrix;
use crate::config::Tolerances;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`, when requested.
    pub vectors: Option<RealMatrix>,
}

/// Cyclic Jacobi eigensolver.
///
/// Sweeps visit the pairs `(p, q)`, `p < q`, in row order, so results are
/// reproducible bit for bit. Stops once the off-diagonal Frobenius norm is
/// below `1e-12 * max(1, ||A||_F)`.
pub fn jacobi_eigen(a: &RealMatrix, want_vectors: bool) -> Result<SymmetricEigen> {
    let n = a.rows();
    if n != a.cols() {
        return Err(Error::Shape(format!("eigensolver needs a square matrix, got {}x{}", n, a.cols())));
    }
    let mut m = a.clone();
    m.symmetrize();
    let mut v = want_vectors.then(|| RealMatrix::identity(n));

    let scale = m.frobenius_norm().max(1.0);
    let threshold = Tolerances::DEFAULT.jacobi_off_diagonal * scale;

    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&m) < threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, v.as_mut(), p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&m) >= threshold {
        return Err(Error::Numerical(format!(
            "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).total_cmp(&m.get(j, j)));
    let values = order.iter().map(|&i| m.get(i, i)).collect();
    let vectors = v.map(|v| {
        let mut sorted = RealMatrix::zeros(n, n);
        for (k, &i) in order.iter().enumerate() {
            for r in 0..n {
                sorted.set(r, k, v.get(r, i));
            }
        }
        sorted
    });
    Ok(SymmetricEigen { values, vectors })
}

/// Smallest eigenvalue of a real symmetric matrix.
pub fn min_eigenvalue_sym(a: &RealMatrix) -> Result<f64> {
    let eig = jacobi_eigen(a, false)?;
    eig.values
        .first()
        .copied()
        .ok_or_else(|| Error::Shape("empty matrix has no eigenvalues".into()))
}

fn off_diagonal_norm(m: &RealMatrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                s += m.get(r, c) * m.get(r, c);
            }
        }
    }
    s.sqrt()
}

fn rotate(m: &mut RealMatrix, v: Option<&mut RealMatrix>, p: usize, q: usize) {
    let apq = m.get(p, q);
    if apq == 0.0 {
        return;
    }
    let app = m.get(p, p);
    let aqq = m.get(q, q);
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.is_infinite() {
        0.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    if t == 0.0 {
        // |a_pq| is negligible next to |a_qq - a_pp|
        m.set(p, q, 0.0);
        m.set(q, p, 0.0);
        return;
    }
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = m.rows();
    for k in 0..n {
        let mkp = m.get(k, p);
        let mkq = m.get(k, q);
        m.set(k, p, c * mkp - s * mkq);
        m.set(k, q, s * mkp + c * mkq);
    }
    for k in 0..n {
        let mpk = m.get(p, k);
        let mqk = m.get(q, k);
        m.set(p, k, c * mpk - s * mqk);
        m.set(q, k, s * mpk + c * mqk);
    }
    m.set(p, q, 0.0);
    m.set(q, p, 0.0);
    if let Some(v) = v {
        for k in 0..n {
            let vkp = v.get(k, p);
            let vkq = v.get(k, q);
            v.set(k, p, c * vkp - s * vkq);
            v.set(k, q, s * vkp + c * vkq);
        }
    }
}
