#![allow(dead_code)]

pub mod oracle;

use mdirand::linalg::{ComplexMatrix, HermitianOperator, RealMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    ComplexMatrix::new(rows, cols, data).unwrap()
}

pub fn random_hermitian(rng: &mut impl Rng, d: usize) -> HermitianOperator {
    let g = random_complex(rng, d, d);
    let h = (&g + &g.adjoint()).scale_real(0.5);
    HermitianOperator::new(h).unwrap()
}

/// `G G^dagger / tr(G G^dagger)`, full rank with probability one.
pub fn random_density(rng: &mut impl Rng, d: usize) -> HermitianOperator {
    let g = random_complex(rng, d, d);
    let p = &g * &g.adjoint();
    let t = p.trace().re;
    HermitianOperator::with_tolerance(p.scale_real(1.0 / t), 1e-12).unwrap()
}

pub fn random_symmetric(rng: &mut impl Rng, n: usize) -> RealMatrix {
    let mut m = RealMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..=r {
            let v = rng.gen_range(-1.0..1.0);
            m.set(r, c, v);
            m.set(c, r, v);
        }
    }
    m
}

/// `B B^T + shift I` with `B` of size `n x k`.
pub fn random_psd(rng: &mut impl Rng, n: usize, k: usize, shift: f64) -> RealMatrix {
    let mut b = RealMatrix::zeros(n, k);
    for r in 0..n {
        for c in 0..k {
            b.set(r, c, rng.gen_range(-1.0..1.0));
        }
    }
    let mut m = b.matmul(&b.transpose());
    for i in 0..n {
        m.add_at(i, i, shift);
    }
    m.symmetrize();
    m
}

pub fn to_nalgebra(m: &RealMatrix) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(m.rows(), m.cols(), |r, c| m.get(r, c))
}

/// Numerical rank from singular values, relative to the largest one.
pub fn svd_rank(rows: &[Vec<f64>], rel_tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m = nalgebra::DMatrix::from_fn(rows.len(), rows[0].len(), |r, c| rows[r][c]);
    let sv = m.svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}
