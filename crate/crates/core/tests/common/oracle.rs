//! An independent reference for small single-block SDPs.

use mdirand::linalg::RealMatrix;
use mdirand::sdp::{BlockTerm, Constraint, SdpProblem, SparseSym};
use nalgebra::DMatrix;
use rand::Rng;

use super::{random_psd, random_symmetric, to_nalgebra};

pub struct Instance {
    pub c: RealMatrix,
    pub a: Vec<RealMatrix>,
    pub b: Vec<f64>,
}

pub fn term(m: &RealMatrix) -> BlockTerm {
    BlockTerm {
        block: 0,
        matrix: SparseSym::from_dense(m).unwrap(),
    }
}

impl Instance {
    /// `tr X = 1` plus `k` random rows, right-hand sides from a random
    /// positive definite point so the feasible set has an interior.
    pub fn random(r: &mut impl Rng, n: usize, k: usize) -> Self {
        let x0 = random_psd(r, n, n, 0.2);
        let x0 = x0.scale(1.0 / x0.trace());
        let mut a = vec![RealMatrix::identity(n)];
        a.extend((0..k).map(|_| random_symmetric(r, n)));
        let b = a.iter().map(|m| m.dot(&x0)).collect();
        Self {
            c: random_symmetric(r, n),
            a,
            b,
        }
    }

    pub fn problem(&self) -> SdpProblem {
        let n = self.c.rows();
        let rows = self
            .a
            .iter()
            .zip(&self.b)
            .enumerate()
            .map(|(i, (m, &b))| Constraint::new(vec![term(m)], b, format!("r{i}")))
            .collect();
        SdpProblem::new(vec![n], vec![term(&self.c)], rows).unwrap()
    }

    /// `min b.y - mu log det(sum y_i A_i - C)` followed along `mu -> 0`.
    /// Returns `b.y` at the last `mu`, within `n mu` above the optimum.
    pub fn barrier_oracle(&self) -> f64 {
        let m = self.a.len();
        let c = to_nalgebra(&self.c);
        let a: Vec<DMatrix<f64>> = self.a.iter().map(to_nalgebra).collect();
        let b = nalgebra::DVector::from_vec(self.b.clone());
        let slack = |y: &nalgebra::DVector<f64>| {
            let mut s = -c.clone();
            for (ai, yi) in a.iter().zip(y.iter()) {
                s += ai * *yi;
            }
            s
        };
        let lmax = c.clone().symmetric_eigen().eigenvalues.max();
        let mut y = nalgebra::DVector::zeros(m);
        y[0] = lmax + 1.0;
        let mut mu = 1.0;
        while mu > 1e-11 {
            for _ in 0..100 {
                let s = slack(&y);
                let sinv = s.clone().cholesky().expect("interior").inverse();
                let g = nalgebra::DVector::from_fn(m, |i, _| b[i] - mu * (&sinv * &a[i]).trace());
                let h = DMatrix::from_fn(m, m, |i, j| mu * (&sinv * &a[i] * &sinv * &a[j]).trace());
                let dy = -h.clone().cholesky().expect("Hessian").solve(&g);
                let decrement = g.dot(&dy).abs();
                let phi = |y: &nalgebra::DVector<f64>| {
                    slack(y).cholesky().map(|l| b.dot(y) - 2.0 * mu * l.l().diagonal().map(f64::ln).sum())
                };
                let f0 = phi(&y).unwrap();
                let mut t = 1.0;
                loop {
                    let trial = &y + &dy * t;
                    if let Some(f) = phi(&trial) {
                        if f <= f0 - 0.25 * t * decrement {
                            y = trial;
                            break;
                        }
                    }
                    t *= 0.5;
                    assert!(t > 1e-14, "line search failed");
                }
                if decrement < 1e-14 * (1.0 + f0.abs()) {
                    break;
                }
            }
            mu *= 0.2;
        }
        b.dot(&y)
    }
}
