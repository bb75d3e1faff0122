use super::build::block_index;
use super::Scenario;
use crate::error::Result;
use crate::linalg::{hermitian_basis, jacobi_eigen, real_embed, HermitianOperator, RealMatrix};
use crate::solver::Face;

/// Eigenvalues of the determined marginals below this count as zero.
const KERNEL_TOL: f64 = 1e-10;
/// Relative smallest eigenvalue of the state Gram matrix for tomographic completeness.
const COMPLETENESS_TOL: f64 = 1e-10;
/// Largest Hermitian dimension `d^2` for which the completeness test runs.
const MAX_BASIS: usize = 256;
/// Residual allowed when solving for the marginals.
const CONSISTENCY_TOL: f64 = 1e-8;
/// Conditional probabilities at or below this count as zero events.
const ZERO_EVENT_TOL: f64 = 1e-12;

/// The marginals `N[x] = sum_e M[x,e|a]` when the source is tomographically
/// complete: the statistics then fix every `tr(N[x] rho)`, hence `N[x]`.
/// `None` for incomplete sources or statistics no operator reproduces.
pub fn determined_marginals(s: &Scenario) -> Result<Option<Vec<HermitianOperator>>> {
    let d = s.dim();
    let basis = hermitian_basis(d);
    let (m, n_s) = (basis.len(), s.n_inputs());
    if m > MAX_BASIS || n_s < m {
        return Ok(None);
    }
    // R[a][k] = tr(G_k rho_a)
    let r: Vec<Vec<f64>> = s
        .ensemble
        .states()
        .iter()
        .map(|rho| basis.iter().map(|g| g.inner(rho.op())).collect())
        .collect();
    let mut gram = RealMatrix::zeros(m, m);
    for row in &r {
        for i in 0..m {
            for j in 0..m {
                gram.add_at(i, j, row[i] * row[j]);
            }
        }
    }
    let eig = jacobi_eigen(&gram, false)?;
    let top = eig.values.last().copied().unwrap_or(0.0);
    if !(eig.values[0] > COMPLETENESS_TOL * top) {
        return Ok(None);
    }
    let l = crate::linalg::cholesky_spd(&gram)?;
    let mut out = Vec::with_capacity(s.n_outcomes());
    for x in 0..s.n_outcomes() {
        let p: Vec<f64> = (0..n_s).map(|a| s.observed.conditional(x, a)).collect();
        let rhs: Vec<f64> = (0..m).map(|k| r.iter().zip(&p).map(|(row, pa)| row[k] * pa).sum()).collect();
        let c = crate::linalg::cholesky_solve(&l, &rhs);
        let resid = r
            .iter()
            .zip(&p)
            .map(|(row, pa)| (row.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>() - pa).abs())
            .fold(0.0, f64::max);
        if resid > CONSISTENCY_TOL {
            return Ok(None);
        }
        let op = basis
            .iter()
            .zip(&c)
            .fold(HermitianOperator::zeros(d), |acc, (g, ck)| acc.add(&g.scale(*ck)));
        out.push(op);
    }
    Ok(Some(out))
}

/// Projector onto the kernel of a PSD marginal, `None` if it has full rank
/// or is not PSD.
fn kernel_projector(n: &HermitianOperator) -> Result<Option<RealMatrix>> {
    let e = jacobi_eigen(&real_embed(n), true)?;
    let top = e.values.last().copied().unwrap_or(0.0).max(1.0);
    if e.values[0] < -1e2 * KERNEL_TOL * top {
        return Ok(None);
    }
    let vectors = e.vectors.as_ref().expect("requested");
    let dim = e.values.len();
    let mut q = RealMatrix::zeros(dim, dim);
    let mut any = false;
    for j in (0..dim).filter(|&j| e.values[j] <= KERNEL_TOL * top) {
        any = true;
        for r in 0..dim {
            for c in 0..dim {
                q.add_at(r, c, vectors.get(r, j) * vectors.get(c, j));
            }
        }
    }
    Ok(any.then_some(q))
}

/// Directions each marginal `N[x]` must avoid, as PSD matrices. With
/// determined marginals these are their kernels. Otherwise every zero
/// event `P(x|a) = 0` gives `tr(N[x] rho_a) = 0`, so `N[x]` avoids the
/// support of `rho_a`.
fn avoided_directions(s: &Scenario) -> Result<Vec<Option<RealMatrix>>> {
    if let Some(marginals) = determined_marginals(s)? {
        return marginals.iter().map(kernel_projector).collect();
    }
    Ok((0..s.n_outcomes())
        .map(|x| {
            (0..s.n_inputs())
                .filter(|&a| s.observed.conditional(x, a) <= ZERO_EVENT_TOL)
                .map(|a| real_embed(s.ensemble.states()[a].op()))
                .reduce(|mut acc, m| {
                    acc.axpy(1.0, &m);
                    acc
                })
        })
        .collect())
}

/// The face on which every feasible strategy lies: `M[x,e|a] <= N[x]`, so
/// each block avoids whatever its marginal avoids. `None` when nothing is
/// known to be avoided. Blocks past the strategy blocks are left whole.
pub fn exposed_face(s: &Scenario, blocks: &[usize]) -> Result<Option<Face>> {
    let avoided = avoided_directions(s)?;
    if avoided.iter().all(Option::is_none) {
        return Ok(None);
    }
    let n_o = s.n_outcomes();
    let mut exposing = vec![None; blocks.len()];
    for a in 0..s.n_inputs() {
        for (x, w) in avoided.iter().enumerate() {
            for e in 0..n_o {
                exposing[block_index(n_o, a, x, e)] = w.clone();
            }
        }
    }
    let face = Face::from_exposing(blocks, exposing)?;
    Ok(face.is_proper().then_some(face))
}
