use super::certify::certify_upper_bound;
use super::dense::{matmul, matmul_into, max_step, spd_inverse};
use super::{IterationRecord, SdpSolution, SolveStatus, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_spd, min_eigenvalue_sym, EnvelopeMatrix, RealMatrix};
use crate::sdp::{SdpProblem, MAX_CONSTRAINTS};

const STEP_FRACTION: f64 = 0.98;
const MAX_BACKTRACKS: usize = 40;
/// Iterates this large are taken as evidence of primal or dual infeasibility.
const DIVERGENCE: f64 = 1e12;
/// Consecutive negligible steps before giving up.
const MAX_STALLS: usize = 5;
/// Iterations allowed without halving the best merit.
const PROGRESS_WINDOW: usize = 25;

type Blocks = Vec<RealMatrix>;

struct Workspace<'a> {
    p: &'a SdpProblem,
    incidence: Vec<Vec<(usize, usize)>>,
    envelope: Vec<usize>,
    b: Vec<f64>,
    n_total: f64,
}

impl<'a> Workspace<'a> {
    fn new(p: &'a SdpProblem) -> Self {
        let incidence = p.block_incidence();
        let envelope = p.envelope_starts(&incidence);
        Self {
            p,
            incidence,
            envelope,
            b: p.rhs(),
            n_total: p.total_dim() as f64,
        }
    }

    fn zeros(&self) -> Blocks {
        self.p.blocks.iter().map(|&n| RealMatrix::zeros(n, n)).collect()
    }

    /// `sum_i v_i A_i`.
    fn adjoint(&self, v: &[f64]) -> Blocks {
        let mut out = self.zeros();
        for (c, &vi) in self.p.constraints.iter().zip(v) {
            if vi != 0.0 {
                for t in &c.terms {
                    t.matrix.add_scaled_into(vi, out[t.block].data_mut());
                }
            }
        }
        out
    }

    /// `<A_i, W>` for every constraint.
    fn apply(&self, w: &[RealMatrix]) -> Vec<f64> {
        self.p.constraints.iter().map(|c| c.evaluate(w)).collect()
    }

    /// Schur complement `M_ij = tr(A_i X A_j Z^-1)`.
    fn schur(&self, x: &[RealMatrix], zinv: &[RealMatrix]) -> EnvelopeMatrix {
        let mut m = EnvelopeMatrix::zeros(self.envelope.clone());
        let mut ax = Vec::new();
        let mut q = Vec::new();
        for (k, list) in self.incidence.iter().enumerate() {
            let n = self.p.blocks[k];
            ax.resize(n * n, 0.0);
            q.resize(n * n, 0.0);
            for (pos, &(i, ti)) in list.iter().enumerate() {
                // Q = Z^-1 A_i X, M_ij = tr(A_j Q)
                self.p.constraints[i].terms[ti].matrix.left_mul_into(x[k].data(), &mut ax);
                matmul_into(n, zinv[k].data(), &ax, &mut q);
                for &(j, tj) in &list[..=pos] {
                    m.add(i, j, self.p.constraints[j].terms[tj].matrix.inner(&q));
                }
            }
        }
        m
    }
}

fn inner(a: &[RealMatrix], b: &[RealMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn min_eigenvalue_blocks(m: &[RealMatrix]) -> Result<f64> {
    m.iter().try_fold(f64::INFINITY, |acc, b| Ok(acc.min(min_eigenvalue_sym(b)?)))
}

/// Factors the Schur complement, adding a growing diagonal shift if it is
/// numerically indefinite.
fn factor_schur(m: EnvelopeMatrix) -> Result<EnvelopeMatrix> {
    let mut f = m.clone();
    if f.factor().is_ok() {
        return Ok(f);
    }
    let base = m.max_diagonal().max(1.0);
    let mut shift = 1e-14 * base;
    for _ in 0..8 {
        let mut f = m.clone();
        for i in 0..f.len() {
            f.add(i, i, shift);
        }
        if f.factor().is_ok() {
            return Ok(f);
        }
        shift *= 100.0;
    }
    Err(Error::Numerical("Schur complement is not positive definite".into()))
}

/// Maximum rounds of iterative refinement of the Newton system.
const REFINE_STEPS: usize = 3;

struct Direction {
    dx: Blocks,
    dy: Vec<f64>,
    dz: Blocks,
}

/// Residuals and derived quantities at the current iterate.
struct Point<'w> {
    ws: &'w Workspace<'w>,
    x: &'w [RealMatrix],
    zinv: &'w [RealMatrix],
    rp: &'w [f64],
    rd: &'w [RealMatrix],
    schur: &'w EnvelopeMatrix,
}

impl Point<'_> {
    /// Newton direction for `X dZ + dX Z = R_c` given `R_c Z^-1`.
    fn direction(&self, rc_zinv: Blocks) -> Direction {
        let ws = self.ws;
        // W = R_c Z^-1 - X R_d Z^-1
        let w: Blocks = rc_zinv
            .into_iter()
            .enumerate()
            .map(|(k, mut w)| {
                let xrd = matmul(&self.x[k], &self.rd[k]);
                let t = matmul(&xrd, &self.zinv[k]);
                w.axpy(-1.0, &t);
                w
            })
            .collect();
        let mut dy = ws.apply(&w);
        for (v, r) in dy.iter_mut().zip(self.rp) {
            *v -= r;
        }
        self.schur.solve_in_place(&mut dy);

        // dZ = A^T dy + R_d, dX = W - X A^T dy Z^-1, refined until A(dX) = r_p
        let mut atdy = ws.adjoint(&dy);
        let mut dx = self.primal_step(&w, &atdy);
        let mut last = f64::INFINITY;
        for _ in 0..REFINE_STEPS {
            let mut res = ws.apply(&dx);
            for (v, r) in res.iter_mut().zip(self.rp) {
                *v -= r;
            }
            let err = max_abs(&res);
            if err >= 0.5 * last || err <= 1e-15 * (1.0 + max_abs(self.rp)) {
                break;
            }
            last = err;
            self.schur.solve_in_place(&mut res);
            for (d, c) in dy.iter_mut().zip(&res) {
                *d += c;
            }
            atdy = ws.adjoint(&dy);
            dx = self.primal_step(&w, &atdy);
        }
        let dz = atdy
            .into_iter()
            .zip(self.rd)
            .map(|(mut d, r)| {
                d.axpy(1.0, r);
                d
            })
            .collect();
        Direction { dx, dy, dz }
    }

    fn primal_step(&self, w: &[RealMatrix], atdy: &[RealMatrix]) -> Blocks {
        w.iter()
            .zip(atdy)
            .enumerate()
            .map(|(k, (wk, ak))| {
                let mut d = wk.clone();
                d.axpy(-1.0, &matmul(&matmul(&self.x[k], ak), &self.zinv[k]));
                d.symmetrize();
                d
            })
            .collect()
    }
}

/// Fraction-to-boundary step confirmed by Cholesky probes.
fn step_length(m: &[RealMatrix], d: &[RealMatrix], fraction: f64) -> Result<f64> {
    let mut alpha = f64::INFINITY;
    for (mk, dk) in m.iter().zip(d) {
        alpha = alpha.min(max_step(mk, dk)?);
    }
    let mut alpha = (fraction * alpha).min(1.0);
    for _ in 0..MAX_BACKTRACKS {
        let ok = m.iter().zip(d).all(|(mk, dk)| {
            let mut t = mk.clone();
            t.axpy(alpha, dk);
            cholesky_spd(&t).is_ok()
        });
        if ok {
            return Ok(alpha);
        }
        alpha *= 0.9;
    }
    Ok(0.0)
}

fn add_step(m: &mut [RealMatrix], d: &[RealMatrix], alpha: f64) {
    for (mk, dk) in m.iter_mut().zip(d) {
        mk.axpy(alpha, dk);
        mk.symmetrize();
    }
}

struct Snapshot {
    x: Blocks,
    y: Vec<f64>,
    merit: f64,
}

/// Infeasible-start primal-dual path following with the HKM direction and
/// Mehrotra predictor-corrector steps.
///
/// Starts from `X = Z = tau I`, `y = 0`, `tau = 1 + max |b_i|`. Stops when the
/// relative gap, `||A(X) - b||_inf` and `-lambda_min(A^T y - C)` are all
/// below their tolerances. The returned solution is certified with
/// [`certify_upper_bound`].
pub fn solve(p: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    if p.num_constraints() > MAX_CONSTRAINTS {
        return Err(Error::SizeCap(format!(
            "{} constraints exceed {MAX_CONSTRAINTS}",
            p.num_constraints()
        )));
    }
    let ws = Workspace::new(p);
    let tau = 1.0 + max_abs(&ws.b);
    let mut x: Blocks = p.blocks.iter().map(|&n| RealMatrix::scaled_identity(n, tau)).collect();
    let mut z = x.clone();
    let mut y = vec![0.0; p.num_constraints()];

    let mut log = Vec::new();
    let mut best: Option<Snapshot> = None;
    let mut stalls = 0;
    let mut mark = (f64::INFINITY, 0);
    let mut status = SolveStatus::NumericalFailure;
    let mut message = None;

    for iteration in 0..=opts.max_iter {
        let s = p.dual_slack(&y);
        let rp: Vec<f64> = ws.apply(&x).iter().zip(&ws.b).map(|(ax, b)| b - ax).collect();
        let rd: Blocks = s
            .iter()
            .zip(&z)
            .map(|(sk, zk)| {
                let mut r = sk.clone();
                r.axpy(-1.0, zk);
                r
            })
            .collect();
        let pobj = p.objective_value(&x);
        let dobj: f64 = ws.b.iter().zip(&y).map(|(b, y)| b * y).sum();
        let pinf = max_abs(&rp);
        let dinf = rd.iter().map(RealMatrix::max_abs).fold(0.0, f64::max);
        let dual_min = min_eigenvalue_blocks(&s)?;
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let mu = inner(&x, &z) / ws.n_total;

        let merit = gap.max(pinf).max(-dual_min);
        if best.as_ref().is_none_or(|b| merit < b.merit) {
            best = Some(Snapshot {
                x: x.clone(),
                y: y.clone(),
                merit,
            });
        }
        if gap < opts.gap_tol && pinf < opts.feas_tol && dual_min > -opts.feas_tol {
            status = SolveStatus::Optimal;
            log.push(record(iteration, pobj, dobj, pinf, dinf, mu, 0.0, 0.0, 0.0));
            break;
        }
        if merit < 0.5 * mark.0 {
            mark = (merit, iteration);
        } else if iteration - mark.1 >= PROGRESS_WINDOW {
            message = Some(format!("no progress in {PROGRESS_WINDOW} iterations"));
            log.push(record(iteration, pobj, dobj, pinf, dinf, mu, 0.0, 0.0, 0.0));
            break;
        }
        if iteration == opts.max_iter {
            message = Some(format!("iteration cap {} reached", opts.max_iter));
            log.push(record(iteration, pobj, dobj, pinf, dinf, mu, 0.0, 0.0, 0.0));
            break;
        }
        let size = x.iter().map(RealMatrix::max_abs).fold(max_abs(&y), f64::max);
        if !size.is_finite() || size > DIVERGENCE {
            status = SolveStatus::InfeasibleDetected;
            message = Some(format!("iterates diverged (magnitude {size:.3e})"));
            log.push(record(iteration, pobj, dobj, pinf, dinf, mu, 0.0, 0.0, 0.0));
            break;
        }

        let step = (|| -> Result<(Direction, f64, f64, f64)> {
            let zinv: Blocks = z.iter().map(spd_inverse).collect::<Result<_>>()?;
            let schur = factor_schur(ws.schur(&x, &zinv))?;
            let pt = Point {
                ws: &ws,
                x: &x,
                zinv: &zinv,
                rp: &rp,
                rd: &rd,
                schur: &schur,
            };

            // predictor: R_c Z^-1 = -X
            let pred = pt.direction(x.iter().map(|xk| xk.scale(-1.0)).collect());
            let ap = step_length(&x, &pred.dx, 1.0)?;
            let ad = step_length(&z, &pred.dz, 1.0)?;
            let mut xa = x.clone();
            add_step(&mut xa, &pred.dx, ap);
            let mut za = z.clone();
            add_step(&mut za, &pred.dz, ad);
            let mu_aff = inner(&xa, &za) / ws.n_total;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

            // corrector: R_c Z^-1 = sigma mu Z^-1 - X - dXa dZa Z^-1
            let rc_zinv: Blocks = (0..x.len())
                .map(|k| {
                    let mut w = zinv[k].scale(sigma * mu);
                    w.axpy(-1.0, &x[k]);
                    let t = matmul(&matmul(&pred.dx[k], &pred.dz[k]), &zinv[k]);
                    w.axpy(-1.0, &t);
                    w
                })
                .collect();
            let dir = pt.direction(rc_zinv);
            let ap = step_length(&x, &dir.dx, STEP_FRACTION)?;
            let ad = step_length(&z, &dir.dz, STEP_FRACTION)?;
            Ok((dir, ap, ad, sigma))
        })();

        let (dir, ap, ad, sigma) = match step {
            Ok(s) => s,
            Err(e) => {
                message = Some(e.to_string());
                log.push(record(iteration, pobj, dobj, pinf, dinf, mu, 0.0, 0.0, 0.0));
                break;
            }
        };
        log.push(record(iteration, pobj, dobj, pinf, dinf, mu, sigma, ap, ad));

        add_step(&mut x, &dir.dx, ap);
        add_step(&mut z, &dir.dz, ad);
        for (yi, di) in y.iter_mut().zip(&dir.dy) {
            *yi += ad * di;
        }

        if ap.max(ad) < 1e-10 {
            stalls += 1;
            if stalls >= MAX_STALLS {
                message = Some("step length stalled".into());
                break;
            }
        } else {
            stalls = 0;
        }
    }

    if status != SolveStatus::Optimal {
        if let Some(b) = best {
            if status == SolveStatus::NumericalFailure {
                x = b.x;
                y = b.y;
                let near = 100.0 * opts.gap_tol.max(opts.feas_tol);
                if b.merit < near {
                    status = SolveStatus::NearOptimal;
                }
            }
        }
    }
    finish(p, x, y, status, log, message)
}

#[allow(clippy::too_many_arguments)]
fn record(
    iteration: usize,
    primal_objective: f64,
    dual_objective: f64,
    primal_infeasibility: f64,
    dual_infeasibility: f64,
    mu: f64,
    sigma: f64,
    step_primal: f64,
    step_dual: f64,
) -> IterationRecord {
    IterationRecord {
        iteration,
        primal_objective,
        dual_objective,
        primal_infeasibility,
        dual_infeasibility,
        mu,
        sigma,
        step_primal,
        step_dual,
    }
}

fn finish(
    p: &SdpProblem,
    x: Blocks,
    y: Vec<f64>,
    mut status: SolveStatus,
    iterations: Vec<IterationRecord>,
    mut message: Option<String>,
) -> Result<SdpSolution> {
    let z = p.dual_slack(&y);
    let primal_objective = p.objective_value(&x);
    let dual_objective: f64 = p.constraints.iter().zip(&y).map(|(c, y)| c.rhs * y).sum();
    let primal_residual = max_abs(&p.primal_residual(&x));
    let dual_min_eigenvalue = min_eigenvalue_blocks(&z)?;
    let relative_gap =
        (primal_objective - dual_objective).abs() / (1.0 + primal_objective.abs() + dual_objective.abs());
    let mut sol = SdpSolution {
        status,
        x,
        y,
        z,
        primal_objective,
        dual_objective,
        certified_upper_bound: None,
        certificate_shift: 0.0,
        primal_residual,
        dual_min_eigenvalue,
        relative_gap,
        iterations,
        message: None,
        facial_reductions: 0,
    };
    if status.is_success() {
        match certify_upper_bound(p, &sol) {
            Ok(c) => {
                sol.certified_upper_bound = Some(c.bound);
                sol.certificate_shift = c.shift;
            }
            Err(e) => {
                status = SolveStatus::NumericalFailure;
                message = Some(e.to_string());
            }
        }
    }
    sol.status = status;
    sol.message = message;
    Ok(sol)
}
