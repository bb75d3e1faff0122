use super::build::block_index;
use super::{Mode, Scenario};
use crate::error::{Error, Result};
use crate::linalg::{real_unembed, HermitianOperator, RealMatrix};
use crate::quantum::Povm;

/// Default tolerance for the strategy invariants.
pub const STRATEGY_TOL: f64 = 1e-8;

/// The operators `M[x,e|a]`, stored at [`block_index`]`(n_o, a, x, e)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveStrategy {
    n_s: usize,
    n_o: usize,
    ops: Vec<HermitianOperator>,
}

impl EffectiveStrategy {
    pub fn new(n_s: usize, n_o: usize, ops: Vec<HermitianOperator>) -> Result<Self> {
        if ops.len() != n_s * n_o * n_o || ops.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: n_s * n_o * n_o,
                got: ops.len(),
            });
        }
        let d = ops[0].dim();
        if let Some(op) = ops.iter().find(|o| o.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: op.dim(),
            });
        }
        Ok(Self { n_s, n_o, ops })
    }

    /// `M[x,e|a] = (1 - eta) / n_o delta_xe I + eta w_e Pi_x` for a guess
    /// distribution `w`: Eve predicts white-noise outcomes exactly and guesses
    /// `e ~ w` independently otherwise. Feasible for the statistics of `povm`
    /// mixed with noise `eta`, for every input set.
    pub fn noisy_product(povm: &Povm, eta: f64, weights: &[f64], n_s: usize) -> Result<Self> {
        let n_o = povm.outcomes();
        if weights.len() != n_o {
            return Err(Error::DimensionMismatch {
                expected: n_o,
                got: weights.len(),
            });
        }
        crate::quantum::check_distribution(weights)?;
        let noise = HermitianOperator::identity(povm.dim()).scale((1.0 - eta) / n_o as f64);
        let ops = (0..n_s)
            .flat_map(|_| (0..n_o).flat_map(move |x| (0..n_o).map(move |e| (x, e))))
            .map(|(x, e)| {
                let m = povm.elements()[x].scale(eta * weights[e]);
                if x == e {
                    m.add(&noise)
                } else {
                    m
                }
            })
            .collect();
        Self::new(n_s, n_o, ops)
    }

    /// Reads the strategy off the first `n_s n_o^2` blocks of a primal solution.
    pub fn from_blocks(n_s: usize, n_o: usize, blocks: &[RealMatrix]) -> Result<Self> {
        let count = n_s * n_o * n_o;
        if blocks.len() < count {
            return Err(Error::DimensionMismatch {
                expected: count,
                got: blocks.len(),
            });
        }
        Self::new(n_s, n_o, blocks[..count].iter().map(real_unembed).collect::<Result<_>>()?)
    }

    pub fn get(&self, x: usize, e: usize, a: usize) -> &HermitianOperator {
        &self.ops[block_index(self.n_o, a, x, e)]
    }

    pub fn dim(&self) -> usize {
        self.ops[0].dim()
    }

    /// Guessing probability of this strategy in the scenario's mode.
    pub fn objective(&self, s: &Scenario) -> f64 {
        let p = s.observed.input_probs();
        (0..self.n_s)
            .filter_map(|a| match s.mode {
                Mode::FiniteQ => Some((a, p[a])),
                Mode::AsymptoticAsymmetric => (a == s.generation_index).then_some((a, 1.0)),
            })
            .map(|(a, w)| {
                let rho = s.ensemble.states()[a].op();
                w * (0..self.n_o).map(|x| self.get(x, x, a).inner(rho)).sum::<f64>()
            })
            .sum()
    }

    /// Checks positivity, normalization, both no-signalling conditions and
    /// reproduction of the observed statistics, each within `tol`.
    pub fn check(&self, s: &Scenario, tol: f64) -> Result<()> {
        let (n_s, n_o, d) = (self.n_s, self.n_o, self.dim());
        if n_s != s.n_inputs() || n_o != s.n_outcomes() || d != s.dim() {
            return Err(Error::Strategy("scenario shape".into()));
        }
        let id = HermitianOperator::identity(d);
        for (k, op) in self.ops.iter().enumerate() {
            let min = op.min_eigenvalue()?;
            if min < -tol {
                return Err(Error::Strategy(format!("positivity of block {k} (eigenvalue {min:.3e})")));
            }
        }
        let sum = |it: &mut dyn Iterator<Item = &HermitianOperator>| {
            it.fold(HermitianOperator::zeros(d), |acc, m| acc.add(m))
        };
        let marginal_x = |x: usize, a: usize| sum(&mut (0..n_o).map(|e| self.get(x, e, a)));
        let p = s.observed.input_probs();
        for a in 0..n_s {
            let total = sum(&mut (0..n_o * n_o).map(|k| &self.ops[a * n_o * n_o + k]));
            let dev = total.max_abs_diff(&id);
            if dev > tol {
                return Err(Error::Strategy(format!("normalization for a={a} ({dev:.3e})")));
            }
            for e in 0..n_o {
                let m = sum(&mut (0..n_o).map(|x| self.get(x, e, a)));
                let dev = m.max_abs_diff(&id.scale(m.trace() / d as f64));
                if dev > tol {
                    return Err(Error::Strategy(format!("proportionality for a={a}, e={e} ({dev:.3e})")));
                }
            }
            for x in 0..n_o {
                let mx = marginal_x(x, a);
                if a > 0 {
                    let dev = mx.max_abs_diff(&marginal_x(x, 0));
                    if dev > tol {
                        return Err(Error::Strategy(format!("nonsignalling for a={a}, x={x} ({dev:.3e})")));
                    }
                }
                let rho = s.ensemble.states()[a].op();
                let (got, want) = match s.mode {
                    Mode::FiniteQ => (p[a] * mx.inner(rho), s.observed.joint(x, a)),
                    Mode::AsymptoticAsymmetric => (mx.inner(rho), s.observed.conditional(x, a)),
                };
                if (got - want).abs() > tol {
                    return Err(Error::Strategy(format!(
                        "statistics for a={a}, x={x} ({got} vs {want})"
                    )));
                }
            }
        }
        Ok(())
    }
}
