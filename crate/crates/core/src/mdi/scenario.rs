use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::quantum::{
    double_ensemble, double_statistics, honest_statistics, mix_white_noise, ObservedStatistics, Povm,
    StateEnsemble, MAX_DIM,
};

/// How the input distribution enters the guessing probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Every input counts with its probability `p_a`; statistics are joint.
    FiniteQ,
    /// Only the generation input is guessed; the other inputs are test rounds
    /// whose conditional statistics constrain the adversary.
    AsymptoticAsymmetric,
}

/// A trusted source together with the statistics observed on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub ensemble: StateEnsemble,
    pub observed: ObservedStatistics,
    pub mode: Mode,
    /// Input used for randomness generation; index 0 by convention.
    pub generation_index: usize,
}

impl Scenario {
    pub fn new(ensemble: StateEnsemble, observed: ObservedStatistics, mode: Mode) -> Result<Self> {
        let s = Self {
            ensemble,
            observed,
            mode,
            generation_index: 0,
        };
        s.validate()?;
        Ok(s)
    }

    /// Honest statistics of `povm` on `ensemble`, mixed with white noise of weight `1 - eta`.
    pub fn honest(ensemble: StateEnsemble, povm: &Povm, eta: f64, mode: Mode) -> Result<Self> {
        let observed = mix_white_noise(&honest_statistics(&ensemble, povm)?, eta)?;
        Self::new(ensemble, observed, mode)
    }

    pub fn with_generation_index(mut self, index: usize) -> Result<Self> {
        self.generation_index = index;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n_s = self.ensemble.len();
        if self.observed.n_inputs() != n_s {
            return Err(Error::DimensionMismatch {
                expected: n_s,
                got: self.observed.n_inputs(),
            });
        }
        if self.dim() > MAX_DIM {
            return Err(Error::SizeCap(format!("dimension {} exceeds {MAX_DIM}", self.dim())));
        }
        if self.generation_index >= n_s {
            return Err(Error::InvalidParameter(format!(
                "generation index {} with {n_s} inputs",
                self.generation_index
            )));
        }
        let tol = Tolerances::DEFAULT.distribution;
        let mismatch = self
            .ensemble
            .input_probs()
            .iter()
            .zip(self.observed.input_probs())
            .any(|(a, b)| (a - b).abs() > tol);
        if mismatch {
            return Err(Error::InvalidProbabilities(
                "ensemble and statistics disagree on the input distribution".into(),
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.ensemble.dim()
    }

    pub fn n_inputs(&self) -> usize {
        self.ensemble.len()
    }

    pub fn n_outcomes(&self) -> usize {
        self.observed.n_outcomes()
    }

    /// Replaces `p_a` in both the ensemble and the statistics.
    pub fn with_input_probs(&self, p: Vec<f64>) -> Result<Self> {
        Ok(Self {
            ensemble: self.ensemble.with_input_probs(p.clone())?,
            observed: self.observed.with_input_probs(p)?,
            mode: self.mode,
            generation_index: self.generation_index,
        })
    }

    /// Two independent copies, solved in the same mode. The generation input
    /// is the pair `(g, g)`.
    pub fn doubled(&self) -> Result<Self> {
        let n_s = self.n_inputs();
        Self::new(double_ensemble(&self.ensemble)?, double_statistics(&self.observed)?, self.mode)?
            .with_generation_index(self.generation_index * n_s + self.generation_index)
    }
}
