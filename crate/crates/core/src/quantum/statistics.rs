use super::states::check_distribution;
use super::{Povm, StateEnsemble};
use crate::config::Tolerances;
use crate::error::{Error, Result};

/// Largest outcome or input count accepted for a statistics table.
const MAX_TABLE_SIDE: usize = 1024;

/// The table `P(x|a)` together with the input distribution `p_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedStatistics {
    /// `conditionals[a][x] = P(x|a)`.
    conditionals: Vec<Vec<f64>>,
    input_probs: Vec<f64>,
}

impl ObservedStatistics {
    /// Validates every row; tiny negative entries are clipped and the row renormalized.
    pub fn new(conditionals: Vec<Vec<f64>>, input_probs: Vec<f64>) -> Result<Self> {
        let n_s = conditionals.len();
        if n_s == 0 {
            return Err(Error::InvalidProbabilities("no input rows".into()));
        }
        let n_o = conditionals[0].len();
        if n_o == 0 {
            return Err(Error::InvalidProbabilities("no outcomes".into()));
        }
        if n_s > MAX_TABLE_SIDE || n_o > MAX_TABLE_SIDE {
            return Err(Error::SizeCap(format!("{n_s}x{n_o} statistics table")));
        }
        if input_probs.len() != n_s {
            return Err(Error::DimensionMismatch {
                expected: n_s,
                got: input_probs.len(),
            });
        }
        check_distribution(&input_probs)?;
        let conditionals = conditionals
            .into_iter()
            .enumerate()
            .map(|(a, row)| {
                if row.len() != n_o {
                    return Err(Error::DimensionMismatch {
                        expected: n_o,
                        got: row.len(),
                    });
                }
                normalize_row(a, row)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            conditionals,
            input_probs,
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.conditionals.len()
    }

    pub fn n_outcomes(&self) -> usize {
        self.conditionals[0].len()
    }

    pub fn conditionals(&self) -> &[Vec<f64>] {
        &self.conditionals
    }

    pub fn conditional(&self, x: usize, a: usize) -> f64 {
        self.conditionals[a][x]
    }

    pub fn input_probs(&self) -> &[f64] {
        &self.input_probs
    }

    /// `P_obs(x, a) = p_a P(x|a)`.
    pub fn joint(&self, x: usize, a: usize) -> f64 {
        self.input_probs[a] * self.conditionals[a][x]
    }

    pub fn with_input_probs(&self, input_probs: Vec<f64>) -> Result<Self> {
        Self::new(self.conditionals.clone(), input_probs)
    }
}

fn normalize_row(a: usize, mut row: Vec<f64>) -> Result<Vec<f64>> {
    let tol = Tolerances::DEFAULT.statistics;
    for (x, v) in row.iter_mut().enumerate() {
        if !v.is_finite() || *v < -tol {
            return Err(Error::InvalidProbabilities(format!("P({x}|{a}) = {v}")));
        }
        *v = v.max(0.0);
    }
    let s: f64 = row.iter().sum();
    if (s - 1.0).abs() > tol {
        return Err(Error::InvalidProbabilities(format!("row {a} sums to {s}")));
    }
    if s != 1.0 {
        row.iter_mut().for_each(|v| *v /= s);
    }
    Ok(row)
}

/// Born-rule statistics `P(x|a) = tr(Pi_x rho(a))`.
pub fn honest_statistics(ens: &StateEnsemble, povm: &Povm) -> Result<ObservedStatistics> {
    if ens.dim() != povm.dim() {
        return Err(Error::DimensionMismatch {
            expected: ens.dim(),
            got: povm.dim(),
        });
    }
    let rows = ens
        .states()
        .iter()
        .map(|rho| povm.elements().iter().map(|e| e.inner(rho.op())).collect())
        .collect();
    ObservedStatistics::new(rows, ens.input_probs().to_vec())
}

/// `P(x|a) <- eta P(x|a) + (1 - eta) / n_o`.
pub fn mix_white_noise(stats: &ObservedStatistics, eta: f64) -> Result<ObservedStatistics> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("detector quality {eta} outside [0, 1]")));
    }
    let floor = (1.0 - eta) / stats.n_outcomes() as f64;
    let conditionals = stats
        .conditionals
        .iter()
        .map(|row| row.iter().map(|p| eta * p + floor).collect())
        .collect();
    Ok(ObservedStatistics {
        conditionals,
        input_probs: stats.input_probs.clone(),
    })
}

/// Two independent copies: `P((x1,x2)|(a1,a2)) = P(x1|a1) P(x2|a2)`, with
/// row-major indices `a1 * n_s + a2` and `x1 * n_o + x2`.
pub fn double_statistics(stats: &ObservedStatistics) -> Result<ObservedStatistics> {
    let (n_s, n_o) = (stats.n_inputs(), stats.n_outcomes());
    if n_s * n_s > MAX_TABLE_SIDE || n_o * n_o > MAX_TABLE_SIDE {
        return Err(Error::SizeCap(format!("doubling a {n_s}x{n_o} statistics table")));
    }
    let mut conditionals = Vec::with_capacity(n_s * n_s);
    let mut input_probs = Vec::with_capacity(n_s * n_s);
    for (r1, p1) in stats.conditionals.iter().zip(&stats.input_probs) {
        for (r2, p2) in stats.conditionals.iter().zip(&stats.input_probs) {
            conditionals.push(r1.iter().flat_map(|a| r2.iter().map(move |b| a * b)).collect());
            input_probs.push(p1 * p2);
        }
    }
    Ok(ObservedStatistics {
        conditionals,
        input_probs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{extremal4, povm_from_bloch, tomographic_set, DevicePreset};

    fn tomo() -> StateEnsemble {
        StateEnsemble::uniform(tomographic_set()).unwrap()
    }

    #[test]
    fn sigma_z_statistics() {
        let s = honest_statistics(&tomo(), &DevicePreset::SigmaZ.povm()).unwrap();
        assert_eq!(s.conditionals()[1], vec![1.0, 0.0]);
        for a in [0, 3] {
            assert!((s.conditional(0, a) - 0.5).abs() < 1e-15);
        }
        assert_eq!(s.joint(0, 1), 0.25);
    }

    #[test]
    fn extremal4_on_zero() {
        let s = honest_statistics(&tomo(), &povm_from_bloch(&extremal4()).unwrap()).unwrap();
        let expect = [1.0 / 8.0, 7.0 / 24.0, 13.0 / 24.0, 1.0 / 24.0];
        for (x, e) in expect.iter().enumerate() {
            assert!((s.conditional(x, 1) - e).abs() < 1e-14);
        }
        // unbiased on |+>
        for x in 0..4 {
            assert!((s.conditional(x, 0) - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn white_noise() {
        let s = ObservedStatistics::new(vec![vec![1.0, 0.0]], vec![1.0]).unwrap();
        assert_eq!(mix_white_noise(&s, 1.0).unwrap(), s);
        assert_eq!(mix_white_noise(&s, 0.0).unwrap().conditionals()[0], vec![0.5, 0.5]);
        let m = mix_white_noise(&s, 0.8).unwrap();
        assert!((m.conditional(0, 0) - 0.9).abs() < 1e-15);
        assert!((m.conditional(1, 0) - 0.1).abs() < 1e-15);
        assert!(mix_white_noise(&s, 1.2).is_err());
    }

    #[test]
    fn row_validation() {
        assert!(ObservedStatistics::new(vec![vec![0.5, 0.4]], vec![1.0]).is_err());
        assert!(ObservedStatistics::new(vec![vec![1.1, -0.1]], vec![1.0]).is_err());
        let clipped = ObservedStatistics::new(vec![vec![1.0 + 1e-12, -1e-12]], vec![1.0]).unwrap();
        assert_eq!(clipped.conditional(1, 0), 0.0);
        assert!((clipped.conditional(0, 0) - 1.0).abs() < 1e-15);
        assert!(ObservedStatistics::new(vec![vec![1.0, 0.0], vec![1.0]], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn doubling() {
        let det = ObservedStatistics::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.5, 0.5]).unwrap();
        let d = double_statistics(&det).unwrap();
        assert_eq!(d.n_inputs(), 4);
        assert_eq!(d.n_outcomes(), 4);
        // (a1, a2) = (0, 1) gives (x1, x2) = (0, 1), index 1
        assert_eq!(d.conditionals()[1], vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(d.input_probs(), &[0.25; 4]);

        let uni = ObservedStatistics::new(vec![vec![0.5, 0.5]], vec![1.0]).unwrap();
        assert_eq!(double_statistics(&uni).unwrap().conditionals()[0], vec![0.25; 4]);
    }
}
