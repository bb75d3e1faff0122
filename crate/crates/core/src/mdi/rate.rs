use super::build::build_sdp;
use super::face::exposed_face;
use super::{Mode, Scenario};
use crate::error::{Error, Result};
use crate::quantum::{
    angle_states, honest_statistics, mix_white_noise, tensor_ensemble, tensor_povm, DevicePreset, ObservedStatistics,
    SourcePreset, StateEnsemble,
};
use crate::solver::{solve, solve_on_face, SdpSolution, SolveStatus, SolverOptions};

/// Guessing probabilities above `1 + CLAMP_TOL` are flagged before clamping.
const CLAMP_TOL: f64 = 1e-8;
/// Rates smaller than this in magnitude are reported as zero.
const ZERO_RATE: f64 = 1e-7;

/// Certified randomness for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    /// Certified upper bound on the guessing probability, clamped to 1.
    pub p_guess_upper: f64,
    /// `-log2(p_guess_upper)`.
    pub rate_bits: f64,
    /// `rate_bits / log2(d)`.
    pub rate_per_qubit: f64,
    pub classical_bound_bits: f64,
    pub input_cost_bits: f64,
    /// `rate_bits - input_cost_bits`.
    pub net_expansion_bits: f64,
    /// Set when the certified bound exceeded 1 by more than `1e-8`.
    pub clamped: bool,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub status: SolveStatus,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub certificate_shift: f64,
    pub iterations: usize,
    pub raw_rows: usize,
    pub kept_rows: usize,
}

fn log2d(d: usize) -> f64 {
    (d as f64).log2()
}

/// `-log2 sum_a max_x p_a P(x|a)`.
pub fn classical_min_entropy(stats: &ObservedStatistics) -> f64 {
    let guess: f64 = (0..stats.n_inputs())
        .map(|a| (0..stats.n_outcomes()).map(|x| stats.joint(x, a)).fold(0.0, f64::max))
        .sum();
    clean_rate(-guess.log2())
}

/// The classical bound matching the scenario's objective: the joint form in
/// finite mode, the generation input alone in asymptotic mode.
pub fn classical_bound(s: &Scenario) -> f64 {
    match s.mode {
        Mode::FiniteQ => classical_min_entropy(&s.observed),
        Mode::AsymptoticAsymmetric => {
            let row = &s.observed.conditionals()[s.generation_index];
            clean_rate(-row.iter().fold(0.0, |m: f64, &v| m.max(v)).log2())
        }
    }
}

/// Shannon entropy of the input choice in bits.
pub fn input_cost(p: &[f64]) -> f64 {
    p.iter().filter(|&&v| v > 0.0).map(|v| -v * v.log2()).sum::<f64>().max(0.0)
}

fn clean_rate(r: f64) -> f64 {
    if r.abs() < ZERO_RATE {
        0.0
    } else {
        r
    }
}

/// Solves the effective-measurement SDP and converts its certified optimum
/// into a min-entropy rate.
pub fn guessing_probability(s: &Scenario, opts: &SolverOptions) -> Result<RateResult> {
    Ok(solve_scenario(s, opts)?.0)
}

/// Like [`guessing_probability`], also returning the raw solver output.
pub fn solve_scenario(s: &Scenario, opts: &SolverOptions) -> Result<(RateResult, SdpSolution)> {
    let (problem, report) = build_sdp(s, opts.relax)?;
    let face = if opts.relax == 0.0 { exposed_face(s, &problem.blocks)? } else { None };
    let sol = match &face {
        Some(face) => solve_on_face(&problem, face, opts)?,
        None => solve(&problem, opts)?,
    };
    let bound = match (sol.status.is_success(), sol.certified_upper_bound) {
        (true, Some(b)) => b,
        _ => {
            return Err(Error::Solver {
                status: sol.status.to_string(),
                message: sol.message.clone().unwrap_or_default(),
            })
        }
    };
    let clamped = bound > 1.0 + CLAMP_TOL;
    let p_guess_upper = bound.min(1.0);
    let rate_bits = clean_rate(-p_guess_upper.log2());
    let input_cost_bits = match s.mode {
        Mode::FiniteQ => input_cost(s.observed.input_probs()),
        Mode::AsymptoticAsymmetric => 0.0,
    };
    let d = s.dim();
    let result = RateResult {
        p_guess_upper,
        rate_bits,
        rate_per_qubit: if d > 1 { rate_bits / log2d(d) } else { 0.0 },
        classical_bound_bits: classical_bound(s),
        input_cost_bits,
        net_expansion_bits: rate_bits - input_cost_bits,
        clamped,
        diagnostics: Diagnostics {
            status: sol.status,
            primal_objective: sol.primal_objective,
            dual_objective: sol.dual_objective,
            certificate_shift: sol.certificate_shift,
            iterations: sol.iterations.len(),
            raw_rows: report.raw_rows,
            kept_rows: report.rank(),
        },
    };
    Ok((result, sol))
}

/// Rates of one copy and of two independent copies.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoCopyResult {
    pub single: RateResult,
    pub double: RateResult,
    /// `R(single) - R(double) / 2`.
    pub delta: f64,
}

pub fn two_copy_delta(s: &Scenario, opts: &SolverOptions) -> Result<TwoCopyResult> {
    if s.dim() > 4 {
        return Err(Error::SizeCap(format!("two-copy comparison needs d <= 4, got {}", s.dim())));
    }
    let doubled = s.doubled()?;
    let single = guessing_probability(s, opts)?;
    let double = guessing_probability(&doubled, opts)?;
    let delta = single.rate_bits - 0.5 * double.rate_bits;
    Ok(TwoCopyResult { single, double, delta })
}

/// The two-state source of the angle family with `sigma_x` statistics,
/// first state sent with probability `q`, in finite mode.
pub fn angle_scenario(alpha: f64, eta: f64, q: f64) -> Result<Scenario> {
    let (phi, psi) = angle_states(alpha)?;
    let ens = StateEnsemble::with_asymmetry(vec![phi, psi], q)?;
    let observed = mix_white_noise(&honest_statistics(&ens, &DevicePreset::SigmaX.povm())?, eta)?;
    Scenario::new(ens, observed, Mode::FiniteQ)
}

/// `m` qubits, each prepared from `source` with uniform probabilities,
/// measured honestly by `sigma_z` on every qubit, in asymptotic mode.
pub fn multi_qubit_scenario(source: SourcePreset, m: usize, eta: f64) -> Result<Scenario> {
    let base = StateEnsemble::uniform(source.states())?;
    let ens = tensor_ensemble(&base, m)?;
    let povm = tensor_povm(&DevicePreset::SigmaZ.povm(), m)?;
    Scenario::honest(ens, &povm, eta, Mode::AsymptoticAsymmetric)
}

/// Rate along a grid of angle parameters.
pub fn angle_sweep(alphas: &[f64], eta: f64, q: f64, opts: &SolverOptions) -> Result<Vec<(f64, RateResult)>> {
    alphas
        .iter()
        .map(|&alpha| Ok((alpha, guessing_probability(&angle_scenario(alpha, eta, q)?, opts)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{tomographic_set, DevicePreset};

    #[test]
    fn input_cost_examples() {
        assert!((input_cost(&[0.5, 0.5]) - 1.0).abs() < 1e-15);
        assert_eq!(input_cost(&[1.0, 0.0, 0.0, 0.0]), 0.0);
        let p = [0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0];
        assert!((input_cost(&p) - (0.5 + 0.5 * 6f64.log2())).abs() < 1e-14);
    }

    #[test]
    fn classical_examples() {
        let det = ObservedStatistics::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.3, 0.7]).unwrap();
        assert_eq!(classical_min_entropy(&det), 0.0);
        let uni = ObservedStatistics::new(vec![vec![0.25; 4]; 2], vec![0.9, 0.1]).unwrap();
        assert!((classical_min_entropy(&uni) - 2.0).abs() < 1e-15);

        let ens = StateEnsemble::new(tomographic_set(), vec![0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]).unwrap();
        let stats = honest_statistics(&ens, &DevicePreset::SigmaZ.povm()).unwrap();
        assert!((classical_min_entropy(&stats) - -(2.0f64 / 3.0).log2()).abs() < 1e-14);
    }

    #[test]
    fn single_input_has_no_randomness() {
        let ens = StateEnsemble::uniform(vec![tomographic_set().remove(0)]).unwrap();
        let obs = ObservedStatistics::new(vec![vec![0.5, 0.5]], vec![1.0]).unwrap();
        let s = Scenario::new(ens, obs, Mode::FiniteQ).unwrap();
        let r = guessing_probability(&s, &SolverOptions::default()).unwrap();
        assert_eq!(r.rate_bits, 0.0);
        assert!((r.p_guess_upper - 1.0).abs() < 1e-7);
    }
}
