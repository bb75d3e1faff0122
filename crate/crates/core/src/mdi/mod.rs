//! The effective-measurement SDP for an MDI setup and its conversion into
//! randomness rates.
//!
//! Eve's individual attack is summarized by operators `M[x,e|a] >= 0` with
//! `sum_{x,e} M[x,e|a] = I`, `sum_x M[x,e|a]` proportional to `I`,
//! `sum_e M[x,e|a]` independent of `a`, and `sum_e tr(M[x,e|a] rho(a))`
//! equal to the observed statistics. Her guessing probability is
//! `sum_a p_a sum_x tr(M[x,x|a] rho(a))` in finite mode, or the same sum
//! restricted to the generation input in the asymptotic asymmetric limit.

mod build;
mod face;
mod rate;
mod scenario;
mod strategy;

pub use build::{block_index, build_raw_sdp, build_sdp, raw_row_count};
pub use face::{determined_marginals, exposed_face};
pub use rate::{
    angle_scenario, angle_sweep, classical_bound, classical_min_entropy, guessing_probability, input_cost, multi_qubit_scenario,
    solve_scenario, two_copy_delta, Diagnostics, RateResult, TwoCopyResult,
};
pub use scenario::{Mode, Scenario};
pub use strategy::{EffectiveStrategy, STRATEGY_TOL};
