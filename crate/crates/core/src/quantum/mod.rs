//! Trusted-side objects: states, measurements, ensembles and statistics.
//!
//! Bloch vectors use the axes `e1 <-> sigma_x`, `e2 <-> sigma_y`,
//! `e3 <-> sigma_z`, so `|+>` points along `e1`. Input index 0 is always the
//! generation-round state.

mod povm;
mod states;
mod statistics;

pub use povm::{
    check_extremal, check_unbiased, extremal3, extremal4, extremality_defect, povm_from_bloch,
    povm_from_matrices, projective, tensor_povm, BlochPovmSpec, DevicePreset, ExtremalityDefect, Povm,
};
pub use states::{
    angle_states, asymmetric_probs, bloch_to_density, check_distribution, double_ensemble, tensor_ensemble,
    tomographic_set, DensityMatrix, SourcePreset, StateEnsemble,
};
pub use statistics::{double_statistics, honest_statistics, mix_white_noise, ObservedStatistics};

/// Largest Hilbert-space dimension handled anywhere in the crate.
pub const MAX_DIM: usize = 32;
