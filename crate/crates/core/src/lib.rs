//! Certified lower bounds on the randomness produced by a
//! measurement-device-independent (MDI) setup: a trusted, fully characterized
//! state source feeding an untrusted detector.
//!
//! The adversary's most general individual strategy is captured by a family of
//! effective measurements `M[x,e|a]` acting on the sent state. Maximizing the
//! probability that Eve's guess `e` matches the lab outcome `x`, subject to the
//! observed statistics and two no-signalling conditions, is a semidefinite
//! program. Its certified optimum upper-bounds the guessing probability and
//! hence lower-bounds the conditional min-entropy `-log2(p_guess)`.
//!
//! Layout:
//! - [`linalg`]: dense complex/real kernels (Jacobi, Cholesky, envelope
//!   factorizations, real embedding of Hermitian matrices).
//! - [`quantum`]: density matrices, POVMs (including Bloch-parametrized
//!   extremal qubit POVMs), ensembles, honest statistics and the noise model.
//! - [`sdp`]: block-diagonal standard-form problems and preprocessing.
//! - [`solver`]: primal-dual interior-point method and the dual certificate.
//! - [`mdi`]: scenario assembly, rates, classical bound, sweeps.

pub mod config;
pub mod error;
pub mod linalg;
pub mod mdi;
pub mod quantum;
pub mod sdp;
pub mod solver;

pub use config::Tolerances;
pub use error::{Error, Result};
