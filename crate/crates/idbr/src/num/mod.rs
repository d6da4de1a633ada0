//! Special functions and reproducible random sampling.
//!
//! Everything downstream (likelihood, sampler, simulation studies) is built
//! on the two pieces here: the regularized incomplete beta function, which
//! turns beta-density areas into grid-cell probabilities, and a small
//! counter-based RNG that makes every draw a pure function of
//! `(seed, stream, counter)`.

mod rng;
mod special;

pub use rng::{derive_seed, Rng};
pub use special::{log_beta, log_gamma, reg_inc_beta};

pub(crate) use special::reg_inc_beta_prepared;
