//! Fully Bayesian inference for Gaussian mixture autoregressive (MAR) models.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. Randomness is
//! always passed in explicitly, so every routine is deterministic given a seed.
//!
//! - [`model`]: the MAR model, conditional densities, likelihoods, simulation.
//! - [`stability`]: whole-model stability via the Kronecker companion test.
//! - [`sampler`]: Gibbs + random-walk Metropolis posterior sampler.
//! - [`relabel`]: online k-means correction of label switching.
//! - [`rjmcmc`]: reversible-jump moves on component orders.
//! - [`evidence`]: marginal likelihood by the reduced-run ordinate method.
//! - [`summary`]: posterior summaries, HPD intervals, kernel density grids.
//! - [`forecast`]: exact and Monte Carlo predictive densities, posterior averaging.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod forecast;
pub mod evidence;
pub mod linalg;
pub mod math;
pub mod model;
pub mod presets;
pub mod relabel;
pub mod rjmcmc;
pub mod rng;
pub mod sampler;
pub mod stability;
pub mod summary;

#[cfg(test)]
mod testutil;

pub use error::{MarError, Result};
pub use model::{ConditionalMixture, LatentAllocation, MarSpec, TimeSeries};
pub use rng::{derive_seed, rng_from_seed, ChainRng};
pub use stability::{is_stable, StabilityReport};
