//! Single-photon pulse propagation through a turbulent atmosphere.
//!
//! The crate pairs closed-form beam and photocount models with a ray
//! (phase-space) Monte Carlo that can be checked against them:
//!
//! * [`turbulence`]: refractive-index spectrum, the bulk turbulence
//!   parameter `T`, and spectral synthesis of frozen screens.
//! * [`source`]: Gaussian aperture mode, transmitter phase screen (random
//!   tilt) and photon-number statistics.
//! * [`propagation`]: ballistic, white-noise and frozen-screen ray
//!   propagation, plus the analytic mean-intensity / beam-radius law.
//! * [`counting`]: photocount mean and normalized variance for Fock and
//!   Poisson sources.
//! * [`montecarlo`]: ensembles over frozen realizations, scintillation index
//!   estimation and sampled count statistics.
//!
//! All lengths are in metres and all times in seconds.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod constants;
pub mod counting;
mod error;
pub mod montecarlo;
pub mod propagation;
pub mod rng;
pub mod source;
pub mod stats;
pub mod turbulence;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/turbulence.md")]
    mod turbulence {}
    #[doc = include_str!("../../../book/src/source.md")]
    mod source {}
    #[doc = include_str!("../../../book/src/propagation.md")]
    mod propagation {}
    #[doc = include_str!("../../../book/src/counting.md")]
    mod counting {}
    #[doc = include_str!("../../../book/src/montecarlo.md")]
    mod montecarlo {}
}
