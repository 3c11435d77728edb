//! Numerical laboratory for chordal Loewner evolutions.
//!
//! The crate is organised bottom-up:
//!
//! * [`exponents`] holds the closed-form multifractal and integral-means exponents
//!   that every estimator is compared against.
//! * [`loewner`] integrates forward, reverse and inverse Loewner flows for a sampled
//!   driving function using exact per-step slit maps, and extracts curve traces.
//! * [`drivers`] samples SLE_κ / SLE_κ(ρ) drivers and the auxiliary diffusions
//!   (angle process, Bessel processes, force-point coordinates).
//! * [`martingale`] implements the reverse-flow martingale and the importance
//!   sampler built on it.
//! * [`gff`] samples the harmonic part of a free-boundary GFF on the disk.
//! * [`estimators`] turns simulations into exponent and dimension measurements.
//!
//! Monte Carlo work is spread over replicas with [`par`]; every replica owns an
//! independent random stream derived from `(master_seed, replica)` by [`rng`], so
//! results do not depend on the number of worker threads.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod drivers;
pub mod error;
pub mod estimators;
pub mod exponents;
pub mod gff;
pub mod io;
pub mod loewner;
pub mod martingale;
pub mod numeric;
pub mod par;
pub mod rng;

pub use error::{Error, Result};
pub use exponents::Kappa;

/// Version string embedded in every result file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
