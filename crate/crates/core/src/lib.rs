//! Secret-key rates for three mobile users who range each other over noisy
//! beacons, where each pair's key must stay hidden from the third user.
//!
//! Gaussian bounds ([`gaussian_rates`]) average closed-form per-slot
//! integrands over random geometry ([`montecarlo`]). [`discrete_region`]
//! evaluates the general achievable region for finite alphabets, and
//! [`region_tracing`] sweeps parameters and traces projections of the
//! rate-limited region. All rates are in bits.
//!
//! ```
//! use pairkey_core::gaussian_rates::{outer_bound, thm2_bounds};
//! use pairkey_core::geometry::MobilityConfig;
//! use pairkey_core::montecarlo::McConfig;
//! use pairkey_core::observation::NoiseModel;
//!
//! let mob = MobilityConfig::default();
//! let noise = NoiseModel::uniform(0.1);
//! let mc = McConfig::new(2_000, 7);
//! let inner = thm2_bounds(&mob, &noise, &mc)?;
//! let outer = outer_bound(&mob, &noise, &mc)?;
//! assert!(inner[0].mean <= outer.rates.r12);
//! # Ok::<(), pairkey_core::Error>(())
//! ```

#![no_std]
// `!(x >= 0.0)` is deliberate throughout: it rejects NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod discrete_region;
pub mod error;
pub mod gaussian_rates;
pub mod geometry;
pub mod montecarlo;
pub mod observation;
pub mod region_tracing;
pub mod users;

pub use error::{Error, Result};
pub use users::{Direction, Pair, User};
