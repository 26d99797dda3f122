//! Symbolic orbits with prescribed statistical limit behaviour.
//!
//! The crate builds, analyzes and certifies points of one-sided shift spaces
//! through the block schedules that generate them. It computes natural and
//! Banach densities of visit-time sets, the four statistical limit sets of an
//! orbit together with its classical limit set, and classifies a schedule
//! into one of the twelve asymptotic behaviour cases an orbit with empty
//! syndetic center can realize — or synthesizes a schedule realizing a
//! requested case, with a machine-checkable certificate. Entropy comes in via
//! spectral and counting estimators for subshifts, a cylinder-counting form
//! of Katok's formula, certified lower bounds for the synthesized families,
//! and concatenation subshifts that approximate a Markov measure's entropy.
//! Exact pseudo-orbit shadowing on shifts and for the binary doubling map
//! rounds out the toolkit.
//!
//! Everything is deterministic for a fixed seed, and every quantity that can
//! be exact is exact: cylinder weights and Birkhoff bounds are rationals,
//! shift distances are dyadic, the doubling-map checks run in dyadic
//! arithmetic. Logs are natural throughout; entropies are in nats.

pub mod birkhoff;
pub mod density;
pub mod entropy;
pub mod error;
pub mod limitset;
pub mod measure;
pub mod report;
pub mod schedule;
pub mod shadow;
pub mod shift;
pub mod synthesis;

pub use error::{Error, Result};
