//! Monte Carlo ghost imaging with the quantum-mirror model of SPDC pairs.
//!
//! - [`model`]: rays, pump wavefronts, photon pairs
//! - [`source`]: seeded pair sampler
//! - [`mirror`]: signal-to-idler crossing transform and imaging laws
//! - [`bench`]: optical elements, arms, Klyshko folding
//! - [`sim`]: coincidence imaging runs and image metrics
//! - [`verify`]: ray-tracing oracle for the imaging laws
//! - [`export`]: CSV and PGM writers

pub mod bench;
pub mod error;
pub mod export;
pub mod mirror;
pub mod model;
pub mod scenes;
pub mod sim;
pub mod source;
pub mod verify;

pub use error::Error;
